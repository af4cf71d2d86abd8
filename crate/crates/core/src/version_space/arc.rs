//! Version spaces of two-dimensional homogeneous halfspaces as arcs of normal
//! angles.
//!
//! A normal `w(φ) = (cos φ, sin φ)` labels a positive example `x` correctly iff
//! `φ` lies in the closed half-circle centered at the angle of `x`, and a
//! negative example iff `φ` lies in the open half-circle centered opposite it.
//! Intersecting half-circles keeps a single arc of width at most π.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::Membership;
use crate::error::{Error, Result};
use crate::model::{Label, Point};

/// Consistent normal angles `φ ∈ [phi_lo, phi_hi]` (radians), with openness
/// flags for the endpoints. A width of 2π denotes the full circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSpace {
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl ArcSpace {
    /// The full circle.
    pub fn full() -> Self {
        ArcSpace { phi_lo: -PI, phi_hi: PI, lo_open: false, hi_open: false }
    }

    pub fn is_full(&self) -> bool {
        self.width() >= TAU
    }

    pub fn width(&self) -> f64 {
        self.phi_hi - self.phi_lo
    }

    /// Fits the arc from labeled two-dimensional points.
    pub fn fit<'a>(samples: impl Iterator<Item = (&'a Point, Label)>) -> Result<Self> {
        let mut arc = ArcSpace::full();
        for (x, label) in samples {
            let (x1, x2) = (x.coords()[0], x.coords()[1]);
            if x1 == 0.0 && x2 == 0.0 {
                // Every normal scores the origin 0, which is a positive label.
                if label == Label::Negative {
                    return Err(Error::NonRealizable { class: "linear" });
                }
                continue;
            }
            let theta = x2.atan2(x1);
            let (center, open) = match label {
                Label::Positive => (theta, false),
                Label::Negative => (theta + PI, true),
            };
            arc.intersect(center, open)?;
        }
        // Canonical placement: phi_lo in (−π, π].
        if !arc.is_full() {
            let k = ((PI - arc.phi_lo) / TAU).floor();
            arc.phi_lo += k * TAU;
            arc.phi_hi += k * TAU;
        }
        Ok(arc)
    }

    /// Intersects with the half-circle `[center − π/2, center + π/2]`.
    fn intersect(&mut self, center: f64, open: bool) -> Result<()> {
        if self.is_full() {
            *self = ArcSpace {
                phi_lo: center - FRAC_PI_2,
                phi_hi: center + FRAC_PI_2,
                lo_open: open,
                hi_open: open,
            };
            return Ok(());
        }
        let mid = 0.5 * (self.phi_lo + self.phi_hi);
        let c = center + TAU * ((mid - center) / TAU).round();
        let (lo, hi) = (c - FRAC_PI_2, c + FRAC_PI_2);
        if lo > self.phi_lo {
            self.phi_lo = lo;
            self.lo_open = open;
        } else if lo == self.phi_lo {
            self.lo_open |= open;
        }
        if hi < self.phi_hi {
            self.phi_hi = hi;
            self.hi_open = open;
        } else if hi == self.phi_hi {
            self.hi_open |= open;
        }
        if self.phi_lo > self.phi_hi || (self.phi_lo == self.phi_hi && (self.lo_open || self.hi_open)) {
            return Err(Error::NonRealizable { class: "linear" });
        }
        Ok(())
    }

    /// Whether the closed arc contains angle `alpha`.
    pub fn contains_angle(&self, alpha: f64) -> bool {
        self.is_full() || (alpha - self.phi_lo).rem_euclid(TAU) <= self.width()
    }

    /// Midpoint normal angle; 0 for the full circle.
    pub fn midpoint(&self) -> f64 {
        if self.is_full() {
            0.0
        } else {
            0.5 * (self.phi_lo + self.phi_hi)
        }
    }

    fn score(phi: f64, z: &[f64]) -> f64 {
        z[0] * phi.cos() + z[1] * phi.sin()
    }

    /// `(min, max)` of `⟨w(φ), z⟩` over the closed arc.
    fn score_range(&self, z: &[f64]) -> (f64, f64) {
        let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
        if self.is_full() {
            return (-r, r);
        }
        let theta = z[1].atan2(z[0]);
        let (a, b) = (Self::score(self.phi_lo, z), Self::score(self.phi_hi, z));
        let max = if self.contains_angle(theta) { r } else { a.max(b) };
        let min = if self.contains_angle(theta + PI) { -r } else { a.min(b) };
        (min, max)
    }

    /// Agreement status of `z`.
    pub fn membership(&self, z: &[f64]) -> Membership {
        if z[0] == 0.0 && z[1] == 0.0 {
            return Membership::AgreePlus;
        }
        let (min, max) = self.score_range(z);
        if min >= 0.0 {
            Membership::AgreePlus
        } else if max < 0.0 {
            Membership::AgreeMinus
        } else {
            Membership::Disagree
        }
    }

    /// Distance from `z` to the disagreement region: the smallest
    /// `|⟨w(φ), z⟩|` over the arc for agreed points, else 0.
    pub fn distance(&self, z: &[f64]) -> f64 {
        let (min, max) = self.score_range(z);
        match self.membership(z) {
            Membership::AgreePlus => min.max(0.0),
            Membership::AgreeMinus => (-max).max(0.0),
            Membership::Disagree => 0.0,
        }
    }
}
