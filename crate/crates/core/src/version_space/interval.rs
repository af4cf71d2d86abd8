//! Interval version spaces over a scalar statistic.
//!
//! Thresholds use the coordinate itself; offset boundaries use the residual
//! `x_{d+1} − f(x_1..x_d)`. With the rule "+1 iff statistic ≥ t", the
//! consistent offsets form the half-open interval `(lo, hi]` where `lo` is the
//! largest negative statistic and `hi` the smallest positive one.

use serde::{Deserialize, Serialize};

use super::Membership;
use crate::error::{Error, Result};
use crate::model::Label;

/// Consistent offsets `t ∈ (lo, hi]`. Either end may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpace {
    pub lo: f64,
    pub hi: f64,
    /// Always true: the largest negative statistic is excluded.
    pub lo_open: bool,
    /// Always false: the smallest positive statistic is included.
    pub hi_open: bool,
}

impl IntervalSpace {
    /// The full line, for an empty sample.
    pub fn full() -> Self {
        IntervalSpace { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_open: true, hi_open: false }
    }

    /// Fits the interval from `(statistic, label)` pairs.
    pub fn fit(stats: impl Iterator<Item = (f64, Label)>, class: &'static str) -> Result<Self> {
        let mut iv = IntervalSpace::full();
        for (s, label) in stats {
            match label {
                Label::Positive => iv.hi = iv.hi.min(s),
                Label::Negative => iv.lo = iv.lo.max(s),
            }
        }
        if iv.lo < iv.hi {
            Ok(iv)
        } else {
            Err(Error::NonRealizable { class })
        }
    }

    /// Whether offset `t` is consistent.
    pub fn contains(&self, t: f64) -> bool {
        self.lo < t && t <= self.hi
    }

    /// Midpoint offset; one unit inside a finite end when the other is
    /// infinite; zero for the full line.
    pub fn midpoint(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => 0.5 * (self.lo + self.hi),
            (true, false) => self.lo + 1.0,
            (false, true) => self.hi - 1.0,
            (false, false) => 0.0,
        }
    }

    /// Agreement status of a statistic value.
    pub fn membership(&self, s: f64) -> Membership {
        if s >= self.hi {
            Membership::AgreePlus
        } else if s <= self.lo {
            Membership::AgreeMinus
        } else {
            Membership::Disagree
        }
    }

    /// Distance in statistic units from `s` to the open interval `(lo, hi)`.
    pub fn gap(&self, s: f64) -> f64 {
        match self.membership(s) {
            Membership::AgreePlus => s - self.hi,
            Membership::AgreeMinus => self.lo - s,
            Membership::Disagree => 0.0,
        }
    }

    /// Distance in statistic units from `s` to the part of the disagreement
    /// interval lying on the same side of `t_star` as `s`.
    pub fn same_side_gap(&self, s: f64, t_star: f64) -> f64 {
        if s >= t_star {
            // Same-side disagreement points: [t*, hi).
            if t_star >= self.hi {
                f64::INFINITY
            } else {
                (s - self.hi).max(0.0)
            }
        } else if t_star <= self.lo {
            f64::INFINITY
        } else {
            // Same-side disagreement points: (lo, t*).
            (self.lo - s).max(0.0)
        }
    }
}
