//! Version spaces `H₀(S)`: fitting, agreement membership, and distances to the
//! disagreement region.
//!
//! Each concept class gets an exact representation. Thresholds and offset
//! boundaries reduce to an interval of consistent offsets, two-dimensional
//! homogeneous halfspaces to an arc of normal angles, and general homogeneous
//! halfspaces to the cone cut out by the signed, normalized sample points.

mod arc;
mod cone;
mod interval;

use serde::{Deserialize, Serialize};

pub use arc::ArcSpace;
pub use cone::{ConeSpace, DistanceReport, SearchOptions, STRICT_TOL};
pub use interval::IntervalSpace;

use crate::error::{invalid, Error, Result};
use crate::model::{dot, norm, BaseFunction, ConceptClass, Dataset, Hypothesis, Label, Point};

/// Whether all consistent hypotheses agree at a point, and on which label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    AgreePlus,
    AgreeMinus,
    Disagree,
}

impl Membership {
    /// The agreed label, if any.
    pub fn label(self) -> Option<Label> {
        match self {
            Membership::AgreePlus => Some(Label::Positive),
            Membership::AgreeMinus => Some(Label::Negative),
            Membership::Disagree => None,
        }
    }

    pub fn is_agree(self) -> bool {
        self != Membership::Disagree
    }
}

/// How a distance to the disagreement region was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// The exact Euclidean distance.
    Exact,
    /// A lower bound from the Lipschitz constant of a nonlinear boundary.
    LipschitzBound,
}

/// Exact representation of the set of hypotheses consistent with a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VersionSpace {
    /// Consistent thresholds.
    Interval { space: IntervalSpace },
    /// Consistent offsets `t` of `base + t`; the statistic is the residual
    /// `x_{d+1} − base(x_1..x_d)`.
    Offset { base: BaseFunction, offsets: IntervalSpace },
    /// Consistent normal angles of two-dimensional homogeneous halfspaces.
    AngleArc { arc: ArcSpace },
    /// Consistent normals of homogeneous halfspaces in any dimension.
    ConstraintCone { cone: ConeSpace },
}

/// Representation choice for homogeneous halfspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Arc in two dimensions, cone otherwise.
    #[default]
    Auto,
    /// Always the constraint cone.
    Cone,
}

impl VersionSpace {
    /// Dimension of the instance space.
    pub fn dimension(&self) -> usize {
        match self {
            VersionSpace::Interval { .. } => 1,
            VersionSpace::Offset { base, .. } => base.dim() + 1,
            VersionSpace::AngleArc { .. } => 2,
            VersionSpace::ConstraintCone { cone } => cone.dimension(),
        }
    }

    /// Name of the underlying concept class.
    pub fn class_name(&self) -> &'static str {
        match self {
            VersionSpace::Interval { .. } => "threshold",
            VersionSpace::Offset { .. } => "offset",
            VersionSpace::AngleArc { .. } | VersionSpace::ConstraintCone { .. } => "linear",
        }
    }

    /// Whether `h` is consistent with the fitted sample.
    pub fn contains(&self, h: &Hypothesis) -> bool {
        match (self, h) {
            (VersionSpace::Interval { space }, Hypothesis::Threshold { t }) => space.contains(*t),
            (VersionSpace::Offset { base, offsets }, Hypothesis::Offset { base: b, t }) => {
                base == b && offsets.contains(*t)
            }
            (VersionSpace::AngleArc { arc }, Hypothesis::Linear { w }) => {
                let w = w.as_slice();
                w.len() == 2 && arc.contains_angle(w[1].atan2(w[0]))
            }
            (VersionSpace::ConstraintCone { cone }, Hypothesis::Linear { w }) => {
                w.dim() == cone.dimension() && cone.contains(w.as_slice(), 1e-12)
            }
            _ => false,
        }
    }

    /// Exactness of [`dis_distance`] for this representation.
    pub fn distance_kind(&self) -> DistanceKind {
        match self {
            VersionSpace::Offset { base, .. } if !base.is_affine() => DistanceKind::LipschitzBound,
            _ => DistanceKind::Exact,
        }
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Fits `H_ν(S)` for the given class. Only `ν = 0` is supported.
pub fn fit_version_space(s: &Dataset, class: &ConceptClass, nu: f64) -> Result<VersionSpace> {
    fit_with(s, class, nu, Representation::Auto)
}

/// [`fit_version_space`] with an explicit representation for halfspaces.
pub fn fit_with(s: &Dataset, class: &ConceptClass, nu: f64, repr: Representation) -> Result<VersionSpace> {
    if !(0.0..1.0).contains(&nu) {
        return Err(invalid(format!("error threshold must lie in [0, 1), got {nu}")));
    }
    if nu > 0.0 {
        return Err(Error::Unsupported("version spaces with a positive error threshold".into()));
    }
    let samples = s.samples().iter();
    match class {
        ConceptClass::Threshold => {
            check_dim(1, s.dimension())?;
            let space = IntervalSpace::fit(samples.map(|p| (p.point.coords()[0], p.label)), "threshold")?;
            Ok(VersionSpace::Interval { space })
        }
        ConceptClass::Offset { base } => {
            base.validate()?;
            check_dim(base.dim() + 1, s.dimension())?;
            let offsets = IntervalSpace::fit(samples.map(|p| (base.residual(p.point.coords()), p.label)), "offset")?;
            Ok(VersionSpace::Offset { base: base.clone(), offsets })
        }
        ConceptClass::Linear => {
            if s.dimension() == 2 && repr == Representation::Auto {
                let arc = ArcSpace::fit(samples.map(|p| (&p.point, p.label)))?;
                Ok(VersionSpace::AngleArc { arc })
            } else {
                let cone = ConeSpace::fit(s.dimension(), samples.map(|p| (&p.point, p.label)))?;
                Ok(VersionSpace::ConstraintCone { cone })
            }
        }
    }
}

/// The deterministic consistent hypothesis: interval midpoint, arc midpoint,
/// or max-margin normal.
pub fn erm(vs: &VersionSpace) -> Hypothesis {
    match vs {
        VersionSpace::Interval { space } => Hypothesis::Threshold { t: space.midpoint() },
        VersionSpace::Offset { base, offsets } => Hypothesis::Offset { base: base.clone(), t: offsets.midpoint() },
        VersionSpace::AngleArc { arc } => {
            let phi = arc.midpoint();
            Hypothesis::linear(vec![phi.cos(), phi.sin()]).expect("unit vector is nonzero")
        }
        VersionSpace::ConstraintCone { cone } => {
            Hypothesis::linear(cone.erm_normal().to_vec()).expect("max-margin normal is nonzero")
        }
    }
}

/// Fits the version space and returns its ERM.
pub fn erm_for(s: &Dataset, class: &ConceptClass) -> Result<Hypothesis> {
    Ok(erm(&fit_version_space(s, class, 0.0)?))
}

/// Agreement status of `z` under all consistent hypotheses.
pub fn agree_membership(vs: &VersionSpace, z: &Point) -> Result<Membership> {
    check_dim(vs.dimension(), z.dim())?;
    let c = z.coords();
    Ok(match vs {
        VersionSpace::Interval { space } => space.membership(c[0]),
        VersionSpace::Offset { base, offsets } => offsets.membership(base.residual(c)),
        VersionSpace::AngleArc { arc } => arc.membership(c),
        VersionSpace::ConstraintCone { cone } => cone.membership(c)?,
    })
}

/// Factor converting residual gaps to Euclidean distances: `√(1 + L²)`.
fn residual_scale(base: &BaseFunction) -> f64 {
    let l = base.lipschitz();
    (1.0 + l * l).sqrt()
}

/// Euclidean distance from `z` to the disagreement region; 0 when `z` is in
/// it. Exact except for offset boundaries over a nonlinear base, where it is
/// a lower bound (see [`VersionSpace::distance_kind`]).
pub fn dis_distance(vs: &VersionSpace, z: &Point) -> Result<f64> {
    let m = agree_membership(vs, z)?;
    Ok(distance_given(vs, z, m))
}

/// [`dis_distance`] for a point whose membership is already known.
pub fn distance_given(vs: &VersionSpace, z: &Point, m: Membership) -> f64 {
    if m == Membership::Disagree {
        return 0.0;
    }
    let c = z.coords();
    match vs {
        VersionSpace::Interval { space } => space.gap(c[0]),
        VersionSpace::Offset { base, offsets } => offsets.gap(base.residual(c)) / residual_scale(base),
        VersionSpace::AngleArc { arc } => arc.distance(c),
        VersionSpace::ConstraintCone { cone } => cone.distance_given(c, m),
    }
}

/// Distance with an independent cross-check. For the cone the exact value is
/// compared against projected-gradient and sampled upper bounds; the other
/// representations are closed-form and report a zero gap.
pub fn dis_distance_checked(vs: &VersionSpace, z: &Point, options: &SearchOptions) -> Result<DistanceReport> {
    let m = agree_membership(vs, z)?;
    match vs {
        VersionSpace::ConstraintCone { cone } => cone.distance_report(z.coords(), m, options),
        _ => {
            let value = distance_given(vs, z, m);
            Ok(DistanceReport { value, search: value, sampled: value, gap: 0.0, search_flagged: false })
        }
    }
}

/// Distance from `x` to the part of the disagreement region labeled like `x`
/// by `hstar`. For halfspaces the nearest disagreement point already lies on
/// the target's side, so this equals [`dis_distance`].
pub fn ca_distance(vs: &VersionSpace, hstar: &Hypothesis, x: &Point) -> Result<f64> {
    check_dim(vs.dimension(), x.dim())?;
    let c = x.coords();
    match (vs, hstar) {
        (VersionSpace::Interval { space }, Hypothesis::Threshold { t }) => Ok(space.same_side_gap(c[0], *t)),
        (VersionSpace::Offset { base, offsets }, Hypothesis::Offset { base: b, t }) if base == b => {
            Ok(offsets.same_side_gap(base.residual(c), *t) / residual_scale(base))
        }
        (VersionSpace::AngleArc { .. } | VersionSpace::ConstraintCone { .. }, Hypothesis::Linear { .. }) => {
            check_dim(vs.dimension(), hstar.dim())?;
            dis_distance(vs, x)
        }
        _ => Err(invalid("target hypothesis does not belong to the version space's class")),
    }
}

/// Upper bound on `|⟨w*, x⟩|` below which a point `x` with
/// `c ≤ ‖x‖ ≤ dnorm` must be in the disagreement region, given that every
/// normal within angle `delta1` of `w*` is consistent:
///
/// `δ = c² tan δ₁ / √((dnorm + tan² δ₁)² + c² tan² δ₁)`.
pub fn margin_exclusion_delta(delta1: f64, c: f64, dnorm: f64) -> Result<f64> {
    if !(delta1 > 0.0 && delta1 < std::f64::consts::FRAC_PI_2) {
        return Err(invalid(format!("delta1 must lie in (0, π/2), got {delta1}")));
    }
    if !(c > 0.0 && c < dnorm && dnorm.is_finite()) {
        return Err(invalid(format!("need 0 < c < dnorm, got c = {c}, dnorm = {dnorm}")));
    }
    let t = delta1.tan();
    let t2 = t * t;
    Ok(c * c * t / ((dnorm + t2).powi(2) + c * c * t2).sqrt())
}

/// Smallest normalized margin `min |⟨w*, x⟩| / ‖x‖` over the sample; `δ₁`
/// must stay below it for the exclusion bound to apply. Infinite for an
/// empty sample.
pub fn margin_admissibility_bound(s: &Dataset, wstar: &[f64]) -> Result<f64> {
    check_dim(s.dimension(), wstar.len())?;
    let wn = norm(wstar);
    if wn == 0.0 {
        return Err(invalid("target normal must be nonzero"));
    }
    Ok(s.samples()
        .iter()
        .map(|p| {
            let x = p.point.coords();
            let n = norm(x);
            if n == 0.0 {
                0.0
            } else {
                dot(wstar, x).abs() / (n * wn)
            }
        })
        .fold(f64::INFINITY, f64::min))
}
