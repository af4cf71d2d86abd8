//! The three robust losses, at a fixed perturbation and as a supremum over a
//! perturbation model.
//!
//! For a learner `h`, target `h*`, natural point `x`, and perturbed point `z`:
//!
//! | loss | indicator                                  |
//! |------|--------------------------------------------|
//! | CA   | `h(z) ≠ h*(z)` and `h*(z) = h*(x)`         |
//! | TL   | `h(z) ≠ h*(z)`                             |
//! | ST   | `h(z) ≠ h*(x)`                             |
//!
//! The supremum over a closed L2 ball is exact whenever both hypotheses have
//! affine scores (thresholds, homogeneous halfspaces, offset boundaries with an
//! affine base): each loss region is an intersection of at most two
//! halfspaces, and the ball meets it iff the projection of `x` onto it is close
//! enough. Ties at distance exactly `η` are resolved by checking whether the
//! nearest point actually belongs to the region, which is the closed-ball
//! reading of the supremum.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::distributions::uniform_in_ball;
use crate::error::{Error, Result};
use crate::model::{dot, predict, Hypothesis, Label, Point, PerturbationModel};
use crate::rng::{seed_from_coords, Generator};

/// Which robust loss to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Constrained adversary: the attack must preserve the true label.
    CA,
    /// True label: the prediction must match the perturbed point's true label.
    TL,
    /// Stability: the prediction must match the natural point's true label.
    ST,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::CA, LossKind::TL, LossKind::ST];

    /// Lowercase name used in external formats.
    pub fn name(self) -> &'static str {
        match self {
            LossKind::CA => "ca",
            LossKind::TL => "tl",
            LossKind::ST => "st",
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ca" => Ok(LossKind::CA),
            "tl" => Ok(LossKind::TL),
            "st" => Ok(LossKind::ST),
            other => Err(Error::InvalidParameter(format!("unknown loss `{other}`"))),
        }
    }
}

/// `ℓ(h, x, z)` for the given loss, as 0 or 1.
pub fn fixed_loss(kind: LossKind, h: &Hypothesis, hstar: &Hypothesis, x: &Point, z: &Point) -> Result<u8> {
    let hz = predict(h, z)?;
    let sz = predict(hstar, z)?;
    let sx = predict(hstar, x)?;
    let lost = match kind {
        LossKind::CA => hz != sz && sz == sx,
        LossKind::TL => hz != sz,
        LossKind::ST => hz != sx,
    };
    Ok(lost as u8)
}

/// How a supremum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum SupMethod {
    /// Closed-form geometry.
    Exact,
    /// Every point of a finite perturbation set was evaluated.
    Enumerated,
    /// Maximum over random ball points; can only underestimate.
    SampledLowerBound { samples: usize },
}

/// Value of a robust loss together with how it was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobustLoss {
    pub value: u8,
    #[serde(flatten)]
    pub method: SupMethod,
}

/// Controls for [`robust_loss_sup_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupOptions {
    /// Ball samples for the fallback path; `None` disables sampling, making
    /// non-exact combinations an error.
    pub samples: Option<usize>,
    /// Seed for the fallback path; defaults to a hash of `x`.
    pub seed: Option<u64>,
    /// Use sampling even where an exact path exists.
    pub force_sampling: bool,
}

impl Default for SupOptions {
    fn default() -> Self {
        SupOptions { samples: Some(1024), seed: None, force_sampling: false }
    }
}

/// `sup_{z ∈ U(x)} ℓ(h, x, z)` with default options.
pub fn robust_loss_sup(
    kind: LossKind,
    h: &Hypothesis,
    hstar: &Hypothesis,
    x: &Point,
    model: &PerturbationModel,
) -> Result<RobustLoss> {
    robust_loss_sup_with(kind, h, hstar, x, model, &SupOptions::default())
}

/// `sup_{z ∈ U(x)} ℓ(h, x, z)`.
pub fn robust_loss_sup_with(
    kind: LossKind,
    h: &Hypothesis,
    hstar: &Hypothesis,
    x: &Point,
    model: &PerturbationModel,
    options: &SupOptions,
) -> Result<RobustLoss> {
    if h.dim() != x.dim() || hstar.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: h.dim().max(hstar.dim()) });
    }
    match model {
        PerturbationModel::FiniteMap { map } => {
            let image = map
                .image(x)
                .ok_or_else(|| Error::InvalidParameter("x is not in the perturbation map's domain".into()))?;
            let mut value = 0;
            for z in image {
                value = value.max(fixed_loss(kind, h, hstar, x, z)?);
            }
            Ok(RobustLoss { value, method: SupMethod::Enumerated })
        }
        PerturbationModel::MetricBall { radius } => {
            if !options.force_sampling {
                if let (Some(a), Some(b)) = (AffineScore::of(h), AffineScore::of(hstar)) {
                    let value = exact_ball_sup(kind, &a, &b, x.coords(), *radius) as u8;
                    return Ok(RobustLoss { value, method: SupMethod::Exact });
                }
            }
            let samples = options.samples.ok_or_else(|| {
                Error::Unsupported("no exact supremum for this class pair and sampling is disabled".into())
            })?;
            let seed = options.seed.unwrap_or_else(|| seed_from_coords(x.coords()));
            log::debug!("robust loss supremum sampled with {samples} ball points (seed {seed})");
            let mut rng = Generator::seed_from_u64(seed);
            let mut value = fixed_loss(kind, h, hstar, x, x)?;
            for _ in 0..samples {
                if value == 1 {
                    break;
                }
                let z = Point::from_finite(uniform_in_ball(&mut rng, x.coords(), *radius));
                value = value.max(fixed_loss(kind, h, hstar, x, &z)?);
            }
            Ok(RobustLoss { value, method: SupMethod::SampledLowerBound { samples } })
        }
    }
}

/// Score `⟨a, x⟩ + c` with unit `a` whose sign is a hypothesis' prediction.
#[derive(Debug, Clone)]
struct AffineScore {
    a: Vec<f64>,
    c: f64,
}

impl AffineScore {
    fn of(h: &Hypothesis) -> Option<Self> {
        let (a, c) = match h {
            Hypothesis::Threshold { t } => (vec![1.0], -t),
            Hypothesis::Linear { w } => (w.as_slice().to_vec(), 0.0),
            Hypothesis::Offset { base, t } if base.is_affine() => {
                let g = base.residual_gradient_affine();
                let origin = vec![0.0; base.dim() + 1];
                (g, base.residual(&origin) - t)
            }
            Hypothesis::Offset { .. } => return None,
        };
        let n = dot(&a, &a).sqrt();
        Some(AffineScore { a: a.iter().map(|v| v / n).collect(), c: c / n })
    }

    /// The region `{z : prediction = label}` as a constraint.
    fn side(&self, label: Label) -> Constraint {
        match label {
            Label::Positive => Constraint { b: self.a.clone(), e: self.c, strict: false },
            Label::Negative => Constraint { b: self.a.iter().map(|v| -v).collect(), e: -self.c, strict: true },
        }
    }
}

/// `⟨b, z⟩ + e ≥ 0`, or `> 0` when `strict`, with unit `b`.
#[derive(Debug, Clone)]
struct Constraint {
    b: Vec<f64>,
    e: f64,
    strict: bool,
}

impl Constraint {
    fn value(&self, z: &[f64]) -> f64 {
        dot(&self.b, z) + self.e
    }

    fn holds(&self, z: &[f64]) -> bool {
        let v = self.value(z);
        if self.strict {
            v > 0.0
        } else {
            v >= 0.0
        }
    }
}

/// Whether the intersection of the constraints is nonempty.
fn nonempty(cs: &[Constraint]) -> bool {
    if cs.len() < 2 {
        return true;
    }
    let rho = dot(&cs[0].b, &cs[1].b);
    if rho > -1.0 + 1e-12 {
        // Non-parallel constraints always meet; parallel ones facing the same
        // way are nested halfspaces.
        return true;
    }
    // Antiparallel: −e₀ ⋈ ⟨b₀, z⟩ ⋈ e₁.
    let (lo, hi) = (-cs[0].e, cs[1].e);
    lo < hi || (lo == hi && !cs[0].strict && !cs[1].strict)
}

/// Euclidean projection of `x` onto the closure of the intersection, which
/// must be nonempty. Candidates are `x`, the projections onto each boundary,
/// and the projection onto the intersection of both boundaries; the feasible
/// candidate nearest to `x` is the projection.
///
/// Feasibility is tested with a tolerance proportional to the problem scale,
/// since the vertex of a thin wedge carries rounding error of order
/// `ε‖x‖ / (1 − ρ²)`. If rounding still rejects every candidate, the least
/// violating one is returned.
fn project(cs: &[Constraint], x: &[f64]) -> Vec<f64> {
    let scale = 1.0 + crate::model::norm(x) + cs.iter().map(|c| c.e.abs()).fold(0.0, f64::max);
    let violation = |p: &[f64]| cs.iter().map(|c| -c.value(p)).fold(0.0, f64::max);
    let mut candidates: Vec<Vec<f64>> = vec![x.to_vec()];
    for c in cs {
        let v = c.value(x);
        candidates.push(x.iter().zip(&c.b).map(|(xi, bi)| xi - v * bi).collect());
    }
    if cs.len() == 2 {
        let rho = dot(&cs[0].b, &cs[1].b);
        let det = 1.0 - rho * rho;
        if det > 1e-14 {
            let (g0, g1) = (cs[0].value(x), cs[1].value(x));
            let mu0 = (-g0 + rho * g1) / det;
            let mu1 = (-g1 + rho * g0) / det;
            candidates.push(
                x.iter()
                    .zip(cs[0].b.iter().zip(&cs[1].b))
                    .map(|(xi, (b0, b1))| xi + mu0 * b0 + mu1 * b1)
                    .collect(),
            );
        }
    }
    let nearest = candidates
        .iter()
        .filter(|p| violation(p) <= 1e-9 * scale)
        .min_by(|p, q| crate::model::distance(p, x).total_cmp(&crate::model::distance(q, x)));
    match nearest {
        Some(p) => p.clone(),
        None => candidates
            .into_iter()
            .min_by(|p, q| violation(p).total_cmp(&violation(q)))
            .expect("x itself is always a candidate"),
    }
}

/// Whether the closed ball `B(x, η)` meets the region.
fn ball_meets(cs: &[Constraint], x: &[f64], eta: f64) -> bool {
    if !nonempty(cs) {
        return false;
    }
    let p = project(cs, x);
    let d = crate::model::distance(&p, x);
    if d < eta {
        return true;
    }
    d <= eta && cs.iter().all(|c| c.holds(&p))
}

fn exact_ball_sup(kind: LossKind, h: &AffineScore, hstar: &AffineScore, x: &[f64], eta: f64) -> bool {
    let label_x = crate::model::sign_label(dot(&hstar.a, x) + hstar.c);
    match kind {
        LossKind::ST => ball_meets(&[h.side(label_x.flip())], x, eta),
        LossKind::CA => ball_meets(&[hstar.side(label_x), h.side(label_x.flip())], x, eta),
        LossKind::TL => {
            ball_meets(&[hstar.side(Label::Positive), h.side(Label::Negative)], x, eta)
                || ball_meets(&[hstar.side(Label::Negative), h.side(Label::Positive)], x, eta)
        }
    }
}
