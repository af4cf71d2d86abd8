//! Robustly-reliable predictions: certificates with reliability radii, the
//! safely-reliable region test, the margin-based fast certifier, certification
//! under finite perturbation sets, and an adversarial contract verifier.
//!
//! A certificate `(label, r)` promises that the label is correct for every
//! natural point `x` with `‖x − z‖ < r` from which the query `z` could have
//! been produced. Abstention is encoded as radius −1 and unconditional
//! correctness as `+∞`.
//!
//! | loss | agreed `z`                 | disagreed `z`  |
//! |------|----------------------------|----------------|
//! | CA   | `+∞`                       | abstain        |
//! | TL   | `+∞`                       | abstain        |
//! | ST   | distance from `z` to DIS   | abstain        |

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample_with, uniform_in_ball, unit_direction, DistributionSpec};
use crate::error::{invalid, Error, Result};
use crate::losses::{fixed_loss, LossKind};
use crate::model::{dot, norm, predict, ConceptClass, Dataset, Hypothesis, Label, Point};
use crate::rng::{derive, seed_from_coords, stream};
use crate::version_space::{
    agree_membership, ca_distance, dis_distance_checked, distance_given, erm, fit_version_space, DistanceKind,
    Membership, SearchOptions, VersionSpace,
};

/// How a radius was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact geometry of the version space.
    Analytic,
    /// The margin-based certifier.
    Margin,
    /// A Lipschitz lower bound on the distance to a nonlinear boundary.
    Lipschitz,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Margin => "margin",
            Method::Lipschitz => "lipschitz",
        }
    }
}

/// A prediction with its reliability radius.
///
/// Invariant: `prediction` is `None` exactly when `radius == -1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub point: Point,
    pub prediction: Option<Label>,
    /// −1 for abstention, otherwise a nonnegative value or `+∞`.
    pub radius: f64,
    pub loss: LossKind,
    pub method: Method,
    /// Seed of the randomized self-check, when one ran.
    pub seed: Option<u64>,
}

impl Certificate {
    fn abstain(point: &Point, loss: LossKind) -> Self {
        Certificate { point: point.clone(), prediction: None, radius: -1.0, loss, method: Method::Analytic, seed: None }
    }

    pub fn is_abstain(&self) -> bool {
        self.prediction.is_none()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PredictionRepr {
    Bit(u8),
    Word(String),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RadiusRepr {
    Number(f64),
    Word(String),
}

#[derive(Serialize, Deserialize)]
struct CertificateRepr {
    point: Point,
    prediction: PredictionRepr,
    radius: RadiusRepr,
    loss: LossKind,
    method: Method,
    seed: Option<u64>,
}

impl Serialize for Certificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let prediction = match self.prediction {
            Some(l) => PredictionRepr::Bit(l.to_bit()),
            None => PredictionRepr::Word("abstain".into()),
        };
        let radius = if self.radius == f64::INFINITY {
            RadiusRepr::Word("inf".into())
        } else {
            RadiusRepr::Number(self.radius)
        };
        CertificateRepr {
            point: self.point.clone(),
            prediction,
            radius,
            loss: self.loss,
            method: self.method,
            seed: self.seed,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = CertificateRepr::deserialize(d)?;
        let prediction = match r.prediction {
            PredictionRepr::Bit(b) => Some(Label::from_bit(b).map_err(D::Error::custom)?),
            PredictionRepr::Word(w) if w == "abstain" => None,
            PredictionRepr::Word(w) => return Err(D::Error::custom(format!("unknown prediction `{w}`"))),
        };
        let radius = match r.radius {
            RadiusRepr::Number(v) => v,
            RadiusRepr::Word(w) if w == "inf" => f64::INFINITY,
            RadiusRepr::Word(w) => return Err(D::Error::custom(format!("unknown radius `{w}`"))),
        };
        if prediction.is_none() != (radius == -1.0) || (radius < 0.0 && radius != -1.0) || radius.is_nan() {
            return Err(D::Error::custom("radius −1 must coincide with abstention"));
        }
        Ok(Certificate { point: r.point, prediction, radius, loss: r.loss, method: r.method, seed: r.seed })
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.prediction {
            None => write!(f, "abstain ({})", self.loss.name()),
            Some(l) => write!(f, "{} with radius {} ({}, {})", l, self.radius, self.loss.name(), self.method.name()),
        }
    }
}

/// Controls for [`certify_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    /// Ball points sampled to confirm that stability radii enclose a single
    /// agreed label. Zero disables the check.
    pub constancy_samples: usize,
    /// Cross-check cone distances by projected gradient and sampling.
    pub cross_check: Option<SearchOptions>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { constancy_samples: 64, cross_check: None }
    }
}

/// Certificate for `z` under the given loss with default options.
pub fn certify(vs: &VersionSpace, z: &Point, kind: LossKind) -> Result<Certificate> {
    certify_with(vs, z, kind, &CertifyOptions::default())
}

/// Certificate for `z` under the given loss.
pub fn certify_with(vs: &VersionSpace, z: &Point, kind: LossKind, options: &CertifyOptions) -> Result<Certificate> {
    let m = agree_membership(vs, z)?;
    let Some(label) = m.label() else {
        return Ok(Certificate::abstain(z, kind));
    };
    let mut cert = Certificate {
        point: z.clone(),
        prediction: Some(label),
        radius: f64::INFINITY,
        loss: kind,
        method: Method::Analytic,
        seed: None,
    };
    if kind != LossKind::ST {
        return Ok(cert);
    }
    cert.radius = match &options.cross_check {
        Some(search) => dis_distance_checked(vs, z, search)?.value,
        None => distance_given(vs, z, m),
    };
    if vs.distance_kind() == DistanceKind::LipschitzBound {
        cert.method = Method::Lipschitz;
    }
    if options.constancy_samples > 0 && cert.radius > 0.0 && cert.radius.is_finite() {
        let seed = seed_from_coords(z.coords());
        check_constancy(vs, z, m, cert.radius * (1.0 - 1e-6), options.constancy_samples, seed)?;
        cert.seed = Some(seed);
    }
    Ok(cert)
}

/// Samples the ball `B(z, r)` and fails if any point leaves the agreed label.
fn check_constancy(vs: &VersionSpace, z: &Point, m: Membership, r: f64, n: usize, seed: u64) -> Result<()> {
    let mut rng = stream(seed, 0);
    for _ in 0..n {
        let y = Point::new(uniform_in_ball(&mut rng, z.coords(), r))?;
        let my = agree_membership(vs, &y)?;
        if my != m {
            return Err(Error::InvariantViolation(format!(
                "point {:?} at distance {} inside stability radius {r} of {:?} has membership {my:?}, expected {m:?}",
                y.coords(),
                y.distance(z)?,
                z.coords()
            )));
        }
    }
    Ok(())
}

/// Certification under a finite perturbation set: accepts with the label of
/// `z` iff every candidate origin in `u_inverse` is agreed on with that same
/// label. The radius is `+∞` on acceptance and −1 otherwise.
pub fn certify_general_finite(vs: &VersionSpace, z: &Point, u_inverse: &[Point]) -> Result<Certificate> {
    if u_inverse.is_empty() {
        return Err(invalid("the inverse perturbation set is empty"));
    }
    if !u_inverse.iter().any(|x| x.bit_eq(z)) {
        return Err(invalid("the inverse perturbation set must contain the query point"));
    }
    let mz = agree_membership(vs, z)?;
    let Some(label) = mz.label() else {
        return Ok(Certificate::abstain(z, LossKind::ST));
    };
    for x in u_inverse {
        if agree_membership(vs, x)? != mz {
            return Ok(Certificate::abstain(z, LossKind::ST));
        }
    }
    Ok(Certificate {
        point: z.clone(),
        prediction: Some(label),
        radius: f64::INFINITY,
        loss: LossKind::ST,
        method: Method::Analytic,
        seed: None,
    })
}

/// Whether `x` lies in the safely-reliable region: every attack of size at
/// most `eta1` lands on a point certified with radius at least `eta2`.
///
/// * ST: `x` agreed and `dist(x, DIS) ≥ η₁ + η₂`.
/// * TL: `x` agreed and `dist(x, DIS) ≥ η₁` (agreed points carry radius `+∞`).
/// * CA: as TL, but only attacks preserving `h*(x)` count; `hstar` is required.
pub fn safely_reliable_membership(
    vs: &VersionSpace,
    hstar: Option<&Hypothesis>,
    x: &Point,
    eta1: f64,
    eta2: f64,
    kind: LossKind,
) -> Result<bool> {
    if !(eta1 >= 0.0 && eta2 >= 0.0) {
        return Err(invalid("attack and radius budgets must be nonnegative"));
    }
    let m = agree_membership(vs, x)?;
    if !m.is_agree() {
        return Ok(false);
    }
    Ok(match kind {
        LossKind::ST => distance_given(vs, x, m) >= eta1 + eta2,
        LossKind::TL => distance_given(vs, x, m) >= eta1,
        LossKind::CA => {
            let hstar = hstar.ok_or_else(|| invalid("the constrained-adversary region needs the target hypothesis"))?;
            ca_distance(vs, hstar, x)? >= eta1
        }
    })
}

/// Parameters of the margin-based certifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginConfig {
    pub c1: f64,
    /// Defaults to `ln(1/(√d ε))` when absent.
    pub alpha: Option<f64>,
}

impl Default for MarginConfig {
    fn default() -> Self {
        MarginConfig { c1: 1.0, alpha: None }
    }
}

/// The default scale `α = ln(1/(√d ε))`.
pub fn default_alpha(d: usize, eps: f64) -> f64 {
    (1.0 / ((d as f64).sqrt() * eps)).ln()
}

fn margin_terms(h: &Hypothesis, z: &Point, alpha: f64, c1: f64, eps: f64, d: usize) -> Result<(f64, f64)> {
    let w = h.normal().ok_or_else(|| invalid("the margin certifier needs a linear hypothesis"))?;
    if w.len() != z.dim() {
        return Err(Error::DimensionMismatch { expected: w.len(), found: z.dim() });
    }
    if !(alpha > 0.0 && eps > 0.0 && c1 >= 0.0 && d > 0) {
        return Err(invalid("the margin certifier needs alpha > 0, eps > 0, c1 ≥ 0, d ≥ 1"));
    }
    let root_d = (d as f64).sqrt();
    let margin_slack = dot(w, z.coords()).abs() - c1 * alpha * eps * root_d;
    let norm_slack = alpha * root_d - z.norm();
    Ok((margin_slack, norm_slack))
}

/// Largest `η ≥ 0` with `‖z‖ < α√d − η` and `|⟨w, z⟩| ≥ C₁ α ε √d + η`, or −1
/// when no such `η` exists.
pub fn margin_certify(h: &Hypothesis, z: &Point, alpha: f64, c1: f64, eps: f64, d: usize) -> Result<f64> {
    let (a, b) = margin_terms(h, z, alpha, c1, eps, d)?;
    if b <= 0.0 || a < 0.0 {
        return Ok(-1.0);
    }
    Ok(a.min(b))
}

/// Halving search for the same quantity: starting from `α√d`, halve `η` until
/// `z` passes both constraints, stopping below `tol` (then testing `η = 0`).
/// Returns a value in `[η*/2, η*]`, or −1.
pub fn margin_certify_halving(
    h: &Hypothesis,
    z: &Point,
    alpha: f64,
    c1: f64,
    eps: f64,
    d: usize,
    tol: f64,
) -> Result<f64> {
    let (a, b) = margin_terms(h, z, alpha, c1, eps, d)?;
    let passes = |eta: f64| b > eta && a >= eta;
    let mut eta = alpha * (d as f64).sqrt();
    while eta >= tol {
        if passes(eta) {
            return Ok(eta);
        }
        eta *= 0.5;
    }
    Ok(if passes(0.0) { 0.0 } else { -1.0 })
}

/// Attack used by [`verify_contract`] to craft the perturbed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Step toward the nearest point of the disagreement region.
    BoundaryDirected,
    /// A uniform point of the attack ball.
    RandomBall,
    /// Axis directions at evenly spaced step sizes.
    Grid,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").to_ascii_lowercase().as_str() {
            "boundary-directed" | "boundary" => Ok(Strategy::BoundaryDirected),
            "random-ball" | "random" => Ok(Strategy::RandomBall),
            "grid" => Ok(Strategy::Grid),
            other => Err(invalid(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Settings for [`verify_contract`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractConfig {
    pub class: ConceptClass,
    pub hstar: Hypothesis,
    pub sampler: DistributionSpec,
    pub m: usize,
    pub trials: usize,
    /// Attack budget; step lengths are drawn uniformly from `[0, budget]`.
    pub budget: f64,
    pub kind: LossKind,
    pub strategy: Strategy,
    pub seed: u64,
    /// Run the 64-point stability self-check on every certificate.
    pub constancy_check: bool,
}

impl Default for ContractConfig {
    fn default() -> Self {
        ContractConfig {
            class: ConceptClass::Threshold,
            hstar: Hypothesis::Threshold { t: 0.0 },
            sampler: DistributionSpec::Gaussian { d: 1 },
            m: 200,
            trials: 1000,
            budget: 1.0,
            kind: LossKind::ST,
            strategy: Strategy::BoundaryDirected,
            seed: 0,
            constancy_check: true,
        }
    }
}

/// Full reproduction data for a contract violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub trial: usize,
    pub seed: u64,
    pub sample: Dataset,
    pub x: Point,
    pub z: Point,
    pub certificate: Certificate,
    pub loss: u8,
    pub note: String,
}

/// Outcome of [`verify_contract`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub trials: usize,
    /// Trials where the radius exceeded the attack distance.
    pub certified: usize,
    pub abstained: usize,
    pub violations: usize,
    pub witnesses: Vec<Witness>,
}

/// Unit direction from an agreed `z` toward its nearest disagreement point.
fn nearest_dis_direction(vs: &VersionSpace, z: &Point) -> Result<Option<Vec<f64>>> {
    let m = agree_membership(vs, z)?;
    let sign = match m {
        Membership::AgreePlus => 1.0,
        Membership::AgreeMinus => -1.0,
        Membership::Disagree => return Ok(None),
    };
    let c = z.coords();
    Ok(match vs {
        VersionSpace::Interval { .. } => Some(vec![-sign]),
        VersionSpace::Offset { base, .. } => {
            // Numerical gradient of the residual; the attack only needs a direction.
            let h = 1e-6;
            let g: Vec<f64> = (0..c.len())
                .map(|i| {
                    let (mut a, mut b) = (c.to_vec(), c.to_vec());
                    a[i] += h;
                    b[i] -= h;
                    (base.residual(&a) - base.residual(&b)) / (2.0 * h)
                })
                .collect();
            let n = norm(&g);
            (n > 0.0).then(|| g.iter().map(|v| -sign * v / n).collect())
        }
        VersionSpace::AngleArc { arc } => {
            let best = [arc.phi_lo, arc.phi_hi]
                .into_iter()
                .min_by(|a, b| {
                    let sa = sign * (c[0] * a.cos() + c[1] * a.sin());
                    let sb = sign * (c[0] * b.cos() + c[1] * b.sin());
                    sa.total_cmp(&sb)
                })
                .expect("two endpoints");
            Some(vec![-sign * best.cos(), -sign * best.sin()])
        }
        VersionSpace::ConstraintCone { cone } => cone
            .rays()
            .and_then(|rays| rays.iter().min_by(|a, b| (sign * dot(a, c)).total_cmp(&(sign * dot(b, c)))))
            .map(|r| r.iter().map(|v| -sign * v).collect()),
    })
}

enum TrialOutcome {
    Abstained,
    Uncertified,
    Certified(Option<Witness>),
}

fn run_trial(cfg: &ContractConfig, trial: usize) -> Result<TrialOutcome> {
    let seed = derive(cfg.seed, trial as u64);
    let d = cfg.sampler.dimension();
    let pts = sample_with(&cfg.sampler, &mut stream(seed, 0), cfg.m)?;
    let s = Dataset::labeled_by(&cfg.hstar, pts)?;
    let vs = fit_version_space(&s, &cfg.class, 0.0)?;
    let h = erm(&vs);
    let mut rng = stream(seed, 1);
    let x = sample_with(&cfg.sampler, &mut rng, 1)?.remove(0);
    let step = cfg.budget * rng.gen::<f64>();
    let dir = match cfg.strategy {
        Strategy::BoundaryDirected => {
            nearest_dis_direction(&vs, &x)?.unwrap_or_else(|| unit_direction(&mut rng, d))
        }
        Strategy::RandomBall => unit_direction(&mut rng, d),
        Strategy::Grid => {
            let axis = trial % (2 * d);
            let mut e = vec![0.0; d];
            e[axis / 2] = if axis % 2 == 0 { 1.0 } else { -1.0 };
            e
        }
    };
    let step = match cfg.strategy {
        Strategy::RandomBall => cfg.budget * rng.gen::<f64>().powf(1.0 / d as f64),
        Strategy::Grid => cfg.budget * ((trial / (2 * d)) % 16) as f64 / 15.0,
        Strategy::BoundaryDirected => step,
    };
    let z = Point::new(x.coords().iter().zip(&dir).map(|(xi, ui)| xi + step * ui).collect())?;
    let options = CertifyOptions { constancy_samples: if cfg.constancy_check { 64 } else { 0 }, cross_check: None };
    let cert = certify_with(&vs, &z, cfg.kind, &options)?;
    let Some(label) = cert.prediction else {
        return Ok(TrialOutcome::Abstained);
    };
    let dist = x.distance(&z)?;
    if !(cert.radius > dist) {
        return Ok(TrialOutcome::Uncertified);
    }
    let loss = fixed_loss(cfg.kind, &h, &cfg.hstar, &x, &z)?;
    let erm_label = predict(&h, &z)?;
    let note = if loss != 0 {
        format!("{} loss at attack distance {dist} below radius {}", cfg.kind.name(), cert.radius)
    } else if erm_label != label {
        format!("certificate label {label} differs from the ERM prediction {erm_label}")
    } else {
        return Ok(TrialOutcome::Certified(None));
    };
    Ok(TrialOutcome::Certified(Some(Witness { trial, seed, sample: s, x, z, certificate: cert, loss, note })))
}

/// Attacks the learner on fresh samples and counts certificates whose
/// promise fails: a radius strictly above the attack distance together with
/// a nonzero loss of the ERM prediction. Trials run in parallel with
/// per-trial seeds, so the report does not depend on the worker count.
pub fn verify_contract(cfg: &ContractConfig) -> Result<ViolationReport> {
    if !(cfg.budget >= 0.0 && cfg.budget.is_finite()) {
        return Err(invalid("attack budget must be finite and nonnegative"));
    }
    cfg.sampler.validate()?;
    if !cfg.class.contains(&cfg.hstar) {
        return Err(invalid("target hypothesis is not in the concept class"));
    }
    if cfg.hstar.dim() != cfg.sampler.dimension() {
        return Err(Error::DimensionMismatch { expected: cfg.hstar.dim(), found: cfg.sampler.dimension() });
    }
    let outcomes: Vec<TrialOutcome> =
        (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, i)).collect::<Result<_>>()?;
    let mut report = ViolationReport { trials: cfg.trials, certified: 0, abstained: 0, violations: 0, witnesses: vec![] };
    for o in outcomes {
        match o {
            TrialOutcome::Abstained => report.abstained += 1,
            TrialOutcome::Uncertified => {}
            TrialOutcome::Certified(w) => {
                report.certified += 1;
                if let Some(w) = w {
                    report.violations += 1;
                    report.witnesses.push(w);
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LabeledSample;

    fn threshold_vs() -> VersionSpace {
        let s = Dataset::new(
            1,
            vec![
                LabeledSample { point: Point::new(vec![0.2]).unwrap(), label: Label::Negative },
                LabeledSample { point: Point::new(vec![0.8]).unwrap(), label: Label::Positive },
            ],
        )
        .unwrap();
        fit_version_space(&s, &ConceptClass::Threshold, 0.0).unwrap()
    }

    fn p(v: f64) -> Point {
        Point::new(vec![v]).unwrap()
    }

    #[test]
    fn threshold_certificates() {
        let vs = threshold_vs();
        let c = certify(&vs, &p(0.1), LossKind::TL).unwrap();
        assert_eq!((c.prediction, c.radius), (Some(Label::Negative), f64::INFINITY));
        let c = certify(&vs, &p(1.0), LossKind::ST).unwrap();
        assert_eq!(c.prediction, Some(Label::Positive));
        assert!((c.radius - 0.2).abs() < 1e-15);
        for kind in LossKind::ALL {
            let c = certify(&vs, &p(0.5), kind).unwrap();
            assert_eq!((c.prediction, c.radius), (None, -1.0));
        }
        // On the closure boundary the radius is zero.
        let c = certify(&vs, &p(0.8), LossKind::ST).unwrap();
        assert_eq!((c.prediction, c.radius), (Some(Label::Positive), 0.0));
    }

    #[test]
    fn finite_certification() {
        let vs = threshold_vs();
        assert!(!certify_general_finite(&vs, &p(1.0), &[p(1.0)]).unwrap().is_abstain());
        assert!(certify_general_finite(&vs, &p(1.0), &[p(1.0), p(0.5), p(0.9)]).unwrap().is_abstain());
        assert!(certify_general_finite(&vs, &p(1.0), &[p(1.0), p(0.1)]).unwrap().is_abstain());
        assert!(certify_general_finite(&vs, &p(1.0), &[]).is_err());
        assert!(certify_general_finite(&vs, &p(1.0), &[p(0.9)]).is_err());
    }

    #[test]
    fn safely_reliable_examples() {
        let vs = threshold_vs();
        assert!(safely_reliable_membership(&vs, None, &p(1.05), 0.1, 0.1, LossKind::ST).unwrap());
        assert!(!safely_reliable_membership(&vs, None, &p(0.9), 0.1, 0.1, LossKind::ST).unwrap());
        // η₁ = 0 reduces to the robustly-reliable region at radius η₂.
        for x in [0.85, 0.95, 1.0, 1.3] {
            let r = certify(&vs, &p(x), LossKind::ST).unwrap().radius;
            assert_eq!(safely_reliable_membership(&vs, None, &p(x), 0.0, 0.15, LossKind::ST).unwrap(), r >= 0.15);
        }
        assert!(safely_reliable_membership(&vs, None, &p(0.1), 0.05, 0.0, LossKind::CA).is_err());
    }

    #[test]
    fn margin_example() {
        let h = Hypothesis::linear(vec![1.0, 0.0]).unwrap();
        let z = Point::new(vec![0.5, 0.75f64.sqrt()]).unwrap();
        let alpha = default_alpha(2, 0.01);
        let eta = margin_certify(&h, &z, alpha, 1.0, 0.01, 2).unwrap();
        assert!((eta - 0.43976).abs() < 1e-4, "{eta}");
        let far = Point::new(vec![10.0, 0.0]).unwrap();
        assert_eq!(margin_certify(&h, &far, alpha, 1.0, 0.01, 2).unwrap(), -1.0);
        let edge = Point::new(vec![alpha * 0.01 * 2f64.sqrt(), 0.0]).unwrap();
        assert!(margin_certify(&h, &edge, alpha, 1.0, 0.01, 2).unwrap().abs() < 1e-15);
        let halved = margin_certify_halving(&h, &z, alpha, 1.0, 0.01, 2, 1e-9).unwrap();
        assert!(halved <= eta && halved >= eta / 2.0);
        assert!(margin_certify(&Hypothesis::Threshold { t: 0.0 }, &p(1.0), 1.0, 1.0, 0.1, 1).is_err());
    }

    #[test]
    fn certificate_json_format() {
        let vs = threshold_vs();
        let c = certify(&vs, &p(1.0), LossKind::ST).unwrap();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        assert_eq!(v["prediction"], 1);
        assert_eq!(v["loss"], "st");
        assert_eq!(v["method"], "analytic");
        let c = certify(&vs, &p(0.1), LossKind::TL).unwrap();
        assert_eq!(serde_json::to_value(&c).unwrap()["radius"], "inf");
        let a = certify(&vs, &p(0.5), LossKind::CA).unwrap();
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!((v["prediction"].as_str(), v["radius"].as_f64()), (Some("abstain"), Some(-1.0)));
        for cert in [c, a] {
            let back: Certificate = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
            assert_eq!(back, cert);
        }
    }

    #[test]
    fn small_contract_run_is_clean() {
        let cfg = ContractConfig { trials: 200, ..Default::default() };
        let r = verify_contract(&cfg).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.certified > 0);
    }
}
