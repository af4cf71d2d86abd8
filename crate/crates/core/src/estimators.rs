//! Monte-Carlo estimators: region masses with Hoeffding intervals,
//! safely-reliable masses, the source-to-target disagreement coefficient
//! `Θ_{P→Q}(ε)`, and source-to-target reliable correctness.
//!
//! Every estimator is deterministic in its seed. Per-trial seeds are derived
//! by counter ([`crate::rng::derive`]) and trials run in parallel, so results
//! do not depend on the number of workers.
//!
//! # Disagreement coefficient paths
//!
//! `DIS(B_P(h*, r))` is the set of points on which some hypothesis within
//! `P`-disagreement `r` of `h*` differs from `h*`. Three evaluations exist:
//!
//! * **CDF** (thresholds, offset boundaries): a threshold `t` differs from
//!   `t*` with probability `|F(t) − F(t*)|`, so `x` is in the region iff
//!   `|F(x) − F(t*)| < r`. `F` is the exact CDF of `P` when known, otherwise
//!   the empirical CDF of a reference sample (of residuals, for offsets).
//! * **Rotation invariant** (halfspaces under a rotation-invariant `P`):
//!   disagreement equals angle over π, so `x` is in the region iff
//!   `|π/2 − θ(w*, x)| ≤ π r`.
//! * **Empirical** (halfspaces under any other `P`): hypotheses are obtained
//!   by rotating `w*` toward random orthogonal directions. Along each
//!   direction the rotation angle that flips a point has a closed form, so the
//!   empirical disagreement is a sorted list of flip angles, and `x` is in the
//!   region iff some direction flips it before the disagreement budget `r` is
//!   spent. This is an inner approximation of the region.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample_with, unit_direction, DistributionSpec};
use crate::error::{invalid, Error, Result};
use crate::losses::LossKind;
use crate::model::{dot, norm, predict, ConceptClass, Dataset, Hypothesis, Point};
use crate::reliability::safely_reliable_membership;
use crate::rng::{derive, stream};
use crate::version_space::{agree_membership, fit_version_space};

/// Two-sided 95% Hoeffding half-width for `n` Bernoulli draws.
pub fn hoeffding_half_width(n: usize) -> f64 {
    ((2.0f64 / 0.05).ln() / (2.0 * n as f64)).sqrt()
}

/// A Monte-Carlo mass with a 95% Hoeffding interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionEstimate {
    pub mass: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Total number of indicator evaluations behind `mass`.
    pub n: usize,
    pub seed: u64,
    /// Per-trial masses for estimators that average over samples `S`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_trial: Vec<f64>,
}

impl RegionEstimate {
    /// Estimate from `hits` successes out of `n`.
    pub fn from_counts(hits: usize, n: usize, seed: u64) -> Self {
        let mass = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        let hw = hoeffding_half_width(n.max(1));
        RegionEstimate {
            mass,
            ci_low: (mass - hw).max(0.0),
            ci_high: (mass + hw).min(1.0),
            n,
            seed,
            per_trial: Vec::new(),
        }
    }

    /// Whether the two confidence intervals intersect.
    pub fn overlaps(&self, other: &RegionEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Fraction of `n` draws from `spec` satisfying `predicate`.
pub fn mc_mass<F>(predicate: F, spec: &DistributionSpec, n: usize, seed: u64) -> Result<RegionEstimate>
where
    F: Fn(&Point) -> Result<bool> + Sync,
{
    if n == 0 {
        return Err(invalid("mc_mass needs at least one draw"));
    }
    let pts = sample_with(spec, &mut stream(seed, 0), n)?;
    let hits = pts
        .par_iter()
        .map(|p| predicate(p).map(usize::from))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(RegionEstimate::from_counts(hits, n, seed))
}

/// Sample-size relation `ε(m) = √(8 (d + ln(1/δ)) / m)`.
pub fn epsilon_for_m(m: usize, d: usize, delta: f64) -> f64 {
    (8.0 * (d as f64 + (1.0 / delta).ln()) / m as f64).sqrt()
}

/// Inverse of [`epsilon_for_m`]: `m = ⌈8 (d + ln(1/δ)) / ε²⌉`.
pub fn m_for_epsilon(eps: f64, d: usize, delta: f64) -> usize {
    (8.0 * (d as f64 + (1.0 / delta).ln()) / (eps * eps)).ceil() as usize
}

/// Which region a [`RegionConfig`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// The agreement region of `H₀(S)`.
    Agreement,
    /// The safely-reliable region for a loss.
    SafelyReliable(LossKind),
}

/// Settings for [`sr_mass`] and [`reliable_correctness`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub class: ConceptClass,
    pub hstar: Hypothesis,
    /// Training distribution.
    pub p: DistributionSpec,
    /// Test distribution; defaults to `p`.
    pub q: Option<DistributionSpec>,
    pub m: usize,
    pub trials: usize,
    pub n_test: usize,
    pub eta1: f64,
    pub eta2: f64,
    pub region: Region,
    pub seed: u64,
    /// True labeling of test draws, when it may differ from `hstar`. Any test
    /// draw it labels differently from `hstar` aborts the estimate.
    pub q_target: Option<Hypothesis>,
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig {
            class: ConceptClass::Threshold,
            hstar: Hypothesis::Threshold { t: 0.0 },
            p: DistributionSpec::Gaussian { d: 1 },
            q: None,
            m: 200,
            trials: 20,
            n_test: 2000,
            eta1: 0.0,
            eta2: 0.0,
            region: Region::SafelyReliable(LossKind::ST),
            seed: 0,
            q_target: None,
        }
    }
}

/// Mass of the configured region for one trial's sample.
fn trial_mass(cfg: &RegionConfig, trial: usize) -> Result<f64> {
    let seed = derive(cfg.seed, trial as u64);
    let pts = sample_with(&cfg.p, &mut stream(seed, 0), cfg.m)?;
    let s = Dataset::labeled_by(&cfg.hstar, pts)?;
    let vs = fit_version_space(&s, &cfg.class, 0.0)?;
    let q = cfg.q.as_ref().unwrap_or(&cfg.p);
    let tests = sample_with(q, &mut stream(seed, 1), cfg.n_test)?;
    let mut hits = 0usize;
    for (i, x) in tests.iter().enumerate() {
        if let Some(target) = &cfg.q_target {
            if predict(target, x)? != predict(&cfg.hstar, x)? {
                return Err(Error::RealizabilityViolation { index: i });
            }
        }
        let inside = match cfg.region {
            Region::Agreement => agree_membership(&vs, x)?.is_agree(),
            Region::SafelyReliable(kind) => {
                safely_reliable_membership(&vs, Some(&cfg.hstar), x, cfg.eta1, cfg.eta2, kind)?
            }
        };
        hits += usize::from(inside);
    }
    Ok(hits as f64 / cfg.n_test as f64)
}

fn region_mass(cfg: &RegionConfig) -> Result<RegionEstimate> {
    if cfg.trials == 0 || cfg.n_test == 0 {
        return Err(invalid("need at least one trial and one test draw"));
    }
    if !(cfg.eta1 >= 0.0 && cfg.eta2 >= 0.0) {
        return Err(invalid("budgets must be nonnegative"));
    }
    if !cfg.class.contains(&cfg.hstar) {
        return Err(invalid("target hypothesis is not in the concept class"));
    }
    let q = cfg.q.as_ref().unwrap_or(&cfg.p);
    for spec in [&cfg.p, q] {
        spec.validate()?;
        if spec.dimension() != cfg.hstar.dim() {
            return Err(Error::DimensionMismatch { expected: cfg.hstar.dim(), found: spec.dimension() });
        }
    }
    let per_trial: Vec<f64> = (0..cfg.trials).into_par_iter().map(|i| trial_mass(cfg, i)).collect::<Result<_>>()?;
    let n = cfg.trials * cfg.n_test;
    let mass = per_trial.iter().sum::<f64>() / cfg.trials as f64;
    let hw = hoeffding_half_width(n);
    Ok(RegionEstimate {
        mass,
        ci_low: (mass - hw).max(0.0),
        ci_high: (mass + hw).min(1.0),
        n,
        seed: cfg.seed,
        per_trial,
    })
}

/// Safely-reliable mass averaged over `trials` independent samples. The
/// interval pools all `trials · n_test` test draws and is conditional on the
/// drawn samples.
pub fn sr_mass(cfg: &RegionConfig) -> Result<RegionEstimate> {
    if let Region::Agreement = cfg.region {
        return Err(invalid("sr_mass needs a loss"));
    }
    region_mass(cfg)
}

/// Reliable correctness from `P` to `Q`: the probability that a `Q` draw
/// falls in the agreement region (or the safely-reliable region, for a loss)
/// of a sample drawn from `P`.
pub fn reliable_correctness(cfg: &RegionConfig) -> Result<RegionEstimate> {
    region_mass(cfg)
}

/// Whether `x` lies in `DIS(B_P(h*, r))` for a rotation-invariant `P`:
/// `|π/2 − θ(w*, x)| ≤ π r`.
pub fn dis_ball_membership_rotinv(hstar: &Hypothesis, r: f64, x: &Point) -> Result<bool> {
    let w = hstar.normal().ok_or_else(|| invalid("the rotation-invariant path needs a linear target"))?;
    if w.len() != x.dim() {
        return Err(Error::DimensionMismatch { expected: w.len(), found: x.dim() });
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid(format!("disagreement radius must lie in [0, 1], got {r}")));
    }
    let n = x.norm();
    if n == 0.0 {
        return Err(invalid("the angle to the zero vector is undefined"));
    }
    let cos = (dot(w, x.coords()) / n).clamp(-1.0, 1.0);
    Ok((FRAC_PI_2 - cos.acos()).abs() <= PI * r)
}

/// How `Θ_{P→Q}` was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaPath {
    /// Exact CDF of `P`.
    Cdf,
    /// Empirical CDF of a `P` reference sample.
    EmpiricalCdf,
    RotationInvariant,
    /// Rotated hypotheses against a `P` reference sample.
    EmpiricalRotation,
}

/// Settings for [`theta_pq`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaConfig {
    pub class: ConceptClass,
    pub hstar: Hypothesis,
    pub p: DistributionSpec,
    pub q: DistributionSpec,
    pub epsilon: f64,
    /// Radii; defaults to [`default_r_grid`].
    pub r_grid: Option<Vec<f64>>,
    /// Number of `Q` draws, shared by all radii.
    pub n: usize,
    /// Size of the `P` reference sample for the empirical paths.
    pub reference_n: usize,
    /// Rotation directions for the empirical halfspace path.
    pub directions: usize,
    /// Use the reference-sample paths even when an exact one exists.
    pub force_empirical: bool,
    pub seed: u64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        ThetaConfig {
            class: ConceptClass::Threshold,
            hstar: Hypothesis::Threshold { t: 0.0 },
            p: DistributionSpec::Gaussian { d: 1 },
            q: DistributionSpec::Gaussian { d: 1 },
            epsilon: 0.01,
            r_grid: None,
            n: 100_000,
            reference_n: 100_000,
            directions: 64,
            force_empirical: false,
            seed: 0,
        }
    }
}

/// One radius of a disagreement-coefficient curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    pub r: f64,
    pub mass: f64,
    pub ratio: f64,
}

/// Grid estimate of `Θ_{P→Q}(ε) = sup_{r ≥ ε} Pr_Q[DIS(B_P(h*, r))] / r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    /// Maximum of `mass / r` over the grid.
    pub value: f64,
    pub epsilon: f64,
    pub curve: Vec<ThetaPoint>,
    /// Largest ratio between consecutive radii, the grid resolution.
    pub grid_ratio: f64,
    /// Hoeffding half-width of each mass.
    pub mass_half_width: f64,
    pub path: ThetaPath,
    pub n: usize,
    pub seed: u64,
}

/// `k` logarithmically spaced radii from `epsilon` to 1/2.
pub fn default_r_grid(epsilon: f64, k: usize) -> Vec<f64> {
    if k <= 1 || epsilon >= 0.5 {
        return vec![epsilon.min(0.5)];
    }
    let (a, b) = (epsilon.ln(), 0.5f64.ln());
    (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect()
}

/// Estimates `Θ_{P→Q}(ε)` over a grid of radii with one shared `Q` sample.
pub fn theta_pq(cfg: &ThetaConfig) -> Result<ThetaEstimate> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0) {
        return Err(invalid("epsilon must lie in (0, 1]"));
    }
    let grid = cfg.r_grid.clone().unwrap_or_else(|| default_r_grid(cfg.epsilon, 16));
    if grid.is_empty() || grid.iter().any(|&r| !(r >= cfg.epsilon && r <= 1.0)) {
        return Err(invalid("radii must lie in [epsilon, 1]"));
    }
    if !cfg.class.contains(&cfg.hstar) {
        return Err(invalid("target hypothesis is not in the concept class"));
    }
    if cfg.n == 0 {
        return Err(invalid("theta needs at least one Q draw"));
    }
    for spec in [&cfg.p, &cfg.q] {
        spec.validate()?;
        if spec.dimension() != cfg.hstar.dim() {
            return Err(Error::DimensionMismatch { expected: cfg.hstar.dim(), found: spec.dimension() });
        }
    }
    let qs = sample_with(&cfg.q, &mut stream(cfg.seed, 0), cfg.n)?;
    let (path, masses) = match &cfg.hstar {
        Hypothesis::Threshold { t } => match cfg.p.cdf_1d(*t).filter(|_| !cfg.force_empirical) {
            Some(ft) => {
                let f: Vec<f64> = qs.iter().map(|x| cfg.p.cdf_1d(x.coords()[0]).expect("1-D spec")).collect();
                (ThetaPath::Cdf, cdf_masses(&f, ft, &grid))
            }
            None => {
                let stat = |x: &Point| x.coords()[0];
                (ThetaPath::EmpiricalCdf, empirical_cdf_masses(cfg, &qs, stat, *t, &grid)?)
            }
        },
        Hypothesis::Offset { base, t } => {
            let stat = |x: &Point| base.residual(x.coords());
            (ThetaPath::EmpiricalCdf, empirical_cdf_masses(cfg, &qs, stat, *t, &grid)?)
        }
        Hypothesis::Linear { .. } if cfg.p.is_rotation_invariant() && !cfg.force_empirical => {
            let masses = grid
                .iter()
                .map(|&r| {
                    let mut hits = 0usize;
                    for x in &qs {
                        if x.norm() > 0.0 && dis_ball_membership_rotinv(&cfg.hstar, r, x)? {
                            hits += 1;
                        }
                    }
                    Ok(hits as f64 / qs.len() as f64)
                })
                .collect::<Result<Vec<_>>>()?;
            (ThetaPath::RotationInvariant, masses)
        }
        Hypothesis::Linear { w } => (ThetaPath::EmpiricalRotation, rotation_masses(cfg, w.as_slice(), &qs, &grid)?),
    };
    let curve: Vec<ThetaPoint> =
        grid.iter().zip(&masses).map(|(&r, &mass)| ThetaPoint { r, mass, ratio: mass / r }).collect();
    let value = curve.iter().map(|p| p.ratio).fold(0.0, f64::max);
    let mut sorted = grid.clone();
    sorted.sort_by(f64::total_cmp);
    let grid_ratio = sorted.windows(2).map(|w| w[1] / w[0]).fold(1.0, f64::max);
    Ok(ThetaEstimate {
        value,
        epsilon: cfg.epsilon,
        curve,
        grid_ratio,
        mass_half_width: hoeffding_half_width(cfg.n),
        path,
        n: cfg.n,
        seed: cfg.seed,
    })
}

/// Masses of `{x : |F(x) − F(t*)| < r}` from precomputed CDF values.
fn cdf_masses(f: &[f64], ft: f64, grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&r| f.iter().filter(|&&v| (v - ft).abs() < r).count() as f64 / f.len() as f64)
        .collect()
}

fn empirical_cdf_masses(
    cfg: &ThetaConfig,
    qs: &[Point],
    stat: impl Fn(&Point) -> f64,
    t: f64,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if cfg.reference_n == 0 {
        return Err(invalid("the empirical path needs a reference sample"));
    }
    let mut reference: Vec<f64> = sample_with(&cfg.p, &mut stream(cfg.seed, 1), cfg.reference_n)?
        .iter()
        .map(&stat)
        .collect();
    reference.sort_by(f64::total_cmp);
    let ecdf = |v: f64| reference.partition_point(|&s| s <= v) as f64 / reference.len() as f64;
    let f: Vec<f64> = qs.iter().map(|x| ecdf(stat(x))).collect();
    Ok(cdf_masses(&f, ecdf(t), grid))
}

/// Rotation angle in `[0, π]` at which `cos φ · w* + sin φ · u` first flips
/// the label `w*` assigns to `x`.
fn flip_angle(w: &[f64], u: &[f64], x: &[f64]) -> f64 {
    let a = dot(w, x);
    let b = dot(u, x);
    let s = if a >= 0.0 { 1.0 } else { -1.0 };
    (s * b).atan2(s * a) + FRAC_PI_2
}

fn rotation_masses(cfg: &ThetaConfig, w: &[f64], qs: &[Point], grid: &[f64]) -> Result<Vec<f64>> {
    if cfg.reference_n == 0 || cfg.directions == 0 {
        return Err(invalid("the empirical path needs a reference sample and rotation directions"));
    }
    let d = w.len();
    let mut rng = stream(cfg.seed, 2);
    let dirs: Vec<Vec<f64>> = if d == 2 {
        vec![vec![-w[1], w[0]], vec![w[1], -w[0]]]
    } else {
        (0..cfg.directions)
            .map(|_| loop {
                let mut u = unit_direction(&mut rng, d);
                let p = dot(&u, w);
                u.iter_mut().zip(w).for_each(|(ui, wi)| *ui -= p * wi);
                let n = norm(&u);
                if n > 1e-9 {
                    break u.into_iter().map(|v| v / n).collect();
                }
            })
            .collect()
    };
    let reference = sample_with(&cfg.p, &mut stream(cfg.seed, 1), cfg.reference_n)?;
    // Largest admissible angle per direction and radius: disagreement along a
    // direction at angle φ is the fraction of reference flip angles below φ.
    let budgets: Vec<Vec<f64>> = dirs
        .par_iter()
        .map(|u| {
            let mut angles: Vec<f64> = reference.iter().map(|y| flip_angle(w, u, y.coords())).collect();
            angles.sort_by(f64::total_cmp);
            grid.iter()
                .map(|&r| {
                    let k = (r * angles.len() as f64).floor() as usize;
                    angles.get(k).copied().unwrap_or(PI)
                })
                .collect()
        })
        .collect();
    let flips: Vec<Vec<f64>> =
        qs.par_iter().map(|x| dirs.iter().map(|u| flip_angle(w, u, x.coords())).collect()).collect();
    Ok((0..grid.len())
        .map(|j| {
            let hits = flips
                .iter()
                .filter(|fx| fx.iter().zip(&budgets).any(|(&phi, b)| phi < b[j]))
                .count();
            hits as f64 / qs.len() as f64
        })
        .collect())
}

/// One row of the estimate CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub quantity: String,
    pub class: String,
    pub loss: String,
    pub eta1: f64,
    pub eta2: f64,
    pub m: usize,
    pub d: usize,
    pub trials: usize,
    pub n: usize,
    pub mass: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// Writes estimate rows with the header
/// `quantity,class,loss,eta1,eta2,m,d,trials,n,mass,ci_low,ci_high,seed`.
pub fn write_estimates_csv<W: Write>(rows: &[EstimateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}
