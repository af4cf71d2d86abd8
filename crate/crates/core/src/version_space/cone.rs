//! Version spaces of homogeneous halfspaces in general dimension.
//!
//! The consistent normals form the polyhedral cone `K = {w : ⟨a_i, w⟩ ≥ 0}`
//! where `a_i = y_i x_i / ‖x_i‖` (closure taken over the strict inequalities of
//! negative examples). Three computations are built on it:
//!
//! * **Membership.** `z` is agreed positive iff no consistent `w` has
//!   `⟨w, z⟩ < 0`, and agreed negative iff none has `⟨w, z⟩ > 0`. Each question
//!   is one small linear program over `K ∩ {‖w‖_∞ ≤ 1}`, solved in-repo; a sign
//!   is achievable iff the optimum exceeds [`STRICT_TOL`].
//! * **Distance.** The agreed-positive region is the dual cone `K*`, and the
//!   disagreement region closure is the union of the hyperplanes `w^⊥`,
//!   `w ∈ K`. For `z ∈ K*` the distance is `min ⟨w, z⟩` over unit `w ∈ K`, a
//!   quasi-concave minimization attained at an extreme ray. The extreme rays
//!   are enumerated once at fit time by the double-description method, after
//!   which each query is a minimum over rays.
//! * **Cross-check.** [`ConeSpace::distance_report`] repeats the minimization
//!   by projected gradient on the sphere (projection onto `K` by Dykstra's
//!   alternating projections, independent of the ray enumeration) and by
//!   sampling random directions in `K`. Both give upper bounds on the exact
//!   value; a bound below it by more than tolerance means the enumeration
//!   missed a ray and is reported as an error.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Membership;
use crate::distributions::unit_direction;
use crate::error::{Error, Result};
use crate::lp::{maximize, LpOutcome};
use crate::model::{dot, norm, Label, Point};
use crate::rng::{seed_from_coords, stream};

/// A sign of `⟨w, z⟩` counts as achievable when the LP optimum over the
/// unit-box slice of the cone exceeds this (for unit `z`).
pub const STRICT_TOL: f64 = 1e-9;
/// Minimum margin for a sample to count as strictly separable.
const MARGIN_TOL: f64 = 1e-12;
/// Tolerance for classifying a ray as tight at a constraint.
const RAY_TOL: f64 = 1e-10;

/// The constraint cone together with its extreme rays and a max-margin normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeRepr", into = "ConeRepr")]
pub struct ConeSpace {
    dim: usize,
    constraints: Vec<Vec<f64>>,
    rays: Option<Vec<Vec<f64>>>,
    erm: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ConeRepr {
    dimension: usize,
    constraints: Vec<Vec<f64>>,
}

impl TryFrom<ConeRepr> for ConeSpace {
    type Error = Error;
    fn try_from(r: ConeRepr) -> Result<Self> {
        ConeSpace::from_constraints(r.dimension, r.constraints)
    }
}

impl From<ConeSpace> for ConeRepr {
    fn from(c: ConeSpace) -> Self {
        ConeRepr { dimension: c.dim, constraints: c.constraints }
    }
}

/// Result of the cross-checked distance computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    /// Exact distance from the ray enumeration.
    pub value: f64,
    /// Best value found by projected gradient (an upper bound).
    pub search: f64,
    /// Smallest value over random cone directions (an upper bound).
    pub sampled: f64,
    /// `min(search, sampled) − value`; nonnegative up to rounding.
    pub gap: f64,
    /// Whether projected gradient stopped more than `1e-3 · value` above the
    /// exact value (a local minimum).
    pub search_flagged: bool,
}

/// Options for [`ConeSpace::distance_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub gradient_tol: f64,
    pub samples: usize,
    pub seed: Option<u64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { restarts: 32, max_iterations: 10_000, gradient_tol: 1e-8, samples: 10_000, seed: None }
    }
}

impl ConeSpace {
    /// Fits the cone from labeled points of dimension `dim`.
    pub fn fit<'a>(dim: usize, samples: impl Iterator<Item = (&'a Point, Label)>) -> Result<Self> {
        let mut constraints = Vec::new();
        for (x, label) in samples {
            let n = x.norm();
            if n == 0.0 {
                if label == Label::Negative {
                    return Err(Error::NonRealizable { class: "linear" });
                }
                continue;
            }
            let s = label.sign() / n;
            constraints.push(x.coords().iter().map(|v| s * v).collect());
        }
        ConeSpace::from_constraints(dim, constraints)
    }

    /// Builds the cone from signed unit constraint rows.
    pub fn from_constraints(dim: usize, constraints: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(c) = constraints.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: c.len() });
        }
        let erm = max_margin_normal(dim, &constraints)?;
        let rays = extreme_rays(dim, &constraints);
        Ok(ConeSpace { dim, constraints, rays, erm })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Signed unit constraint rows `y_i x_i / ‖x_i‖`.
    pub fn constraints(&self) -> &[Vec<f64>] {
        &self.constraints
    }

    /// Unit extreme rays of the cone, or `None` when the constraints do not
    /// span the space (the cone then contains a line and the agreement region
    /// has empty interior).
    pub fn rays(&self) -> Option<&[Vec<f64>]> {
        self.rays.as_deref()
    }

    /// Max-margin consistent unit normal.
    pub fn erm_normal(&self) -> &[f64] {
        &self.erm
    }

    /// Whether unit `w` satisfies every constraint up to `tol`.
    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|a| dot(a, w) >= -tol)
    }

    /// `max ⟨w, z⟩` over the cone intersected with the unit box.
    fn max_score(&self, z: &[f64]) -> Result<f64> {
        let d = self.dim;
        let mut rows: Vec<Vec<f64>> = self.constraints.iter().map(|a| a.iter().map(|v| -v).collect()).collect();
        let mut rhs = vec![0.0; rows.len()];
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            rows.push(e.clone());
            e[j] = -1.0;
            rows.push(e);
            rhs.push(1.0);
            rhs.push(1.0);
        }
        match maximize(z, &rows, &rhs)? {
            LpOutcome::Optimal(s) => Ok(s.value),
            // The origin is feasible and the box bounds the objective.
            other => Err(Error::InvariantViolation(format!("cone LP returned {other:?}"))),
        }
    }

    /// Agreement status of `z`, decided by two linear programs.
    pub fn membership(&self, z: &[f64]) -> Result<Membership> {
        let n = norm(z);
        if n == 0.0 {
            return Ok(Membership::AgreePlus);
        }
        let unit: Vec<f64> = z.iter().map(|v| v / n).collect();
        let neg: Vec<f64> = unit.iter().map(|v| -v).collect();
        let plus = self.max_score(&unit)? > STRICT_TOL;
        let minus = self.max_score(&neg)? > STRICT_TOL;
        Ok(match (plus, minus) {
            (true, true) => Membership::Disagree,
            (false, true) => Membership::AgreeMinus,
            _ => Membership::AgreePlus,
        })
    }

    /// Agreement status of `z` read off the extreme rays. Available only when
    /// the cone is pointed.
    pub fn membership_by_rays(&self, z: &[f64]) -> Option<Membership> {
        let rays = self.rays.as_ref()?;
        let scale = norm(z).max(f64::MIN_POSITIVE);
        let min = rays.iter().map(|r| dot(r, z)).fold(f64::INFINITY, f64::min) / scale;
        let max = rays.iter().map(|r| dot(r, z)).fold(f64::NEG_INFINITY, f64::max) / scale;
        Some(if min >= -STRICT_TOL {
            Membership::AgreePlus
        } else if max <= STRICT_TOL {
            Membership::AgreeMinus
        } else {
            Membership::Disagree
        })
    }

    /// Exact distance from an agreed point `z` to the disagreement region,
    /// given its membership.
    pub fn distance_given(&self, z: &[f64], membership: Membership) -> f64 {
        let sign = match membership {
            Membership::AgreePlus => 1.0,
            Membership::AgreeMinus => -1.0,
            Membership::Disagree => return 0.0,
        };
        match &self.rays {
            None => 0.0,
            Some(rays) => rays
                .iter()
                .map(|r| sign * dot(r, z))
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
        }
    }

    /// Cross-checked distance: exact value plus projected-gradient and sampled
    /// upper bounds. Errors if either bound undercuts the exact value.
    pub fn distance_report(&self, z: &[f64], membership: Membership, options: &SearchOptions) -> Result<DistanceReport> {
        let value = self.distance_given(z, membership);
        let sign = match membership {
            Membership::AgreePlus => 1.0,
            Membership::AgreeMinus => -1.0,
            Membership::Disagree => {
                return Ok(DistanceReport { value: 0.0, search: 0.0, sampled: 0.0, gap: 0.0, search_flagged: false })
            }
        };
        let target: Vec<f64> = z.iter().map(|v| sign * v).collect();
        let seed = options.seed.unwrap_or_else(|| seed_from_coords(z));
        let search = self.projected_gradient(&target, options, seed);
        let sampled = self.sampled_bound(&target, options.samples, seed);
        let best = search.min(sampled);
        let gap = best - value;
        let tol = 1e-7 * (1.0 + norm(z));
        if gap < -tol {
            return Err(Error::GapExceeded { gap: -gap, tolerance: tol });
        }
        Ok(DistanceReport { value, search, sampled, gap, search_flagged: search - value > 1e-3 * value })
    }

    /// Projection onto `K` by Dykstra's cyclic projections onto halfspaces.
    fn project(&self, v: &[f64]) -> Vec<f64> {
        let m = self.constraints.len();
        let mut x = v.to_vec();
        let mut inc = vec![vec![0.0; self.dim]; m];
        for _ in 0..2_000 {
            let mut change = 0.0_f64;
            for (a, p) in self.constraints.iter().zip(inc.iter_mut()) {
                let y: Vec<f64> = x.iter().zip(p.iter()).map(|(xi, pi)| xi + pi).collect();
                let s = dot(a, &y);
                let proj: Vec<f64> = if s < 0.0 { y.iter().zip(a).map(|(yi, ai)| yi - s * ai).collect() } else { y.clone() };
                for j in 0..self.dim {
                    p[j] = y[j] - proj[j];
                    change = change.max((proj[j] - x[j]).abs());
                }
                x = proj;
            }
            if change < 1e-13 {
                break;
            }
        }
        x
    }

    /// Projects onto `K` and normalizes. Returns `None` when the projection
    /// is near the origin or did not converge to a feasible point, so every
    /// accepted iterate is a genuine unit vector of `K`.
    fn project_unit(&self, v: &[f64]) -> Option<Vec<f64>> {
        let p = self.project(v);
        let n = norm(&p);
        if n < 1e-12 {
            return None;
        }
        let w: Vec<f64> = p.into_iter().map(|x| x / n).collect();
        self.contains(&w, 1e-12).then_some(w)
    }

    fn objective(target: &[f64], w: &[f64]) -> f64 {
        dot(target, w)
    }

    /// Projected gradient for `min ⟨w, target⟩` over unit `w ∈ K`.
    fn projected_gradient(&self, target: &[f64], options: &SearchOptions, seed: u64) -> f64 {
        let mut rng = stream(seed, 1);
        let mut best = f64::INFINITY;
        for restart in 0..options.restarts {
            let start = if restart == 0 {
                self.erm.clone()
            } else {
                let g = unit_direction(&mut rng, self.dim);
                let mixed: Vec<f64> = g.iter().zip(&self.erm).map(|(a, b)| a + b).collect();
                match self.project_unit(&mixed) {
                    Some(w) => w,
                    None => continue,
                }
            };
            let mut w = start;
            let mut f = Self::objective(target, &w);
            let mut step = 1.0;
            for _ in 0..options.max_iterations {
                let proj = dot(target, &w);
                let grad: Vec<f64> = target.iter().zip(&w).map(|(t, wi)| t - proj * wi).collect();
                if norm(&grad) < options.gradient_tol || step < 1e-14 {
                    break;
                }
                let trial: Vec<f64> = w.iter().zip(&grad).map(|(wi, g)| wi - step * g).collect();
                let Some(cand) = self.project_unit(&trial) else {
                    step *= 0.5;
                    continue;
                };
                let fc = Self::objective(target, &cand);
                if fc < f - 1e-15 {
                    w = cand;
                    f = fc;
                    step *= 1.5;
                } else {
                    step *= 0.5;
                }
            }
            best = best.min(f);
        }
        best.max(0.0)
    }

    /// Minimum of `⟨w, target⟩` over random unit directions of `K`, drawn as
    /// random nonnegative combinations of the extreme rays and of the
    /// max-margin normal.
    fn sampled_bound(&self, target: &[f64], samples: usize, seed: u64) -> f64 {
        let mut gens: Vec<Vec<f64>> = self.rays.clone().unwrap_or_default();
        gens.push(self.erm.clone());
        let mut rng = stream(seed, 2);
        let mut best = f64::INFINITY;
        for _ in 0..samples {
            let mut w = vec![0.0; self.dim];
            for g in &gens {
                let c: f64 = rng.gen::<f64>().powi(4);
                for (wi, gi) in w.iter_mut().zip(g) {
                    *wi += c * gi;
                }
            }
            let n = norm(&w);
            if n > 1e-12 {
                best = best.min(dot(target, &w) / n);
            }
        }
        best.max(0.0)
    }
}

/// Max-margin unit normal: maximize `γ` subject to `⟨a_i, w⟩ ≥ γ` and
/// `‖w‖_∞ ≤ 1`. Errors when no strictly separating normal exists.
fn max_margin_normal(dim: usize, constraints: &[Vec<f64>]) -> Result<Vec<f64>> {
    if constraints.is_empty() {
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        return Ok(e);
    }
    let k = dim + 1;
    let mut rows = Vec::with_capacity(constraints.len() + 2 * dim + 1);
    let mut rhs = Vec::with_capacity(rows.capacity());
    for a in constraints {
        let mut r: Vec<f64> = a.iter().map(|v| -v).collect();
        r.push(1.0);
        rows.push(r);
        rhs.push(0.0);
    }
    for j in 0..dim {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        rows.push(e.clone());
        e[j] = -1.0;
        rows.push(e);
        rhs.push(1.0);
        rhs.push(1.0);
    }
    let mut g = vec![0.0; k];
    g[dim] = 1.0;
    rows.push(g.clone());
    rhs.push(1.0);
    match maximize(&g, &rows, &rhs)? {
        LpOutcome::Optimal(s) if s.value > MARGIN_TOL => {
            let w = &s.x[..dim];
            let n = norm(w);
            Ok(w.iter().map(|v| v / n).collect())
        }
        LpOutcome::Optimal(_) => Err(Error::NonRealizable { class: "linear" }),
        other => Err(Error::InvariantViolation(format!("margin LP returned {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Double description
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn contains(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
}

/// Greedy choice of `dim` well-conditioned linearly independent rows.
fn independent_rows(dim: usize, rows: &[Vec<f64>]) -> Option<Vec<usize>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    let mut residual: Vec<Vec<f64>> = rows.to_vec();
    while chosen.len() < dim {
        let (idx, n) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, r)| (i, norm(r)))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if n < 1e-9 {
            return None;
        }
        let q: Vec<f64> = residual[idx].iter().map(|v| v / n).collect();
        for r in residual.iter_mut() {
            let s = dot(r, &q);
            for (ri, qi) in r.iter_mut().zip(&q) {
                *ri -= s * qi;
            }
        }
        basis.push(q);
        chosen.push(idx);
    }
    Some(chosen)
}

/// Inverse of a square matrix by Gauss-Jordan elimination with partial pivoting.
fn invert(mut m: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col];
        for j in 0..n {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for j in 0..n {
                        m[r][j] -= f * m[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

/// Unit extreme rays of `{w : ⟨a_i, w⟩ ≥ 0}`, or `None` if the rows do not
/// span `ℝ^dim`.
///
/// Starts from the simplicial cone of `dim` independent rows, whose rays are
/// the columns of the inverse, then adds the remaining constraints one at a
/// time. Rays strictly violating a new constraint are replaced by combinations
/// with adjacent satisfying rays; adjacency uses the combinatorial test on the
/// sets of tight constraints.
pub(crate) fn extreme_rays(dim: usize, rows: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let m = rows.len();
    let chosen = independent_rows(dim, rows)?;
    let b: Vec<Vec<f64>> = chosen.iter().map(|&i| rows[i].clone()).collect();
    let inv = invert(b)?;
    let mut rays: Vec<(Vec<f64>, Bits)> = (0..dim)
        .map(|j| {
            let col: Vec<f64> = (0..dim).map(|i| inv[i][j]).collect();
            let mut z = Bits::new(m);
            for (k, &ci) in chosen.iter().enumerate() {
                if k != j {
                    z.set(ci);
                }
            }
            (normalized(col), z)
        })
        .collect();

    for (i, a) in rows.iter().enumerate() {
        if chosen.contains(&i) {
            continue;
        }
        let vals: Vec<f64> = rays.iter().map(|(r, _)| dot(a, r)).collect();
        if vals.iter().all(|&v| v >= -RAY_TOL) {
            for ((_, z), &v) in rays.iter_mut().zip(&vals) {
                if v.abs() <= RAY_TOL {
                    z.set(i);
                }
            }
            continue;
        }
        let plus: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] > RAY_TOL).collect();
        let minus: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] < -RAY_TOL).collect();
        let mut next: Vec<(Vec<f64>, Bits)> = Vec::new();
        for &p in &plus {
            for &n in &minus {
                let common = rays[p].1.and(&rays[n].1);
                if common.count() + 2 < dim {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .filter(|&k| k != p && k != n)
                    .all(|k| !rays[k].1.contains(&common));
                if !adjacent {
                    continue;
                }
                let (sp, sn) = (vals[p], vals[n]);
                let v: Vec<f64> = rays[n].0.iter().zip(&rays[p].0).map(|(rn, rp)| sp * rn - sn * rp).collect();
                let mut z = common;
                z.set(i);
                next.push((normalized(v), z));
            }
        }
        for (k, (r, z)) in rays.into_iter().enumerate() {
            if vals[k] > RAY_TOL {
                next.push((r, z));
            } else if vals[k] >= -RAY_TOL {
                let mut z = z;
                z.set(i);
                next.push((r, z));
            }
        }
        if next.is_empty() {
            // Only the origin remains: the constraints admit no nonzero normal.
            return Some(Vec::new());
        }
        rays = next;
    }
    Some(rays.into_iter().map(|(r, _)| r).collect())
}
