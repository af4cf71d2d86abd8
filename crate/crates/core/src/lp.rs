//! Dense simplex solver for small linear programs with few variables.
//!
//! Solves `maximize ⟨c, x⟩ subject to A x ≤ b` with `x` free. The problems in
//! this crate have a handful of variables and up to thousands of constraints,
//! so the solver works on the dual in standard form,
//!
//! ```text
//! minimize ⟨b, λ⟩  subject to  Aᵀ λ = c,  λ ≥ 0,
//! ```
//!
//! whose tableau has one row per primal variable. Phase one drives a set of
//! artificial variables to zero; phase two optimizes. Bland's rule is used
//! throughout, which rules out cycling on the heavily degenerate constraint
//! sets produced by version-space queries. The primal solution is read off the
//! final basis through the artificial columns.

use crate::error::{Error, Result};

/// Pivot limit before the solver reports non-convergence.
const MAX_PIVOTS: usize = 100_000;
/// Reduced costs above `-COST_TOL` are treated as nonnegative.
const COST_TOL: f64 = 1e-11;
/// Tableau entries below this magnitude are never used as pivots.
const PIVOT_TOL: f64 = 1e-11;
/// Allowed primal infeasibility of the recovered solution.
const FEASIBILITY_TOL: f64 = 1e-7;

/// An optimal primal solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Optimal objective value `⟨c, x⟩`.
    pub value: f64,
    /// A maximizer.
    pub x: Vec<f64>,
    /// Total pivots over both phases.
    pub pivots: usize,
}

/// Outcome of [`maximize`].
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `k × (n + k)` coefficient rows.
    t: Vec<Vec<f64>>,
    /// Right-hand side per row.
    b: Vec<f64>,
    /// Basic variable per row.
    basis: Vec<usize>,
    /// Number of structural (dual) variables; artificials follow.
    n: usize,
    pivots: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        self.b[row] /= p;
        self.t[row][col] = 1.0;
        for r in 0..self.t.len() {
            if r == row {
                continue;
            }
            let f = self.t[r][col];
            if f == 0.0 {
                continue;
            }
            let (src, dst) = if r < row {
                let (a, b) = self.t.split_at_mut(row);
                (&b[0], &mut a[r])
            } else {
                let (a, b) = self.t.split_at_mut(r);
                (&a[row], &mut b[0])
            };
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d -= f * s;
            }
            dst[col] = 0.0;
            self.b[r] -= f * self.b[row];
            if self.b[r] < 0.0 && self.b[r] > -1e-13 {
                self.b[r] = 0.0;
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    fn reduced_cost(&self, cost: &[f64], col: usize) -> f64 {
        let mut r = cost[col];
        for (row, &bv) in self.basis.iter().enumerate() {
            r -= cost[bv] * self.t[row][col];
        }
        r
    }

    /// Runs simplex iterations minimizing `cost`, allowing only columns below
    /// `enter_limit` to enter the basis.
    fn run(&mut self, cost: &[f64], enter_limit: usize) -> Result<Phase> {
        loop {
            if self.pivots > MAX_PIVOTS {
                let residual = self.b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                return Err(Error::SolverFailure { iterations: self.pivots, residual });
            }
            let entering = (0..enter_limit)
                .find(|&col| !self.basis.contains(&col) && self.reduced_cost(cost, col) < -COST_TOL);
            let Some(col) = entering else {
                return Ok(Phase::Optimal);
            };
            let mut best: Option<(usize, f64)> = None;
            for row in 0..self.t.len() {
                let a = self.t[row][col];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.b[row].max(0.0) / a;
                best = match best {
                    None => Some((row, ratio)),
                    Some((br, bratio)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        if ratio < bratio && !tie || tie && self.basis[row] < self.basis[br] {
                            Some((row, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return Ok(Phase::Unbounded),
            }
        }
    }
}

/// Maximizes `⟨c, x⟩` subject to `rows[i] · x ≤ rhs[i]` over free `x`.
///
/// Returns [`LpOutcome::Unbounded`] or [`LpOutcome::Infeasible`] as values;
/// errors only on malformed input or pivot-limit exhaustion.
pub fn maximize(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<LpOutcome> {
    let k = c.len();
    let n = rows.len();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rhs.len() });
    }
    if let Some(r) = rows.iter().find(|r| r.len() != k) {
        return Err(Error::DimensionMismatch { expected: k, found: r.len() });
    }
    if c.iter().chain(rhs).chain(rows.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("linear program has non-finite data".into()));
    }

    // Row j of the dual system is Σ_i rows[i][j] λ_i = c_j, sign-flipped so the
    // right-hand side is nonnegative, with artificial n + j.
    let signs: Vec<f64> = c.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut t = vec![vec![0.0; n + k]; k];
    for j in 0..k {
        for i in 0..n {
            t[j][i] = signs[j] * rows[i][j];
        }
        t[j][n + j] = 1.0;
    }
    let b: Vec<f64> = c.iter().map(|v| v.abs()).collect();
    let mut tab = Tableau { t, b, basis: (n..n + k).collect(), n, pivots: 0 };

    // Phase one: minimize the sum of artificials.
    let mut cost1 = vec![0.0; n + k];
    for v in cost1.iter_mut().skip(n) {
        *v = 1.0;
    }
    tab.run(&cost1, n + k)?;
    let scale = 1.0 + c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let infeasibility: f64 = tab
        .basis
        .iter()
        .zip(&tab.b)
        .filter(|(&bv, _)| bv >= n)
        .map(|(_, &v)| v)
        .sum();
    if infeasibility > 1e-9 * scale {
        // The dual is infeasible, so the feasible primal (if any) is unbounded.
        return Ok(LpOutcome::Unbounded);
    }
    // Pivot zero-level artificials out of the basis where possible. Rows with
    // no usable structural entry are redundant and stay inert.
    for row in 0..k {
        if tab.basis[row] >= n {
            tab.b[row] = 0.0;
            if let Some(col) = (0..n)
                .filter(|c| !tab.basis.contains(c))
                .max_by(|&a, &b| tab.t[row][a].abs().total_cmp(&tab.t[row][b].abs()))
            {
                if tab.t[row][col].abs() > 1e-9 {
                    tab.pivot(row, col);
                }
            }
        }
    }

    // Phase two: minimize ⟨rhs, λ⟩ with artificials barred from entering.
    let mut cost2 = vec![0.0; n + k];
    cost2[..n].copy_from_slice(rhs);
    if let Phase::Unbounded = tab.run(&cost2, n)? {
        return Ok(LpOutcome::Infeasible);
    }

    let value: f64 = tab.basis.iter().zip(&tab.b).map(|(&bv, &v)| cost2[bv] * v).sum();
    let x: Vec<f64> = (0..k)
        .map(|j| {
            let s: f64 = tab
                .basis
                .iter()
                .enumerate()
                .map(|(row, &bv)| cost2[bv] * tab.t[row][tab.n + j])
                .sum();
            signs[j] * s
        })
        .collect();

    let worst = rows
        .iter()
        .zip(rhs)
        .map(|(r, &h)| r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() - h)
        .fold(0.0_f64, f64::max);
    let rscale = 1.0 + rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if worst > FEASIBILITY_TOL * rscale {
        return Err(Error::SolverFailure { iterations: tab.pivots, residual: worst });
    }
    Ok(LpOutcome::Optimal(LpSolution { value, x, pivots: tab.pivots }))
}
