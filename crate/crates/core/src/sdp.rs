//! Max-margin solver for Hermitian linear matrix inequalities.
//!
//! Solves `maximize t` subject to `A_b + i K_b(x) - t I >= 0` for every block
//! `b`, where each `K_b` is antisymmetric and affine in `x`. The blocks are
//! handled through their real symmetric embeddings and a log-barrier
//! (path-following Newton) method. Every iterate is strictly feasible, so
//! the returned `t` is always attained, and the barrier gives an upper bound
//! `t + m / sigma` on the optimum once centered.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::matalg;

/// Iteration budget and stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Cap on Newton steps across all barrier stages.
    pub max_iters: usize,
    /// Stop once the duality gap bound drops below this.
    pub gap_tol: f64,
    /// Kept for reproducible configuration files; the method is deterministic
    /// and does not draw random numbers.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            gap_tol: 1e-9,
            seed: 0,
        }
    }
}

/// Antisymmetric generator given by its upper-triangle entries `(r, c, v)`,
/// meaning `K[r][c] += v` and `K[c][r] -= v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub var: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

/// `a + i (k0 + sum_v x_v K_v) - t I >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiBlock {
    pub a: DMatrix<f64>,
    pub k0: DMatrix<f64>,
    pub terms: Vec<Term>,
}

impl LmiBlock {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn k_at(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut k = self.k0.clone();
        for t in &self.terms {
            let xv = x[t.var];
            if xv != 0.0 {
                for &(r, c, v) in &t.entries {
                    k[(r, c)] += xv * v;
                    k[(c, r)] -= xv * v;
                }
            }
        }
        k
    }

    /// Smallest eigenvalue of the Hermitian block at `x`.
    pub fn min_eig(&self, x: &DVector<f64>) -> f64 {
        matalg::min_eig_hermitian(&self.a, &self.k_at(x))
    }

    fn realified(&self, x: &DVector<f64>, t: f64) -> DMatrix<f64> {
        let d = self.dim();
        let mut g = matalg::realify(&self.a, &self.k_at(x));
        for i in 0..2 * d {
            g[(i, i)] -= t;
        }
        g
    }

    /// Nonzeros `(p, q, w)` of the realified generator of each term, both
    /// triangles listed.
    fn realified_terms(&self) -> Vec<SparseTerm> {
        let d = self.dim();
        self.terms
            .iter()
            .map(|t| {
                let mut e = Vec::with_capacity(4 * t.entries.len());
                for &(r, c, v) in &t.entries {
                    e.push((r, d + c, -v));
                    e.push((d + c, r, -v));
                    e.push((d + r, c, v));
                    e.push((c, d + r, v));
                }
                (t.var, e)
            })
            .collect()
    }
}

/// Variable index and realified nonzeros.
type SparseTerm = (usize, Vec<(usize, usize, f64)>);

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub nvars: usize,
    pub blocks: Vec<LmiBlock>,
}

impl Problem {
    /// Minimum eigenvalue over all blocks at `x`.
    pub fn margin(&self, x: &DVector<f64>) -> f64 {
        self.blocks
            .iter()
            .filter(|b| b.dim() > 0)
            .map(|b| b.min_eig(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Barrier complexity: total realified dimension.
    fn theta(&self) -> f64 {
        self.blocks.iter().map(|b| 2 * b.dim()).sum::<usize>() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: DVector<f64>,
    /// Attained margin at `x`.
    pub margin: f64,
    /// Upper bound on the optimal margin; meaningful when `converged`.
    pub upper: f64,
    pub converged: bool,
    pub iterations: usize,
}

struct Prepared<'a> {
    problem: &'a Problem,
    generators: Vec<Vec<SparseTerm>>,
}

impl Prepared<'_> {
    /// Barrier objective `-sigma t - sum log det G_b`, or `None` outside the
    /// domain.
    fn value(&self, x: &DVector<f64>, t: f64, sigma: f64) -> Option<f64> {
        let mut f = -sigma * t;
        for b in &self.problem.blocks {
            if b.dim() == 0 {
                continue;
            }
            let chol = b.realified(x, t).cholesky()?;
            let l = chol.l_dirty();
            f -= 2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>();
        }
        f.is_finite().then_some(f)
    }

    /// Gradient and Hessian in `z = (x, t)`.
    fn derivatives(&self, x: &DVector<f64>, t: f64, sigma: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let n = self.problem.nvars;
        let mut g = DVector::zeros(n + 1);
        let mut h = DMatrix::zeros(n + 1, n + 1);
        g[n] = -sigma;
        for (b, gens) in self.problem.blocks.iter().zip(&self.generators) {
            if b.dim() == 0 {
                continue;
            }
            let inv = b.realified(x, t).cholesky()?.inverse();
            let inv2 = &inv * &inv;
            g[n] += inv.trace();
            h[(n, n)] += inv2.trace();
            let mut w: Vec<DMatrix<f64>> = Vec::with_capacity(gens.len());
            for (var, e) in gens {
                let mut tr = 0.0;
                let mut tr2 = 0.0;
                let dd = inv.nrows();
                let mut wu = DMatrix::zeros(dd, dd);
                for &(p, q, wt) in e {
                    tr += wt * inv[(q, p)];
                    tr2 += wt * inv2[(q, p)];
                    // W_u += wt * H[:, p] H[q, :]
                    wu.ger(wt, &inv.column(p), &inv.column(q), 1.0);
                }
                g[*var] -= tr;
                h[(*var, n)] -= tr2;
                h[(n, *var)] -= tr2;
                w.push(wu);
            }
            for (i, (u, _)) in gens.iter().enumerate() {
                for (v, ev) in gens.iter() {
                    let s: f64 = ev.iter().map(|&(p, q, wt)| wt * w[i][(q, p)]).sum();
                    h[(*u, *v)] += s;
                }
            }
        }
        Some((g, h))
    }
}

fn newton_direction(g: &DVector<f64>, h: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = h.nrows();
    let scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0_f64, f64::max).max(1e-300);
    let mut reg = 0.0;
    for _ in 0..8 {
        let mut hr = h.clone();
        for i in 0..n {
            hr[(i, i)] += reg;
        }
        if let Some(ch) = hr.cholesky() {
            let d = -ch.solve(g);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
    }
    None
}

const MAX_STAGE_STEPS: usize = 200;

/// Maximizes the common margin starting from `x0`.
pub fn maximize_margin(problem: &Problem, x0: DVector<f64>, opts: &SolverOptions) -> Solution {
    let prep = Prepared {
        problem,
        generators: problem.blocks.iter().map(LmiBlock::realified_terms).collect(),
    };
    let n = problem.nvars;
    let theta = problem.theta();
    let mut x = x0;
    let start = problem.margin(&x);
    if theta == 0.0 || !start.is_finite() {
        return Solution {
            margin: start,
            upper: start,
            x,
            converged: true,
            iterations: 0,
        };
    }
    let mut t = start - 1.0;
    let mut sigma = 1.0;
    let mut iterations = 0;
    let mut converged = false;

    'outer: loop {
        let mut stage_steps = 0;
        loop {
            if iterations >= opts.max_iters {
                break 'outer;
            }
            let Some((g, h)) = prep.derivatives(&x, t, sigma) else {
                break 'outer;
            };
            let Some(dz) = newton_direction(&g, &h) else {
                break 'outer;
            };
            let decrement = -g.dot(&dz);
            let Some(f0) = prep.value(&x, t, sigma) else {
                break 'outer;
            };
            // Below this the Armijo test only sees rounding noise in `f`.
            if decrement <= 1e-10 * f0.abs().max(1.0) || stage_steps >= MAX_STAGE_STEPS {
                break;
            }
            stage_steps += 1;
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-16 {
                let xn = &x + dz.rows(0, n) * alpha;
                let tn = t + alpha * dz[n];
                if let Some(f) = prep.value(&xn, tn, sigma) {
                    if f <= f0 - 0.25 * alpha * decrement {
                        x = xn;
                        t = tn;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            iterations += 1;
            if !moved {
                // No progress possible at this precision; treat as centered.
                break;
            }
        }
        if theta / sigma < opts.gap_tol {
            converged = true;
            break;
        }
        sigma *= 10.0;
    }

    let margin = problem.margin(&x);
    Solution {
        upper: t.max(margin) + theta / sigma,
        margin,
        x,
        converged,
        iterations,
    }
}
