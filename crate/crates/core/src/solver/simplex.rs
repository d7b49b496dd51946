//! Least squares over the probability simplex, `min ‖A r − z‖²` subject to
//! `r ≥ 0, Σ r = 1`, solved by pairwise Frank–Wolfe.
//!
//! The objective in coefficient space is `rᵀGr − 2cᵀr + zᵀz` with `G = AᵀA`
//! and `c = Aᵀz`; for ±1 attributes both are integer valued. Each step moves
//! mass from the worst vertex in the support (away vertex) to the best vertex
//! overall (Frank–Wolfe vertex) with an exact line search, so iterates stay
//! on the simplex and the method converges linearly on this polytope.

use rayon::prelude::*;

use super::correlation::agreements;
use super::{DistanceKind, DistanceValue, SolverOptions};
use crate::error::{Error, Result};
use crate::matrix::AttributeMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    pub coefficients: Vec<f64>,
    /// `‖A r − z‖²` at the returned coefficients.
    pub residual_sq: f64,
    pub iterations: usize,
    /// Last Frank–Wolfe duality gap; an upper bound on suboptimality.
    pub gap: f64,
    pub converged: bool,
}

/// Hull solver bound to one meaningful set; reuses the Gram matrix across
/// columns.
#[derive(Debug, Clone)]
pub struct HullSolver<'a> {
    s: &'a AttributeMatrix,
    gram: Vec<f64>,
}

impl<'a> HullSolver<'a> {
    pub fn new(s: &'a AttributeMatrix) -> Self {
        let j = s.n_attrs();
        let n = s.n_images() as f64;
        let mut gram = vec![0.0; j * j];
        for a in 0..j {
            gram[a * j + a] = n;
            for b in (a + 1)..j {
                let agree = agreements(s.column(a), s.column(b)) as f64;
                let dot = 2.0 * agree - n;
                gram[a * j + b] = dot;
                gram[b * j + a] = dot;
            }
        }
        Self { s, gram }
    }

    pub fn solve(&self, z: &[i8], opts: &SolverOptions) -> Result<SimplexSolution> {
        opts.validate()?;
        let s = self.s;
        if z.len() != s.n_images() {
            return Err(Error::LengthMismatch { left: s.n_images(), right: z.len() });
        }
        let j = s.n_attrs();
        let n = s.n_images() as f64;
        let g = &self.gram;
        let c: Vec<f64> = s.columns().map(|h| 2.0 * agreements(z, h) as f64 - n).collect();

        // Start at the vertex with the smallest objective 2N − 2c_j.
        let start = argmax(&c);
        let mut r = vec![0.0; j];
        r[start] = 1.0;
        // gr = G r
        let mut gr: Vec<f64> = (0..j).map(|i| g[i * j + start]).collect();
        let mut grad = vec![0.0; j];

        let mut iterations = 0;
        let mut gap;
        let mut converged = false;
        loop {
            for i in 0..j {
                grad[i] = 2.0 * (gr[i] - c[i]);
            }
            let fw = argmin(&grad);
            let along: f64 = r.iter().zip(&grad).map(|(ri, gi)| ri * gi).sum();
            gap = along - grad[fw];
            if gap <= opts.tol {
                converged = true;
                break;
            }
            if iterations == opts.max_iter {
                break;
            }
            iterations += 1;

            // Away vertex: largest gradient among supported coordinates.
            let away = (0..j)
                .filter(|&i| r[i] > 0.0)
                .fold(None::<usize>, |best, i| match best {
                    Some(b) if grad[b] >= grad[i] => Some(b),
                    _ => Some(i),
                })
                .expect("support is never empty");
            if away == fw {
                // The best vertex is also the worst supported one: the gap
                // is then at most rounding noise.
                break;
            }
            let max_step = r[away];
            // f(r + t(e_fw − e_away)) has slope grad_fw − grad_away and
            // curvature 2‖a_fw − a_away‖² at t = 0.
            let slope = grad[fw] - grad[away];
            let curv = 2.0 * (g[fw * j + fw] - 2.0 * g[fw * j + away] + g[away * j + away]);
            let step = if curv > 0.0 { (-slope / curv).min(max_step) } else { max_step };
            if step <= 0.0 {
                break;
            }
            if step >= max_step {
                r[fw] += max_step;
                r[away] = 0.0;
            } else {
                r[fw] += step;
                r[away] -= step;
            }
            for i in 0..j {
                gr[i] += step * (g[i * j + fw] - g[i * j + away]);
            }
        }

        let total: f64 = r.iter().sum();
        for ri in &mut r {
            *ri /= total;
        }
        let residual_sq = residual(s, &r, z);
        Ok(SimplexSolution { coefficients: r, residual_sq, iterations, gap, converged })
    }
}

fn residual(s: &AttributeMatrix, r: &[f64], z: &[i8]) -> f64 {
    let mut fitted = vec![0.0; z.len()];
    for (col, &w) in s.columns().zip(r) {
        if w != 0.0 {
            for (f, &v) in fitted.iter_mut().zip(col) {
                *f += w * f64::from(v);
            }
        }
    }
    fitted.iter().zip(z).map(|(f, &v)| (f - f64::from(v)).powi(2)).sum()
}

fn argmax(v: &[f64]) -> usize {
    (1..v.len()).fold(0, |best, i| if v[i] > v[best] { i } else { best })
}

fn argmin(v: &[f64]) -> usize {
    (1..v.len()).fold(0, |best, i| if v[i] < v[best] { i } else { best })
}

/// Squared distance from `z` to the convex hull of the columns of `s`.
pub fn simplex_lsq(
    s: &AttributeMatrix,
    z: &[i8],
    tol: f64,
    max_iter: usize,
) -> Result<SimplexSolution> {
    HullSolver::new(s).solve(z, &SolverOptions { tol, max_iter })
}

/// Average squared distance of the discovered columns to the convex hull of
/// the meaningful set.
pub fn dist_cvx(s: &AttributeMatrix, d: &AttributeMatrix, opts: &SolverOptions) -> Result<DistanceValue> {
    s.ensure_same_images(d)?;
    opts.validate()?;
    let solver = HullSolver::new(s);
    let sols = (0..d.n_attrs())
        .into_par_iter()
        .map(|k| solver.solve(d.column(k), opts))
        .collect::<Result<Vec<_>>>()?;
    let nonconverged = sols.iter().filter(|s| !s.converged).count();
    let per_column = sols.into_iter().map(|s| s.residual_sq).collect();
    Ok(DistanceValue::from_columns(DistanceKind::Cvx, per_column, nonconverged))
}
