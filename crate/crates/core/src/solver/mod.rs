//! Distances between a discovered attribute set and the meaningful subspace.
//!
//! All three distances are average per-column reconstruction errors
//! `(1/K) Σ_k min ‖A r_k − z_k‖²` and differ only in the constraint on the
//! coefficients `r_k`:
//!
//! * [`DistanceKind::Lsq`] leaves them unconstrained.
//! * [`DistanceKind::Cvx`] keeps `r_k` on the probability simplex (distance to
//!   the convex hull of the meaningful attributes).
//! * [`DistanceKind::Jp`] uses a one-to-one pairing with unit coefficients,
//!   chosen greedily by descending agreement.

mod correlation;
mod lsq;
mod pairing;
mod simplex;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::AttributeMatrix;

pub use correlation::{agreements, correlation};
pub use lsq::{dist_lsq, LeastSquares};
pub use pairing::{dist_jp, greedy_pair, Pair, PairSet};
pub use simplex::{dist_cvx, simplex_lsq, HullSolver, SimplexSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Lsq,
    Cvx,
    Jp,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 3] = [DistanceKind::Lsq, DistanceKind::Cvx, DistanceKind::Jp];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::Lsq => "lsq",
            DistanceKind::Cvx => "cvx",
            DistanceKind::Jp => "jp",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lsq" => Ok(DistanceKind::Lsq),
            "cvx" => Ok(DistanceKind::Cvx),
            "jp" => Ok(DistanceKind::Jp),
            other => Err(Error::InvalidParameter(format!("unknown distance kind {other:?}"))),
        }
    }
}

/// Stopping rule for the convex-hull solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Frank–Wolfe duality gap at which a column counts as converged.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 5000 }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceValue {
    pub kind: DistanceKind,
    /// `(1/K) · Σ per_column`.
    pub value: f64,
    pub per_column: Vec<f64>,
    /// Columns whose hull solve hit `max_iter` before reaching `tol`.
    /// Always zero for `lsq` and `jp`.
    pub nonconverged: usize,
}

impl DistanceValue {
    pub(crate) fn from_columns(kind: DistanceKind, per_column: Vec<f64>, nonconverged: usize) -> Self {
        // Sequential left-to-right sum: identical bits regardless of how the
        // per-column values were produced.
        let total: f64 = per_column.iter().sum();
        let value = total / per_column.len() as f64;
        Self { kind, value, per_column, nonconverged }
    }
}

/// Distance of `d` from the subspace represented by `s`.
pub fn distance(
    kind: DistanceKind,
    s: &AttributeMatrix,
    d: &AttributeMatrix,
    opts: &SolverOptions,
) -> Result<DistanceValue> {
    match kind {
        DistanceKind::Lsq => dist_lsq(s, d),
        DistanceKind::Cvx => dist_cvx(s, d, opts),
        DistanceKind::Jp => dist_jp(s, d),
    }
}
