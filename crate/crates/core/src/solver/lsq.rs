use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{DistanceKind, DistanceValue};
use crate::error::{Error, Result};
use crate::matrix::AttributeMatrix;

/// Unconstrained least squares against a fixed meaningful set, via a thin SVD.
/// Singular values below `σ_max · max(N, J) · ε` are treated as zero, which
/// yields the minimum-norm solution on rank-deficient sets.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    u: DMatrix<f64>,
    v_t: DMatrix<f64>,
    sigma: DVector<f64>,
    rank: usize,
}

impl LeastSquares {
    pub fn new(s: &AttributeMatrix) -> Self {
        let a = s.to_dmatrix();
        let (n, j) = a.shape();
        let svd = a.svd(true, true);
        let sigma = svd.singular_values;
        let s_max = sigma.iter().copied().fold(0.0, f64::max);
        let cutoff = s_max * n.max(j) as f64 * f64::EPSILON;
        // nalgebra does not promise sorted singular values.
        let mut keep: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > cutoff).collect();
        keep.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]).then(x.cmp(&y)));
        let u_full = svd.u.expect("u requested");
        let v_full = svd.v_t.expect("v_t requested");
        let u = u_full.select_columns(&keep);
        let v_t = v_full.select_rows(&keep);
        let sigma = DVector::from_iterator(keep.len(), keep.iter().map(|&i| sigma[i]));
        Self { u, v_t, rank: keep.len(), sigma }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn check(&self, z: &[i8]) -> Result<DVector<f64>> {
        if z.len() != self.u.nrows() {
            return Err(Error::LengthMismatch { left: self.u.nrows(), right: z.len() });
        }
        Ok(DVector::from_iterator(z.len(), z.iter().map(|&v| f64::from(v))))
    }

    /// Residuals at rounding level relative to `‖z‖²` are reported as zero.
    fn snap(&self, residual: f64) -> f64 {
        let (n, j) = (self.u.nrows(), self.v_t.ncols());
        if residual <= (n * n.max(j)) as f64 * f64::EPSILON {
            0.0
        } else {
            residual
        }
    }

    /// `min_r ‖A r − z‖²`.
    pub fn residual(&self, z: &[i8]) -> Result<f64> {
        let z = self.check(z)?;
        let proj = self.u.tr_mul(&z);
        let fitted = &self.u * proj;
        Ok(self.snap((z - fitted).norm_squared()))
    }

    /// Minimum-norm minimiser and its residual.
    pub fn solve(&self, z: &[i8]) -> Result<(Vec<f64>, f64)> {
        let zv = self.check(z)?;
        let proj = self.u.tr_mul(&zv);
        let scaled = proj.component_div(&self.sigma);
        let coeffs = self.v_t.tr_mul(&scaled);
        let residual = self.snap((zv - &self.u * proj).norm_squared());
        Ok((coeffs.iter().copied().collect(), residual))
    }
}

/// `(1/K) min_R ‖A R − B‖²_F`, one least-squares problem per discovered column.
pub fn dist_lsq(s: &AttributeMatrix, d: &AttributeMatrix) -> Result<DistanceValue> {
    s.ensure_same_images(d)?;
    let ls = LeastSquares::new(s);
    let per_column = (0..d.n_attrs())
        .into_par_iter()
        .map(|k| ls.residual(d.column(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceValue::from_columns(DistanceKind::Lsq, per_column, 0))
}
