use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::isotonic::anchored_isotonic_fit;
use super::noise::gen_noise;
use crate::error::{Error, Result};
use crate::matrix::MeaningfulSplit;
use crate::rng::derive_seed;
use crate::solver::{distance, DistanceKind, SolverOptions};

/// Distance of `S² ∪ Ñ_m` from `S¹` as a function of the number `m` of
/// added noise attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCurve {
    pub distance_kind: DistanceKind,
    pub grid: Vec<usize>,
    pub mean_delta: Vec<f64>,
    /// Nondecreasing fit of `mean_delta` with the noise-free `m = 0` value
    /// held fixed.
    pub isotonic_delta: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Hull solves that stopped at `max_iter` (always zero for `jp`).
    pub nonconverged: usize,
    /// Total number of per-column solves behind the curve.
    pub solves: usize,
}

pub(crate) fn validate_grid(grid: &[usize]) -> Result<()> {
    if grid.first() != Some(&0) {
        return Err(Error::InvalidParameter("noise grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("noise grid must be strictly ascending".into()));
    }
    Ok(())
}

/// Seed of the noise block appended for grid value `m` in trial `t`.
/// Independent of the distance kind, so every kind sees the same sets.
pub fn noise_seed(seed: u64, m: usize, trial: usize) -> u64 {
    derive_seed(seed, &[m as u64, trial as u64])
}

pub fn interpolation_curve(
    split: &MeaningfulSplit,
    grid: &[usize],
    trials: usize,
    kind: DistanceKind,
    seed: u64,
    opts: &SolverOptions,
) -> Result<InterpolationCurve> {
    validate_grid(grid)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    opts.validate()?;
    let n = split.s2.n_images();

    // m = 0 has no randomness, so it is evaluated once.
    let tasks: Vec<(usize, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(gi, &m)| {
            let reps = if m == 0 { 1 } else { trials };
            (0..reps).map(move |t| (gi, t))
        })
        .collect();

    let results = tasks
        .par_iter()
        .map(|&(gi, t)| {
            let m = grid[gi];
            let noise = gen_noise(n, m, noise_seed(seed, m, t));
            let tilde = split.s2.append(noise.as_ref())?;
            let d = distance(kind, &split.s1, &tilde, opts)?;
            Ok((d.value, d.nonconverged, d.per_column.len()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sums = vec![0.0; grid.len()];
    let mut counts = vec![0usize; grid.len()];
    let mut nonconverged = 0;
    let mut solves = 0;
    for (&(gi, _), &(value, nc, cols)) in tasks.iter().zip(&results) {
        sums[gi] += value;
        counts[gi] += 1;
        nonconverged += nc;
        solves += cols;
    }
    let mean_delta: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let isotonic_delta = anchored_isotonic_fit(&mean_delta);
    Ok(InterpolationCurve {
        distance_kind: kind,
        grid: grid.to_vec(),
        mean_delta,
        isotonic_delta,
        trials,
        seed,
        nonconverged,
        solves,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub g_star: f64,
    /// `delta_d` lies beyond the last curve value; `g_star` is clamped.
    pub saturated: bool,
}

/// Smallest `m` at which the isotonic curve reaches `delta_d`, linearly
/// interpolated between grid points and clamped to the grid.
pub fn fit_invert(curve: &InterpolationCurve, delta_d: f64) -> Inversion {
    let y = &curve.isotonic_delta;
    let x = &curve.grid;
    let last = y.len() - 1;
    if delta_d <= y[0] {
        return Inversion { g_star: x[0] as f64, saturated: false };
    }
    if delta_d > y[last] {
        return Inversion { g_star: x[last] as f64, saturated: true };
    }
    // y[i-1] < delta_d <= y[i] for the first such i.
    let i = y.partition_point(|&v| v < delta_d);
    let (x0, x1) = (x[i - 1] as f64, x[i] as f64);
    let (y0, y1) = (y[i - 1], y[i]);
    let g_star = x0 + (delta_d - y0) / (y1 - y0) * (x1 - x0);
    Inversion { g_star, saturated: false }
}
