//! Calibration of raw distances into the 0–100 meaningfulness score.
//!
//! The meaningful set is split into `S¹` (reference) and `S²`. Adding `m`
//! uniform noise attributes to `S²` moves it from the meaningful subspace
//! towards the noise subspace; the distance of `S² ∪ Ñ_m` from `S¹` traced
//! over `m` is the interpolation curve. A discovered set is scored by the
//! amount of noise `g*` at which the curve reaches its own distance from
//! `S¹`.

mod curve;
mod isotonic;
mod noise;
mod score;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{split_meaningful, AttributeMatrix, ZeroPolicy};
use crate::solver::{distance, DistanceKind, SolverOptions};

pub(crate) use curve::validate_grid;
pub use curve::{fit_invert, interpolation_curve, noise_seed, InterpolationCurve, Inversion};
pub use isotonic::{anchored_isotonic_fit, isotonic_fit};
pub use noise::gen_noise;
pub use score::{combined_score, gamma_score};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 2017;
pub const DEFAULT_TRIALS: usize = 5;
pub const DEFAULT_SPLIT_RATIO: f64 = 0.5;
/// Fraction of non-converged hull solves above which a report is degraded.
pub const DEGRADED_FRACTION: f64 = 0.10;

const SPLIT_SEED_OFFSET: u64 = 0;
const NOISE_SEED_OFFSET: u64 = 1;

/// `{0, 1, 2, 4, …}` up to `m_max = max(256, 4·|S²|)`; `m_max` itself is
/// appended when it is not a power of two.
pub fn default_grid(s2_size: usize) -> Vec<usize> {
    let m_max = 256.max(4 * s2_size);
    let mut grid = vec![0];
    let mut m = 1;
    while m <= m_max {
        grid.push(m);
        m *= 2;
    }
    if *grid.last().unwrap() != m_max {
        grid.push(m_max);
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub split_ratio: f64,
    /// Master seed; the split and noise seeds are fixed offsets from it.
    pub seed: u64,
    /// Noise counts; `None` selects [`default_grid`].
    pub grid: Option<Vec<usize>>,
    pub trials: usize,
    pub solver: SolverOptions,
    /// Recorded for provenance; matrices arrive already binarized.
    pub zero_policy: ZeroPolicy,
    /// Also measure the discovered set against the whole meaningful set.
    pub full_distance: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            split_ratio: DEFAULT_SPLIT_RATIO,
            seed: DEFAULT_SEED,
            grid: None,
            trials: DEFAULT_TRIALS,
            solver: SolverOptions::default(),
            zero_policy: ZeroPolicy::default(),
            full_distance: false,
        }
    }
}

impl MetricConfig {
    pub fn split_seed(&self) -> u64 {
        self.seed.wrapping_add(SPLIT_SEED_OFFSET)
    }

    pub fn noise_seed(&self) -> u64 {
        self.seed.wrapping_add(NOISE_SEED_OFFSET)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub g_star: f64,
    pub gamma: f64,
    pub saturated: bool,
    /// Distance of the discovered set from `S¹`.
    pub delta_d: f64,
    pub curve: InterpolationCurve,
}

/// Inverts a curve at `delta_d` and converts `g*` into a score.
pub fn calibrate(curve: InterpolationCurve, delta_d: f64, s2_size: usize) -> Result<CalibrationResult> {
    let inv = fit_invert(&curve, delta_d);
    let gamma = gamma_score(inv.g_star, s2_size)?;
    Ok(CalibrationResult { g_star: inv.g_star, gamma, saturated: inv.saturated, delta_d, curve })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curves {
    pub cvx: InterpolationCurve,
    pub jp: InterpolationCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEcho {
    pub ratio: f64,
    pub seed: u64,
    pub s1_columns: Vec<usize>,
    pub s2_columns: Vec<usize>,
}

/// Everything needed to rerun an evaluation bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub split_ratio: f64,
    pub seed: u64,
    pub split_seed: u64,
    pub noise_seed: u64,
    pub grid: Vec<usize>,
    pub trials: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub zero_policy: ZeroPolicy,
    pub distance_kinds: Vec<DistanceKind>,
    pub full_distance: bool,
    pub n_images: usize,
    pub n_meaningful: usize,
    pub n_discovered: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullDistance {
    pub cvx: f64,
    pub jp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeaningfulnessReport {
    pub format_version: u32,
    pub gamma_cvx: f64,
    pub gamma_jp: f64,
    pub gamma_tilde: f64,
    pub g_star_cvx: f64,
    pub g_star_jp: f64,
    pub saturated_cvx: bool,
    pub saturated_jp: bool,
    pub delta_d_cvx: f64,
    pub delta_d_jp: f64,
    /// More than [`DEGRADED_FRACTION`] of the hull solves did not converge.
    pub degraded: bool,
    pub nonconverged_cvx: usize,
    pub solves_cvx: usize,
    /// `g*` is interpolated between grid points rather than rounded.
    pub g_star_mode: String,
    pub curves: Curves,
    /// Distances of the discovered set from the whole meaningful set.
    pub delta_full: Option<FullDistance>,
    pub split: SplitEcho,
    pub zero_policy: ZeroPolicy,
    pub config: ConfigEcho,
}

impl MeaningfulnessReport {
    pub fn calibration(&self, kind: DistanceKind) -> Option<CalibrationResult> {
        let (g_star, gamma, saturated, delta_d, curve) = match kind {
            DistanceKind::Cvx => (self.g_star_cvx, self.gamma_cvx, self.saturated_cvx, self.delta_d_cvx, &self.curves.cvx),
            DistanceKind::Jp => (self.g_star_jp, self.gamma_jp, self.saturated_jp, self.delta_d_jp, &self.curves.jp),
            DistanceKind::Lsq => return None,
        };
        Some(CalibrationResult { g_star, gamma, saturated, delta_d, curve: curve.clone() })
    }

    pub fn any_saturated(&self) -> bool {
        self.saturated_cvx || self.saturated_jp
    }
}

/// Scores the discovered set `d` against the meaningful set `s`.
pub fn evaluate_meaningfulness(
    s: &AttributeMatrix,
    d: &AttributeMatrix,
    config: &MetricConfig,
) -> Result<MeaningfulnessReport> {
    s.ensure_same_images(d)?;
    config.solver.validate()?;
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let split = split_meaningful(s, config.split_ratio, config.split_seed())?;
    let s2_size = split.s2.n_attrs();
    let grid = config.grid.clone().unwrap_or_else(|| default_grid(s2_size));
    let opts = &config.solver;

    let calibrate_kind = |kind| -> Result<(CalibrationResult, usize, usize)> {
        let curve = interpolation_curve(&split, &grid, config.trials, kind, config.noise_seed(), opts)?;
        let dd = distance(kind, &split.s1, d, opts)?;
        let (nc, solves) = (curve.nonconverged + dd.nonconverged, curve.solves + dd.per_column.len());
        Ok((calibrate(curve, dd.value, s2_size)?, nc, solves))
    };
    let (cvx, jp) = rayon::join(|| calibrate_kind(DistanceKind::Cvx), || calibrate_kind(DistanceKind::Jp));
    let (cvx, nonconverged_cvx, solves_cvx) = cvx?;
    let (jp, _, _) = jp?;
    let gamma_tilde = combined_score(cvx.gamma, jp.gamma)?;

    let delta_full = if config.full_distance {
        Some(FullDistance {
            cvx: distance(DistanceKind::Cvx, s, d, opts)?.value,
            jp: distance(DistanceKind::Jp, s, d, opts)?.value,
        })
    } else {
        None
    };

    Ok(MeaningfulnessReport {
        format_version: FORMAT_VERSION,
        gamma_cvx: cvx.gamma,
        gamma_jp: jp.gamma,
        gamma_tilde,
        g_star_cvx: cvx.g_star,
        g_star_jp: jp.g_star,
        saturated_cvx: cvx.saturated,
        saturated_jp: jp.saturated,
        delta_d_cvx: cvx.delta_d,
        delta_d_jp: jp.delta_d,
        degraded: nonconverged_cvx as f64 > DEGRADED_FRACTION * solves_cvx as f64,
        nonconverged_cvx,
        solves_cvx,
        g_star_mode: "interpolated".into(),
        curves: Curves { cvx: cvx.curve, jp: jp.curve },
        delta_full,
        split: SplitEcho {
            ratio: split.ratio,
            seed: split.seed,
            s1_columns: split.s1_columns.clone(),
            s2_columns: split.s2_columns.clone(),
        },
        zero_policy: config.zero_policy,
        config: ConfigEcho {
            split_ratio: config.split_ratio,
            seed: config.seed,
            split_seed: config.split_seed(),
            noise_seed: config.noise_seed(),
            grid,
            trials: config.trials,
            tol: opts.tol,
            max_iter: opts.max_iter,
            zero_policy: config.zero_policy,
            distance_kinds: vec![DistanceKind::Cvx, DistanceKind::Jp],
            full_distance: config.full_distance,
            n_images: s.n_images(),
            n_meaningful: s.n_attrs(),
            n_discovered: d.n_attrs(),
        },
    })
}
