//! Noise-injection sweep: distances of attribute sets from `S¹` as uniform
//! noise attributes are progressively appended to them.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrate::{gen_noise, noise_seed};
use crate::error::{Error, Result};
use crate::matrix::{AttributeMatrix, MeaningfulSplit};
use crate::rng::derive_seed;
use crate::solver::{distance, DistanceKind, SolverOptions};
use crate::stats::spearman;

pub const MEANINGFUL_BASELINE: &str = "MeaningfulAttributeSet";
pub const NOISE_BASELINE: &str = "NonMeaningfulAttributeSet";

const BASELINE_NOISE_STREAM: u64 = 0xBA5E;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub set: String,
    pub kind: DistanceKind,
    /// Mean distance per grid point.
    pub mean_delta: Vec<f64>,
}

impl SweepRow {
    /// Spearman correlation between the noise count and the distance.
    pub fn rank_correlation(&self, grid: &[usize]) -> Option<f64> {
        let x: Vec<f64> = grid.iter().map(|&m| m as f64).collect();
        spearman(&x, &self.mean_delta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, set: &str, kind: DistanceKind) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.set == set && r.kind == kind)
    }

    /// Tab-separated table, one row per (set, kind), one column per `m`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("set\tkind");
        for m in &self.grid {
            let _ = write!(out, "\tm={m}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}\t{}", row.set, row.kind);
            for v in &row.mean_delta {
                let _ = write!(out, "\t{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// The two reference rows of a sweep: `S²` itself and a pure-noise set of
/// the same size.
pub fn baselines(split: &MeaningfulSplit, seed: u64) -> Vec<(String, AttributeMatrix)> {
    let s2 = split.s2.clone();
    let noise = gen_noise(s2.n_images(), s2.n_attrs(), derive_seed(seed, &[BASELINE_NOISE_STREAM]))
        .expect("S2 is nonempty");
    vec![(MEANINGFUL_BASELINE.to_string(), s2), (NOISE_BASELINE.to_string(), noise)]
}

/// Mean over `trials` of `δ(D ∪ Ñ_m, S¹)` for each input set, kind, and `m`.
/// All rows share the same noise draws for a given `(m, trial)`.
pub fn noise_sweep(
    split: &MeaningfulSplit,
    sets: &[(String, AttributeMatrix)],
    grid: &[usize],
    trials: usize,
    kinds: &[DistanceKind],
    seed: u64,
    opts: &SolverOptions,
) -> Result<SweepResult> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("sweep grid must be nonempty and strictly ascending".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    opts.validate()?;
    for (_, d) in sets {
        split.s1.ensure_same_images(d)?;
    }
    let n = split.s1.n_images();

    let mut tasks = Vec::new();
    for (si, _) in sets.iter().enumerate() {
        for &kind in kinds {
            for (gi, &m) in grid.iter().enumerate() {
                let reps = if m == 0 { 1 } else { trials };
                for t in 0..reps {
                    tasks.push((si, kind, gi, t));
                }
            }
        }
    }
    let values = tasks
        .par_iter()
        .map(|&(si, kind, gi, t)| {
            let m = grid[gi];
            let noise = gen_noise(n, m, noise_seed(seed, m, t));
            let set = sets[si].1.append(noise.as_ref())?;
            Ok(distance(kind, &split.s1, &set, opts)?.value)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut rows = Vec::with_capacity(sets.len() * kinds.len());
    let mut it = tasks.iter().zip(values);
    for (name, _) in sets {
        for &kind in kinds {
            let mut mean_delta = Vec::with_capacity(grid.len());
            for &m in grid {
                let reps = if m == 0 { 1 } else { trials };
                let sum: f64 = it.by_ref().take(reps).map(|(_, v)| v).sum();
                mean_delta.push(sum / reps as f64);
            }
            rows.push(SweepRow { set: name.clone(), kind, mean_delta });
        }
    }
    Ok(SweepResult { grid: grid.to_vec(), trials, seed, rows })
}
