//! Attribute sets with known meaningfulness, for validating the metric.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::calibrate::gen_noise;
use crate::error::{Error, Result};
use crate::matrix::{AttributeMatrix, ZeroPolicy};
use crate::rng::{self, derive_seed};

const MEANINGFUL_STREAM: u64 = 0xA7_7E;
const PLANTED_STREAM: u64 = 0xF1_1B;
const HULL_STREAM: u64 = 0xC0_4B;
const MIXTURE_PLANTED: u64 = 1;
const MIXTURE_NOISE: u64 = 2;
const MIXTURE_SHUFFLE: u64 = 3;

pub const DEFAULT_FLIP_RATE: f64 = 0.1;

/// Shape of a synthetic meaningful set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeaningfulSpec {
    /// Dimension of the hidden image features the attributes threshold.
    pub latent_dim: usize,
    /// Each attribute is present on a fraction of images drawn uniformly
    /// from `[min_positive, max_positive]`.
    pub min_positive: f64,
    pub max_positive: f64,
}

impl Default for MeaningfulSpec {
    fn default() -> Self {
        Self { latent_dim: 8, min_positive: 0.08, max_positive: 0.35 }
    }
}

/// A stand-in for human-labelled attributes: every image gets a hidden
/// Gaussian feature vector and every attribute is a thresholded random
/// projection of it. Attributes therefore share structure (they are
/// correlated through the low-dimensional features) and are sparse, unlike
/// uniform noise.
pub fn meaningful_set(n_images: usize, n_attrs: usize, spec: &MeaningfulSpec, seed: u64) -> Result<AttributeMatrix> {
    if n_images == 0 || n_attrs == 0 {
        return Err(Error::EmptyMatrix);
    }
    if spec.latent_dim == 0 {
        return Err(Error::InvalidParameter("latent_dim must be at least 1".into()));
    }
    if !(0.0 < spec.min_positive && spec.min_positive <= spec.max_positive && spec.max_positive < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "positive rate range [{}, {}] must lie inside (0, 1)",
            spec.min_positive, spec.max_positive
        )));
    }
    let r = spec.latent_dim;
    let mut feat_rng = rng::stream(seed, &[MEANINGFUL_STREAM, 0]);
    let features: Vec<f64> = (0..n_images * r).map(|_| feat_rng.sample(StandardNormal)).collect();

    let mut data = Vec::with_capacity(n_images * n_attrs);
    for k in 0..n_attrs {
        let mut col_rng = rng::stream(seed, &[MEANINGFUL_STREAM, 1, k as u64]);
        let w: Vec<f64> = (0..r).map(|_| col_rng.sample(StandardNormal)).collect();
        let rate = col_rng.gen_range(spec.min_positive..=spec.max_positive);
        let scores: Vec<f64> = features
            .chunks_exact(r)
            .map(|x| x.iter().zip(&w).map(|(a, b)| a * b).sum())
            .collect();
        let positives = ((rate * n_images as f64).round() as usize).clamp(1, n_images);
        let mut order: Vec<usize> = (0..n_images).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let mut col = vec![-1i8; n_images];
        for &i in &order[..positives] {
            col[i] = 1;
        }
        data.extend_from_slice(&col);
    }
    Ok(AttributeMatrix::from_column_major_unchecked(n_images, n_attrs, data))
}

fn check_flip_rate(flip_rate: f64) -> Result<()> {
    if !(0.0..0.5).contains(&flip_rate) {
        return Err(Error::InvalidParameter(format!("flip_rate {flip_rate} must lie in [0, 0.5)")));
    }
    Ok(())
}

/// Like [`planted_flip_set`], also returning the source column of each output.
pub fn planted_flip_set_with_sources(
    s: &AttributeMatrix,
    k: usize,
    flip_rate: f64,
    seed: u64,
) -> Result<(AttributeMatrix, Vec<usize>)> {
    check_flip_rate(flip_rate)?;
    if k == 0 {
        return Err(Error::EmptyMatrix);
    }
    let n = s.n_images();
    let j = s.n_attrs();
    // Uniform over columns, without repeats until every column has been used.
    let mut src_rng = rng::stream(seed, &[PLANTED_STREAM]);
    let mut sources = Vec::with_capacity(k);
    while sources.len() < k {
        let take = (k - sources.len()).min(j);
        sources.extend(index::sample(&mut src_rng, j, take));
    }
    let mut data = Vec::with_capacity(n * k);
    for (c, &src) in sources.iter().enumerate() {
        let mut rng = rng::stream(seed, &[PLANTED_STREAM, c as u64]);
        data.extend(
            s.column(src)
                .iter()
                .map(|&v| if rng.gen_bool(flip_rate) { -v } else { v }),
        );
    }
    Ok((AttributeMatrix::from_column_major_unchecked(n, k, data), sources))
}

/// `k` near-meaningful attributes: copies of uniformly chosen meaningful
/// attributes with each entry negated independently with probability
/// `flip_rate`. Source columns repeat only once all of them are used.
pub fn planted_flip_set(s: &AttributeMatrix, k: usize, flip_rate: f64, seed: u64) -> Result<AttributeMatrix> {
    planted_flip_set_with_sources(s, k, flip_rate, seed).map(|(m, _)| m)
}

/// `k` attributes of the form `sign(A w)` for random simplex weights `w`
/// with `support` nonzero entries. Zero sums map to +1.
pub fn hull_combination_set(s: &AttributeMatrix, k: usize, support: usize, seed: u64) -> Result<AttributeMatrix> {
    let j = s.n_attrs();
    if support == 0 || support > j {
        return Err(Error::InvalidParameter(format!("support {support} must lie in [1, {j}]")));
    }
    if k == 0 {
        return Err(Error::EmptyMatrix);
    }
    let n = s.n_images();
    let mut data = Vec::with_capacity(n * k);
    for c in 0..k {
        let mut rng = rng::stream(seed, &[HULL_STREAM, c as u64]);
        let idx = index::sample(&mut rng, j, support).into_vec();
        let raw: Vec<f64> = (0..support).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        let mut combo = vec![0.0; n];
        for (&col, &w) in idx.iter().zip(&raw) {
            for (acc, &v) in combo.iter_mut().zip(s.column(col)) {
                *acc += w / total * f64::from(v);
            }
        }
        data.extend(combo.into_iter().map(|x| ZeroPolicy::MapToPlus.sign(x)));
    }
    Ok(AttributeMatrix::from_column_major_unchecked(n, k, data))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub meaningful_fraction: f64,
    pub k: usize,
    pub flip_rate: f64,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.meaningful_fraction) {
            return Err(Error::InvalidParameter(format!(
                "meaningful fraction {} must lie in [0, 1]",
                self.meaningful_fraction
            )));
        }
        if self.k == 0 {
            return Err(Error::EmptyMatrix);
        }
        check_flip_rate(self.flip_rate)
    }

    pub fn planted_count(&self) -> usize {
        (self.meaningful_fraction * self.k as f64).round() as usize
    }
}

/// `round(f·k)` planted attributes and `k − round(f·k)` noise attributes in
/// shuffled column order, with the realized planted fraction.
pub fn mixture_set(s: &AttributeMatrix, spec: &MixtureSpec) -> Result<(AttributeMatrix, f64)> {
    spec.validate()?;
    let planted_k = spec.planted_count();
    let noise_k = spec.k - planted_k;
    let n = s.n_images();
    let planted = if planted_k > 0 {
        Some(planted_flip_set(s, planted_k, spec.flip_rate, derive_seed(spec.seed, &[MIXTURE_PLANTED]))?)
    } else {
        None
    };
    let noise = gen_noise(n, noise_k, derive_seed(spec.seed, &[MIXTURE_NOISE]));
    let combined = match (planted, noise) {
        (Some(p), noise) => p.append(noise.as_ref())?,
        (None, Some(nz)) => nz,
        (None, None) => unreachable!("k >= 1"),
    };
    let mut order: Vec<usize> = (0..spec.k).collect();
    order.shuffle(&mut rng::stream(spec.seed, &[MIXTURE_SHUFFLE]));
    let shuffled = combined.select_columns(&order)?;
    Ok((shuffled, planted_k as f64 / spec.k as f64))
}
