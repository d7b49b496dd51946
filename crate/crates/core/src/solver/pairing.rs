use rayon::prelude::*;

use super::correlation::agreements;
use super::{DistanceKind, DistanceValue};
use crate::error::Result;
use crate::matrix::AttributeMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    /// Column of the meaningful set.
    pub meaningful: usize,
    /// Column of the discovered set.
    pub discovered: usize,
    /// Images on which the two attributes agree.
    pub agreements: usize,
    pub correlation: f64,
}

/// Greedy one-to-one matching between meaningful and discovered attributes,
/// in the order the pairs were selected.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSet {
    pub pairs: Vec<Pair>,
    n_meaningful: usize,
    n_discovered: usize,
    match_of_discovered: Vec<Option<usize>>,
}

impl PairSet {
    pub fn n_meaningful(&self) -> usize {
        self.n_meaningful
    }

    pub fn n_discovered(&self) -> usize {
        self.n_discovered
    }

    /// Index into `pairs` of the pair containing discovered column `k`.
    pub fn pair_of_discovered(&self, k: usize) -> Option<&Pair> {
        self.match_of_discovered[k].map(|p| &self.pairs[p])
    }

    /// Entry of the 0/1 reconstruction matrix (J×K).
    pub fn r_star(&self, j: usize, k: usize) -> u8 {
        u8::from(self.pair_of_discovered(k).is_some_and(|p| p.meaningful == j))
    }

    /// Dense row-major copy of the reconstruction matrix.
    pub fn r_star_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.n_meaningful)
            .map(|j| (0..self.n_discovered).map(|k| self.r_star(j, k)).collect())
            .collect()
    }
}

/// Agreement counts, indexed `[k][j]`.
fn agreement_table(s: &AttributeMatrix, d: &AttributeMatrix) -> Vec<Vec<usize>> {
    (0..d.n_attrs())
        .into_par_iter()
        .map(|k| {
            let z = d.column(k);
            s.columns().map(|h| agreements(z, h)).collect()
        })
        .collect()
}

/// Repeatedly takes the most-agreeing pair whose meaningful and discovered
/// columns are both still free, until `min(J, K)` pairs are chosen. Ties go
/// to the lexicographically smallest `(j, k)`.
pub fn greedy_pair(s: &AttributeMatrix, d: &AttributeMatrix) -> Result<PairSet> {
    s.ensure_same_images(d)?;
    let (j_count, k_count) = (s.n_attrs(), d.n_attrs());
    let n = s.n_images();
    let table = agreement_table(s, d);

    // Scanning candidates in (agreement desc, j asc, k asc) order and skipping
    // used columns selects exactly the pair the greedy step would pick next.
    let mut candidates: Vec<(usize, usize, usize)> = Vec::with_capacity(j_count * k_count);
    for (k, row) in table.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            candidates.push((a, j, k));
        }
    }
    candidates.sort_unstable_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let target = j_count.min(k_count);
    let mut used_j = vec![false; j_count];
    let mut match_of_discovered = vec![None; k_count];
    let mut pairs = Vec::with_capacity(target);
    for (a, j, k) in candidates {
        if pairs.len() == target {
            break;
        }
        if used_j[j] || match_of_discovered[k].is_some() {
            continue;
        }
        used_j[j] = true;
        match_of_discovered[k] = Some(pairs.len());
        pairs.push(Pair {
            meaningful: j,
            discovered: k,
            agreements: a,
            correlation: a as f64 / n as f64,
        });
    }
    Ok(PairSet { pairs, n_meaningful: j_count, n_discovered: k_count, match_of_discovered })
}

/// `(1/K) ‖A R* − B‖²_F` with `R*` from [`greedy_pair`].
///
/// A matched column contributes `‖h_j − z_k‖² = 4·(N − agreements)`; an
/// unmatched discovered column has an all-zero `R*` column and contributes
/// `‖z_k‖² = N`.
pub fn dist_jp(s: &AttributeMatrix, d: &AttributeMatrix) -> Result<DistanceValue> {
    let pairs = greedy_pair(s, d)?;
    let n = s.n_images();
    let per_column = (0..d.n_attrs())
        .map(|k| match pairs.pair_of_discovered(k) {
            Some(p) => (4 * (n - p.agreements)) as f64,
            None => n as f64,
        })
        .collect();
    Ok(DistanceValue::from_columns(DistanceKind::Jp, per_column, 0))
}
