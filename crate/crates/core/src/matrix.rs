//! Binary attribute matrices.
//!
//! An attribute labels each of N images with -1 or +1. A set of K attributes
//! is an N×K matrix stored column-major, so a column is a contiguous slice.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeMatrix {
    n_images: usize,
    n_attrs: usize,
    data: Vec<i8>,
    names: Option<Vec<String>>,
}

impl AttributeMatrix {
    /// Validates a row-major integer matrix (rows are images).
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let n_images = rows.len();
        let n_attrs = rows.first().map_or(0, |r| r.as_ref().len());
        for (i, r) in rows.iter().enumerate() {
            let found = r.as_ref().len();
            if found != n_attrs {
                return Err(Error::RaggedRows { row: i, expected: n_attrs, found });
            }
        }
        if n_images == 0 || n_attrs == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut data = vec![0i8; n_images * n_attrs];
        for (i, r) in rows.iter().enumerate() {
            for (k, &v) in r.as_ref().iter().enumerate() {
                data[k * n_images + i] = to_sign(v).ok_or(Error::NonBinaryEntry {
                    row: i,
                    col: k,
                    value: v,
                })?;
            }
        }
        Ok(Self { n_images, n_attrs, data, names: None })
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns<C: AsRef<[i8]>>(columns: &[C]) -> Result<Self> {
        let n_attrs = columns.len();
        let n_images = columns.first().map_or(0, |c| c.as_ref().len());
        if n_images == 0 || n_attrs == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut data = Vec::with_capacity(n_images * n_attrs);
        for (k, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != n_images {
                return Err(Error::LengthMismatch { left: n_images, right: c.len() });
            }
            for (i, &v) in c.iter().enumerate() {
                if v != 1 && v != -1 {
                    return Err(Error::NonBinaryEntry { row: i, col: k, value: v.into() });
                }
            }
            data.extend_from_slice(c);
        }
        Ok(Self { n_images, n_attrs, data, names: None })
    }

    /// Takes ownership of column-major data that is already known to be ±1.
    pub(crate) fn from_column_major_unchecked(n_images: usize, n_attrs: usize, data: Vec<i8>) -> Self {
        debug_assert_eq!(data.len(), n_images * n_attrs);
        debug_assert!(data.iter().all(|&v| v == 1 || v == -1));
        Self { n_images, n_attrs, data, names: None }
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_attrs {
            return Err(Error::InvalidParameter(format!(
                "{} names for {} attributes",
                names.len(),
                self.n_attrs
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn n_images(&self) -> usize {
        self.n_images
    }

    pub fn n_attrs(&self) -> usize {
        self.n_attrs
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.data[col * self.n_images + row]
    }

    pub fn column(&self, k: usize) -> &[i8] {
        &self.data[k * self.n_images..(k + 1) * self.n_images]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[i8]> + '_ {
        self.data.chunks_exact(self.n_images)
    }

    /// Row-major copy, one `Vec` per image.
    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.n_images)
            .map(|i| (0..self.n_attrs).map(|k| self.get(i, k).into()).collect())
            .collect()
    }

    /// New matrix holding the given columns in order. Names follow.
    pub fn select_columns(&self, idx: &[usize]) -> Result<Self> {
        if idx.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let mut data = Vec::with_capacity(idx.len() * self.n_images);
        for &k in idx {
            if k >= self.n_attrs {
                return Err(Error::InvalidParameter(format!(
                    "column {k} out of range for {} attributes",
                    self.n_attrs
                )));
            }
            data.extend_from_slice(self.column(k));
        }
        let names = self
            .names
            .as_ref()
            .map(|n| idx.iter().map(|&k| n[k].clone()).collect());
        Ok(Self { n_images: self.n_images, n_attrs: idx.len(), data, names })
    }

    /// Applies the same image permutation to every column: row `i` of the
    /// result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_images {
            return Err(Error::LengthMismatch { left: self.n_images, right: perm.len() });
        }
        let mut data = Vec::with_capacity(self.data.len());
        for col in self.columns() {
            data.extend(perm.iter().map(|&p| col[p]));
        }
        Ok(Self { data, names: self.names.clone(), ..*self })
    }

    /// Column concatenation `[self | other]`. Names are dropped unless both
    /// sides carry them.
    pub fn hstack(&self, other: &AttributeMatrix) -> Result<Self> {
        self.ensure_same_images(other)?;
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        let names = match (&self.names, &other.names) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        Ok(Self { n_images: self.n_images, n_attrs: self.n_attrs + other.n_attrs, data, names })
    }

    /// `[self | extra]`, or a copy of `self` when there is nothing to append.
    pub fn append(&self, extra: Option<&AttributeMatrix>) -> Result<Self> {
        match extra {
            Some(e) => self.hstack(e),
            None => Ok(self.clone()),
        }
    }

    pub fn ensure_same_images(&self, other: &AttributeMatrix) -> Result<()> {
        if self.n_images != other.n_images {
            return Err(Error::LengthMismatch { left: self.n_images, right: other.n_images });
        }
        Ok(())
    }

    pub fn to_dmatrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_iterator(
            self.n_images,
            self.n_attrs,
            self.data.iter().map(|&v| f64::from(v)),
        )
    }
}

fn to_sign(v: i64) -> Option<i8> {
    match v {
        1 => Some(1),
        -1 => Some(-1),
        _ => None,
    }
}

/// Real-valued classifier outputs, one column per attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    n_images: usize,
    n_attrs: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_images = rows.len();
        let n_attrs = rows.first().map_or(0, |r| r.as_ref().len());
        for (i, r) in rows.iter().enumerate() {
            let found = r.as_ref().len();
            if found != n_attrs {
                return Err(Error::RaggedRows { row: i, expected: n_attrs, found });
            }
        }
        if n_images == 0 || n_attrs == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut data = vec![0.0; n_images * n_attrs];
        for (i, r) in rows.iter().enumerate() {
            for (k, &v) in r.as_ref().iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteScore { row: i, col: k });
                }
                data[k * n_images + i] = v;
            }
        }
        Ok(Self { n_images, n_attrs, data })
    }

    pub fn n_images(&self) -> usize {
        self.n_images
    }

    pub fn n_attrs(&self) -> usize {
        self.n_attrs
    }
}

/// Sign assigned to a score that is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    #[default]
    MapToPlus,
    MapToMinus,
}

impl ZeroPolicy {
    pub fn sign(self, x: f64) -> i8 {
        if x > 0.0 {
            1
        } else if x < 0.0 {
            -1
        } else {
            match self {
                ZeroPolicy::MapToPlus => 1,
                ZeroPolicy::MapToMinus => -1,
            }
        }
    }
}

pub fn binarize_scores(scores: &ScoreMatrix, zero_policy: ZeroPolicy) -> Result<AttributeMatrix> {
    let n = scores.n_images;
    let mut data = Vec::with_capacity(scores.data.len());
    for (idx, &v) in scores.data.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteScore { row: idx % n, col: idx / n });
        }
        data.push(zero_policy.sign(v));
    }
    Ok(AttributeMatrix::from_column_major_unchecked(n, scores.n_attrs, data))
}

/// The meaningful set divided into a reference half (`s1`) and an
/// interpolation half (`s2`).
#[derive(Debug, Clone, PartialEq)]
pub struct MeaningfulSplit {
    pub s1: AttributeMatrix,
    pub s2: AttributeMatrix,
    pub seed: u64,
    pub ratio: f64,
    pub s1_columns: Vec<usize>,
    pub s2_columns: Vec<usize>,
}

const SPLIT_STREAM: u64 = 0x5_1_1_7;

pub fn split_meaningful(s: &AttributeMatrix, ratio: f64, seed: u64) -> Result<MeaningfulSplit> {
    let j = s.n_attrs();
    if j < 2 {
        return Err(Error::TooFewAttributes(j));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!("split ratio {ratio} not in (0, 1)")));
    }
    let n1 = (ratio * j as f64).round() as usize;
    if n1 == 0 || n1 == j {
        return Err(Error::DegenerateSplit { ratio, n_attrs: j });
    }
    let mut order: Vec<usize> = (0..j).collect();
    order.shuffle(&mut rng::stream(seed, &[SPLIT_STREAM]));
    let mut s1_columns = order[..n1].to_vec();
    let mut s2_columns = order[n1..].to_vec();
    s1_columns.sort_unstable();
    s2_columns.sort_unstable();
    Ok(MeaningfulSplit {
        s1: s.select_columns(&s1_columns)?,
        s2: s.select_columns(&s2_columns)?,
        seed,
        ratio,
        s1_columns,
        s2_columns,
    })
}
