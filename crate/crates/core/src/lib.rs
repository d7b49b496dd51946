//! Attribute meaningfulness metric.
//!
//! Scores a set of automatically discovered binary attributes by how close
//! it lies to a subspace spanned by meaningful (human-labelled) attributes,
//! calibrated against sets obtained by progressively replacing meaningful
//! attributes with noise.

pub mod calibrate;
pub mod error;
pub mod io;
pub mod matrix;
pub mod rng;
pub mod solver;
pub mod stats;
pub mod sweep;
pub mod synth;

pub use calibrate::{evaluate_meaningfulness, MeaningfulnessReport, MetricConfig};
pub use error::{Error, Result};
pub use matrix::{binarize_scores, split_meaningful, AttributeMatrix, MeaningfulSplit, ScoreMatrix, ZeroPolicy};
pub use solver::{distance, DistanceKind, DistanceValue, SolverOptions};
