//! File formats.
//!
//! Attribute matrices are plain text:
//!
//! ```text
//! # names: red furry wheel
//! 3 3
//! 1 -1 -1
//! -1 1 -1
//! 1 1 1
//! ```
//!
//! Optional `#` lines come first; a `# names:` line lists one
//! whitespace-free name per column. Then a header `N K` and `N` rows of `K`
//! values from `{-1, 1}`, one row per image. Blank lines are ignored.
//!
//! Reports are JSON ([`MeaningfulnessReport`]); run manifests are TOML
//! ([`RunManifest`]). Every write goes to a temporary file in the target
//! directory and is renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibrate::{MeaningfulnessReport, MetricConfig, DEFAULT_SEED, DEFAULT_SPLIT_RATIO, DEFAULT_TRIALS};
use crate::error::{Error, Result};
use crate::matrix::{AttributeMatrix, ZeroPolicy};
use crate::solver::{DistanceKind, SolverOptions};

const NAMES_PREFIX: &str = "names:";

pub fn parse_matrix(text: &str, path: &Path) -> Result<AttributeMatrix> {
    let perr = |line: usize, msg: String| Error::ParseError { path: path.to_path_buf(), line, msg };
    let mut names: Option<Vec<String>> = None;
    let mut header: Option<(usize, usize, usize)> = None;
    let mut rows: Vec<(usize, Vec<i64>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if header.is_some() {
                return Err(perr(lineno, "comment after header".into()));
            }
            if let Some(list) = comment.trim_start().strip_prefix(NAMES_PREFIX) {
                names = Some(list.split_whitespace().map(str::to_owned).collect());
            }
            continue;
        }
        let tokens = line
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| perr(lineno, format!("expected an integer, found {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        match header {
            None => {
                let [n, k] = tokens[..] else {
                    return Err(perr(lineno, format!("header must be \"N K\", found {} values", tokens.len())));
                };
                if n < 0 || k < 0 {
                    return Err(perr(lineno, "header values must be nonnegative".into()));
                }
                header = Some((n as usize, k as usize, lineno));
            }
            Some(_) => rows.push((lineno, tokens)),
        }
    }

    let Some((n, k, _)) = header else {
        return Err(perr(0, "missing \"N K\" header".into()));
    };
    if n == 0 || k == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mismatch = |declared: String, found: String| Error::HeaderMismatch {
        path: path.to_path_buf(),
        declared,
        found,
    };
    if let Some((first_line, first)) = rows.first() {
        let width = first.len();
        for (i, (_, r)) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(Error::RaggedRows { row: i, expected: width, found: r.len() });
            }
        }
        if width != k {
            return Err(mismatch(
                format!("{k} columns"),
                format!("{width} values per row (line {first_line})"),
            ));
        }
    }
    if rows.len() != n {
        return Err(mismatch(format!("{n} rows"), format!("{} rows", rows.len())));
    }
    let body: Vec<Vec<i64>> = rows.into_iter().map(|(_, r)| r).collect();
    let m = AttributeMatrix::from_rows(&body)?;
    match names {
        Some(names) => m.with_names(names).map_err(|_| {
            mismatch(format!("{k} columns"), "a different number of names".into())
        }),
        None => Ok(m),
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<AttributeMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

/// Canonical text form of a matrix.
pub fn format_matrix(m: &AttributeMatrix) -> Result<String> {
    let mut out = String::with_capacity(m.n_images() * (m.n_attrs() * 3 + 1) + 16);
    if let Some(names) = m.names() {
        if names.iter().any(|n| n.is_empty() || n.chars().any(char::is_whitespace)) {
            return Err(Error::InvalidParameter(
                "column names must be nonempty and free of whitespace".into(),
            ));
        }
        let _ = writeln!(out, "# {NAMES_PREFIX} {}", names.join(" "));
    }
    let _ = writeln!(out, "{} {}", m.n_images(), m.n_attrs());
    for i in 0..m.n_images() {
        for k in 0..m.n_attrs() {
            if k > 0 {
                out.push(' ');
            }
            out.push_str(if m.get(i, k) == 1 { "1" } else { "-1" });
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes `contents` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_matrix(m: &AttributeMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, format_matrix(m)?.as_bytes())
}

pub fn report_to_json(r: &MeaningfulnessReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(r)?;
    s.push('\n');
    Ok(s)
}

pub fn write_report(r: &MeaningfulnessReport, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, report_to_json(r)?.as_bytes())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<MeaningfulnessReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Configuration block of a run manifest. Omitted fields take the metric
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifestConfig {
    pub split_ratio: f64,
    pub seed: u64,
    pub grid: Option<Vec<usize>>,
    pub trials: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub zero_policy: ZeroPolicy,
    pub kinds: Vec<DistanceKind>,
    pub full_distance: bool,
}

impl Default for ManifestConfig {
    fn default() -> Self {
        let solver = SolverOptions::default();
        Self {
            split_ratio: DEFAULT_SPLIT_RATIO,
            seed: DEFAULT_SEED,
            grid: None,
            trials: DEFAULT_TRIALS,
            tol: solver.tol,
            max_iter: solver.max_iter,
            zero_policy: ZeroPolicy::default(),
            kinds: vec![DistanceKind::Cvx, DistanceKind::Jp],
            full_distance: false,
        }
    }
}

/// A metric run described in TOML:
///
/// ```toml
/// s = "meaningful.txt"
/// d = "discovered.txt"
///
/// [config]
/// seed = 7
/// trials = 5
/// grid = [0, 1, 2, 4, 8, 16, 32, 64, 128, 256]
/// ```
///
/// Relative paths resolve against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub s: PathBuf,
    pub d: PathBuf,
    #[serde(default)]
    pub config: ManifestConfig,
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: RunManifest = toml::from_str(&text).map_err(|e| Error::ParseError {
            path: path.to_path_buf(),
            line: e.span().map_or(0, |sp| text[..sp.start].lines().count().max(1)),
            msg: e.message().to_owned(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut m.s, &mut m.d] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.is_file() {
                return Err(Error::io(
                    p.clone(),
                    std::io::Error::new(std::io::ErrorKind::NotFound, "referenced matrix file not found"),
                ));
            }
        }
        m.metric_config()?;
        Ok(m)
    }

    pub fn metric_config(&self) -> Result<MetricConfig> {
        let c = &self.config;
        if !(c.split_ratio > 0.0 && c.split_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!("split_ratio {} not in (0, 1)", c.split_ratio)));
        }
        if c.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if let Some(g) = &c.grid {
            crate::calibrate::validate_grid(g)?;
        }
        let mut kinds = c.kinds.clone();
        kinds.sort_by_key(|k| k.as_str());
        kinds.dedup();
        if kinds != [DistanceKind::Cvx, DistanceKind::Jp] {
            return Err(Error::InvalidParameter("kinds must be [\"cvx\", \"jp\"]".into()));
        }
        let solver = SolverOptions { tol: c.tol, max_iter: c.max_iter };
        solver.validate()?;
        Ok(MetricConfig {
            split_ratio: c.split_ratio,
            seed: c.seed,
            grid: c.grid.clone(),
            trials: c.trials,
            solver,
            zero_policy: c.zero_policy,
            full_distance: c.full_distance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("m.txt")
    }

    #[test]
    fn parses_documented_example() {
        let m = parse_matrix("2 2\n1 -1\n-1 1\n", p()).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1, -1], vec![-1, 1]]);
    }

    #[test]
    fn smallest_canonical_form() {
        let m = AttributeMatrix::from_rows(&[vec![-1]]).unwrap();
        assert_eq!(format_matrix(&m).unwrap(), "1 1\n-1\n");
    }

    #[test]
    fn names_round_trip() {
        let text = "# exported\n# names: red furry\n2 2\n1 -1\n-1 1\n";
        let m = parse_matrix(text, p()).unwrap();
        assert_eq!(m.names().unwrap(), &["red".to_string(), "furry".to_string()]);
        assert_eq!(format_matrix(&m).unwrap(), "# names: red furry\n2 2\n1 -1\n-1 1\n");
    }

    #[test]
    fn error_cases() {
        assert!(matches!(parse_matrix("1 2\n1 -1 1\n", p()), Err(Error::HeaderMismatch { .. })));
        assert!(matches!(parse_matrix("3 2\n1 -1\n1 1\n", p()), Err(Error::HeaderMismatch { .. })));
        assert!(matches!(parse_matrix("2 2\n1 -1\n1 1 1\n", p()), Err(Error::RaggedRows { .. })));
        assert!(matches!(parse_matrix("1 2\n1 0\n", p()), Err(Error::NonBinaryEntry { value: 0, .. })));
        assert!(matches!(parse_matrix("1 2\n1 x\n", p()), Err(Error::ParseError { line: 2, .. })));
        assert!(matches!(parse_matrix("1 2\n1 1.0\n", p()), Err(Error::ParseError { .. })));
        assert!(matches!(parse_matrix("", p()), Err(Error::ParseError { .. })));
        assert!(matches!(parse_matrix("0 3\n", p()), Err(Error::EmptyMatrix)));
        assert!(matches!(parse_matrix("# names: a\n1 2\n1 1\n", p()), Err(Error::HeaderMismatch { .. })));
    }

    #[test]
    fn unwritable_path() {
        let m = AttributeMatrix::from_rows(&[vec![1]]).unwrap();
        let err = write_matrix(&m, "/nonexistent-dir/sub/m.txt").unwrap_err();
        assert!(matches!(err, Error::IoFailure { .. }));
    }

    #[test]
    fn manifest_defaults_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let m = AttributeMatrix::from_rows(&[vec![1, -1], vec![-1, 1]]).unwrap();
        write_matrix(&m, dir.path().join("s.txt")).unwrap();
        write_matrix(&m, dir.path().join("d.txt")).unwrap();
        let mpath = dir.path().join("run.toml");
        fs::write(&mpath, "s = \"s.txt\"\nd = \"d.txt\"\n[config]\nseed = 9\ngrid = [0, 4, 16]\n").unwrap();
        let man = RunManifest::load(&mpath).unwrap();
        let cfg = man.metric_config().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.grid, Some(vec![0, 4, 16]));
        assert_eq!(cfg.trials, DEFAULT_TRIALS);
        assert_eq!(man.s, dir.path().join("s.txt"));

        fs::write(&mpath, "s = \"s.txt\"\nd = \"d.txt\"\n[config]\ngrid = [1, 4]\n").unwrap();
        assert!(matches!(RunManifest::load(&mpath), Err(Error::InvalidParameter(_))));
        fs::write(&mpath, "s = \"missing.txt\"\nd = \"d.txt\"\n").unwrap();
        assert!(matches!(RunManifest::load(&mpath), Err(Error::IoFailure { .. })));
        fs::write(&mpath, "s = \"s.txt\"\nd = \"d.txt\"\n[config]\ntrails = 3\n").unwrap();
        assert!(matches!(RunManifest::load(&mpath), Err(Error::ParseError { .. })));
    }
}
