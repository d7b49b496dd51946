use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use amm_core::calibrate::{default_grid, gen_noise, DEFAULT_SEED, DEFAULT_SPLIT_RATIO, DEFAULT_TRIALS};
use amm_core::io::{read_matrix, report_to_json, write_atomic, write_matrix, write_report, RunManifest};
use amm_core::sweep::{baselines, noise_sweep};
use amm_core::synth::{
    hull_combination_set, meaningful_set, mixture_set, planted_flip_set, MeaningfulSpec, MixtureSpec, DEFAULT_FLIP_RATE,
};
use amm_core::{distance, evaluate_meaningfulness, split_meaningful, DistanceKind, Error, MetricConfig, SolverOptions};

const THREADS_VAR: &str = "AMM_THREADS";

/// Meaningfulness metric for discovered binary attributes.
///
/// Matrices are plain text: a `N K` header followed by N rows of K
/// entries in {-1, +1}. Lines starting with `#` are comments; a
/// `# names: a b c` comment labels the columns.
///
/// The worker count is capped by the AMM_THREADS environment variable
/// (0 or unset = one per core). Results do not depend on it.
#[derive(Parser)]
#[command(name = "amm", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic attribute matrix.
    Gen(GenArgs),
    /// Distances of a discovered set from a meaningful set.
    Dist(DistArgs),
    /// Calibrated meaningfulness scores of a discovered set.
    Metric(MetricArgs),
    /// Distances as noise attributes are progressively appended.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    /// Uniform random ±1 attributes.
    Noise,
    /// Sparse, correlated attributes standing in for human labels.
    Meaningful,
    /// Columns of --s with a fraction of entries flipped.
    Planted,
    /// Signs of random convex combinations of columns of --s.
    Hull,
    /// Planted columns mixed with noise columns.
    Mixture,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Number of images; taken from --s when that is given.
    #[arg(long)]
    n: Option<usize>,
    /// Number of attributes to generate.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Meaningful set the planted, hull and mixture kinds draw from.
    #[arg(long)]
    s: Option<PathBuf>,
    /// Fraction of planted columns in a mixture.
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_FLIP_RATE)]
    flip_rate: f64,
    /// Columns of --s combined into each hull attribute.
    #[arg(long, default_value_t = 3)]
    support: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Lsq,
    Cvx,
    Jp,
    All,
}

impl KindArg {
    fn kinds(self) -> Vec<DistanceKind> {
        match self {
            KindArg::Lsq => vec![DistanceKind::Lsq],
            KindArg::Cvx => vec![DistanceKind::Cvx],
            KindArg::Jp => vec![DistanceKind::Jp],
            KindArg::All => DistanceKind::ALL.to_vec(),
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Duality-gap tolerance of the hull solver.
    #[arg(long, default_value_t = SolverOptions::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = SolverOptions::default().max_iter)]
    max_iter: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, max_iter: self.max_iter }
    }
}

#[derive(Args)]
struct DistArgs {
    #[arg(long)]
    s: PathBuf,
    #[arg(long)]
    d: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    kind: KindArg,
    /// Also print per-column statistics.
    #[arg(long)]
    verbose: bool,
    /// Write per-column distances as a tab-separated table.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct MetricArgs {
    /// TOML run manifest; replaces the other input and config flags.
    #[arg(long, conflicts_with_all = ["s", "d", "seed", "trials", "grid", "ratio", "tol", "max_iter", "full_distance"])]
    manifest: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    s: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    d: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated noise counts starting at 0 [default: 0,1,2,4,… up to max(256, 4·|S²|)].
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    /// Fraction of the meaningful set used as the reference half.
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Also report distances from the whole meaningful set.
    #[arg(long)]
    full_distance: bool,
    /// Report path; without it the JSON report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    s: PathBuf,
    /// Discovered sets; repeat for several rows.
    #[arg(long)]
    d: Vec<PathBuf>,
    /// Comma-separated noise counts [default: as for `metric --grid`].
    #[arg(long, value_parser = parse_grid)]
    madd: Option<Grid>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Distance kinds; `all` also includes lsq.
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["cvx", "jp"])]
    kind: Vec<KindArg>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SPLIT_RATIO)]
    ratio: f64,
    /// Table path; without it the table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Clone)]
struct Grid(Vec<usize>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let grid = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err("values must be strictly ascending".into());
    }
    Ok(Grid(grid))
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn configure_threads() {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return };
    let n: usize = match raw.trim().parse() {
        Ok(n) => n,
        Err(_) => usage_error(ErrorKind::InvalidValue, format!("{THREADS_VAR} must be a nonnegative integer, got `{raw}`")),
    };
    // A failure means a pool already exists, which only happens in-process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Dist(a) => cmd_dist(a),
        Cmd::Metric(a) => cmd_metric(a),
        Cmd::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("amm: {}: {e}", e.name());
            ExitCode::from(1)
        }
    }
}

fn cmd_gen(a: GenArgs) -> amm_core::Result<()> {
    let needs_s = matches!(a.kind, GenKind::Planted | GenKind::Hull | GenKind::Mixture);
    if needs_s && a.s.is_none() {
        usage_error(ErrorKind::MissingRequiredArgument, "--s is required for this --kind");
    }
    if !needs_s && a.n.is_none() {
        usage_error(ErrorKind::MissingRequiredArgument, "--n is required for this --kind");
    }
    if a.kind == GenKind::Mixture && a.fraction.is_none() {
        usage_error(ErrorKind::MissingRequiredArgument, "--fraction is required for --kind mixture");
    }
    let s = a.s.as_deref().map(read_matrix).transpose()?;
    if let (Some(s), Some(n)) = (&s, a.n) {
        if n != s.n_images() {
            return Err(Error::LengthMismatch { left: n, right: s.n_images() });
        }
    }

    let (m, note) = match a.kind {
        GenKind::Noise => {
            let n = a.n.unwrap_or_default();
            if n == 0 || a.k == 0 {
                return Err(Error::EmptyMatrix);
            }
            (gen_noise(n, a.k, a.seed).ok_or(Error::EmptyMatrix)?, String::new())
        }
        GenKind::Meaningful => (meaningful_set(a.n.unwrap_or_default(), a.k, &MeaningfulSpec::default(), a.seed)?, String::new()),
        GenKind::Planted => (planted_flip_set(s.as_ref().unwrap(), a.k, a.flip_rate, a.seed)?, format!(" flip_rate={}", a.flip_rate)),
        GenKind::Hull => (hull_combination_set(s.as_ref().unwrap(), a.k, a.support, a.seed)?, format!(" support={}", a.support)),
        GenKind::Mixture => {
            let spec = MixtureSpec { meaningful_fraction: a.fraction.unwrap(), k: a.k, flip_rate: a.flip_rate, seed: a.seed };
            let (m, realized) = mixture_set(s.as_ref().unwrap(), &spec)?;
            let planted = spec.planted_count();
            (m, format!(" planted={planted} noise={} realized_fraction={realized}", a.k - planted))
        }
    };
    write_matrix(&m, &a.out)?;
    println!(
        "wrote {} n={} k={} kind={} seed={}{note}",
        a.out.display(),
        m.n_images(),
        m.n_attrs(),
        a.kind.to_possible_value().unwrap().get_name(),
        a.seed
    );
    Ok(())
}

fn cmd_dist(a: DistArgs) -> amm_core::Result<()> {
    let opts = a.solver.options();
    let s = read_matrix(&a.s)?;
    let d = read_matrix(&a.d)?;
    s.ensure_same_images(&d)?;
    let mut table = String::from("column");
    let mut values = Vec::new();
    for kind in a.kind.kinds() {
        let v = distance(kind, &s, &d, &opts)?;
        println!("{kind}\t{}", v.value);
        if a.verbose {
            let min = v.per_column.iter().copied().fold(f64::INFINITY, f64::min);
            let max = v.per_column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            println!("  columns={} min={min} max={max} nonconverged={}", v.per_column.len(), v.nonconverged);
        }
        table.push('\t');
        table.push_str(kind.as_str());
        values.push(v.per_column);
    }
    if let Some(out) = &a.out {
        table.push('\n');
        for k in 0..d.n_attrs() {
            let label = d.names().map_or_else(|| k.to_string(), |n| n[k].clone());
            table.push_str(&label);
            for col in &values {
                table.push('\t');
                table.push_str(&col[k].to_string());
            }
            table.push('\n');
        }
        write_atomic(out, table.as_bytes())?;
    }
    Ok(())
}

fn cmd_metric(a: MetricArgs) -> amm_core::Result<()> {
    let (s_path, d_path, config) = match &a.manifest {
        Some(path) => {
            let m = RunManifest::load(path)?;
            let config = m.metric_config()?;
            (m.s, m.d, config)
        }
        None => {
            let defaults = MetricConfig::default();
            let config = MetricConfig {
                split_ratio: a.ratio.unwrap_or(defaults.split_ratio),
                seed: a.seed.unwrap_or(defaults.seed),
                grid: a.grid.map(|g| g.0),
                trials: a.trials.unwrap_or(defaults.trials),
                solver: SolverOptions {
                    tol: a.tol.unwrap_or(defaults.solver.tol),
                    max_iter: a.max_iter.unwrap_or(defaults.solver.max_iter),
                },
                full_distance: a.full_distance,
                ..defaults
            };
            (a.s.unwrap(), a.d.unwrap(), config)
        }
    };
    let s = read_matrix(&s_path)?;
    let d = read_matrix(&d_path)?;
    let report = evaluate_meaningfulness(&s, &d, &config)?;
    match &a.out {
        Some(out) => {
            write_report(&report, out)?;
            println!(
                "gamma_cvx={:.1} gamma_jp={:.1} gamma_tilde={:.1} saturated={}",
                report.gamma_cvx,
                report.gamma_jp,
                report.gamma_tilde,
                report.any_saturated()
            );
        }
        None => print!("{}", report_to_json(&report)?),
    }
    if report.degraded {
        eprintln!(
            "amm: warning: {} of {} hull solves did not converge; report marked degraded",
            report.nonconverged_cvx, report.solves_cvx
        );
    }
    Ok(())
}

fn row_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn cmd_sweep(a: SweepArgs) -> amm_core::Result<()> {
    let opts = a.solver.options();
    let config = MetricConfig { split_ratio: a.ratio, seed: a.seed, ..MetricConfig::default() };
    let s = read_matrix(&a.s)?;
    let split = split_meaningful(&s, config.split_ratio, config.split_seed())?;
    let grid = a.madd.map_or_else(|| default_grid(split.s2.n_attrs()), |g| g.0);
    let mut kinds: Vec<DistanceKind> = a.kind.iter().flat_map(|k| k.kinds()).collect();
    kinds.sort_by_key(|k| DistanceKind::ALL.iter().position(|x| x == k));
    kinds.dedup();

    let mut sets = baselines(&split, config.noise_seed());
    for path in &a.d {
        sets.push((row_name(path), read_matrix(path)?));
    }
    let result = noise_sweep(&split, &sets, &grid, a.trials, &kinds, config.noise_seed(), &opts)?;
    let table = result.to_tsv();
    match &a.out {
        Some(out) => write_atomic(out, table.as_bytes())?,
        None => print!("{table}"),
    }
    eprintln!(
        "sweep seed={} ratio={} trials={} rows={} grid={:?} tol={} max_iter={}",
        a.seed,
        a.ratio,
        a.trials,
        result.rows.len(),
        grid,
        opts.tol,
        opts.max_iter
    );
    Ok(())
}
