//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use amm_core::calibrate::{default_grid, gen_noise, DEFAULT_SEED};
use amm_core::io::{parse_matrix, read_matrix, write_matrix, write_report};
use amm_core::matrix::ScoreMatrix;
use amm_core::solver::{correlation, dist_cvx, dist_jp, dist_lsq, greedy_pair, simplex_lsq};
use amm_core::sweep::{baselines, noise_sweep, MEANINGFUL_BASELINE, NOISE_BASELINE};
use amm_core::synth::{hull_combination_set, meaningful_set, mixture_set, planted_flip_set, MeaningfulSpec, MixtureSpec};
use amm_core::{
    binarize_scores, distance, evaluate_meaningfulness, split_meaningful, AttributeMatrix, DistanceKind,
    MetricConfig, SolverOptions, ZeroPolicy,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

const REF_N: usize = 500;
const REF_J: usize = 64;
const REF_K: usize = 32;
const FLIP: f64 = 0.1;

fn reference_seeds() -> impl Iterator<Item = u64> {
    DEFAULT_SEED..DEFAULT_SEED + 5
}

fn reference_meaningful(n: usize, seed: u64) -> AttributeMatrix {
    meaningful_set(n, REF_J, &MeaningfulSpec::default(), seed).unwrap()
}

fn mixture(s: &AttributeMatrix, f: f64, seed: u64) -> AttributeMatrix {
    let spec = MixtureSpec { meaningful_fraction: f, k: REF_K, flip_rate: FLIP, seed: seed ^ 0x5EED };
    mixture_set(s, &spec).unwrap().0
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, k: usize) -> AttributeMatrix {
    let cols: Vec<Vec<i8>> = (0..k).map(|_| (0..n).map(|_| if rng.gen() { 1 } else { -1 }).collect()).collect();
    AttributeMatrix::from_columns(&cols).unwrap()
}

fn sq_dist(a: &[i8], b: &[i8]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| (i64::from(x) - i64::from(y)).pow(2)).sum()
}

// 1 -------------------------------------------------------------------------

fn identity_floor() -> Outcome {
    let s = reference_meaningful(REF_N, DEFAULT_SEED);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let picks: Vec<usize> = (0..REF_K).map(|_| rng.gen_range(0..REF_J)).collect();
    let d = s.select_columns(&picks).unwrap();
    let tight = SolverOptions { tol: 1e-8, ..SolverOptions::default() };
    let cvx = dist_cvx(&s, &d, &tight).map_err(err)?.value;
    ensure!(cvx.abs() <= 1e-8, "delta_cvx = {cvx:e} for columns taken from S");
    let jp = dist_jp(&s, &d).map_err(err)?.value;
    let lsq = dist_lsq(&s, &d).map_err(err)?.value;
    ensure!(lsq.abs() <= 1e-8, "delta_lsq = {lsq:e}");

    let config = MetricConfig::default();
    let split = split_meaningful(&s, config.split_ratio, config.split_seed()).map_err(err)?;
    let r = evaluate_meaningfulness(&s, &split.s2, &config).map_err(err)?;
    ensure!(
        r.gamma_cvx == 100.0 && r.gamma_jp == 100.0 && r.gamma_tilde == 100.0,
        "D = S2 scored ({}, {}, {})",
        r.gamma_cvx,
        r.gamma_jp,
        r.gamma_tilde
    );
    Ok(format!("delta_cvx={cvx:.1e} delta_jp={jp} delta_lsq={lsq:.1e}; gamma(S2)=100"))
}

// 2 -------------------------------------------------------------------------

fn pair_residuals() -> Outcome {
    let (n, j, k) = (64, 8, 8);
    let opts = SolverOptions::default();
    let mut worst_gap = f64::INFINITY;
    for inst in 0..100u64 {
        let s = meaningful_set(n, j, &MeaningfulSpec::default(), inst).unwrap();
        let d = match inst % 4 {
            0 => gen_noise(n, k, inst).unwrap(),
            1 => planted_flip_set(&s, k, 0.2, inst).unwrap(),
            2 => hull_combination_set(&s, k, 3, inst).unwrap(),
            _ => {
                let spec = MixtureSpec { meaningful_fraction: 0.5, k, flip_rate: FLIP, seed: inst };
                mixture_set(&s, &spec).unwrap().0
            }
        };
        let pairs = greedy_pair(&s, &d).map_err(err)?;
        let jp = dist_jp(&s, &d).map_err(err)?;
        for p in &pairs.pairs {
            let explicit = sq_dist(s.column(p.meaningful), d.column(p.discovered)) as f64;
            let rho = correlation(s.column(p.meaningful), d.column(p.discovered)).map_err(err)?;
            let identity = 4.0 * n as f64 * (1.0 - rho);
            ensure!(
                explicit == identity && jp.per_column[p.discovered] == identity,
                "instance {inst}, pair ({}, {}): explicit {explicit}, 4N(1-rho) {identity}, reported {}",
                p.meaningful,
                p.discovered,
                jp.per_column[p.discovered]
            );
        }
        let cvx = dist_cvx(&s, &d, &opts).map_err(err)?.value;
        let lsq = dist_lsq(&s, &d).map_err(err)?.value;
        ensure!(cvx >= lsq - 1e-8, "instance {inst}: delta_cvx {cvx} < delta_lsq {lsq}");
        worst_gap = worst_gap.min(cvx - lsq);
    }
    Ok(format!("100 instances; min(delta_cvx - delta_lsq) = {worst_gap:.3e}"))
}

// 3 -------------------------------------------------------------------------

/// Minimum of `‖A r − z‖²` over simplex points whose coordinates are
/// multiples of `1/steps`.
fn simplex_grid_min(s: &AttributeMatrix, z: &[i8], steps: usize) -> f64 {
    let j = s.n_attrs();
    let gram: Vec<Vec<f64>> = (0..j)
        .map(|a| (0..j).map(|b| -(sq_dist(s.column(a), s.column(b)) as f64) / 2.0 + s.n_images() as f64).collect())
        .collect();
    let c: Vec<f64> = (0..j).map(|a| s.n_images() as f64 - sq_dist(s.column(a), z) as f64 / 2.0).collect();
    let zz = z.len() as f64;
    let f = |r: &[f64]| {
        let mut v = zz;
        for a in 0..j {
            v -= 2.0 * c[a] * r[a];
            for b in 0..j {
                v += r[a] * gram[a][b] * r[b];
            }
        }
        v
    };
    let h = steps as f64;
    let mut best = f64::INFINITY;
    match j {
        1 => best = f(&[1.0]),
        2 => {
            for a in 0..=steps {
                best = best.min(f(&[a as f64 / h, (steps - a) as f64 / h]));
            }
        }
        3 => {
            for a in 0..=steps {
                for b in 0..=steps - a {
                    best = best.min(f(&[a as f64 / h, b as f64 / h, (steps - a - b) as f64 / h]));
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

/// The greedy pairing written out directly: repeatedly pick the free pair with the highest
/// correlation, scanning `(j, k)` in lexicographic order so that ties go
/// to the first pair seen.
fn greedy_reference(s: &AttributeMatrix, d: &AttributeMatrix) -> Vec<(usize, usize, f64)> {
    let (jn, kn) = (s.n_attrs(), d.n_attrs());
    let mut free_j = vec![true; jn];
    let mut free_k = vec![true; kn];
    let mut out = Vec::new();
    while out.len() < jn.min(kn) {
        let mut best: Option<(usize, usize, f64)> = None;
        for j in 0..jn {
            for k in 0..kn {
                if !(free_j[j] && free_k[k]) {
                    continue;
                }
                let agree = s.column(j).iter().zip(d.column(k)).filter(|(a, b)| a == b).count();
                let rho = agree as f64 / s.n_images() as f64;
                if best.is_none_or(|(_, _, r)| rho > r) {
                    best = Some((j, k, rho));
                }
            }
        }
        let (j, k, rho) = best.unwrap();
        free_j[j] = false;
        free_k[k] = false;
        out.push((j, k, rho));
    }
    out
}

fn oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for col in 0..50 {
        let j = 1 + col % 3;
        let n = rng.gen_range(4..=24);
        let s = random_matrix(&mut rng, n, j);
        let z = random_matrix(&mut rng, n, 1);
        let sol = simplex_lsq(&s, z.column(0), 1e-9, 10_000).map_err(err)?;
        let grid = simplex_grid_min(&s, z.column(0), 1000);
        let diff = (sol.residual_sq - grid).abs();
        ensure!(diff <= 1e-3, "column {col} (J={j}, N={n}): solver {} vs grid {grid}", sol.residual_sq);
        worst = worst.max(diff);
    }

    for inst in 0..100 {
        let n = rng.gen_range(2..=12);
        let j = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=6);
        let s = random_matrix(&mut rng, n, j);
        let d = random_matrix(&mut rng, n, k);
        let got: Vec<(usize, usize, f64)> = greedy_pair(&s, &d)
            .map_err(err)?
            .pairs
            .iter()
            .map(|p| (p.meaningful, p.discovered, p.correlation))
            .collect();
        let want = greedy_reference(&s, &d);
        ensure!(got == want, "instance {inst} (N={n}, J={j}, K={k}): {got:?} vs {want:?}");
    }
    Ok(format!("simplex max |solver - grid| = {worst:.2e} over 50 columns; greedy agrees on 100 instances"))
}

// 4 -------------------------------------------------------------------------

fn sweep_shape() -> Outcome {
    let kinds = [DistanceKind::Cvx, DistanceKind::Jp];
    let mut summary = Vec::new();
    for seed in reference_seeds() {
        let s = reference_meaningful(REF_N, seed);
        let config = MetricConfig { seed, ..MetricConfig::default() };
        let split = split_meaningful(&s, config.split_ratio, config.split_seed()).map_err(err)?;
        let mut sets = baselines(&split, config.noise_seed());
        sets.push(("discovered".into(), mixture(&s, 0.5, seed)));
        let grid = default_grid(split.s2.n_attrs());
        ensure!(*grid.last().unwrap() == 256, "default grid ends at {:?}", grid.last());
        let r = noise_sweep(&split, &sets, &grid, config.trials, &kinds, config.noise_seed(), &config.solver)
            .map_err(err)?;
        for kind in kinds {
            let s2 = r.row(MEANINGFUL_BASELINE, kind).unwrap();
            let noise = r.row(NOISE_BASELINE, kind).unwrap();
            let rho = s2.rank_correlation(&grid).unwrap_or(f64::NAN);
            ensure!(rho >= 0.9, "seed {seed} {kind}: rank correlation {rho:.3} with m");
            let (last, asym) = (*s2.mean_delta.last().unwrap(), *noise.mean_delta.last().unwrap());
            let rel = (last - asym).abs() / asym;
            ensure!(rel <= 0.10, "seed {seed} {kind}: m=256 value {last:.1} is {:.1}% from noise {asym:.1}", rel * 100.0);
            let at0: Vec<f64> = r.rows.iter().filter(|row| row.kind == kind).map(|row| row.mean_delta[0]).collect();
            let (s2_0, noise_0) = (s2.mean_delta[0], noise.mean_delta[0]);
            let others = at0.iter().filter(|&&v| v != s2_0 && v != noise_0);
            ensure!(
                others.clone().all(|&v| s2_0 < v && v < noise_0) && s2_0 < noise_0,
                "seed {seed} {kind}: m=0 values {at0:?} do not put S2 strictly lowest and noise strictly highest"
            );
            summary.push(format!("{kind}:rho={rho:.2},gap={:.1}%", rel * 100.0));
        }
    }
    Ok(summary.join(" "))
}

// 5 -------------------------------------------------------------------------

fn mixture_monotonicity() -> Outcome {
    let fractions = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut increasing = 0;
    let mut lines = Vec::new();
    for seed in reference_seeds() {
        let s = reference_meaningful(REF_N, seed);
        let config = MetricConfig { seed, ..MetricConfig::default() };
        let mut g = Vec::new();
        for &f in &fractions {
            let r = evaluate_meaningfulness(&s, &mixture(&s, f, seed), &config).map_err(err)?;
            g.push(r.gamma_tilde);
        }
        ensure!(g[0] <= 15.0, "seed {seed}: gamma_tilde(f=0) = {:.2} > 15", g[0]);
        ensure!(g[4] >= 85.0, "seed {seed}: gamma_tilde(f=1) = {:.2} < 85", g[4]);
        if g.windows(2).all(|w| w[0] < w[1]) {
            increasing += 1;
        }
        lines.push(g.iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>().join("<"));
    }
    ensure!(increasing >= 4, "strictly increasing on only {increasing}/5 seeds: {lines:?}");
    Ok(format!("{increasing}/5 strictly increasing; {}", lines.join(" | ")))
}

// 6 -------------------------------------------------------------------------

fn thread_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let s = reference_meaningful(REF_N, DEFAULT_SEED);
    let (sp, dp) = (dir.path().join("s.txt"), dir.path().join("d.txt"));
    write_matrix(&s, &sp).map_err(err)?;
    write_matrix(&mixture(&s, 0.5, DEFAULT_SEED), &dp).map_err(err)?;

    let run = |threads: usize, tag: usize| -> Result<Vec<u8>, String> {
        let out = dir.path().join(format!("r{threads}_{tag}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_amm"))
            .env("AMM_THREADS", threads.to_string())
            .args(["metric", "--s"])
            .arg(&sp)
            .arg("--d")
            .arg(&dp)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(err)?;
        ensure!(o.status.success(), "amm metric failed: {}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(&out).map_err(err)
    };
    let reference = run(1, 0)?;
    for threads in [1, 2, 8] {
        for tag in 1..=2 {
            ensure!(run(threads, tag)? == reference, "report at {threads} threads (run {tag}) differs");
        }
    }
    Ok(format!("7 reports of {} bytes identical at 1, 2 and 8 threads", reference.len()))
}

// 7 -------------------------------------------------------------------------

fn pipeline_scale() -> Outcome {
    let s = reference_meaningful(2000, DEFAULT_SEED);
    let d = mixture(&s, 0.5, DEFAULT_SEED);
    let r = evaluate_meaningfulness(&s, &d, &MetricConfig::default()).map_err(err)?;
    ensure!(!r.degraded, "report degraded: {}/{} hull solves unconverged", r.nonconverged_cvx, r.solves_cvx);
    Ok(format!("gamma_tilde={:.1}, {} hull solves", r.gamma_tilde, r.solves_cvx))
}

// 8 -------------------------------------------------------------------------

fn expect_error<T: std::fmt::Debug>(what: &str, r: amm_core::Result<T>, name: &str) -> Result<(), String> {
    match r {
        Err(e) if e.name() == name => Ok(()),
        other => Err(format!("{what}: expected {name}, got {other:?}")),
    }
}

fn io_contract() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..1000 {
        let n = rng.gen_range(1..=40);
        let k = rng.gen_range(1..=12);
        let mut m = random_matrix(&mut rng, n, k);
        if i % 2 == 0 {
            m = m.with_names((0..k).map(|c| format!("attr_{i}_{c}")).collect()).unwrap();
        }
        let path = dir.path().join(format!("m{}.txt", i % 7));
        write_matrix(&m, &path).map_err(err)?;
        let back = read_matrix(&path).map_err(err)?;
        ensure!(back == m, "matrix {i} ({n}x{k}) changed on round trip");
        ensure!(back.columns().zip(m.columns()).all(|(a, b)| a == b), "matrix {i} entries differ");
    }

    let p = Path::new("case.txt");
    let cases: [(&str, &str, &str); 10] = [
        ("zero entry", "2 2\n1 0\n-1 1\n", "NonBinaryEntry"),
        ("entry 2", "2 2\n1 -1\n2 1\n", "NonBinaryEntry"),
        ("zero rows", "0 3\n", "EmptyMatrix"),
        ("zero columns", "2 0\n\n", "EmptyMatrix"),
        ("ragged body", "2 2\n1 -1\n-1\n", "RaggedRows"),
        ("row wider than header", "2 2\n1 -1 1\n-1 1 1\n", "HeaderMismatch"),
        ("row count", "3 2\n1 -1\n-1 1\n", "HeaderMismatch"),
        ("non-integer token", "2 2\n1 x\n-1 1\n", "ParseError"),
        ("fractional token", "2 2\n1 1.5\n-1 1\n", "ParseError"),
        ("missing header", "# only a comment\n", "ParseError"),
    ];
    for (what, text, name) in cases {
        expect_error(what, parse_matrix(text, p), name)?;
    }
    let missing = dir.path().join("missing.txt");
    expect_error("missing file", read_matrix(&missing), "IoFailure")?;
    let unwritable = dir.path().join("no_such_dir").join("m.txt");
    let one = AttributeMatrix::from_rows(&[[-1i64]]).unwrap();
    expect_error("unwritable matrix path", write_matrix(&one, &unwritable), "IoFailure")?;
    let report = evaluate_meaningfulness(
        &gen_noise(20, 4, 1).unwrap(),
        &gen_noise(20, 2, 2).unwrap(),
        &MetricConfig { grid: Some(vec![0, 1, 2]), trials: 1, ..MetricConfig::default() },
    )
    .map_err(err)?;
    expect_error("unwritable report path", write_report(&report, &unwritable), "IoFailure")?;

    expect_error("entry 0", AttributeMatrix::from_rows(&[[1i64, 0]]), "NonBinaryEntry")?;
    expect_error("no rows", AttributeMatrix::from_rows::<[i64; 1]>(&[]), "EmptyMatrix")?;
    expect_error("no columns", AttributeMatrix::from_rows(&[[0i64; 0]]), "EmptyMatrix")?;
    expect_error("ragged rows", AttributeMatrix::from_rows(&[vec![1i64, 1], vec![1]]), "RaggedRows")?;
    let nan = ScoreMatrix::from_rows(&[[f64::NAN]]).and_then(|sc| binarize_scores(&sc, ZeroPolicy::MapToPlus));
    expect_error("NaN score", nan, "NonFiniteScore")?;
    expect_error("J = 1", split_meaningful(&one, 0.5, 0), "TooFewAttributes")?;
    let three = gen_noise(4, 3, 0).unwrap();
    expect_error("empty half", split_meaningful(&three, 0.1, 0), "DegenerateSplit")?;
    expect_error("unequal columns", correlation(&[1, 1], &[1, 1, 1]), "LengthMismatch")?;
    let other_n = gen_noise(5, 2, 0).unwrap();
    for kind in DistanceKind::ALL {
        expect_error(kind.as_str(), distance(kind, &three, &other_n, &SolverOptions::default()), "LengthMismatch")?;
    }
    expect_error("score above 100", amm_core::calibrate::combined_score(101.0, 50.0), "OutOfRange")?;
    Ok("1000 round trips identical; 25 error cases raise their named errors".into())
}

// ---------------------------------------------------------------------------

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "identity floor", limit: Some(Duration::from_secs(5)), run: identity_floor },
        Criterion { id: 2, name: "pair residual identity and cvx >= lsq", limit: None, run: pair_residuals },
        Criterion { id: 3, name: "simplex and greedy oracles", limit: None, run: oracles },
        Criterion { id: 4, name: "noise sweep shape", limit: Some(Duration::from_secs(60)), run: sweep_shape },
        Criterion { id: 5, name: "mixture monotonicity", limit: Some(Duration::from_secs(120)), run: mixture_monotonicity },
        Criterion { id: 6, name: "report determinism across threads", limit: None, run: thread_determinism },
        Criterion { id: 7, name: "pipeline at N=2000", limit: Some(Duration::from_secs(60)), run: pipeline_scale },
        Criterion { id: 8, name: "io round trip and error names", limit: None, run: io_contract },
    ];
    let filter: Option<u8> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_none_or(|f| f == c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.1?}, limit {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS [{}] {} ({:.2}s): {detail}", c.id, c.name, elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {} ({:.2}s): {why}", c.id, c.name, elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
