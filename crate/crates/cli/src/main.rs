use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gfdp_core::evaluator::{comparison_csv, compare, error_report, plot_data, DEFAULT_TRIALS};
use gfdp_core::factorizer::{self, Mode, NoiseShape};
use gfdp_core::mechanism::{rng_for, run_records, splitmix64, StepRecord};
use gfdp_core::norms::{bound_report, PNorm};
use gfdp_core::oracle::verify_suite;
use gfdp_core::{io, Matrix, PrivacyParams, RootsProfile, SigmaVariant, WeightFamily, WeightSpec};
use rand::Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "gfdp", version, about = "Group-algebra factorizations and private weighted prefix sums")]
struct Cli {
    /// Worker threads for Monte-Carlo trials (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute factors and write them to a directory.
    Factorize(FactorizeArgs),
    /// Upper, achieved and lower bounds as JSON.
    Bounds(BoundsArgs),
    /// Run the streaming mechanism on one stream.
    Simulate(SimulateArgs),
    /// Check every identity against brute-force oracles.
    Verify(VerifyArgs),
    /// Bounds and Monte-Carlo errors over a grid.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Counting,
    Sliding,
    Striped,
    Expdecay,
    Polydecay,
    Table,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Bin,
}

#[derive(Clone, Copy, ValueEnum)]
enum Synthetic {
    Constant,
    Uniform,
    Spike,
}

#[derive(Args)]
struct WeightArgs {
    #[arg(long, value_enum, default_value = "counting")]
    weight: Family,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    stripe: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// CSV with one weight per line (optional header `f`).
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct PrivacyArgs {
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    clip: f64,
    #[arg(long, default_value = "thm15")]
    sigma_variant: String,
}

#[derive(Args)]
struct FactorizeArgs {
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(long, default_value = "triangular")]
    mode: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(long, default_value = "inf")]
    p: String,
    /// Use pattern factors for the achieved value even when triangular ones fit.
    #[arg(long, default_value = "triangular")]
    mode: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    weight: WeightArgs,
    #[command(flatten)]
    privacy: PrivacyArgs,
    #[arg(long, default_value = "triangular")]
    mode: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Stream values, one per line.
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    synthetic: Option<Synthetic>,
    /// Also estimate the error over this many noise draws.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value = "inf")]
    p: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct CompareArgs {
    /// Families, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "counting")]
    weight: Vec<Family>,
    /// Horizons, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
    n: Vec<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    stripe: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    table: Option<PathBuf>,
    /// Exponents, comma separated (`inf` allowed).
    #[arg(long, value_delimiter = ',', default_value = "2,inf")]
    p: Vec<String>,
    #[command(flatten)]
    privacy: PrivacyArgs,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write `n, bound, empirical, lower` columns to this file.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

/// Raised when an oracle check fails; mapped to exit code 3.
#[derive(Debug)]
struct VerificationFailed(usize);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} identity check(s) failed", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn family(
    kind: Family,
    window: Option<usize>,
    stripe: Option<usize>,
    alpha: Option<f64>,
    table: Option<&Path>,
) -> Result<WeightFamily> {
    Ok(match kind {
        Family::Counting => WeightFamily::Counting,
        Family::Sliding => WeightFamily::Sliding {
            window: window.context("--window is required for sliding weights")?,
        },
        Family::Striped => WeightFamily::Striped {
            stride: stripe.context("--stripe is required for striped weights")?,
        },
        Family::Expdecay => WeightFamily::ExpDecay {
            alpha: alpha.context("--alpha is required for expdecay weights")?,
        },
        Family::Polydecay => WeightFamily::PolyDecay {
            alpha: alpha.context("--alpha is required for polydecay weights")?,
        },
        Family::Table => {
            let path = table.context("--table is required for table weights")?;
            let values = io::read_values(path).with_context(|| format!("reading {}", path.display()))?;
            WeightFamily::Table { values }
        }
    })
}

impl WeightArgs {
    fn spec(&self) -> Result<WeightSpec> {
        let fam = family(self.weight, self.window, self.stripe, self.alpha, self.table.as_deref())?;
        Ok(WeightSpec::new(fam, self.n)?)
    }
}

impl PrivacyArgs {
    fn params(&self) -> Result<PrivacyParams> {
        let variant: SigmaVariant = self.sigma_variant.parse()?;
        Ok(PrivacyParams::new(self.eps, self.delta, self.clip, variant)?)
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::rng().random::<u64>();
        eprintln!("no --seed given; using entropy seed {s}");
        s
    })
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_matrix(dir: &Path, stem: &str, m: &Matrix, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_file(dir, &format!("{stem}.csv"), io::matrix_to_csv(m).as_bytes()),
        Format::Bin => {
            let mut buf = Vec::new();
            io::write_binary(m, &mut buf)?;
            write_file(dir, &format!("{stem}.bin"), &buf)
        }
        Format::Json => {
            let rows: Vec<&[f64]> = (0..m.rows()).map(|i| m.row(i)).collect();
            let v = json!({ "rows": m.rows(), "cols": m.cols(), "data": rows });
            write_file(dir, &format!("{stem}.json"), serde_json::to_string(&v)?.as_bytes())
        }
    }
}

fn cmd_factorize(a: FactorizeArgs) -> Result<()> {
    let spec = a.weight.spec()?;
    let mode: Mode = a.mode.parse()?;
    let profile = RootsProfile::from_spec(&spec)?;
    write_file(&a.out, "profile.json", serde_json::to_string_pretty(&profile.to_json())?.as_bytes())?;
    let meta = match mode {
        Mode::Pattern => {
            let pat = factorizer::build_pattern(&profile, &spec.coefficients::<f64>());
            json!({
                "spec": spec, "id": spec.id(), "mode": "pattern", "n": spec.n,
                "order": pat.order, "sensitivity": pat.sensitivity(),
                "row_energy": pat.row_energy(),
            })
        }
        Mode::Triangular => {
            if spec.n > factorizer::TRIANGULAR_CAP {
                return Err(gfdp_core::Error::Capacity { n: spec.n, cap: factorizer::TRIANGULAR_CAP }.into());
            }
            let real = factorizer::real::<f64>(&spec)?;
            let tri = factorizer::triangularize(&real)?;
            write_matrix(&a.out, "left", &tri.left, a.format)?;
            write_matrix(&a.out, "right", &tri.right, a.format)?;
            json!({
                "spec": spec, "id": spec.id(), "mode": "triangular", "n": spec.n,
                "thin": real.thin, "sensitivity": tri.sensitivity,
                "trace_profile": tri.trace_profile,
            })
        }
    };
    write_file(&a.out, "meta.json", serde_json::to_string_pretty(&meta)?.as_bytes())?;
    println!("wrote factors for {} to {}", spec.id(), a.out.display());
    Ok(())
}

fn cmd_bounds(a: BoundsArgs) -> Result<()> {
    let spec = a.weight.spec()?;
    let p: PNorm = a.p.parse()?;
    let cap = match a.mode.parse::<Mode>()? {
        Mode::Pattern => 0,
        Mode::Triangular => factorizer::TRIANGULAR_CAP,
    };
    let report = bound_report(&spec, p, cap)?;
    let text = serde_json::to_string_pretty(&report)?;
    match a.out {
        Some(dir) => write_file(&dir, "bounds.json", text.as_bytes())?,
        None => println!("{text}"),
    }
    Ok(())
}

fn synthetic_stream(kind: Synthetic, n: usize, clip: f64, seed: u64) -> Vec<f64> {
    match kind {
        Synthetic::Constant => vec![clip; n],
        Synthetic::Spike => (0..n).map(|t| if t == n / 2 { clip } else { 0.0 }).collect(),
        Synthetic::Uniform => {
            // separate stream so the data never shares draws with the noise
            let mut rng = rng_for(splitmix64(seed ^ 0x5EED_DA7A));
            (0..n).map(|_| rng.random_range(-clip..=clip)).collect()
        }
    }
}

fn stream_csv(records: &[StepRecord]) -> String {
    let mut out = String::from("t,true,noised,error\n");
    for r in records {
        out.push_str(&format!("{},{:e},{:e},{:e}\n", r.t, r.true_value, r.output, r.output - r.true_value));
    }
    out
}

fn simulate_with<S: NoiseShape<f64>>(shape: &S, params: &PrivacyParams, x: &[f64], seed: u64) -> Result<Vec<StepRecord>> {
    Ok(run_records(shape, params, x, seed)?)
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let spec = a.weight.spec()?;
    let params = a.privacy.params()?;
    let mode: Mode = a.mode.parse()?;
    let p: PNorm = a.p.parse()?;
    let seed = resolve_seed(a.seed);
    let x = match (&a.input, a.synthetic) {
        (Some(path), _) => io::read_values(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(kind)) => synthetic_stream(kind, spec.n, params.clip, seed),
        (None, None) => synthetic_stream(Synthetic::Uniform, spec.n, params.clip, seed),
    };
    if x.len() != spec.n {
        bail!(gfdp_core::Error::Parameter(format!("stream has {} values but n = {}", x.len(), spec.n)));
    }
    let (records, adaptive) = match mode {
        Mode::Triangular => {
            let tri = factorizer::triangular::<f64>(&spec)?;
            (simulate_with(&tri, &params, &x, seed)?, true)
        }
        Mode::Pattern => {
            let real = factorizer::real::<f64>(&spec)?;
            (simulate_with(&real, &params, &x, seed)?, false)
        }
    };
    let csv = stream_csv(&records);
    let max_err = records.iter().fold(0.0f64, |m, r| m.max((r.output - r.true_value).abs()));
    let clipped = records.iter().filter(|r| r.clipped).count();
    let mut summary = json!({
        "spec": spec.id(), "n": spec.n, "seed": seed, "sigma": params.sigma(),
        "sigma_variant": params.variant, "mode": mode, "adaptive_safe": adaptive,
        "clipped_inputs": clipped, "max_abs_error": max_err,
    });
    if a.trials > 0 {
        let report = error_report(&spec, &params, p, a.trials, seed)?.without_trials();
        summary["error_report"] = serde_json::to_value(report)?;
    }
    let text = serde_json::to_string_pretty(&summary)?;
    match a.out {
        Some(dir) => {
            write_file(&dir, "stream.csv", csv.as_bytes())?;
            write_file(&dir, "summary.json", text.as_bytes())?;
        }
        None => {
            print!("{csv}");
            eprintln!("{text}");
        }
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let checks = verify_suite(a.n)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let mut out = std::io::stdout().lock();
    if a.format == Format::Json {
        writeln!(out, "{}", serde_json::to_string_pretty(&checks)?)?;
    } else {
        let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{status}  {:width$}  dev={:.3e}  tol={:.1e}", c.name, c.deviation, c.tolerance)?;
        }
        writeln!(out, "{} checks, {failed} failed", checks.len())?;
    }
    if failed > 0 {
        return Err(VerificationFailed(failed).into());
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    let params = a.privacy.params()?;
    let seed = resolve_seed(a.seed);
    let ps = a.p.iter().map(|s| s.parse::<PNorm>()).collect::<Result<Vec<_>, _>>()?;
    let first_n = *a.n.first().context("--n needs at least one horizon")?;
    let specs = a
        .weight
        .iter()
        .map(|&k| {
            let fam = family(k, a.window, a.stripe, a.alpha, a.table.as_deref())?;
            Ok(WeightSpec::new(fam, first_n)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = compare(&specs, &a.n, &params, &ps, a.trials, seed)?;
    let body = match a.format {
        Format::Json => serde_json::to_string_pretty(&rows)?,
        _ => comparison_csv(&rows),
    };
    let ext = if a.format == Format::Json { "json" } else { "csv" };
    match &a.out {
        Some(dir) => write_file(dir, &format!("compare.{ext}"), body.as_bytes())?,
        None => print!("{body}"),
    }
    if let Some(path) = a.plot_data {
        fs::write(&path, plot_data(&rows)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return 3;
    }
    match err.downcast_ref::<gfdp_core::Error>() {
        Some(gfdp_core::Error::Numeric(_) | gfdp_core::Error::Capacity { .. } | gfdp_core::Error::State(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Factorize(a) => cmd_factorize(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
