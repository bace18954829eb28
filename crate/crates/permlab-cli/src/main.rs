//! `permlab` — command-line front end for the simulation laboratory.
//!
//! Machine-first output: CSV or JSON goes to stdout, notes to stderr.
//! Exit codes: 0 success, 1 usage/input error, 2 computational failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use permlab::harness::{self, ExperimentConfig};
use permlab::limitdist::{limit_cdf, ks_distance, EmpiricalDistribution, LimitLaw};
use permlab::sampling::{derive_stream, haar_orthogonal, uniform_permutation, Seed};
use permlab::weingarten::{format_rational, haar_moment, moment_order, rational_to_f64, MomentSpec};
use permlab::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_COMPUTE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "permlab",
    about = "Samplers, exact Haar moments, limit-law evaluation and Monte Carlo experiments \
             for permutation matrices in a randomized orthogonal basis",
    after_help = "Set LAB_THREADS to override the worker count (default: hardware parallelism)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment from a JSON config and print its summary.
    Simulate(SimulateArgs),
    /// Print an exact mixed moment of Haar matrix entries as a fraction.
    Moment(MomentArgs),
    /// Print the CDF of the compound Gaussian-Poisson limit as "x,cdf" rows.
    LimitCdf(LimitCdfArgs),
    /// Compute the KS distance between a samples.csv file and a limit law.
    Ks(KsArgs),
    /// Sample a Haar orthogonal matrix and write it as CSV.
    HaarSample(HaarSampleArgs),
    /// Sample a uniform permutation and write its one-line notation.
    PermSample(PermSampleArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Path to the experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct MomentArgs {
    /// Matrix dimension.
    #[arg(long)]
    n: usize,
    /// Row indices (1-based), comma-separated, e.g. 1,2,1,2.
    #[arg(long)]
    rows: String,
    /// Column indices (1-based), comma-separated, same length as --rows.
    #[arg(long)]
    cols: String,
}

#[derive(Args)]
struct LimitCdfArgs {
    /// Shift parameter of the compound law Z + sY; must satisfy s^2 <= 1.
    #[arg(long)]
    s: f64,
    /// Explicit evaluation points; may be repeated. Overrides the grid flags.
    #[arg(long = "x")]
    xs: Vec<f64>,
    /// Grid lower end, used when no --x is given.
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    min: f64,
    /// Grid upper end, used when no --x is given.
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    max: f64,
    /// Number of grid points, used when no --x is given.
    #[arg(long, default_value_t = 101)]
    steps: usize,
}

#[derive(Args)]
struct KsArgs {
    /// Path to a samples.csv file with header "replicate,value".
    #[arg(long)]
    samples: PathBuf,
    /// Compare against the compound law Z + sY.
    #[arg(long, conflicts_with = "variance")]
    s: Option<f64>,
    /// Compare against N(shift, variance).
    #[arg(long)]
    variance: Option<f64>,
    /// Mean of the Gaussian law; only meaningful with --variance.
    #[arg(long, default_value_t = 0.0, requires = "variance", allow_hyphen_values = true)]
    shift: f64,
}

#[derive(Args)]
struct HaarSampleArgs {
    /// Matrix dimension.
    #[arg(long)]
    n: usize,
    /// Master seed; stream 0 of this seed is used.
    #[arg(long)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PermSampleArgs {
    /// Permutation size.
    #[arg(long)]
    n: usize,
    /// Master seed; stream 0 of this seed is used.
    #[arg(long)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Splits library errors into usage/input problems (exit 1) and
/// computational failures (exit 2).
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::BelowInvertibilityRegime { .. }
        | Error::UnsupportedMomentOrder { .. }
        | Error::NonFiniteEntry
        | Error::PairingSizeMismatch(..)
        | Error::DimensionMismatch { .. } => EXIT_COMPUTE,
        _ => EXIT_USAGE,
    }
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code(&err))
}

fn parse_index_list(raw: &str, flag: &str) -> Result<Vec<usize>, Error> {
    raw.split(',')
        .map(|f| {
            f.trim().parse::<usize>().map_err(|_| {
                Error::InvalidConfig(format!("--{flag}: cannot parse '{}' as an index", f.trim()))
            })
        })
        .collect()
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Io {
        path: args.config.clone(),
        source: e,
    })?;
    let config = ExperimentConfig::from_json(&text)?;
    let mut summary = harness::run_experiment(&config)?;
    // Stdout must be byte-identical across runs; wall time stays in the file.
    summary.elapsed_seconds = None;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    eprintln!("wrote artifacts to {}", config.output_dir.display());
    Ok(())
}

fn cmd_moment(args: &MomentArgs) -> Result<(), Error> {
    let rows = parse_index_list(&args.rows, "rows")?;
    let cols = parse_index_list(&args.cols, "cols")?;
    let spec = MomentSpec::new(rows.clone(), cols.clone())?;
    let exact = haar_moment(&spec, args.n)?;
    let order = moment_order(&spec)?;
    let json = serde_json::json!({
        "n": args.n,
        "rows": rows,
        "cols": cols,
        "exact": format_rational(&exact),
        "decimal": rational_to_f64(&exact),
        "order": order,
    });
    println!("{json}");
    Ok(())
}

fn cmd_limit_cdf(args: &LimitCdfArgs) -> Result<(), Error> {
    let law = LimitLaw::poisson_gaussian(args.s)?;
    let xs: Vec<f64> = if args.xs.is_empty() {
        if args.steps < 2 || !(args.min < args.max) {
            return Err(Error::InvalidConfig(
                "grid needs --min < --max and --steps >= 2".into(),
            ));
        }
        (0..args.steps)
            .map(|i| args.min + (args.max - args.min) * i as f64 / (args.steps - 1) as f64)
            .collect()
    } else {
        args.xs.clone()
    };
    println!("x,cdf");
    for x in xs {
        println!("{},{}", x, limit_cdf(&law, x));
    }
    Ok(())
}

fn cmd_ks(args: &KsArgs) -> Result<(), Error> {
    let law = match (args.s, args.variance) {
        (Some(s), None) => LimitLaw::poisson_gaussian(s)?,
        (None, Some(v)) => {
            if args.shift == 0.0 {
                LimitLaw::gaussian(v)?
            } else {
                LimitLaw::shifted_gaussian(v, args.shift)?
            }
        }
        _ => {
            return Err(Error::InvalidConfig(
                "specify exactly one law: --s S or --variance V [--shift SH]".into(),
            ))
        }
    };
    let samples = harness::read_samples_csv(&args.samples)?;
    let count = samples.len();
    let emp = EmpiricalDistribution::new(samples)?;
    let json = serde_json::json!({
        "ks": ks_distance(&emp, &law),
        "n_samples": count,
        "limit": law,
    });
    println!("{json}");
    Ok(())
}

fn cmd_haar_sample(args: &HaarSampleArgs) -> Result<(), Error> {
    let mut stream = derive_stream(Seed(args.seed), 0);
    let m = haar_orthogonal(args.n, &mut stream)?;
    let mut content = String::new();
    for i in 0..args.n {
        let row: Vec<String> = (0..args.n)
            .map(|j| harness::format_sample(m.get(i, j)))
            .collect();
        content.push_str(&row.join(","));
        content.push('\n');
    }
    write_or_print(&args.out, &content)
}

fn cmd_perm_sample(args: &PermSampleArgs) -> Result<(), Error> {
    let mut stream = derive_stream(Seed(args.seed), 0);
    let p = uniform_permutation(args.n, &mut stream)?;
    // One-line notation with 1-based labels: position k holds sigma(k).
    let line: Vec<String> = p.map().iter().map(|&v| (v + 1).to_string()).collect();
    write_or_print(&args.out, &format!("{}\n", line.join(",")))
}

fn configure_threads() {
    if let Ok(raw) = std::env::var("LAB_THREADS") {
        match raw.parse::<usize>() {
            Ok(t) if t >= 1 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
                    eprintln!("note: could not apply LAB_THREADS: {e}");
                }
            }
            _ => eprintln!("note: ignoring LAB_THREADS='{raw}' (want a positive integer)"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version exit 0; genuine usage errors exit 1.
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Moment(args) => cmd_moment(args),
        Command::LimitCdf(args) => cmd_limit_cdf(args),
        Command::Ks(args) => cmd_ks(args),
        Command::HaarSample(args) => cmd_haar_sample(args),
        Command::PermSample(args) => cmd_perm_sample(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
