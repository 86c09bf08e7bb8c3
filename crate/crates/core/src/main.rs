use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use alpha_hash::bounds::{sweep, sweep_csv, uniform_grid};
use alpha_hash::codes::{golomb_parameter_for_geometric, IntegerCode};
use alpha_hash::harness::{
    fit_empirical_code, render_report, run_experiment, ExperimentConfig, ReportFormat, DEFAULT_UNIVERSE,
};
use alpha_hash::oracle;
use alpha_hash::schemes::{perfect_index_code, LambdaMode, Scheme, SchemeConfig, SchemeKind, DEFAULT_PROBE_CAP};
use alpha_hash::urn::divergence_from_uniform;
use alpha_hash::{Error, KeySet, SharedSeed};

const USAGE_ERROR: u8 = 2;
const FAILURE: u8 = 1;

#[derive(Parser)]
#[command(name = "alphahash", version, about = "Minimal alpha-perfect hashing: schemes, oracles and bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form rate curves.
    Bounds {
        #[command(subcommand)]
        command: BoundsCommand,
    },
    /// Monte Carlo encode/decode experiment over random key sets.
    Simulate(SimulateArgs),
    /// Encode and decode one key set, printing the description and hash values.
    Roundtrip(RoundtripArgs),
    /// Exhaustive small-k checks.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Mixture and sampling rate bounds on an evenly spaced alpha grid.
    Sweep {
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Print the pass/fail table; exits 1 if any check fails.
    Verify {
        #[arg(long, default_value_t = 5)]
        kmax: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Perfect,
    Zero,
    Mixture,
    Pfr,
}

impl From<SchemeArg> for SchemeKind {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Perfect => SchemeKind::Perfect,
            SchemeArg::Zero => SchemeKind::ZeroBit,
            SchemeArg::Mixture => SchemeKind::Mixture,
            SchemeArg::Pfr => SchemeKind::Pfr,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CodeArg {
    Gamma,
    Delta,
    Golomb,
    Empirical,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum LambdaArg {
    #[default]
    Theoretical,
    Calibrated,
}

#[derive(Args)]
struct SchemeOpts {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Universe size; keys live in [0, n).
    #[arg(long, default_value_t = DEFAULT_UNIVERSE)]
    n: u64,
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Index code; defaults to Golomb for perfect and mixture, delta otherwise.
    #[arg(long, value_enum)]
    code: Option<CodeArg>,
    /// Explicit Golomb parameter.
    #[arg(long)]
    golomb_m: Option<u64>,
    #[arg(long, value_enum, default_value_t = LambdaArg::Theoretical)]
    lambda_mode: LambdaArg,
    #[arg(long, default_value_t = DEFAULT_PROBE_CAP)]
    probe_cap: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scheme: SchemeOpts,
    #[arg(long, default_value_t = 16)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    keysets: usize,
    /// Pilot encodes used to fit `--code empirical`.
    #[arg(long, default_value_t = 2000)]
    pilot_trials: usize,
    /// Output format; inferred from the `--out` extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RoundtripArgs {
    #[command(flatten)]
    scheme: SchemeOpts,
    /// Comma-separated distinct keys.
    #[arg(long, value_delimiter = ',', required = true)]
    keys: Vec<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bounds { command: BoundsCommand::Sweep { grid, out } } => bounds_sweep(grid, out.as_deref()),
        Command::Simulate(args) => simulate(&args),
        Command::Roundtrip(args) => roundtrip(&args),
        Command::Oracle { command: OracleCommand::Verify { kmax } } => oracle_verify(kmax),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::EmptyKeySet
        | Error::KeySetTooLarge { .. }
        | Error::KeyOutOfRange { .. }
        | Error::DuplicateKey(_)
        | Error::InvalidParameter(_)
        | Error::Unsupported(_)
        | Error::EnumerationTooLarge { .. } => USAGE_ERROR,
        _ => FAILURE,
    }
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn bounds_sweep(grid: usize, out: Option<&Path>) -> Result<u8, Error> {
    if grid == 0 {
        return Err(Error::InvalidParameter("--grid must be at least 1".into()));
    }
    write_output(&sweep_csv(&sweep(&uniform_grid(grid))), out)?;
    Ok(0)
}

/// Golomb parameter when none is given: matched to `k!/k^k` for the schemes
/// built on perfect hashing, and to `2^-D` for the sampling scheme.
fn default_golomb(cfg: &SchemeConfig) -> Result<IntegerCode, Error> {
    match cfg.kind {
        SchemeKind::Pfr => {
            let scheme = Scheme::new(cfg.clone())?;
            let urn = scheme.urn().expect("sampling scheme has an urn law");
            let d = divergence_from_uniform(cfg.k, urn.entropy());
            Ok(IntegerCode::Golomb { m: golomb_parameter_for_geometric((-d).exp2()) })
        }
        _ => Ok(perfect_index_code(cfg.k)),
    }
}

fn scheme_config(opts: &SchemeOpts, k: usize, pilot_trials: usize) -> Result<SchemeConfig, Error> {
    let mode = match opts.lambda_mode {
        LambdaArg::Theoretical => LambdaMode::Theoretical,
        LambdaArg::Calibrated => LambdaMode::Calibrated,
    };
    let cfg = SchemeConfig::new(opts.scheme.into(), opts.n, k, opts.alpha)
        .with_probe_cap(opts.probe_cap)
        .with_lambda_mode(mode);
    let code = match (opts.code, opts.golomb_m) {
        (_, Some(0)) => return Err(Error::InvalidParameter("--golomb-m must be positive".into())),
        (None | Some(CodeArg::Golomb), Some(m)) => IntegerCode::Golomb { m },
        (Some(_), Some(_)) => return Err(Error::InvalidParameter("--golomb-m only applies to --code golomb".into())),
        (None, None) => return Ok(cfg),
        (Some(CodeArg::Gamma), None) => IntegerCode::EliasGamma,
        (Some(CodeArg::Delta), None) => IntegerCode::EliasDelta,
        (Some(CodeArg::Golomb), None) => default_golomb(&cfg)?,
        (Some(CodeArg::Empirical), None) => fit_empirical_code(&cfg, pilot_trials, opts.seed)?,
    };
    Ok(cfg.with_code(code))
}

fn simulate(args: &SimulateArgs) -> Result<u8, Error> {
    let cfg = scheme_config(&args.scheme, args.k, args.pilot_trials)?;
    let report = run_experiment(&ExperimentConfig::new(cfg, args.trials, args.keysets, args.scheme.seed))?;
    let format = match args.format {
        Some(FormatArg::Csv) => ReportFormat::Csv,
        Some(FormatArg::Json) => ReportFormat::Json,
        None => match args.out.as_deref().and_then(Path::extension) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        },
    };
    write_output(&render_report(&report, format)?, args.out.as_deref())?;
    Ok(0)
}

fn roundtrip(args: &RoundtripArgs) -> Result<u8, Error> {
    let keys = KeySet::new(args.scheme.n, args.keys.clone())?;
    let cfg = scheme_config(&args.scheme, keys.len(), 2000)?;
    let scheme = Scheme::new(cfg)?;
    let seed = SharedSeed::from_master(args.scheme.seed);
    let encoded = scheme.encode(&keys, &seed)?;
    let decoded = scheme.decode(&encoded.description, &seed)?;
    let restriction = decoded.restrict(&keys)?;
    if restriction != encoded.handle.restrict(&keys)? {
        return Err(Error::RoundTrip);
    }
    let mut out = String::new();
    out.push_str(&format!("scheme: {}\n", scheme.config().kind.name()));
    out.push_str(&format!("code: {}\n", scheme.config().code.name()));
    out.push_str(&format!("description: {}\n", encoded.description));
    out.push_str(&format!("bits: {}\n", encoded.description.len()));
    if let Some(index) = encoded.index {
        out.push_str(&format!("index: {index}\n"));
    }
    out.push_str(&format!("probes: {}\n", encoded.probes));
    for (key, value) in keys.keys().iter().zip(restriction.values()) {
        out.push_str(&format!("{key} -> {value}\n"));
    }
    let colliding = alpha_hash::model::collision_profile(&restriction).weight;
    out.push_str(&format!("colliding: {colliding}/{}\n", keys.len()));
    write_output(&out, None)?;
    Ok(0)
}

fn oracle_verify(kmax: usize) -> Result<u8, Error> {
    let report = oracle::verify(kmax)?;
    write_output(&report.render(), None)?;
    Ok(if report.all_passed() { 0 } else { FAILURE })
}
