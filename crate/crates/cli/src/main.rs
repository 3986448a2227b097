//! `klap`: reproducible experiments around sums of `Kl₂(p;q)` over primes.
//!
//! Exit codes: 0 ok, 1 numeric or contract failure, 2 usage error. Errors are
//! reported on stderr as a single JSON line.

mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use klap::Error;
use serde::Serialize;

use commands::Outcome;
use output::{envelope, error_record, render_json, write_atomic, VERSION};

#[derive(Debug, Parser)]
#[command(name = "klap", version = VERSION, about = "Kloosterman sums over primes in arithmetic progressions")]
struct Cli {
    /// Directory for default output paths.
    #[arg(long, global = true, env = "KLAP_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Main artifact path; defaults to `<out-dir>/<command>.<format>`.
    #[arg(long = "report", global = true)]
    report: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Leave the timestamp out of reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// All-n Kl_m spectrum with moment and Weil-bound checks.
    Spectrum(commands::SpectrumArgs),
    /// Fourier and Voronoi transforms of shifted Kloosterman kernels vs closed forms.
    TransformCheck(commands::TransformCheckArgs),
    /// Both sides of the tempered Voronoi summation identity.
    VoronoiCheck(commands::VoronoiArgs),
    /// Non-stationary decay of the oscillatory weight transforms by region.
    OscintReport(commands::OscintArgs),
    /// Stationary-phase main term checks on the stationary box.
    StationaryReport(commands::StationaryArgs),
    /// Bilinear forms with Kloosterman kernels against their envelopes.
    BilinearSweep(commands::BilinearArgs),
    /// Sum of Kl_2(p;q) over primes in a progression.
    PrimeSum(commands::PrimeSumArgs),
    /// Heath-Brown identity reconstruction of the von Mangoldt function.
    HbCheck(commands::HbArgs),
    /// Exact certification of the exponent optimization.
    ExponentCertify(commands::ExponentArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::TransformCheck(_) => "transform-check",
            Command::VoronoiCheck(_) => "voronoi-check",
            Command::OscintReport(_) => "oscint-report",
            Command::StationaryReport(_) => "stationary-report",
            Command::BilinearSweep(_) => "bilinear-sweep",
            Command::PrimeSum(_) => "prime-sum",
            Command::HbCheck(_) => "hb-check",
            Command::ExponentCertify(_) => "exponent-certify",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(PathBuf, std::io::Error),
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Core(e) => e.kind(),
            Failure::Io(..) => "io",
        }
    }

    fn exit(&self) -> u8 {
        match self {
            Failure::Core(Error::Usage(_)) => 2,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.message().to_string(),
            Failure::Io(p, e) => format!("{}: {e}", p.display()),
        }
    }
}

/// Echo of every setting that influences the output (paths excluded).
#[derive(Serialize)]
struct ConfigEcho<'a> {
    format: Format,
    threads: Option<usize>,
    #[serde(flatten)]
    command: &'a Command,
}

fn dispatch(cli: &Cli) -> Result<Outcome, Error> {
    let seed = cli.seed;
    match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::TransformCheck(a) => commands::transform_check(a),
        Command::VoronoiCheck(a) => commands::voronoi_check(a, seed),
        Command::OscintReport(a) => commands::oscint_report(a),
        Command::StationaryReport(a) => commands::stationary_report(a),
        Command::BilinearSweep(a) => commands::bilinear_sweep(a, seed),
        Command::PrimeSum(a) => commands::prime_sum(a),
        Command::HbCheck(a) => commands::hb_check(a, seed),
        Command::ExponentCertify(a) => commands::exponent_certify(a, seed),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write_atomic(path, bytes).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Core(Error::Usage("--threads must be positive".into())));
        }
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let name = cli.command.name();
    let outcome = dispatch(cli).map_err(Failure::Core)?;
    let ext = match cli.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let main_path = cli
        .report
        .clone()
        .unwrap_or_else(|| cli.out_dir.join(format!("{name}.{ext}")));
    let echo = ConfigEcho {
        format: cli.format,
        threads: cli.threads,
        command: &cli.command,
    };
    let report = envelope(name, cli.seed, &echo, outcome.passed, &outcome.result, !cli.no_timestamp)
        .map_err(|e| Failure::Core(Error::Numerics(e.to_string())))?;
    let report = render_json(&report);
    match cli.format {
        Format::Json => write(&main_path, report.as_bytes())?,
        Format::Csv => {
            let table = outcome.table.as_ref().ok_or_else(|| {
                Failure::Core(Error::Usage(format!("{name} has no tabular output; use --format json")))
            })?;
            write(&main_path, table.render().as_bytes())?;
            write(&main_path.with_extension("json"), report.as_bytes())?;
        }
    }
    if let Some((path, bytes)) = &outcome.blob {
        write(path, bytes)?;
    }
    println!("{} -> {}", outcome.summary, main_path.display());
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let msg = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("{}", error_record("usage", msg));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("{}", error_record(f.kind(), &f.message()));
            ExitCode::from(f.exit())
        }
    }
}
