use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use local_torsion::arith::is_prime;
use local_torsion::classnum::hurwitz;
use local_torsion::counting::{trace_of_frobenius, CountingError, DEFAULT_BSGS_THRESHOLD};
use local_torsion::lifttest::{nu_brute, verify_deuring_all, DEFAULT_NU_BUDGET};
use local_torsion::survey::{
    bundled_curve, construct_curve, find_curve, heuristic_sum, load_curves, local_torsion_primes,
    sweep, verify_50a1, write_sweep_csv, Sampling, SurveyError, SurveyOptions,
    DEFAULT_SWEEP_BUDGET,
};

const EXIT_COMPUTATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ltorsion",
    version,
    about = "Local torsion primes of elliptic curves"
)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the subcommand's size cap.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Trace of Frobenius of y^2 = x^3 + a x + b over F_p.
    Ap {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long)]
        p: u64,
    },
    /// Local torsion primes of a curve from a CSV file.
    Torsion {
        /// CSV with header label,a1,a2,a3,a4,a6 (default: the bundled models).
        #[arg(long)]
        curve_file: Option<PathBuf>,
        #[arg(long)]
        label: String,
        #[arg(long)]
        xmax: u64,
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Test every admissible degree and require agreement.
        #[arg(long)]
        all_degrees: bool,
    },
    /// Exhaustive count of lifts with full p-rank.
    Nu {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        d: u32,
    },
    /// Pair counts by trace against Hurwitz class numbers.
    Deuring {
        #[arg(long)]
        p: u64,
    },
    /// Six times the Hurwitz class number H(n).
    Hurwitz {
        #[arg(long)]
        n: u64,
    },
    /// Local torsion counts over the box |a| <= A, |b| <= B.
    Sweep {
        #[arg(long = "A")]
        big_a: u64,
        #[arg(long = "B")]
        big_b: u64,
        #[arg(long)]
        xmax: u64,
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Sample this many curves instead of the whole box.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        all_degrees: bool,
    },
    /// A curve with every listed prime as a local torsion prime.
    Construct {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
    },
    /// Mod-15 congruence check for 50A1.
    #[command(name = "verify-50a1")]
    Verify50a1 {
        #[arg(long)]
        xmax: u64,
    },
    /// sum over p <= xmax of 1/(4 p^(3/2)).
    Heuristic {
        #[arg(long)]
        xmax: u64,
    },
}

#[derive(Debug)]
enum CliError {
    Survey(SurveyError),
    Counting(CountingError),
    Lift(local_torsion::lifttest::LiftError),
    Invalid(String),
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Survey(SurveyError::BudgetExceeded { .. }) => "BudgetExceeded",
            CliError::Lift(local_torsion::lifttest::LiftError::BudgetExceeded { .. }) => {
                "BudgetExceeded"
            }
            CliError::Survey(SurveyError::EmptyFamily) => "EmptyFamily",
            CliError::Survey(SurveyError::NotPrime(_)) => "NotPrime",
            CliError::Survey(SurveyError::PrimeTooSmall(_)) => "PrimeTooSmall",
            CliError::Survey(SurveyError::DuplicatePrime(_)) => "DuplicatePrime",
            CliError::Survey(SurveyError::TooManyPrimes(_)) => "TooManyPrimes",
            CliError::Survey(SurveyError::NoTargetCurve(_)) => "NoTargetCurve",
            CliError::Survey(SurveyError::DegreeInconsistency(_)) => "DegreeInconsistency",
            CliError::Survey(SurveyError::UnknownCurve(_)) => "UnknownCurve",
            CliError::Counting(CountingError::SingularCurve) => "SingularCurve",
            CliError::Survey(_) | CliError::Counting(_) | CliError::Lift(_) => "ComputationError",
            CliError::Invalid(_) => "InvalidArgument",
            CliError::Io(_) => "IoError",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Survey(e) => e.to_string(),
            CliError::Counting(e) => e.to_string(),
            CliError::Lift(e) => e.to_string(),
            CliError::Invalid(m) | CliError::Io(m) => m.clone(),
        }
    }
}

impl From<SurveyError> for CliError {
    fn from(e: SurveyError) -> Self {
        CliError::Survey(e)
    }
}

impl From<CountingError> for CliError {
    fn from(e: CountingError) -> Self {
        CliError::Counting(e)
    }
}

impl From<local_torsion::lifttest::LiftError> for CliError {
    fn from(e: local_torsion::lifttest::LiftError) -> Self {
        CliError::Lift(e)
    }
}

enum Output {
    Json(Value),
    Text(String),
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Ap { a, b, p } => {
            if !is_prime(p) || p < 5 {
                return Err(CliError::Invalid(format!("p = {p} must be a prime >= 5")));
            }
            let (a, b) = (a.rem_euclid(p as i64) as u64, b.rem_euclid(p as i64) as u64);
            let t = trace_of_frobenius(a, b, p, DEFAULT_BSGS_THRESHOLD)?;
            Ok(Output::Json(json!({ "p": p, "ap": t.ap })))
        }
        Command::Torsion {
            curve_file,
            label,
            xmax,
            d,
            all_degrees,
        } => {
            let g = match curve_file {
                Some(path) => {
                    let file = File::open(&path)
                        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    find_curve(&load_curves(file)?, &label)?
                }
                None => bundled_curve(&label)?,
            };
            let options = SurveyOptions {
                all_degrees,
                ..SurveyOptions::default()
            };
            Ok(Output::Json(to_json(&local_torsion_primes(
                &g, xmax, d, &options,
            )?)))
        }
        Command::Nu { p, d } => {
            if !is_prime(p) || p < 5 {
                return Err(CliError::Invalid(format!("p = {p} must be a prime >= 5")));
            }
            let rec = nu_brute(p, d, cli.budget.unwrap_or(DEFAULT_NU_BUDGET))?;
            Ok(Output::Json(to_json(&rec)))
        }
        Command::Deuring { p } => {
            if !is_prime(p) || p < 5 {
                return Err(CliError::Invalid(format!("p = {p} must be a prime >= 5")));
            }
            let rows: Vec<Value> = verify_deuring_all(p)?
                .iter()
                .map(|c| {
                    json!({
                        "r": c.r,
                        "unitPairs": c.count,
                        "allPairs": c.count_all_pairs,
                        "sixH": c.six_h,
                        "unitsMatch": c.units_match(),
                        "allPairsMatchHalf": c.all_pairs_match_half(),
                    })
                })
                .collect();
            Ok(Output::Json(json!({ "p": p, "traces": rows })))
        }
        Command::Hurwitz { n } => {
            let v = hurwitz(n);
            Ok(Output::Json(json!({ "n": n, "sixH": v.six_times_h })))
        }
        Command::Sweep {
            big_a,
            big_b,
            xmax,
            d,
            sample,
            format,
            all_degrees,
        } => {
            let sampling = sample.map_or(Sampling::All, Sampling::Random);
            let options = SurveyOptions {
                all_degrees,
                ..SurveyOptions::default()
            };
            let budget = cli.budget.unwrap_or(DEFAULT_SWEEP_BUDGET);
            let report = sweep(big_a, big_b, xmax, d, sampling, budget, &options)?;
            match format {
                Format::Json => Ok(Output::Json(to_json(&report))),
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_sweep_csv(&report, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
                    Ok(Output::Text(String::from_utf8(buf).expect("csv is utf-8")))
                }
            }
        }
        Command::Construct { primes } => Ok(Output::Json(to_json(&construct_curve(&primes)?))),
        Command::Verify50a1 { xmax } => Ok(Output::Json(to_json(&verify_50a1(xmax)?))),
        Command::Heuristic { xmax } => Ok(Output::Json(
            json!({ "xmax": xmax, "sum": heuristic_sum(xmax) }),
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("ltorsion: {e}");
        }
    }
    let mut stdout = io::stdout().lock();
    match run(cli) {
        Ok(Output::Json(v)) => {
            let _ = writeln!(stdout, "{v}");
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            let _ = write!(stdout, "{t}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ltorsion: {}", e.message());
            let _ = writeln!(
                stdout,
                "{}",
                json!({ "error": e.kind(), "message": e.message() })
            );
            ExitCode::from(EXIT_COMPUTATION)
        }
    }
}
