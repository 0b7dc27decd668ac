//! The `fcs-kit` command-line interface.
//!
//! Every subcommand produces its whole output as a string before anything is
//! printed, so a failing command prints only its error message.

mod oracle;

use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::bench::{fit_log2_linear_slope, fit_loglog_slope, records_to_csv, run_bench, Algorithm};
use crate::exec::ExecConfig;
use crate::fcs::{chi_with, probabilities_from_chi, sample_counts, CountingSpec};
use crate::format::format_complex;
use crate::numerics::{dense_to_lowrank, ComplexMatrix, LowRankOperator, DEFAULT_RANK_TOL};
use crate::permanent::{permanent_lowrank, permanent_ryser};
use crate::random::{random_orthonormal, seeded};
use crate::states::{expand_product, make_fermi_sea, make_psi4, make_single_boson, ProductState};
use crate::{Error, Result};

pub use oracle::Family;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "fcs-kit", version, about = "Expectation values of non-interacting operators in product states")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Significant digits in numeric output.
    #[arg(long, global = true, default_value_t = crate::format::DEFAULT_DIGITS)]
    precision: usize,
    /// Fixed-order parallel reductions (bit-identical for any thread count).
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Permanent of a matrix file, or Per(1 + V) for a low-rank V.
    Permanent {
        /// Matrix JSON file.
        matrix: Option<PathBuf>,
        /// V as low-rank JSON, or as a dense matrix to be factorized.
        #[arg(long)]
        lowrank: Option<PathBuf>,
    },
    /// Counting generating function chi for a state and counting spec.
    Chi {
        #[command(flatten)]
        state: StateArgs,
        /// Counting spec JSON file.
        #[arg(long)]
        spec: PathBuf,
        /// Emit the count distribution over the counted modes as CSV.
        #[arg(long)]
        probs: bool,
    },
    /// Count distribution over a few modes, as CSV.
    Probs {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        spec: PathBuf,
        /// Comma-separated modes; defaults to the spec's counted modes.
        #[arg(long, value_delimiter = ',')]
        modes: Vec<usize>,
        /// Draw this many samples instead of printing the distribution.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Fast paths against brute-force references on random instances.
    OracleCompare {
        #[arg(long)]
        family: Family,
        /// `a..b` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "2..4")]
        sizes: String,
        /// Rank for the low-rank families; all ranks 1..=3 when omitted.
        #[arg(long)]
        k: Option<usize>,
        /// Random instances per size.
        #[arg(long, default_value_t = 5)]
        instances: usize,
    },
    /// Wall-clock scaling runs, CSV out, fitted slope on stderr.
    Bench {
        #[arg(long)]
        algorithm: Algorithm,
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print a product state as a single Fock-vector JSON.
    ExpandState {
        #[command(flatten)]
        state: StateArgs,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct StateArgs {
    /// Product state JSON file.
    #[arg(long)]
    state: Option<PathBuf>,
    /// `single_boson:N`, `psi4:N` or `fermi_sea:N:n:k` (random orbitals from --seed).
    #[arg(long)]
    preset: Option<String>,
}

/// Parses `a..b` (inclusive) or `a,b,c`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("invalid size list '{s}'"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

/// Builds a preset product state.
pub fn parse_preset(s: &str, seed: u64) -> Result<ProductState> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<usize> {
        parts
            .get(i)
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::Parse(format!("invalid preset '{s}'")))
    };
    match (parts[0], parts.len()) {
        ("single_boson", 2) => make_single_boson(num(1)?),
        ("psi4", 2) => make_psi4(num(1)?),
        ("fermi_sea", 4) => {
            let (n, modes, k) = (num(1)?, num(2)?, num(3)?);
            if k > modes {
                return Err(Error::InvalidInput(format!("{k} orbitals in {modes} modes")));
            }
            let psi = random_orthonormal(&mut seeded(seed), modes, k);
            make_fermi_sea(&psi, modes, n)
        }
        _ => Err(Error::Parse(format!("unknown preset '{s}'"))),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_state(args: &StateArgs, seed: u64) -> Result<ProductState> {
    match (&args.state, &args.preset) {
        (Some(path), _) => ProductState::from_json(&read(path)?),
        (None, Some(preset)) => parse_preset(preset, seed),
        (None, None) => Err(Error::Parse("give --state or --preset".into())),
    }
}

/// Low-rank JSON, or a dense matrix factorized at the default tolerance.
fn load_lowrank(path: &Path) -> Result<LowRankOperator> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("dim").is_some() {
        LowRankOperator::from_json(&text)
    } else {
        dense_to_lowrank(&ComplexMatrix::from_json(&text)?, DEFAULT_RANK_TOL)
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::GuardExceeded(_) => EXIT_GUARD,
        Error::Unsupported(_) | Error::FlavorMismatch(_) | Error::IndefiniteParity { .. } => EXIT_UNSUPPORTED,
        Error::IllConditioned { .. } => EXIT_NUMERICAL,
        _ => EXIT_PARSE,
    }
}

/// Output of a successful command: stdout text, stderr text, exit code.
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, stderr: String::new(), code: EXIT_OK }
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let exec = ExecConfig::from_env(cli.deterministic);
    let digits = cli.precision.max(1);
    match &cli.command {
        Command::Permanent { matrix, lowrank } => {
            let value = match (matrix, lowrank) {
                (_, Some(path)) => permanent_lowrank(&load_lowrank(path)?)?,
                (Some(path), None) => permanent_ryser(&ComplexMatrix::from_json(&read(path)?)?)?,
                (None, None) => return Err(Error::Parse("give a matrix file or --lowrank".into())),
            };
            Ok(Outcome::ok(format!("{}\n", format_complex(value, digits))))
        }
        Command::Chi { state, spec, probs } => {
            let state = load_state(state, cli.seed)?;
            let spec = CountingSpec::from_json(&read(spec)?)?;
            if *probs {
                let modes: Vec<usize> = spec.counted().iter().map(|c| c.mode).collect();
                let dist = probabilities_from_chi(&state, &spec, &modes, &exec)?;
                return Ok(Outcome::ok(dist.to_csv(digits)?));
            }
            let value = chi_with(&state, &spec, &exec)?;
            Ok(Outcome::ok(format!("{}\n", format_complex(value, digits))))
        }
        Command::Probs { state, spec, modes, samples } => {
            let state = load_state(state, cli.seed)?;
            let spec = CountingSpec::from_json(&read(spec)?)?;
            let modes = if modes.is_empty() { spec.counted().iter().map(|c| c.mode).collect() } else { modes.clone() };
            let dist = probabilities_from_chi(&state, &spec, &modes, &exec)?;
            let Some(n) = samples else {
                return Ok(Outcome::ok(dist.to_csv(digits)?));
            };
            let mut out = modes.iter().map(|m| format!("n{m}")).collect::<Vec<_>>().join(",");
            out.push('\n');
            for s in sample_counts(&dist, *n, cli.seed)? {
                out.push_str(&s.iter().map(ToString::to_string).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            Ok(Outcome::ok(out))
        }
        Command::OracleCompare { family, sizes, k, instances } => {
            let report = oracle::compare(*family, &parse_sizes(sizes)?, *k, *instances, cli.seed, &exec)?;
            let stdout = report.render(digits);
            Ok(Outcome { stdout, stderr: String::new(), code: if report.passed() { EXIT_OK } else { EXIT_CHECK_FAILED } })
        }
        Command::Bench { algorithm, sizes, k, reps, output } => {
            let records = parse_sizes(sizes)?
                .into_iter()
                .map(|n| run_bench(*algorithm, n, *k, *reps, cli.seed, &exec))
                .collect::<Result<Vec<_>>>()?;
            let csv = records_to_csv(&records, digits)?;
            let mut stderr = String::new();
            if let Some(slope) = fit_loglog_slope(&records) {
                stderr.push_str(&format!("loglog_slope={slope:.3}\n"));
            }
            if *algorithm == Algorithm::Ryser {
                if let Some(rate) = fit_log2_linear_slope(&records) {
                    stderr.push_str(&format!("log2_time_per_row={rate:.3}\n"));
                }
            }
            let stdout = match output {
                Some(path) => {
                    std::fs::write(path, csv)?;
                    String::new()
                }
                None => csv,
            };
            Ok(Outcome { stdout, stderr, code: EXIT_OK })
        }
        Command::ExpandState { state } => {
            let state = load_state(state, cli.seed)?;
            Ok(Outcome::ok(format!("{}\n", expand_product(&state)?.to_json())))
        }
    }
}

/// Parses `std::env::args`, runs, prints, and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
