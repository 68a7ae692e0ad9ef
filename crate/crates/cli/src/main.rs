mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lvdecomp::format::{parse_state, state_to_json, to_json};
use lvdecomp::oracle::run_verification;
use lvdecomp::product::{factorize_product, worst_defect_reduced, PRODUCT_TOL};
use lvdecomp::{decompose, leading_split, random_product_state, random_state, Error, OptimizerConfig, RegisterState};

use report::{DecompositionPayload, LeadingPayload, Payload, ProductPayload, RandomPayload, Report};

const INDEX_CONVENTION: &str = "\
State files are JSON objects {\"l\": <int>, \"amplitudes\": [[re, im], ...]} with exactly 2^l
entries. Amplitude i belongs to the basis state whose bit k (0-based, least significant
first) is binary digit k of i, so amplitudes[1] is the state with only the first bit set.
Reports label bits 1..l: vertex k+1 is bit k, and a face {1,3} has index mask 0b101.

Exit codes: 0 success, 1 input or usage error, 2 decomposition did not converge,
3 state is not a product, 4 a verification property failed.";

#[derive(Parser, Debug)]
#[command(name = "lvdecomp", version, about = "Orthogonal product decompositions of register states")]
#[command(after_long_help = INDEX_CONVENTION, after_help = INDEX_CONVENTION)]
struct Cli {
    /// Worker threads for parallel restarts [default: available parallelism]
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize a local frame and split the state into orthogonal product terms
    Decompose {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        opt: OptFlags,
    },
    /// Test whether the state is a product and factorize it if so
    CheckProduct {
        #[command(flatten)]
        io: Io,
        /// Product-test tolerance, relative to the squared norm
        #[arg(long, default_value_t = PRODUCT_TOL)]
        tol: f64,
    },
    /// Split the state into its leading vector and residual in the given basis
    Leading {
        #[command(flatten)]
        io: Io,
        /// Residual amplitudes at or below tol·‖h‖ are not counted
        #[arg(long, default_value_t = OptimizerConfig::default().zero_tol)]
        tol: f64,
    },
    /// Write a seeded random state; with --output, a report goes to stdout
    Random {
        /// Register length
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw a random product state instead of a generic one
        #[arg(long)]
        product: bool,
        /// Destination [default: stdout]
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cross-check the decomposer against independent oracles on random states
    Verify {
        /// Register length, 1 to 3
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Destination [default: stdout]
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        opt: OptFlags,
    },
}

#[derive(Args, Debug)]
struct Io {
    /// State file to read
    #[arg(long)]
    input: PathBuf,
    /// Destination [default: stdout]
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OptFlags {
    /// Amplitudes at or below tol·‖h‖ count as zero
    #[arg(long, default_value_t = OptimizerConfig::default().zero_tol)]
    tol: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().conv_eps)]
    conv_eps: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().stationarity_tol)]
    stationarity_tol: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().max_sweeps)]
    max_sweeps: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().restarts)]
    restarts: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().seed)]
    seed: u64,
}

impl OptFlags {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            max_sweeps: self.max_sweeps,
            restarts: self.restarts,
            seed: self.seed,
            conv_eps: self.conv_eps,
            stationarity_tol: self.stationarity_tol,
            zero_tol: self.tol,
            ..Default::default()
        }
    }
}

fn read_state(path: &Path) -> Result<RegisterState, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let h = parse_state(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if h.squared_norm() == 0.0 {
        return Err(format!("{}: {}", path.display(), Error::ZeroState));
    }
    Ok(h)
}

/// Writes the whole document at once; a file destination is replaced
/// atomically so readers never see a partial report.
fn emit(output: Option<&Path>, text: &str) -> Result<(), String> {
    let mut body = text.to_owned();
    body.push('\n');
    match output {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).and_then(|_| out.flush()).map_err(|e| format!("cannot write stdout: {e}"))
        }
        Some(path) => {
            let name = path.file_name().ok_or_else(|| format!("invalid output path {}", path.display()))?;
            let mut tmp_name = std::ffi::OsString::from(".");
            tmp_name.push(name);
            tmp_name.push(".tmp");
            let tmp = path.with_file_name(tmp_name);
            fs::write(&tmp, &body)
                .and_then(|_| fs::rename(&tmp, path))
                .map_err(|e| {
                    let _ = fs::remove_file(&tmp);
                    format!("cannot write {}: {e}", path.display())
                })
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    match cli.command {
        Command::Decompose { io, opt } => {
            let h = read_state(&io.input)?;
            let cfg = opt.config();
            let d = decompose(&h, &cfg).map_err(|e| e.to_string())?;
            let payload = DecompositionPayload::new(&h, &d).map_err(|e| e.to_string())?;
            let mut r = Report::new("decompose", Some(&h), Payload::Decomposition(payload));
            r.diagnostics = Some(d.diagnostics.clone());
            emit(io.output.as_deref(), &to_json(&r))?;
            Ok(if d.diagnostics.converged { 0 } else { 2 })
        }
        Command::CheckProduct { io, tol } => {
            let h = read_state(&io.input)?;
            let worst = worst_defect_reduced(&h);
            let mut payload = ProductPayload {
                l: h.len(),
                is_product: false,
                tolerance: tol,
                factorization: None,
                factors: None,
                round_trip_error: None,
                worst_defect: worst.map(Into::into),
            };
            match factorize_product(&h, tol) {
                Ok(f) => {
                    payload.is_product = true;
                    payload.round_trip_error = Some(f.reconstruct().map_err(|e| e.to_string())?.max_abs_diff(&h));
                    payload.factors = Some(f.factors());
                    payload.factorization = Some(f);
                }
                Err(Error::NotProduct(_)) => {}
                Err(e) => return Err(e.to_string()),
            }
            let code = if payload.is_product { 0 } else { 3 };
            emit(io.output.as_deref(), &to_json(&Report::new("check-product", Some(&h), Payload::Product(payload))))?;
            Ok(code)
        }
        Command::Leading { io, tol } => {
            let h = read_state(&io.input)?;
            let split = leading_split(&h).map_err(|e| e.to_string())?;
            let r = Report::new("leading", Some(&h), Payload::Leading(LeadingPayload::new(&split, tol)));
            emit(io.output.as_deref(), &to_json(&r))?;
            Ok(0)
        }
        Command::Random { l, seed, product, output } => {
            let h = if product { random_product_state(l, seed) } else { random_state(l, seed) };
            let h = h.map_err(|e| e.to_string())?;
            emit(output.as_deref(), &state_to_json(&h))?;
            if let Some(path) = output {
                let r = Report::new(
                    "random",
                    Some(&h),
                    Payload::Random(RandomPayload { l, seed, product, path: path.display().to_string() }),
                );
                emit(None, &to_json(&r))?;
            }
            Ok(0)
        }
        Command::Verify { l, trials, output, opt } => {
            let v = run_verification(l, trials, opt.seed, &opt.config()).map_err(|e| e.to_string())?;
            let passed = v.all_passed();
            emit(output.as_deref(), &to_json(&Report::new("verify", None, Payload::Verification(v))))?;
            Ok(if passed { 0 } else { 4 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
