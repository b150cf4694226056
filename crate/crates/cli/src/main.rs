//! `mrcode`: build, check and exercise maximally recoverable codes.
//!
//! Exit status is 0 on success, 1 when a verification or decoding step
//! fails, and 2 for usage, input or parse errors. Machine-readable output
//! goes to stdout, diagnostics to stderr.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use mrcode::code::{DEFAULT_SAMPLE_SEED, SAMPLED_SUBSETS};
use mrcode::scaling::{scaling_table, LocalityRule, SCALING_NOTE};
use mrcode::sim::simulate;
use mrcode::stream::{decode_stream, encode_stream, repair_stream, StreamError};
use mrcode::{construct, CodeSpec, ErasurePattern, MrCode, PipelineError, SpecError, VerifyMode};

#[derive(Parser)]
#[command(name = "mrcode", version, about = "Maximally recoverable codes over prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct and verify a code, writing its JSON description.
    Construct {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        q: u64,
        /// Trim to this many columns (a multiple of r + 1).
        #[arg(long)]
        target_n: Option<usize>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Re-check the maximal recoverability of a stored code.
    Verify {
        spec: PathBuf,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Encode k-symbol messages read from stdin.
    Encode(StreamArgs),
    /// Decode n-symbol words read from stdin; `?` marks an erasure.
    Decode(StreamArgs),
    /// Restore full codewords read from stdin; `?` marks an erasure.
    Repair(StreamArgs),
    /// Monte Carlo erasure simulation, printed as JSON.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tabulate code length against field size.
    Scaling {
        #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
        r: Option<u32>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Comma-separated primes.
        #[arg(long, value_delimiter = ',', required = true)]
        q_list: Vec<u64>,
        /// Print rows as JSON instead of a text table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct ModeArgs {
    /// Check every (r+1)-subset regardless of count.
    #[arg(long, conflicts_with = "sampled")]
    exhaustive: bool,
    /// Check random (r+1)-subsets plus every repair group.
    #[arg(long)]
    sampled: bool,
    #[arg(long, default_value_t = SAMPLED_SUBSETS, requires = "sampled")]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_SEED, requires = "sampled")]
    sample_seed: u64,
}

impl ModeArgs {
    fn mode(&self) -> VerifyMode {
        if self.exhaustive {
            VerifyMode::Exhaustive
        } else if self.sampled {
            VerifyMode::Sampled {
                samples: self.samples,
                seed: self.sample_seed,
            }
        } else {
            VerifyMode::Auto
        }
    }
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Comma-separated column indices erased in every block.
    #[arg(long, value_delimiter = ',')]
    erasures: Vec<usize>,
}

enum Failure {
    /// Verification or decoding failed: exit 1.
    Check(anyhow::Error),
    /// Bad usage or malformed input: exit 2.
    Input(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn check<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Check(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Construct {
            r,
            q,
            target_n,
            out,
            mode,
        } => run_construct(r, q, target_n, out.as_deref(), mode.mode()),
        Command::Verify { spec, mode } => run_verify(&spec, mode.mode()),
        Command::Encode(args) => run_stream(&args, encode_stream),
        Command::Decode(args) => run_stream(&args, decode_stream),
        Command::Repair(args) => run_stream(&args, repair_stream),
        Command::Simulate {
            spec,
            p,
            trials,
            seed,
        } => run_simulate(&spec, p, trials, seed),
        Command::Scaling {
            r,
            alpha,
            q_list,
            json,
        } => {
            let rule = match (r, alpha) {
                (Some(r), _) => LocalityRule::Fixed(r),
                (None, Some(a)) => LocalityRule::Alpha(a),
                (None, None) => unreachable!("clap requires one of --r, --alpha"),
            };
            run_scaling(rule, &q_list, json)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn pipeline_failure(e: PipelineError) -> Failure {
    match e {
        PipelineError::VerificationFailed(_) => check(e),
        _ => input(e),
    }
}

fn run_construct(
    r: u32,
    q: u64,
    target_n: Option<usize>,
    out: Option<&Path>,
    mode: VerifyMode,
) -> Outcome {
    let built = construct(r, q, target_n, mode).map_err(pipeline_failure)?;
    let code = &built.code;
    let report = &built.report;
    eprintln!(
        "constructed n = {}, k = {}, r = {}, {} groups over GF({}); {} (r+1)-subsets checked{}",
        code.len(),
        code.dimension(),
        code.locality(),
        code.group_count(),
        q,
        report.mds_subsets_checked,
        if report.sampled { " (sampled)" } else { "" },
    );
    let text = CodeSpec::from_code(code).to_json();
    match out {
        Some(path) => fs::write(path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))
            .map_err(input),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_spec(path: &Path) -> Result<CodeSpec, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)?;
    CodeSpec::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(input)
}

fn spec_failure(e: SpecError) -> Failure {
    match e {
        SpecError::Json(_) | SpecError::SchemaVersion(_) | SpecError::RaggedGenerator => input(e),
        _ => check(e),
    }
}

fn load_code(path: &Path) -> Result<MrCode, Failure> {
    load_spec(path)?.to_code().map_err(spec_failure)
}

fn run_verify(path: &Path, mode: VerifyMode) -> Outcome {
    let spec = load_spec(path)?;
    let code = spec.to_code_with_stored_generator().map_err(spec_failure)?;
    let mismatch = spec.generator_mismatch().map_err(spec_failure)?;
    let report = code.verify_mr(mode);
    let summary = serde_json::json!({
        "passed": report.passed() && mismatch.is_none(),
        "generator_matches_parameters": mismatch.is_none(),
        "report": report,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("serializes"));
    if let Some((row, col)) = mismatch {
        return Err(check(anyhow!(
            "stored generator differs from the re-derived one at row {row}, column {col}"
        )));
    }
    if !report.passed() {
        return Err(check(anyhow!(
            "{} maximal recoverability violations",
            report.violation_count
        )));
    }
    eprintln!("verified: {} (r+1)-subsets checked", report.mds_subsets_checked);
    Ok(())
}

type StreamFn = fn(&MrCode, io::StdinLock<'static>, BufWriter<io::StdoutLock<'static>>, &ErasurePattern)
    -> Result<usize, StreamError>;

fn run_stream(args: &StreamArgs, f: StreamFn) -> Outcome {
    let code = load_code(&args.spec)?;
    let erasures = ErasurePattern::new(code.len(), args.erasures.iter().copied()).map_err(input)?;
    let stdout = BufWriter::new(io::stdout().lock());
    match f(&code, io::stdin().lock(), stdout, &erasures) {
        Ok(_) => Ok(()),
        Err(e) if e.is_parse() => Err(input(e)),
        Err(e @ StreamError::Io(_)) => Err(input(e)),
        Err(e) => Err(check(e)),
    }
}

fn run_simulate(path: &Path, p: f64, trials: u64, seed: u64) -> Outcome {
    let code = load_code(path)?;
    let report = simulate(&code, p, trials, seed).map_err(input)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("serializes"));
    Ok(())
}

fn run_scaling(rule: LocalityRule, primes: &[u64], json: bool) -> Outcome {
    let rows = scaling_table(rule, primes).map_err(pipeline_failure)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let written: io::Result<()> = (|| {
        if json {
            let doc = serde_json::json!({ "rows": rows, "note": SCALING_NOTE });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializes"))
        } else {
            writeln!(out, "{:>10} {:>4} {:>6} {:>12} {:>14}", "q", "r", "n", "ln q/ln n", "bound (log)")?;
            for row in &rows {
                let bound = row
                    .length_bound_log
                    .map_or_else(|| "-".to_string(), |b| format!("{b:.3}"));
                writeln!(
                    out,
                    "{:>10} {:>4} {:>6} {:>12.3} {:>14}",
                    row.q, row.r, row.n, row.log_ratio, bound
                )?;
            }
            writeln!(out, "note: {SCALING_NOTE}")
        }
    })();
    written.map_err(input)
}
