//! `mongeampere`: classify scalar second-order PDEs `F(x, u, Du, D²u) = 0`.
//!
//! Exit codes: 0 classified consistently, 1 usage or input error,
//! 2 inconclusive, 3 criteria disagree, 4 corpus expectations not met.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mongeampere::app::{self, ClassifyOptions, EXIT_USAGE};
use mongeampere::{corpus, json};
use mongeampere_core::symbol::{DEFAULT_SAMPLES, DEFAULT_TOL};
use mongeampere_core::SampleBox;

#[derive(Parser)]
#[command(name = "mongeampere", version, about = "Complete-exceptionality and Monge-Ampère classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one equation F = 0.
    Classify(ClassifyArgs),
    /// Run a corpus file and compare against its expectations.
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Expression for F, e.g. "u11*u22-u12^2-1".
    #[arg(long)]
    pde: String,
    /// Number of independent variables (2 to 4).
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = app::DEFAULT_SEED)]
    seed: u64,
    /// Points sampled on the zero locus.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Sampling range for every jet coordinate, as lo:hi.
    #[arg(long = "box", default_value = "-2:2", value_parser = parse_box, allow_hyphen_values = true)]
    sample_box: SampleBox,
    /// Relative residual tolerance of the divisibility and fit tests.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// JSON report (default).
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Human-readable summary instead of JSON.
    #[arg(long)]
    pretty: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock duration in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long, default_value_t = app::DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Human-readable summary instead of JSON.
    #[arg(long)]
    pretty: bool,
    #[arg(long)]
    timing: bool,
}

fn parse_box(s: &str) -> Result<SampleBox, String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    SampleBox::new(lo, hi).map_err(|e| e.to_string())
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write output: {e}")),
    }
}

fn run_classify(a: ClassifyArgs) -> i32 {
    if !(a.tol > 0.0) {
        eprintln!("error: --tol must be positive");
        return EXIT_USAGE;
    }
    if a.samples == 0 {
        eprintln!("error: --samples must be positive");
        return EXIT_USAGE;
    }
    let opts = ClassifyOptions {
        seed: a.seed,
        samples: a.samples,
        sample_box: a.sample_box,
        tol: a.tol,
        timing: a.timing,
    };
    let report = match app::classify(&a.pde, a.n, &opts) {
        Ok(r) => r,
        Err(err) => {
            eprint!("{}", app::parse_error_message(&a.pde, &err));
            return EXIT_USAGE;
        }
    };
    let text = if a.pretty {
        app::render_text(&report)
    } else {
        json::to_string(&report)
    };
    if let Err(e) = emit(&text, a.out.as_deref()) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    report.exit_code
}

fn run_corpus(a: CorpusArgs) -> i32 {
    let entries = match corpus::load(&a.file) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let report = app::run_corpus(&entries, a.seed, a.timing);
    let text = if a.pretty {
        app::render_corpus_text(&report)
    } else {
        json::to_string(&report)
    };
    if let Err(e) = emit(&text, a.out.as_deref()) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    for e in report.entries.iter().filter(|e| !e.matches) {
        for d in &e.diff {
            eprintln!("mismatch: {d}");
        }
    }
    report.exit_code
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match cli.command {
        Command::Classify(a) => run_classify(a),
        Command::Corpus(a) => run_corpus(a),
    };
    ExitCode::from(code as u8)
}
