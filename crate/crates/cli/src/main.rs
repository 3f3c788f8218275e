use std::path::PathBuf;
use std::process::ExitCode;

use berkhyb::{
    emit_report, emit_suite, load_manifest, load_suite, run_experiment, run_suite, HarnessError, Kind, RunReport,
    EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_PASS,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "berkhyb", version, about = "Run berkhyb experiment manifests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory.
    #[arg(long, env = "BERKHYB_OUT", default_value = "berkhyb-out")]
    out: PathBuf,
    /// Overrides the manifest seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    ValEval(RunArgs),
    Retract(RunArgs),
    NaLimit(RunArgs),
    MaModel(RunArgs),
    MaConverge(RunArgs),
    MzCheck(RunArgs),
    Lelong(RunArgs),
    RhoR(RunArgs),
    PathLimit(RunArgs),
    LseGap(RunArgs),
    Cln(RunArgs),
    /// Runs every manifest listed in a suite file.
    Suite(RunArgs),
}

impl Command {
    fn split(self) -> (Option<Kind>, RunArgs) {
        match self {
            Command::ValEval(a) => (Some(Kind::ValEval), a),
            Command::Retract(a) => (Some(Kind::Retract), a),
            Command::NaLimit(a) => (Some(Kind::NaLimit), a),
            Command::MaModel(a) => (Some(Kind::MaModel), a),
            Command::MaConverge(a) => (Some(Kind::MaConverge), a),
            Command::MzCheck(a) => (Some(Kind::MzCheck), a),
            Command::Lelong(a) => (Some(Kind::Lelong), a),
            Command::RhoR(a) => (Some(Kind::RhoR), a),
            Command::PathLimit(a) => (Some(Kind::PathLimit), a),
            Command::LseGap(a) => (Some(Kind::LseGap), a),
            Command::Cln(a) => (Some(Kind::Cln), a),
            Command::Suite(a) => (None, a),
        }
    }
}

fn summarize(r: &RunReport) {
    let status = if r.passed { "pass" } else { "FAIL" };
    eprintln!("{} [{}]: {status}", r.name, r.kind.as_str());
    for c in r.failed_checks() {
        eprintln!("  failed {}: {}", c.name, c.detail);
    }
}

fn run(kind: Option<Kind>, args: &RunArgs) -> Result<bool, HarnessError> {
    match kind {
        Some(kind) => {
            let m = load_manifest(&args.manifest, args.seed)?;
            let found = m.manifest.experiment.kind();
            if found != kind {
                return Err(HarnessError::input(
                    &args.manifest,
                    format!("manifest describes `{}`, not `{}`", found.as_str(), kind.as_str()),
                ));
            }
            let report = run_experiment(&m)?;
            emit_report(&report, &args.out)?;
            summarize(&report);
            Ok(report.passed)
        }
        None => {
            let (suite, manifests) = load_suite(&args.manifest, args.seed)?;
            let reports = run_suite(&manifests)?;
            let summary = emit_suite(&suite.name, suite.seed, &reports, &args.out)?;
            reports.iter().for_each(summarize);
            Ok(summary.passed)
        }
    }
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().command.split();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(EXIT_INPUT_ERROR as u8);
        }
    }
    let code = match run(kind, &args) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
