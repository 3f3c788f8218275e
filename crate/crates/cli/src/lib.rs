//! Manifest-driven experiment runner: loads inputs, dispatches to the core
//! library, stamps versioned reports and writes JSON plus tidy CSV.

pub mod error;
pub mod experiments;
pub mod manifest;
pub mod report;
pub mod seeds;

use std::path::Path;

pub use error::{HarnessError, Result};
pub use experiments::run_experiment;
pub use manifest::{load_manifest, load_suite, ExperimentManifest, Kind, LoadedManifest};
pub use report::{emit_report, RunReport, SuiteReport};

/// Process exit status for a finished run.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

/// Runs every manifest of a suite in order; nothing is written.
pub fn run_suite(manifests: &[LoadedManifest]) -> Result<Vec<RunReport>> {
    manifests.iter().map(run_experiment).collect()
}

/// Writes per-experiment reports and the suite summary once every run has finished.
pub fn emit_suite(name: &str, seed: u64, reports: &[RunReport], dir: &Path) -> Result<SuiteReport> {
    for r in reports {
        emit_report(r, dir)?;
    }
    let summary = SuiteReport::new(name, seed, reports);
    let mut text = serde_json::to_string_pretty(&summary).expect("summaries serialize");
    text.push('\n');
    report::write_atomic(&dir.join("suite.json"), &text)?;
    Ok(summary)
}
