mod analytic;
mod measures;
mod mz;
mod skeleton;

use std::path::Path;

use berkhyb_core::valuation::LaurentSeriesData;

use crate::error::{HarnessError, Result};
use crate::manifest::{read_json, read_text, Experiment, LoadedManifest};
use crate::report::{Outcome, RunReport};
use crate::seeds::SeedTree;

/// Runs one manifest; nothing is written.
pub fn run_experiment(m: &LoadedManifest) -> Result<RunReport> {
    let name = &m.manifest.name;
    let seeds = SeedTree::new(m.manifest.seed, name);
    let outcome: Outcome = match &m.manifest.experiment {
        Experiment::ValEval(s) => skeleton::val_eval(m, s, &seeds)?,
        Experiment::Retract(s) => skeleton::retract(m, s, &seeds)?,
        Experiment::NaLimit(s) => skeleton::na_limit(m, s)?,
        Experiment::LseGap(s) => skeleton::lse_gap(s, &seeds),
        Experiment::MaModel(s) => measures::ma_model(m, s)?,
        Experiment::MaConverge(s) => measures::ma_converge(m, s)?,
        Experiment::Cln(s) => measures::cln(m, s)?,
        Experiment::MzCheck(s) => mz::mz_check(m, s, &seeds)?,
        Experiment::Lelong(s) => analytic::lelong(m, s)?,
        Experiment::RhoR(s) => analytic::rho_r(m, s, &seeds)?,
        Experiment::PathLimit(s) => analytic::path_limit(m, s)?,
    };
    Ok(RunReport::new(name, m.manifest.experiment.kind(), m.manifest.seed, m.echo(), outcome))
}

fn laurent(path: &Path) -> Result<LaurentSeriesData> {
    read_json(path)
}

fn models(path: &Path) -> Result<berkhyb_core::dual_complex::ModelSet> {
    berkhyb_core::dual_complex::ModelSet::from_json(&read_text(path)?)
        .map_err(|e| HarnessError::input(path, e.to_string()))
}

fn to_value<T: serde::Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("results serialize")
}
