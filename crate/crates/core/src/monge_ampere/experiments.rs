//! Weak convergence of fibre measures and the CLN-type stability sweep.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::atomic::{ma_pa_curve, pairing, AtomicMeasure};
use super::family::CurveFamily;
use super::grid::{ma_complex_curve, pushforward_log_radius, GridConfig};
use super::line::{w1, LineMeasure};
use crate::error::{Error, Result};
use crate::exact::{q_to_f64, rat, Q};

/// Bounded piecewise-affine test functions on the valuation line.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TestFunction {
    /// `max(0, 1 − |u − center|/width)`.
    Tent { center: f64, width: f64 },
    /// `clamp(u − center, −1, 1)`.
    Ramp { center: f64 },
}

impl TestFunction {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            TestFunction::Tent { center, width } => (1.0 - (u - center).abs() / width).max(0.0),
            TestFunction::Ramp { center } => (u - center).clamp(-1.0, 1.0),
        }
    }

    pub fn id(&self) -> String {
        match self {
            TestFunction::Tent { center, width } => format!("tent({center},{width})"),
            TestFunction::Ramp { center } => format!("ramp({center})"),
        }
    }
}

pub fn default_test_functions() -> Vec<TestFunction> {
    let mut out: Vec<TestFunction> =
        [-1.5, -1.0, -0.5, 0.0, 0.5].iter().map(|c| TestFunction::Tent { center: *c, width: 0.5 }).collect();
    out.extend([-1.0, -0.5, 0.0].iter().map(|c| TestFunction::Ramp { center: *c }));
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub family: CurveFamily,
    /// Values of `|t|`, largest first.
    pub schedule: Vec<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_test_functions")]
    pub test_functions: Vec<TestFunction>,
    #[serde(default = "default_slack")]
    pub monotone_slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1_threshold: Option<f64>,
}

fn default_slack() -> f64 {
    1e-12
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub t: f64,
    pub w1: f64,
    pub mass: f64,
    pub leakage: f64,
    pub min_cell: f64,
    pub test_errors: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub limit: AtomicMeasure,
    pub test_ids: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
    pub monotone: bool,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares the pushed-forward fibre measures with the slope-jump measure of the
/// non-archimedean limit along the schedule.
pub fn weak_convergence_experiment(cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    cfg.family.validate()?;
    cfg.grid.validate()?;
    if cfg.schedule.is_empty() {
        return Err(Error::config("empty t schedule"));
    }
    if cfg.schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::config("schedule must be strictly decreasing in |t|"));
    }
    let limit = ma_pa_curve(&cfg.family.na_potential()?, true);
    let limit_line: LineMeasure = limit.to_line_measure();
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &t in &cfg.schedule {
        let ma = ma_complex_curve(&cfg.family, t, &cfg.grid)?;
        let push = pushforward_log_radius(&ma);
        warnings.extend(push.warnings.iter().map(|w| format!("|t|={t:e}: {w}")));
        let test_errors = cfg
            .test_functions
            .iter()
            .map(|f| (push.measure.integrate(|u| f.eval(u)) - limit_line.integrate(|u| f.eval(u))).abs())
            .collect();
        rows.push(ConvergenceRow {
            t,
            w1: w1(&push.measure, &limit_line)?,
            mass: push.mass,
            leakage: push.leakage,
            min_cell: ma.charts.iter().map(|g| g.min_cell).fold(f64::INFINITY, f64::min),
            test_errors,
        });
    }
    let mut failures = Vec::new();
    let mut monotone = true;
    for w in rows.windows(2) {
        if w[1].w1 > w[0].w1 + cfg.monotone_slack {
            monotone = false;
            failures.push(format!(
                "W1 increased from {:.3e} at |t|={:e} to {:.3e} at |t|={:e}",
                w[0].w1, w[0].t, w[1].w1, w[1].t
            ));
        }
    }
    if let (Some(th), Some(last)) = (cfg.w1_threshold, rows.last()) {
        if last.w1 > th {
            failures.push(format!("W1 {:.3e} at |t|={:e} exceeds {th:e}", last.w1, last.t));
        }
    }
    Ok(ConvergenceReport {
        limit,
        test_ids: cfg.test_functions.iter().map(|f| f.id()).collect(),
        rows,
        monotone,
        failures,
        warnings,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClnConfig {
    pub family: CurveFamily,
    /// Indices of the terms whose `t`-exponent is shifted by `δ`.
    pub perturb: Vec<usize>,
    #[serde(with = "crate::exact::rat_vec")]
    pub deltas: Vec<Q>,
    #[serde(default = "default_residual")]
    pub residual_tol: f64,
}

fn default_residual() -> f64 {
    0.05
}

#[derive(Clone, Debug, Serialize)]
pub struct ClnRow {
    #[serde(with = "rat")]
    pub delta: Q,
    /// `∫(φ−φ′)MA(φ) − ∫(φ−φ′)MA(φ′)`.
    #[serde(with = "rat")]
    pub difference: Q,
    /// Same pairing with the two measures exchanged.
    #[serde(with = "rat")]
    pub swapped: Q,
    #[serde(with = "rat")]
    pub sup_diff: Q,
    pub antisymmetric: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClnReport {
    pub rows: Vec<ClnRow>,
    pub fitted_constant: f64,
    pub residual: f64,
    pub failures: Vec<String>,
}

impl ClnReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Pairing differences under perturbation of the constants, fitted by `C·δ`.
pub fn cln_stability_check(cfg: &ClnConfig) -> Result<ClnReport> {
    cfg.family.validate()?;
    if cfg.perturb.is_empty() {
        return Err(Error::config("no perturbed terms"));
    }
    for &i in &cfg.perturb {
        if i >= cfg.family.terms.len() {
            return Err(Error::InvalidIndex { index: i, len: cfg.family.terms.len() });
        }
    }
    if cfg.deltas.iter().any(|d| d.is_negative()) {
        return Err(Error::config("perturbation sizes must be non-negative"));
    }
    let base = cfg.family.na_potential()?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for delta in &cfg.deltas {
        let mut fam = cfg.family.clone();
        for &i in &cfg.perturb {
            fam.terms[i].t_exponent += delta;
        }
        let moved = fam.na_potential()?;
        let diff = base.sub(&moved);
        let sup_diff = diff.sup_abs().ok_or_else(|| Error::config("perturbation changed the degree"))?;
        let difference = pairing(&diff, &base) - pairing(&diff, &moved);
        let swapped = pairing(&diff, &moved) - pairing(&diff, &base);
        let antisymmetric = swapped == -&difference;
        if !antisymmetric {
            failures.push(format!("antisymmetry fails at δ={delta}"));
        }
        if delta.is_zero() && !difference.is_zero() {
            failures.push("non-zero difference at δ=0".into());
        }
        rows.push(ClnRow { delta: delta.clone(), difference, swapped, sup_diff, antisymmetric });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.delta.is_zero())
        .map(|r| (q_to_f64(&r.delta), q_to_f64(&r.difference).abs()))
        .collect();
    let den: f64 = pts.iter().map(|(d, _)| d * d).sum();
    let fitted_constant = if den > 0.0 { pts.iter().map(|(d, y)| d * y).sum::<f64>() / den } else { 0.0 };
    let residual = pts
        .iter()
        .map(|(d, y)| {
            let pred = fitted_constant * d;
            if pred > 0.0 {
                (y - pred).abs() / pred
            } else if *y > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    if residual > cfg.residual_tol {
        failures.push(format!("linear fit residual {residual:.3e} exceeds {:.3e}", cfg.residual_tol));
    }
    Ok(ClnReport { rows, fitted_constant, residual, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};
    use crate::monge_ampere::family::{Combine, CurveTerm};

    fn single_kink() -> CurveFamily {
        CurveFamily {
            name: "single-kink".into(),
            degree: 1,
            m: 1,
            terms: vec![
                CurveTerm { power: 0, t_exponent: qi(0), modulus: 1.0 },
                CurveTerm { power: 1, t_exponent: qi(1), modulus: 1.0 },
            ],
            combine: Combine::Max,
        }
    }

    #[test]
    fn cln_single_kink_is_linear() {
        let cfg = ClnConfig {
            family: single_kink(),
            perturb: vec![1],
            deltas: vec![qi(0), q(1, 10), q(1, 100), q(1, 1000), q(1, 10000)],
            residual_tol: 0.05,
        };
        let r = cln_stability_check(&cfg).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.rows[1].difference, q(-1, 10));
        assert!((r.fitted_constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_kink_converges() {
        let cfg = ConvergenceConfig {
            family: single_kink(),
            schedule: vec![1e-2, 1e-3],
            grid: GridConfig { n_radial: 128, n_angular: 8, ..Default::default() },
            test_functions: default_test_functions(),
            monotone_slack: 1e-12,
            w1_threshold: Some(0.05),
        };
        let r = weak_convergence_experiment(&cfg).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn lse_w1_matches_closed_form() {
        let mut fam = single_kink();
        fam.combine = Combine::Lse;
        let cfg = ConvergenceConfig {
            family: fam,
            schedule: vec![1e-3],
            grid: GridConfig { n_radial: 1024, n_angular: 4, ..Default::default() },
            test_functions: vec![],
            monotone_slack: 1e-12,
            w1_threshold: None,
        };
        let r = weak_convergence_experiment(&cfg).unwrap();
        // E|log ρ| = log 2 for the Fubini-Study density of ρ = |tz|
        let oracle = std::f64::consts::LN_2 / -(1e-3f64).ln();
        assert!((r.rows[0].w1 - oracle).abs() < 2e-3, "{} vs {}", r.rows[0].w1, oracle);
    }
}
