use berkhyb_core::exact::{fmt_q, q_to_f64};
use berkhyb_core::monge_ampere::experiments::{ClnConfig, ConvergenceConfig};
use berkhyb_core::monge_ampere::{
    cln_stability_check, ma_model_metric, ma_pa_curve, same_measure, weak_convergence_experiment, AtomicMeasure,
    CurveFamily, IntersectionTable,
};
use num::Zero;
use serde::Deserialize;
use serde_json::json;

use super::to_value;
use crate::error::{CoreContext, HarnessError, Result};
use crate::manifest::{read_json, read_text, ClnParams, LoadedManifest, MaConvergeParams, MaModelParams};
use crate::report::Outcome;

fn table(path: &std::path::Path) -> Result<IntersectionTable> {
    IntersectionTable::from_json(&read_text(path)?).map_err(|e| HarnessError::input(path, e.to_string()))
}

fn family(path: &std::path::Path) -> Result<CurveFamily> {
    let f: CurveFamily = read_json(path)?;
    f.validate().map_err(|e| HarnessError::input(path, e.to_string()))?;
    Ok(f)
}

fn plot_atoms(out: &mut Outcome, prefix: &str, mu: &AtomicMeasure) {
    for a in &mu.atoms {
        out.point(a.position.as_ref().map(q_to_f64), format!("{prefix}:{}", a.label), q_to_f64(&a.mass));
    }
}

/// A model metric on a curve paired with the family it comes from.
#[derive(Deserialize)]
struct CurveInput {
    name: String,
    /// Relative to the curve file.
    table: String,
    family: CurveFamily,
}

pub fn ma_model(m: &LoadedManifest, s: &MaModelParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut tables = Vec::new();
    for rel in &s.tables {
        let t = table(&m.resolve(rel))?;
        let rep = ma_model_metric(&t).ctx(&t.name)?;
        let entry_sum = t.entries.iter().fold(num::Zero::zero(), |acc: berkhyb_core::Q, e| {
            acc + berkhyb_core::Q::from_integer(e.b.into()) * &e.intersection
        });
        let atom_sum = rep.measure.total_mass();
        let degree_ok = rep.degree_matches.unwrap_or(true);
        out.check(
            format!("total_mass:{}", t.name),
            atom_sum == entry_sum && rep.total == entry_sum && degree_ok,
            format!(
                "atoms {} entries {} degree {}",
                fmt_q(&atom_sum),
                fmt_q(&entry_sum),
                t.degree.as_ref().map(fmt_q).unwrap_or_else(|| "n/a".into())
            ),
        );
        if t.semipositive {
            out.check(format!("semipositive:{}", t.name), rep.measure.flags.is_empty(), rep.measure.flags.join("; "));
        }
        plot_atoms(&mut out, &t.name, &rep.measure);
        tables.push(json!({ "name": t.name, "report": to_value(&rep) }));
    }
    let mut curves = Vec::new();
    for rel in &s.curves {
        let path = m.resolve(rel);
        let c: CurveInput = read_json(&path)?;
        let base = path.parent().map(|p| p.to_path_buf()).unwrap_or_default();
        let t = table(&base.join(&c.table))?;
        let from_table = ma_model_metric(&t).ctx(&c.name)?;
        let potential = c.family.na_potential().map_err(|e| HarnessError::input(&path, e.to_string()))?;
        let from_slopes = ma_pa_curve(&potential, true);
        let agree = same_measure(&from_slopes, &from_table.measure);
        out.check(
            format!("dual_route:{}", c.name),
            agree && from_slopes.total_mass() == c.family.mass(),
            format!("slope jumps {:?} vs table {:?}", from_slopes.positioned(), from_table.measure.positioned()),
        );
        plot_atoms(&mut out, &format!("{}:slopes", c.name), &from_slopes);
        curves.push(json!({
            "name": c.name,
            "table": t.name,
            "potential": to_value(&potential),
            "slope_jumps": to_value(&from_slopes),
            "table_measure": to_value(&from_table.measure),
        }));
    }
    out.result = json!({ "tables": tables, "curves": curves });
    Ok(out)
}

pub fn ma_converge(m: &LoadedManifest, s: &MaConvergeParams) -> Result<Outcome> {
    let cfg = ConvergenceConfig {
        family: family(&m.resolve(&s.family))?,
        schedule: s.schedule.clone(),
        grid: s.grid.clone(),
        test_functions: s.test_functions.clone(),
        monotone_slack: s.monotone_slack,
        w1_threshold: s.w1_threshold,
    };
    let rep = weak_convergence_experiment(&cfg).ctx("ma-converge")?;
    let mut out = Outcome::default();
    let w1s: Vec<String> = rep.rows.iter().map(|r| format!("{:.4e}", r.w1)).collect();
    out.check("w1_non_increasing", rep.monotone, format!("W1 along the schedule: {}", w1s.join(", ")));
    if let (Some(th), Some(last)) = (s.w1_threshold, rep.rows.last()) {
        out.check("w1_threshold", last.w1 <= th, format!("W1 {:.4e} at |t|={:e}, threshold {th:e}", last.w1, last.t));
    }
    for r in &rep.rows {
        out.point(Some(r.t), "w1", r.w1);
        out.point(Some(r.t), "mass", r.mass);
        out.point(Some(r.t), "leakage", r.leakage);
        for (id, e) in rep.test_ids.iter().zip(&r.test_errors) {
            out.point(Some(r.t), format!("test:{id}"), *e);
        }
    }
    out.warnings = rep.warnings.clone();
    out.result = to_value(&rep);
    Ok(out)
}

pub fn cln(m: &LoadedManifest, s: &ClnParams) -> Result<Outcome> {
    let cfg = ClnConfig {
        family: family(&m.resolve(&s.family))?,
        perturb: s.perturb.clone(),
        deltas: s.deltas.clone(),
        residual_tol: s.residual_tol,
    };
    let rep = cln_stability_check(&cfg).ctx("cln")?;
    let mut out = Outcome::default();
    out.check(
        "antisymmetric",
        rep.rows.iter().all(|r| r.antisymmetric),
        "swapping the measures negates every difference",
    );
    out.check(
        "zero_at_zero",
        rep.rows.iter().filter(|r| r.delta.is_zero()).all(|r| r.difference.is_zero()),
        "no perturbation, no difference",
    );
    out.check(
        "linear_fit",
        rep.residual <= s.residual_tol,
        format!("C = {:.6}, residual {:.3e}, tolerance {:.3e}", rep.fitted_constant, rep.residual, s.residual_tol),
    );
    for r in &rep.rows {
        out.point(Some(q_to_f64(&r.delta)), "difference", q_to_f64(&r.difference));
        out.point(Some(q_to_f64(&r.delta)), "sup_diff", q_to_f64(&r.sup_diff));
    }
    out.point(None, "fitted_constant", rep.fitted_constant);
    out.result = to_value(&rep);
    Ok(out)
}
