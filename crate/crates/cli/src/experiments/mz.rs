use berkhyb_core::exact::LogQ;
use berkhyb_core::mz_tree::{fs_slope_identity, mz_fs_function, mz_psh_check, FsFamily, MZFunction, MZSlopeReport, MZValue};
use berkhyb_core::Q;
use rand::Rng;
use serde_json::json;

use super::to_value;
use crate::error::{CoreContext, HarnessError, Result};
use crate::manifest::{read_json, read_text, LoadedManifest, MzCheckParams, RandomFsParams};
use crate::report::Outcome;
use crate::seeds::SeedTree;

fn random_family(params: &RandomFsParams, rng: &mut impl Rng) -> berkhyb_core::Result<FsFamily> {
    let k = rng.gen_range(1..=params.max_terms);
    let d = params.denominator;
    let terms: Vec<(i64, Q)> = (0..k)
        .map(|_| {
            let n = rng.gen_range(1..=params.n_bound) * if rng.gen_bool(0.5) { 1 } else { -1 };
            (n, Q::new(rng.gen_range(-2 * d..=2 * d).into(), d.into()))
        })
        .collect();
    FsFamily::new(rng.gen_range(1..=params.m_max), &terms)
}

fn plot_slopes(out: &mut Outcome, label: &str, rep: &MZSlopeReport) {
    out.point(None, format!("{label}:s_inf"), rep.s_inf.to_f64());
    for (p, b) in &rep.padic {
        out.point(None, format!("{label}:s_{p}"), b.at_origin.to_f64());
    }
    let sum = match &rep.slope_sum {
        MZValue::Finite(v) => v.to_f64(),
        MZValue::NegInfinity => f64::NEG_INFINITY,
        MZValue::PosInfinity => f64::INFINITY,
    };
    out.point(None, format!("{label}:slope_sum"), sum);
}

fn fmt_logq(x: &LogQ) -> String {
    x.to_string()
}

pub fn mz_check(m: &LoadedManifest, s: &MzCheckParams, seeds: &SeedTree) -> Result<Outcome> {
    let mut labelled: Vec<(String, FsFamily, bool)> = Vec::new();
    for (list, required) in [(&s.families, true), (&s.witnesses, false)] {
        for rel in list {
            let path = m.resolve(rel);
            let fam: FsFamily = read_json(&path)?;
            fam.validate().map_err(|e| HarnessError::input(&path, e.to_string()))?;
            let stem = path.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_else(|| rel.clone());
            labelled.push((stem, fam, required));
        }
    }
    if let Some(params) = &s.random {
        let mut rng = seeds.rng("families");
        for k in 0..params.count {
            labelled.push((format!("random{k:02}"), random_family(params, &mut rng).ctx("mz-check")?, true));
        }
    }
    let mut out = Outcome::default();
    let mut families = Vec::new();
    let mut discrepancies = Vec::new();
    for (label, fam, required) in &labelled {
        let f = mz_fs_function(fam).ctx(label)?;
        let verdict = mz_psh_check(&f).ctx(label)?;
        let id = fs_slope_identity(fam).ctx(label)?;
        out.check(format!("psh:{label}"), verdict.psh, verdict.reasons.join(","));
        out.check(
            format!("padic_identity:{label}"),
            id.padic_identity,
            format!("sum of p-adic slopes {} with n1 = {}", fmt_logq(&id.padic_sum), id.n1),
        );
        let detail = format!("slope sum {} against m^-1 log(n2/n1) = {}", fmt_logq(&id.slope_sum), fmt_logq(&id.closed_form_sum));
        if *required {
            out.check(format!("sum_identity:{label}"), id.sum_identity, detail);
        }
        if let Some(d) = &id.s_inf_discrepancy {
            let msg = format!(
                "{label}: direct s_inf {} differs from m^-1 log n2 = {} by {}",
                fmt_logq(&id.s_inf),
                fmt_logq(&id.closed_form_s_inf),
                fmt_logq(d)
            );
            out.warnings.push(msg.clone());
            discrepancies.push(json!({ "family": label, "discrepancy": to_value(d), "message": msg }));
        }
        plot_slopes(&mut out, label, &verdict.report);
        families.push(json!({
            "label": label,
            "family": to_value(fam),
            "verdict": to_value(&verdict),
            "identity": to_value(&id),
        }));
    }
    let mut functions = Vec::new();
    for e in &s.functions {
        let path = m.resolve(&e.path);
        let f = MZFunction::from_json(&read_text(&path)?).map_err(|err| HarnessError::input(&path, err.to_string()))?;
        let verdict = mz_psh_check(&f).ctx(&e.path)?;
        let stem = path.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_else(|| e.path.clone());
        let reasons_ok = e.reasons.is_empty() || verdict.reasons == e.reasons;
        out.check(
            format!("verdict:{stem}"),
            verdict.psh == e.psh && reasons_ok,
            format!("psh = {}, reasons [{}]", verdict.psh, verdict.reasons.join(",")),
        );
        plot_slopes(&mut out, &stem, &verdict.report);
        functions.push(json!({ "label": stem, "verdict": to_value(&verdict) }));
    }
    out.result = json!({ "families": families, "functions": functions, "s_inf_discrepancies": discrepancies });
    Ok(out)
}
