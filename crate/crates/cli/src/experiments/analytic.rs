use berkhyb_core::exact::fmt_q;
use berkhyb_core::hybrid::{hybrid_path_limit, lelong_estimate, rho_r_transform, RadialSampling, RhoDirection};
use berkhyb_core::valuation::LaurentSeriesData;
use num_complex::Complex64;
use rand::Rng;
use serde_json::json;

use super::{laurent, to_value};
use crate::error::{CoreContext, HarnessError, Result};
use crate::manifest::{LelongParams, LoadedManifest, PathLimitParams, RhoRParams};
use crate::report::Outcome;
use crate::seeds::SeedTree;

fn log_abs<'a>(f: &'a LaurentSeriesData, path: &std::path::Path) -> Result<impl Fn(Complex64) -> f64 + Sync + 'a> {
    if f.vars().len() != 1 || f.vars()[0] != "t" || f.has_tag_coefficients() || f.is_zero() {
        return Err(HarnessError::input(path, "expected non-zero Laurent data in t with explicit coefficients"));
    }
    Ok(move |t: Complex64| f.eval_c64(&[t]).map(|v| v.norm().ln()).unwrap_or(f64::NAN))
}

pub fn lelong(m: &LoadedManifest, s: &LelongParams) -> Result<Outcome> {
    let path = m.resolve(&s.function);
    let f = laurent(&path)?;
    let phi = log_abs(&f, &path)?;
    let radii = RadialSampling::log_radii(s.radii.start_decade, s.radii.end_decade, s.radii.per_decade);
    let base = RadialSampling::from_fn(&phi, radii.clone(), s.angles).ctx("lelong")?;
    let est = lelong_estimate(&base).ctx("lelong")?;
    let mut out = Outcome::default();
    if let Some(expected) = s.expected {
        out.check(
            "lelong_number",
            (est.estimate - expected).abs() <= s.tolerance,
            format!("estimate {:.9} against {expected}, tolerance {:e}", est.estimate, s.tolerance),
        );
    }
    for (r, v) in base.radii.iter().zip(&base.values) {
        out.point(Some(r.ln()), "sup", *v);
        out.point(Some(r.ln()), "fit", est.intercept + est.estimate * r.ln());
    }
    out.point(None, "fit_slope", est.estimate);
    out.point(None, "fit_intercept", est.intercept);
    let mut perturbed = Vec::new();
    for (k, p) in s.perturbations.iter().enumerate() {
        let sampling = RadialSampling::from_fn(|t| phi(t) + p.eval(t), radii.clone(), s.angles).ctx("lelong")?;
        let e = lelong_estimate(&sampling).ctx("lelong")?;
        out.check(
            format!("perturbation_invariance:{k}"),
            (e.estimate - est.estimate).abs() <= s.tolerance,
            format!("perturbed estimate {:.9}, unperturbed {:.9}", e.estimate, est.estimate),
        );
        for (r, v) in sampling.radii.iter().zip(&sampling.values) {
            out.point(Some(r.ln()), format!("sup_perturbed:{k}"), *v);
        }
        out.point(None, format!("fit_slope_perturbed:{k}"), e.estimate);
        out.warnings.extend(e.warnings.iter().map(|w| format!("perturbation {k}: {w}")));
        perturbed.push(json!({ "perturbation": to_value(p), "estimate": to_value(&e) }));
    }
    out.warnings.extend(est.warnings.iter().cloned());
    out.result = json!({ "estimate": to_value(&est), "sampling": to_value(&base), "perturbed": perturbed });
    Ok(out)
}

pub fn rho_r(m: &LoadedManifest, s: &RhoRParams, seeds: &SeedTree) -> Result<Outcome> {
    let path = m.resolve(&s.function);
    let f = laurent(&path)?;
    let phi = log_abs(&f, &path)?;
    let mut rng = seeds.rng("samples");
    let samples: Vec<(Complex64, f64)> = (0..s.count)
        .map(|_| {
            let rho = 10f64.powf(rng.gen_range(s.min_log10..s.max_log10));
            let t = Complex64::from_polar(rho, rng.gen_range(0.0..std::f64::consts::TAU));
            (t, phi(t))
        })
        .collect();
    let forward = rho_r_transform(&samples, s.r, RhoDirection::Forward).ctx("rho-r")?;
    let back = rho_r_transform(&forward, s.r, RhoDirection::Inverse).ctx("rho-r")?;
    let worst = samples
        .iter()
        .zip(&back)
        .map(|(a, b)| (a.1 - b.1).abs() / (1.0 + a.1.abs()))
        .fold(0.0, f64::max);
    let mut out = Outcome::default();
    out.check("round_trip", worst <= s.tolerance, format!("largest relative error {worst:.3e}"));
    let origin = rho_r_transform(&[(Complex64::new(0.0, 0.0), 0.0)], s.r, RhoDirection::Forward);
    out.check("origin_rejected", origin.is_err(), "the transform is undefined at t = 0");
    let mut rows: Vec<(f64, f64, f64)> = samples.iter().zip(&forward).map(|(a, b)| (a.0.norm(), a.1, b.1)).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (t, v, w) in &rows {
        out.point(Some(*t), "phi", *v);
        out.point(Some(*t), "rho_r_phi", *w);
    }
    out.result = json!({ "r": s.r, "count": s.count, "max_relative_error": worst });
    Ok(out)
}

pub fn path_limit(m: &LoadedManifest, s: &PathLimitParams) -> Result<Outcome> {
    let f = laurent(&m.resolve(&s.function))?;
    let c = Complex64::new(s.c[0], s.c[1]);
    let mut out = Outcome::default();
    let mut paths = Vec::new();
    for w in &s.weights {
        let label = format!("w={}", fmt_q(w));
        let rep = hybrid_path_limit(&f, &s.z, c, w, &s.schedule, s.tolerance).ctx(&label)?;
        let ok = !rep.degenerate && rep.deviation.is_some_and(|d| d <= s.tolerance);
        out.check(
            format!("path_limit:{label}"),
            ok,
            format!("limit {:?}, predicted {:?}, deviation {:?}", rep.limit, rep.predicted, rep.deviation),
        );
        for p in &rep.samples {
            out.point(Some(p.t), label.clone(), p.ratio);
        }
        paths.push(json!({ "w": fmt_q(w), "report": to_value(&rep) }));
    }
    out.result = json!({ "paths": paths });
    Ok(out)
}
