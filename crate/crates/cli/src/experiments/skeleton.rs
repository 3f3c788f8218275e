use std::collections::BTreeMap;
use std::sync::Arc;

use berkhyb_core::dual_complex::{lift_to_finer, retraction, MonomialPullback, SncModelCombinatorics};
use berkhyb_core::exact::{fmt_q, LogScale};
use berkhyb_core::tropical::{lse_max_gap, na_limit_tfs, TropicalFSMetric};
use berkhyb_core::valuation::{qm_eval, Coefficient, LaurentSeriesData, QuasiMonomialPoint, ValuationValue};
use berkhyb_core::Q;
use num::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{models, to_value};
use crate::error::{CoreContext, HarnessError, Result};
use crate::manifest::{read_json, LoadedManifest, LseGapParams, NaLimitParams, RetractParams, ValEvalParams};
use crate::report::Outcome;
use crate::seeds::SeedTree;

/// Rational point of a random stratum with barycentric profile in `1..=20`.
fn random_point(model: &Arc<SncModelCombinatorics>, rng: &mut ChaCha8Rng) -> berkhyb_core::Result<QuasiMonomialPoint> {
    let stratum = rng.gen_range(0..model.strata.len());
    let idx = &model.strata[stratum].indices;
    let raw: Vec<Q> = idx.iter().map(|_| Q::from_integer(rng.gen_range(1i64..=20).into())).collect();
    let total = raw.iter().fold(Q::zero(), |a, b| a + b);
    let w = raw.iter().zip(idx).map(|(l, j)| l / &total / model.mult(*j)).collect();
    QuasiMonomialPoint::new(model.clone(), stratum, w)
}

fn brute_force_min(v: &QuasiMonomialPoint, vars: &[String], terms: &[Vec<i64>]) -> Q {
    let model = v.model();
    let stratum = &model.strata[v.stratum()].indices;
    let weight = |label: &str| -> Q {
        if label == "t" {
            return Q::from_integer(1.into());
        }
        stratum
            .iter()
            .zip(v.weights())
            .find(|(j, _)| model.components[**j].label == label)
            .map(|(_, w)| w.clone())
            .unwrap_or_else(Q::zero)
    };
    let ws: Vec<Q> = vars.iter().map(|l| weight(l)).collect();
    terms
        .iter()
        .map(|e| e.iter().zip(&ws).fold(Q::zero(), |a, (k, w)| a + w * Q::from_integer((*k).into())))
        .min()
        .expect("at least one term")
}

#[derive(Serialize)]
struct Mismatch {
    model: String,
    point: Vec<String>,
    f: LaurentSeriesData,
    oracle: String,
    computed: String,
}

pub fn val_eval(m: &LoadedManifest, s: &ValEvalParams, seeds: &SeedTree) -> Result<Outcome> {
    let set = models(&m.resolve(&s.models))?;
    let names: Vec<String> =
        if s.model_names.is_empty() { set.models().map(|x| x.name.clone()).collect() } else { s.model_names.clone() };
    let chosen: Vec<Arc<SncModelCombinatorics>> =
        names.iter().map(|n| set.get(n).map_err(|e| HarnessError::input(&m.path, e.to_string()))).collect::<Result<_>>()?;
    let mut rng = seeds.rng("cases");
    let mut per_model: BTreeMap<String, usize> = BTreeMap::new();
    let mut mismatches = Vec::new();
    for _ in 0..s.count {
        let model = &chosen[rng.gen_range(0..chosen.len())];
        let v = random_point(model, &mut rng).ctx("val-eval")?;
        let vars: Vec<String> = model.components.iter().map(|c| c.label.clone()).chain(["t".to_string()]).collect();
        let var_refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        let n_terms = rng.gen_range(1..=s.max_terms);
        let terms: Vec<Vec<i64>> = (0..n_terms)
            .map(|_| (0..vars.len()).map(|_| rng.gen_range(-s.exponent_bound..=s.exponent_bound)).collect())
            .collect();
        let f = LaurentSeriesData::from_terms(&var_refs, terms.iter().map(|e| (e.clone(), Coefficient::Unit)))
            .ctx("val-eval")?;
        let oracle = brute_force_min(&v, &vars, &terms);
        let computed = qm_eval(&v, &f).ctx("val-eval")?;
        *per_model.entry(model.name.clone()).or_default() += 1;
        if computed != ValuationValue::Finite(oracle.clone()) {
            mismatches.push(Mismatch {
                model: model.name.clone(),
                point: v.weights().iter().map(fmt_q).collect(),
                f,
                oracle: fmt_q(&oracle),
                computed: format!("{computed:?}"),
            });
        }
    }
    let mut out = Outcome::default();
    out.check(
        "oracle_equivalence",
        mismatches.is_empty(),
        format!("{} of {} cases differ from the brute-force minimum", mismatches.len(), s.count),
    );
    mismatches.truncate(5);
    out.result = json!({ "cases": s.count, "per_model": per_model, "mismatches": mismatches });
    Ok(out)
}

fn same_point(a: &QuasiMonomialPoint, b: &QuasiMonomialPoint) -> bool {
    a.model().name == b.model().name && a.component_weights() == b.component_weights()
}

pub fn retract(m: &LoadedManifest, s: &RetractParams, seeds: &SeedTree) -> Result<Outcome> {
    let set = models(&m.resolve(&s.models))?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for model in set.models() {
        let mut rng = seeds.rng(&format!("identity/{}", model.name));
        let pb = MonomialPullback::identity(model.clone());
        let mut failures = 0;
        let mut ambiguous = 0;
        for _ in 0..s.count {
            let v = random_point(model, &mut rng).ctx("retract")?;
            let r = retraction(model, &v, &pb).ctx("retract")?;
            failures += usize::from(!same_point(&r.point, &v));
            ambiguous += usize::from(r.ambiguous);
        }
        out.check(
            format!("retract_embed_identity:{}", model.name),
            failures == 0,
            format!("{failures} of {} points moved", s.count),
        );
        rows.push(json!({ "route": format!("{0}->{0}", model.name), "points": s.count, "failures": failures, "ambiguous": ambiguous }));
        if !s.lifts {
            continue;
        }
        for decl in &model.pullbacks {
            let pb = set.pullback(&model.name, &decl.target).ctx("retract")?;
            let target = pb.target.clone();
            let mut rng = seeds.rng(&format!("lift/{}->{}", model.name, target.name));
            let mut failures = 0;
            for _ in 0..s.count {
                let v = random_point(&target, &mut rng).ctx("retract")?;
                let lifted = lift_to_finer(&v, &pb).ctx("retract")?;
                let back = retraction(&target, &lifted, &pb).ctx("retract")?;
                failures += usize::from(!same_point(&back.point, &v));
            }
            out.check(
                format!("lift_then_retract:{}->{}", model.name, target.name),
                failures == 0,
                format!("{failures} of {} points moved", s.count),
            );
            rows.push(json!({ "route": format!("{}->{}", model.name, target.name), "points": s.count, "failures": failures }));
        }
    }
    out.result = json!({ "routes": rows });
    Ok(out)
}

#[derive(Deserialize)]
struct TfsFamilyFile {
    name: String,
    model: String,
    metric: TropicalFSMetric,
}

pub fn na_limit(m: &LoadedManifest, s: &NaLimitParams) -> Result<Outcome> {
    let set = models(&m.resolve(&s.models))?;
    let scale = LogScale::new(s.r.clone()).map_err(|e| HarnessError::input(&m.path, e.to_string()))?;
    let mut out = Outcome::default();
    let mut families = Vec::new();
    for rel in &s.families {
        let path = m.resolve(rel);
        let fam: TfsFamilyFile = read_json(&path)?;
        fam.metric.validate().map_err(|e| HarnessError::input(&path, e.to_string()))?;
        let model = set.get(&fam.model).map_err(|e| HarnessError::input(&path, e.to_string()))?;
        let rep = na_limit_tfs(&fam.metric, &model, &scale).ctx(&fam.name)?;
        let disagree: Vec<&str> = rep.vertices.iter().filter(|v| !v.agree).map(|v| v.label.as_str()).collect();
        out.check(
            format!("dual_route:{}", fam.name),
            disagree.is_empty(),
            if disagree.is_empty() { "formula equals restriction at every vertex".to_string() } else { format!("routes differ at {disagree:?}") },
        );
        out.check(format!("continuous:{}", fam.name), rep.continuity.continuous, format!("{} face mismatches", rep.continuity.mismatches.len()));
        if !rep.affine_on_model {
            out.warnings.push(format!("{}: the limit kinks inside simplices of {}, which does not resolve it", fam.name, fam.model));
        }
        for v in &rep.vertices {
            out.point(None, format!("{}:{}", fam.name, v.label), scale.to_f64(&v.formula));
        }
        families.push(json!({
            "name": fam.name,
            "model": fam.model,
            "vertices": to_value(&rep.vertices),
            "affine_on_model": rep.affine_on_model,
            "potential_csv": rep.potential.to_csv(),
        }));
    }
    out.result = json!({ "r": fmt_q(&s.r), "families": families });
    Ok(out)
}

pub fn lse_gap(s: &LseGapParams, seeds: &SeedTree) -> Outcome {
    let mut rng = seeds.rng("samples");
    let mut below = 0usize;
    let mut above = 0usize;
    // (m, N) -> (samples, largest gap / bound)
    let mut worst: BTreeMap<(u32, usize), (usize, f64)> = BTreeMap::new();
    for _ in 0..s.samples {
        let n = rng.gen_range(1..=s.max_n);
        let m = s.ms[rng.gen_range(0..s.ms.len())];
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-s.range..=s.range)).collect();
        let gap = lse_max_gap(&x, m);
        let bound = (n as f64).ln() / (2.0 * m as f64);
        below += usize::from(gap < 0.0);
        above += usize::from(gap > bound);
        let e = worst.entry((m, n)).or_insert((0, 0.0));
        e.0 += 1;
        if bound > 0.0 {
            e.1 = e.1.max(gap / bound);
        }
    }
    let mut out = Outcome::default();
    out.check(
        "gap_bounds",
        below + above == 0,
        format!("{below} samples below 0, {above} above log(N)/(2m) out of {}", s.samples),
    );
    let cells: Vec<_> = worst
        .iter()
        .map(|((m, n), (count, ratio))| {
            out.point(Some(*n as f64), format!("max_gap_over_bound:m={m}"), *ratio);
            json!({ "m": m, "n": n, "samples": count, "max_gap_over_bound": ratio })
        })
        .collect();
    out.result = json!({ "samples": s.samples, "below_zero": below, "above_bound": above, "cells": cells });
    out
}
