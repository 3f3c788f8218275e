//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines reach the console.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use berkhyb::manifest::{read_json, Experiment};
use berkhyb::{emit_suite, load_manifest, load_suite, run_experiment, run_suite, RunReport};
use berkhyb_core::exact::{parse_q, q_to_f64};
use berkhyb_core::Q;
use num::Zero;
use serde_json::Value;

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn manifest(file: &str) -> PathBuf {
    data().join("manifests").join(file)
}

fn run(file: &str) -> Result<(RunReport, Duration), String> {
    let m = load_manifest(&manifest(file), None).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let r = run_experiment(&m).map_err(|e| e.to_string())?;
    Ok((r, start.elapsed()))
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn checks_with<'a>(r: &'a RunReport, prefix: &str) -> Vec<&'a berkhyb::report::Check> {
    r.checks.iter().filter(|c| c.name.starts_with(prefix)).collect()
}

fn all_pass(r: &RunReport, prefix: &str, expected: usize) -> Result<(), String> {
    let cs = checks_with(r, prefix);
    ensure(cs.len() == expected, format!("{} `{prefix}` checks, expected {expected}", cs.len()))?;
    let bad: Vec<String> = cs.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect();
    ensure(bad.is_empty(), bad.join("; "))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn c1_valuation_oracle() -> Result<String, String> {
    let (r, dt) = run("01_val_eval.json")?;
    let Experiment::ValEval(s) = &load_manifest(&manifest("01_val_eval.json"), None).unwrap().manifest.experiment else {
        return Err("wrong kind".into());
    };
    ensure(s.count == 1000 && s.max_terms <= 8 && s.exponent_bound <= 10, "manifest is not the 1000-case instance")?;
    all_pass(&r, "oracle_equivalence", 1)?;
    ensure(dt < Duration::from_secs(1), format!("took {dt:?}"))?;
    Ok(format!("1000 cases exact, {:.0} ms", dt.as_secs_f64() * 1e3))
}

fn c2_retraction() -> Result<String, String> {
    let (r, _) = run("02_retract.json")?;
    all_pass(&r, "retract_embed_identity:", 3)?;
    all_pass(&r, "lift_then_retract:", 1)?;
    let points: u64 = r.result["routes"].as_array().unwrap().iter().map(|x| x["points"].as_u64().unwrap()).sum();
    ensure(points >= 100, "fewer than 100 points")?;
    Ok(format!("{points} points over segment, triangle, blowup and blowup->segment"))
}

fn c3_dual_route_na_limit() -> Result<String, String> {
    let (r, _) = run("03_na_limit.json")?;
    let families = r.result["families"].as_array().unwrap();
    all_pass(&r, "dual_route:", families.len())?;
    let mut vertices = 0;
    for fam in families {
        for v in fam["vertices"].as_array().unwrap() {
            ensure(v["formula"] == v["restriction"], format!("{}: {} differs", fam["name"], v["label"]))?;
            vertices += 1;
        }
    }
    Ok(format!("{} families, {vertices} divisorial points", families.len()))
}

fn table_sum(path: &Path) -> (String, Q, Option<Q>) {
    let t: Value = read_json(path).unwrap();
    let sum = t["entries"].as_array().unwrap().iter().fold(Q::zero(), |acc, e| {
        acc + Q::from_integer(e["b"].as_i64().unwrap().into()) * parse_q(e["intersection"].as_str().unwrap()).unwrap()
    });
    (t["name"].as_str().unwrap().to_string(), sum, t["degree"].as_str().map(|d| parse_q(d).unwrap()))
}

fn c4_total_mass() -> Result<String, String> {
    let (r, _) = run("04_05_ma_model.json")?;
    let tables = r.result["tables"].as_array().unwrap();
    all_pass(&r, "total_mass:", tables.len())?;
    for file in ["p1xd.json", "two_component.json", "mult_two.json"] {
        let (name, sum, degree) = table_sum(&data().join("tables").join(file));
        let rep = tables.iter().find(|t| t["name"] == name.as_str()).ok_or(format!("{name} missing"))?;
        let total = parse_q(rep["report"]["total"].as_str().unwrap()).unwrap();
        ensure(total == sum, format!("{name}: total {total} but entries sum to {sum}"))?;
        ensure(degree.as_ref() == Some(&sum), format!("{name}: degree {degree:?} but entries sum to {sum}"))?;
    }
    Ok(format!("{} tables", tables.len()))
}

fn c5_ma_dual_route() -> Result<String, String> {
    let (r, _) = run("04_05_ma_model.json")?;
    all_pass(&r, "dual_route:", 3)?;
    for c in r.result["curves"].as_array().unwrap() {
        let atoms = |m: &Value| -> Vec<(String, String)> {
            let mut v: Vec<_> = m["atoms"]
                .as_array()
                .unwrap()
                .iter()
                .map(|a| (a["position"].as_str().unwrap().to_string(), a["mass"].as_str().unwrap().to_string()))
                .collect();
            v.sort();
            v
        };
        ensure(atoms(&c["slope_jumps"]) == atoms(&c["table_measure"]), format!("{} measures differ", c["name"]))?;
    }
    Ok("3 curve inputs, atoms equal".into())
}

fn c6_path_limits() -> Result<String, String> {
    let (r, dt) = run("06_path_limit.json")?;
    let mut worst: f64 = 0.0;
    let paths = r.result["paths"].as_array().unwrap();
    ensure(paths.len() == 5, "expected 5 weights")?;
    for p in paths {
        let w = q_to_f64(&parse_q(p["w"].as_str().unwrap()).unwrap());
        let samples = p["report"]["samples"].as_array().unwrap();
        ensure(f(&samples.last().unwrap()["t"]) <= 1e-8 * (1.0 + 1e-12), "schedule does not reach 1e-8")?;
        let err = (f(&p["report"]["limit"]) - w.min(1.0)).abs();
        ensure(err <= 1e-3, format!("w = {w}: |limit - min(w,1)| = {err:.3e}"))?;
        worst = worst.max(err);
    }
    ensure(dt < Duration::from_secs(5), format!("took {dt:?}"))?;
    Ok(format!("max |limit - min(w,1)| = {worst:.2e}, {:.0} ms", dt.as_secs_f64() * 1e3))
}

fn c7_weak_convergence() -> Result<String, String> {
    let (r, dt) = run("07_ma_converge.json")?;
    let grid = &r.manifest["experiment"]["grid"];
    ensure(grid["n_radial"] == 1024 && grid["n_angular"] == 1024, "grid is not 1024^2")?;
    let rows = r.result["rows"].as_array().unwrap();
    let ts: Vec<f64> = rows.iter().map(|x| f(&x["t"])).collect();
    ensure(ts == [1e-2, 1e-3, 1e-4], format!("schedule {ts:?}"))?;
    let w1: Vec<f64> = rows.iter().map(|x| f(&x["w1"])).collect();
    ensure(w1.windows(2).all(|p| p[1] <= p[0]), format!("W1 increases: {w1:?}"))?;
    ensure(w1[2] <= 0.05, format!("W1 at 1e-4 is {}", w1[2]))?;
    let limit = &r.result["limit"]["atoms"];
    ensure(limit.as_array().map(|a| a.len()) == Some(1) && limit[0]["position"] == "-1", "limit is not δ at u = -1")?;
    ensure(dt < Duration::from_secs(60), format!("took {dt:?}"))?;
    Ok(format!("W1 {w1:?}, {:.1} s", dt.as_secs_f64()))
}

fn c8_lelong() -> Result<String, String> {
    let (r, _) = run("08_lelong.json")?;
    let est = f(&r.result["estimate"]["estimate"]);
    ensure((est - 2.0).abs() <= 1e-3, format!("estimate {est}"))?;
    let perturbed = r.result["perturbed"].as_array().unwrap();
    ensure(!perturbed.is_empty(), "no perturbations")?;
    for p in perturbed {
        let e = f(&p["estimate"]["estimate"]);
        ensure((e - est).abs() <= 1e-3, format!("perturbed estimate {e}"))?;
    }
    Ok(format!("nu = {est:.6}, {} bounded perturbations", perturbed.len()))
}

fn c9_lse_envelope() -> Result<String, String> {
    let (r, _) = run("09_lse_gap.json")?;
    let Experiment::LseGap(s) = &load_manifest(&manifest("09_lse_gap.json"), None).unwrap().manifest.experiment else {
        return Err("wrong kind".into());
    };
    ensure(s.samples == 100_000 && s.max_n <= 8 && s.ms == [1, 2, 3], "manifest is not the 10^5-sample instance")?;
    ensure(r.result["below_zero"] == 0 && r.result["above_bound"] == 0, "violations found")?;
    all_pass(&r, "gap_bounds", 1)?;
    Ok("100000 samples, 0 violations".into())
}

fn c10_mz() -> Result<String, String> {
    let (r, _) = run("10_mz_check.json")?;
    all_pass(&r, "psh:random", 20)?;
    all_pass(&r, "sum_identity:random", 20)?;
    all_pass(&r, "padic_identity:", 24)?;
    let f0 = &r.result["functions"][0]["verdict"];
    ensure(f0["psh"] == false, "violator passed")?;
    ensure(
        f0["reasons"].as_array().is_some_and(|a| a.iter().any(|x| x == "slope_sum_negative")),
        "violator lacks the slope-sum reason",
    )?;
    let logged = r.result["s_inf_discrepancies"].as_array().map_or(0, |a| a.len());
    ensure(logged >= 1, "s_inf discrepancy was not logged")?;
    Ok(format!("20 random families psh with exact identity, violator rejected, {logged} discrepancy logged"))
}

fn c11_cln() -> Result<String, String> {
    let (r, _) = run("11_cln.json")?;
    let deltas: Vec<f64> = r.result["rows"].as_array().unwrap().iter().map(|x| q_to_f64(&parse_q(x["delta"].as_str().unwrap()).unwrap())).collect();
    for d in [1e-1, 1e-2, 1e-3, 1e-4] {
        ensure(deltas.iter().any(|x| (x - d).abs() < 1e-15), format!("δ = {d} missing"))?;
    }
    let residual = f(&r.result["residual"]);
    ensure(residual <= 0.05, format!("residual {residual}"))?;
    all_pass(&r, "antisymmetric", 1)?;
    Ok(format!("C = {:.4}, residual {residual:.2e}", f(&r.result["fitted_constant"])))
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect()
}

fn c12_reproducible() -> Result<String, String> {
    let mut trees = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let (suite, ms) = load_suite(&manifest("suite.json"), None).map_err(|e| e.to_string())?;
        let reports = run_suite(&ms).map_err(|e| e.to_string())?;
        emit_suite(&suite.name, suite.seed, &reports, dir.path()).map_err(|e| e.to_string())?;
        trees.push(read_tree(dir.path()));
    }
    ensure(trees[0].len() > 1, "suite wrote nothing")?;
    ensure(trees[0] == trees[1], "outputs differ between runs")?;
    Ok(format!("{} files byte-identical", trees[0].len()))
}

type Criterion = (&'static str, fn() -> Result<String, String>);

fn main() {
    let criteria: [Criterion; 12] = [
        ("valuation oracle equivalence", c1_valuation_oracle),
        ("retraction idempotence", c2_retraction),
        ("dual-route non-archimedean limit", c3_dual_route_na_limit),
        ("total-mass identity", c4_total_mass),
        ("Monge-Ampère dual route on curves", c5_ma_dual_route),
        ("hybrid path limits", c6_path_limits),
        ("weak Monge-Ampère convergence", c7_weak_convergence),
        ("Lelong estimation", c8_lelong),
        ("LSE-max envelope", c9_lse_envelope),
        ("M(Z) characterization", c10_mz),
        ("CLN stability", c11_cln),
        ("reproducibility", c12_reproducible),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why})", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
