//! The hybrid circle: rescaled fiber semi-norms, path limits towards the
//! non-archimedean fiber, Lelong numbers, the `ρ_r` correspondence and
//! convexity on the hybrid segment.

use std::collections::BTreeMap;

use num::{Signed, Zero};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q_to_f64, rat, Q};
use crate::valuation::{monomial_min, LaurentSeriesData, ValuationValue, T_LABEL};

/// Number of equally spaced angles used for circle suprema.
pub const DEFAULT_ANGLES: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    #[serde(with = "rat")]
    pub r: Q,
    #[serde(default = "default_angles")]
    pub angles: usize,
}

fn default_angles() -> usize {
    DEFAULT_ANGLES
}

impl HybridConfig {
    pub fn new(r: Q) -> Result<Self> {
        let cfg = Self { r, angles: DEFAULT_ANGLES };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_positive() && self.r < Q::from_integer(1.into())) {
            return Err(Error::config("base radius must lie in (0,1)"));
        }
        if self.angles == 0 {
            return Err(Error::config("angle count must be positive"));
        }
        Ok(())
    }

    pub fn r_f64(&self) -> f64 {
        q_to_f64(&self.r)
    }

    /// `t_k = r·10^{-k}`, `k = 0..=8`.
    pub fn default_schedule(&self) -> Vec<f64> {
        (0..=8).map(|k| self.r_f64() * 10f64.powi(-k)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HybridCirclePoint {
    Origin,
    Fiber(Complex64),
}

impl HybridCirclePoint {
    pub fn fiber(t: Complex64, cfg: &HybridConfig) -> Result<Self> {
        let a = t.norm();
        if a == 0.0 || a > cfg.r_f64() {
            return Err(Error::config(format!("fiber parameter must satisfy 0 < |t| <= r, got |t| = {a}")));
        }
        Ok(HybridCirclePoint::Fiber(t))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeminormValue {
    pub value: f64,
    /// `ord_0(f)` when evaluated at the origin.
    #[serde(with = "crate::exact::rat_opt")]
    pub exponent: Option<Q>,
    /// `f` is the zero element.
    pub zero: bool,
}

fn check_t_only(f: &LaurentSeriesData) -> Result<()> {
    if f.vars().len() != 1 || f.vars()[0] != T_LABEL {
        return Err(Error::config("hybrid semi-norms act on Laurent data in the single variable t"));
    }
    if f.has_tag_coefficients() {
        return Err(Error::Unsupported("hybrid evaluation needs explicit coefficients".into()));
    }
    Ok(())
}

/// `|f|_0 = r^{ord_0 f}` and `|f|_t = r^{log|f(t)| / log|t|}`.
pub fn hybrid_seminorm(f: &LaurentSeriesData, p: HybridCirclePoint, cfg: &HybridConfig) -> Result<SeminormValue> {
    check_t_only(f)?;
    if f.is_zero() {
        return Ok(SeminormValue { value: 0.0, exponent: None, zero: true });
    }
    match p {
        HybridCirclePoint::Origin => {
            let ord = f.terms().map(|(e, _)| e[0]).min().expect("non-zero");
            let exact = num::pow::Pow::pow(&cfg.r, ord as i32);
            Ok(SeminormValue { value: q_to_f64(&exact), exponent: Some(Q::from_integer(ord.into())), zero: false })
        }
        HybridCirclePoint::Fiber(t) => {
            let v = f.eval_c64(&[t])?.norm();
            let value = if v == 0.0 { 0.0 } else { cfg.r_f64().powf(v.ln() / t.norm().ln()) };
            Ok(SeminormValue { value, exponent: None, zero: false })
        }
    }
}

/// `log r · log|f(t)| / log|t|`.
pub fn hybrid_log(value_abs: f64, t_abs: f64, r: f64) -> f64 {
    r.ln() * value_abs.ln() / t_abs.ln()
}

#[derive(Clone, Debug, Serialize)]
pub struct PathSample {
    pub t: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathLimitReport {
    pub samples: Vec<PathSample>,
    pub limit: Option<f64>,
    pub predicted: ValuationValue,
    /// The composite vanishes identically or its limit departs from the prediction.
    pub degenerate: bool,
    pub identically_zero: bool,
    pub resampled: usize,
    pub deviation: Option<f64>,
}

/// Restriction of `f(z, t)` to `z = c·t^w`, grouped by exact `t`-exponent.
fn restrict_to_path(f: &LaurentSeriesData, z_label: &str, c: Complex64, w: &Q) -> Result<Vec<(Q, Complex64)>> {
    let zi = f.vars().iter().position(|v| v == z_label);
    let ti = f.vars().iter().position(|v| v == T_LABEL);
    if f.vars().len() > 2 || (f.vars().len() == 2 && (zi.is_none() || ti.is_none())) {
        return Err(Error::config(format!("path limits need Laurent data in ({z_label}, t)")));
    }
    let mut groups: BTreeMap<Q, Complex64> = BTreeMap::new();
    for (e, coef) in f.terms() {
        let a = coef
            .to_c64()
            .ok_or_else(|| Error::Unsupported("path limits need explicit coefficients".into()))?;
        let bz = zi.map_or(0, |k| e[k]);
        let bt = ti.map_or(0, |k| e[k]);
        let exp = w * Q::from_integer(bz.into()) + Q::from_integer(bt.into());
        *groups.entry(exp).or_insert(Complex64::zero()) += a * c.powi(bz as i32);
    }
    let scale: f64 = groups.values().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(groups.into_iter().filter(|(_, v)| v.norm() > 1e-13 * scale.max(1e-300)).collect())
}

fn log_abs_on_path(groups: &[(Q, Complex64)], t: f64) -> f64 {
    let lt = t.ln();
    let e0 = q_to_f64(&groups[0].0);
    let s: Complex64 = groups.iter().map(|(e, a)| a * ((q_to_f64(e) - e0) * lt).exp()).sum();
    e0 * lt + s.norm().ln()
}

/// Samples `log|f(c t^w, t)| / log t` along a real schedule and extrapolates
/// to `t → 0` by the line in `1/log t` through the last two samples.
pub fn hybrid_path_limit(
    f: &LaurentSeriesData,
    z_label: &str,
    c: Complex64,
    w: &Q,
    schedule: &[f64],
    tol: f64,
) -> Result<PathLimitReport> {
    if c.norm() == 0.0 {
        return Err(Error::config("path coefficient must be non-zero"));
    }
    if schedule.len() < 2 || schedule.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
        return Err(Error::config("schedule needs at least two values in (0,1)"));
    }
    let weights: Vec<Q> = f
        .vars()
        .iter()
        .map(|v| if v == T_LABEL { Q::from_integer(1.into()) } else { w.clone() })
        .collect();
    let predicted = monomial_min(f, &weights);
    let groups = restrict_to_path(f, z_label, c, w)?;
    if groups.is_empty() {
        return Ok(PathLimitReport {
            samples: Vec::new(),
            limit: None,
            predicted,
            degenerate: true,
            identically_zero: true,
            resampled: 0,
            deviation: None,
        });
    }
    let results: Vec<(PathSample, usize)> = schedule
        .par_iter()
        .map(|t0| {
            let mut t = *t0;
            let mut hits = 0;
            let mut v = log_abs_on_path(&groups, t);
            while !v.is_finite() && hits < 16 {
                t *= 1.0 + 1e-3;
                hits += 1;
                v = log_abs_on_path(&groups, t);
            }
            (PathSample { t, ratio: v / t.ln() }, hits)
        })
        .collect();
    let resampled = results.iter().map(|r| r.1).sum();
    let samples: Vec<PathSample> = results.into_iter().map(|r| r.0).collect();
    // ratio = v + A/log t up to terms exponentially small in log t
    let (a, b) = (&samples[samples.len() - 2], &samples[samples.len() - 1]);
    let (ha, hb) = (1.0 / a.t.ln(), 1.0 / b.t.ln());
    let limit = (hb * a.ratio - ha * b.ratio) / (hb - ha);
    let deviation = predicted.finite().map(|p| (limit - q_to_f64(p)).abs());
    Ok(PathLimitReport {
        samples,
        limit: Some(limit),
        degenerate: deviation.is_none_or(|d| d > tol),
        predicted,
        identically_zero: false,
        resampled,
        deviation,
    })
}

/// Circle suprema `sup_{|t|=ρ} φ` at decreasing radii.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialSampling {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialSampling {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(Error::config("radii and values differ in length"));
        }
        if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("radii must be positive and strictly decreasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("circle suprema must be finite"));
        }
        Ok(Self { radii, values })
    }

    /// Samples `sup_θ φ(ρ e^{iθ})` over `angles` equally spaced angles.
    pub fn from_fn<F>(phi: F, radii: Vec<f64>, angles: usize) -> Result<Self>
    where
        F: Fn(Complex64) -> f64 + Sync,
    {
        let values = radii
            .par_iter()
            .map(|rho| {
                (0..angles)
                    .map(|k| phi(Complex64::from_polar(*rho, std::f64::consts::TAU * k as f64 / angles as f64)))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        Self::new(radii, values)
    }

    /// `per_decade` radii per decade from `10^{-start}` down to `10^{-end}`.
    pub fn log_radii(start: u32, end: u32, per_decade: u32) -> Vec<f64> {
        let n = (end - start) * per_decade;
        (0..=n)
            .map(|k| 10f64.powf(-(start as f64) - k as f64 / per_decade as f64))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecadeSlope {
    pub log10_upper: f64,
    pub slope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LelongEstimate {
    pub estimate: f64,
    pub intercept: f64,
    /// Largest deviation of a per-decade slope from the estimate.
    pub band: f64,
    pub decades: Vec<DecadeSlope>,
    pub warnings: Vec<String>,
}

fn ls_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of circle suprema against `log ρ` on the smallest decade.
pub fn lelong_estimate(s: &RadialSampling) -> Result<LelongEstimate> {
    let n = s.radii.len();
    if n < 4 {
        return Err(Error::config("Lelong estimation needs at least 4 radii"));
    }
    let span = (s.radii[0] / s.radii[n - 1]).log10();
    if span < 3.0 - 1e-9 {
        return Err(Error::config(format!("radii span {span:.2} decades, need at least 3")));
    }
    let logs: Vec<f64> = s.radii.iter().map(|r| r.ln()).collect();
    let window = |upper: usize| -> Vec<usize> {
        (upper..n).filter(|k| s.radii[*k] >= s.radii[upper] / 10.0 * (1.0 - 1e-12)).collect()
    };
    let fit = |idx: &[usize]| -> (f64, f64) {
        let x: Vec<f64> = idx.iter().map(|k| logs[*k]).collect();
        let y: Vec<f64> = idx.iter().map(|k| s.values[*k]).collect();
        ls_slope(&x, &y)
    };
    let smallest: Vec<usize> = (0..n).filter(|k| s.radii[*k] <= s.radii[n - 1] * 10.0 * (1.0 + 1e-12)).collect();
    if smallest.len() < 2 {
        return Err(Error::config("the smallest decade holds fewer than two radii"));
    }
    let (estimate, intercept) = fit(&smallest);
    let mut decades = Vec::new();
    let mut upper = 0;
    loop {
        let idx = window(upper);
        let last = *idx.last().expect("window contains its start");
        if last == upper || s.radii[last] > s.radii[upper] / 10.0 * (1.0 + 1e-9) {
            break;
        }
        decades.push(DecadeSlope { log10_upper: s.radii[upper].log10(), slope: fit(&idx).0 });
        upper = last;
    }
    let band = decades.iter().map(|d| (d.slope - estimate).abs()).fold(0.0, f64::max);
    let mut warnings = Vec::new();
    let scale = s.values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    for k in 1..n {
        if s.values[k] > s.values[k - 1] + 1e-9 * scale {
            warnings.push(format!(
                "circle suprema increase towards the origin between radii {:e} and {:e}",
                s.radii[k - 1],
                s.radii[k]
            ));
        }
    }
    Ok(LelongEstimate { estimate, intercept, band, decades, warnings })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoDirection {
    /// `φ ↦ log_r|t| · φ`
    Forward,
    /// `ψ ↦ ψ / log_r|t|`
    Inverse,
}

/// Applies `ρ_r` (or its inverse) to samples `(t, value)`.
pub fn rho_r_transform(samples: &[(Complex64, f64)], r: f64, direction: RhoDirection) -> Result<Vec<(Complex64, f64)>> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::config("radius must lie in (0,1)"));
    }
    samples
        .iter()
        .map(|(t, v)| {
            let a = t.norm();
            if a == 0.0 {
                return Err(Error::Rejected("the transform is undefined at t = 0".into()));
            }
            if a >= 1.0 {
                return Err(Error::Rejected(format!("sample |t| = {a} lies outside the unit disk")));
            }
            let log_r_t = a.ln() / r.ln();
            Ok((*t, match direction {
                RhoDirection::Forward => log_r_t * v,
                RhoDirection::Inverse => v / log_r_t,
            }))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityVerdict<T> {
    pub convex: bool,
    /// Largest excess of a middle value over the chord of its neighbours.
    pub worst_violation: T,
    pub worst_index: Option<usize>,
}

/// Discrete convexity on consecutive triples of sorted samples.
pub fn khyb_convexity_check<T>(xs: &[T], ys: &[T], tol: &T) -> Result<ConvexityVerdict<T>>
where
    T: Clone + PartialOrd + num::Num + Signed,
{
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::config("convexity check needs at least 3 samples"));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("samples must be sorted and distinct"));
    }
    let mut worst = T::zero();
    let mut worst_index = None;
    for k in 1..xs.len() - 1 {
        let (x0, x1, x2) = (&xs[k - 1], &xs[k], &xs[k + 1]);
        let chord = (ys[k - 1].clone() * (x2.clone() - x1.clone()) + ys[k + 1].clone() * (x1.clone() - x0.clone()))
            / (x2.clone() - x0.clone());
        let excess = ys[k].clone() - chord;
        if excess > worst {
            worst = excess;
            worst_index = Some(k);
        }
    }
    Ok(ConvexityVerdict { convex: worst <= *tol, worst_violation: worst, worst_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;
    use crate::valuation::Coefficient;
    use num_complex::Complex;

    fn ex(re: i64) -> Coefficient {
        Coefficient::Explicit(Complex::new(Q::from_integer(re.into()), Q::zero()))
    }

    #[test]
    fn seminorm_worked_values() {
        let cfg = HybridConfig::new(q(1, 2)).unwrap();
        let t = LaurentSeriesData::from_terms(&["t"], [(vec![1], ex(1))]).unwrap();
        let p = HybridCirclePoint::fiber(Complex64::new(0.01, 0.02), &cfg).unwrap();
        assert!((hybrid_seminorm(&t, p, &cfg).unwrap().value - 0.5).abs() < 1e-15);
        assert_eq!(hybrid_seminorm(&t, HybridCirclePoint::Origin, &cfg).unwrap().value, 0.5);
        let two = LaurentSeriesData::from_terms(&["t"], [(vec![0], ex(2))]).unwrap();
        let p = HybridCirclePoint::fiber(Complex64::new(1e-6, 0.0), &cfg).unwrap();
        let v = hybrid_seminorm(&two, p, &cfg).unwrap().value;
        let oracle = 2f64.powf(0.5f64.ln() / 1e-6f64.ln());
        assert!((v - oracle).abs() < 1e-14 && (v - 1.0354).abs() < 1e-4, "{v}");
        let p = HybridCirclePoint::fiber(Complex64::new(1e-60, 0.0), &cfg).unwrap();
        assert!(hybrid_seminorm(&two, p, &cfg).unwrap().value < v);
        let zero = LaurentSeriesData::from_terms(&["t"], Vec::<(Vec<i64>, Coefficient)>::new()).unwrap();
        assert!(hybrid_seminorm(&zero, HybridCirclePoint::Origin, &cfg).unwrap().zero);
    }

    #[test]
    fn path_limit_pure_monomial_and_cancellation() {
        let sched: Vec<f64> = (1..=8).map(|k| 10f64.powi(-k)).collect();
        let z = LaurentSeriesData::from_terms(&["z", "t"], [(vec![1, 0], ex(1))]).unwrap();
        let r = hybrid_path_limit(&z, "z", Complex64::new(1.0, 0.0), &q(1, 2), &sched, 1e-3).unwrap();
        assert!((r.limit.unwrap() - 0.5).abs() < 1e-12 && !r.degenerate);
        let f = LaurentSeriesData::from_terms(&["z", "t"], [(vec![1, 0], ex(1)), (vec![0, 1], ex(-1))]).unwrap();
        let r = hybrid_path_limit(&f, "z", Complex64::new(1.0, 0.0), &q(1, 1), &sched, 1e-3).unwrap();
        assert!(r.identically_zero && r.degenerate);
    }

    #[test]
    fn lelong_of_pure_log() {
        let radii = RadialSampling::log_radii(1, 5, 4);
        let s = RadialSampling::from_fn(|t| 3.0 * t.norm().ln(), radii, 64).unwrap();
        let e = lelong_estimate(&s).unwrap();
        assert!((e.estimate - 3.0).abs() < 1e-12 && e.warnings.is_empty());
        let bounded = RadialSampling::from_fn(|t| t.norm().ln().max(-5.0), RadialSampling::log_radii(3, 7, 4), 64).unwrap();
        assert!(lelong_estimate(&bounded).unwrap().estimate.abs() < 1e-12);
    }

    #[test]
    fn convexity_on_rationals_is_exact() {
        let xs: Vec<Q> = (0..=8).map(|k| q(k, 8)).collect();
        let f = |x: &Q| -> Q {
            let a = x * q(2, 1) - q(1, 1);
            let b = -(x * q(1, 3));
            let c = q(-1, 5) + x.clone() * q(0, 1);
            [a, b, c].into_iter().max().unwrap()
        };
        let ys: Vec<Q> = xs.iter().map(f).collect();
        let v = khyb_convexity_check(&xs, &ys, &Q::zero()).unwrap();
        assert!(v.convex && v.worst_violation.is_zero());
        let neg: Vec<f64> = (0..10).map(|k| -((k as f64) / 9.0).powi(2)).collect();
        let xs: Vec<f64> = (0..10).map(|k| k as f64 / 9.0).collect();
        assert!(!khyb_convexity_check(&xs, &neg, &0.0).unwrap().convex);
    }
}
