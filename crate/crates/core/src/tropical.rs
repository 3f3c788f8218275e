//! Tropical Fubini-Study metrics `m⁻¹ max_α(log|s_α| + c_α)` on skeleta, their
//! closure operations and non-archimedean limits.

pub mod convex;

use std::cmp::Ordering;
use std::sync::Arc;

use num::{Integer, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dual_complex::{AffinePiece, ContinuityReport, PAFunction, SncModelCombinatorics};
use crate::error::{Error, Result};
use crate::exact::{fmt_q, rat, LogAffine, LogScale, Q};
use crate::valuation::{divisorial_point, qm_eval, LaurentSeriesData, QuasiMonomialPoint, ValuationValue};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfsEntry {
    pub section: LaurentSeriesData,
    #[serde(rename = "c", with = "rat")]
    pub constant: Q,
}

/// Sections of `mL` written against a reference section trivializing `L`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TropicalFSMetric {
    pub m: u32,
    pub entries: Vec<TfsEntry>,
    pub reference: LaurentSeriesData,
    /// Sections may have poles along special-fiber components.
    #[serde(default)]
    pub meromorphic: bool,
}

impl TropicalFSMetric {
    pub fn new(m: u32, entries: Vec<TfsEntry>, reference: LaurentSeriesData) -> Result<Self> {
        let out = Self { m, entries, reference, meromorphic: false };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::validation("denominator m must be positive"));
        }
        if self.entries.is_empty() {
            return Err(Error::validation("a tropical Fubini-Study metric needs at least one entry"));
        }
        if self.reference.is_zero() {
            return Err(Error::validation("reference section is zero"));
        }
        for e in &self.entries {
            if e.section.vars() != self.reference.vars() {
                return Err(Error::Incompatible(format!(
                    "entry variables {:?} differ from reference variables {:?}",
                    e.section.vars(),
                    self.reference.vars()
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let out: Self = serde_json::from_str(s)?;
        out.validate()?;
        Ok(out)
    }

    fn m_q(&self) -> Q {
        Q::from_integer(self.m.into())
    }

    /// `v(s_α / s_ref^m)` per entry; `None` for a zero section.
    pub fn relative_valuations(&self, v: &QuasiMonomialPoint) -> Result<Vec<Option<Q>>> {
        let r = match qm_eval(v, &self.reference)? {
            ValuationValue::Finite(q) => q,
            ValuationValue::Infinity => return Err(Error::validation("reference section vanishes identically")),
        };
        self.entries
            .iter()
            .map(|e| {
                Ok(match qm_eval(v, &e.section)? {
                    ValuationValue::Finite(q) => Some(q - &r * self.m_q()),
                    ValuationValue::Infinity => None,
                })
            })
            .collect()
    }
}

/// `m⁻¹ max_α(log r · v(s_α/s_ref^m) + c_α)`.
pub fn tfs_eval(phi: &TropicalFSMetric, v: &QuasiMonomialPoint, scale: &LogScale) -> Result<LogAffine> {
    let vals = phi.relative_valuations(v)?;
    let terms: Vec<LogAffine> = vals
        .into_iter()
        .zip(&phi.entries)
        .filter_map(|(x, e)| x.map(|x| LogAffine::new(x, e.constant.clone())))
        .collect();
    let best = scale
        .max(terms.iter())
        .ok_or_else(|| Error::NotBasepointFree("every entry evaluates to -inf".into()))?;
    Ok(best.scale(&(Q::from_integer(1.into()) / phi.m_q())))
}

fn pow_section(s: &LaurentSeriesData, k: u32) -> Result<LaurentSeriesData> {
    let mut out = s.clone();
    for _ in 1..k {
        out = out.mul(s)?;
    }
    Ok(out)
}

/// Rewrites `φ` with denominator `m·k` (sections raised to the `k`-th power).
pub fn tfs_lift(phi: &TropicalFSMetric, k: u32) -> Result<TropicalFSMetric> {
    if k == 0 {
        return Err(Error::config("lift factor must be positive"));
    }
    let kq = Q::from_integer(k.into());
    Ok(TropicalFSMetric {
        m: phi.m * k,
        entries: phi
            .entries
            .iter()
            .map(|e| Ok(TfsEntry { section: pow_section(&e.section, k)?, constant: &e.constant * &kq }))
            .collect::<Result<_>>()?,
        reference: phi.reference.clone(),
        meromorphic: phi.meromorphic,
    })
}

/// Pointwise maximum; both metrics must share the reference section.
pub fn tfs_max(a: &TropicalFSMetric, b: &TropicalFSMetric) -> Result<TropicalFSMetric> {
    if a.reference != b.reference {
        return Err(Error::Incompatible("max needs a common reference section".into()));
    }
    let l = a.m.lcm(&b.m);
    let la = tfs_lift(a, l / a.m)?;
    let lb = tfs_lift(b, l / b.m)?;
    let mut entries = la.entries;
    entries.extend(lb.entries);
    Ok(TropicalFSMetric { m: l, entries, reference: a.reference.clone(), meromorphic: a.meromorphic || b.meromorphic })
}

/// Pointwise sum, a metric on the tensor product with reference `ref_a·ref_b`.
pub fn tfs_sum(a: &TropicalFSMetric, b: &TropicalFSMetric) -> Result<TropicalFSMetric> {
    if a.reference.vars() != b.reference.vars() {
        return Err(Error::Incompatible("sum needs a common variable list".into()));
    }
    let l = a.m.lcm(&b.m);
    let la = tfs_lift(a, l / a.m)?;
    let lb = tfs_lift(b, l / b.m)?;
    let mut entries = Vec::with_capacity(la.entries.len() * lb.entries.len());
    for x in &la.entries {
        for y in &lb.entries {
            entries.push(TfsEntry { section: x.section.mul(&y.section)?, constant: &x.constant + &y.constant });
        }
    }
    Ok(TropicalFSMetric {
        m: l,
        entries,
        reference: a.reference.mul(&b.reference)?,
        meromorphic: a.meromorphic || b.meromorphic,
    })
}

/// `φ + c`.
pub fn tfs_shift(phi: &TropicalFSMetric, c: &Q) -> TropicalFSMetric {
    let mut out = phi.clone();
    let mc = c * phi.m_q();
    for e in &mut out.entries {
        e.constant += &mc;
    }
    out
}

/// Checks that lifting by `k` leaves the values at `points` unchanged.
pub fn tfs_scale_check(phi: &TropicalFSMetric, k: u32, points: &[QuasiMonomialPoint], scale: &LogScale) -> Result<bool> {
    let lifted = tfs_lift(phi, k)?;
    for p in points {
        if tfs_eval(phi, p, scale)? != tfs_eval(&lifted, p, scale)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `p + q / log r`, the shape of a generic Lelong number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LelongValue {
    #[serde(with = "rat")]
    pub rational: Q,
    #[serde(with = "rat")]
    pub per_log_r: Q,
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexComparison {
    pub component: usize,
    pub label: String,
    pub b: u32,
    pub lelong: LelongValue,
    pub formula: LogAffine,
    pub restriction: LogAffine,
    pub agree: bool,
}

#[derive(Clone, Debug)]
pub struct NaLimitReport {
    pub potential: PAFunction,
    pub vertices: Vec<VertexComparison>,
    pub continuity: ContinuityReport,
    /// The interpolated potential matches direct evaluation at interior test points.
    pub affine_on_model: bool,
}

impl NaLimitReport {
    pub fn routes_agree(&self) -> bool {
        self.vertices.iter().all(|v| v.agree)
    }
}

fn lelong_at(phi: &TropicalFSMetric, v: &QuasiMonomialPoint, b: &Q, scale: &LogScale, label: &str) -> Result<LelongValue> {
    let vals = phi.relative_valuations(v)?;
    let mut best: Option<(Q, Q)> = None;
    for (x, e) in vals.into_iter().zip(&phi.entries) {
        let Some(x) = x else { continue };
        let ord = &x * b;
        if ord.is_negative() && !phi.meromorphic {
            return Err(Error::NotRegular(format!(
                "ord along {label} of a section quotient is {}",
                fmt_q(&ord)
            )));
        }
        let cand = (ord, &e.constant * b);
        best = match best {
            Some(cur) if scale.sign_inv(&(&cand.0 - &cur.0), &(&cand.1 - &cur.1)) != Ordering::Less => Some(cur),
            _ => Some(cand),
        };
    }
    let (p, qc) = best.ok_or_else(|| Error::NotBasepointFree(format!("all sections vanish along {label}")))?;
    let inv_m = Q::from_integer(1.into()) / phi.m_q();
    Ok(LelongValue { rational: p * &inv_m, per_log_r: qc * &inv_m })
}

fn interior_points(model: &Arc<SncModelCombinatorics>, stratum: usize) -> Result<Vec<QuasiMonomialPoint>> {
    let idx = &model.strata[stratum].indices;
    if idx.len() < 2 {
        return Ok(Vec::new());
    }
    // barycentric λ_j = a_j w_j; barycenter plus two skewed points
    let n = idx.len() as i64;
    let mut out = Vec::new();
    let profiles: [fn(i64, i64) -> i64; 3] = [|_, _| 1, |k, _| k + 1, |k, n| 2 * (n - k) + 1];
    for profile in profiles {
        let raw: Vec<Q> = (0..n).map(|k| Q::from_integer(profile(k, n).into())).collect();
        let total: Q = raw.iter().fold(Q::zero(), |a, b| a + b);
        let w: Vec<Q> = raw
            .iter()
            .zip(idx)
            .map(|(l, j)| l / &total / model.mult(*j))
            .collect();
        out.push(QuasiMonomialPoint::new(model.clone(), stratum, w)?);
    }
    Ok(out)
}

/// The non-archimedean limit of `φ` on the skeleton of `model`, computed at
/// each divisorial point both from the Lelong-number formula and by direct
/// restriction, then interpolated affinely on every simplex.
pub fn na_limit_tfs(phi: &TropicalFSMetric, model: &Arc<SncModelCombinatorics>, scale: &LogScale) -> Result<NaLimitReport> {
    phi.validate()?;
    let mut vertex_values = Vec::with_capacity(model.components.len());
    let mut vertices = Vec::with_capacity(model.components.len());
    for (i, c) in model.components.iter().enumerate() {
        let v = divisorial_point(model, i)?;
        let b = Q::from_integer(c.mult.into());
        let lelong = lelong_at(phi, &v, &b, scale, &c.label)?;
        let formula = LogAffine::new(&lelong.rational / &b, &lelong.per_log_r / &b);
        let restriction = tfs_eval(phi, &v, scale)?;
        vertices.push(VertexComparison {
            component: i,
            label: c.label.clone(),
            b: c.mult,
            agree: formula == restriction,
            lelong,
            formula: formula.clone(),
            restriction,
        });
        vertex_values.push(formula);
    }
    let pieces = model
        .strata
        .iter()
        .map(|s| AffinePiece {
            gradient: s.indices.iter().map(|j| vertex_values[*j].scale(&model.mult(*j))).collect(),
            offset: LogAffine::zero(),
        })
        .collect();
    let potential = PAFunction { model: model.clone(), pieces };
    let continuity = potential.check_continuity();
    let mut affine_on_model = true;
    for k in 0..model.strata.len() {
        for p in interior_points(model, k)? {
            if potential.eval(&p)? != tfs_eval(phi, &p, scale)? {
                affine_on_model = false;
            }
        }
    }
    Ok(NaLimitReport { potential, vertices, continuity, affine_on_model })
}

/// `(2m)⁻¹ log Σ e^{2m xᵢ} − max xᵢ`, evaluated without overflow.
pub fn lse_max_gap(x: &[f64], m: u32) -> f64 {
    assert!(!x.is_empty(), "lse_max_gap needs at least one value");
    let mx = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let k = 2.0 * m as f64;
    let s: f64 = x.iter().map(|xi| (k * (xi - mx)).exp()).sum();
    s.ln() / k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;
    use crate::valuation::Coefficient;

    fn segment() -> Arc<SncModelCombinatorics> {
        Arc::new(SncModelCombinatorics::simple("seg", &[("z1", 1), ("z2", 1)], &[&[0], &[1], &[0, 1]]).unwrap())
    }

    fn mono(exp: Vec<i64>) -> LaurentSeriesData {
        LaurentSeriesData::monomial(&["z1", "z2", "t"], exp).unwrap()
    }

    fn entry(exp: Vec<i64>, c: Q) -> TfsEntry {
        TfsEntry { section: mono(exp), constant: c }
    }

    #[test]
    fn unit_term_wins_at_vertex() {
        let seg = segment();
        let s = LogScale::new(q(1, 2)).unwrap();
        let phi = TropicalFSMetric::new(1, vec![entry(vec![0, 0, 0], q(0, 1)), entry(vec![1, 0, 0], q(0, 1))], mono(vec![0, 0, 0])).unwrap();
        let v1 = divisorial_point(&seg, 0).unwrap();
        assert_eq!(tfs_eval(&phi, &v1, &s).unwrap(), LogAffine::zero());
    }

    #[test]
    fn t_versus_z1_on_segment() {
        let seg = segment();
        let s = LogScale::new(q(1, 3)).unwrap();
        let phi = TropicalFSMetric::new(1, vec![entry(vec![0, 0, 1], q(0, 1)), entry(vec![1, 0, 0], q(0, 1))], mono(vec![0, 0, 0])).unwrap();
        let pts = [
            (2usize, vec![q(1, 1), q(0, 1)], q(1, 1)),
            (2, vec![q(0, 1), q(1, 1)], q(0, 1)),
            (2, vec![q(1, 2), q(1, 2)], q(1, 2)),
        ];
        for (st, w, expect) in pts {
            let v = QuasiMonomialPoint::new(seg.clone(), st, w).unwrap();
            // log r·min(1, w1) since log r < 0
            assert_eq!(tfs_eval(&phi, &v, &s).unwrap(), LogAffine::of_log_r(expect));
        }
        let rep = na_limit_tfs(&phi, &seg, &s).unwrap();
        assert!(rep.routes_agree() && rep.continuity.continuous && rep.affine_on_model);
    }

    #[test]
    fn negative_order_needs_meromorphic_flag() {
        let seg = segment();
        let s = LogScale::new(q(1, 2)).unwrap();
        let mut phi = TropicalFSMetric::new(1, vec![entry(vec![-1, 0, 0], q(0, 1))], mono(vec![0, 0, 0])).unwrap();
        assert!(matches!(na_limit_tfs(&phi, &seg, &s), Err(Error::NotRegular(_))));
        phi.meromorphic = true;
        assert!(na_limit_tfs(&phi, &seg, &s).unwrap().routes_agree());
    }

    #[test]
    fn zero_sections_are_not_basepoint_free() {
        let seg = segment();
        let s = LogScale::new(q(1, 2)).unwrap();
        let zero = LaurentSeriesData::from_terms(&["z1", "z2", "t"], Vec::<(Vec<i64>, Coefficient)>::new()).unwrap();
        let phi = TropicalFSMetric::new(1, vec![TfsEntry { section: zero, constant: q(0, 1) }], mono(vec![0, 0, 0])).unwrap();
        let v = divisorial_point(&seg, 0).unwrap();
        assert!(matches!(tfs_eval(&phi, &v, &s), Err(Error::NotBasepointFree(_))));
    }

    #[test]
    fn gap_worked_values() {
        assert_eq!(lse_max_gap(&[3.0], 2), 0.0);
        assert!((lse_max_gap(&[0.0, 0.0], 1) - 2f64.ln() / 2.0).abs() < 1e-15);
        assert!(lse_max_gap(&[1e6, -1e6], 1) == 0.0);
    }
}
