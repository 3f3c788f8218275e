//! Laurent-monomial data and the valuations that act on it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use num::{One, Signed, Zero};
use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::dual_complex::SncModelCombinatorics;
use crate::error::{Error, Result};
use crate::exact::{fmt_q, parse_q, q_to_f64, Q};

/// Label of the uniformizer.
pub const T_LABEL: &str = "t";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coefficient {
    /// Some non-zero coefficient whose exact value does not matter.
    Unit,
    Explicit(Complex<Q>),
}

impl Coefficient {
    fn combine_sum(&self, other: &Coefficient) -> Option<Coefficient> {
        match (self, other) {
            (Coefficient::Explicit(a), Coefficient::Explicit(b)) => {
                let s = a + b;
                if s.is_zero() {
                    None
                } else {
                    Some(Coefficient::Explicit(s))
                }
            }
            _ => Some(Coefficient::Unit),
        }
    }

    fn product(&self, other: &Coefficient) -> Coefficient {
        match (self, other) {
            (Coefficient::Explicit(a), Coefficient::Explicit(b)) => Coefficient::Explicit(a * b),
            _ => Coefficient::Unit,
        }
    }

    pub fn to_c64(&self) -> Option<Complex64> {
        match self {
            Coefficient::Unit => None,
            Coefficient::Explicit(c) => Some(Complex64::new(q_to_f64(&c.re), q_to_f64(&c.im))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoefRepr {
    Tag(String),
    Pair([String; 2]),
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<i64>,
    coef: CoefRepr,
}

#[derive(Serialize, Deserialize)]
struct LaurentRepr {
    vars: Vec<String>,
    terms: Vec<TermRepr>,
}

/// Finite Laurent polynomial with tagged coefficients.
///
/// Terms are keyed by exponent vector, so iteration is lexicographic and a
/// stored term is never zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LaurentRepr", into = "LaurentRepr")]
pub struct LaurentSeriesData {
    vars: Vec<String>,
    terms: BTreeMap<Vec<i64>, Coefficient>,
}

impl TryFrom<LaurentRepr> for LaurentSeriesData {
    type Error = Error;

    fn try_from(r: LaurentRepr) -> Result<Self> {
        let mut out = LaurentSeriesData::zero(r.vars)?;
        for t in r.terms {
            if t.exp.len() != out.vars.len() {
                return Err(Error::parse(format!(
                    "exponent {:?} has length {}, expected {}",
                    t.exp,
                    t.exp.len(),
                    out.vars.len()
                )));
            }
            let coef = match t.coef {
                CoefRepr::Tag(s) if s == "unit" => Some(Coefficient::Unit),
                CoefRepr::Tag(s) if s == "zero" => None,
                CoefRepr::Tag(s) => return Err(Error::parse(format!("unknown coefficient tag `{s}`"))),
                CoefRepr::Pair([re, im]) => {
                    let c = Complex::new(parse_q(&re)?, parse_q(&im)?);
                    if c.is_zero() {
                        None
                    } else {
                        Some(Coefficient::Explicit(c))
                    }
                }
            };
            if let Some(c) = coef {
                out.push_term(t.exp, c);
            }
        }
        Ok(out)
    }
}

impl From<LaurentSeriesData> for LaurentRepr {
    fn from(f: LaurentSeriesData) -> Self {
        LaurentRepr {
            vars: f.vars,
            terms: f
                .terms
                .into_iter()
                .map(|(exp, c)| TermRepr {
                    exp,
                    coef: match c {
                        Coefficient::Unit => CoefRepr::Tag("unit".into()),
                        Coefficient::Explicit(z) => CoefRepr::Pair([fmt_q(&z.re), fmt_q(&z.im)]),
                    },
                })
                .collect(),
        }
    }
}

impl LaurentSeriesData {
    pub fn zero(vars: Vec<String>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for v in &vars {
            if !seen.insert(v) {
                return Err(Error::config(format!("duplicate variable `{v}`")));
            }
        }
        Ok(Self { vars, terms: BTreeMap::new() })
    }

    pub fn from_terms<I>(vars: &[&str], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Coefficient)>,
    {
        let mut out = Self::zero(vars.iter().map(|s| s.to_string()).collect())?;
        for (exp, c) in terms {
            if exp.len() != vars.len() {
                return Err(Error::config("exponent length does not match variables"));
            }
            out.push_term(exp, c);
        }
        Ok(out)
    }

    pub fn monomial(vars: &[&str], exp: Vec<i64>) -> Result<Self> {
        Self::from_terms(vars, [(exp, Coefficient::Unit)])
    }

    /// Adds a term, merging with an existing one on the same exponent.
    pub fn push_term(&mut self, exp: Vec<i64>, coef: Coefficient) {
        match self.terms.remove(&exp) {
            None => {
                self.terms.insert(exp, coef);
            }
            Some(old) => {
                if let Some(c) = old.combine_sum(&coef) {
                    self.terms.insert(exp, c);
                }
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Coefficient)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_same_vars(&self, other: &Self) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::Incompatible(format!(
                "variable lists differ: {:?} vs {:?}",
                self.vars, other.vars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.push_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut out = Self { vars: self.vars.clone(), terms: BTreeMap::new() };
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.push_term(e, c1.product(c2));
            }
        }
        Ok(out)
    }

    /// True when two distinct term pairs of the formal product share an exponent.
    pub fn product_has_collisions(&self, other: &Self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        for e1 in self.terms.keys() {
            for e2 in other.terms.keys() {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                if !seen.insert(e) {
                    return true;
                }
            }
        }
        false
    }

    /// Re-expresses the data over a larger variable list (missing exponents are 0).
    pub fn embed(&self, vars: &[String]) -> Result<Self> {
        let pos: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::Incompatible(format!("variable `{v}` missing from target list")))
            })
            .collect::<Result<_>>()?;
        let mut out = Self::zero(vars.to_vec())?;
        for (e, c) in &self.terms {
            let mut ne = vec![0; vars.len()];
            for (k, p) in pos.iter().enumerate() {
                ne[*p] = e[k];
            }
            out.push_term(ne, c.clone());
        }
        Ok(out)
    }

    /// Numeric value at a point (one complex number per variable).
    pub fn eval_c64(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.vars.len() {
            return Err(Error::config("evaluation point has wrong dimension"));
        }
        let mut acc = Complex64::zero();
        for (e, c) in &self.terms {
            let c = c
                .to_c64()
                .ok_or_else(|| Error::Unsupported("numeric evaluation needs explicit coefficients".into()))?;
            let mut m = c;
            for (x, k) in point.iter().zip(e) {
                m *= x.powi(*k as i32);
            }
            acc += m;
        }
        Ok(acc)
    }

    pub fn has_tag_coefficients(&self) -> bool {
        self.terms.values().any(|c| matches!(c, Coefficient::Unit))
    }
}

/// Value of a valuation: a rational or `+∞` (on the zero element).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ValuationValue {
    Finite(Q),
    Infinity,
}

impl ValuationValue {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            ValuationValue::Finite(q) => Some(q),
            ValuationValue::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ValuationValue::Infinity)
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ValuationValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ValuationValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ValuationValue::Finite(a), ValuationValue::Finite(b)) => a.cmp(b),
            (ValuationValue::Finite(_), ValuationValue::Infinity) => Ordering::Less,
            (ValuationValue::Infinity, ValuationValue::Finite(_)) => Ordering::Greater,
            (ValuationValue::Infinity, ValuationValue::Infinity) => Ordering::Equal,
        }
    }
}

impl Add for &ValuationValue {
    type Output = ValuationValue;
    fn add(self, o: &ValuationValue) -> ValuationValue {
        match (self, o) {
            (ValuationValue::Finite(a), ValuationValue::Finite(b)) => ValuationValue::Finite(a + b),
            _ => ValuationValue::Infinity,
        }
    }
}

impl fmt::Display for ValuationValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuationValue::Finite(q) => write!(f, "{}", fmt_q(q)),
            ValuationValue::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for ValuationValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ValuationValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "inf" || s == "+inf" {
            return Ok(ValuationValue::Infinity);
        }
        parse_q(&s).map(ValuationValue::Finite).map_err(serde::de::Error::custom)
    }
}

/// `min ⟨weights, β⟩` over the stored exponents, `+∞` on zero.
pub fn monomial_min(f: &LaurentSeriesData, weights: &[Q]) -> ValuationValue {
    let mut best: Option<Q> = None;
    for e in f.terms.keys() {
        let s = e
            .iter()
            .zip(weights)
            .fold(Q::zero(), |acc, (k, w)| acc + w * Q::from_integer((*k).into()));
        best = match best {
            Some(b) if b <= s => Some(b),
            _ => Some(s),
        };
    }
    best.map_or(ValuationValue::Infinity, ValuationValue::Finite)
}

/// A point of the skeleton: a stratum of a model plus barycentric-type weights.
#[derive(Clone, Debug)]
pub struct QuasiMonomialPoint {
    model: Arc<SncModelCombinatorics>,
    stratum: usize,
    weights: Vec<Q>,
}

impl PartialEq for QuasiMonomialPoint {
    fn eq(&self, other: &Self) -> bool {
        self.model.name == other.model.name && self.stratum == other.stratum && self.weights == other.weights
    }
}

impl QuasiMonomialPoint {
    /// `weights` are indexed like the stratum's component indices.
    pub fn new(model: Arc<SncModelCombinatorics>, stratum: usize, weights: Vec<Q>) -> Result<Self> {
        let st = model
            .strata
            .get(stratum)
            .ok_or(Error::InvalidIndex { index: stratum, len: model.strata.len() })?;
        if st.indices.len() != weights.len() {
            return Err(Error::validation(format!(
                "stratum {} has {} components but {} weights were given",
                st.label,
                st.indices.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::validation("weights must be non-negative"));
        }
        let total = st
            .indices
            .iter()
            .zip(&weights)
            .fold(Q::zero(), |acc, (i, w)| acc + w * Q::from_integer(model.components[*i].mult.into()));
        if !total.is_one() {
            return Err(Error::validation(format!(
                "weights violate the simplex constraint: sum a_j w_j = {}",
                fmt_q(&total)
            )));
        }
        Ok(Self { model, stratum, weights })
    }

    pub fn model(&self) -> &Arc<SncModelCombinatorics> {
        &self.model
    }

    pub fn stratum(&self) -> usize {
        self.stratum
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn indices(&self) -> &[usize] {
        &self.model.strata[self.stratum].indices
    }

    /// Weight of every component of the model (0 outside the stratum).
    pub fn component_weights(&self) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.model.components.len()];
        for (i, w) in self.indices().iter().zip(&self.weights) {
            out[*i] = w.clone();
        }
        out
    }

    /// Weight attached to a variable label.
    pub fn weight_of(&self, label: &str) -> Result<Q> {
        if label == T_LABEL {
            return Ok(Q::one());
        }
        let idx = self
            .model
            .component_index(label)
            .ok_or_else(|| Error::config(format!("variable `{label}` is not a component of model `{}`", self.model.name)))?;
        Ok(self
            .indices()
            .iter()
            .position(|i| *i == idx)
            .map_or_else(Q::zero, |k| self.weights[k].clone()))
    }
}

/// Evaluates the monomial valuation of `v` on `f`.
pub fn qm_eval(v: &QuasiMonomialPoint, f: &LaurentSeriesData) -> Result<ValuationValue> {
    let w: Vec<Q> = f.vars().iter().map(|l| v.weight_of(l)).collect::<Result<_>>()?;
    Ok(monomial_min(f, &w))
}

/// The vertex `v_{D_i} = a_i⁻¹ ord_{D_i}`.
pub fn divisorial_point(model: &Arc<SncModelCombinatorics>, component: usize) -> Result<QuasiMonomialPoint> {
    let c = model
        .components
        .get(component)
        .ok_or(Error::InvalidIndex { index: component, len: model.components.len() })?;
    let stratum = model
        .strata
        .iter()
        .position(|s| s.indices == [component])
        .ok_or_else(|| Error::validation(format!("component {} has no vertex stratum", c.label)))?;
    QuasiMonomialPoint::new(model.clone(), stratum, vec![Q::new(1.into(), c.mult.into())])
}

/// `min_n (v(s_n) + n)` over `(n, handle)` pairs.
pub fn gauss_extension<H, F>(oracle: F, pairs: &[(i64, H)]) -> Result<ValuationValue>
where
    F: Fn(&H) -> Result<ValuationValue>,
{
    let mut best = ValuationValue::Infinity;
    for (n, h) in pairs {
        let v = &oracle(h)? + &ValuationValue::Finite(Q::from_integer((*n).into()));
        best = best.min(v);
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct SuperadditivityReport {
    pub v_f: ValuationValue,
    pub v_g: ValuationValue,
    pub v_product: ValuationValue,
    pub v_sum: ValuationValue,
    pub product_collisions: bool,
    pub product_holds: bool,
    pub product_equality_holds: bool,
    pub sum_holds: bool,
}

impl SuperadditivityReport {
    pub fn holds(&self) -> bool {
        self.product_holds && self.product_equality_holds && self.sum_holds
    }
}

/// Checks `v(fg) ≥ v(f)+v(g)` (equality without exponent collisions) and
/// `v(f+g) ≥ min(v(f), v(g))` on the formal product and sum.
pub fn valuation_superadditivity_check(
    v: &QuasiMonomialPoint,
    f: &LaurentSeriesData,
    g: &LaurentSeriesData,
) -> Result<SuperadditivityReport> {
    let v_f = qm_eval(v, f)?;
    let v_g = qm_eval(v, g)?;
    let v_product = qm_eval(v, &f.mul(g)?)?;
    let v_sum = qm_eval(v, &f.add(g)?)?;
    let bound = &v_f + &v_g;
    let product_collisions = f.product_has_collisions(g);
    Ok(SuperadditivityReport {
        product_holds: v_product >= bound,
        product_equality_holds: product_collisions || v_product == bound,
        sum_holds: v_sum >= v_f.clone().min(v_g.clone()),
        v_f,
        v_g,
        v_product,
        v_sum,
        product_collisions,
    })
}
