//! Functions on the ℝ-tree `M(ℤ)`: Fubini-Study functions of integer families,
//! outgoing slopes, and the plurisubharmonicity verdict.
//!
//! A p-adic branch is parametrized by `ε ∈ [0, ∞]`; its data are stored in the
//! length coordinate `s = ε·log p`, where Fubini-Study functions have rational
//! breakpoints and slopes. The archimedean branch `x ∈ [0, 1]` is stored as the
//! ordered list of its affine pieces. All arithmetic is exact.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{fmt_q, gcd_u64, is_prime, lcm_u64, p_adic_valuation, parse_q, qi, rat, rat_vec, LogQ, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Param {
    Finite(Q),
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MZPoint {
    Origin,
    Padic { p: u64, eps: Param },
    Archimedean { x: Q },
}

impl MZPoint {
    pub fn padic(p: u64, eps: Q) -> Self {
        MZPoint::Padic { p, eps: Param::Finite(eps) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MZPoint::Origin => Ok(()),
            MZPoint::Padic { p, eps } => {
                if !is_prime(*p) {
                    return Err(Error::config(format!("{p} is not prime")));
                }
                match eps {
                    Param::Finite(e) if e.is_negative() => Err(Error::config("ε must be non-negative")),
                    _ => Ok(()),
                }
            }
            MZPoint::Archimedean { x } => {
                if x.is_negative() || *x > qi(1) {
                    Err(Error::config("archimedean parameter must lie in [0, 1]"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Accepts `origin`, `inf:<x>`, or `<p>:<ε>` with `ε` rational or `inf`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "origin" {
            return Ok(MZPoint::Origin);
        }
        let (b, v) = s.split_once(':').ok_or_else(|| Error::parse(format!("bad point {s:?}")))?;
        let pt = if b == "inf" {
            MZPoint::Archimedean { x: parse_q(v)? }
        } else {
            let p: u64 = b.parse().map_err(|_| Error::parse(format!("bad branch {b:?}")))?;
            let eps = if v == "inf" { Param::Infinity } else { Param::Finite(parse_q(v)?) };
            MZPoint::Padic { p, eps }
        };
        pt.validate()?;
        Ok(pt)
    }
}

impl fmt::Display for MZPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MZPoint::Origin => write!(f, "origin"),
            MZPoint::Padic { p, eps: Param::Finite(e) } => write!(f, "{p}:{}", fmt_q(e)),
            MZPoint::Padic { p, eps: Param::Infinity } => write!(f, "{p}:inf"),
            MZPoint::Archimedean { x } => write!(f, "inf:{}", fmt_q(x)),
        }
    }
}

impl Serialize for MZPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MZPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        MZPoint::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MZValue {
    Finite(LogQ),
    NegInfinity,
    PosInfinity,
}

impl MZValue {
    pub fn finite(&self) -> Option<&LogQ> {
        match self {
            MZValue::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl Serialize for MZValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MZValue::Finite(v) => v.serialize(s),
            MZValue::NegInfinity => s.serialize_str("-inf"),
            MZValue::PosInfinity => s.serialize_str("+inf"),
        }
    }
}

impl fmt::Display for MZValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MZValue::Finite(v) => write!(f, "{v}"),
            MZValue::NegInfinity => write!(f, "-inf"),
            MZValue::PosInfinity => write!(f, "+inf"),
        }
    }
}

// ---------------------------------------------------------------------------
// Fubini-Study families

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsTerm {
    pub n: i64,
    #[serde(with = "rat")]
    pub c: Q,
}

/// `m⁻¹·max_α(log|n_α| + c_α)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsFamily {
    #[serde(default = "one")]
    pub m: u32,
    pub terms: Vec<FsTerm>,
}

fn one() -> u32 {
    1
}

impl FsFamily {
    pub fn new(m: u32, terms: &[(i64, Q)]) -> Result<Self> {
        let f = Self { m, terms: terms.iter().map(|(n, c)| FsTerm { n: *n, c: c.clone() }).collect() };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config("m must be positive"));
        }
        if self.terms.is_empty() {
            return Err(Error::config("empty family"));
        }
        if self.terms.iter().any(|t| t.n == 0) {
            return Err(Error::Rejected("n_α = 0 has no logarithm".into()));
        }
        Ok(())
    }

    fn inv_m(&self) -> Q {
        Q::new(1.into(), self.m.into())
    }

    /// Indices attaining `max_α c_α`.
    pub fn argmax(&self) -> Vec<usize> {
        let top = self.terms.iter().map(|t| &t.c).max().expect("non-empty");
        (0..self.terms.len()).filter(|&i| &self.terms[i].c == top).collect()
    }

    pub fn primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self
            .terms
            .iter()
            .flat_map(|t| crate::exact::factorize(t.n.unsigned_abs()).into_iter().map(|(p, _)| p))
            .collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }
}

/// Exact value of the Fubini-Study function at a point of `M(ℤ)`.
pub fn mz_fs_eval(family: &FsFamily, point: &MZPoint) -> Result<MZValue> {
    family.validate()?;
    point.validate()?;
    let inv_m = family.inv_m();
    let value = match point {
        MZPoint::Origin => {
            let top = family.terms.iter().map(|t| &t.c).max().expect("non-empty");
            MZValue::Finite(LogQ::rational(top * &inv_m))
        }
        MZPoint::Padic { p, eps: Param::Finite(e) } => {
            let cands: Vec<LogQ> = family
                .terms
                .iter()
                .map(|t| {
                    let mut v = LogQ::rational(t.c.clone());
                    v.add_log(*p, -Q::from_integer(p_adic_valuation(t.n, *p).into()) * e);
                    v.scale(&inv_m)
                })
                .collect();
            MZValue::Finite(LogQ::max_of(&cands).expect("non-empty"))
        }
        MZPoint::Padic { p, eps: Param::Infinity } => {
            match family.terms.iter().filter(|t| p_adic_valuation(t.n, *p) == 0).map(|t| &t.c).max() {
                Some(c) => MZValue::Finite(LogQ::rational(c * &inv_m)),
                None => MZValue::NegInfinity,
            }
        }
        MZPoint::Archimedean { x } => {
            let cands: Vec<LogQ> = family
                .terms
                .iter()
                .map(|t| (&LogQ::log_abs_int(t.n).scale(x) + &LogQ::rational(t.c.clone())).scale(&inv_m))
                .collect();
            MZValue::Finite(LogQ::max_of(&cands).expect("non-empty"))
        }
    };
    Ok(value)
}

// ---------------------------------------------------------------------------
// branch data

/// Piecewise-affine data on `s ∈ [0, ∞)`, `s = ε·log p`, relative to the origin value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicBranch {
    #[serde(with = "rat_vec", default)]
    pub breakpoints: Vec<Q>,
    #[serde(with = "rat_vec")]
    pub slopes: Vec<Q>,
}

impl PadicBranch {
    pub fn constant() -> Self {
        Self { breakpoints: vec![], slopes: vec![Q::zero()] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.slopes.len() != self.breakpoints.len() + 1 {
            return Err(Error::Unsupported("need one more slope than breakpoints".into()));
        }
        if self.breakpoints.first().is_some_and(|b| !b.is_positive())
            || self.breakpoints.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Unsupported("breakpoints must be positive and increasing".into()));
        }
        Ok(())
    }

    /// Value at `s` minus the origin value, `s` given as `ε·log p`.
    fn increment(&self, p: u64, eps: &Q) -> LogQ {
        let s = LogQ::log_prime(p, eps.clone());
        let mut acc = LogQ::zero();
        let mut left = Q::zero();
        for (i, slope) in self.slopes.iter().enumerate() {
            match self.breakpoints.get(i) {
                Some(b) if (&s - &LogQ::rational(b.clone())).sign() == Ordering::Greater => {
                    acc = &acc + &LogQ::rational(slope * (b - &left));
                    left = b.clone();
                }
                _ => {
                    return &acc + &(&s - &LogQ::rational(left)).scale(slope);
                }
            }
        }
        unreachable!("the last slope has no breakpoint")
    }

    fn end_value(&self, origin: &LogQ) -> MZValue {
        let last = self.slopes.last().expect("validated");
        match last.cmp(&Q::zero()) {
            Ordering::Less => MZValue::NegInfinity,
            Ordering::Greater => MZValue::PosInfinity,
            Ordering::Equal => {
                let mut left = Q::zero();
                let mut acc = Q::zero();
                for (b, s) in self.breakpoints.iter().zip(&self.slopes) {
                    acc += s * (b - &left);
                    left = b.clone();
                }
                MZValue::Finite(origin + &LogQ::rational(acc))
            }
        }
    }

    fn convex(&self) -> bool {
        self.slopes.windows(2).all(|w| w[0] <= w[1])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchPiece {
    pub slope: LogQ,
    pub intercept: LogQ,
}

/// Consecutive affine pieces on `x ∈ [0, 1]`; piece `i+1` takes over where it meets piece `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchBranch {
    pub pieces: Vec<ArchPiece>,
}

impl ArchBranch {
    pub fn constant(v: LogQ) -> Self {
        Self { pieces: vec![ArchPiece { slope: LogQ::zero(), intercept: v }] }
    }

    fn eval(&self, x: &Q) -> LogQ {
        let mut i = 0;
        while i + 1 < self.pieces.len() {
            let (a, b) = (&self.pieces[i], &self.pieces[i + 1]);
            // b takes over once x·(s_b − s_a) ≥ c_a − c_b
            let lhs = (&b.slope - &a.slope).scale(x);
            let rhs = &a.intercept - &b.intercept;
            if lhs.cmp_value(&rhs) == Ordering::Less {
                break;
            }
            i += 1;
        }
        let p = &self.pieces[i];
        &p.slope.scale(x) + &p.intercept
    }

    fn convex(&self) -> bool {
        self.pieces.windows(2).all(|w| w[0].slope.cmp_value(&w[1].slope) != Ordering::Greater)
    }
}

/// A function on `M(ℤ)` with finitely many non-default p-adic branches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MZFunction {
    pub origin: LogQ,
    pub padic: BTreeMap<u64, PadicBranch>,
    pub default: PadicBranch,
    pub archimedean: ArchBranch,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BranchRepr {
    Arch(ArchBranch),
    Padic(PadicBranch),
}

#[derive(Serialize, Deserialize)]
struct MZFunctionRepr {
    origin: LogQ,
    #[serde(default)]
    branches: BTreeMap<String, BranchRepr>,
}

impl Serialize for MZFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut branches: BTreeMap<String, BranchRepr> =
            self.padic.iter().map(|(p, b)| (p.to_string(), BranchRepr::Padic(b.clone()))).collect();
        branches.insert("default".into(), BranchRepr::Padic(self.default.clone()));
        branches.insert("inf".into(), BranchRepr::Arch(self.archimedean.clone()));
        MZFunctionRepr { origin: self.origin.clone(), branches }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MZFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MZFunctionRepr::deserialize(d)?;
        let mut f = MZFunction {
            archimedean: ArchBranch::constant(repr.origin.clone()),
            origin: repr.origin,
            padic: BTreeMap::new(),
            default: PadicBranch::constant(),
        };
        for (key, b) in repr.branches {
            match (key.as_str(), b) {
                ("inf", BranchRepr::Arch(a)) => f.archimedean = a,
                ("default", BranchRepr::Padic(p)) => f.default = p,
                (k, BranchRepr::Padic(p)) => {
                    let prime: u64 = k.parse().map_err(|_| D::Error::custom(format!("bad branch key {k:?}")))?;
                    f.padic.insert(prime, p);
                }
                (k, _) => return Err(D::Error::custom(format!("branch {k:?} has the wrong data shape"))),
            }
        }
        f.validate().map_err(D::Error::custom)?;
        Ok(f)
    }
}

impl MZFunction {
    pub fn constant(v: LogQ) -> Self {
        Self {
            archimedean: ArchBranch::constant(v.clone()),
            origin: v,
            padic: BTreeMap::new(),
            default: PadicBranch::constant(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (p, b) in &self.padic {
            if !is_prime(*p) {
                return Err(Error::validation(format!("branch key {p} is not prime")));
            }
            b.validate()?;
        }
        self.default.validate()?;
        let first = self
            .archimedean
            .pieces
            .first()
            .ok_or_else(|| Error::Unsupported("archimedean branch has no pieces".into()))?;
        if first.intercept != self.origin {
            return Err(Error::validation("archimedean branch does not start at the origin value"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn branch(&self, p: u64) -> &PadicBranch {
        self.padic.get(&p).unwrap_or(&self.default)
    }

    pub fn eval(&self, point: &MZPoint) -> Result<MZValue> {
        point.validate()?;
        Ok(match point {
            MZPoint::Origin => MZValue::Finite(self.origin.clone()),
            MZPoint::Padic { p, eps: Param::Finite(e) } => {
                MZValue::Finite(&self.origin + &self.branch(*p).increment(*p, e))
            }
            MZPoint::Padic { p, eps: Param::Infinity } => self.branch(*p).end_value(&self.origin),
            MZPoint::Archimedean { x } => MZValue::Finite(self.archimedean.eval(x)),
        })
    }
}

/// Branch functions of `m⁻¹·max_α(log|n_α| + c_α)`.
pub fn mz_fs_function(family: &FsFamily) -> Result<MZFunction> {
    family.validate()?;
    let inv_m = family.inv_m();
    let top = family.terms.iter().map(|t| &t.c).max().expect("non-empty").clone();
    let origin = LogQ::rational(&top * &inv_m);
    let mut padic = BTreeMap::new();
    for p in family.primes() {
        // lines in s: slope −v_p(n)/m, intercept c/m
        let lines: Vec<(Q, Q)> = family
            .terms
            .iter()
            .map(|t| (-Q::from_integer(p_adic_valuation(t.n, p).into()) * &inv_m, &t.c * &inv_m))
            .collect();
        let env = crate::monge_ampere::LinePA::from_lines(&lines)?;
        let slopes = env.slopes();
        let knots = env.knots();
        let mut branch = PadicBranch { breakpoints: vec![], slopes: vec![] };
        let single = knots.len() == 1 && env.left_slope() == env.right_slope();
        if single {
            branch.slopes.push(env.left_slope().clone());
        } else {
            let start = knots.iter().position(|k| k.0.is_positive()).unwrap_or(knots.len());
            branch.slopes.push(slopes[start].clone());
            for (i, k) in knots.iter().enumerate().skip(start) {
                branch.breakpoints.push(k.0.clone());
                branch.slopes.push(slopes[i + 1].clone());
            }
        }
        padic.insert(p, branch);
    }
    // archimedean envelope, walking right from x = 0
    let lines: Vec<(LogQ, Q)> =
        family.terms.iter().map(|t| (LogQ::log_abs_int(t.n).scale(&inv_m), &t.c * &inv_m)).collect();
    let mut cur = family
        .argmax()
        .into_iter()
        .max_by(|&a, &b| lines[a].0.cmp_value(&lines[b].0))
        .expect("non-empty");
    let mut pieces = vec![ArchPiece { slope: lines[cur].0.clone(), intercept: LogQ::rational(lines[cur].1.clone()) }];
    loop {
        // crossing of cur with j at x = (c_cur − c_j)/(s_j − s_cur)
        let mut best: Option<(usize, Q, LogQ)> = None;
        for (j, (sj, cj)) in lines.iter().enumerate() {
            let ds = sj - &lines[cur].0;
            if ds.sign() != Ordering::Greater {
                continue;
            }
            let num = &lines[cur].1 - cj;
            // x < 1  ⇔  num < ds
            if (&LogQ::rational(num.clone()) - &ds).sign() != Ordering::Less {
                continue;
            }
            let better = match &best {
                None => true,
                Some((k, bn, bd)) => match (&ds.scale(bn) - &bd.scale(&num)).sign() {
                    // num/ds < bn/bd  ⇔  num·bd < bn·ds
                    Ordering::Greater => true,
                    Ordering::Equal => sj.cmp_value(&lines[*k].0) == Ordering::Greater,
                    Ordering::Less => false,
                },
            };
            if better {
                best = Some((j, num, ds));
            }
        }
        match best {
            Some((j, _, _)) => {
                cur = j;
                pieces.push(ArchPiece { slope: lines[j].0.clone(), intercept: LogQ::rational(lines[j].1.clone()) });
            }
            None => break,
        }
    }
    let f = MZFunction { origin, padic, default: PadicBranch::constant(), archimedean: ArchBranch { pieces } };
    f.validate()?;
    Ok(f)
}

// ---------------------------------------------------------------------------
// slopes and the verdict

#[derive(Clone, Debug, Serialize)]
pub struct BranchSlopes {
    /// Outgoing slope at the origin in `ε`.
    pub at_origin: LogQ,
    /// Slope near `ε = ∞`.
    pub at_end: LogQ,
    pub end_value: MZValue,
    pub convex: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MZSlopeReport {
    pub padic: BTreeMap<u64, BranchSlopes>,
    /// Default branch slopes as multiples of `log p`.
    #[serde(with = "rat")]
    pub default_at_origin: Q,
    #[serde(with = "rat")]
    pub default_at_end: Q,
    pub default_convex: bool,
    pub s_inf: LogQ,
    pub inf_convex: bool,
    pub inf_increasing: bool,
    pub slope_sum: MZValue,
}

pub fn mz_slopes(f: &MZFunction) -> Result<MZSlopeReport> {
    f.validate()?;
    let padic = f
        .padic
        .iter()
        .map(|(p, b)| {
            let first = b.slopes.first().expect("validated");
            let last = b.slopes.last().expect("validated");
            (
                *p,
                BranchSlopes {
                    at_origin: LogQ::log_prime(*p, first.clone()),
                    at_end: LogQ::log_prime(*p, last.clone()),
                    end_value: b.end_value(&f.origin),
                    convex: b.convex(),
                },
            )
        })
        .collect::<BTreeMap<_, _>>();
    let s_inf = f.archimedean.pieces[0].slope.clone();
    let inf_convex = f.archimedean.convex();
    let inf_increasing = f.archimedean.pieces.iter().all(|p| p.slope.sign() != Ordering::Less);
    let d0 = f.default.slopes[0].clone();
    let slope_sum = match d0.cmp(&Q::zero()) {
        // infinitely many primes share the default slope
        Ordering::Less => MZValue::NegInfinity,
        Ordering::Greater => MZValue::PosInfinity,
        Ordering::Equal => {
            MZValue::Finite(padic.values().fold(s_inf.clone(), |acc, b: &BranchSlopes| &acc + &b.at_origin))
        }
    };
    Ok(MZSlopeReport {
        padic,
        default_at_end: f.default.slopes.last().expect("validated").clone(),
        default_at_origin: d0,
        default_convex: f.default.convex(),
        s_inf,
        inf_convex,
        inf_increasing,
        slope_sum,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MZVerdict {
    pub psh: bool,
    /// Machine-readable failure codes.
    pub reasons: Vec<String>,
    pub report: MZSlopeReport,
}

pub fn mz_psh_check(f: &MZFunction) -> Result<MZVerdict> {
    let report = mz_slopes(f)?;
    let mut reasons = Vec::new();
    for (p, b) in &report.padic {
        if !b.convex {
            reasons.push(format!("padic_not_convex:{p}"));
        }
        if b.at_origin.sign() == Ordering::Greater {
            reasons.push(format!("padic_slope_positive:{p}"));
        }
        if b.at_end.sign() == Ordering::Greater {
            reasons.push(format!("padic_end_slope_positive:{p}"));
        }
    }
    if !report.default_convex {
        reasons.push("padic_not_convex:default".into());
    }
    if report.default_at_origin.is_positive() {
        reasons.push("padic_slope_positive:default".into());
    }
    if report.default_at_end.is_positive() {
        reasons.push("padic_end_slope_positive:default".into());
    }
    if !report.inf_convex {
        reasons.push("inf_not_convex".into());
    }
    if !report.inf_increasing {
        reasons.push("inf_not_increasing".into());
    }
    if report.s_inf.sign() == Ordering::Less {
        reasons.push("s_inf_negative".into());
    }
    let sum_ok = match &report.slope_sum {
        MZValue::Finite(v) => v.sign() != Ordering::Less,
        MZValue::NegInfinity => false,
        MZValue::PosInfinity => true,
    };
    if !sum_ok {
        reasons.push("slope_sum_negative".into());
    }
    Ok(MZVerdict { psh: reasons.is_empty(), reasons, report })
}

/// Closed-form slope data of a Fubini-Study family over the argmax set `A′`.
#[derive(Clone, Debug, Serialize)]
pub struct FsSlopeIdentity {
    /// gcd of `|n_α|` over `A′`.
    pub n1: u64,
    /// lcm of `|n_α|` over `A′`.
    pub n2: u64,
    pub padic_sum: LogQ,
    /// `Σ_p s_p = −m⁻¹ log n₁`.
    pub padic_identity: bool,
    pub s_inf: LogQ,
    /// `m⁻¹ log n₂`.
    pub closed_form_s_inf: LogQ,
    /// `s_∞ − m⁻¹ log n₂` when non-zero.
    pub s_inf_discrepancy: Option<LogQ>,
    pub slope_sum: LogQ,
    /// `m⁻¹ log(n₂/n₁)`.
    pub closed_form_sum: LogQ,
    pub sum_identity: bool,
}

pub fn fs_slope_identity(family: &FsFamily) -> Result<FsSlopeIdentity> {
    let f = mz_fs_function(family)?;
    let report = mz_slopes(&f)?;
    let inv_m = family.inv_m();
    let arg = family.argmax();
    let abs: Vec<u64> = arg.iter().map(|&i| family.terms[i].n.unsigned_abs()).collect();
    let n1 = abs.iter().fold(0, |g, &n| gcd_u64(g, n));
    let n2 = abs.iter().fold(1, |l, &n| lcm_u64(l, n));
    let padic_sum = report.padic.values().fold(LogQ::zero(), |acc, b| &acc + &b.at_origin);
    let padic_identity = padic_sum == LogQ::log_abs_int(n1 as i64).scale(&-inv_m.clone());
    let closed_form_s_inf = LogQ::log_abs_int(n2 as i64).scale(&inv_m);
    let disc = &report.s_inf - &closed_form_s_inf;
    let slope_sum = &padic_sum + &report.s_inf;
    let closed_form_sum = &closed_form_s_inf - &LogQ::log_abs_int(n1 as i64).scale(&inv_m);
    Ok(FsSlopeIdentity {
        n1,
        n2,
        padic_identity,
        padic_sum,
        s_inf: report.s_inf.clone(),
        closed_form_s_inf,
        s_inf_discrepancy: if disc.is_zero() { None } else { Some(disc) },
        sum_identity: slope_sum == closed_form_sum,
        slope_sum,
        closed_form_sum,
    })
}
