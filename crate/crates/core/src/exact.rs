//! Exact scalars: arbitrary-precision rationals, symbolic logarithm forms and
//! certified sign decisions.
//!
//! Two symbolic value types live here:
//!
//! * [`LogAffine`]: `a·log r + b` with `a, b ∈ ℚ` for a fixed base radius `r`.
//!   Skeleton potentials take values in this set.
//! * [`LogQ`]: `b + Σ_p q_p·log p` over the primes, used on the Berkovich
//!   spectrum of the integers.
//!
//! Comparisons never round. A non-zero form `c + Σ qᵢ log xᵢ` with
//! multiplicatively independent bases is never zero, so its sign is decided by
//! evaluating rigorous enclosures of the logarithms at increasing precision
//! until the enclosure excludes zero.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"n"` or a plain decimal like `"0.25"` (converted exactly).
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| Error::parse(format!("bad rational `{s}`")))?;
        let d: BigInt = b.trim().parse().map_err(|_| Error::parse(format!("bad rational `{s}`")))?;
        if d.is_zero() {
            return Err(Error::parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n: BigInt = digits.parse().map_err(|_| Error::parse(format!("bad decimal `{s}`")))?;
        let d = num::pow(BigInt::from(10), fp.len());
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| Error::parse(format!("bad rational `{s}`")))?;
    Ok(Q::from_integer(n))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: scale through logarithms of bit lengths
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Exact rational value of a finite double.
pub fn q_from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RatRepr {
    Str(String),
    Int(i64),
}

impl RatRepr {
    fn into_q(self) -> std::result::Result<Q, String> {
        match self {
            RatRepr::Str(s) => parse_q(&s).map_err(|e| e.to_string()),
            RatRepr::Int(i) => Ok(qi(i)),
        }
    }
}

/// serde adapter: rationals as `"p/q"` strings (integers accepted on input).
pub mod rat {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        RatRepr::deserialize(d)?.into_q().map_err(serde::de::Error::custom)
    }
}

pub mod rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = xs.iter().map(fmt_q).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let raw = Vec::<RatRepr>::deserialize(d)?;
        raw.into_iter()
            .map(|r| r.into_q().map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod rat_opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&fmt_q(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Q>, D::Error> {
        let raw = Option::<RatRepr>::deserialize(d)?;
        raw.map(|r| r.into_q().map_err(serde::de::Error::custom)).transpose()
    }
}

// ---------------------------------------------------------------------------
// certified logarithms

/// Enclosure of `atanh(num/den)·2^prec` for `0 ≤ num/den ≤ 1/3`, as integers.
fn atanh_fixed(num: &BigInt, den: &BigInt, prec: u32) -> (BigInt, BigInt) {
    let num2 = num * num;
    let den2 = den * den;
    let mut p = (num << prec) / den;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !p.is_zero() {
        sum += &p / BigInt::from(2 * k + 1);
        p = p * &num2 / &den2;
        k += 1;
    }
    // every truncation is downward; the accumulated deficit is bounded by 4k+8 ulps
    let hi = &sum + BigInt::from(4 * k + 8);
    (sum, hi)
}

/// Rigorous enclosure `[lo, hi]` of `ln x` for rational `x > 0`, width about `2^-prec`.
pub fn ln_enclosure(x: &Q, prec: u32) -> (Q, Q) {
    assert!(x.is_positive(), "logarithm of a non-positive rational");
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let mut k = nb - db;
    let two = qi(2);
    let mut y = if k >= 0 {
        x / Q::from_integer(BigInt::one() << (k as u64))
    } else {
        x * Q::from_integer(BigInt::one() << ((-k) as u64))
    };
    let four_thirds = q(4, 3);
    let two_thirds = q(2, 3);
    while y > four_thirds {
        y /= &two;
        k += 1;
    }
    while y < two_thirds {
        y *= &two;
        k -= 1;
    }
    let scale = Q::from_integer(BigInt::one() << prec);
    // ln y = 2 atanh((y-1)/(y+1)), |z| ≤ 1/5
    let z = (&y - Q::one()) / (&y + Q::one());
    let (zlo, zhi) = {
        let a = z.numer().abs();
        let (lo, hi) = atanh_fixed(&a, z.denom(), prec);
        if z.is_negative() {
            (-hi, -lo)
        } else {
            (lo, hi)
        }
    };
    let (l2lo, l2hi) = atanh_fixed(&BigInt::one(), &BigInt::from(3), prec);
    let kk = BigInt::from(k);
    let (klo, khi) = if k >= 0 {
        (&kk * &l2lo, &kk * &l2hi)
    } else {
        (&kk * &l2hi, &kk * &l2lo)
    };
    let lo = Q::from_integer((klo + zlo) * 2) / &scale;
    let hi = Q::from_integer((khi + zhi) * 2) / &scale;
    (lo, hi)
}

/// Sign of `constant + Σ coef·ln(base)`. Bases must be positive and
/// multiplicatively independent for the zero test to be exact.
pub fn sign_of_log_form<'a, I>(constant: &Q, terms: I) -> Ordering
where
    I: IntoIterator<Item = (&'a Q, &'a Q)> + Clone,
{
    let nonzero: Vec<(&Q, &Q)> = terms.clone().into_iter().filter(|(c, _)| !c.is_zero()).collect();
    if nonzero.is_empty() {
        return constant.cmp(&Q::zero());
    }
    let mut prec = 64u32;
    loop {
        let mut lo = constant.clone();
        let mut hi = constant.clone();
        for (coef, base) in &nonzero {
            let (l, h) = ln_enclosure(base, prec);
            if coef.is_positive() {
                lo += *coef * &l;
                hi += *coef * &h;
            } else {
                lo += *coef * &h;
                hi += *coef * &l;
            }
        }
        if lo.is_positive() {
            return Ordering::Greater;
        }
        if hi.is_negative() {
            return Ordering::Less;
        }
        prec *= 2;
    }
}

// ---------------------------------------------------------------------------
// LogAffine

/// `log_r · ln r + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogAffine {
    #[serde(with = "rat")]
    pub log_r: Q,
    #[serde(with = "rat")]
    pub constant: Q,
}

impl LogAffine {
    pub fn new(log_r: Q, constant: Q) -> Self {
        Self { log_r, constant }
    }

    pub fn zero() -> Self {
        Self::new(Q::zero(), Q::zero())
    }

    pub fn of_log_r(a: Q) -> Self {
        Self::new(a, Q::zero())
    }

    pub fn constant(c: Q) -> Self {
        Self::new(Q::zero(), c)
    }

    pub fn is_zero(&self) -> bool {
        self.log_r.is_zero() && self.constant.is_zero()
    }

    pub fn scale(&self, k: &Q) -> Self {
        Self::new(&self.log_r * k, &self.constant * k)
    }

    pub fn to_f64(&self, r: &Q) -> f64 {
        q_to_f64(&self.log_r) * q_to_f64(r).ln() + q_to_f64(&self.constant)
    }
}

impl fmt::Display for LogAffine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*log(r) + {}", fmt_q(&self.log_r), fmt_q(&self.constant))
    }
}

impl Add for &LogAffine {
    type Output = LogAffine;
    fn add(self, o: &LogAffine) -> LogAffine {
        LogAffine::new(&self.log_r + &o.log_r, &self.constant + &o.constant)
    }
}

impl Sub for &LogAffine {
    type Output = LogAffine;
    fn sub(self, o: &LogAffine) -> LogAffine {
        LogAffine::new(&self.log_r - &o.log_r, &self.constant - &o.constant)
    }
}

impl Neg for &LogAffine {
    type Output = LogAffine;
    fn neg(self) -> LogAffine {
        LogAffine::new(-&self.log_r, -&self.constant)
    }
}

impl Mul<&Q> for &LogAffine {
    type Output = LogAffine;
    fn mul(self, k: &Q) -> LogAffine {
        self.scale(k)
    }
}

/// The base radius `r ∈ (0,1)`; decides comparisons between [`LogAffine`] values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogScale {
    r: Q,
}

impl LogScale {
    pub fn new(r: Q) -> Result<Self> {
        if !(r.is_positive() && r < Q::one()) {
            return Err(Error::config(format!("base radius must lie in (0,1), got {}", fmt_q(&r))));
        }
        Ok(Self { r })
    }

    pub fn r(&self) -> &Q {
        &self.r
    }

    pub fn ln_r(&self) -> f64 {
        q_to_f64(&self.r).ln()
    }

    pub fn sign(&self, x: &LogAffine) -> Ordering {
        sign_of_log_form(&x.constant, [(&x.log_r, &self.r)])
    }

    pub fn cmp(&self, a: &LogAffine, b: &LogAffine) -> Ordering {
        self.sign(&(a - b))
    }

    pub fn max<'a, I: IntoIterator<Item = &'a LogAffine>>(&self, it: I) -> Option<LogAffine> {
        let mut best: Option<&LogAffine> = None;
        for x in it {
            best = match best {
                Some(b) if self.cmp(x, b) != Ordering::Greater => Some(b),
                _ => Some(x),
            };
        }
        best.cloned()
    }

    /// Sign of `p + q / ln r`.
    pub fn sign_inv(&self, p: &Q, qc: &Q) -> Ordering {
        // multiply through by ln r < 0
        self.sign(&LogAffine::new(p.clone(), qc.clone())).reverse()
    }

    pub fn to_f64(&self, x: &LogAffine) -> f64 {
        x.to_f64(&self.r)
    }
}

// ---------------------------------------------------------------------------
// LogQ: rational span of {1} ∪ {log p}

/// `constant + Σ_p coef_p · log p` with `p` prime.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LogQ {
    pub constant: Q,
    pub logs: BTreeMap<u64, Q>,
}

impl LogQ {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(c: Q) -> Self {
        Self { constant: c, logs: BTreeMap::new() }
    }

    pub fn log_prime(p: u64, coef: Q) -> Self {
        let mut s = Self::zero();
        s.add_log(p, coef);
        s
    }

    /// `log |n|` expanded over the prime basis.
    pub fn log_abs_int(n: i64) -> Self {
        let mut s = Self::zero();
        for (p, e) in factorize(n.unsigned_abs()) {
            s.add_log(p, qi(e as i64));
        }
        s
    }

    pub fn add_log(&mut self, p: u64, coef: Q) {
        let e = self.logs.entry(p).or_insert_with(Q::zero);
        *e += coef;
        if e.is_zero() {
            self.logs.remove(&p);
        }
    }

    pub fn coef(&self, p: u64) -> Q {
        self.logs.get(&p).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.logs.is_empty()
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self {
            constant: &self.constant * k,
            logs: self.logs.iter().map(|(p, c)| (*p, c * k)).collect(),
        }
    }

    pub fn sign(&self) -> Ordering {
        let bases: Vec<(Q, Q)> = self.logs.iter().map(|(p, c)| (c.clone(), qi(*p as i64))).collect();
        sign_of_log_form(&self.constant, bases.iter().map(|(c, b)| (c, b)))
    }

    pub fn cmp_value(&self, other: &LogQ) -> Ordering {
        (self - other).sign()
    }

    pub fn to_f64(&self) -> f64 {
        self.logs
            .iter()
            .fold(q_to_f64(&self.constant), |acc, (p, c)| acc + q_to_f64(c) * (*p as f64).ln())
    }

    pub fn max_of<'a, I: IntoIterator<Item = &'a LogQ>>(it: I) -> Option<LogQ> {
        let mut best: Option<&LogQ> = None;
        for x in it {
            best = match best {
                Some(b) if x.cmp_value(b) != Ordering::Greater => Some(b),
                _ => Some(x),
            };
        }
        best.cloned()
    }
}

impl fmt::Display for LogQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_q(&self.constant))?;
        for (p, c) in &self.logs {
            write!(f, " + {}*log({})", fmt_q(c), p)?;
        }
        Ok(())
    }
}

impl Add for &LogQ {
    type Output = LogQ;
    fn add(self, o: &LogQ) -> LogQ {
        let mut s = self.clone();
        s.constant += &o.constant;
        for (p, c) in &o.logs {
            s.add_log(*p, c.clone());
        }
        s
    }
}

impl Sub for &LogQ {
    type Output = LogQ;
    fn sub(self, o: &LogQ) -> LogQ {
        self + &(-o)
    }
}

impl Neg for &LogQ {
    type Output = LogQ;
    fn neg(self) -> LogQ {
        self.scale(&qi(-1))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LogQRepr {
    Plain(String),
    Int(i64),
    Full {
        #[serde(rename = "const", default)]
        constant: Option<String>,
        #[serde(default)]
        log: BTreeMap<String, String>,
    },
}

impl Serialize for LogQ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.logs.is_empty() {
            return s.serialize_str(&fmt_q(&self.constant));
        }
        LogQRepr::Full {
            constant: Some(fmt_q(&self.constant)),
            log: self.logs.iter().map(|(p, c)| (p.to_string(), fmt_q(c))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogQ {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match LogQRepr::deserialize(d)? {
            LogQRepr::Plain(s) => parse_q(&s).map(LogQ::rational).map_err(D::Error::custom),
            LogQRepr::Int(i) => Ok(LogQ::rational(qi(i))),
            LogQRepr::Full { constant, log } => {
                let mut out = LogQ::rational(match constant {
                    Some(c) => parse_q(&c).map_err(D::Error::custom)?,
                    None => Q::zero(),
                });
                for (p, c) in log {
                    let p: u64 = p.parse().map_err(D::Error::custom)?;
                    if !is_prime(p) {
                        return Err(D::Error::custom(format!("log basis element {p} is not prime")));
                    }
                    out.add_log(p, parse_q(&c).map_err(D::Error::custom)?);
                }
                Ok(out)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// integers

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Trial-division factorization, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn p_adic_valuation(n: i64, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let mut m = n.unsigned_abs();
    let mut e = 0;
    while m.is_multiple_of(p) {
        m /= p;
        e += 1;
    }
    e
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a / gcd_u64(a, b) * b
}
