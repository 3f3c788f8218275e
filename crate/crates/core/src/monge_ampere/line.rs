//! Exact piecewise-affine functions on the valuation line and measures on it.

use std::cmp::Ordering;

use num::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{fmt_q, q_to_f64, rat, Q};

/// A continuous piecewise-affine function on ℝ with finitely many knots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinePA {
    /// Sorted `(u, value)` pairs; never empty.
    #[serde(serialize_with = "ser_knots")]
    knots: Vec<(Q, Q)>,
    #[serde(with = "rat")]
    left_slope: Q,
    #[serde(with = "rat")]
    right_slope: Q,
}

impl LinePA {
    pub fn new(knots: Vec<(Q, Q)>, left_slope: Q, right_slope: Q) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::config("a piecewise-affine function needs at least one knot"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::config("knots must be strictly increasing"));
        }
        Ok(Self { knots, left_slope, right_slope })
    }

    pub fn affine(slope: Q, intercept: Q) -> Self {
        Self { knots: vec![(Q::zero(), intercept)], left_slope: slope.clone(), right_slope: slope }
    }

    /// Upper envelope `max_k(slope_k·u + intercept_k)`.
    pub fn from_lines(lines: &[(Q, Q)]) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::config("envelope of no lines"));
        }
        let mut sorted = lines.to_vec();
        sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        // keep the highest intercept per slope
        let mut dedup: Vec<(Q, Q)> = Vec::new();
        for l in sorted {
            if let Some(last) = dedup.last_mut() {
                if last.0 == l.0 {
                    *last = l;
                    continue;
                }
            }
            dedup.push(l);
        }
        // envelope from u = -∞ (smallest slope) to +∞
        let mut hull: Vec<(Q, Q)> = Vec::new();
        let cross = |a: &(Q, Q), b: &(Q, Q)| -> Q { (&a.1 - &b.1) / (&b.0 - &a.0) };
        for l in dedup {
            while hull.len() >= 2 {
                let n = hull.len();
                if cross(&hull[n - 2], &l) <= cross(&hull[n - 2], &hull[n - 1]) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(l);
        }
        if hull.len() == 1 {
            let (s, c) = hull.pop().expect("one line");
            return Ok(Self::affine(s, c));
        }
        let knots = hull
            .windows(2)
            .map(|w| {
                let u = cross(&w[0], &w[1]);
                let v = &w[0].0 * &u + &w[0].1;
                (u, v)
            })
            .collect();
        Ok(Self {
            knots,
            left_slope: hull[0].0.clone(),
            right_slope: hull.last().expect("non-empty").0.clone(),
        })
    }

    pub fn knots(&self) -> &[(Q, Q)] {
        &self.knots
    }

    pub fn left_slope(&self) -> &Q {
        &self.left_slope
    }

    pub fn right_slope(&self) -> &Q {
        &self.right_slope
    }

    fn segment_slope(&self, i: usize) -> Q {
        let (a, b) = (&self.knots[i], &self.knots[i + 1]);
        (&b.1 - &a.1) / (&b.0 - &a.0)
    }

    /// Slopes on the `n+1` pieces, left to right.
    pub fn slopes(&self) -> Vec<Q> {
        let mut out = vec![self.left_slope.clone()];
        out.extend((0..self.knots.len() - 1).map(|i| self.segment_slope(i)));
        out.push(self.right_slope.clone());
        out
    }

    pub fn eval(&self, u: &Q) -> Q {
        let first = &self.knots[0];
        if u <= &first.0 {
            return &first.1 + &self.left_slope * (u - &first.0);
        }
        let last = self.knots.last().expect("non-empty");
        if u >= &last.0 {
            return &last.1 + &self.right_slope * (u - &last.0);
        }
        let i = self.knots.partition_point(|k| &k.0 <= u) - 1;
        &self.knots[i].1 + self.segment_slope(i) * (u - &self.knots[i].0)
    }

    pub fn eval_f64(&self, u: f64) -> f64 {
        let first = &self.knots[0];
        let fu = q_to_f64(&first.0);
        if u <= fu {
            return q_to_f64(&first.1) + q_to_f64(&self.left_slope) * (u - fu);
        }
        let last = self.knots.last().expect("non-empty");
        let lu = q_to_f64(&last.0);
        if u >= lu {
            return q_to_f64(&last.1) + q_to_f64(&self.right_slope) * (u - lu);
        }
        let i = self.knots.partition_point(|k| q_to_f64(&k.0) <= u).saturating_sub(1);
        let (u0, v0) = (q_to_f64(&self.knots[i].0), q_to_f64(&self.knots[i].1));
        v0 + q_to_f64(&self.segment_slope(i)) * (u - u0)
    }

    /// `(u, slope increase)` at every knot with a non-zero jump.
    pub fn jumps(&self) -> Vec<(Q, Q)> {
        let s = self.slopes();
        self.knots
            .iter()
            .enumerate()
            .map(|(i, k)| (k.0.clone(), &s[i + 1] - &s[i]))
            .filter(|(_, j)| !j.is_zero())
            .collect()
    }

    fn combine(&self, other: &Self, sign: &Q) -> Self {
        let mut us: Vec<Q> = self.knots.iter().chain(&other.knots).map(|k| k.0.clone()).collect();
        us.sort();
        us.dedup();
        let knots = us
            .into_iter()
            .map(|u| {
                let v = self.eval(&u) + sign * other.eval(&u);
                (u, v)
            })
            .collect();
        Self {
            knots,
            left_slope: &self.left_slope + sign * &other.left_slope,
            right_slope: &self.right_slope + sign * &other.right_slope,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, &Q::from_integer((-1).into()))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, &Q::from_integer(1.into()))
    }

    pub fn is_bounded(&self) -> bool {
        self.left_slope.is_zero() && self.right_slope.is_zero()
    }

    pub fn sup_abs(&self) -> Option<Q> {
        if !self.is_bounded() {
            return None;
        }
        self.knots.iter().map(|k| k.1.abs()).max()
    }
}

/// Finite positive combination of Dirac masses on the line.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LineMeasure {
    /// Sorted by position.
    pub atoms: Vec<(f64, f64)>,
}

impl LineMeasure {
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.retain(|a| a.1 != 0.0);
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        Self { atoms }
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|(u, m)| f(*u) * m).sum()
    }

    pub fn mean(&self) -> f64 {
        self.integrate(|u| u) / self.mass()
    }
}

/// Wasserstein-1 distance `∫|F − G|` between the normalized measures.
pub fn w1(a: &LineMeasure, b: &LineMeasure) -> Result<f64> {
    let (ma, mb) = (a.mass(), b.mass());
    if !(ma > 0.0 && mb > 0.0) {
        return Err(Error::config("Wasserstein distance needs measures of positive mass"));
    }
    let mut events: Vec<(f64, f64)> = a.atoms.iter().map(|(u, m)| (*u, m / ma)).collect();
    events.extend(b.atoms.iter().map(|(u, m)| (*u, -m / mb)));
    events.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
    let mut diff = 0.0;
    let mut acc = 0.0;
    for w in 0..events.len() {
        diff += events[w].1;
        if w + 1 < events.len() {
            acc += diff.abs() * (events[w + 1].0 - events[w].0);
        }
    }
    Ok(acc)
}

fn ser_knots<S: serde::Serializer>(knots: &[(Q, Q)], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(knots.iter().map(|(u, v)| [fmt_q(u), fmt_q(v)]))
}
