//! Decreasing piecewise-affine convex majorants `max_α(⟨u_α, x⟩ + c_α)` of a
//! translation-equivariant convex function, with slopes `u_α` on nested
//! rational lattices of the standard simplex.

use num::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::q_to_f64;

/// `x ↦ max_α(⟨u_α, x⟩ + offset_α)`.
#[derive(Clone, Debug, Serialize)]
pub struct PaMajorant {
    /// Lattice coordinates `k` with `u_α = k / denominator`.
    pub nodes: Vec<Vec<u64>>,
    pub denominator: u64,
    pub offsets: Vec<f64>,
}

impl PaMajorant {
    pub fn slope(&self, alpha: usize) -> Vec<BigRational> {
        self.nodes[alpha]
            .iter()
            .map(|k| BigRational::new((*k).into(), self.denominator.into()))
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = self.denominator as f64;
        self.nodes
            .iter()
            .zip(&self.offsets)
            .map(|(k, c)| k.iter().zip(x).map(|(ki, xi)| *ki as f64 / d * xi).sum::<f64>() + c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains_vertices(&self) -> bool {
        let n = self.nodes.first().map_or(0, |k| k.len());
        (0..n).all(|i| {
            self.nodes
                .iter()
                .any(|k| k.iter().enumerate().all(|(j, kj)| *kj == if i == j { self.denominator } else { 0 }))
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexApproximation {
    pub dim: usize,
    /// One majorant per level `0..=j`; each is pointwise below the previous one.
    pub levels: Vec<PaMajorant>,
    pub samples: Vec<Vec<f64>>,
}

impl ConvexApproximation {
    pub fn finest(&self) -> &PaMajorant {
        self.levels.last().expect("at least level 0")
    }
}

fn lattice(dim: usize, total: u64) -> Vec<Vec<u64>> {
    fn rec(dim: usize, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() + 1 == dim {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(dim, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, total, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// The two coarse lattice points whose midpoint is `k` in the Freudenthal
/// triangulation (cumulative coordinates halved down and up).
fn coarse_pair(k: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let mut cum = Vec::with_capacity(k.len());
    let mut acc = 0;
    for ki in k {
        acc += ki;
        cum.push(acc);
    }
    let back = |z: Vec<u64>| -> Vec<u64> {
        let mut prev = 0;
        z.into_iter()
            .map(|zi| {
                let d = zi - prev;
                prev = zi;
                d
            })
            .collect()
    };
    let lo = back(cum.iter().map(|z| z / 2).collect());
    let hi = back(cum.iter().map(|z| z.div_ceil(2)).collect());
    (lo, hi)
}

fn default_cloud(dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dim]];
    for far in [1.0, 4.0, 16.0] {
        for i in 0..dim {
            out.push((0..dim).map(|j| if i == j { 0.0 } else { -far }).collect());
        }
    }
    out
}

/// Builds majorants at levels `0..=level`. The result is `≥ χ` on every sample
/// and decreasing in the level everywhere.
pub fn convex_pa_approximation<F>(
    chi: F,
    dim: usize,
    level: u32,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<ConvexApproximation>
where
    F: Fn(&[f64]) -> f64,
{
    if dim == 0 {
        return Err(Error::config("dimension must be positive"));
    }
    if samples.iter().any(|s| s.len() != dim) {
        return Err(Error::config("sample of wrong dimension"));
    }
    let mut pts: Vec<Vec<f64>> = samples.to_vec();
    pts.extend(default_cloud(dim));
    for x in &pts {
        let base = chi(x);
        for c in [-1.0, 0.5, 2.0] {
            let shifted: Vec<f64> = x.iter().map(|xi| xi + c).collect();
            let err = (chi(&shifted) - base - c).abs();
            if !(err <= tol) {
                return Err(Error::Rejected(format!(
                    "oracle violates translation equivariance by {err:e} at {x:?}"
                )));
            }
        }
    }
    let values: Vec<f64> = pts.iter().map(|x| chi(x)).collect();

    // discrete conjugate χ*_S on every level, plus the coverage defect
    // D_j = max_s min_α (χ*_S(u_α) − a_s(u_α))
    let mut lattices = Vec::new();
    let mut conj = Vec::new();
    let mut defect = Vec::new();
    for j in 0..=level {
        let denom = 1u64 << j;
        let nodes = lattice(dim, denom);
        let d = denom as f64;
        let planes: Vec<Vec<f64>> = pts
            .iter()
            .zip(&values)
            .map(|(x, v)| {
                nodes
                    .iter()
                    .map(|k| k.iter().zip(x).map(|(ki, xi)| *ki as f64 / d * xi).sum::<f64>() - v)
                    .collect()
            })
            .collect();
        let c: Vec<f64> = (0..nodes.len())
            .map(|a| planes.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let dj = planes
            .iter()
            .map(|p| p.iter().zip(&c).map(|(pa, ca)| ca - pa).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        lattices.push(nodes);
        conj.push(c);
        defect.push(dj);
    }
    // interpolation excess I_j of level-j values at level-(j+1) nodes
    let lookup = |j: usize, k: &Vec<u64>| -> f64 {
        let idx = lattices[j].iter().position(|n| n == k).expect("coarse node");
        conj[j][idx]
    };
    let excess: Vec<f64> = (0..level as usize)
        .map(|j| {
            lattices[j + 1]
                .iter()
                .zip(&conj[j + 1])
                .map(|(k, cv)| {
                    let (lo, hi) = coarse_pair(k);
                    0.5 * (lookup(j, &lo) + lookup(j, &hi)) - cv
                })
                .fold(0.0, f64::max)
        })
        .collect();
    // margins: ε_J = D_J and ε_{j} = max(D_j, ε_{j+1} + I_j)
    let mut margin = vec![0.0; level as usize + 1];
    margin[level as usize] = defect[level as usize];
    for j in (0..level as usize).rev() {
        margin[j] = defect[j].max(margin[j + 1] + excess[j]);
    }
    let levels = (0..=level as usize)
        .map(|j| PaMajorant {
            nodes: lattices[j].clone(),
            denominator: 1u64 << j,
            offsets: conj[j].iter().map(|c| margin[j] - c).collect(),
        })
        .collect();
    Ok(ConvexApproximation { dim, levels, samples: pts })
}

/// Largest `χ − M` over the samples (positive means the majorant fails).
pub fn majorant_violation<F: Fn(&[f64]) -> f64>(m: &PaMajorant, chi: F, samples: &[Vec<f64>]) -> f64 {
    samples.iter().map(|x| chi(x) - m.eval(x)).fold(f64::NEG_INFINITY, f64::max)
}

pub fn slope_to_f64(u: &[BigRational]) -> Vec<f64> {
    u.iter().map(q_to_f64).collect()
}
