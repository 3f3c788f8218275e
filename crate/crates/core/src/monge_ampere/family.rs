//! Degenerating families of metrics on O(d)/m over ℙ¹ given by monomial sections
//! `x₀^{d−k} x₁^k` with hybrid constants `tᵃ`.

use serde::{Deserialize, Serialize};

use super::line::LinePA;
use crate::error::{Error, Result};
use crate::exact::{q_to_f64, rat, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    #[default]
    Max,
    /// `(2m)⁻¹ log Σ |s|²`.
    Lse,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveTerm {
    /// Exponent of `x₁`.
    pub power: u32,
    /// Exponent of `t` in the hybrid constant.
    #[serde(with = "rat")]
    pub t_exponent: Q,
    #[serde(default = "one")]
    pub modulus: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveFamily {
    #[serde(default)]
    pub name: String,
    pub degree: u32,
    #[serde(default = "one_u32")]
    pub m: u32,
    pub terms: Vec<CurveTerm>,
    #[serde(default)]
    pub combine: Combine,
}

fn one_u32() -> u32 {
    1
}

impl CurveFamily {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config("m must be positive"));
        }
        if self.terms.is_empty() {
            return Err(Error::config("family has no sections"));
        }
        for t in &self.terms {
            if t.power > self.degree {
                return Err(Error::config(format!("x1 power {} exceeds degree {}", t.power, self.degree)));
            }
            if !(t.modulus.is_finite() && t.modulus > 0.0) {
                return Err(Error::config("coefficient moduli must be positive and finite"));
            }
        }
        Ok(())
    }

    pub fn mass(&self) -> Q {
        Q::new(self.degree.into(), self.m.into())
    }

    /// `u ↦ m⁻¹·max_k(−a_k − k·u)`: the non-archimedean potential divided by `−log r`
    /// in the valuation coordinate `u = v(x₁/x₀)`.
    pub fn na_potential(&self) -> Result<LinePA> {
        self.validate()?;
        let m = Q::from_integer(self.m.into());
        let lines: Vec<(Q, Q)> = self
            .terms
            .iter()
            .map(|t| (-Q::from_integer(t.power.into()) / &m, -&t.t_exponent / &m))
            .collect();
        LinePA::from_lines(&lines)
    }

    /// Potential divided by `|log|t||` as a function of `u = log|z|/log|t|`, in the
    /// chart `x₀ ≠ 0` (`chart = 0`) or `x₁ ≠ 0` (`chart = 1`).
    pub fn scaled_potential(&self, chart: u8, u: f64, log_t_abs: f64) -> f64 {
        let m = self.m as f64;
        let forms = self.terms.iter().map(|t| {
            let slope = if chart == 0 { -(t.power as f64) } else { (self.degree - t.power) as f64 };
            t.modulus.ln() / log_t_abs + slope * u - q_to_f64(&t.t_exponent)
        });
        match self.combine {
            Combine::Max => forms.fold(f64::NEG_INFINITY, f64::max) / m,
            Combine::Lse => {
                let v: Vec<f64> = forms.collect();
                let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let w = 2.0 * log_t_abs;
                let s: f64 = v.iter().map(|x| (w * (x - top)).exp()).sum();
                (top + s.ln() / w) / m
            }
        }
    }

    /// `φ_t(z)` in chart 0 for `|z| > 0`.
    pub fn potential_at(&self, z_abs: f64, t_abs: f64) -> f64 {
        let l = -t_abs.ln();
        l * self.scaled_potential(0, z_abs.ln() / -l, l)
    }
}
