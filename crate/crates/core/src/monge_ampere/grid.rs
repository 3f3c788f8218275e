//! Discrete Laplacian of fibre potentials on the two standard charts of ℙ¹,
//! on a log-polar grid aligned with the valuation coordinate.
//!
//! Rows are indexed by `k` with `u = k·h`, `h = span/n_radial`, where
//! `u = log|z| / log|t|`. Chart 0 covers `|t|^{span} ≤ |z| ≤ 2`-ish, chart 1 the
//! mirror image; both share the same lattice on the overlap `1/2 < |z| < 2`.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::CurveFamily;
use super::line::LineMeasure;
use crate::error::{Error, Result};
use crate::exact::q_to_f64;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(default = "default_n")]
    pub n_radial: usize,
    #[serde(default = "default_n")]
    pub n_angular: usize,
    /// Charts reach down to `|z| = |t|^{span}`.
    #[serde(default = "default_span")]
    pub span: f64,
    #[serde(default = "default_tol")]
    pub mass_tol: f64,
}

fn default_n() -> usize {
    1024
}
fn default_span() -> f64 {
    2.0
}
fn default_tol() -> f64 {
    1e-4
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_radial: default_n(), n_angular: default_n(), span: default_span(), mass_tol: default_tol() }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_radial < 4 || !self.n_radial.is_multiple_of(2) {
            return Err(Error::config("n_radial must be even and at least 4"));
        }
        if self.n_angular < 3 {
            return Err(Error::config("n_angular must be at least 3"));
        }
        if !(self.span.is_finite() && self.span > 0.0) {
            return Err(Error::config("span must be positive"));
        }
        if !(self.mass_tol > 0.0) {
            return Err(Error::config("mass tolerance must be positive"));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.span / self.n_radial as f64
    }
}

/// Radial C¹ partition of unity: `1` on `|z| ≤ 1/2`, `0` on `|z| ≥ 2`.
pub fn chart0_weight(log_abs_z: f64) -> f64 {
    if log_abs_z <= -LN_2 {
        1.0
    } else if log_abs_z >= LN_2 {
        0.0
    } else {
        let x = (log_abs_z + LN_2) / (2.0 * LN_2);
        1.0 - x * x * (3.0 - 2.0 * x)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridMeasure {
    pub chart: u8,
    pub n_radial: usize,
    pub n_angular: usize,
    pub h: f64,
    /// Lattice index of the first row.
    pub first_row: i64,
    pub rows: usize,
    /// Row-major `rows × n_angular`.
    #[serde(skip)]
    pub cell_masses: Vec<f64>,
    #[serde(skip)]
    pub weights: Vec<f64>,
    /// Partition-weighted mass.
    pub total_mass: f64,
    /// Unweighted mass of the chart grid.
    pub raw_mass: f64,
    /// Mass enclosed by the inner boundary circle of the chart.
    pub leakage: f64,
    pub min_cell: f64,
}

impl GridMeasure {
    pub fn row_u(&self, row: usize) -> f64 {
        (self.first_row + row as i64) as f64 * self.h
    }

    pub fn row_mass(&self, row: usize) -> f64 {
        self.cell_masses[row * self.n_angular..(row + 1) * self.n_angular].iter().sum()
    }
}

/// Discrete Laplacian of `ψ(u, θ)` (the potential divided by `|log|t||`) on one chart.
pub fn grid_chart<F>(psi: F, chart: u8, log_t_abs: f64, cfg: &GridConfig) -> Result<GridMeasure>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    cfg.validate()?;
    if chart > 1 {
        return Err(Error::InvalidIndex { index: chart as usize, len: 2 });
    }
    if !(log_t_abs.is_finite() && log_t_abs > 0.0) {
        return Err(Error::config("need 0 < |t| < 1"));
    }
    let n = cfg.n_radial as i64;
    let h = cfg.h();
    let overlap = ((LN_2 / log_t_abs) / h).ceil() as i64 + 1;
    // interior rows [lo, hi]; the inner boundary sits one row further in
    let (lo, hi) = if chart == 0 { (-overlap, n - 1) } else { (-(n - 1), overlap) };
    let rows = (hi - lo + 1) as usize;
    let na = cfg.n_angular;
    let h_theta = 2.0 * PI / na as f64;

    let psi_rows: Vec<Vec<f64>> = (lo - 1..=hi + 1)
        .into_par_iter()
        .map(|k| {
            let u = k as f64 * h;
            (0..na).map(|j| psi(u, j as f64 * h_theta)).collect()
        })
        .collect();

    let ang = log_t_abs * log_t_abs * h / (h_theta * h_theta);
    let cell_masses: Vec<f64> = (0..rows)
        .into_par_iter()
        .flat_map_iter(|r| {
            let (below, row, above) = (&psi_rows[r], &psi_rows[r + 1], &psi_rows[r + 2]);
            (0..na)
                .map(|j| {
                    let radial = (above[j] - 2.0 * row[j] + below[j]) / h;
                    let angular = ang * (row[(j + 1) % na] - 2.0 * row[j] + row[(j + na - 1) % na]);
                    (radial + angular) / na as f64
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let weights: Vec<f64> = (0..rows)
        .map(|r| {
            let u = (lo + r as i64) as f64 * h;
            let w0 = chart0_weight(-log_t_abs * u);
            if chart == 0 {
                w0
            } else {
                1.0 - w0
            }
        })
        .collect();
    let mut total_mass = 0.0;
    let mut raw_mass = 0.0;
    for r in 0..rows {
        let m: f64 = cell_masses[r * na..(r + 1) * na].iter().sum();
        raw_mass += m;
        total_mass += weights[r] * m;
    }
    let min_cell = cell_masses.iter().cloned().fold(f64::INFINITY, f64::min);
    let avg = |v: &Vec<f64>| v.iter().sum::<f64>() / na as f64;
    let leakage = if chart == 0 {
        -(avg(&psi_rows[rows + 1]) - avg(&psi_rows[rows])) / h
    } else {
        (avg(&psi_rows[1]) - avg(&psi_rows[0])) / h
    };
    Ok(GridMeasure {
        chart,
        n_radial: cfg.n_radial,
        n_angular: na,
        h,
        first_row: lo,
        rows,
        cell_masses,
        weights,
        total_mass,
        raw_mass,
        leakage,
        min_cell,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexMa {
    pub t_abs: f64,
    pub charts: Vec<GridMeasure>,
    pub total_mass: f64,
    pub expected: f64,
    pub leakage: f64,
    pub warnings: Vec<String>,
}

/// `dd^c φ_t` on the fibre over `t`, reconciled across the two charts.
pub fn ma_complex_curve(family: &CurveFamily, t_abs: f64, cfg: &GridConfig) -> Result<ComplexMa> {
    family.validate()?;
    if !(t_abs > 0.0 && t_abs < 1.0) {
        return Err(Error::config("need 0 < |t| < 1"));
    }
    let l = -t_abs.ln();
    let charts = (0..2u8)
        .map(|c| grid_chart(|u, _| family.scaled_potential(c, u, l), c, l, cfg))
        .collect::<Result<Vec<_>>>()?;
    let total_mass: f64 = charts.iter().map(|g| g.total_mass).sum();
    let leakage: f64 = charts.iter().map(|g| g.leakage).sum();
    let expected = q_to_f64(&family.mass());
    let mut warnings = Vec::new();
    if leakage.abs() > cfg.mass_tol {
        warnings.push(format!("mass {leakage:.6e} lies inside the inner chart circles"));
    }
    if (total_mass - expected).abs() > cfg.mass_tol {
        return Err(Error::Resolution { mass: total_mass, expected, suggested: cfg.n_radial * 2 });
    }
    Ok(ComplexMa { t_abs, charts, total_mass, expected, leakage, warnings })
}

#[derive(Clone, Debug, Serialize)]
pub struct Pushforward {
    pub measure: LineMeasure,
    pub mass: f64,
    pub leakage: f64,
    pub warnings: Vec<String>,
}

/// Direct image under `z ↦ log|z| / log|t|`, one atom per grid circle.
pub fn pushforward_chart(g: &GridMeasure) -> Pushforward {
    let atoms = (0..g.rows).map(|r| (g.row_u(r), g.weights[r] * g.row_mass(r))).collect();
    let measure = LineMeasure::new(atoms);
    let mut warnings = Vec::new();
    if g.leakage.abs() > 1e-12 {
        warnings.push(format!("chart {}: mass {:.6e} outside the grid", g.chart, g.leakage));
    }
    Pushforward { mass: measure.mass(), measure, leakage: g.leakage, warnings }
}

pub fn pushforward_log_radius(ma: &ComplexMa) -> Pushforward {
    let mut by_row: BTreeMap<i64, f64> = BTreeMap::new();
    let mut warnings = ma.warnings.clone();
    for g in &ma.charts {
        for r in 0..g.rows {
            *by_row.entry(g.first_row + r as i64).or_default() += g.weights[r] * g.row_mass(r);
        }
        if g.leakage.abs() > 1e-12 {
            warnings.push(format!("chart {}: mass {:.6e} outside the grid", g.chart, g.leakage));
        }
    }
    let h = ma.charts[0].h;
    let measure = LineMeasure::new(by_row.into_iter().map(|(k, m)| (k as f64 * h, m)).collect());
    Pushforward { mass: measure.mass(), measure, leakage: ma.leakage, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};
    use crate::monge_ampere::family::{Combine, CurveTerm};

    fn fam(terms: &[(u32, crate::exact::Q)], d: u32, m: u32, combine: Combine) -> CurveFamily {
        CurveFamily {
            name: String::new(),
            degree: d,
            m,
            terms: terms.iter().map(|(k, a)| CurveTerm { power: *k, t_exponent: a.clone(), modulus: 1.0 }).collect(),
            combine,
        }
    }

    fn small() -> GridConfig {
        GridConfig { n_radial: 256, n_angular: 16, ..Default::default() }
    }

    #[test]
    fn partition_is_symmetric() {
        for s in [-1.0, -0.3, 0.0, 0.2, 0.69] {
            assert!((chart0_weight(s) + chart0_weight(-s) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn isotrivial_unit_circle() {
        let f = fam(&[(0, qi(0)), (1, qi(0))], 1, 1, Combine::Max);
        let ma = ma_complex_curve(&f, 1e-3, &small()).unwrap();
        let p = pushforward_log_radius(&ma);
        assert!((p.mass - 1.0).abs() < 1e-12);
        let at_zero: f64 = p.measure.atoms.iter().filter(|a| a.0.abs() < 1e-12).map(|a| a.1).sum();
        assert!((at_zero - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kink_circle_pushes_to_minus_one() {
        let f = fam(&[(0, qi(0)), (1, qi(1))], 1, 1, Combine::Max);
        let p = pushforward_log_radius(&ma_complex_curve(&f, 1e-4, &small()).unwrap());
        let near: f64 = p.measure.atoms.iter().filter(|a| (a.0 + 1.0).abs() < 1e-12).map(|a| a.1).sum();
        assert!((near - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_circles_two_atoms() {
        let f = fam(&[(0, qi(0)), (2, qi(0)), (4, qi(1))], 4, 4, Combine::Max);
        let p = pushforward_log_radius(&ma_complex_curve(&f, 1e-3, &small()).unwrap());
        let big: Vec<(f64, f64)> = p.measure.atoms.iter().cloned().filter(|a| a.1.abs() > 1e-9).collect();
        assert_eq!(big.len(), 2);
        assert!((big[0].0 + 0.5).abs() < 1e-12 && (big[0].1 - 0.5).abs() < 1e-10);
        assert!(big[1].0.abs() < 1e-12 && (big[1].1 - 0.5).abs() < 1e-10);
    }

    #[test]
    fn lse_total_mass() {
        let f = fam(&[(0, qi(0)), (1, qi(1))], 1, 1, Combine::Lse);
        let ma = ma_complex_curve(&f, 1e-3, &small()).unwrap();
        assert!((ma.total_mass - 1.0).abs() < 1e-4);
        assert!(ma.charts.iter().all(|g| g.min_cell > -1e-9));
    }

    #[test]
    fn log_z_has_no_interior_mass() {
        let f = fam(&[(1, qi(0))], 1, 1, Combine::Max);
        let l = -(1e-2f64).ln();
        let g = grid_chart(|u, _| f.scaled_potential(0, u, l), 0, l, &small()).unwrap();
        assert!(g.raw_mass.abs() < 1e-9);
        assert!((g.leakage - 1.0).abs() < 1e-12);
        assert!(ma_complex_curve(&f, 1e-2, &small()).is_err());
    }

    #[test]
    fn fractional_kink_location() {
        let f = fam(&[(0, qi(0)), (2, qi(1))], 2, 2, Combine::Max);
        let p = pushforward_log_radius(&ma_complex_curve(&f, 1e-3, &small()).unwrap());
        assert!((p.measure.mean() - q_to_f64(&q(-1, 2))).abs() < 1e-10);
    }
}
