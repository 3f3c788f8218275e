//! Atomic Monge-Ampère measures of model metrics and of piecewise-affine
//! potentials on a one-dimensional skeleton.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::line::LinePA;
use crate::dual_complex::SncModelCombinatorics;
use crate::error::{Error, Result};
use crate::exact::{rat, rat_opt, Q};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEntry {
    pub component: String,
    /// `ord_E(t)`.
    pub b: u32,
    #[serde(with = "rat")]
    pub intersection: Q,
    /// Skeleton coordinate of `v_E`, when the skeleton is a line.
    #[serde(default, with = "rat_opt", skip_serializing_if = "Option::is_none")]
    pub position: Option<Q>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntersectionTable {
    #[serde(default)]
    pub name: String,
    pub entries: Vec<TableEntry>,
    /// Top self-intersection `(L₁·…·Lₙ)` of the generic fibre, when known.
    #[serde(default, with = "rat_opt", skip_serializing_if = "Option::is_none")]
    pub degree: Option<Q>,
    #[serde(default = "yes")]
    pub semipositive: bool,
}

fn yes() -> bool {
    true
}

impl IntersectionTable {
    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::validation("intersection table has no entries"));
        }
        for (i, e) in self.entries.iter().enumerate() {
            if e.b == 0 {
                return Err(Error::validation(format!("component {} has multiplicity 0", e.component)));
            }
            if self.entries[..i].iter().any(|o| o.component == e.component) {
                return Err(Error::validation(format!("component {} listed twice", e.component)));
            }
        }
        Ok(())
    }

    /// Checks that every entry names a component of `model` with matching multiplicity
    /// and that no component is missing.
    pub fn validate_against(&self, model: &SncModelCombinatorics) -> Result<()> {
        self.validate()?;
        for e in &self.entries {
            let i = model
                .component_index(&e.component)
                .ok_or_else(|| Error::validation(format!("unknown component {}", e.component)))?;
            if model.components[i].mult != e.b {
                return Err(Error::validation(format!(
                    "component {}: table multiplicity {} but model has {}",
                    e.component, e.b, model.components[i].mult
                )));
            }
        }
        if self.entries.len() != model.components.len() {
            return Err(Error::validation("table is not complete over the model's components"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Atom {
    pub label: String,
    #[serde(with = "rat_opt", skip_serializing_if = "Option::is_none")]
    pub position: Option<Q>,
    #[serde(with = "rat")]
    pub mass: Q,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
    /// Atoms with negative mass under a semi-positivity flag.
    pub flags: Vec<String>,
}

impl AtomicMeasure {
    pub fn total_mass(&self) -> Q {
        self.atoms.iter().fold(Q::zero(), |acc, a| acc + &a.mass)
    }

    /// `(position, mass)` sorted by position; atoms without a position are skipped.
    pub fn positioned(&self) -> Vec<(Q, Q)> {
        let mut out: Vec<(Q, Q)> =
            self.atoms.iter().filter_map(|a| a.position.clone().map(|p| (p, a.mass.clone()))).collect();
        out.sort();
        out
    }

    pub fn to_line_measure(&self) -> super::line::LineMeasure {
        use crate::exact::q_to_f64;
        super::line::LineMeasure::new(self.positioned().iter().map(|(u, m)| (q_to_f64(u), q_to_f64(m))).collect())
    }

    pub fn integrate(&self, f: &LinePA) -> Q {
        self.atoms
            .iter()
            .filter_map(|a| a.position.as_ref().map(|p| f.eval(p) * &a.mass))
            .fold(Q::zero(), |acc, x| acc + x)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelMaReport {
    pub measure: AtomicMeasure,
    #[serde(with = "rat")]
    pub total: Q,
    /// `Some(true)` when the total equals the declared degree.
    pub degree_matches: Option<bool>,
}

/// `Σ_E b_E·(L₁·…·Lₙ·E)·δ_{v_E}`. Zero-mass atoms are dropped.
pub fn ma_model_metric(table: &IntersectionTable) -> Result<ModelMaReport> {
    table.validate()?;
    let mut measure = AtomicMeasure::default();
    for e in &table.entries {
        let mass = Q::from_integer(e.b.into()) * &e.intersection;
        if mass.is_negative() && table.semipositive {
            measure.flags.push(format!("nef violation: negative mass {} on {}", mass, e.component));
        }
        if !mass.is_zero() {
            measure.atoms.push(Atom { label: e.component.clone(), position: e.position.clone(), mass });
        }
    }
    let total = table.entries.iter().fold(Q::zero(), |acc, e| acc + Q::from_integer(e.b.into()) * &e.intersection);
    let degree_matches = table.degree.as_ref().map(|d| *d == total);
    Ok(ModelMaReport { measure, total, degree_matches })
}

/// Slope jumps of a piecewise-affine function in the valuation coordinate.
pub fn ma_pa_curve(f: &LinePA, semipositive: bool) -> AtomicMeasure {
    let mut measure = AtomicMeasure::default();
    for (u, jump) in f.jumps() {
        if jump.is_negative() && semipositive {
            measure.flags.push(format!("concave kink of size {} at u = {}", -&jump, u));
        }
        measure.atoms.push(Atom { label: format!("u={u}"), position: Some(u), mass: jump });
    }
    measure
}

/// `∫ f·MA(g)` on the line.
pub fn pairing(f: &LinePA, g: &LinePA) -> Q {
    ma_pa_curve(g, false).integrate(f)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingSymmetry {
    #[serde(with = "rat")]
    pub forward: Q,
    #[serde(with = "rat")]
    pub backward: Q,
    pub symmetric: bool,
}

/// `∫ f MA(g)` against `∫ g MA(f)`; both functions must be bounded.
pub fn pairing_symmetry(f: &LinePA, g: &LinePA) -> Result<PairingSymmetry> {
    if !f.is_bounded() || !g.is_bounded() {
        return Err(Error::config("pairing symmetry needs bounded functions (zero end slopes)"));
    }
    let forward = pairing(f, g);
    let backward = pairing(g, f);
    let symmetric = forward == backward;
    Ok(PairingSymmetry { forward, backward, symmetric })
}

/// Same positions and masses, ignoring labels and order.
pub fn same_measure(a: &AtomicMeasure, b: &AtomicMeasure) -> bool {
    a.atoms.len() == b.atoms.len()
        && a.atoms.iter().all(|x| x.position.is_some())
        && b.atoms.iter().all(|x| x.position.is_some())
        && a.positioned() == b.positioned()
}
