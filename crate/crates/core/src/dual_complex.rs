//! Combinatorics of snc models: components, strata, dual complexes, monomial
//! pullbacks and the retraction onto skeleta.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{fmt_q, LogAffine, Q};
use crate::valuation::{qm_eval, LaurentSeriesData, QuasiMonomialPoint, T_LABEL};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub label: String,
    pub mult: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stratum {
    pub indices: Vec<usize>,
    pub label: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StratumRepr {
    Bare(Vec<usize>),
    Full { indices: Vec<usize>, label: Option<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullbackSpec {
    pub target: String,
    /// `matrix[i][k]`: exponent of source local equation `k` in target equation `i`.
    pub matrix: Vec<Vec<u32>>,
}

#[derive(Deserialize)]
struct ModelRepr {
    #[serde(default)]
    name: Option<String>,
    components: Vec<Component>,
    strata: Vec<StratumRepr>,
    #[serde(default)]
    pullbacks: Vec<PullbackSpec>,
}

/// Combinatorial description of an snc model's special fiber `Σ a_i D_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr")]
pub struct SncModelCombinatorics {
    pub name: String,
    pub components: Vec<Component>,
    pub strata: Vec<Stratum>,
    pub pullbacks: Vec<PullbackSpec>,
}

impl TryFrom<ModelRepr> for SncModelCombinatorics {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        let strata = r
            .strata
            .into_iter()
            .map(|s| match s {
                StratumRepr::Bare(indices) => (indices, None),
                StratumRepr::Full { indices, label } => (indices, label),
            })
            .collect::<Vec<_>>();
        Self::new(r.name.unwrap_or_else(|| "model".into()), r.components, strata, r.pullbacks)
    }
}

impl SncModelCombinatorics {
    pub fn new(
        name: String,
        components: Vec<Component>,
        strata: Vec<(Vec<usize>, Option<String>)>,
        pullbacks: Vec<PullbackSpec>,
    ) -> Result<Self> {
        let mut labels = BTreeSet::new();
        for c in &components {
            if c.mult == 0 {
                return Err(Error::validation(format!("component {} has multiplicity 0", c.label)));
            }
            if c.label == T_LABEL {
                return Err(Error::validation("component label `t` is reserved for the uniformizer"));
            }
            if !labels.insert(c.label.clone()) {
                return Err(Error::validation(format!("duplicate component label {}", c.label)));
            }
        }
        let n = components.len();
        let mut out = Vec::with_capacity(strata.len());
        for (mut idx, label) in strata {
            idx.sort_unstable();
            if idx.is_empty() {
                return Err(Error::validation("empty stratum"));
            }
            if idx.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::validation(format!("stratum {idx:?} repeats a component")));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidIndex { index: bad, len: n });
            }
            let label = label.unwrap_or_else(|| {
                let names: Vec<&str> = idx.iter().map(|i| components[*i].label.as_str()).collect();
                names.join("∩")
            });
            out.push(Stratum { indices: idx, label });
        }
        let model = Self { name, components, strata: out, pullbacks };
        model.validate()?;
        Ok(model)
    }

    /// Builds a model with default stratum labels and no pullbacks.
    pub fn simple(name: &str, components: &[(&str, u32)], strata: &[&[usize]]) -> Result<Self> {
        Self::new(
            name.into(),
            components.iter().map(|(l, m)| Component { label: (*l).into(), mult: *m }).collect(),
            strata.iter().map(|s| (s.to_vec(), None)).collect(),
            Vec::new(),
        )
    }

    fn validate(&self) -> Result<()> {
        let declared: BTreeSet<&Vec<usize>> = self.strata.iter().map(|s| &s.indices).collect();
        for i in 0..self.components.len() {
            if !declared.contains(&vec![i]) {
                return Err(Error::validation(format!(
                    "component {} is missing its vertex stratum",
                    self.components[i].label
                )));
            }
        }
        for s in &self.strata {
            for sub in proper_subsets(&s.indices) {
                if !declared.contains(&sub) {
                    return Err(Error::validation(format!(
                        "strata are not face-closed: {:?} is declared but its face {:?} is not",
                        s.indices, sub
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn component_index(&self, label: &str) -> Option<usize> {
        self.components.iter().position(|c| c.label == label)
    }

    pub fn mult(&self, i: usize) -> Q {
        Q::from_integer(self.components[i].mult.into())
    }

    /// Strata whose index set is exactly `indices` (sorted).
    pub fn strata_with(&self, indices: &[usize]) -> Vec<usize> {
        self.strata
            .iter()
            .enumerate()
            .filter(|(_, s)| s.indices == indices)
            .map(|(k, _)| k)
            .collect()
    }

    /// Local equation `z_i` as Laurent data over the component labels.
    pub fn local_equation(&self, i: usize) -> LaurentSeriesData {
        let vars: Vec<&str> = self.components.iter().map(|c| c.label.as_str()).collect();
        let mut exp = vec![0; vars.len()];
        exp[i] = 1;
        LaurentSeriesData::monomial(&vars, exp).expect("labels are distinct")
    }

    /// The uniformizer as `Π z_j^{a_j}` over the component labels.
    pub fn uniformizer(&self) -> LaurentSeriesData {
        let vars: Vec<&str> = self.components.iter().map(|c| c.label.as_str()).collect();
        let exp = self.components.iter().map(|c| c.mult as i64).collect();
        LaurentSeriesData::monomial(&vars, exp).expect("labels are distinct")
    }
}

fn proper_subsets(idx: &[usize]) -> Vec<Vec<usize>> {
    let n = idx.len();
    (1..(1u64 << n) - 1)
        .map(|mask| (0..n).filter(|k| mask >> k & 1 == 1).map(|k| idx[k]).collect())
        .collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ModelFile {
    Many { models: Vec<SncModelCombinatorics> },
    One(SncModelCombinatorics),
}

/// A collection of models closed under the pullbacks they declare.
#[derive(Clone, Debug, Default)]
pub struct ModelSet {
    models: BTreeMap<String, Arc<SncModelCombinatorics>>,
}

impl ModelSet {
    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s)?;
        let list = match file {
            ModelFile::Many { models } => models,
            ModelFile::One(m) => vec![m],
        };
        let mut set = ModelSet::default();
        for m in list {
            set.insert(m)?;
        }
        for m in set.models.values() {
            for pb in &m.pullbacks {
                set.pullback(&m.name, &pb.target)?;
            }
        }
        Ok(set)
    }

    pub fn insert(&mut self, m: SncModelCombinatorics) -> Result<Arc<SncModelCombinatorics>> {
        if self.models.contains_key(&m.name) {
            return Err(Error::validation(format!("duplicate model name {}", m.name)));
        }
        let a = Arc::new(m);
        self.models.insert(a.name.clone(), a.clone());
        Ok(a)
    }

    pub fn get(&self, name: &str) -> Result<Arc<SncModelCombinatorics>> {
        self.models
            .get(name)
            .cloned()
            .ok_or_else(|| Error::config(format!("unknown model `{name}`")))
    }

    pub fn models(&self) -> impl Iterator<Item = &Arc<SncModelCombinatorics>> {
        self.models.values()
    }

    /// The declared pullback from `source` to `target` (identity when equal).
    pub fn pullback(&self, source: &str, target: &str) -> Result<MonomialPullback> {
        let s = self.get(source)?;
        let t = self.get(target)?;
        if source == target {
            return Ok(MonomialPullback::identity(s));
        }
        let pullback = s
            .pullbacks
            .iter()
            .find(|p| p.target == target)
            .ok_or_else(|| Error::config(format!("model `{source}` declares no pullback to `{target}`")))?;
        MonomialPullback::new(s.clone(), t, pullback.matrix.clone())
    }
}

/// Target local equations written as monomials in source local equations.
#[derive(Clone, Debug)]
pub struct MonomialPullback {
    pub source: Arc<SncModelCombinatorics>,
    pub target: Arc<SncModelCombinatorics>,
    pub matrix: Vec<Vec<u32>>,
}

impl MonomialPullback {
    pub fn new(source: Arc<SncModelCombinatorics>, target: Arc<SncModelCombinatorics>, matrix: Vec<Vec<u32>>) -> Result<Self> {
        let (nt, ns) = (target.components.len(), source.components.len());
        if matrix.len() != nt || matrix.iter().any(|r| r.len() != ns) {
            return Err(Error::validation(format!(
                "pullback {}→{} needs a {nt}×{ns} matrix",
                source.name, target.name
            )));
        }
        for k in 0..ns {
            let col: u64 = (0..nt).map(|i| target.components[i].mult as u64 * matrix[i][k] as u64).sum();
            if col != source.components[k].mult as u64 {
                return Err(Error::validation(format!(
                    "multiplicity mismatch on {}: a-weighted column sum {col} but multiplicity {}",
                    source.components[k].label, source.components[k].mult
                )));
            }
        }
        Ok(Self { source, target, matrix })
    }

    pub fn identity(m: Arc<SncModelCombinatorics>) -> Self {
        let n = m.components.len();
        let matrix = (0..n).map(|i| (0..n).map(|k| u32::from(i == k)).collect()).collect();
        Self { source: m.clone(), target: m, matrix }
    }

    /// Pullback of target equation `z_i` as Laurent data on the source labels.
    pub fn pulled_back_equation(&self, i: usize) -> LaurentSeriesData {
        let vars: Vec<&str> = self.source.components.iter().map(|c| c.label.as_str()).collect();
        let exp = self.matrix[i].iter().map(|e| *e as i64).collect();
        LaurentSeriesData::monomial(&vars, exp).expect("labels are distinct")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Simplex {
    pub stratum: usize,
    pub dim: usize,
    /// Strata of codimension one in this simplex, by index set.
    pub facets: Vec<usize>,
}

/// Cell complex with one simplex `{w ≥ 0 : Σ a_j w_j = 1}` per stratum.
#[derive(Clone, Debug, Serialize)]
pub struct DualComplex {
    pub model: String,
    pub simplices: Vec<Simplex>,
    pub vertex_count: usize,
    /// Set when a face index set is carried by several declared strata.
    pub ambiguous_incidence: bool,
}

impl DualComplex {
    pub fn euler_characteristic(&self) -> i64 {
        self.simplices.iter().map(|s| if s.dim % 2 == 0 { 1 } else { -1 }).sum()
    }

    pub fn count_by_dim(&self) -> Vec<usize> {
        let top = self.simplices.iter().map(|s| s.dim).max().unwrap_or(0);
        let mut out = vec![0; top + 1];
        for s in &self.simplices {
            out[s.dim] += 1;
        }
        out
    }

    /// True when simplex `face` lies in the closure of simplex `cell`.
    pub fn is_face(&self, model: &SncModelCombinatorics, face: usize, cell: usize) -> bool {
        let f = &model.strata[face].indices;
        let c = &model.strata[cell].indices;
        f.iter().all(|i| c.contains(i))
    }
}

pub fn build_dual_complex(model: &SncModelCombinatorics) -> Result<DualComplex> {
    model.validate()?;
    let mut ambiguous = false;
    let simplices = model
        .strata
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut facets = Vec::new();
            if s.indices.len() > 1 {
                for drop in 0..s.indices.len() {
                    let face: Vec<usize> =
                        s.indices.iter().enumerate().filter(|(j, _)| *j != drop).map(|(_, i)| *i).collect();
                    let hits = model.strata_with(&face);
                    ambiguous |= hits.len() > 1;
                    facets.extend(hits);
                }
            }
            Simplex { stratum: k, dim: s.indices.len() - 1, facets }
        })
        .collect();
    Ok(DualComplex {
        model: model.name.clone(),
        simplices,
        vertex_count: model.components.len(),
        ambiguous_incidence: ambiguous,
    })
}

#[derive(Clone, Debug)]
pub struct RetractionResult {
    pub point: QuasiMonomialPoint,
    /// Several minimal declared strata contained the support.
    pub ambiguous: bool,
}

/// Retracts a point of the source skeleton onto the target skeleton.
pub fn retraction(
    target: &Arc<SncModelCombinatorics>,
    v: &QuasiMonomialPoint,
    pullback: &MonomialPullback,
) -> Result<RetractionResult> {
    if pullback.target.name != target.name || pullback.source.name != v.model().name {
        return Err(Error::config("pullback does not connect the point's model to the target"));
    }
    let w: Vec<Q> = (0..target.components.len())
        .map(|i| {
            qm_eval(v, &pullback.pulled_back_equation(i)).map(|x| x.finite().cloned().expect("monomials have finite value"))
        })
        .collect::<Result<_>>()?;
    let support: Vec<usize> = (0..w.len()).filter(|i| w[*i].is_positive()).collect();
    let containing: Vec<usize> = target
        .strata
        .iter()
        .enumerate()
        .filter(|(_, s)| support.iter().all(|i| s.indices.contains(i)))
        .map(|(k, _)| k)
        .collect();
    let min_size = containing
        .iter()
        .map(|k| target.strata[*k].indices.len())
        .min()
        .ok_or_else(|| Error::ModelInconsistency(format!("support {support:?} lies in no declared stratum")))?;
    let minimal: Vec<usize> = containing
        .into_iter()
        .filter(|k| target.strata[*k].indices.len() == min_size)
        .collect();
    let chosen = minimal[0];
    let weights = target.strata[chosen].indices.iter().map(|i| w[*i].clone()).collect();
    Ok(RetractionResult {
        point: QuasiMonomialPoint::new(target.clone(), chosen, weights)?,
        ambiguous: minimal.len() > 1,
    })
}

/// Solves `A x = b` exactly; `None` if inconsistent or underdetermined.
pub(crate) fn solve_exact(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Q>> = a.iter().zip(b).map(|(r, x)| {
        let mut r = r.clone();
        r.push(x.clone());
        r
    }).collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        let Some(p) = (pivot_row..rows).find(|r| !m[*r][c].is_zero()) else { continue };
        m.swap(pivot_row, p);
        let inv = Q::from_integer(1.into()) / &m[pivot_row][c];
        for x in m[pivot_row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in 0..=cols {
                    let d = &f * &m[pivot_row][k];
                    m[r][k] -= d;
                }
            }
        }
        pivots.push(c);
        pivot_row += 1;
    }
    if pivots.len() < cols {
        return None;
    }
    if (pivot_row..rows).any(|r| !m[r][cols].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (r, c) in pivots.iter().enumerate() {
        x[*c] = m[r][cols].clone();
    }
    Some(x)
}

/// Writes a target skeleton point as a point of the source skeleton with the
/// same monomial values, searching source strata from small to large.
pub fn lift_to_finer(v: &QuasiMonomialPoint, pullback: &MonomialPullback) -> Result<QuasiMonomialPoint> {
    if pullback.target.name != v.model().name {
        return Err(Error::config("pullback target does not match the point's model"));
    }
    let w = v.component_weights();
    let src = &pullback.source;
    let mut order: Vec<usize> = (0..src.strata.len()).collect();
    order.sort_by_key(|k| (src.strata[*k].indices.len(), *k));
    for k in order {
        let idx = &src.strata[k].indices;
        let a: Vec<Vec<Q>> = pullback
            .matrix
            .iter()
            .map(|row| idx.iter().map(|j| Q::from_integer(row[*j].into())).collect())
            .collect();
        if let Some(x) = solve_exact(&a, &w) {
            if x.iter().all(|xi| xi.is_positive()) {
                return QuasiMonomialPoint::new(src.clone(), k, x);
            }
        }
    }
    Err(Error::ModelInconsistency(format!(
        "no stratum of {} represents the point with weights {:?}",
        src.name,
        w.iter().map(fmt_q).collect::<Vec<_>>()
    )))
}

/// Affine data `Σ_j gradient_j w_j + offset` on one simplex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub gradient: Vec<LogAffine>,
    pub offset: LogAffine,
}

/// Piecewise-affine function on a skeleton, one affine piece per stratum.
#[derive(Clone, Debug)]
pub struct PAFunction {
    pub model: Arc<SncModelCombinatorics>,
    pub pieces: Vec<AffinePiece>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub continuous: bool,
    /// `(stratum, component)` pairs whose vertex value disagrees with the vertex piece.
    pub mismatches: Vec<(usize, usize)>,
}

impl PAFunction {
    pub fn eval(&self, v: &QuasiMonomialPoint) -> Result<LogAffine> {
        if v.model().name != self.model.name {
            return Err(Error::config("point lives on a different model"));
        }
        let p = &self.pieces[v.stratum()];
        Ok(p.gradient
            .iter()
            .zip(v.weights())
            .fold(p.offset.clone(), |acc, (g, w)| &acc + &g.scale(w)))
    }

    /// Value of the piece on `stratum` at the vertex of component `i`.
    pub fn vertex_value(&self, stratum: usize, i: usize) -> LogAffine {
        let s = &self.model.strata[stratum];
        let p = &self.pieces[stratum];
        let k = s.indices.iter().position(|j| *j == i).expect("vertex of the stratum");
        &p.offset + &p.gradient[k].scale(&(Q::from_integer(1.into()) / self.model.mult(i)))
    }

    /// Exact face agreement: every piece matches the vertex pieces at its vertices.
    pub fn check_continuity(&self) -> ContinuityReport {
        let mut mismatches = Vec::new();
        for (k, s) in self.model.strata.iter().enumerate() {
            for &i in &s.indices {
                let here = self.vertex_value(k, i);
                for vk in self.model.strata_with(&[i]) {
                    if self.vertex_value(vk, i) != here {
                        mismatches.push((k, i));
                    }
                }
            }
        }
        ContinuityReport { continuous: mismatches.is_empty(), mismatches }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("simplex_id,component_index,gradient_log_r,gradient_const,offset_log_r,offset_const\n");
        for (k, (s, p)) in self.model.strata.iter().zip(&self.pieces).enumerate() {
            for (i, g) in s.indices.iter().zip(&p.gradient) {
                out.push_str(&format!(
                    "{k},{i},{},{},{},{}\n",
                    fmt_q(&g.log_r),
                    fmt_q(&g.constant),
                    fmt_q(&p.offset.log_r),
                    fmt_q(&p.offset.constant)
                ));
            }
        }
        out
    }
}

/// `v ↦ log r · v(z_D)` for a vertical divisor `D = Σ d_i D_i`.
pub fn model_function_restriction(divisor: &[i64], model: &Arc<SncModelCombinatorics>) -> Result<PAFunction> {
    if divisor.len() != model.components.len() {
        return Err(Error::config(format!(
            "divisor has {} coefficients but model `{}` has {} components",
            divisor.len(),
            model.name,
            model.components.len()
        )));
    }
    let pieces = model
        .strata
        .iter()
        .map(|s| AffinePiece {
            gradient: s.indices.iter().map(|i| LogAffine::of_log_r(Q::from_integer(divisor[*i].into()))).collect(),
            offset: LogAffine::zero(),
        })
        .collect();
    Ok(PAFunction { model: model.clone(), pieces })
}
