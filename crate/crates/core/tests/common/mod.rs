#![allow(dead_code)]

use std::sync::Arc;

use berkhyb_core::dual_complex::{ModelSet, SncModelCombinatorics};
use berkhyb_core::valuation::QuasiMonomialPoint;
use berkhyb_core::Q;
use num::{One, Zero};
use proptest::prelude::*;

pub const MODELS: &str = r#"{"models":[
  {"name":"segment","components":[{"label":"z1","mult":1},{"label":"z2","mult":1}],"strata":[[0],[1],[0,1]]},
  {"name":"triangle","components":[{"label":"x","mult":1},{"label":"y","mult":2},{"label":"z","mult":3}],
   "strata":[[0],[1],[2],[0,1],[0,2],[1,2],[0,1,2]]},
  {"name":"blowup","components":[{"label":"z1p","mult":1},{"label":"z2p","mult":1},{"label":"e","mult":2}],
   "strata":[[0],[1],[2],[0,2],[1,2]],
   "pullbacks":[{"target":"segment","matrix":[[1,0,1],[0,1,1]]}]}]}"#;

pub fn models() -> ModelSet {
    ModelSet::from_json(MODELS).unwrap()
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// Random rational point of a stratum from positive integer profile `raw`.
pub fn point_from_profile(model: &Arc<SncModelCombinatorics>, stratum: usize, raw: &[u32]) -> QuasiMonomialPoint {
    let idx = &model.strata[stratum].indices;
    let lam: Vec<Q> = idx.iter().zip(raw).map(|(_, r)| Q::from_integer((*r as i64).into())).collect();
    let total = lam.iter().fold(Q::zero(), |a, b| a + b);
    let w: Vec<Q> = lam.iter().zip(idx).map(|(l, j)| l / &total / model.mult(*j)).collect();
    let p = QuasiMonomialPoint::new(model.clone(), stratum, w).unwrap();
    assert!(p.weights().iter().zip(idx).fold(Q::zero(), |a, (w, j)| a + w * model.mult(*j)).is_one());
    p
}

/// Strategy: (stratum index, positive profile) on `model`.
pub fn stratum_point(n_strata: usize) -> impl Strategy<Value = (usize, Vec<u32>)> {
    (0..n_strata, proptest::collection::vec(1u32..20, 3))
}
