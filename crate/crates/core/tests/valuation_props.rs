mod common;

use std::sync::Arc;

use berkhyb_core::dual_complex::SncModelCombinatorics;
use berkhyb_core::valuation::{
    gauss_extension, qm_eval, valuation_superadditivity_check, Coefficient, LaurentSeriesData, ValuationValue,
};
use berkhyb_core::Q;
use common::{models, point_from_profile, q};
use num::Zero;
use proptest::prelude::*;

const VARS: [&str; 4] = ["x", "y", "z", "t"];

fn triangle() -> Arc<SncModelCombinatorics> {
    models().get("triangle").unwrap()
}

fn raw_terms() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1usize..=4).prop_flat_map(|nv| (Just(nv), proptest::collection::vec(proptest::collection::vec(-10i64..=10, nv), 0..=8)))
}

fn brute_min(terms: &[Vec<i64>], w: &[Q]) -> ValuationValue {
    let mut best: Option<Q> = None;
    for e in terms {
        let mut s = Q::zero();
        for (k, wi) in e.iter().zip(w) {
            s += wi * Q::from_integer((*k).into());
        }
        if best.as_ref().is_none_or(|b| s < *b) {
            best = Some(s);
        }
    }
    best.map_or(ValuationValue::Infinity, ValuationValue::Finite)
}

proptest! {
    #[test]
    fn qm_eval_matches_brute_force((nv, terms) in raw_terms(), st in 0usize..7, prof in proptest::collection::vec(1u32..30, 3)) {
        let model = triangle();
        let v = point_from_profile(&model, st, &prof);
        let vars: Vec<&str> = VARS[..nv].to_vec();
        let f = LaurentSeriesData::from_terms(&vars, terms.iter().map(|e| (e.clone(), Coefficient::Unit))).unwrap();
        let w: Vec<Q> = vars.iter().map(|l| v.weight_of(l).unwrap()).collect();
        prop_assert_eq!(qm_eval(&v, &f).unwrap(), brute_min(&terms, &w));
    }

    #[test]
    fn uniformizer_has_value_one(st in 0usize..7, prof in proptest::collection::vec(1u32..30, 3)) {
        let set = models();
        for name in ["segment", "triangle", "blowup"] {
            let model = set.get(name).unwrap();
            let v = point_from_profile(&model, st % model.strata.len(), &prof);
            prop_assert_eq!(qm_eval(&v, &model.uniformizer()).unwrap(), ValuationValue::Finite(q(1, 1)));
            let t = LaurentSeriesData::monomial(&["t"], vec![1]).unwrap();
            prop_assert_eq!(qm_eval(&v, &t).unwrap(), ValuationValue::Finite(q(1, 1)));
        }
    }

    #[test]
    fn single_monomials_are_linear_in_weights(exp in proptest::collection::vec(-10i64..=10, 3), st in 0usize..7,
                                               a in proptest::collection::vec(1u32..30, 3), b in proptest::collection::vec(1u32..30, 3)) {
        // homogeneity on monomials: the value is a linear functional of w, so convex
        // combinations are respected exactly
        let model = triangle();
        let f = LaurentSeriesData::monomial(&["x", "y", "z"], exp).unwrap();
        let va = point_from_profile(&model, st, &a);
        let vb = point_from_profile(&model, st, &b);
        let mid: Vec<Q> = va.weights().iter().zip(vb.weights()).map(|(x, y)| (x + y) / Q::from_integer(2.into())).collect();
        let vm = berkhyb_core::valuation::QuasiMonomialPoint::new(model.clone(), st, mid).unwrap();
        let fa = qm_eval(&va, &f).unwrap().finite().cloned().unwrap();
        let fb = qm_eval(&vb, &f).unwrap().finite().cloned().unwrap();
        let fm = qm_eval(&vm, &f).unwrap().finite().cloned().unwrap();
        prop_assert_eq!(fm, (fa + fb) / Q::from_integer(2.into()));
        let scaled = berkhyb_core::valuation::monomial_min(&LaurentSeriesData::monomial(&["x", "y", "z"], vec![1, 2, 3]).unwrap(),
            &va.component_weights().iter().map(|w| w * Q::from_integer(3.into())).collect::<Vec<_>>());
        let base = berkhyb_core::valuation::monomial_min(&LaurentSeriesData::monomial(&["x", "y", "z"], vec![1, 2, 3]).unwrap(), &va.component_weights());
        prop_assert_eq!(scaled.finite().cloned().unwrap(), base.finite().cloned().unwrap() * Q::from_integer(3.into()));
    }

    #[test]
    fn gauss_with_trivial_oracle_is_ord_t(ns in proptest::collection::vec(-20i64..20, 1..8)) {
        let pairs: Vec<(i64, ())> = ns.iter().map(|n| (*n, ())).collect();
        let v = gauss_extension(|_: &()| Ok(ValuationValue::Finite(Q::zero())), &pairs).unwrap();
        prop_assert_eq!(v, ValuationValue::Finite(Q::from_integer((*ns.iter().min().unwrap()).into())));
    }

    #[test]
    fn superadditivity_on_unit_polynomials(f in proptest::collection::vec(proptest::collection::vec(-5i64..=5, 3), 1..5),
                                           g in proptest::collection::vec(proptest::collection::vec(-5i64..=5, 3), 1..5),
                                           st in 0usize..7, prof in proptest::collection::vec(1u32..30, 3)) {
        let model = triangle();
        let v = point_from_profile(&model, st, &prof);
        let mk = |ts: &Vec<Vec<i64>>| LaurentSeriesData::from_terms(&["x", "y", "z"], ts.iter().map(|e| (e.clone(), Coefficient::Unit))).unwrap();
        let r = valuation_superadditivity_check(&v, &mk(&f), &mk(&g)).unwrap();
        prop_assert!(r.product_holds && r.sum_holds);
    }
}

#[test]
fn unknown_variable_is_a_config_error() {
    let model = triangle();
    let v = point_from_profile(&model, 6, &[1, 1, 1]);
    let f = LaurentSeriesData::monomial(&["w"], vec![1]).unwrap();
    assert!(qm_eval(&v, &f).is_err());
}
