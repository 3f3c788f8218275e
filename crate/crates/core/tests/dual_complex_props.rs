mod common;

use berkhyb_core::dual_complex::{build_dual_complex, lift_to_finer, model_function_restriction, retraction, MonomialPullback};
use berkhyb_core::valuation::QuasiMonomialPoint;
use berkhyb_core::Q;
use common::{models, point_from_profile, stratum_point};
use num::One;
use proptest::prelude::*;

fn simplex_constraint(p: &QuasiMonomialPoint) -> bool {
    let m = p.model();
    p.indices().iter().zip(p.weights()).fold(Q::from_integer(0.into()), |a, (i, w)| a + w * m.mult(*i)).is_one()
}

proptest! {
    #[test]
    fn retraction_of_inclusion_is_identity((st, prof) in stratum_point(7), which in 0usize..3) {
        let set = models();
        let name = ["segment", "triangle", "blowup"][which];
        let model = set.get(name).unwrap();
        let v = point_from_profile(&model, st % model.strata.len(), &prof);
        let r = retraction(&model, &v, &MonomialPullback::identity(model.clone())).unwrap();
        prop_assert!(simplex_constraint(&r.point));
        prop_assert_eq!(r.point, v);
    }

    #[test]
    fn retraction_through_blowup_undoes_the_lift((st, prof) in stratum_point(3)) {
        let set = models();
        let pb = set.pullback("blowup", "segment").unwrap();
        let v = point_from_profile(&pb.target, st, &prof);
        let lifted = lift_to_finer(&v, &pb).unwrap();
        let back = retraction(&pb.target, &lifted, &pb).unwrap();
        prop_assert!(simplex_constraint(&back.point));
        prop_assert_eq!(back.point, v);
    }

    #[test]
    fn retraction_lands_on_the_simplex((st, prof) in stratum_point(5)) {
        let set = models();
        let pb = set.pullback("blowup", "segment").unwrap();
        let v = point_from_profile(&pb.source, st, &prof);
        let r = retraction(&pb.target, &v, &pb).unwrap();
        prop_assert!(simplex_constraint(&r.point));
    }

    #[test]
    fn model_functions_are_affine_on_simplices(d in proptest::collection::vec(-6i64..=6, 3), st in 0usize..7,
                                               a in proptest::collection::vec(1u32..30, 3), b in proptest::collection::vec(1u32..30, 3)) {
        let model = models().get("triangle").unwrap();
        let f = model_function_restriction(&d, &model).unwrap();
        let va = point_from_profile(&model, st, &a);
        let vb = point_from_profile(&model, st, &b);
        let half = Q::new(1.into(), 2.into());
        let mid: Vec<Q> = va.weights().iter().zip(vb.weights()).map(|(x, y)| (x + y) * &half).collect();
        let vm = QuasiMonomialPoint::new(model.clone(), st, mid).unwrap();
        let lhs = f.eval(&vm).unwrap();
        let rhs = (&f.eval(&va).unwrap() + &f.eval(&vb).unwrap()).scale(&half);
        prop_assert_eq!(lhs, rhs);
        prop_assert!(f.check_continuity().continuous);
    }
}

/// Σ_{S declared} (−1)^{|S|−1} over all non-empty component subsets.
fn euler_by_subsets(model: &berkhyb_core::dual_complex::SncModelCombinatorics) -> i64 {
    let n = model.components.len();
    let mut chi = 0;
    for mask in 1u32..(1 << n) {
        let s: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if model.strata.iter().any(|st| st.indices == s) {
            chi += if s.len() % 2 == 1 { 1 } else { -1 };
        }
    }
    chi
}

#[test]
fn euler_characteristics_of_bundled_models() {
    let set = models();
    for (name, counts) in [("segment", vec![2, 1]), ("triangle", vec![3, 3, 1]), ("blowup", vec![3, 2])] {
        let m = set.get(name).unwrap();
        let dc = build_dual_complex(&m).unwrap();
        assert_eq!(dc.vertex_count, m.components.len());
        assert_eq!(dc.count_by_dim(), counts, "{name}");
        assert_eq!(dc.euler_characteristic(), euler_by_subsets(&m), "{name}");
        assert_eq!(dc.euler_characteristic(), 1, "{name} is contractible");
    }
}
