use berkhyb_core::mz_tree::{fs_slope_identity, mz_fs_eval, mz_fs_function, mz_psh_check, FsFamily, MZPoint, MZValue, Param};
use berkhyb_core::Q;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = FsFamily> {
    let n = (1i64..120).prop_flat_map(|a| prop_oneof![Just(a), Just(-a)]);
    (1u32..4, proptest::collection::vec((n, -3i64..3, 1i64..3), 1..5)).prop_map(|(m, ts)| {
        FsFamily::new(m, &ts.into_iter().map(|(n, c, d)| (n, Q::new(c.into(), d.into()))).collect::<Vec<_>>()).unwrap()
    })
}

proptest! {
    #[test]
    fn fs_functions_are_psh(fam in family()) {
        let f = mz_fs_function(&fam).unwrap();
        let v = mz_psh_check(&f).unwrap();
        prop_assert!(v.psh, "{:?}", v.reasons);
    }

    #[test]
    fn padic_slope_sum_is_minus_log_gcd(fam in family()) {
        let id = fs_slope_identity(&fam).unwrap();
        prop_assert!(id.padic_identity);
        // the full closed form holds exactly when s_∞ agrees with m⁻¹ log n₂
        prop_assert_eq!(id.sum_identity, id.s_inf_discrepancy.is_none());
    }

    #[test]
    fn branch_data_match_direct_evaluation(fam in family(), en in 0i64..20, ed in 1i64..5, xn in 0i64..5) {
        let f = mz_fs_function(&fam).unwrap();
        let eps = Q::new(en.into(), ed.into());
        let x = Q::new(xn.into(), 4.into());
        let mut pts = vec![MZPoint::Origin, MZPoint::Archimedean { x }];
        for p in [2u64, 3, 5, 7, 11] {
            pts.push(MZPoint::padic(p, eps.clone()));
            pts.push(MZPoint::Padic { p, eps: Param::Infinity });
        }
        for pt in pts {
            prop_assert_eq!(f.eval(&pt).unwrap(), mz_fs_eval(&fam, &pt).unwrap());
        }
    }
}

#[test]
fn branch_ends_are_polar() {
    for p in [2u64, 3, 5, 7, 11, 13] {
        let fam = FsFamily::new(1, &[(p as i64, Q::from_integer(0.into()))]).unwrap();
        let v = mz_fs_eval(&fam, &MZPoint::Padic { p, eps: Param::Infinity }).unwrap();
        assert_eq!(v, MZValue::NegInfinity);
        assert_eq!(mz_fs_function(&fam).unwrap().eval(&MZPoint::Padic { p, eps: Param::Infinity }).unwrap(), MZValue::NegInfinity);
    }
}
