use berkhyb_core::monge_ampere::{
    cln_stability_check, experiments::ClnConfig, ma_complex_curve, ma_model_metric, ma_pa_curve, pairing_symmetry,
    Combine, CurveFamily, CurveTerm, GridConfig, IntersectionTable, LinePA, TableEntry,
};
use berkhyb_core::Q;
use num::Zero;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

fn table() -> impl Strategy<Value = IntersectionTable> {
    proptest::collection::vec((1u32..5, -10i64..10, 1i64..6), 1..6).prop_map(|rows| IntersectionTable {
        name: "random".into(),
        entries: rows
            .iter()
            .enumerate()
            .map(|(k, (b, n, d))| TableEntry { component: format!("E{k}"), b: *b, intersection: q(*n, *d), position: None })
            .collect(),
        degree: None,
        semipositive: false,
    })
}

/// Bounded PA function: difference of two envelopes with identical slope sets.
fn bounded_pa() -> impl Strategy<Value = LinePA> {
    (1i64..5, proptest::collection::vec((-8i64..8, 1i64..4), 2..5), proptest::collection::vec((-8i64..8, 1i64..4), 2..5)).prop_map(
        |(d, a, b)| {
            let lines = |cs: &Vec<(i64, i64)>| -> Vec<(Q, Q)> {
                cs.iter().enumerate().map(|(k, (n, den))| (q(-(k as i64 % (d + 1)), 1), q(*n, *den))).chain([(q(0, 1), q(0, 1)), (q(-d, 1), q(0, 1))]).collect()
            };
            LinePA::from_lines(&lines(&a)).unwrap().sub(&LinePA::from_lines(&lines(&b)).unwrap())
        },
    )
}

fn family() -> impl Strategy<Value = CurveFamily> {
    (1u32..5, 1u32..4, proptest::collection::vec((0u32..5, -6i64..6, 1i64..4), 1..5)).prop_map(|(d, m, ts)| CurveFamily {
        name: "random".into(),
        degree: d,
        m,
        terms: [(0u32, 0i64, 1i64), (d, 0, 1)]
            .into_iter()
            .chain(ts)
            .map(|(k, n, den)| CurveTerm { power: k.min(d), t_exponent: q(n, den), modulus: 1.0 })
            .collect(),
        combine: Combine::Max,
    })
}

proptest! {
    #[test]
    fn atomic_mass_is_the_table_sum(t in table()) {
        let r = ma_model_metric(&t).unwrap();
        let direct = t.entries.iter().fold(Q::zero(), |a, e| a + Q::from_integer(e.b.into()) * &e.intersection);
        prop_assert_eq!(&r.total, &direct);
        prop_assert_eq!(r.measure.total_mass(), direct);
    }

    #[test]
    fn pairing_is_symmetric(f in bounded_pa(), g in bounded_pa()) {
        let s = pairing_symmetry(&f, &g).unwrap();
        prop_assert!(s.symmetric, "{} vs {}", s.forward, s.backward);
    }

    #[test]
    fn slope_jump_mass_is_the_degree(fam in family()) {
        let mu = ma_pa_curve(&fam.na_potential().unwrap(), true);
        prop_assert!(mu.flags.is_empty());
        prop_assert_eq!(mu.total_mass(), fam.mass());
    }

    #[test]
    fn cln_difference_is_antisymmetric_and_linear(fam in family(), k in 0usize..3) {
        let idx = k % fam.terms.len();
        let cfg = ClnConfig { family: fam, perturb: vec![idx], deltas: vec![q(0, 1), q(1, 1000), q(1, 10000)], residual_tol: 0.05 };
        let r = cln_stability_check(&cfg).unwrap();
        prop_assert!(r.rows.iter().all(|row| row.antisymmetric));
        prop_assert!(r.rows[0].difference.is_zero());
        // |D| ≤ 2·mass·sup|φ − φ′|
        for row in &r.rows {
            prop_assert!(num::Signed::abs(&row.difference) <= Q::from_integer(2.into()) * cfg.family.mass() * &row.sup_diff);
        }
    }
}

#[test]
fn grid_mass_at_full_resolution() {
    let fam = CurveFamily {
        name: "three-section".into(),
        degree: 4,
        m: 4,
        terms: vec![
            CurveTerm { power: 0, t_exponent: q(0, 1), modulus: 1.0 },
            CurveTerm { power: 2, t_exponent: q(0, 1), modulus: 1.0 },
            CurveTerm { power: 4, t_exponent: q(1, 1), modulus: 1.0 },
        ],
        combine: Combine::Max,
    };
    let ma = ma_complex_curve(&fam, 1e-3, &GridConfig::default()).unwrap();
    assert!((ma.total_mass - 1.0).abs() < 1e-4);
    assert!(ma.charts.iter().all(|g| g.min_cell > -1e-9));
}
