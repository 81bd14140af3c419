use num_traits::Signed;
use pmcontext::correlation::{self, Inequality};
use pmcontext::dualdesc;
use pmcontext::exactgeom::{pair, rat, ratio, HRep, HomogeneousVector, Rational, VectorKind};
use pmcontext::io::{self, Polytope};
use pmcontext::quantum::{self, DepolarizingStrength};
use pmcontext::scenario::{Cell, Context, Scenario};
use pmcontext::symmetry::SignedPermutation;
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=12).prop_map(|(n, d)| ratio(n, d))
}

fn nonzero_vec(len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(small_rational(), len).prop_filter("nonzero", |v| v.iter().any(|x| *x != rat(0)))
}

fn signed_permutation(n: usize) -> impl Strategy<Value = SignedPermutation> {
    (Just((0..n).collect::<Vec<usize>>()).prop_shuffle(), prop::collection::vec(prop::bool::ANY, n))
        .prop_map(|(perm, s)| SignedPermutation::new(perm, s.iter().map(|&b| if b { -1 } else { 1 }).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_idempotent_and_scale_free(v in nonzero_vec(4), k in 1i64..9, m in 1i64..9) {
        let a = HomogeneousVector::normalize(&v, VectorKind::Inequality).unwrap();
        let again: Vec<Rational> = a.entries().iter().map(|e| Rational::from_integer(e.clone())).collect();
        prop_assert_eq!(&HomogeneousVector::normalize(&again, VectorKind::Inequality).unwrap(), &a);
        let scaled: Vec<Rational> = v.iter().map(|x| x * ratio(k, m)).collect();
        prop_assert_eq!(&HomogeneousVector::normalize(&scaled, VectorKind::Inequality).unwrap(), &a);
    }

    #[test]
    fn pair_sign_is_scale_invariant(h in nonzero_vec(3), x in prop::collection::vec(small_rational(), 2), k in 1i64..9) {
        let row = HomogeneousVector::normalize(&h, VectorKind::Inequality).unwrap();
        let p = HomogeneousVector::point(&x).unwrap();
        let direct = &h[0] + &h[1] * &x[0] + &h[2] * &x[1];
        let value = pair(&row, &p).unwrap();
        prop_assert_eq!(value.signum(), direct.signum());
        let scaled: Vec<Rational> = h.iter().map(|c| c * rat(k)).collect();
        let row2 = HomogeneousVector::normalize(&scaled, VectorKind::Inequality).unwrap();
        prop_assert_eq!(pair(&row2, &p).unwrap().signum(), value.signum());
    }

    #[test]
    fn redundancy_removal_ignores_order(
        pts in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 3..12),
        seed in any::<u64>(),
    ) {
        let points: Vec<Vec<Rational>> = pts.iter().map(|p| p.iter().map(|&x| rat(x)).collect()).collect();
        let mut shuffled = points.clone();
        let n = shuffled.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = dualdesc::remove_redundant_points(&points);
        let b = dualdesc::remove_redundant_points(&shuffled);
        prop_assert_eq!(&a.vertices, &b.vertices);
        prop_assert!(a.certificates_hold());
    }

    #[test]
    fn omega_is_r_squared(n in 0i64..=30, d in 1i64..=30) {
        prop_assume!(n <= d);
        let r = DepolarizingStrength::new(ratio(n, d)).unwrap();
        let w = quantum::correlations(&r).unwrap();
        prop_assert!(w.values().iter().all(|x| *x == ratio(n * n, d * d)));
    }

    #[test]
    fn violations_follow_the_threshold(n in 0i64..=20, d in 1i64..=20) {
        prop_assume!(n <= d);
        let r = DepolarizingStrength::new(ratio(n, d)).unwrap();
        let w = quantum::correlations(&r).unwrap();
        for ineq in [
            Inequality::new([[1, 1, 0], [1, 1, 0], [0, 0, 1]], 3),
            Inequality::new([[1; 3]; 3], 5),
            Inequality::new([[-1, 1, 1], [0; 3], [0; 3]], 1),
        ] {
            let (_, violated) = correlation::evaluate(&ineq, &w);
            let expected = quantum::noise_threshold(&ineq).is_some_and(|t| *r.r_squared() > t);
            prop_assert_eq!(violated, expected);
        }
    }

    #[test]
    fn signed_permutations_form_a_group(g in signed_permutation(9), h in signed_permutation(9), x in prop::collection::vec(-5i64..=5, 9)) {
        prop_assert_eq!(g.compose(&h).apply(&x), g.apply(&h.apply(&x)));
        prop_assert!(g.compose(&g.inverse()).is_identity());
        prop_assert_eq!(g.inverse().apply(&g.apply(&x)), x);
    }

    #[test]
    fn inequality_json_roundtrip(alpha in prop::collection::vec(-1i64..=1, 9), beta in 1i64..=5, orbit in prop::option::of(0usize..10)) {
        prop_assume!(alpha.iter().any(|&a| a != 0));
        let mut ineq = Inequality::new([[0; 3]; 3], beta);
        ineq.alpha = alpha.chunks(3).map(<[i64]>::to_vec).collect();
        ineq.orbit = orbit;
        let text = serde_json::to_string(&ineq).unwrap();
        prop_assert_eq!(serde_json::from_str::<Inequality>(&text).unwrap(), ineq.clone());
        prop_assert_eq!(Inequality::from_row(&ineq.to_row(), 3).unwrap().key(), ineq.key());
    }

    #[test]
    fn scenario_json_roundtrip(parities in prop::collection::vec(prop::bool::ANY, 6)) {
        let mut s = Scenario::peres_mermin();
        for (ctx, &p) in s.contexts.iter_mut().zip(&parities) {
            ctx.parity = if p { -1 } else { 1 };
        }
        let text = serde_json::to_string(&s).unwrap();
        prop_assert_eq!(Scenario::from_json(&text).unwrap(), s);
    }

    #[test]
    fn hrep_text_and_json_roundtrip(rows in prop::collection::vec(prop::collection::vec(-7i64..=7, 4), 1..8)) {
        let rows: Vec<Vec<i64>> = rows.into_iter().filter(|r| r.iter().any(|&x| x != 0)).collect();
        prop_assume!(!rows.is_empty());
        let h = HRep::from_i64_rows(3, &rows).unwrap();
        prop_assert_eq!(io::parse_polytope(&io::write_hrep(&h)).unwrap(), Polytope::H(h.clone()));
        let text = serde_json::to_string(&h).unwrap();
        prop_assert_eq!(serde_json::from_str::<HRep>(&text).unwrap(), h);
    }

    #[test]
    fn rational_strengths_roundtrip(n in 0i64..=50, d in 1i64..=50) {
        prop_assume!(n <= d);
        let r = DepolarizingStrength::new(ratio(n, d)).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        prop_assert_eq!(serde_json::from_str::<DepolarizingStrength>(&text).unwrap(), r);
    }
}

#[test]
fn out_of_range_strength_rejected() {
    assert!(DepolarizingStrength::parse("5/4").is_err());
    assert!(DepolarizingStrength::parse("-1/2").is_err());
    assert!(serde_json::from_str::<DepolarizingStrength>("\"x\"").is_err());
}

#[test]
fn malformed_scenarios_rejected() {
    let bad_cell = r#"{"name":"x","rows":3,"cols":3,"contexts":[{"cells":[[1,1],[1,2],[4,1]],"parity":1}]}"#;
    assert!(Scenario::from_json(bad_cell).is_err());
    let s = Scenario {
        name: "x".into(),
        rows: 1,
        cols: 3,
        contexts: vec![Context { cells: [Cell::new(0, 0), Cell::new(0, 0), Cell::new(0, 2)], parity: 1 }],
    };
    assert!(s.validate().is_err());
}
