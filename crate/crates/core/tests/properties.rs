use bdf_core::batch;
use bdf_core::dynamics::equivalent_frame_vector;
use bdf_core::frame::{frame_bounds, iterate};
use bdf_core::hardy::{
    inner_product, poly_to_seq, seq_to_poly, Axis, BidiscPoly, DegreePair, TruncatedSpace,
};
use bdf_core::inner::InnerSpec;
use bdf_core::linalg::{identity, CVector, C64};
use bdf_core::model::{random_similarity, transport, triple_from_quotient};
use bdf_core::runner::Experiment;
use bdf_core::submodule::{beurling_from_spec, quotient};
use proptest::prelude::*;
use std::f64::consts::TAU;

fn coeff() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| C64::new(re, im))
}

fn poly(max: usize) -> impl Strategy<Value = BidiscPoly> {
    prop::collection::vec(((0..=max, 0..=max), coeff()), 0..12).prop_map(|terms| {
        BidiscPoly::from_terms(terms.into_iter().map(|((i, j), c)| (DegreePair::new(i, j), c)))
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shifts_are_isometric(f in poly(5)) {
        prop_assert!(close(f.shift_z().norm(), f.norm()));
        prop_assert!(close(f.shift(Axis::W).norm(), f.norm()));
    }

    #[test]
    fn sequence_identification_is_unitary(f in poly(5), g in poly(5)) {
        let back = seq_to_poly(&poly_to_seq(&f));
        prop_assert_eq!(&back, &f);
        let s: f64 = poly_to_seq(&f).values().map(|c| c.norm_sqr()).sum();
        prop_assert!(close(s.sqrt(), f.norm()));
        let ip = inner_product(&f, &g);
        let direct: C64 = poly_to_seq(&f)
            .iter()
            .map(|(d, a)| a * poly_to_seq(&g).get(d).copied().unwrap_or_default().conj())
            .sum();
        prop_assert!((ip - direct).norm() <= 1e-12 * (1.0 + f.norm() * g.norm()));
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(f in poly(4), g in poly(4)) {
        prop_assert!((inner_product(&f, &g) - inner_product(&g, &f).conj()).norm() <= 1e-12 * (1.0 + f.norm() * g.norm()));
        prop_assert!(inner_product(&f, &f).im.abs() <= 1e-12 && inner_product(&f, &f).re >= 0.0);
    }

    #[test]
    fn monomials_are_orthonormal(i in 0usize..8, j in 0usize..8, k in 0usize..8, l in 0usize..8) {
        let ip = inner_product(&BidiscPoly::monomial(i, j), &BidiscPoly::monomial(k, l));
        let want = if (i, j) == (k, l) { 1.0 } else { 0.0 };
        prop_assert_eq!(ip, C64::new(want, 0.0));
    }

    #[test]
    fn shift_matrix_adjointness(n1 in 0usize..5, n2 in 0usize..5, seed in any::<u64>()) {
        let space = TruncatedSpace::new(DegreePair::new(n1, n2));
        let mut rng = Experiment::rng(seed, 0);
        let f = bdf_core::runner::checks::random_unit_vector(&mut rng, space.dim());
        let g = bdf_core::runner::checks::random_unit_vector(&mut rng, space.dim());
        for axis in [Axis::Z, Axis::W] {
            let lhs = (space.shift_matrix(axis) * &f).dotc(&g);
            let rhs = f.dotc(&(space.adjoint_shift(axis) * &g));
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn batch_map_matches_sequential(xs in prop::collection::vec(any::<i32>(), 0..200)) {
        let f = |x: &i32| x.wrapping_mul(31).wrapping_add(7);
        prop_assert_eq!(batch::map(&xs, f), batch::map_seq(&xs, f));
    }

    #[test]
    fn blaschke_is_unimodular_on_torus(r in 0.05f64..0.95, t in 0.0..TAU, s in 0.0..TAU, u in 0.0..TAU) {
        let spec = InnerSpec::product(vec![
            InnerSpec::blaschke_z(&[C64::from_polar(r, t)]),
            InnerSpec::monomial(1, 0),
        ]);
        let v = spec.eval_exact(C64::from_polar(1.0, s), C64::from_polar(1.0, u));
        prop_assert!((v.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn poly_json_round_trip(f in poly(4)) {
        let back: BidiscPoly = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transport_bounds_are_bracketed(seed in any::<u64>(), cap in 1.5f64..1e3, a in 0usize..3, b in 0usize..3) {
        prop_assume!((a, b) != (0, 0));
        let order = DegreePair::new(4, 4);
        let q = quotient(&beurling_from_spec(&InnerSpec::monomial(a, b), TruncatedSpace::new(order)).unwrap());
        let t = triple_from_quotient(&q).unwrap();
        let base = frame_bounds(&iterate(&t, order).unwrap());
        let l = random_similarity(&mut Experiment::rng(seed, 0), t.dim(), cap).unwrap();
        let (moved, w) = transport(&t, &l).unwrap();
        let r = frame_bounds(&iterate(&moved, order).unwrap());
        let (lo, hi) = (w.sigma_min.powi(2) * base.lower, w.sigma_max.powi(2) * base.upper);
        prop_assert!(w.condition() <= cap * (1.0 + 1e-12));
        prop_assert!(r.lower >= lo - 1e-9 * hi && r.upper <= hi + 1e-9 * hi);
        prop_assert!(r.is_frame());
    }

    #[test]
    fn equivalence_is_symmetric(c1 in coeff(), c2 in coeff(), c3 in coeff()) {
        let order = DegreePair::new(4, 4);
        let q = quotient(&beurling_from_spec(&InnerSpec::monomial(1, 1), TruncatedSpace::new(order)).unwrap());
        let sys = iterate(&triple_from_quotient(&q).unwrap(), order).unwrap();
        let t = &sys.triple;
        // I plus a nilpotent polynomial in T1, T2 is always invertible
        let q4 = C64::new(0.25, 0.0);
        let v = identity(t.dim()) + &t.t1 * (c1 * q4) + &t.t2 * (c2 * q4) + &t.t1 * &t.t2 * (c3 * q4);
        let (moved, there) = equivalent_frame_vector(&sys, &v).unwrap();
        let back = v.try_inverse().unwrap();
        let (again, home) = equivalent_frame_vector(&moved, &back).unwrap();
        prop_assert!(there.kernel_distance <= 1e-10);
        prop_assert!((home.report.lower - there.original.lower).abs() <= 1e-9);
        prop_assert!((home.report.upper - there.original.upper).abs() <= 1e-9);
        prop_assert_eq!(home.report.classification, there.original.classification);
        let seed_back: CVector = again.triple.phi.clone();
        prop_assert!((seed_back - &t.phi).norm() <= 1e-9);
    }
}
