//! Randomized invariants over seeds and small algebras.

use proptest::prelude::*;
use unitindex::algebra::{tensor_algebra, AlgebraDescriptor, AlgebraElement, SuperOperator};
use unitindex::examples::random_ce_system;
use unitindex::index::{inner, recenter};
use unitindex::kernels::semigroup_eval;
use unitindex::random::{self, seeded_rng};
use unitindex::schema::{parse_expr, SystemFile};
use unitindex::units::{eval_kernel, random_expr, units_equal, UnitExpr};

fn algebra() -> impl Strategy<Value = AlgebraDescriptor> {
    prop::collection::vec(1usize..=3, 1..=2).prop_map(|b| AlgebraDescriptor::new(b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cstar_identity(alg in algebra(), seed in any::<u64>()) {
        let a = random::gaussian_element(&mut seeded_rng(seed), &alg);
        let n = a.cstar_norm();
        prop_assert!(((&a.adjoint() * &a).cstar_norm() - n * n).abs() <= 1e-9 * (1.0 + n * n));
        prop_assert_eq!(a.adjoint().adjoint(), a.clone());
        let one = AlgebraElement::unit(&alg);
        prop_assert_eq!(&one * &a, a.clone());
    }

    #[test]
    fn left_and_right_multiplications_commute(alg in algebra(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let a = random::gaussian_element(&mut rng, &alg);
        let c = random::gaussian_element(&mut rng, &alg);
        let (la, rc) = (SuperOperator::left_mul(&a), SuperOperator::right_mul(&c));
        prop_assert!(la.compose(&rc).distance(&rc.compose(&la)) <= 1e-12);
    }

    #[test]
    fn kernel_semigroup_law(seed in any::<u64>(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let sys = random_ce_system(&AlgebraDescriptor::matrix(2), 2, 3, seed).unwrap();
        let mut rng = seeded_rng(seed ^ 1);
        let b = random::gaussian_element(&mut rng, sys.algebra());
        let (x, y) = (&sys.labels()[1], &sys.labels()[2]);
        let both = semigroup_eval(&sys, x, y, s + t, &b).unwrap();
        let step = semigroup_eval(&sys, x, y, s, &semigroup_eval(&sys, x, y, t, &b).unwrap()).unwrap();
        prop_assert!(both.distance(&step) <= 1e-9 * (1.0 + b.cstar_norm()));
        prop_assert_eq!(semigroup_eval(&sys, x, y, 0.0, &b).unwrap(), b);
    }

    #[test]
    fn evaluated_kernels_are_hermitian(alg in algebra(), seed in any::<u64>()) {
        let sys = random_ce_system(&alg, 2, 3, seed).unwrap();
        let mut rng = seeded_rng(seed);
        let x = random_expr(&sys, &mut rng, 2);
        let y = random_expr(&sys, &mut rng, 2);
        let lxy = eval_kernel(&sys, &x, &y).unwrap();
        let lyx = eval_kernel(&sys, &y, &x).unwrap();
        prop_assert!(lyx.distance(&lxy.star_conjugate()) <= 1e-10 * (1.0 + lxy.norm()));
    }

    #[test]
    fn gram_entries_are_hermitian_and_positive(alg in algebra(), seed in any::<u64>()) {
        let sys = random_ce_system(&alg, 2, 3, seed).unwrap();
        let mut rng = seeded_rng(seed);
        let x = random_expr(&sys, &mut rng, 2);
        let y = random_expr(&sys, &mut rng, 2);
        let one = AlgebraElement::unit(&alg);
        let xy = inner(&sys, &x, &y, &one).unwrap();
        let yx = inner(&sys, &y, &x, &one).unwrap();
        prop_assert!(xy.distance(&yx.adjoint()) <= 1e-10 * (1.0 + xy.cstar_norm()));
        let xx = inner(&sys, &x, &x, &one).unwrap();
        prop_assert!(xx.is_positive(1e-9 * (1.0 + xx.cstar_norm())));
    }

    #[test]
    fn null_vectors_are_orthogonal(seed in any::<u64>()) {
        let sys = random_ce_system(&AlgebraDescriptor::matrix(2), 2, 3, seed).unwrap();
        let mut rng = seeded_rng(seed);
        let y = random_expr(&sys, &mut rng, 2);
        let g = random::gaussian_element(&mut rng, sys.algebra());
        let null = UnitExpr::Base(sys.reference().clone()).shift(g);
        let one = AlgebraElement::unit(sys.algebra());
        let yy = inner(&sys, &y, &y, &one).unwrap().cstar_norm();
        let tol = inner(&sys, &null, &null, &one).unwrap().cstar_norm();
        prop_assert!(inner(&sys, &null, &y, &one).unwrap().cstar_norm() <= tol.sqrt() * yy.sqrt() + 1e-9);
    }

    #[test]
    fn recentered_units_are_orthogonal_to_reference_kernel(seed in any::<u64>()) {
        let sys = random_ce_system(&AlgebraDescriptor::new(vec![2, 1]).unwrap(), 2, 3, seed).unwrap();
        let mut rng = seeded_rng(seed);
        let x = random_expr(&sys, &mut rng, 2);
        let z = recenter(&sys, &x).unwrap();
        let w = UnitExpr::Base(sys.reference().clone());
        let l = eval_kernel(&sys, &w, &z).unwrap();
        for b in sys.algebra().basis() {
            prop_assert!(l.apply(&b).cstar_norm() <= 1e-9);
        }
        // recentering changes the unit only by a shift, so the index class is the same
        let d = unitindex::units::sub(&sys, &x, &z);
        let one = AlgebraElement::unit(sys.algebra());
        prop_assert!(inner(&sys, &d, &d, &one).unwrap().cstar_norm() <= 1e-9);
    }

    #[test]
    fn expression_literals_round_trip(alg in algebra(), seed in any::<u64>()) {
        let sys = random_ce_system(&alg, 1, 3, seed).unwrap();
        let e = random_expr(&sys, &mut seeded_rng(seed), 3);
        let back = parse_expr(&sys, &e.to_string()).unwrap();
        prop_assert!(units_equal(&sys, &back, &e, 0.0).unwrap());
        prop_assert_eq!(back, e);
    }

    #[test]
    fn system_files_round_trip_bit_exactly(alg in algebra(), seed in any::<u64>()) {
        let sys = random_ce_system(&alg, 2, 3, seed).unwrap();
        let text = SystemFile::from_system(&sys).to_json();
        let back = SystemFile::from_json(&text).unwrap().to_system().unwrap();
        for i in 0..sys.len() {
            for j in 0..sys.len() {
                prop_assert_eq!(back.kernel_at(i, j), sys.kernel_at(i, j));
            }
        }
    }

    #[test]
    fn tensor_of_elements_factorizes(a in algebra(), b in algebra(), seed in any::<u64>()) {
        let lay = tensor_algebra(&a, &b);
        let mut rng = seeded_rng(seed);
        let x = random::gaussian_element(&mut rng, &a);
        let y = random::gaussian_element(&mut rng, &b);
        let prod = &lay.left_element(&x).unwrap() * &lay.right_element(&y).unwrap();
        prop_assert!(prod.distance(&lay.element(&x, &y).unwrap()) <= 1e-12 * (1.0 + x.cstar_norm() * y.cstar_norm()));
    }
}
