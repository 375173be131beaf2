use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ncstoch_core::evaluator::{EvalContext, YBindings};
use ncstoch_core::matrix_alg::{divided_diff_exact, max_abs, Matrix};
use ncstoch_core::process_sim::{read_ncp1, simulate_hbm, write_ncp1, RngStream, TimeGrid};
use ncstoch_core::selftest::oracles::{random_hermitian, random_matrix, random_polynomial};
use ncstoch_core::trace_poly::{derive, derive_k, gamma_contract, parse, ContractionModel, ScalarCoeff};

fn close(a: &Matrix, b: &Matrix) -> bool {
    max_abs(&(a - b)) <= 1e-9 * (1.0 + max_abs(b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn canonical_form_is_sound(seed in any::<u64>()) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polynomial(3, 3, &mut g);
        let q = random_polynomial(3, 3, &mut g);
        let mats: Vec<Matrix> = (0..3).map(|_| random_matrix(4, &mut g)).collect();
        let s = EvalContext::from_slice(&mats);
        let s = s.session().unwrap();
        let (ep, eq) = (s.eval(&p).unwrap(), s.eval(&q).unwrap());
        prop_assert!(close(&s.eval(&(&p * &q)).unwrap(), &(&ep * &eq)));
        prop_assert!(close(&s.eval(&(&p - &q)).unwrap(), &(&ep - &eq)));
        prop_assert!(close(&s.eval(&p.star()).unwrap(), &ep.adjoint()));
    }

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polynomial(3, 4, &mut g);
        let printed = p.to_string();
        let q = parse(&printed).unwrap();
        prop_assert_eq!(&q, &p);
        prop_assert_eq!(q.to_string(), printed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivative_matches_central_difference(seed in any::<u64>()) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polynomial(2, 4, &mut g);
        let a: Vec<Matrix> = (0..2).map(|_| random_hermitian(6, &mut g)).collect();
        let b = random_hermitian(6, &mut g);
        let exact = EvalContext::from_slice(&a).session().unwrap()
            .eval_multilinear(&derive(&p, 1).unwrap(), &YBindings::slots(&[&b])).unwrap();
        let eps = 1e-4;
        let at = |s: f64| {
            let mut a2 = a.clone();
            a2[0] += &b * Complex64::new(s, 0.0);
            EvalContext::from_slice(&a2).session().unwrap().eval(&p).unwrap()
        };
        let fd = (at(eps) - at(-eps)) * Complex64::new(0.5 / eps, 0.0);
        prop_assert!(max_abs(&(fd - &exact)) <= 1e-6 * (1.0 + max_abs(&exact)));
    }

    #[test]
    fn second_derivative_is_symmetric(seed in any::<u64>()) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polynomial(1, 5, &mut g);
        let d2 = derive_k(&p, 2).unwrap();
        prop_assert_eq!(d2.swap_slots(1, 2), d2);
    }

    #[test]
    fn matrix_contraction_is_free_plus_inverse_square_terms(seed in any::<u64>()) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polynomial(1, 4, &mut g);
        // Hermitian drivers: dM* = dM
        let d2 = derive_k(&p, 2).unwrap().unstar_slots();
        let free = gamma_contract(&d2, ContractionModel::Free).unwrap();
        let scaled = |n: u32| {
            let m = gamma_contract(&d2, ContractionModel::Matrix { n }).unwrap();
            (&m - &free).scale(&ScalarCoeff::from_int(i64::from(n * n)))
        };
        prop_assert_eq!(scaled(3), scaled(7));
    }

    #[test]
    fn divided_differences_are_symmetric(
        coeffs in prop::collection::vec(-9i64..=9, 1..9),
        nodes in prop::collection::vec(-20i64..=20, 1..5),
        rot in 0usize..5,
    ) {
        let c: Vec<BigRational> = coeffs.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect();
        let x: Vec<BigRational> = nodes.iter().map(|&v| BigRational::new(BigInt::from(v), BigInt::from(3))).collect();
        let mut y = x.clone();
        y.reverse();
        let r = rot % y.len();
        y.rotate_left(r);
        prop_assert_eq!(divided_diff_exact(&c, &x), divided_diff_exact(&c, &y));
    }

    #[test]
    fn ncp1_round_trip_is_bit_exact(seed in any::<u64>(), n in 1usize..5, steps in 1usize..20) {
        let grid = Arc::new(TimeGrid::uniform(1.0, 1.0 / steps as f64).unwrap());
        let x = simulate_hbm(n, grid, &RngStream::new(seed, 0));
        let mut buf = Vec::new();
        write_ncp1(&x, &mut buf).unwrap();
        let y = read_ncp1(buf.as_slice()).unwrap();
        prop_assert_eq!(y.times(), x.times());
        prop_assert_eq!(y.values, x.values);
        prop_assert_eq!(y.role, x.role);
    }

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), path in any::<u64>()) {
        let grid = Arc::new(TimeGrid::uniform(1.0, 0.1).unwrap());
        let a = simulate_hbm(3, grid.clone(), &RngStream::new(seed, path));
        let b = simulate_hbm(3, grid, &RngStream::new(seed, path));
        prop_assert_eq!(a.values, b.values);
    }
}
