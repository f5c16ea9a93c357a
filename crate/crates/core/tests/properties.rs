//! Randomized invariants of extraction, closed forms and fitting.

use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use qdyson_core::closedform::{conj_coeff, l_form, m_form, thm_coeff};
use qdyson_core::dyson::{brute_force_expand, dyson_coeff, DysonSpec};
use qdyson_core::fitting::{fit_pattern, solve_affine, solve_affine_rational, SamplePlan};
use qdyson_core::qpoly::{qfactor, QFactorization};
use qdyson_core::{ExponentVector, IndexPattern, LinearForm, PatternKind, QPoly};

fn config(seed: u64) -> ProptestConfig {
    ProptestConfig {
        cases: 128,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn small_a(max_n: usize, max_a: u32) -> impl Strategy<Value = Vec<u32>> {
    (1..=max_n).prop_flat_map(move |n| prop::collection::vec(0..=max_a, n))
}

/// A degree-zero exponent vector of length `n` with entries in `-2..=2`.
fn balanced_b(n: usize) -> impl Strategy<Value = ExponentVector> {
    prop::collection::vec(-2i32..=2, n).prop_map(|mut v| {
        let s: i32 = v.iter().sum();
        *v.last_mut().unwrap() -= s;
        ExponentVector::new(v)
    })
}

fn pattern(n: usize) -> impl Strategy<Value = IndexPattern> {
    let kinds: Vec<PatternKind> = PatternKind::ALL.into_iter().filter(|k| k.min_n() <= n).collect();
    prop::sample::select(kinds).prop_flat_map(move |k| prop::sample::select(IndexPattern::all(k, n)))
}

proptest! {
    #![proptest_config(config(0xD750_0001))]

    #[test]
    fn pruned_extraction_matches_full_expansion(a in small_a(3, 2), q in any::<bool>(), seed in any::<u64>()) {
        let n = a.len();
        let spec = DysonSpec::new(a, if q { qdyson_core::Mode::Q } else { qdyson_core::Mode::Classical });
        let full = brute_force_expand(&spec).unwrap();
        // A support term and an arbitrary nearby target.
        let terms: Vec<_> = full.terms().map(|(e, _)| e.clone()).collect();
        let e = terms[(seed as usize) % terms.len()].clone();
        prop_assert_eq!(dyson_coeff(&spec, &e).unwrap(), full.coeff(&e));
        let mut shifted = e.as_slice().to_vec();
        shifted[0] += 1;
        if n > 1 { shifted[n - 1] -= 1; }
        let shifted = ExponentVector::new(shifted);
        prop_assert_eq!(dyson_coeff(&spec, &shifted).unwrap(), full.coeff(&shifted));
    }

    #[test]
    fn nonzero_degree_coefficients_vanish(a in small_a(4, 2), q in any::<bool>(), k in 0usize..4, d in prop_oneof![-2i32..=-1, 1i32..=2]) {
        let n = a.len();
        let mut b = vec![0i32; n];
        b[k % n] = d;
        let spec = DysonSpec::new(a, if q { qdyson_core::Mode::Q } else { qdyson_core::Mode::Classical });
        prop_assert!(dyson_coeff(&spec, &ExponentVector::new(b)).unwrap().is_zero());
    }

    #[test]
    fn q_to_one_recovers_classical((a, b) in small_a(4, 2).prop_flat_map(|a| { let n = a.len(); (Just(a), balanced_b(n)) })) {
        let q = dyson_coeff(&DysonSpec::q(a.clone()), &b).unwrap();
        let c = dyson_coeff(&DysonSpec::classical(a), &b).unwrap();
        prop_assert_eq!(QPoly::constant(q.eval_at_one()), c);
    }

    #[test]
    fn classical_coefficients_are_permutation_symmetric(
        (a, b, perm) in small_a(4, 2).prop_flat_map(|a| {
            let n = a.len();
            (Just(a), balanced_b(n), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        })
    ) {
        let pa: Vec<u32> = perm.iter().map(|&i| a[i]).collect();
        let pb = ExponentVector::new(perm.iter().map(|&i| b[i]).collect());
        prop_assert_eq!(
            dyson_coeff(&DysonSpec::classical(a), &b).unwrap(),
            dyson_coeff(&DysonSpec::classical(pa), &pb).unwrap()
        );
    }

    #[test]
    fn zero_exponents_give_the_unit((n, b) in (1usize..=5).prop_flat_map(|n| (Just(n), balanced_b(n)))) {
        let c = dyson_coeff(&DysonSpec::q(vec![0; n]), &b).unwrap();
        let want = if b.as_slice().iter().all(|&x| x == 0) { QPoly::one() } else { QPoly::zero() };
        prop_assert_eq!(c, want);
    }

    #[test]
    fn conjectures_specialize_to_theorem(
        (p, a) in (3usize..=5).prop_flat_map(|n| (pattern(n), prop::collection::vec(0u32..=3, n)))
    ) {
        let q = conj_coeff(&p, &a).unwrap();
        prop_assert_eq!(q.eval_at_one(), thm_coeff(&p, &a).unwrap());
    }

    #[test]
    fn qfactor_roundtrip(sign in prop::sample::select(vec![-1i8, 1]), qpower in 0u32..5, mut factors in prop::collection::vec(1u32..6, 0..5)) {
        factors.sort_unstable();
        let p = QFactorization { sign, qpower, factors }.expand();
        let f = qfactor(&p).unwrap().expect("a pure product factors");
        prop_assert_eq!(f.expand(), p);
    }

    #[test]
    fn qfactor_never_misfactors(coeffs in prop::collection::vec(-2i64..=2, 1..7)) {
        let p = QPoly::from_coeffs(&coeffs);
        prop_assume!(!p.is_zero());
        if let Some(f) = qfactor(&p).unwrap() {
            prop_assert_eq!(f.expand(), p);
        }
    }

    #[test]
    fn affine_solve_recovers_integer_forms(
        (l0, ls, pts) in (1usize..=5).prop_flat_map(|n| (
            -5i64..=5,
            prop::collection::vec(-3i64..=3, n),
            prop::collection::vec(prop::collection::vec(1u32..=6, n), n + 1),
        ))
    ) {
        let form = LinearForm::from_ints(l0, &ls);
        let samples: Vec<(Vec<u32>, i64)> = pts.iter().map(|a| (a.clone(), form.eval_int(a).unwrap())).collect();
        match solve_affine(&samples) {
            Ok(fit) => prop_assert_eq!(fit, form),
            Err(e) => {
                prop_assert_eq!(e, qdyson_core::Error::SingularSystem);
                prop_assert!(SamplePlan::from_samples(pts).is_err());
            }
        }
    }

    #[test]
    fn affine_solve_is_exact_over_rationals(
        (vals, n) in (1usize..=4).prop_flat_map(|n| (prop::collection::vec(-20i64..=20, n + 1), Just(n)))
    ) {
        // Unit-bump design: the solution is determined by differences.
        let plan = SamplePlan::unit_bumps(n, 1);
        let samples: Vec<(Vec<u32>, i64)> = plan.samples.iter().cloned().zip(vals.iter().copied()).collect();
        let f = solve_affine_rational(&samples).unwrap();
        for (a, v) in &samples {
            let a: Vec<i64> = a.iter().map(|&x| x as i64).collect();
            prop_assert_eq!(f.eval(&a), num_rational::BigRational::from_integer((*v).into()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..config(0xF17_0001) })]

    #[test]
    fn fits_validate_out_of_sample(
        (p, n, base) in (3usize..=4).prop_flat_map(|n| (pattern(n), Just(n), 1u32..=3))
    ) {
        let plan = SamplePlan::unit_bumps(n, base);
        let fit = fit_pattern(&p, n, Some(&plan)).unwrap();
        prop_assert!(fit.validation.passed, "{:?}", fit.validation);
        prop_assert_eq!(&fit.fitted_l, &l_form(&p, n).unwrap());
        prop_assert_eq!(fit.relative_m(), m_form(&p, n).unwrap());
    }
}
