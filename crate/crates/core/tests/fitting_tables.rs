use qdyson_core::closedform::{l_form, m_form};
use qdyson_core::fitting::{fit_pattern, gen_samples, SamplePlan};
use qdyson_core::{IndexPattern, PatternKind};

#[test]
fn one_one_fits_match_branch_table_n6() {
    for p in IndexPattern::all(PatternKind::OneOne, 6) {
        let fit = fit_pattern(&p, 6, None).unwrap();
        assert_eq!(fit.fitted_l, l_form(&p, 6).unwrap(), "{p}");
        assert_eq!(fit.sign, Some(-1));
        assert!(fit.validation.passed, "{p}: {:?}", fit.validation);
        assert!(!fit.retried);
    }
}

#[test]
fn two_term_fits_match_branch_tables() {
    for (kind, nmax) in [(PatternKind::TwoOneOne, 5), (PatternKind::OneOneOneOne, 5)] {
        for n in kind.min_n()..=nmax {
            for p in IndexPattern::all(kind, n) {
                let fit = fit_pattern(&p, n, None).unwrap();
                assert_eq!(fit.fitted_l, l_form(&p, n).unwrap(), "{p} n={n}");
                assert_eq!(fit.relative_m(), m_form(&p, n).unwrap(), "{p} n={n}");
                assert!(fit.validation.passed, "{p} n={n}: {:?}", fit.validation);
            }
        }
    }
}

#[test]
fn alternative_plan_gives_same_forms() {
    let p = IndexPattern::two_one_one(3, 1, 2).unwrap();
    let alt = SamplePlan::from_samples(vec![
        vec![1, 2, 1, 2],
        vec![3, 2, 1, 2],
        vec![1, 3, 1, 2],
        vec![1, 2, 2, 2],
        vec![1, 2, 1, 4],
    ])
    .unwrap();
    let a = fit_pattern(&p, 4, Some(&alt)).unwrap();
    let b = fit_pattern(&p, 4, Some(&gen_samples(4))).unwrap();
    assert_eq!(a.fitted_l, b.fitted_l);
    assert_eq!(a.fitted_m, b.fitted_m);
}

#[test]
fn fits_are_deterministic() {
    let p = IndexPattern::four_index(2, 4, 1, 3).unwrap();
    assert_eq!(fit_pattern(&p, 4, None).unwrap(), fit_pattern(&p, 4, None).unwrap());
}

#[test]
fn one_plus_sigma_branches_always_collide() {
    for p in IndexPattern::all(PatternKind::OneOneOneOne, 5) {
        let fit = fit_pattern(&p, 5, None).unwrap();
        let always = fit.samples.iter().all(|s| s.collided);
        assert_eq!(always, p.m_label().as_deref() == Some("1+sigma"), "{p} {}", p.order_label());
    }
}
