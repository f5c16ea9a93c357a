//! Acceptance criteria, one PASS/FAIL line each.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qdyson_core::closedform::{conj_coeff, l_form, m_form};
use qdyson_core::dyson::{brute_force_expand, dyson_coeff};
use qdyson_core::fitting::{fit_pattern, solve_affine, SamplePlan};
use qdyson_core::qpoly::{qfactor, QFactorization};
use qdyson_core::verify::run_verify;
use qdyson_core::{
    DysonSpec, ExponentVector, GridSpec, IndexPattern, Limits, LinearForm, Mode, PatternKind, QPoly, VerifyReport,
    VerifyTarget,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SEED: u64 = 20_260_101;
const N5_SAMPLE: usize = 400;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn clean(r: &VerifyReport) -> Result<(), String> {
    check(r.ok(), || format!("{} mismatches, first: {:?}", r.mismatches.len(), r.mismatches.first()))?;
    check(!r.incomplete, || format!("{} cases skipped", r.skipped))
}

fn verify(target: VerifyTarget, grid: &GridSpec) -> Result<VerifyReport, String> {
    let r = run_verify(target, grid, &Limits::default()).map_err(|e| e.to_string())?;
    clean(&r)?;
    Ok(r)
}

fn dyson_constant_terms() -> Outcome {
    let r = verify(VerifyTarget::Dyson, &GridSpec::new((0, 4), (0, 3)))?;
    check(r.cases == 1 + 4 + 16 + 64 + 256, || format!("expected 341 cases, ran {}", r.cases))?;
    Ok(format!("{} constant terms equal sigma!/prod(a_i!)", r.cases))
}

fn q_dyson_constant_terms() -> Outcome {
    let r = verify(VerifyTarget::Qdyson, &GridSpec::new((0, 3), (0, 3)))?;
    check(r.cases == 1 + 4 + 16 + 64, || format!("expected 85 cases, ran {}", r.cases))?;
    Ok(format!("{} q-constant terms equal the q-multinomial", r.cases))
}

/// Full grid for n <= 4 and a seeded per-pattern subsample at n = 5.
fn pattern_grids(target: VerifyTarget) -> Result<Vec<VerifyReport>, String> {
    let full = verify(target, &GridSpec::new((2, 4), (0, 3)))?;
    let mut g5 = GridSpec::new((5, 5), (0, 3));
    g5.sample = Some(N5_SAMPLE);
    g5.seed = SEED;
    let n5 = verify(target, &g5)?;
    let want = N5_SAMPLE * PatternKind::ALL.len();
    check(n5.cases == want, || format!("n = 5 ran {} cases, expected {want}", n5.cases))?;
    Ok(vec![full, n5])
}

fn theorem_suite() -> Outcome {
    let reports = pattern_grids(VerifyTarget::Thm)?;
    let total: usize = reports.iter().map(|r| r.cases).sum();
    Ok(format!("{total} classical coefficients match (n = 5: {N5_SAMPLE} per pattern)"))
}

fn conjecture_suite() -> Outcome {
    let reports = pattern_grids(VerifyTarget::Conj)?;
    let total: usize = reports.iter().map(|r| r.cases).sum();
    let full = &reports[0];
    check(full.uncovered_branches().is_empty(), || format!("uncovered: {:?}", full.uncovered_branches()))?;
    let (l, m) = (full.l_coverage.len(), full.m_coverage.len());
    check(l == 2 + 3 + 6 && m == 3 + 3, || format!("coverage tables have {l} L and {m} M branches"))?;
    let least = full.l_coverage.values().chain(full.m_coverage.values()).min().copied().unwrap_or(0);
    Ok(format!("{total} q-coefficients match; all {l} L and {m} M branches hit (min {least} cases each)"))
}

fn golden_table() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_qdyson"))
        .args(["--no-store", "fit", "1m1", "--n", "6", "--all-pairs"])
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let norm = |s: &str| -> Vec<String> {
        s.lines().map(|l| l.split_whitespace().collect::<Vec<_>>().join(" ")).filter(|l| !l.is_empty()).collect()
    };
    let got = norm(&String::from_utf8_lossy(&out.stdout));
    let want = norm(include_str!("golden/fit_1m1_n6.txt"));
    check(want.len() == 30, || format!("golden file has {} rows", want.len()))?;
    for (k, (g, w)) in got.iter().zip(&want).enumerate() {
        check(g == w, || format!("row {}: got `{g}`, want `{w}`", k + 1))?;
    }
    check(got.len() == want.len(), || format!("{} rows, want {}", got.len(), want.len()))?;
    Ok("30 rows identical to the golden table".into())
}

fn stembridge_overlap() -> Outcome {
    let mut cases = 0;
    let mut overlap = 0;
    for rho in [0, 1] {
        let mut g = GridSpec::new((2, 3), (1, 2));
        g.rho = Some(rho);
        g.tau = Some(1);
        let r = verify(VerifyTarget::Stembridge, &g)?;
        cases += r.cases;
        overlap += r.overlap_checked;
    }
    check(overlap > 0, || "no overlapping instances".into())?;
    // All rho and tau up to n = 4: tau = 2 overlaps the two-term closed forms.
    let wide = verify(VerifyTarget::Stembridge, &GridSpec::new((2, 4), (1, 2)))?;
    check(wide.overlap_checked > overlap, || "no two-term overlaps".into())?;
    Ok(format!(
        "{cases} instances match extraction and the x_r/x_s closed form; \
         n <= 4, all rho/tau: {} instances, {} overlapping",
        wide.cases, wide.overlap_checked
    ))
}

// ---- property suites ----

const CASES: usize = 128;

fn rand_a(rng: &mut ChaCha8Rng, n: usize, max: u32) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(0..=max)).collect()
}

fn balanced_b(rng: &mut ChaCha8Rng, n: usize) -> ExponentVector {
    let mut v: Vec<i32> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
    let s: i32 = v.iter().sum();
    v[n - 1] -= s;
    ExponentVector::new(v)
}

fn mode(rng: &mut ChaCha8Rng) -> Mode {
    if rng.gen() {
        Mode::Q
    } else {
        Mode::Classical
    }
}

fn oracle_equivalence(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.gen_range(1..=3);
    let spec = DysonSpec::new(rand_a(rng, n, 2), mode(rng));
    let full = brute_force_expand(&spec).map_err(|e| e.to_string())?;
    let support: Vec<ExponentVector> = full.terms().map(|(e, _)| e.clone()).collect();
    let targets = [support.choose(rng).unwrap().clone(), balanced_b(rng, n)];
    for b in targets {
        let got = dyson_coeff(&spec, &b).map_err(|e| e.to_string())?;
        check(got == full.coeff(&b), || format!("{spec:?} at {b}"))?;
    }
    Ok(())
}

fn homogeneity_zero(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.gen_range(1..=4);
    let spec = DysonSpec::new(rand_a(rng, n, 2), mode(rng));
    let mut b = balanced_b(rng, n).as_slice().to_vec();
    b[rng.gen_range(0..n)] += *[-2, -1, 1, 2].choose(rng).unwrap();
    let b = ExponentVector::new(b);
    let c = dyson_coeff(&spec, &b).map_err(|e| e.to_string())?;
    check(c.is_zero(), || format!("{spec:?} at {b} gave {c}"))
}

fn q_to_one(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.gen_range(2..=4);
    let a = rand_a(rng, n, 2);
    let b = balanced_b(rng, n);
    let q = dyson_coeff(&DysonSpec::q(a.clone()), &b).map_err(|e| e.to_string())?;
    let c = dyson_coeff(&DysonSpec::classical(a.clone()), &b).map_err(|e| e.to_string())?;
    check(QPoly::constant(q.eval_at_one()) == c, || format!("a = {a:?}, b = {b}"))?;
    let kinds: Vec<PatternKind> = PatternKind::ALL.into_iter().filter(|k| k.min_n() <= n).collect();
    let p = IndexPattern::all(*kinds.choose(rng).unwrap(), n).choose(rng).unwrap().clone();
    let conj = conj_coeff(&p, &a).map_err(|e| e.to_string())?;
    let thm = qdyson_core::closedform::thm_coeff(&p, &a).map_err(|e| e.to_string())?;
    check(conj.eval_at_one() == thm, || format!("{p} at a = {a:?}"))
}

fn qfactor_roundtrip(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut factors: Vec<u32> = (0..rng.gen_range(0..5)).map(|_| rng.gen_range(1..7)).collect();
    factors.sort_unstable();
    let p = QFactorization { sign: *[-1, 1].choose(rng).unwrap(), qpower: rng.gen_range(0..5), factors }.expand();
    let f = qfactor(&p).map_err(|e| e.to_string())?.ok_or_else(|| format!("{p} did not factor"))?;
    check(f.expand() == p, || format!("{p} refactored as {f}"))?;
    let noise = QPoly::from_coeffs(&(0..rng.gen_range(1..7)).map(|_| rng.gen_range(-2i64..=2)).collect::<Vec<_>>());
    if !noise.is_zero() {
        if let Some(f) = qfactor(&noise).map_err(|e| e.to_string())? {
            check(f.expand() == noise, || format!("{noise} misfactored as {f}"))?;
        }
    }
    Ok(())
}

fn affine_exactness(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.gen_range(1..=6);
    let lambdas: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
    let form = LinearForm::from_ints(rng.gen_range(-5..=5), &lambdas);
    loop {
        let pts: Vec<Vec<u32>> = (0..=n).map(|_| (0..n).map(|_| rng.gen_range(1..=6)).collect()).collect();
        if SamplePlan::from_samples(pts.clone()).is_err() {
            continue;
        }
        let samples: Vec<(Vec<u32>, i64)> = pts.iter().map(|a| (a.clone(), form.eval_int(a).unwrap())).collect();
        let fit = solve_affine(&samples).map_err(|e| e.to_string())?;
        return check(fit == form, || format!("recovered {fit}, planted {form}"));
    }
}

fn fit_validation(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.gen_range(3..=4);
    let kinds: Vec<PatternKind> = PatternKind::ALL.into_iter().filter(|k| k.min_n() <= n).collect();
    let p = IndexPattern::all(*kinds.choose(rng).unwrap(), n).choose(rng).unwrap().clone();
    let plan = SamplePlan::unit_bumps(n, rng.gen_range(1..=3));
    let fit = fit_pattern(&p, n, Some(&plan)).map_err(|e| format!("{p}: {e}"))?;
    check(fit.validation.passed, || format!("{p}: {:?}", fit.validation))?;
    check(fit.fitted_l == l_form(&p, n).unwrap(), || format!("{p}: L = {}", fit.fitted_l))?;
    check(fit.relative_m() == m_form(&p, n).unwrap(), || format!("{p}: M = {:?}", fit.relative_m()))
}

fn property_suites() -> Outcome {
    type Prop = fn(&mut ChaCha8Rng) -> Result<(), String>;
    let suites: [(&str, Prop); 6] = [
        ("oracle equivalence", oracle_equivalence),
        ("homogeneity zero", homogeneity_zero),
        ("q->1 specialization", q_to_one),
        ("qfactor roundtrip", qfactor_roundtrip),
        ("affine-solve exactness", affine_exactness),
        ("out-of-sample fit validation", fit_validation),
    ];
    for (k, (name, prop)) in suites.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + k as u64);
        for case in 0..CASES {
            prop(&mut rng).map_err(|e| format!("{name}, case {case}: {e}"))?;
        }
    }
    Ok(format!("6 suites x {CASES} seeded cases, no failures"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("Dyson constant terms, n <= 4, a in 0..3", dyson_constant_terms),
        ("q-Dyson constant terms, n <= 3, a in 0..3", q_dyson_constant_terms),
        ("theorem vs classical extraction", theorem_suite),
        ("conjectures vs q extraction, branch coverage", conjecture_suite),
        ("fit 1m1 --n 6 --all-pairs golden table", golden_table),
        ("Stembridge overlap", stembridge_overlap),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail} [{secs:.1}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
