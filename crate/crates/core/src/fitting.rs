//! Recovering the q-power exponents of a coefficient pattern from data.
//!
//! For each sample parameter vector the coefficient is extracted from the
//! q-Dyson product, the presumed bracket skeleton is divided out, and the
//! residue is matched against the ansatz: a single `±q^L`, or the two-term
//! form `q^L (1 - q^P1) + q^M (1 - q^P2)`. Exponents observed on `n + 1`
//! affinely independent samples determine an affine form `λ0 + Σ λi ai`
//! through an exact rational solve, which is then checked on fresh samples.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::{IndexPattern, PatternKind};
use crate::dyson::{dyson_coeff_with, DysonSpec, Limits};
use crate::error::{Error, Result};
use crate::laurent::ExponentVector;
use crate::linform::LinearForm;
use crate::qpoly::{q_int, q_multinomial, QPoly};

// ---- sample plans ----

/// `n + 1` affinely independent parameter vectors, all entries at least 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub base: Vec<u32>,
    pub samples: Vec<Vec<u32>>,
}

/// Default plan: `base = (2, ..., 2)` followed by `base + e_j` for each `j`.
pub fn gen_samples(n: usize) -> SamplePlan {
    SamplePlan::unit_bumps(n, 2)
}

impl SamplePlan {
    pub fn unit_bumps(n: usize, base_value: u32) -> SamplePlan {
        let base = vec![base_value; n];
        let mut samples = vec![base.clone()];
        for j in 0..n {
            let mut v = base.clone();
            v[j] += 1;
            samples.push(v);
        }
        SamplePlan { base, samples }
    }

    /// A user-supplied plan; the first sample serves as the base.
    pub fn from_samples(samples: Vec<Vec<u32>>) -> Result<SamplePlan> {
        let base = samples.first().cloned().ok_or_else(|| Error::invalid("empty sample plan"))?;
        let plan = SamplePlan { base, samples };
        plan.validate()?;
        Ok(plan)
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::invalid("sample plan needs n >= 1"));
        }
        if self.samples.len() != n + 1 {
            return Err(Error::invalid(format!("need {} samples for n = {n}, got {}", n + 1, self.samples.len())));
        }
        if self.samples.iter().any(|s| s.len() != n) {
            return Err(Error::invalid("samples have inconsistent lengths"));
        }
        if self.samples.iter().flatten().any(|&x| x < 1) {
            return Err(Error::invalid("every sampled parameter must be at least 1"));
        }
        let rows: Vec<Vec<BigRational>> = self.samples.iter().map(|s| design_row(s)).collect();
        if rank(rows) != n + 1 {
            return Err(Error::invalid("samples are not affinely independent"));
        }
        Ok(())
    }

    /// Three out-of-sample vectors: `base + 2 e_j` for the first distinct
    /// `j`, padded with `base + 2·(1..1)` and `base + k e_1` when `n < 3`.
    pub fn validation_vectors(&self) -> Vec<Vec<u32>> {
        let n = self.n();
        let mut candidates = Vec::new();
        for j in 0..n.min(3) {
            let mut v = self.base.clone();
            v[j] += 2;
            candidates.push(v);
        }
        candidates.push(self.base.iter().map(|x| x + 2).collect());
        for k in 3..6 {
            let mut v = self.base.clone();
            v[0] += k;
            candidates.push(v);
        }
        let mut out: Vec<Vec<u32>> = Vec::new();
        for c in candidates {
            if out.len() < 3 && !out.contains(&c) && !self.samples.contains(&c) {
                out.push(c);
            }
        }
        out
    }
}

// ---- exact affine solve ----

fn design_row(a: &[u32]) -> Vec<BigRational> {
    std::iter::once(BigRational::one()).chain(a.iter().map(|&x| BigRational::from_integer(BigInt::from(x)))).collect()
}

/// Row-reduces in place; returns the pivot columns.
fn row_reduce(m: &mut [Vec<BigRational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                let pivot_row = m[row].clone();
                for (x, y) in m[r].iter_mut().zip(pivot_row.iter()) {
                    *x -= &factor * y;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

fn rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    row_reduce(&mut rows, cols).len()
}

/// The unique affine form through `n + 1` points, by exact Gauss–Jordan
/// elimination over the rationals. No integrality requirement.
pub fn solve_affine_rational(samples: &[(Vec<u32>, i64)]) -> Result<LinearForm> {
    let n = samples.first().map(|s| s.0.len()).ok_or_else(|| Error::invalid("no samples"))?;
    if samples.len() != n + 1 || samples.iter().any(|s| s.0.len() != n) {
        return Err(Error::invalid(format!("need exactly {} samples of length {n}", n + 1)));
    }
    let mut m: Vec<Vec<BigRational>> = samples
        .iter()
        .map(|(a, v)| {
            let mut row = design_row(a);
            row.push(BigRational::from_integer(BigInt::from(*v)));
            row
        })
        .collect();
    let pivots = row_reduce(&mut m, n + 1);
    if pivots.len() != n + 1 {
        return Err(Error::SingularSystem);
    }
    let mut coeffs: Vec<BigRational> = m.iter().map(|row| row[n + 1].clone()).collect();
    let lambdas = coeffs.split_off(1);
    Ok(LinearForm::new(coeffs.pop().unwrap(), lambdas))
}

/// [`solve_affine_rational`] plus the requirement that every coefficient is
/// an integer.
pub fn solve_affine(samples: &[(Vec<u32>, i64)]) -> Result<LinearForm> {
    let form = solve_affine_rational(samples)?;
    if !form.is_integral() {
        return Err(Error::NonIntegerFit(form.to_string()));
    }
    Ok(form)
}

// ---- skeletons ----

/// Declarative description of the closed-form shape assumed for a pattern.
///
/// Bracket entries are affine expressions in `sigma` and `a1..an`, each
/// standing for the q-integer `[expr]_q`. For `terms = 1` the residue is
/// `coeff · Π[den] / (Π[num] · multinomial)`; for `terms = 2` it is
/// additionally multiplied by `(1 - q)` and matched against
/// `q^L (1 - q^P1) + q^M (1 - q^P2)` with `P1, P2` given by `periods`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skeleton {
    #[serde(default)]
    pub numerator: Vec<String>,
    #[serde(default)]
    pub denominator: Vec<String>,
    #[serde(default = "default_true")]
    pub multinomial: bool,
    pub terms: u8,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub periods: Vec<String>,
}

fn default_true() -> bool {
    true
}

impl Skeleton {
    /// The bracket skeleton of the closed form for `p`.
    pub fn for_pattern(p: &IndexPattern) -> Skeleton {
        let d = p.denominator_indices();
        match p.kind() {
            PatternKind::OneOne => Skeleton {
                numerator: vec![format!("a{}", d[0])],
                denominator: vec![format!("1 + sigma - a{}", d[0])],
                multinomial: true,
                terms: 1,
                periods: vec![],
            },
            _ => {
                let (x, y) = (d[0], d[1]);
                Skeleton {
                    numerator: vec![format!("a{x}"), format!("a{y}")],
                    denominator: vec![
                        format!("1 + sigma - a{x} - a{y}"),
                        format!("1 + sigma - a{x}"),
                        format!("1 + sigma - a{y}"),
                    ],
                    multinomial: true,
                    terms: 2,
                    periods: vec!["1 + sigma".into(), format!("1 + sigma - a{x} - a{y}")],
                }
            }
        }
    }

    fn compile(&self, n: usize) -> Result<CompiledSkeleton> {
        let parse = |v: &[String]| v.iter().map(|e| LinearForm::parse(e, n)).collect::<Result<Vec<_>>>();
        match (self.terms, self.periods.len()) {
            (1, 0) | (2, 2) => {}
            (1, _) => return Err(Error::invalid("a one-term skeleton takes no periods")),
            (2, k) => return Err(Error::invalid(format!("a two-term skeleton needs 2 periods, got {k}"))),
            (t, _) => return Err(Error::invalid(format!("terms must be 1 or 2, got {t}"))),
        }
        Ok(CompiledSkeleton {
            numerator: parse(&self.numerator)?,
            denominator: parse(&self.denominator)?,
            multinomial: self.multinomial,
            two_term: self.terms == 2,
            periods: parse(&self.periods)?,
        })
    }
}

struct CompiledSkeleton {
    numerator: Vec<LinearForm>,
    denominator: Vec<LinearForm>,
    multinomial: bool,
    two_term: bool,
    periods: Vec<LinearForm>,
}

fn bracket_value(form: &LinearForm, a: &[u32]) -> Result<i64> {
    let v = form.eval_int(a)?;
    if v < 0 {
        return Err(Error::ansatz(format!("bracket [{form}] is negative ({v}) at a = {a:?}")));
    }
    Ok(v)
}

impl CompiledSkeleton {
    /// Divides the skeleton out of `coeff`, arranged so that only exact
    /// polynomial divisions occur.
    fn residue(&self, coeff: &QPoly, a: &[u32]) -> Result<QPoly> {
        let mut num = QPoly::one();
        for f in &self.numerator {
            num = num * q_int(bracket_value(f, a)?)?;
        }
        if self.multinomial {
            num = num * q_multinomial(a);
        }
        let mut scaled = coeff.clone();
        for f in &self.denominator {
            scaled = scaled * q_int(bracket_value(f, a)?)?;
        }
        if self.two_term {
            scaled = scaled * QPoly::one_minus_q_pow(1);
        }
        if num.is_zero() {
            return Err(Error::ansatz(format!("skeleton numerator vanishes at a = {a:?}")));
        }
        scaled.exact_div(&num).map_err(|e| match e {
            Error::NonExactDivision { remainder } => Error::ansatz(format!(
                "coefficient {coeff} is not divisible by the skeleton numerator at a = {a:?} (remainder {remainder})"
            )),
            other => other,
        })
    }

    fn periods(&self, a: &[u32]) -> Result<(u32, u32)> {
        let p1 = bracket_value(&self.periods[0], a)?;
        let p2 = bracket_value(&self.periods[1], a)?;
        if p1 == 0 || p2 == 0 {
            return Err(Error::ansatz(format!("a period vanishes at a = {a:?}")));
        }
        Ok((p1 as u32, p2 as u32))
    }
}

// ---- residue recognition ----

/// One decomposed two-term residue `q^L (1 - q^P1) + q^M (1 - q^P2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoTermResidue {
    pub l: i64,
    /// Absolute exponent of the second term.
    pub m_abs: i64,
    /// The four exponents `L, L+P1, M, M+P2` were not pairwise distinct, so
    /// terms merged or cancelled in the residue.
    pub collided: bool,
}

fn is_shifted_binomial(p: &QPoly, period: u32) -> Option<u32> {
    let low = p.low_degree()?;
    (*p == QPoly::one_minus_q_pow(period).shift(low)).then_some(low)
}

/// Splits `r` as `q^L (1 - q^p1) + q^M (1 - q^p2)`.
///
/// The lowest exponent of `r` is `min(L, M)`. The reading `L <= M` is tried
/// first; the reading `M < L` is used only when the first fails. When terms
/// telescope (e.g. `M = L + p1`) both readings can fit and `L <= M` wins.
pub fn decompose_two_term(r: &QPoly, p1: u32, p2: u32) -> Result<TwoTermResidue> {
    let low = r.low_degree().ok_or_else(|| Error::ansatz("residue is zero"))?;
    let collided = |l: u32, m: u32| {
        let e = [l, l + p1, m, m + p2];
        (0..4).any(|i| (i + 1..4).any(|j| e[i] == e[j]))
    };
    let rest = r - &QPoly::one_minus_q_pow(p1).shift(low);
    if let Some(m) = is_shifted_binomial(&rest, p2).filter(|&m| m >= low) {
        return Ok(TwoTermResidue { l: low as i64, m_abs: m as i64, collided: collided(low, m) });
    }
    let rest = r - &QPoly::one_minus_q_pow(p2).shift(low);
    if let Some(l) = is_shifted_binomial(&rest, p1).filter(|&l| l > low) {
        return Ok(TwoTermResidue { l: l as i64, m_abs: low as i64, collided: collided(l, low) });
    }
    Err(Error::ansatz(format!("residue {r} is not of the form q^L(1 - q^{p1}) + q^M(1 - q^{p2})")))
}

fn one_term_from_residue(r: &QPoly) -> Result<(i8, i64)> {
    r.as_signed_q_power()
        .map(|(s, l)| (s, l as i64))
        .map_err(|_| Error::ansatz(format!("residue {r} is not a signed power of q")))
}

fn check_sample(a: &[u32]) -> Result<()> {
    if a.iter().any(|&x| x < 1) {
        return Err(Error::invalid(format!("sample a = {a:?} has an entry below 1")));
    }
    Ok(())
}

/// `(sign, L)` for the `x_r/x_s` coefficient at `a`.
pub fn residue_one_term(p: &IndexPattern, a: &[u32]) -> Result<(i8, i64)> {
    if p.kind() != PatternKind::OneOne {
        return Err(Error::invalid("residue_one_term applies to the 1m1 pattern"));
    }
    check_sample(a)?;
    let b = p.exponent_vector(a.len())?;
    let obs = observe(&b, &Skeleton::for_pattern(p).compile(a.len())?, a, &Limits::default())?;
    Ok((obs.sign.expect("one-term"), obs.l))
}

/// Exponents of the two-term residue for a `2m1m1` or `11m1m1` pattern at `a`.
pub fn residue_two_term(p: &IndexPattern, a: &[u32]) -> Result<TwoTermResidue> {
    if !p.kind().is_two_term() {
        return Err(Error::invalid("residue_two_term applies to two-term patterns"));
    }
    check_sample(a)?;
    let b = p.exponent_vector(a.len())?;
    let obs = observe(&b, &Skeleton::for_pattern(p).compile(a.len())?, a, &Limits::default())?;
    Ok(TwoTermResidue { l: obs.l, m_abs: obs.m.expect("two-term"), collided: obs.collided })
}

// ---- fitting ----

/// Extraction and residue data at one sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleObservation {
    pub a: Vec<u32>,
    pub coeff: QPoly,
    pub residue: QPoly,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
    pub l: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    pub collided: bool,
}

fn observe(b: &ExponentVector, skel: &CompiledSkeleton, a: &[u32], limits: &Limits) -> Result<SampleObservation> {
    let coeff = dyson_coeff_with(&DysonSpec::q(a.to_vec()), b, limits)?;
    if coeff.is_zero() {
        return Err(Error::ansatz(format!("coefficient vanishes at a = {a:?}")));
    }
    let residue = skel.residue(&coeff, a)?;
    if skel.two_term {
        let (p1, p2) = skel.periods(a)?;
        let t = decompose_two_term(&residue, p1, p2)?;
        Ok(SampleObservation {
            a: a.to_vec(),
            coeff,
            residue,
            sign: None,
            l: t.l,
            m: Some(t.m_abs),
            collided: t.collided,
        })
    } else {
        let (sign, l) = one_term_from_residue(&residue)?;
        Ok(SampleObservation { a: a.to_vec(), coeff, residue, sign: Some(sign), l, m: None, collided: false })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub a: Vec<u32>,
    pub predicted_l: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_m: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_l: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_m: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub points: Vec<ValidationPoint>,
    pub passed: bool,
}

/// Outcome of one fitting run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<IndexPattern>,
    pub n: usize,
    pub b: ExponentVector,
    pub skeleton: Skeleton,
    pub plan: SamplePlan,
    pub samples: Vec<SampleObservation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
    pub fitted_l: LinearForm,
    /// Absolute exponent of the second term, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_m: Option<LinearForm>,
    pub validation: Validation,
    /// The default plan failed and the run was repeated with base `(3, ..., 3)`.
    pub retried: bool,
}

impl FitResult {
    /// `M - L`: the second exponent once `q^L` is factored out front.
    pub fn relative_m(&self) -> Option<LinearForm> {
        self.fitted_m.clone().map(|m| m - self.fitted_l.clone())
    }

    /// Table row such as `[1, 2], 1 + a3 + a4 + a5 + a6`; two-term fits
    /// append the relative `M`.
    pub fn row(&self) -> String {
        let label = match &self.pattern {
            Some(p) => p.to_string(),
            None => format!("{:?}", self.b.as_slice()),
        };
        match self.relative_m() {
            Some(m) => format!("{label}, {}, {m}", self.fitted_l),
            None => format!("{label}, {}", self.fitted_l),
        }
    }
}

/// Fits the exponent(s) of a named pattern with its standard skeleton.
pub fn fit_pattern(p: &IndexPattern, n: usize, plan: Option<&SamplePlan>) -> Result<FitResult> {
    fit_pattern_with(p, n, plan, &Limits::default())
}

pub fn fit_pattern_with(p: &IndexPattern, n: usize, plan: Option<&SamplePlan>, limits: &Limits) -> Result<FitResult> {
    let b = p.exponent_vector(n)?;
    let mut res = fit_general_with(&b, &Skeleton::for_pattern(p), plan, limits)?;
    res.pattern = Some(p.clone());
    Ok(res)
}

/// Fits exponents for an arbitrary target monomial and skeleton.
pub fn fit_general(b: &ExponentVector, skeleton: &Skeleton, plan: Option<&SamplePlan>) -> Result<FitResult> {
    fit_general_with(b, skeleton, plan, &Limits::default())
}

pub fn fit_general_with(
    b: &ExponentVector,
    skeleton: &Skeleton,
    plan: Option<&SamplePlan>,
    limits: &Limits,
) -> Result<FitResult> {
    if b.total_degree() != 0 {
        return Err(Error::invalid(format!(
            "target {b} has total degree {} and its coefficient is identically zero",
            b.total_degree()
        )));
    }
    let n = b.len();
    let compiled = skeleton.compile(n)?;
    match plan {
        Some(plan) => {
            if plan.n() != n {
                return Err(Error::invalid(format!("plan is for n = {} but the target has n = {n}", plan.n())));
            }
            plan.validate()?;
            run_fit(b, skeleton, &compiled, plan, limits)
        }
        None => match run_fit(b, skeleton, &compiled, &gen_samples(n), limits) {
            Err(Error::AnsatzFailure(first)) => {
                let mut res =
                    run_fit(b, skeleton, &compiled, &SamplePlan::unit_bumps(n, 3), limits).map_err(|e| match e {
                        Error::AnsatzFailure(second) => {
                            Error::ansatz(format!("{first}; after retry with base 3: {second}"))
                        }
                        other => other,
                    })?;
                res.retried = true;
                Ok(res)
            }
            other => other,
        },
    }
}

fn run_fit(
    b: &ExponentVector,
    skeleton: &Skeleton,
    compiled: &CompiledSkeleton,
    plan: &SamplePlan,
    limits: &Limits,
) -> Result<FitResult> {
    let samples: Vec<SampleObservation> =
        plan.samples.par_iter().map(|a| observe(b, compiled, a, limits)).collect::<Result<_>>()?;

    let sign = if compiled.two_term {
        None
    } else {
        let s = samples[0].sign;
        if samples.iter().any(|o| o.sign != s) {
            return Err(Error::ansatz("residue sign changes across samples"));
        }
        s
    };
    let l_points: Vec<(Vec<u32>, i64)> = samples.iter().map(|o| (o.a.clone(), o.l)).collect();
    let fitted_l = solve_affine(&l_points)?;
    let fitted_m = if compiled.two_term {
        let m_points: Vec<(Vec<u32>, i64)> = samples.iter().map(|o| (o.a.clone(), o.m.unwrap())).collect();
        Some(solve_affine(&m_points)?)
    } else {
        None
    };

    let points: Vec<ValidationPoint> = plan
        .validation_vectors()
        .par_iter()
        .map(|a| {
            let predicted_l = fitted_l.eval_int(a).expect("integral form");
            let predicted_m = fitted_m.as_ref().map(|m| m.eval_int(a).expect("integral form"));
            match observe(b, compiled, a, limits) {
                Ok(o) => {
                    let ok = o.l == predicted_l && o.m == predicted_m && o.sign == sign;
                    ValidationPoint {
                        a: a.clone(),
                        predicted_l,
                        predicted_m,
                        observed_l: Some(o.l),
                        observed_m: o.m,
                        error: None,
                        ok,
                    }
                }
                Err(e) => ValidationPoint {
                    a: a.clone(),
                    predicted_l,
                    predicted_m,
                    observed_l: None,
                    observed_m: None,
                    error: Some(e.to_string()),
                    ok: false,
                },
            }
        })
        .collect();
    let passed = points.iter().all(|p| p.ok);

    Ok(FitResult {
        pattern: None,
        n: b.len(),
        b: b.clone(),
        skeleton: skeleton.clone(),
        plan: plan.clone(),
        samples,
        sign,
        fitted_l,
        fitted_m,
        validation: Validation { points, passed },
        retried: false,
    })
}

/// Fits every admissible index tuple of `kind` at `n`, in table order.
pub fn fit_all(kind: PatternKind, n: usize, limits: &Limits) -> Result<Vec<FitResult>> {
    IndexPattern::all(kind, n).par_iter().map(|p| fit_pattern_with(p, n, None, limits)).collect()
}
