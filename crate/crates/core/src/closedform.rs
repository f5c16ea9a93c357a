//! Closed-form evaluators for Dyson-product coefficients: the (q-)multinomial
//! constant term, the three classical coefficient formulas for
//! `x_r/x_s`, `x_r^2/(x_s x_t)` and `x_r x_s/(x_t x_u)`, their q-analogues
//! with piecewise-linear q-power exponents, and Stembridge's equal-parameter
//! identity.
//!
//! The exponent functions `L` and `M` are kept as explicit branch tables
//! keyed by the relative order of the fixed indices. Each branch is built as
//! a [`LinearForm`] so it can be compared symbolically against fitted forms.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::ExponentVector;
use crate::linform::LinearForm;
use crate::qpoly::{q_int, q_multinomial, q_pochhammer, QPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternKind {
    /// `x_r / x_s`
    #[serde(rename = "1m1")]
    OneOne,
    /// `x_r^2 / (x_s x_t)`
    #[serde(rename = "2m1m1")]
    TwoOneOne,
    /// `x_r x_s / (x_t x_u)`
    #[serde(rename = "11m1m1")]
    OneOneOneOne,
}

impl PatternKind {
    pub const ALL: [PatternKind; 3] = [PatternKind::OneOne, PatternKind::TwoOneOne, PatternKind::OneOneOneOne];

    pub fn code(self) -> &'static str {
        match self {
            PatternKind::OneOne => "1m1",
            PatternKind::TwoOneOne => "2m1m1",
            PatternKind::OneOneOneOne => "11m1m1",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            PatternKind::OneOne => 2,
            PatternKind::TwoOneOne => 3,
            PatternKind::OneOneOneOne => 4,
        }
    }

    /// Smallest `n` for which the pattern exists.
    pub fn min_n(self) -> usize {
        self.arity()
    }

    /// Whether the q-analogue has the two-term `[1+σ] + q^M [...]` shape.
    pub fn is_two_term(self) -> bool {
        self != PatternKind::OneOne
    }

    /// Every L-branch label, in table order.
    pub fn l_branches(self) -> &'static [&'static str] {
        match self {
            PatternKind::OneOne => &["r<s", "r>s"],
            PatternKind::TwoOneOne => &["r<s<t", "s<r<t", "s<t<r"],
            PatternKind::OneOneOneOne => &["r<s<t<u", "r<t<s<u", "r<t<u<s", "t<r<s<u", "t<r<u<s", "t<u<r<s"],
        }
    }

    /// Every M-branch label, in table order.
    pub fn m_branches(self) -> &'static [&'static str] {
        match self {
            PatternKind::OneOne => &[],
            PatternKind::TwoOneOne => &["r<s<t", "s<r<t", "s<t<r"],
            PatternKind::OneOneOneOne => &["a_u", "1+sigma", "a_t"],
        }
    }
}

impl std::str::FromStr for PatternKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1m1" => Ok(PatternKind::OneOne),
            "2m1m1" => Ok(PatternKind::TwoOneOne),
            "11m1m1" => Ok(PatternKind::OneOneOneOne),
            other => Err(Error::invalid(format!("unknown pattern `{other}` (expected 1m1, 2m1m1 or 11m1m1)"))),
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A coefficient pattern with its fixed 1-based indices.
///
/// For `TwoOneOne` the indices are `(r, s, t)` with `s < t`; for
/// `OneOneOneOne` they are `(r, s, t, u)` with `r < s` and `t < u`. The
/// constructors normalize to these conventions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawPattern", into = "RawPattern")]
pub struct IndexPattern {
    kind: PatternKind,
    indices: Vec<usize>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawPattern {
    pattern: PatternKind,
    indices: Vec<usize>,
}

impl TryFrom<RawPattern> for IndexPattern {
    type Error = Error;
    fn try_from(raw: RawPattern) -> Result<Self> {
        IndexPattern::new(raw.pattern, &raw.indices)
    }
}

impl From<IndexPattern> for RawPattern {
    fn from(p: IndexPattern) -> Self {
        RawPattern { pattern: p.kind, indices: p.indices }
    }
}

impl IndexPattern {
    pub fn new(kind: PatternKind, indices: &[usize]) -> Result<Self> {
        if indices.len() != kind.arity() {
            return Err(Error::invalid(format!(
                "pattern {kind} takes {} indices, got {}",
                kind.arity(),
                indices.len()
            )));
        }
        for (k, &i) in indices.iter().enumerate() {
            if i == 0 {
                return Err(Error::invalid("indices are 1-based"));
            }
            if indices[..k].contains(&i) {
                return Err(Error::invalid(format!("indices must be distinct, got {indices:?}")));
            }
        }
        let mut idx = indices.to_vec();
        match kind {
            PatternKind::OneOne => {}
            PatternKind::TwoOneOne => idx[1..3].sort_unstable(),
            PatternKind::OneOneOneOne => {
                idx[0..2].sort_unstable();
                idx[2..4].sort_unstable();
            }
        }
        Ok(IndexPattern { kind, indices: idx })
    }

    pub fn one_one(r: usize, s: usize) -> Result<Self> {
        IndexPattern::new(PatternKind::OneOne, &[r, s])
    }

    pub fn two_one_one(r: usize, s: usize, t: usize) -> Result<Self> {
        IndexPattern::new(PatternKind::TwoOneOne, &[r, s, t])
    }

    pub fn four_index(r: usize, s: usize, t: usize, u: usize) -> Result<Self> {
        IndexPattern::new(PatternKind::OneOneOneOne, &[r, s, t, u])
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n < self.kind.min_n() {
            return Err(Error::invalid(format!("pattern {} needs n >= {}, got {n}", self.kind, self.kind.min_n())));
        }
        if let Some(&i) = self.indices.iter().find(|&&i| i > n) {
            return Err(Error::invalid(format!("index {i} out of range 1..={n}")));
        }
        Ok(())
    }

    /// Every admissible index tuple of `kind` for `n` variables, normalized
    /// and in lexicographic order.
    pub fn all(kind: PatternKind, n: usize) -> Vec<IndexPattern> {
        let mut out = Vec::new();
        let idx: Vec<usize> = (1..=n).collect();
        let mut push = |v: &[usize]| {
            let p = IndexPattern::new(kind, v).expect("distinct indices");
            if !out.contains(&p) {
                out.push(p);
            }
        };
        for &r in &idx {
            for &s in &idx {
                if s == r {
                    continue;
                }
                if kind == PatternKind::OneOne {
                    push(&[r, s]);
                    continue;
                }
                for &t in &idx {
                    if t == r || t == s {
                        continue;
                    }
                    if kind == PatternKind::TwoOneOne {
                        push(&[r, s, t]);
                        continue;
                    }
                    for &u in &idx {
                        if u != r && u != s && u != t {
                            push(&[r, s, t, u]);
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// The exponent vector `b` of the monomial this pattern names.
    pub fn exponent_vector(&self, n: usize) -> Result<ExponentVector> {
        self.validate(n)?;
        let mut b = vec![0i32; n];
        let i = &self.indices;
        match self.kind {
            PatternKind::OneOne => {
                b[i[0] - 1] = 1;
                b[i[1] - 1] = -1;
            }
            PatternKind::TwoOneOne => {
                b[i[0] - 1] = 2;
                b[i[1] - 1] = -1;
                b[i[2] - 1] = -1;
            }
            PatternKind::OneOneOneOne => {
                b[i[0] - 1] = 1;
                b[i[1] - 1] = 1;
                b[i[2] - 1] = -1;
                b[i[3] - 1] = -1;
            }
        }
        Ok(ExponentVector::new(b))
    }

    /// The relative order of the indices, e.g. `s<r<t`; selects the L branch.
    pub fn order_label(&self) -> String {
        let names: &[&str] = match self.kind {
            PatternKind::OneOne => {
                return if self.indices[0] < self.indices[1] { "r<s".into() } else { "r>s".into() };
            }
            PatternKind::TwoOneOne => &["r", "s", "t"],
            PatternKind::OneOneOneOne => &["r", "s", "t", "u"],
        };
        let mut order: Vec<(usize, &str)> = self.indices.iter().copied().zip(names.iter().copied()).collect();
        order.sort_unstable();
        order.iter().map(|(_, name)| *name).collect::<Vec<_>>().join("<")
    }

    /// The M-branch label (see [`PatternKind::m_branches`]).
    pub fn m_label(&self) -> Option<String> {
        match self.kind {
            PatternKind::OneOne => None,
            PatternKind::TwoOneOne => Some(self.order_label()),
            PatternKind::OneOneOneOne => Some(
                match self.order_label().as_str() {
                    "r<s<t<u" | "r<t<u<s" | "t<u<r<s" => "a_u",
                    "r<t<s<u" | "t<r<u<s" => "1+sigma",
                    _ => "a_t",
                }
                .to_string(),
            ),
        }
    }

    /// Indices of the two denominator variables whose `a` values enter the
    /// bracket skeleton: `s` for `x_r/x_s`, `(s, t)` and `(t, u)` otherwise.
    pub fn denominator_indices(&self) -> Vec<usize> {
        match self.kind {
            PatternKind::OneOne => vec![self.indices[1]],
            PatternKind::TwoOneOne => vec![self.indices[1], self.indices[2]],
            PatternKind::OneOneOneOne => vec![self.indices[2], self.indices[3]],
        }
    }
}

impl fmt::Display for IndexPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "[{}]", list.join(", "))
    }
}

// ---- exponent tables ----

/// The exponent `L` of the q-analogue as an affine form in `a_1..a_n`.
pub fn l_form(p: &IndexPattern, n: usize) -> Result<LinearForm> {
    p.validate(n)?;
    let sigma = LinearForm::sigma(n);
    let one = LinearForm::constant(n, 1);
    let two = LinearForm::constant(n, 2);
    let sum = |lo: usize, hi: usize| LinearForm::range_sum(n, lo, hi);
    let i = p.indices();
    let form = match p.kind() {
        PatternKind::OneOne => {
            let (r, s) = (i[0], i[1]);
            if r < s {
                one + sigma - sum(r, s)
            } else {
                sum(s + 1, r - 1)
            }
        }
        PatternKind::TwoOneOne => {
            let (r, s, t) = (i[0], i[1], i[2]);
            if r < s {
                two + sigma.scale(2) - sum(r, t).scale(2) + sum(s + 1, t - 1)
            } else if r < t {
                one + sigma - sum(s, t) + sum(s + 1, r - 1).scale(2)
            } else {
                sum(t + 1, r - 1).scale(2) + sum(s + 1, t - 1)
            }
        }
        PatternKind::OneOneOneOne => {
            let (r, s, t, u) = (i[0], i[1], i[2], i[3]);
            match p.order_label().as_str() {
                "r<s<t<u" => two + sigma.scale(2) - sum(r, u).scale(2) + sum(r, s - 1) + sum(t + 1, u - 1),
                "r<t<s<u" => one + sigma - sum(r, u) + sum(t + 1, s - 1),
                "r<t<u<s" => {
                    one + sigma - sum(r, s - 1)
                        + sum(t + 1, r - 1).scale(2)
                        + sum(t + 1, u - 1)
                        + sum(u + 1, s - 1).scale(2)
                }
                "t<r<s<u" => one + sigma - sum(t, u) + sum(r, s - 1) + sum(t + 1, r - 1).scale(2),
                "t<r<u<s" => sum(t + 1, r - 1) + sum(u + 1, s - 1),
                "t<u<r<s" => sum(r, s - 1) + sum(t + 1, u - 1) + sum(u + 1, r - 1).scale(2),
                other => unreachable!("normalized four-index pattern has order {other}"),
            }
        }
    };
    Ok(form)
}

/// The exponent `M` (relative to `L`) of the two-term q-analogues.
pub fn m_form(p: &IndexPattern, n: usize) -> Result<Option<LinearForm>> {
    p.validate(n)?;
    let i = p.indices();
    let form = match p.kind() {
        PatternKind::OneOne => return Ok(None),
        PatternKind::TwoOneOne => {
            let (r, s, t) = (i[0], i[1], i[2]);
            if s < r && r < t {
                LinearForm::var(n, s)
            } else {
                LinearForm::var(n, t)
            }
        }
        PatternKind::OneOneOneOne => match p.m_label().as_deref() {
            Some("a_u") => LinearForm::var(n, i[3]),
            Some("1+sigma") => LinearForm::constant(n, 1) + LinearForm::sigma(n),
            _ => LinearForm::var(n, i[2]),
        },
    };
    Ok(Some(form))
}

pub fn l_exponent(p: &IndexPattern, a: &[u32]) -> Result<i64> {
    l_form(p, a.len())?.eval_int(a)
}

pub fn m_exponent(p: &IndexPattern, a: &[u32]) -> Result<Option<i64>> {
    m_form(p, a.len())?.map(|f| f.eval_int(a)).transpose()
}

// ---- classical evaluators ----

fn factorial(k: u32) -> BigInt {
    (1..=k).map(BigInt::from).product()
}

/// `σ! / (a_1! ... a_n!)`.
pub fn multinomial(a: &[u32]) -> BigInt {
    let sigma: u32 = a.iter().sum();
    a.iter().fold(factorial(sigma), |acc, &ai| acc / factorial(ai))
}

fn sigma_of(a: &[u32]) -> i64 {
    a.iter().map(|&x| x as i64).sum()
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Classical (`q = 1`) closed form for the coefficient named by `p`.
pub fn thm_coeff(p: &IndexPattern, a: &[u32]) -> Result<BigInt> {
    let n = a.len();
    p.validate(n)?;
    let sigma = sigma_of(a);
    let at = |i: usize| a[i - 1] as i64;
    let den_idx = p.denominator_indices();
    let value = match p.kind() {
        PatternKind::OneOne => {
            let s = at(den_idx[0]);
            -rat(s) / rat(1 + sigma - s)
        }
        PatternKind::TwoOneOne | PatternKind::OneOneOneOne => {
            let (x, y) = (at(den_idx[0]), at(den_idx[1]));
            let top = x * y * ((1 + sigma) + (1 + sigma - x - y));
            rat(top) / (rat(1 + sigma - x - y) * rat(1 + sigma - x) * rat(1 + sigma - y))
        }
    } * BigRational::from_integer(multinomial(a));
    if !value.is_integer() {
        return Err(Error::NonIntegral(format!("{} coefficient for a = {a:?} evaluated to {value}", p.kind())));
    }
    Ok(value.to_integer())
}

// ---- q evaluators ----

fn bracket(v: i64) -> Result<QPoly> {
    q_int(v)
}

fn q_power(e: i64) -> Result<QPoly> {
    u32::try_from(e).map(|e| QPoly::monomial(1, e)).map_err(|_| Error::NegativeExponent(e))
}

/// The q-analogue closed form for the coefficient named by `p`, assembled
/// as numerator brackets times `q^L` times the q-multinomial, then one exact
/// division by the denominator brackets.
pub fn conj_coeff(p: &IndexPattern, a: &[u32]) -> Result<QPoly> {
    let n = a.len();
    p.validate(n)?;
    let sigma = sigma_of(a);
    let at = |i: usize| a[i - 1] as i64;
    let den_idx = p.denominator_indices();
    let l = l_exponent(p, a)?;
    let qm = q_multinomial(a);
    let (numerator, denominator) = match p.kind() {
        PatternKind::OneOne => {
            let s = at(den_idx[0]);
            let num = -(q_power(l)? * bracket(s)? * qm);
            (num, bracket(1 + sigma - s)?)
        }
        PatternKind::TwoOneOne | PatternKind::OneOneOneOne => {
            let (x, y) = (at(den_idx[0]), at(den_idx[1]));
            let m = m_exponent(p, a)?.expect("two-term pattern has M");
            let two_term = bracket(1 + sigma)? + q_power(m)? * bracket(1 + sigma - x - y)?;
            let num = q_power(l)? * bracket(x)? * bracket(y)? * two_term * qm;
            let den = bracket(1 + sigma - x - y)? * bracket(1 + sigma - x)? * bracket(1 + sigma - y)?;
            (num, den)
        }
    };
    numerator.exact_div(&denominator)
}

// ---- Stembridge ----

/// Equal-parameter instance `a_1 = ... = a_n = a` with target exponents `b`
/// whose entries `b_{ρ+1} .. b_{ρ+τ}` (1-based) are all `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StembridgeSpec {
    pub n: usize,
    pub a: u32,
    pub b: ExponentVector,
    pub rho: usize,
    pub tau: usize,
}

/// Which transcription of the identity to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StembridgeReading {
    /// The form that agrees with direct extraction: the Pochhammer factor
    /// `(q;q^a)_{n-τ}` and the exponent shift `a(τ(n-τ) - 2ρτ)`.
    #[default]
    Corrected,
    /// The identity exactly as commonly printed, with `(q;q^a)_{ρ+τ}`.
    AsPrinted,
}

impl StembridgeSpec {
    pub fn new(n: usize, a: u32, b: ExponentVector, rho: usize, tau: usize) -> Result<Self> {
        let spec = StembridgeSpec { n, a, b, rho, tau };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let StembridgeSpec { n, a, rho, tau, .. } = *self;
        if a < 1 {
            return Err(Error::invalid("the equal parameter a must be at least 1"));
        }
        if self.b.len() != n {
            return Err(Error::invalid(format!("b has {} entries but n = {n}", self.b.len())));
        }
        if rho > n || tau < 1 || tau > n - rho {
            return Err(Error::invalid(format!(
                "need 0 <= rho <= n and 1 <= tau <= n - rho, got rho={rho}, tau={tau}"
            )));
        }
        for (k, &bk) in self.b.as_slice().iter().enumerate() {
            let in_block = (rho..rho + tau).contains(&k);
            if in_block && bk != -1 {
                return Err(Error::invalid(format!("b_{} must be -1", k + 1)));
            }
            if !in_block && bk < 0 {
                return Err(Error::invalid(format!("b_{} must be nonnegative outside the -1 block", k + 1)));
            }
        }
        if self.b.total_degree() != 0 {
            return Err(Error::invalid("entries of b must sum to zero"));
        }
        Ok(())
    }

    /// Every admissible `b` for `(n, ρ, τ)`: the `-1` block plus nonnegative
    /// entries elsewhere summing to `τ`. Lexicographic order.
    pub fn admissible_b(n: usize, rho: usize, tau: usize) -> Vec<ExponentVector> {
        if rho > n || tau < 1 || tau > n - rho {
            return Vec::new();
        }
        let free = n - tau;
        let mut out = Vec::new();
        let mut rest = vec![0i32; free];
        fn rec(pos: usize, left: i32, rest: &mut Vec<i32>, emit: &mut dyn FnMut(&[i32])) {
            if pos + 1 == rest.len() {
                rest[pos] = left;
                emit(rest);
                return;
            }
            for v in 0..=left {
                rest[pos] = v;
                rec(pos + 1, left - v, rest, emit);
            }
        }
        let mut emit = |r: &[i32]| {
            let mut b = r[..rho].to_vec();
            b.extend(std::iter::repeat_n(-1, tau));
            b.extend_from_slice(&r[rho..]);
            out.push(ExponentVector::new(b));
        };
        if free > 0 {
            rec(0, tau as i32, &mut rest, &mut emit);
        }
        out.sort();
        out
    }

    /// The coefficient pattern this instance shares with the non-constant
    /// q-Dyson closed forms, when there is one.
    pub fn overlap_pattern(&self) -> Option<IndexPattern> {
        let b = self.b.as_slice();
        let plus: Vec<(usize, i32)> = b.iter().enumerate().filter(|(_, &v)| v > 0).map(|(k, &v)| (k + 1, v)).collect();
        let (s, t) = (self.rho + 1, self.rho + 2);
        match (self.tau, plus.as_slice()) {
            (1, [(r, 1)]) => IndexPattern::one_one(*r, s).ok(),
            (2, [(r, 2)]) => IndexPattern::two_one_one(*r, s, t).ok(),
            (2, [(r1, 1), (r2, 1)]) => IndexPattern::four_index(*r1, *r2, s, t).ok(),
            _ => None,
        }
    }
}

/// Stembridge's equal-parameter coefficient formula (corrected reading).
pub fn stembridge_coeff(spec: &StembridgeSpec) -> Result<QPoly> {
    stembridge_coeff_with(spec, StembridgeReading::Corrected)
}

pub fn stembridge_coeff_with(spec: &StembridgeSpec, reading: StembridgeReading) -> Result<QPoly> {
    spec.validate()?;
    let (n, a, rho, tau) = (spec.n as i64, spec.a as i64, spec.rho as i64, spec.tau as i64);
    let b = |i: i64| spec.b[(i - 1) as usize] as i64;
    let mut m = rho * tau + (1..=rho).map(|i| (i - 1) * b(i)).sum::<i64>()
        - (1..=n - rho - tau).map(|i| i * b(n - i + 1)).sum::<i64>();
    let tail = match reading {
        StembridgeReading::Corrected => {
            m += tau * (n - tau) - 2 * rho * tau;
            n - tau
        }
        StembridgeReading::AsPrinted => rho + tau,
    };
    let exponent = (1..=rho).map(b).sum::<i64>() + a * m;
    let sign = if tau % 2 == 0 { QPoly::one() } else { QPoly::constant(-1) };
    let numerator =
        sign * q_power(exponent)? * q_pochhammer(1, 1, a * n)? * q_pochhammer(a, a, tau)? * q_pochhammer(1, a, tail)?;
    let denominator = q_pochhammer(1, 1, a)?.pow(spec.n as u32) * q_pochhammer(1, a, n)?;
    numerator.exact_div(&denominator)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QPoly {
        s.parse().unwrap()
    }

    #[test]
    fn pattern_normalization() {
        let p = IndexPattern::two_one_one(2, 3, 1).unwrap();
        assert_eq!(p.indices(), &[2, 1, 3]);
        assert_eq!(p.order_label(), "s<r<t");
        let p = IndexPattern::four_index(4, 2, 3, 1).unwrap();
        assert_eq!(p.indices(), &[2, 4, 1, 3]);
        assert_eq!(p.order_label(), "t<r<u<s");
        assert!(IndexPattern::one_one(1, 1).is_err());
        assert!(IndexPattern::one_one(0, 1).is_err());
        assert!(IndexPattern::new(PatternKind::TwoOneOne, &[1, 2]).is_err());
        assert!(IndexPattern::one_one(1, 3).unwrap().validate(2).is_err());
        assert!(IndexPattern::two_one_one(1, 2, 3).unwrap().validate(2).is_err());
    }

    #[test]
    fn pattern_enumeration_counts() {
        assert_eq!(IndexPattern::all(PatternKind::OneOne, 6).len(), 30);
        assert_eq!(IndexPattern::all(PatternKind::TwoOneOne, 4).len(), 12);
        assert_eq!(IndexPattern::all(PatternKind::OneOneOneOne, 4).len(), 6);
        assert_eq!(IndexPattern::all(PatternKind::OneOneOneOne, 5).len(), 30);
    }

    #[test]
    fn pattern_json() {
        let p: IndexPattern = serde_json::from_str(r#"{"pattern":"2m1m1","indices":[1,3,2]}"#).unwrap();
        assert_eq!(p, IndexPattern::two_one_one(1, 2, 3).unwrap());
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"pattern":"2m1m1","indices":[1,2,3]}"#);
    }

    #[test]
    fn exponent_vectors() {
        let p = IndexPattern::two_one_one(2, 1, 3).unwrap();
        assert_eq!(p.exponent_vector(3).unwrap().as_slice(), &[-1, 2, -1]);
        let p = IndexPattern::four_index(1, 4, 2, 3).unwrap();
        assert_eq!(p.exponent_vector(4).unwrap().as_slice(), &[1, -1, -1, 1]);
    }

    #[test]
    fn multinomial_values() {
        assert_eq!(multinomial(&[1, 1]), BigInt::from(2));
        assert_eq!(multinomial(&[2, 1, 1]), BigInt::from(12));
        assert_eq!(multinomial(&[0, 0, 0]), BigInt::from(1));
    }

    #[test]
    fn n6_one_one_table_entries() {
        // Rows of the n = 6 x_r/x_s exponent table.
        let l = |r, s| l_form(&IndexPattern::one_one(r, s).unwrap(), 6).unwrap().to_string();
        assert_eq!(l(1, 2), "1 + a3 + a4 + a5 + a6");
        assert_eq!(l(3, 1), "a2");
        assert_eq!(l(2, 1), "0");
        assert_eq!(l(1, 6), "1");
        assert_eq!(l(6, 1), "a2 + a3 + a4 + a5");
        assert_eq!(l(4, 6), "1 + a1 + a2 + a3");
    }

    #[test]
    fn m_branch_values() {
        let a = [3, 5, 7, 11];
        let p = IndexPattern::two_one_one(2, 1, 3).unwrap();
        assert_eq!(m_exponent(&p, &a[..3]).unwrap(), Some(3)); // s<r<t gives a_s
        let p = IndexPattern::two_one_one(1, 2, 3).unwrap();
        assert_eq!(m_exponent(&p, &a[..3]).unwrap(), Some(7));
        let p = IndexPattern::four_index(1, 3, 2, 4).unwrap();
        assert_eq!(m_exponent(&p, &a).unwrap(), Some(1 + 26));
        let p = IndexPattern::four_index(2, 3, 1, 4).unwrap();
        assert_eq!(m_exponent(&p, &a).unwrap(), Some(3));
        assert_eq!(m_exponent(&IndexPattern::one_one(1, 2).unwrap(), &a[..2]).unwrap(), None);
    }

    #[test]
    fn thm_examples() {
        let p = IndexPattern::one_one(1, 2).unwrap();
        assert_eq!(thm_coeff(&p, &[1, 1]).unwrap(), BigInt::from(-1));
        assert_eq!(thm_coeff(&p, &[3, 0]).unwrap(), BigInt::from(0));
        let p = IndexPattern::two_one_one(1, 2, 3).unwrap();
        assert_eq!(thm_coeff(&p, &[1, 1, 1]).unwrap(), BigInt::from(2));
        assert!(thm_coeff(&p, &[1, 1]).is_err());
    }

    #[test]
    fn conj_examples() {
        let p = IndexPattern::one_one(1, 2).unwrap();
        assert_eq!(conj_coeff(&p, &[1, 1]).unwrap(), q("-q"));
        assert_eq!(conj_coeff(&p, &[2, 0]).unwrap(), QPoly::zero());
        let p = IndexPattern::two_one_one(1, 2, 3).unwrap();
        assert_eq!(l_exponent(&p, &[1, 1, 1]).unwrap(), 2);
        assert_eq!(m_exponent(&p, &[1, 1, 1]).unwrap(), Some(1));
        assert_eq!(conj_coeff(&p, &[1, 1, 1]).unwrap(), q("q^2 + q^3"));
    }

    #[test]
    fn conj_reduces_to_thm_at_q_one() {
        for kind in PatternKind::ALL {
            for n in kind.min_n()..=4 {
                for p in IndexPattern::all(kind, n) {
                    for a in [vec![1; n], (1..=n as u32).collect::<Vec<_>>(), (0..n as u32).rev().collect()] {
                        let c = conj_coeff(&p, &a).unwrap();
                        assert_eq!(c.eval_at_one(), thm_coeff(&p, &a).unwrap(), "{kind} {p} a={a:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn stembridge_small_cases() {
        let spec = StembridgeSpec::new(2, 1, ExponentVector::new(vec![-1, 1]), 0, 1).unwrap();
        assert_eq!(stembridge_coeff(&spec).unwrap(), QPoly::constant(-1));
        // The printed transcription needs q^-1 here.
        assert_eq!(
            stembridge_coeff_with(&spec, StembridgeReading::AsPrinted).unwrap_err(),
            Error::NegativeExponent(-1)
        );
        let spec = StembridgeSpec::new(2, 1, ExponentVector::new(vec![1, -1]), 1, 1).unwrap();
        assert_eq!(stembridge_coeff(&spec).unwrap(), q("-q"));
    }

    #[test]
    fn stembridge_validation() {
        let b = |v: &[i32]| ExponentVector::new(v.to_vec());
        assert!(StembridgeSpec::new(2, 0, b(&[-1, 1]), 0, 1).is_err());
        assert!(StembridgeSpec::new(2, 1, b(&[1, -1]), 0, 1).is_err());
        assert!(StembridgeSpec::new(3, 1, b(&[-1, 2, -1]), 0, 1).is_err());
        assert!(StembridgeSpec::new(2, 1, b(&[-1, 2]), 0, 1).is_err());
        assert!(StembridgeSpec::new(2, 1, b(&[-1, 1]), 0, 2).is_err());
        assert!(StembridgeSpec::new(2, 1, b(&[-1, 1]), 3, 1).is_err());
    }

    #[test]
    fn admissible_b_enumeration() {
        let bs = StembridgeSpec::admissible_b(3, 0, 1);
        let got: Vec<Vec<i32>> = bs.iter().map(|b| b.as_slice().to_vec()).collect();
        assert_eq!(got, vec![vec![-1, 0, 1], vec![-1, 1, 0]]);
        assert_eq!(StembridgeSpec::admissible_b(4, 1, 2).len(), 3);
        assert!(StembridgeSpec::admissible_b(2, 0, 2).is_empty());
    }

    #[test]
    fn overlap_detection() {
        let s = StembridgeSpec::new(3, 1, ExponentVector::new(vec![0, -1, 1]), 1, 1).unwrap();
        assert_eq!(s.overlap_pattern(), Some(IndexPattern::one_one(3, 2).unwrap()));
        let s = StembridgeSpec::new(4, 1, ExponentVector::new(vec![2, -1, -1, 0]), 1, 2).unwrap();
        assert_eq!(s.overlap_pattern(), Some(IndexPattern::two_one_one(1, 2, 3).unwrap()));
        let s = StembridgeSpec::new(4, 1, ExponentVector::new(vec![1, -1, -1, 1]), 1, 2).unwrap();
        assert_eq!(s.overlap_pattern(), Some(IndexPattern::four_index(1, 4, 2, 3).unwrap()));
        let s = StembridgeSpec::new(4, 1, ExponentVector::new(vec![-1, -1, -1, 3]), 0, 3).unwrap();
        assert_eq!(s.overlap_pattern(), None);
    }
}
