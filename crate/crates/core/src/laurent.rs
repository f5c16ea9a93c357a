//! Sparse multivariate Laurent polynomials over [`QPoly`] coefficients and
//! the target-directed product used for single-coefficient extraction.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{AddAssign, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qpoly::QPoly;

/// Exponents `(b_1, ..., b_n)` of a monomial `x_1^b_1 ... x_n^b_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(Vec<i32>);

impl ExponentVector {
    pub fn new(exps: Vec<i32>) -> Self {
        ExponentVector(exps)
    }

    pub fn zero(n: usize) -> Self {
        ExponentVector(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    pub fn checked_add(&self, other: &ExponentVector) -> Result<ExponentVector> {
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "exponent vectors of lengths {} and {} cannot be added",
                self.len(),
                other.len()
            )));
        }
        Ok(ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }
}

impl From<Vec<i32>> for ExponentVector {
    fn from(v: Vec<i32>) -> Self {
        ExponentVector(v)
    }
}

impl std::ops::Index<usize> for ExponentVector {
    type Output = i32;
    fn index(&self, i: usize) -> &i32 {
        &self.0[i]
    }
}

/// Renders `x1^2*x2^-1*x3^-1`; the empty monomial renders as `1`.
impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{e}", i + 1) })
            .collect();
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

/// The factor `1 - q^qexp * x_num / x_den`. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinomialFactor {
    pub num_var: usize,
    pub den_var: usize,
    pub qexp: u32,
}

impl BinomialFactor {
    pub fn new(num_var: usize, den_var: usize, qexp: u32) -> Self {
        assert_ne!(num_var, den_var, "a binomial factor needs two distinct variables");
        BinomialFactor { num_var, den_var, qexp }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.num_var == self.den_var || self.num_var >= n || self.den_var >= n {
            return Err(Error::invalid(format!("factor {self} is not valid for {n} variables")));
        }
        Ok(())
    }

    /// The factor as a two-term Laurent polynomial.
    pub fn to_laurent(&self, n: usize) -> Result<LaurentPoly> {
        self.check(n)?;
        let mut exps = vec![0; n];
        exps[self.num_var] = 1;
        exps[self.den_var] = -1;
        let mut p = LaurentPoly::one(n);
        p.insert(ExponentVector(exps), QPoly::monomial(-1, self.qexp));
        Ok(p)
    }
}

impl fmt::Display for BinomialFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j) = (self.num_var + 1, self.den_var + 1);
        match self.qexp {
            0 => write!(f, "(1 - x{i}/x{j})"),
            1 => write!(f, "(1 - q*x{i}/x{j})"),
            e => write!(f, "(1 - q^{e}*x{i}/x{j})"),
        }
    }
}

/// Laurent polynomial in `x_1..x_n` with [`QPoly`] coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    n: usize,
    terms: BTreeMap<ExponentVector, QPoly>,
}

impl LaurentPoly {
    pub fn zero(n: usize) -> Self {
        LaurentPoly { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        let mut p = LaurentPoly::zero(n);
        p.terms.insert(ExponentVector::zero(n), QPoly::one());
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (ExponentVector, QPoly)>) -> Result<Self> {
        let mut p = LaurentPoly::zero(n);
        for (e, c) in terms {
            if e.len() != n {
                return Err(Error::invalid(format!("monomial {e} does not have {n} exponents")));
            }
            p.insert(e, c);
        }
        Ok(p)
    }

    fn insert(&mut self, e: ExponentVector, c: QPoly) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &QPoly)> {
        self.terms.iter()
    }

    /// Exact product; fails when the ambient variable counts differ.
    pub fn mul(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "cannot multiply Laurent polynomials in {} and {} variables",
                self.n, other.n
            )));
        }
        let mut out: BTreeMap<ExponentVector, QPoly> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.checked_add(eb)?;
                *out.entry(e).or_default() += &(ca * cb);
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(LaurentPoly { n: self.n, terms: out })
    }

    /// Coefficient of the monomial `x^e`; zero when absent.
    pub fn coeff(&self, e: &ExponentVector) -> QPoly {
        self.terms.get(e).cloned().unwrap_or_default()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let monomial_is_one = e.as_slice().iter().all(|&x| x == 0);
            let text = match (monomial_is_one, c.len()) {
                (true, 1) => c.to_string(),
                (true, _) => format!("({c})"),
                (false, 1) if c.is_one() => e.to_string(),
                (false, 1) if (-c).is_one() => format!("-{e}"),
                (false, 1) => format!("{c}*{e}"),
                (false, _) => format!("({c})*{e}"),
            };
            match (k, text.strip_prefix('-')) {
                (0, _) => f.write_str(&text)?,
                (_, Some(rest)) => write!(f, " - {rest}")?,
                (_, None) => write!(f, " + {text}")?,
            }
        }
        Ok(())
    }
}

/// Per-variable `(min, max)` total exponent that the product of `factors`
/// can contribute: each factor contributes either nothing or `+1` to its
/// numerator variable and `-1` to its denominator variable.
pub fn support_bounds(factors: &[BinomialFactor], n: usize) -> Vec<(i32, i32)> {
    let mut bounds = vec![(0, 0); n];
    for f in factors {
        bounds[f.num_var].1 += 1;
        bounds[f.den_var].0 -= 1;
    }
    bounds
}

/// Default cap on the number of live partial terms in [`pruned_product`].
pub const DEFAULT_MAX_LIVE_TERMS: usize = 20_000_000;

/// Coefficient of `x^target` in the product of `factors`, computed without
/// expanding the full product.
///
/// Factors are multiplied in lexicographic order of their variable pair, so
/// that each variable stops changing as early as possible. After every
/// step, partial terms that can no longer reach `target` using the
/// remaining factors are dropped.
pub fn pruned_product(factors: &[BinomialFactor], target: &ExponentVector) -> Result<QPoly> {
    pruned_product_with_limit(factors, target, DEFAULT_MAX_LIVE_TERMS)
}

pub fn pruned_product_with_limit(
    factors: &[BinomialFactor],
    target: &ExponentVector,
    max_live_terms: usize,
) -> Result<QPoly> {
    let n = target.len();
    for f in factors {
        f.check(n)?;
    }
    if target.total_degree() != 0 {
        return Ok(QPoly::zero());
    }
    let mut ordered = factors.to_vec();
    ordered.sort_by_key(|f| (f.num_var.min(f.den_var), f.num_var.max(f.den_var)));
    let plan = Plan::new(&ordered, target)?;
    // Every coefficient of a partial product of k factors (1 - m) is bounded
    // in absolute value by 2^k, so i128 cannot overflow for k <= 126.
    if ordered.len() <= 126 {
        plan.run::<i128>(max_live_terms)
    } else {
        plan.run::<BigInt>(max_live_terms)
    }
}

trait Coeff: Clone + Zero + One + for<'a> AddAssign<&'a Self> + for<'a> SubAssign<&'a Self> {
    fn to_bigint(&self) -> BigInt;
}

impl Coeff for i128 {
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Coeff for BigInt {
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

struct Step {
    num_var: usize,
    den_var: usize,
    qexp: usize,
    delta: i64,
}

/// Precomputed schedule: packed key layout plus, for every step, the
/// exponent range still reachable from the factors not yet consumed.
struct Plan {
    n: usize,
    target: Vec<i32>,
    lo: Vec<i32>,
    range: Vec<u64>,
    stride: Vec<u64>,
    steps: Vec<Step>,
    /// `remaining[k][v]` bounds the contribution of factors `k..` to `x_v`.
    remaining: Vec<Vec<(i32, i32)>>,
}

impl Plan {
    fn new(ordered: &[BinomialFactor], target: &ExponentVector) -> Result<Self> {
        let n = target.len();
        let full = support_bounds(ordered, n);
        let mut stride = vec![0u64; n];
        let mut range = vec![0u64; n];
        let mut acc: u64 = 1;
        for v in 0..n {
            range[v] = (full[v].1 - full[v].0 + 1) as u64;
            stride[v] = acc;
            acc = acc
                .checked_mul(range[v])
                .ok_or_else(|| Error::LimitExceeded("exponent space too large for packed monomial keys".into()))?;
        }
        let steps = ordered
            .iter()
            .map(|f| Step {
                num_var: f.num_var,
                den_var: f.den_var,
                qexp: f.qexp as usize,
                delta: stride[f.num_var] as i64 - stride[f.den_var] as i64,
            })
            .collect();
        let mut remaining = vec![vec![(0, 0); n]; ordered.len() + 1];
        for k in (0..ordered.len()).rev() {
            let mut b = remaining[k + 1].clone();
            b[ordered[k].num_var].1 += 1;
            b[ordered[k].den_var].0 -= 1;
            remaining[k] = b;
        }
        Ok(Plan {
            n,
            target: target.as_slice().to_vec(),
            lo: full.iter().map(|b| b.0).collect(),
            range,
            stride,
            steps,
            remaining,
        })
    }

    fn exponent(&self, key: u64, v: usize) -> i32 {
        ((key / self.stride[v]) % self.range[v]) as i32 + self.lo[v]
    }

    fn reachable(&self, key: u64, v: usize, bounds: &[(i32, i32)]) -> bool {
        let need = self.target[v] - self.exponent(key, v);
        bounds[v].0 <= need && need <= bounds[v].1
    }

    fn run<C: Coeff>(&self, max_live_terms: usize) -> Result<QPoly> {
        let origin: u64 = (0..self.n).map(|v| (-self.lo[v]) as u64 * self.stride[v]).sum();
        if !(0..self.n).all(|v| self.reachable(origin, v, &self.remaining[0])) {
            return Ok(QPoly::zero());
        }
        let mut cur: FxHashMap<u64, Vec<C>> = FxHashMap::default();
        cur.insert(origin, vec![C::one()]);
        let mut next: FxHashMap<u64, Vec<C>> = FxHashMap::default();
        for (k, step) in self.steps.iter().enumerate() {
            let bounds = &self.remaining[k + 1];
            let viable =
                |key: u64| self.reachable(key, step.num_var, bounds) && self.reachable(key, step.den_var, bounds);
            for (key, poly) in cur.drain() {
                let moved = key.wrapping_add(step.delta as u64);
                if viable(moved) {
                    let slot = next.entry(moved).or_default();
                    if slot.len() < poly.len() + step.qexp {
                        slot.resize(poly.len() + step.qexp, C::zero());
                    }
                    for (i, c) in poly.iter().enumerate() {
                        slot[i + step.qexp] -= c;
                    }
                }
                if viable(key) {
                    match next.entry(key) {
                        std::collections::hash_map::Entry::Vacant(e) => {
                            e.insert(poly);
                        }
                        std::collections::hash_map::Entry::Occupied(mut e) => {
                            let slot = e.get_mut();
                            if slot.len() < poly.len() {
                                slot.resize(poly.len(), C::zero());
                            }
                            for (i, c) in poly.iter().enumerate() {
                                slot[i] += c;
                            }
                        }
                    }
                }
            }
            next.retain(|_, p| {
                while p.last().is_some_and(|c| c.is_zero()) {
                    p.pop();
                }
                !p.is_empty()
            });
            if next.len() > max_live_terms {
                return Err(Error::LimitExceeded(format!(
                    "{} live partial terms after {} of {} factors (limit {max_live_terms})",
                    next.len(),
                    k + 1,
                    self.steps.len()
                )));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        let target_key: u64 = (0..self.n).map(|v| (self.target[v] - self.lo[v]) as u64 * self.stride[v]).sum();
        Ok(cur
            .get(&target_key)
            .map(|p| QPoly::from_terms(p.iter().enumerate().map(|(e, c)| (e as u32, c.to_bigint()))))
            .unwrap_or_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(v: &[i32]) -> ExponentVector {
        ExponentVector::new(v.to_vec())
    }

    fn q(s: &str) -> QPoly {
        s.parse().unwrap()
    }

    /// Naive full product of `factors` in `n` variables.
    fn naive(factors: &[BinomialFactor], n: usize) -> LaurentPoly {
        factors.iter().fold(LaurentPoly::one(n), |acc, f| acc.mul(&f.to_laurent(n).unwrap()).unwrap())
    }

    #[test]
    fn multiply_examples() {
        let f21 = BinomialFactor::new(1, 0, 0).to_laurent(2).unwrap();
        assert_eq!(f21.mul(&LaurentPoly::one(2)).unwrap(), f21);

        let f12 = BinomialFactor::new(0, 1, 0).to_laurent(2).unwrap();
        let prod = f12.mul(&f21).unwrap();
        assert_eq!(prod.coeff(&ev(&[0, 0])), QPoly::constant(2));
        assert_eq!(prod.coeff(&ev(&[1, -1])), QPoly::constant(-1));
        assert_eq!(prod.coeff(&ev(&[-1, 1])), QPoly::constant(-1));
        assert_eq!(prod.len(), 3);
        assert_eq!(prod.coeff(&ev(&[2, -2])), QPoly::zero());

        let fq = BinomialFactor::new(0, 1, 1).to_laurent(2).unwrap();
        let qprod = fq.mul(&f21).unwrap();
        assert_eq!(qprod.coeff(&ev(&[0, 0])), q("1 + q"));
        assert_eq!(qprod.coeff(&ev(&[1, -1])), q("-q"));
        assert_eq!(qprod.coeff(&ev(&[-1, 1])), q("-1"));

        assert!(f12.mul(&LaurentPoly::one(3)).is_err());
    }

    #[test]
    fn rendering() {
        assert_eq!(ev(&[2, -1, -1]).to_string(), "x1^2*x2^-1*x3^-1");
        assert_eq!(ev(&[0, 0]).to_string(), "1");
        let fq = BinomialFactor::new(0, 1, 1).to_laurent(2).unwrap();
        let f21 = BinomialFactor::new(1, 0, 0).to_laurent(2).unwrap();
        assert_eq!(fq.mul(&f21).unwrap().to_string(), "-x1^-1*x2 + (1 + q) - q*x1*x2^-1");
        assert_eq!(BinomialFactor::new(0, 2, 3).to_string(), "(1 - q^3*x1/x3)");
    }

    #[test]
    fn bounds() {
        assert_eq!(support_bounds(&[], 3), vec![(0, 0); 3]);
        assert_eq!(support_bounds(&[BinomialFactor::new(0, 1, 0)], 2), vec![(0, 1), (-1, 0)]);
        let two = [BinomialFactor::new(0, 1, 1), BinomialFactor::new(1, 0, 0)];
        assert_eq!(support_bounds(&two, 2), vec![(-1, 1), (-1, 1)]);
    }

    #[test]
    fn pruned_examples() {
        let two = [BinomialFactor::new(0, 1, 1), BinomialFactor::new(1, 0, 0)];
        assert_eq!(pruned_product(&two, &ev(&[1, -1])).unwrap(), q("-q"));
        assert_eq!(pruned_product(&two, &ev(&[1, 0])).unwrap(), QPoly::zero());
        assert_eq!(pruned_product(&two, &ev(&[5, -5])).unwrap(), QPoly::zero());

        let mut f3 = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    f3.push(BinomialFactor::new(i, j, 0));
                }
            }
        }
        assert_eq!(pruned_product(&f3, &ev(&[0, 0, 0])).unwrap(), QPoly::constant(6));
        assert_eq!(pruned_product(&[], &ev(&[0, 0])).unwrap(), QPoly::one());
        assert_eq!(pruned_product(&[], &ev(&[])).unwrap(), QPoly::one());
        assert!(pruned_product(&[BinomialFactor::new(0, 3, 0)], &ev(&[0, 0])).is_err());
    }

    #[test]
    fn live_term_limit() {
        let factors: Vec<_> = (0..6).map(|k| BinomialFactor::new(k % 2, 1 - k % 2, 0)).collect();
        let err = pruned_product_with_limit(&factors, &ev(&[0, 0]), 2).unwrap_err();
        assert!(matches!(err, Error::LimitExceeded(_)));
    }

    #[test]
    fn matches_naive_on_mixed_factor_lists() {
        let factors = vec![
            BinomialFactor::new(0, 1, 1),
            BinomialFactor::new(2, 0, 0),
            BinomialFactor::new(1, 2, 2),
            BinomialFactor::new(0, 2, 1),
            BinomialFactor::new(1, 0, 0),
            BinomialFactor::new(2, 1, 3),
            BinomialFactor::new(0, 1, 2),
        ];
        let full = naive(&factors, 3);
        for (e, c) in full.terms() {
            assert_eq!(&pruned_product(&factors, e).unwrap(), c, "at {e}");
            let mut rev = factors.clone();
            rev.reverse();
            assert_eq!(&pruned_product(&rev, e).unwrap(), c);
        }
    }

    #[test]
    fn bigint_path_matches_fast_path() {
        // 130 factors forces the arbitrary-precision path.
        let mut factors = Vec::new();
        for k in 0..65 {
            factors.push(BinomialFactor::new(0, 1, k % 3));
            factors.push(BinomialFactor::new(1, 0, k % 2));
        }
        let big = pruned_product(&factors, &ev(&[1, -1])).unwrap();
        let small = pruned_product(&factors[..120], &ev(&[1, -1])).unwrap();
        assert!(!big.is_zero() && !small.is_zero());
        // (1 - x)^65 (1 - 1/x)^65 at q = 1 has coefficient -C(130, 66) at x^1.
        let binom = (1..=64u32).fold(BigInt::from(1), |acc, i| acc * (66 + i) / i);
        assert_eq!(big.eval_at_one(), -binom);
    }
}
