//! Univariate polynomials in `q` with arbitrary-precision integer
//! coefficients, plus the q-combinatorial constructors built on them.
//!
//! The canonical text form lists terms in ascending exponent order,
//! e.g. `-1 + 2*q^3 - q^5`. The zero polynomial renders as `0`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Sparse polynomial in `q`: exponent → nonzero coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QPoly {
    terms: BTreeMap<u32, BigInt>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly::default()
    }

    pub fn one() -> Self {
        QPoly::constant(1)
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        QPoly::monomial(c, 0)
    }

    /// `c * q^exp`.
    pub fn monomial(c: impl Into<BigInt>, exp: u32) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        QPoly { terms }
    }

    /// `1 - q^k`.
    pub fn one_minus_q_pow(k: u32) -> Self {
        let mut p = QPoly::one();
        p.add_term(k, &BigInt::from(-1));
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed and zeros dropped.
    pub fn from_terms<I, C>(iter: I) -> Self
    where
        I: IntoIterator<Item = (u32, C)>,
        C: Into<BigInt>,
    {
        let mut p = QPoly::zero();
        for (e, c) in iter {
            p.add_term(e, &c.into());
        }
        p
    }

    /// Builds a polynomial from a dense coefficient slice, index = exponent.
    pub fn from_coeffs<C: Clone + Into<BigInt>>(coeffs: &[C]) -> Self {
        QPoly::from_terms(coeffs.iter().cloned().enumerate().map(|(e, c)| (e as u32, c)))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn low_degree(&self) -> Option<u32> {
        self.terms.keys().next().copied()
    }

    pub fn coeff(&self, exp: u32) -> BigInt {
        self.terms.get(&exp).cloned().unwrap_or_default()
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (u32, &BigInt)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    /// Value at `q = 1`, i.e. the sum of the coefficients.
    pub fn eval_at_one(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: u32) -> QPoly {
        QPoly { terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    pub fn pow(&self, k: u32) -> QPoly {
        let mut acc = QPoly::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    fn add_term(&mut self, exp: u32, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exp).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    fn to_dense(&self) -> Vec<BigInt> {
        let len = self.degree().map_or(0, |d| d as usize + 1);
        let mut v = vec![BigInt::zero(); len];
        for (e, c) in &self.terms {
            v[*e as usize] = c.clone();
        }
        v
    }

    /// Exact quotient `self / den`. Fails with [`Error::NonExactDivision`]
    /// when `den` does not divide `self` in `Z[q]`.
    pub fn exact_div(&self, den: &QPoly) -> Result<QPoly> {
        let (dd, lead) = match den.terms.iter().next_back() {
            Some((e, c)) => (*e as usize, c.clone()),
            None => return Err(Error::DivisionByZero),
        };
        if self.is_zero() {
            return Ok(QPoly::zero());
        }
        let dn = self.degree().unwrap() as usize;
        if dn < dd {
            return Err(Error::NonExactDivision { remainder: self.clone() });
        }
        let divisor: Vec<(usize, &BigInt)> = den.terms.iter().map(|(e, c)| (*e as usize, c)).collect();
        let mut rem = self.to_dense();
        let mut quot = vec![BigInt::zero(); dn - dd + 1];
        for k in (0..=dn - dd).rev() {
            let top = &rem[k + dd];
            if top.is_zero() {
                continue;
            }
            let (qk, r) = top.div_rem(&lead);
            if !r.is_zero() {
                return Err(Error::NonExactDivision { remainder: QPoly::from_coeffs(&rem) });
            }
            for (e, c) in &divisor {
                rem[k + e] -= &qk * *c;
            }
            quot[k] = qk;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(Error::NonExactDivision { remainder: QPoly::from_coeffs(&rem) });
        }
        Ok(QPoly::from_coeffs(&quot))
    }

    /// Recognizes `±q^L`, returning `(sign, L)`.
    pub fn as_signed_q_power(&self) -> Result<(i8, u32)> {
        if self.terms.len() != 1 {
            return Err(Error::NotAMonomial(self.clone()));
        }
        let (e, c) = self.terms.iter().next().unwrap();
        if c.is_one() {
            Ok((1, *e))
        } else if (-c).is_one() {
            Ok((-1, *e))
        } else {
            Err(Error::NotAMonomial(self.clone()))
        }
    }
}

// ---- arithmetic ----

impl Add<&QPoly> for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&QPoly> for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&QPoly> for QPoly {
    fn add_assign(&mut self, rhs: &QPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c);
        }
    }
}

impl SubAssign<&QPoly> for QPoly {
    fn sub_assign(&mut self, rhs: &QPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, &-c);
        }
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

impl Neg for QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        -&self
    }
}

impl Mul<&QPoly> for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let deg = self.degree().unwrap() as usize + rhs.degree().unwrap() as usize;
        // Dense accumulation unless the operands are very sparse and high degree.
        if deg <= 4 * self.len() * rhs.len() + 64 {
            let mut acc = vec![BigInt::zero(); deg + 1];
            for (ea, ca) in &self.terms {
                for (eb, cb) in &rhs.terms {
                    acc[(ea + eb) as usize] += ca * cb;
                }
            }
            QPoly::from_coeffs(&acc)
        } else {
            let mut out = QPoly::zero();
            for (ea, ca) in &self.terms {
                for (eb, cb) in &rhs.terms {
                    out.add_term(ea + eb, &(ca * cb));
                }
            }
            out
        }
    }
}

macro_rules! forward_owned_binop {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr<QPoly> for QPoly {
            type Output = QPoly;
            fn $m(self, rhs: QPoly) -> QPoly { (&self).$m(&rhs) }
        }
        impl $tr<&QPoly> for QPoly {
            type Output = QPoly;
            fn $m(self, rhs: &QPoly) -> QPoly { (&self).$m(rhs) }
        }
        impl $tr<QPoly> for &QPoly {
            type Output = QPoly;
            fn $m(self, rhs: QPoly) -> QPoly { self.$m(&rhs) }
        }
    )*};
}

forward_owned_binop!(Add::add, Sub::sub, Mul::mul);

impl std::iter::Product for QPoly {
    fn product<I: Iterator<Item = QPoly>>(iter: I) -> QPoly {
        iter.fold(QPoly::one(), |acc, p| &acc * &p)
    }
}

// ---- text form ----

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            match *e {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if *e == 1 {
                        f.write_str("q")?;
                    } else {
                        write!(f, "q^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl FromStr for QPoly {
    type Err = Error;

    /// Parses the canonical form; term order and spacing are not significant.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::invalid("empty polynomial"));
        }
        let bad = || Error::invalid(format!("cannot parse polynomial `{s}`"));
        let mut out = QPoly::zero();
        let bytes = compact.as_bytes();
        let mut pos = 0;
        while pos < bytes.len() {
            let mut sign = BigInt::one();
            if bytes[pos] == b'+' || bytes[pos] == b'-' {
                if bytes[pos] == b'-' {
                    sign = -sign;
                }
                pos += 1;
            }
            let end = compact[pos..].find(['+', '-']).map_or(compact.len(), |i| pos + i);
            let term = &compact[pos..end];
            if term.is_empty() {
                return Err(bad());
            }
            let (coeff, power) = match term.find('q') {
                None => (term.parse::<BigInt>().map_err(|_| bad())?, 0u32),
                Some(qi) => {
                    let head = &term[..qi];
                    let coeff = match head {
                        "" => BigInt::one(),
                        h => h.strip_suffix('*').ok_or_else(bad)?.parse::<BigInt>().map_err(|_| bad())?,
                    };
                    let tail = &term[qi + 1..];
                    let power = match tail {
                        "" => 1,
                        t => t.strip_prefix('^').ok_or_else(bad)?.parse::<u32>().map_err(|_| bad())?,
                    };
                    (coeff, power)
                }
            };
            out.add_term(power, &(sign * coeff));
            pos = end;
        }
        Ok(out)
    }
}

impl Serialize for QPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---- q-combinatorics ----

fn nonneg(name: &str, v: i64) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::invalid(format!("{name} must be a nonnegative integer, got {v}")))
}

/// The q-integer `[a]_q = 1 + q + ... + q^(a-1)`; zero for `a = 0`.
pub fn q_int(a: i64) -> Result<QPoly> {
    let a = nonneg("q-integer argument", a)?;
    Ok(QPoly::from_terms((0..a).map(|e| (e, 1))))
}

/// `[a]_q! = [1]_q [2]_q ... [a]_q`.
pub fn q_factorial(a: i64) -> Result<QPoly> {
    let a = nonneg("q-factorial argument", a)?;
    Ok((1..=a as i64).map(|j| q_int(j).expect("positive")).product())
}

/// Gaussian binomial coefficient `[n choose k]_q`.
pub fn q_binomial(n: u32, k: u32) -> QPoly {
    if k > n {
        return QPoly::zero();
    }
    let k = k.min(n - k);
    let mut acc = QPoly::one();
    // After step i the accumulator is [n-k+i choose i]_q, always a polynomial.
    for i in 1..=k {
        acc = &acc * &QPoly::one_minus_q_pow(n - k + i);
        acc = acc.exact_div(&QPoly::one_minus_q_pow(i)).expect("Gaussian binomial coefficients are polynomials");
    }
    acc
}

/// The q-multinomial `[a_1 + ... + a_n]_q! / ([a_1]_q! ... [a_n]_q!)`,
/// computed as a product of Gaussian binomials.
pub fn q_multinomial(a: &[u32]) -> QPoly {
    let mut partial = 0u32;
    let mut acc = QPoly::one();
    for &ai in a {
        partial += ai;
        acc = &acc * &q_binomial(partial, ai);
    }
    acc
}

/// `prod_{i=0}^{count-1} (1 - q^(offset + step*i))`.
///
/// With `offset = step = 1` this is `(q;q)_count`; `(q^a;q^a)_n` and
/// `(q;q^a)_n` are `(a, a, n)` and `(1, a, n)`.
pub fn q_pochhammer(offset: i64, step: i64, count: i64) -> Result<QPoly> {
    let offset = nonneg("pochhammer offset", offset)?;
    let count = nonneg("pochhammer count", count)?;
    if step < 1 {
        return Err(Error::invalid(format!("pochhammer step must be positive, got {step}")));
    }
    let step = step as u32;
    Ok((0..count).map(|i| QPoly::one_minus_q_pow(offset + step * i)).product())
}

/// `sign * q^qpower * prod (1 - q^c)` over `factors`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QFactorization {
    pub sign: i8,
    pub qpower: u32,
    /// Exponents `c` of the `(1 - q^c)` factors, ascending, with repetition.
    pub factors: Vec<u32>,
}

impl QFactorization {
    pub fn expand(&self) -> QPoly {
        let body: QPoly = self.factors.iter().map(|&c| QPoly::one_minus_q_pow(c)).product();
        body.shift(self.qpower) * QPoly::constant(self.sign)
    }
}

impl fmt::Display for QFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.qpower {
            0 => {}
            1 => parts.push("q".to_string()),
            e => parts.push(format!("q^{e}")),
        }
        let mut i = 0;
        while i < self.factors.len() {
            let c = self.factors[i];
            let mult = self.factors[i..].iter().take_while(|&&x| x == c).count();
            let base = if c == 1 { "(1 - q)".to_string() } else { format!("(1 - q^{c})") };
            parts.push(if mult > 1 { format!("{base}^{mult}") } else { base });
            i += mult;
        }
        let body = if parts.is_empty() { "1".to_string() } else { parts.join("*") };
        if self.sign < 0 {
            write!(f, "-{body}")
        } else {
            f.write_str(&body)
        }
    }
}

/// Writes `p` as `±q^L * prod (1 - q^c_i)` when such a form exists.
///
/// Greedy: strip the q-power content, normalize the constant term to `+1`,
/// then keep dividing by `(1 - q^k)` for the lowest nonconstant exponent
/// `k`. Returns `Ok(None)` when `p` is not of this form.
pub fn qfactor(p: &QPoly) -> Result<Option<QFactorization>> {
    let low = p.low_degree().ok_or_else(|| Error::invalid("cannot factor the zero polynomial"))?;
    let mut rest = QPoly { terms: p.terms.iter().map(|(e, c)| (e - low, c.clone())).collect() };
    let c0 = rest.coeff(0);
    let sign: i8 = if c0.is_one() {
        1
    } else if (-&c0).is_one() {
        rest = -rest;
        -1
    } else {
        return Ok(None);
    };
    let mut factors = Vec::new();
    while !rest.is_one() {
        let (k, ck) = rest.terms.iter().nth(1).map(|(e, c)| (*e, c.clone())).expect("nonconstant");
        if !ck.is_negative() {
            return Ok(None);
        }
        match rest.exact_div(&QPoly::one_minus_q_pow(k)) {
            Ok(quot) => {
                rest = quot;
                factors.push(k);
            }
            Err(Error::NonExactDivision { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(QFactorization { sign, qpower: low, factors }))
}
