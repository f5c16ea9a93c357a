//! Exact affine forms `λ0 + λ1 a1 + ... + λn an` in the exponent
//! parameters, used both for the piecewise exponent tables and for fitted
//! exponents.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearForm {
    lambda0: BigRational,
    lambdas: Vec<BigRational>,
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl LinearForm {
    pub fn new(lambda0: BigRational, lambdas: Vec<BigRational>) -> Self {
        LinearForm { lambda0, lambdas }
    }

    /// Form with integer coefficients.
    pub fn from_ints(lambda0: i64, lambdas: &[i64]) -> Self {
        LinearForm::new(rat(lambda0), lambdas.iter().map(|&l| rat(l)).collect())
    }

    pub fn zero(n: usize) -> Self {
        LinearForm::constant(n, 0)
    }

    pub fn constant(n: usize, c: i64) -> Self {
        LinearForm::new(rat(c), vec![BigRational::zero(); n])
    }

    /// The single parameter `a_i`, 1-based.
    pub fn var(n: usize, i: usize) -> Self {
        assert!((1..=n).contains(&i), "variable index {i} out of 1..={n}");
        let mut f = LinearForm::zero(n);
        f.lambdas[i - 1] = BigRational::one();
        f
    }

    /// `sigma = a1 + ... + an`.
    pub fn sigma(n: usize) -> Self {
        LinearForm::range_sum(n, 1, n)
    }

    /// `a_lo + ... + a_hi` (1-based, inclusive); zero when `lo > hi`.
    pub fn range_sum(n: usize, lo: usize, hi: usize) -> Self {
        let mut f = LinearForm::zero(n);
        for i in lo.max(1)..=hi.min(n) {
            f.lambdas[i - 1] = BigRational::one();
        }
        f
    }

    pub fn scale(&self, k: i64) -> Self {
        let k = rat(k);
        LinearForm::new(&self.lambda0 * &k, self.lambdas.iter().map(|l| l * &k).collect())
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda0(&self) -> &BigRational {
        &self.lambda0
    }

    pub fn lambdas(&self) -> &[BigRational] {
        &self.lambdas
    }

    pub fn is_integral(&self) -> bool {
        self.lambda0.is_integer() && self.lambdas.iter().all(|l| l.is_integer())
    }

    pub fn eval(&self, a: &[i64]) -> BigRational {
        assert_eq!(a.len(), self.n(), "parameter vector length mismatch");
        self.lambdas.iter().zip(a).fold(self.lambda0.clone(), |acc, (l, &ai)| acc + l * rat(ai))
    }

    /// Evaluates at an integer point and requires an integer result.
    pub fn eval_int(&self, a: &[u32]) -> Result<i64> {
        let a: Vec<i64> = a.iter().map(|&x| x as i64).collect();
        let v = self.eval(&a);
        if !v.is_integer() {
            return Err(Error::NonIntegral(v.to_string()));
        }
        v.to_integer().to_i64().ok_or_else(|| Error::NonIntegral(v.to_string()))
    }

    /// Parses expressions such as `1 + sigma - a2 - a3` or `2*a1 + 3`.
    pub fn parse(expr: &str, n: usize) -> Result<Self> {
        let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |why: &str| Error::invalid(format!("cannot parse affine expression `{expr}`: {why}"));
        if compact.is_empty() {
            return Err(bad("empty"));
        }
        let mut acc = LinearForm::zero(n);
        let mut pos = 0;
        while pos < compact.len() {
            let mut sign = 1i64;
            match compact.as_bytes()[pos] {
                b'+' => pos += 1,
                b'-' => {
                    sign = -1;
                    pos += 1
                }
                _ => {}
            }
            let end = compact[pos..].find(['+', '-']).map_or(compact.len(), |i| pos + i);
            let term = &compact[pos..end];
            let (coeff, atom) = match term.split_once('*') {
                Some((c, atom)) => (c.parse::<i64>().map_err(|_| bad("bad coefficient"))?, atom),
                None => match term.parse::<i64>() {
                    Ok(c) => (c, ""),
                    Err(_) => (1, term),
                },
            };
            let piece = match atom {
                "" => LinearForm::constant(n, 1),
                "sigma" => LinearForm::sigma(n),
                v => {
                    let idx = v
                        .strip_prefix('a')
                        .and_then(|i| i.parse::<usize>().ok())
                        .filter(|i| (1..=n).contains(i))
                        .ok_or_else(|| bad(&format!("unknown symbol `{v}`")))?;
                    LinearForm::var(n, idx)
                }
            };
            acc = acc + piece.scale(sign * coeff);
            pos = end;
        }
        Ok(acc)
    }
}

impl Add for LinearForm {
    type Output = LinearForm;
    fn add(self, rhs: LinearForm) -> LinearForm {
        assert_eq!(self.n(), rhs.n(), "linear form dimension mismatch");
        LinearForm::new(
            self.lambda0 + rhs.lambda0,
            self.lambdas.into_iter().zip(rhs.lambdas).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for LinearForm {
    type Output = LinearForm;
    fn sub(self, rhs: LinearForm) -> LinearForm {
        self + (-rhs)
    }
}

impl Neg for LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        LinearForm::new(-self.lambda0, self.lambdas.into_iter().map(|l| -l).collect())
    }
}

/// Renders as `1 + a3 + a4 + a5 + a6`, `a2`, `0`.
impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(bool, String)> = Vec::new();
        if !self.lambda0.is_zero() {
            parts.push((self.lambda0.is_negative(), self.lambda0.abs().to_string()));
        }
        for (i, l) in self.lambdas.iter().enumerate() {
            if l.is_zero() {
                continue;
            }
            let mag = l.abs();
            let body = if mag.is_one() { format!("a{}", i + 1) } else { format!("{mag}*a{}", i + 1) };
            parts.push((l.is_negative(), body));
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        for (k, (neg, body)) in parts.iter().enumerate() {
            match (k, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => f.write_str(body)?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

fn rat_to_json(r: &BigRational) -> serde_json::Value {
    match r.to_integer().to_i64() {
        Some(i) if r.is_integer() => serde_json::Value::from(i),
        _ => serde_json::Value::from(r.to_string()),
    }
}

fn rat_from_json(v: &serde_json::Value) -> std::result::Result<BigRational, String> {
    match v {
        serde_json::Value::Number(n) => n.as_i64().map(rat).ok_or_else(|| format!("not an integer: {n}")),
        serde_json::Value::String(s) => s.parse::<BigRational>().map_err(|e| e.to_string()),
        other => Err(format!("expected a number or rational string, got {other}")),
    }
}

/// JSON form: `{"lambda0":1,"lambda":[0,0,1,1,1,1]}`; non-integers as `"p/q"` strings.
impl Serialize for LinearForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            lambda0: serde_json::Value,
            lambda: Vec<serde_json::Value>,
        }
        Out { lambda0: rat_to_json(&self.lambda0), lambda: self.lambdas.iter().map(rat_to_json).collect() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LinearForm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            lambda0: serde_json::Value,
            lambda: Vec<serde_json::Value>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let lambda0 = rat_from_json(&raw.lambda0).map_err(D::Error::custom)?;
        let lambdas = raw
            .lambda
            .iter()
            .map(rat_from_json)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        Ok(LinearForm::new(lambda0, lambdas))
    }
}
