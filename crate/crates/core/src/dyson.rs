//! The Dyson product `prod_{i<j} (1 - x_i/x_j)^a_j (1 - x_j/x_i)^a_i` and its
//! q-analogue `prod_{i<j} (q x_i/x_j; q)_{a_j} (x_j/x_i; q)_{a_i}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{self, BinomialFactor, ExponentVector, LaurentPoly};
use crate::qpoly::QPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// `q = 1`: the original Dyson product.
    #[serde(rename = "classical")]
    Classical,
    #[serde(rename = "q")]
    Q,
}

/// One instance of the (q-)Dyson product: `n`, the exponent vector `a`, and the mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct DysonSpec {
    n: usize,
    a: Vec<u32>,
    mode: Mode,
}

#[derive(Deserialize)]
struct RawSpec {
    n: usize,
    a: Vec<u32>,
    #[serde(default = "default_mode")]
    mode: Mode,
}

fn default_mode() -> Mode {
    Mode::Q
}

impl TryFrom<RawSpec> for DysonSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        if raw.a.len() != raw.n {
            return Err(Error::invalid(format!("a has {} entries but n = {}", raw.a.len(), raw.n)));
        }
        Ok(DysonSpec { n: raw.n, a: raw.a, mode: raw.mode })
    }
}

impl DysonSpec {
    pub fn new(a: Vec<u32>, mode: Mode) -> Self {
        DysonSpec { n: a.len(), a, mode }
    }

    pub fn classical(a: Vec<u32>) -> Self {
        DysonSpec::new(a, Mode::Classical)
    }

    pub fn q(a: Vec<u32>) -> Self {
        DysonSpec::new(a, Mode::Q)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[u32] {
        &self.a
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn sigma(&self) -> u32 {
        self.a.iter().sum()
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        DysonSpec { mode, ..self.clone() }
    }
}

/// Size caps for extraction jobs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_n: usize,
    pub max_sigma: u32,
    /// Live partial terms allowed in the pruned product.
    pub max_live_terms: usize,
    /// Bound on the estimated term count of a full brute-force expansion.
    pub max_brute_force_terms: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_n: 8,
            max_sigma: 30,
            max_live_terms: laurent::DEFAULT_MAX_LIVE_TERMS,
            max_brute_force_terms: 1_000_000,
        }
    }
}

impl Limits {
    pub fn check(&self, spec: &DysonSpec) -> Result<()> {
        if spec.n() > self.max_n {
            return Err(Error::LimitExceeded(format!("n = {} exceeds the cap {}", spec.n(), self.max_n)));
        }
        if spec.sigma() > self.max_sigma {
            return Err(Error::LimitExceeded(format!("sigma = {} exceeds the cap {}", spec.sigma(), self.max_sigma)));
        }
        Ok(())
    }
}

/// Factor list of the product. In q-mode each pair `i < j` contributes
/// `(1 - q^e x_i/x_j)` for `e = 1..=a_j` and `(1 - q^e x_j/x_i)` for
/// `e = 0..a_i`; in classical mode the same factors with every `q^e = 1`.
pub fn build_factors(spec: &DysonSpec) -> Vec<BinomialFactor> {
    let mut out = Vec::new();
    let q_mode = spec.mode == Mode::Q;
    for i in 0..spec.n {
        for j in i + 1..spec.n {
            for e in 1..=spec.a[j] {
                out.push(BinomialFactor::new(i, j, if q_mode { e } else { 0 }));
            }
            for e in 0..spec.a[i] {
                out.push(BinomialFactor::new(j, i, if q_mode { e } else { 0 }));
            }
        }
    }
    out
}

/// Coefficient of `x^b` in the product, by pruned multiplication.
pub fn dyson_coeff(spec: &DysonSpec, b: &ExponentVector) -> Result<QPoly> {
    dyson_coeff_with(spec, b, &Limits::default())
}

pub fn dyson_coeff_with(spec: &DysonSpec, b: &ExponentVector, limits: &Limits) -> Result<QPoly> {
    if b.len() != spec.n {
        return Err(Error::invalid(format!("b has {} entries but n = {}", b.len(), spec.n)));
    }
    limits.check(spec)?;
    laurent::pruned_product_with_limit(&build_factors(spec), b, limits.max_live_terms)
}

/// The constant term, extracted (not evaluated from the closed form).
pub fn constant_term(spec: &DysonSpec) -> Result<QPoly> {
    dyson_coeff(spec, &ExponentVector::zero(spec.n))
}

/// Upper bound on the number of monomials in the full expansion: each pair
/// `i < j` contributes at most `1 + a_i + a_j` distinct monomials.
pub fn expansion_size_estimate(spec: &DysonSpec) -> u64 {
    let mut est: u64 = 1;
    for i in 0..spec.n {
        for j in i + 1..spec.n {
            est = est.saturating_mul(1 + spec.a[i] as u64 + spec.a[j] as u64);
        }
    }
    est
}

/// Full expansion by naive sequential multiplication, without pruning.
/// Intended as an oracle for small instances.
pub fn brute_force_expand(spec: &DysonSpec) -> Result<LaurentPoly> {
    brute_force_expand_with(spec, &Limits::default())
}

pub fn brute_force_expand_with(spec: &DysonSpec, limits: &Limits) -> Result<LaurentPoly> {
    let est = expansion_size_estimate(spec);
    if est > limits.max_brute_force_terms {
        return Err(Error::LimitExceeded(format!(
            "brute-force expansion estimated at {est} terms (limit {})",
            limits.max_brute_force_terms
        )));
    }
    let mut acc = LaurentPoly::one(spec.n);
    for f in build_factors(spec) {
        acc = acc.mul(&f.to_laurent(spec.n)?)?;
    }
    Ok(acc)
}

/// JSON request for a single coefficient: a spec plus the target exponents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffRequest {
    #[serde(flatten)]
    pub spec: DysonSpec,
    pub b: ExponentVector,
}
