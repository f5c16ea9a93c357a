//! Grid verification: closed forms against extraction over parameter grids.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::closedform::{
    conj_coeff, multinomial, stembridge_coeff, thm_coeff, IndexPattern, PatternKind, StembridgeSpec,
};
use crate::dyson::{dyson_coeff_with, DysonSpec, Limits};
use crate::error::{Error, ErrorKind, Result};
use crate::laurent::ExponentVector;
use crate::qpoly::{q_multinomial, QPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyTarget {
    /// Classical constant term against `σ!/Π aᵢ!`.
    Dyson,
    /// q constant term against the q-multinomial.
    Qdyson,
    /// Classical pattern coefficients against the theorem.
    Thm,
    /// q pattern coefficients against the conjectured closed forms.
    Conj,
    /// Equal-parameter coefficients against Stembridge's formula.
    Stembridge,
}

impl VerifyTarget {
    pub const ALL: [VerifyTarget; 5] =
        [VerifyTarget::Dyson, VerifyTarget::Qdyson, VerifyTarget::Thm, VerifyTarget::Conj, VerifyTarget::Stembridge];

    pub fn name(self) -> &'static str {
        match self {
            VerifyTarget::Dyson => "dyson",
            VerifyTarget::Qdyson => "qdyson",
            VerifyTarget::Thm => "thm",
            VerifyTarget::Conj => "conj",
            VerifyTarget::Stembridge => "stembridge",
        }
    }
}

impl fmt::Display for VerifyTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VerifyTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        VerifyTarget::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown verify target `{s}`")))
    }
}

/// Parses `3` or an inclusive range `1..3`.
pub fn parse_range(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::invalid(format!("bad range `{s}` (expected `k` or `lo..hi`)"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// The parameter grid of one verification run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_min: usize,
    pub n_max: usize,
    /// Range of every entry `aᵢ`; for `stembridge`, the range of the common value.
    pub a_min: u32,
    pub a_max: u32,
    /// Restricts `thm`/`conj` to one pattern kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<PatternKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    /// Cap on cases per `(n, pattern)` cell; larger cells are subsampled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Cap on total extractions; the remainder is skipped and the report
    /// marked incomplete.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

impl GridSpec {
    pub fn new(n: (usize, usize), a: (u32, u32)) -> Self {
        GridSpec {
            n_min: n.0,
            n_max: n.1,
            a_min: a.0,
            a_max: a.1,
            pattern: None,
            rho: None,
            tau: None,
            sample: None,
            seed: 0,
            budget: None,
        }
    }

    pub fn validate(&self, target: VerifyTarget) -> Result<()> {
        if self.n_min > self.n_max || self.a_min > self.a_max {
            return Err(Error::invalid("empty n or a range"));
        }
        if target == VerifyTarget::Stembridge && self.a_max < 1 {
            return Err(Error::invalid("stembridge needs a >= 1"));
        }
        if self.sample == Some(0) {
            return Err(Error::invalid("sample cap must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Case {
    Constant { a: Vec<u32>, q: bool },
    Pattern { p: IndexPattern, a: Vec<u32>, q: bool },
    Stembridge(StembridgeSpec),
}

impl Case {
    fn input(&self) -> serde_json::Value {
        match self {
            Case::Constant { a, q } => json!({"n": a.len(), "a": a, "mode": if *q { "q" } else { "classical" }}),
            Case::Pattern { p, a, q } => json!({
                "pattern": p.kind().code(), "indices": p.indices(), "n": a.len(), "a": a,
                "mode": if *q { "q" } else { "classical" },
            }),
            Case::Stembridge(s) => serde_json::to_value(s).expect("serializable"),
        }
    }
}

fn all_vectors(n: usize, lo: u32, hi: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|v| (lo..=hi).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

fn subsample<T>(mut cell: Vec<T>, cap: Option<usize>, seed: u64, salt: u64) -> Vec<T> {
    let Some(cap) = cap.filter(|&c| c < cell.len()) else { return cell };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut keep = rand::seq::index::sample(&mut rng, cell.len(), cap).into_vec();
    keep.sort_unstable();
    let mut out = Vec::with_capacity(cap);
    for (k, item) in cell.drain(..).enumerate() {
        if keep.binary_search(&k).is_ok() {
            out.push(item);
        }
    }
    out
}

fn enumerate(target: VerifyTarget, grid: &GridSpec) -> Vec<Case> {
    let mut cases = Vec::new();
    for n in grid.n_min..=grid.n_max {
        match target {
            VerifyTarget::Dyson | VerifyTarget::Qdyson => {
                let q = target == VerifyTarget::Qdyson;
                let cell: Vec<Case> =
                    all_vectors(n, grid.a_min, grid.a_max).into_iter().map(|a| Case::Constant { a, q }).collect();
                cases.extend(subsample(cell, grid.sample, grid.seed, n as u64));
            }
            VerifyTarget::Thm | VerifyTarget::Conj => {
                let q = target == VerifyTarget::Conj;
                let kinds: Vec<PatternKind> = match grid.pattern {
                    Some(k) => vec![k],
                    None => PatternKind::ALL.to_vec(),
                };
                for (ki, kind) in kinds.into_iter().enumerate() {
                    if n < kind.min_n() {
                        continue;
                    }
                    let vectors = all_vectors(n, grid.a_min, grid.a_max);
                    let cell: Vec<Case> = IndexPattern::all(kind, n)
                        .into_iter()
                        .flat_map(|p| vectors.iter().map(move |a| Case::Pattern { p: p.clone(), a: a.clone(), q }))
                        .collect();
                    cases.extend(subsample(cell, grid.sample, grid.seed, (n as u64) << 8 | ki as u64));
                }
            }
            VerifyTarget::Stembridge => {
                let mut cell = Vec::new();
                for a in grid.a_min.max(1)..=grid.a_max {
                    for rho in 0..=n {
                        if grid.rho.is_some_and(|r| r != rho) {
                            continue;
                        }
                        for tau in 1..=n - rho {
                            if grid.tau.is_some_and(|t| t != tau) {
                                continue;
                            }
                            for b in StembridgeSpec::admissible_b(n, rho, tau) {
                                cell.push(Case::Stembridge(StembridgeSpec { n, a, b, rho, tau }));
                            }
                        }
                    }
                }
                cases.extend(subsample(cell, grid.sample, grid.seed, n as u64));
            }
        }
    }
    cases
}

/// A formula/extraction disagreement, with everything needed to re-run it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub input: serde_json::Value,
    pub formula: String,
    pub extracted: String,
    /// Set when the closed form itself failed (e.g. a non-exact division).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Outcome of a grid run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub target: VerifyTarget,
    pub grid: GridSpec,
    pub cases: usize,
    pub passed: usize,
    /// Cases not run because of the budget or a size limit.
    pub skipped: usize,
    pub incomplete: bool,
    pub per_n: BTreeMap<usize, usize>,
    /// Hits per L branch, keyed `pattern order` (e.g. `2m1m1 s<r<t`); every
    /// branch of the checked kinds is present, so zero means uncovered.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub l_coverage: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub m_coverage: BTreeMap<String, usize>,
    /// Stembridge instances also checked against the conjectured closed forms.
    pub overlap_checked: usize,
    pub mismatches: Vec<Counterexample>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// Branch labels with no passing grid point.
    pub fn uncovered_branches(&self) -> Vec<String> {
        let l = self.l_coverage.iter().filter(|(_, &c)| c == 0).map(|(k, _)| format!("L {k}"));
        let m = self.m_coverage.iter().filter(|(_, &c)| c == 0).map(|(k, _)| format!("M {k}"));
        l.chain(m).collect()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if !self.ok() {
            "FAIL"
        } else if self.incomplete {
            "INCOMPLETE"
        } else {
            "PASS"
        };
        writeln!(
            f,
            "verify {}: {status} ({} cases, {} passed, {} mismatches, {} skipped)",
            self.target,
            self.cases,
            self.passed,
            self.mismatches.len(),
            self.skipped
        )?;
        for (n, c) in &self.per_n {
            writeln!(f, "  n = {n}: {c} cases")?;
        }
        for (k, c) in &self.l_coverage {
            writeln!(f, "  L {k}: {c}")?;
        }
        for (k, c) in &self.m_coverage {
            writeln!(f, "  M {k}: {c}")?;
        }
        if self.target == VerifyTarget::Stembridge {
            writeln!(f, "  overlap with conjectured forms: {}", self.overlap_checked)?;
        }
        for m in &self.mismatches {
            writeln!(f, "  counterexample {}: formula {} vs extracted {}", m.input, m.formula, m.extracted)?;
            if let Some(e) = &m.error {
                writeln!(f, "    {e}")?;
            }
        }
        Ok(())
    }
}

enum Outcome {
    Pass { overlap: bool },
    Mismatch(Counterexample),
    Skipped,
}

fn mismatch(case: &Case, formula: Result<String>, extracted: &QPoly) -> Outcome {
    let (formula, error) = match formula {
        Ok(s) => (s, None),
        Err(e) => ("<error>".to_string(), Some(e.to_string())),
    };
    Outcome::Mismatch(Counterexample { input: case.input(), formula, extracted: extracted.to_string(), error })
}

fn compare(case: &Case, want: Result<QPoly>, got: &QPoly) -> Option<Outcome> {
    match want {
        Ok(w) if &w == got => None,
        Ok(w) => Some(mismatch(case, Ok(w.to_string()), got)),
        Err(e) => Some(mismatch(case, Err(e), got)),
    }
}

fn run_case(case: &Case, limits: &Limits) -> Result<Outcome> {
    let extract = |a: &[u32], q: bool, b: &ExponentVector| {
        let spec = if q { DysonSpec::q(a.to_vec()) } else { DysonSpec::classical(a.to_vec()) };
        dyson_coeff_with(&spec, b, limits)
    };
    let got = match case {
        Case::Constant { a, q } => extract(a, *q, &ExponentVector::zero(a.len())),
        Case::Pattern { p, a, q } => extract(a, *q, &p.exponent_vector(a.len())?),
        Case::Stembridge(s) => extract(&vec![s.a; s.n], true, &s.b),
    };
    let got = match got {
        Ok(g) => g,
        Err(e) if e.kind() == ErrorKind::Resource => return Ok(Outcome::Skipped),
        Err(e) => return Err(e),
    };
    let outcome = match case {
        Case::Constant { a, q: false } => compare(case, Ok(QPoly::constant(multinomial(a))), &got),
        Case::Constant { a, q: true } => compare(case, Ok(q_multinomial(a)), &got),
        Case::Pattern { p, a, q: false } => compare(case, thm_coeff(p, a).map(QPoly::constant), &got),
        Case::Pattern { p, a, q: true } => compare(case, conj_coeff(p, a), &got),
        Case::Stembridge(s) => {
            if let Some(bad) = compare(case, stembridge_coeff(s), &got) {
                Some(bad)
            } else if let Some(p) = s.overlap_pattern() {
                return Ok(
                    compare(case, conj_coeff(&p, &vec![s.a; s.n]), &got).unwrap_or(Outcome::Pass { overlap: true })
                );
            } else {
                None
            }
        }
    };
    Ok(outcome.unwrap_or(Outcome::Pass { overlap: false }))
}

/// Runs `target` over `grid` in parallel on the current rayon pool.
pub fn run_verify(target: VerifyTarget, grid: &GridSpec, limits: &Limits) -> Result<VerifyReport> {
    grid.validate(target)?;
    let mut cases = enumerate(target, grid);
    let mut skipped = 0;
    if let Some(budget) = grid.budget {
        if cases.len() > budget {
            skipped = cases.len() - budget;
            cases.truncate(budget);
        }
    }
    let outcomes: Vec<Outcome> = cases.par_iter().map(|c| run_case(c, limits)).collect::<Result<_>>()?;

    let mut report = VerifyReport {
        target,
        grid: grid.clone(),
        cases: cases.len(),
        passed: 0,
        skipped,
        incomplete: false,
        per_n: BTreeMap::new(),
        l_coverage: BTreeMap::new(),
        m_coverage: BTreeMap::new(),
        overlap_checked: 0,
        mismatches: Vec::new(),
    };
    if target == VerifyTarget::Conj {
        let kinds = grid.pattern.map_or(PatternKind::ALL.to_vec(), |k| vec![k]);
        for kind in kinds.into_iter().filter(|k| k.min_n() <= grid.n_max) {
            for label in kind.l_branches() {
                report.l_coverage.insert(format!("{kind} {label}"), 0);
            }
            for label in kind.m_branches() {
                report.m_coverage.insert(format!("{kind} {label}"), 0);
            }
        }
    }
    for (case, outcome) in cases.iter().zip(outcomes) {
        match outcome {
            Outcome::Skipped => {
                report.skipped += 1;
                continue;
            }
            Outcome::Mismatch(m) => report.mismatches.push(m),
            Outcome::Pass { overlap } => {
                report.passed += 1;
                report.overlap_checked += overlap as usize;
                if let Case::Pattern { p, q: true, .. } = case {
                    *report.l_coverage.entry(format!("{} {}", p.kind(), p.order_label())).or_default() += 1;
                    if let Some(m) = p.m_label() {
                        *report.m_coverage.entry(format!("{} {m}", p.kind())).or_default() += 1;
                    }
                }
            }
        }
        let n = match case {
            Case::Constant { a, .. } | Case::Pattern { a, .. } => a.len(),
            Case::Stembridge(s) => s.n,
        };
        *report.per_n.entry(n).or_default() += 1;
    }
    report.cases -= report.skipped - skipped;
    report.incomplete = report.skipped > 0;
    Ok(report)
}
