//! Benchmark workloads.

use qdyson_core::closedform::conj_coeff;
use qdyson_core::dyson::{brute_force_expand, dyson_coeff};
use qdyson_core::{DysonSpec, ExponentVector, IndexPattern, QPoly};

/// An extraction job: one product and one target monomial.
pub struct Job {
    pub label: String,
    pub spec: DysonSpec,
    pub b: ExponentVector,
}

/// Pattern coefficients at `a = (2, ..., 2)`, the default fitting base.
pub fn pattern_jobs() -> Vec<Job> {
    let cases = [
        (IndexPattern::one_one(1, 2).unwrap(), 4),
        (IndexPattern::one_one(6, 1).unwrap(), 6),
        (IndexPattern::two_one_one(2, 1, 3).unwrap(), 5),
        (IndexPattern::four_index(1, 3, 2, 4).unwrap(), 5),
    ];
    cases
        .into_iter()
        .map(|(p, n)| Job {
            label: format!("{}{p}/n{n}", p.kind()),
            b: p.exponent_vector(n).unwrap(),
            spec: DysonSpec::q(vec![2; n]),
        })
        .collect()
}

/// Small instances where the full expansion is still cheap.
pub fn small_specs() -> Vec<DysonSpec> {
    vec![DysonSpec::q(vec![2, 2, 2]), DysonSpec::q(vec![1, 2, 3]), DysonSpec::q(vec![1, 1, 1, 1])]
}

pub fn extract(job: &Job) -> QPoly {
    dyson_coeff(&job.spec, &job.b).unwrap()
}

/// The same coefficient read off a full expansion.
pub fn extract_brute_force(spec: &DysonSpec, b: &ExponentVector) -> QPoly {
    brute_force_expand(spec).unwrap().coeff(b)
}

pub fn closed_form(p: &IndexPattern, a: &[u32]) -> QPoly {
    conj_coeff(p, a).unwrap()
}
