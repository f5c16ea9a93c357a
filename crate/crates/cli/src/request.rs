use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use qdyson_core::closedform::{conj_coeff, stembridge_coeff_with, thm_coeff};
use qdyson_core::dyson::dyson_coeff_with;
use qdyson_core::fitting::{fit_general_with, fit_pattern_with};
use qdyson_core::qpoly::qfactor;
use qdyson_core::verify::run_verify;
use qdyson_core::{
    DysonSpec, Error, ErrorKind, ExponentVector, FitResult, GridSpec, IndexPattern, Limits, Mode, QPoly, SamplePlan,
    Skeleton, StembridgeReading, StembridgeSpec, VerifyTarget,
};

/// A fully resolved command, as stored in run records and replayed by
/// `report --check`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Request {
    Coeff {
        spec: DysonSpec,
        b: ExponentVector,
        #[serde(default)]
        factor: bool,
    },
    Verify {
        target: VerifyTarget,
        grid: GridSpec,
    },
    Fit {
        /// Named patterns to fit; empty for a general fit.
        #[serde(default)]
        patterns: Vec<IndexPattern>,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<ExponentVector>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        skeleton: Option<Skeleton>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        plan: Option<SamplePlan>,
        /// Render as `[indices], L[, M]` rows.
        #[serde(default)]
        table: bool,
    },
    Stembridge {
        specs: Vec<StembridgeSpec>,
        #[serde(default)]
        reading: StembridgeReading,
        #[serde(default)]
        check: bool,
    },
    Eval {
        pattern: IndexPattern,
        a: Vec<u32>,
        #[serde(default = "default_mode")]
        mode: Mode,
    },
}

fn default_mode() -> Mode {
    Mode::Q
}

/// Closed-form evaluation input: `{"pattern":"2m1m1","indices":[1,2,3],"n":3,"a":[1,1,1]}`.
#[derive(Clone, Debug, Deserialize)]
pub struct EvalInput {
    #[serde(flatten)]
    pub pattern: IndexPattern,
    pub n: Option<usize>,
    pub a: Vec<u32>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
}

pub struct Output {
    pub json: Value,
    pub text: String,
    pub exit: i32,
}

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Mismatch => 1,
        ErrorKind::Ansatz => 2,
        ErrorKind::Resource => 3,
        ErrorKind::Invalid => 4,
    }
}

pub fn error_output(e: &Error) -> Output {
    let kind = match e.kind() {
        ErrorKind::Mismatch => "mismatch",
        ErrorKind::Ansatz => "ansatz",
        ErrorKind::Resource => "resource",
        ErrorKind::Invalid => "invalid",
    };
    Output {
        json: json!({"error": {"kind": kind, "message": e.to_string()}}),
        text: format!("error: {e}"),
        exit: exit_code(e.kind()),
    }
}

impl Request {
    pub fn name(&self) -> &'static str {
        match self {
            Request::Coeff { .. } => "coeff",
            Request::Verify { .. } => "verify",
            Request::Fit { .. } => "fit",
            Request::Stembridge { .. } => "stembridge",
            Request::Eval { .. } => "eval",
        }
    }

    pub fn execute(&self, limits: &Limits) -> Output {
        match self.run(limits) {
            Ok(out) => out,
            Err(e) => error_output(&e),
        }
    }

    fn run(&self, limits: &Limits) -> Result<Output, Error> {
        match self {
            Request::Coeff { spec, b, factor } => {
                let c = dyson_coeff_with(spec, b, limits)?;
                let mut json = json!({"coeff": c.to_string()});
                let mut text = c.to_string();
                if *factor {
                    if let Some(f) = qfactor(&c)? {
                        json["factored"] = Value::String(f.to_string());
                        text = format!("{text}\n= {f}");
                    }
                }
                Ok(Output { json, text, exit: 0 })
            }
            Request::Verify { target, grid } => {
                let report = run_verify(*target, grid, limits)?;
                let exit = if report.ok() { 0 } else { 1 };
                Ok(Output { json: to_json(&report), text: report.to_string().trim_end().to_string(), exit })
            }
            Request::Fit { patterns, n, b, skeleton, plan, table } => {
                let fits: Vec<FitResult> = if patterns.is_empty() {
                    let b = b.as_ref().ok_or_else(|| Error::InvalidInput("a general fit needs b".into()))?;
                    let skeleton = skeleton
                        .as_ref()
                        .ok_or_else(|| Error::InvalidInput("a general fit needs a skeleton".into()))?;
                    vec![fit_general_with(b, skeleton, plan.as_ref(), limits)?]
                } else {
                    use rayon::prelude::*;
                    patterns
                        .par_iter()
                        .map(|p| fit_pattern_with(p, *n, plan.as_ref(), limits))
                        .collect::<Result<_, _>>()?
                };
                Ok(render_fits(&fits, *table))
            }
            Request::Stembridge { specs, reading, check } => {
                let mut rows = Vec::new();
                let mut text = Vec::new();
                let mut exit = 0;
                for spec in specs {
                    let c = stembridge_coeff_with(spec, *reading)?;
                    let mut row = json!({"b": spec.b, "coeff": c.to_string()});
                    let mut line = format!("{:?}, {c}", spec.b.as_slice());
                    if *check {
                        let got = dyson_coeff_with(&DysonSpec::q(vec![spec.a; spec.n]), &spec.b, limits)?;
                        let agrees = got == c;
                        row["extracted"] = Value::String(got.to_string());
                        row["agrees"] = Value::Bool(agrees);
                        if !agrees {
                            exit = 1;
                            line = format!("{line}  MISMATCH (extracted {got})");
                        }
                    }
                    rows.push(row);
                    text.push(line);
                }
                Ok(Output { json: json!({"coefficients": rows}), text: text.join("\n"), exit })
            }
            Request::Eval { pattern, a, mode } => {
                let c = match mode {
                    Mode::Q => conj_coeff(pattern, a)?,
                    Mode::Classical => QPoly::constant(thm_coeff(pattern, a)?),
                };
                Ok(Output { json: json!({"coeff": c.to_string()}), text: c.to_string(), exit: 0 })
            }
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn render_fits(fits: &[FitResult], table: bool) -> Output {
    let mut lines = Vec::new();
    let mut exit = 0;
    for fit in fits {
        if table {
            lines.push(fit.row());
        } else {
            match fit.relative_m() {
                Some(m) => {
                    lines.push(format!("L = {}", fit.fitted_l));
                    lines.push(format!("M = {m}"));
                }
                None => lines.push(fit.fitted_l.to_string()),
            }
        }
        if fit.retried {
            lines.push("  note: refit with base (3, ..., 3)".into());
        }
        for p in fit.validation.points.iter().filter(|p| !p.ok) {
            exit = 2;
            let what = match &p.error {
                Some(e) => e.clone(),
                None => format!(
                    "predicted L = {}{}, observed L = {:?}{}",
                    p.predicted_l,
                    p.predicted_m.map(|m| format!(", M = {m}")).unwrap_or_default(),
                    p.observed_l,
                    p.observed_m.map(|m| format!(", M = {m}")).unwrap_or_default()
                ),
            };
            lines.push(format!("  validation failed at a = {:?}: {what}", p.a));
        }
    }
    let rows: Vec<String> = fits.iter().map(FitResult::row).collect();
    Output { json: json!({"rows": rows, "fits": fits}), text: lines.join("\n"), exit }
}
