mod request;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qdyson_core::verify::parse_range;
use qdyson_core::{
    DysonSpec, Error, ExponentVector, GridSpec, IndexPattern, Limits, Mode, PatternKind, SamplePlan, Skeleton,
    StembridgeReading, StembridgeSpec, VerifyTarget,
};

use request::{error_output, EvalInput, Output, Request};
use store::{RunRecord, Store};

#[derive(Parser)]
#[command(name = "qdyson", version, about = "Coefficients of the Dyson and q-Dyson products")]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Cap on live partial terms during extraction.
    #[arg(long, global = true)]
    limit_terms: Option<usize>,
    /// Run store directory.
    #[arg(long, global = true, env = "QDYSON_STORE", default_value = "qdyson-runs")]
    store: PathBuf,
    /// Do not record this run.
    #[arg(long, global = true)]
    no_store: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract one coefficient of the product.
    Coeff(CoeffArgs),
    /// Compare closed forms with extraction over a parameter grid.
    Verify(VerifyArgs),
    /// Fit the q-exponents of a coefficient pattern.
    Fit(FitArgs),
    /// Evaluate Stembridge's equal-parameter formula.
    Stembridge(StembridgeArgs),
    /// Evaluate a closed form given as JSON.
    Eval(EvalArgs),
    /// Summarize stored runs, optionally replaying them.
    Report(ReportArgs),
}

#[derive(Args)]
struct CoeffArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Exponents, e.g. `1,2,1`.
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<u32>>,
    /// Target monomial exponents, e.g. `1,-1,0`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<i32>>,
    /// Use the q-Dyson product (default: classical).
    #[arg(long)]
    q: bool,
    /// JSON request `{"n":..,"a":[..],"mode":"q","b":[..]}`, inline or a file path.
    #[arg(long, conflicts_with_all = ["n", "a", "b", "q"])]
    spec: Option<String>,
    /// Also print a product-of-brackets factorization when one exists.
    #[arg(long)]
    factor: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_parser = parse_target)]
    target: VerifyTarget,
    /// Range of n, e.g. `2..4`.
    #[arg(long, default_value = "1..3")]
    n: String,
    /// Range of every aᵢ, e.g. `0..3`.
    #[arg(long, default_value = "0..3")]
    a: String,
    /// Restrict thm/conj to one pattern.
    #[arg(long, value_parser = parse_kind)]
    pattern: Option<PatternKind>,
    #[arg(long)]
    rho: Option<usize>,
    #[arg(long)]
    tau: Option<usize>,
    /// Subsample each (n, pattern) cell to at most this many cases.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on total extractions.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitKind {
    #[value(name = "1m1")]
    OneOne,
    #[value(name = "2m1m1")]
    TwoOneOne,
    #[value(name = "11m1m1")]
    FourIndex,
    General,
}

#[derive(Args)]
struct FitArgs {
    kind: FitKind,
    #[arg(long)]
    n: Option<usize>,
    /// Fit every admissible index tuple and print the table.
    #[arg(long)]
    all_pairs: bool,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    u: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    indices: Option<Vec<usize>>,
    /// Target exponents for a general fit.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<i32>>,
    /// Skeleton JSON file for a general fit.
    #[arg(long)]
    skeleton: Option<PathBuf>,
    /// Base value of the unit-bump sample plan.
    #[arg(long)]
    base: Option<u32>,
}

#[derive(Args)]
struct StembridgeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    a: u32,
    #[arg(long)]
    rho: usize,
    #[arg(long)]
    tau: usize,
    /// Target exponents; every admissible b when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<i32>>,
    /// Evaluate the identity as printed rather than the corrected form.
    #[arg(long)]
    printed: bool,
    /// Compare with extraction.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// `{"pattern":"2m1m1","indices":[1,2,3],"n":3,"a":[1,1,1]}`, inline or a file path.
    input: String,
}

#[derive(Args)]
struct ReportArgs {
    /// Re-execute every record and compare outputs.
    #[arg(long)]
    check: bool,
}

fn parse_target(s: &str) -> Result<VerifyTarget, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<PatternKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read_json_arg(arg: &str) -> Result<String, Error> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::InvalidInput(format!("cannot read `{arg}`: {e}")))
    }
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bad JSON: {e}")))
}

fn check_n(n: Option<usize>, len: usize, what: &str) -> Result<(), Error> {
    match n {
        Some(n) if n != len => Err(Error::InvalidInput(format!("--{what} has {len} entries but --n is {n}"))),
        _ => Ok(()),
    }
}

fn build_request(cmd: Command) -> Result<Request, Error> {
    match cmd {
        Command::Coeff(c) => {
            if let Some(spec) = c.spec {
                let req: qdyson_core::dyson::CoeffRequest = from_json(&read_json_arg(&spec)?)?;
                return Ok(Request::Coeff { spec: req.spec, b: req.b, factor: c.factor });
            }
            let a = c.a.ok_or_else(|| Error::InvalidInput("--a is required".into()))?;
            check_n(c.n, a.len(), "a")?;
            let n = a.len();
            let b = c.b.unwrap_or_else(|| vec![0; n]);
            check_n(Some(n), b.len(), "b")?;
            let mode = if c.q { Mode::Q } else { Mode::Classical };
            Ok(Request::Coeff { spec: DysonSpec::new(a, mode), b: ExponentVector::new(b), factor: c.factor })
        }
        Command::Verify(v) => {
            let (n_lo, n_hi) = parse_range(&v.n)?;
            let mut grid = GridSpec::new((n_lo as usize, n_hi as usize), parse_range(&v.a)?);
            grid.pattern = v.pattern;
            grid.rho = v.rho;
            grid.tau = v.tau;
            grid.sample = v.sample;
            grid.seed = v.seed;
            grid.budget = v.budget;
            grid.validate(v.target)?;
            Ok(Request::Verify { target: v.target, grid })
        }
        Command::Fit(f) => build_fit(f),
        Command::Stembridge(s) => {
            let reading = if s.printed { StembridgeReading::AsPrinted } else { StembridgeReading::Corrected };
            let specs = match s.b {
                Some(b) => vec![StembridgeSpec::new(s.n, s.a, ExponentVector::new(b), s.rho, s.tau)?],
                None => {
                    let all = StembridgeSpec::admissible_b(s.n, s.rho, s.tau);
                    if all.is_empty() {
                        return Err(Error::InvalidInput("no admissible b for these n, rho, tau".into()));
                    }
                    all.into_iter().map(|b| StembridgeSpec::new(s.n, s.a, b, s.rho, s.tau)).collect::<Result<_, _>>()?
                }
            };
            Ok(Request::Stembridge { specs, reading, check: s.check })
        }
        Command::Eval(e) => {
            let input: EvalInput = from_json(&read_json_arg(&e.input)?)?;
            check_n(input.n, input.a.len(), "a")?;
            input.pattern.validate(input.a.len())?;
            Ok(Request::Eval { pattern: input.pattern, a: input.a, mode: input.mode })
        }
        Command::Report(_) => unreachable!("report is handled separately"),
    }
}

fn build_fit(f: FitArgs) -> Result<Request, Error> {
    let kind = match f.kind {
        FitKind::OneOne => Some(PatternKind::OneOne),
        FitKind::TwoOneOne => Some(PatternKind::TwoOneOne),
        FitKind::FourIndex => Some(PatternKind::OneOneOneOne),
        FitKind::General => None,
    };
    let (patterns, n, b, skeleton) = match kind {
        Some(kind) => {
            let n = f.n.ok_or_else(|| Error::InvalidInput("--n is required".into()))?;
            let patterns = if f.all_pairs {
                IndexPattern::all(kind, n)
            } else {
                let idx = match f.indices {
                    Some(idx) => idx,
                    None => [f.r, f.s, f.t, f.u].into_iter().flatten().collect(),
                };
                if idx.len() != kind.arity() {
                    return Err(Error::InvalidInput(format!(
                        "{kind} needs {} indices (--r --s{}) or --all-pairs",
                        kind.arity(),
                        [" --t", " --t --u"].get(kind.arity().saturating_sub(3)).copied().unwrap_or("")
                    )));
                }
                let p = IndexPattern::new(kind, &idx)?;
                p.validate(n)?;
                vec![p]
            };
            (patterns, n, None, None)
        }
        None => {
            let b = ExponentVector::new(f.b.ok_or_else(|| Error::InvalidInput("--b is required".into()))?);
            check_n(f.n, b.len(), "b")?;
            let path = f.skeleton.ok_or_else(|| Error::InvalidInput("--skeleton is required".into()))?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            let skeleton: Skeleton = from_json(&text)?;
            (Vec::new(), b.len(), Some(b), Some(skeleton))
        }
    };
    let plan = f.base.map(|base| SamplePlan::unit_bumps(n, base));
    if let Some(plan) = &plan {
        plan.validate()?;
    }
    Ok(Request::Fit { patterns, n, b, skeleton, plan, table: f.all_pairs })
}

fn emit(out: &Output, json: bool) {
    if json {
        println!("{}", out.json);
    } else if out.json.get("error").is_some() {
        eprintln!("{}", out.text);
    } else {
        println!("{}", out.text);
    }
}

fn report(store: &Store, check: bool, json: bool) -> i32 {
    let records = match store.load() {
        Ok(r) => r,
        Err(e) => {
            emit(&error_output(&Error::InvalidInput(e.to_string())), json);
            return 4;
        }
    };
    let mut rows = Vec::new();
    let mut mismatched = 0;
    for (k, rec) in records.iter().enumerate() {
        let mut row = json!({
            "index": k, "timestamp": rec.timestamp, "command": rec.command,
            "exit_code": rec.exit_code, "elapsed_ms": rec.elapsed_ms,
        });
        if check {
            let replay = rec.input.execute(&rec.limits);
            let same = replay.json == rec.output && replay.exit == rec.exit_code;
            mismatched += !same as usize;
            row["reproduced"] = json!(same);
        }
        rows.push(row);
    }
    if json {
        println!("{}", json!({"records": rows, "mismatched": mismatched}));
    } else {
        for r in &rows {
            let tail = match r.get("reproduced").and_then(|v| v.as_bool()) {
                Some(true) => "  reproduced",
                Some(false) => "  NOT REPRODUCED",
                None => "",
            };
            println!(
                "{:>4}  {:<10} exit {}  {} ms{tail}",
                r["index"],
                r["command"].as_str().unwrap_or(""),
                r["exit_code"],
                r["elapsed_ms"]
            );
        }
        println!(
            "{} records{}",
            rows.len(),
            if check { format!(", {mismatched} not reproduced") } else { String::new() }
        );
    }
    if mismatched > 0 {
        1
    } else {
        0
    }
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let mut limits = Limits::default();
    if let Some(t) = cli.limit_terms {
        limits.max_live_terms = t;
    }
    let store = Store::new(&cli.store);
    if let Command::Report(r) = &cli.command {
        return report(&store, r.check, cli.json);
    }
    let request = match build_request(cli.command) {
        Ok(r) => r,
        Err(e) => {
            let out = error_output(&e);
            emit(&out, cli.json);
            return out.exit;
        }
    };
    let start = Instant::now();
    let out = request.execute(&limits);
    let elapsed = start.elapsed().as_millis() as u64;
    emit(&out, cli.json);
    if !cli.no_store {
        let rec = RunRecord::new(request, limits, out.json, out.exit, elapsed);
        if let Err(e) = store.append(&rec) {
            eprintln!("warning: could not write run record: {e}");
        }
    }
    out.exit
}

fn main() -> ExitCode {
    ExitCode::from(run() as u8)
}
