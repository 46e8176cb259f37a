//! `lemniscate`: length of polynomial lemniscates `{|p| = 1}` from the command line.
//!
//! Exit status: 0 success, 1 a checked assertion failed, 2 usage error,
//! 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod budget;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lemniscate_core::experiments::{random_polynomial, stream_rng};
use lemniscate_core::{
    bounds_report, crofton_lemniscate_length, crofton_length, extremal_search,
    lemniscate_length_trace_with, local_max_experiment, measure, run_criterion, write_polyline_csv,
    Bounds, CountField, ExperimentError, ExperimentReport, Lemniscate, Meta, Method, MethodValue,
    PolyError, Polynomial, CRITERIA,
};
use serde_json::{json, Value};

use budget::Budget;

#[derive(Parser, Debug)]
#[command(
    name = "lemniscate",
    version,
    about = "Length of polynomial lemniscates |p(z)| = 1"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run seed; recorded in every report.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Resolution, e.g. `h=0.003,cells=3000000,rel=1e-4,crofton=grid:1000x1000,starts=8,evals=400`.
    #[arg(long, global = true)]
    budget: Option<String>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Upper limit on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct PolySource {
    /// Inline polynomial `n; re,im; ...` with ascending coefficients.
    #[arg(long, conflicts_with = "poly_file")]
    poly: Option<String>,

    /// File holding a polynomial in the inline format.
    #[arg(long)]
    poly_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Trace,
    Area1,
    Area2,
    Crofton,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Trace => vec![Method::Trace],
            MethodArg::Area1 => vec![Method::Area1],
            MethodArg::Area2 => vec![Method::Area2],
            MethodArg::Crofton => vec![Method::Crofton],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Field {
    /// `{|p| = 1}`
    Modulus,
    /// `{Re p = 0}` inside a disk
    Realpart,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace the lemniscate and report its components.
    Trace {
        #[command(flatten)]
        src: PolySource,
        /// CSV polyline output (`component,x,y`).
        #[arg(long)]
        polyline: Option<PathBuf>,
    },
    /// Length by one or all methods.
    Length {
        #[command(flatten)]
        src: PolySource,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
        /// CSV polyline output; needs the trace method.
        #[arg(long)]
        polyline: Option<PathBuf>,
    },
    /// Check the upper bounds on one polynomial, `z^n - 1`, or K random ones.
    Bounds {
        #[command(flatten)]
        src: PolySource,
        /// Degree; alone it selects `z^n - 1`, with `--random` the degree of the sample.
        #[arg(long)]
        n: Option<usize>,
        /// Number of random polynomials with roots in the disk of radius 1/2.
        #[arg(long)]
        random: Option<usize>,
        /// Length methods to measure.
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
    },
    /// Perturb `z^n - 1` at scale `a` and compare lengths.
    Perturb {
        /// Degree, at least 2.
        #[arg(long)]
        n: usize,
        /// Perturbation size: `|a_k| <= a^k`.
        #[arg(long)]
        a: f64,
        /// Number of random perturbations.
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Multistart search for the longest normalized lemniscate of degree n.
    Search {
        /// Degree, 2 to 6.
        #[arg(long)]
        n: usize,
    },
    /// Crofton line-count length estimate.
    Crofton {
        #[command(flatten)]
        src: PolySource,
        #[arg(long, value_enum, default_value_t = Field::Modulus)]
        field: Field,
        /// Disk radius for `--field realpart`.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Suite name; only `core` exists.
        #[arg(long, default_value = "core")]
        suite: String,
        /// Comma-separated criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Trace { .. } => "trace",
            Command::Length { .. } => "length",
            Command::Bounds { .. } => "bounds",
            Command::Perturb { .. } => "perturb",
            Command::Search { .. } => "search",
            Command::Crofton { .. } => "crofton",
            Command::Verify { .. } => "verify",
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Numerical(_) => "numerical",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => m,
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::BadParameter(m) => CliError::Usage(m),
            ExperimentError::Poly(p) => CliError::Usage(p.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

/// A finished run: the JSON document, whether every assertion held, and
/// human-readable lines for the terminal.
struct Outcome {
    doc: Value,
    passed: bool,
    lines: Vec<String>,
}

struct Ctx {
    seed: u64,
    budget: Budget,
    start: Instant,
}

impl Ctx {
    fn meta(&self) -> Meta {
        Meta {
            seed: self.seed,
            budget: self.budget.length.describe(),
            elapsed_s: self.start.elapsed().as_secs_f64(),
        }
    }
}

fn load_polynomial(src: &PolySource) -> Result<Polynomial, CliError> {
    let text = match (&src.poly, &src.poly_file) {
        (Some(s), None) => s.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?,
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --poly or --poly-file".into(),
            ))
        }
    };
    text.parse()
        .map_err(|e: PolyError| CliError::Usage(e.to_string()))
}

fn write_polyline(lem: &Lemniscate, path: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    write_polyline_csv(&lem.components, &mut w).map_err(io)?;
    w.flush().map_err(io)
}

fn report_value(r: &ExperimentReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

fn method_lines(r: &ExperimentReport) -> Vec<String> {
    let mut lines: Vec<String> = r
        .methods
        .iter()
        .map(|(k, v)| format!("{k:8} {:.8} +- {:.1e}", v.value, v.err))
        .collect();
    lines.extend(r.asserts.iter().map(|a| {
        format!(
            "{} {}: {:.6} vs {:.6}",
            if a.pass { "PASS" } else { "FAIL" },
            a.name,
            a.lhs,
            a.rhs
        )
    }));
    lines
}

fn trace_data(lem: &Lemniscate) -> Value {
    json!({
        "components": lem.components.iter().map(|c| json!({
            "length": c.length,
            "error_estimate": c.error_estimate,
            "closed": c.closed,
            "vertices": c.vertices.len(),
        })).collect::<Vec<_>>(),
        "singular": lem.singular,
        "singular_points": lem.singular_points.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
    })
}

fn cmd_trace(ctx: &Ctx, src: &PolySource, polyline: Option<&Path>) -> Result<Outcome, CliError> {
    let p = load_polynomial(src)?;
    let lem = lemniscate_length_trace_with(&p, &ctx.budget.length.trace)
        .map_err(ExperimentError::from)?;
    if let Some(path) = polyline {
        write_polyline(&lem, path)?;
    }
    let mut methods = std::collections::BTreeMap::new();
    methods.insert(
        "trace".to_string(),
        MethodValue {
            value: lem.total_length,
            err: lem.error_estimate,
        },
    );
    let report = ExperimentReport {
        polynomial: p.to_string(),
        methods,
        bounds: Bounds::for_degree(p.degree()),
        asserts: Vec::new(),
        meta: ctx.meta(),
        data: trace_data(&lem),
    };
    let mut lines = method_lines(&report);
    lines.push(format!(
        "{} component(s), singular {}",
        lem.components.len(),
        lem.singular
    ));
    Ok(Outcome {
        doc: report_value(&report),
        passed: true,
        lines,
    })
}

fn cmd_length(
    ctx: &Ctx,
    src: &PolySource,
    method: MethodArg,
    polyline: Option<&Path>,
) -> Result<Outcome, CliError> {
    let methods = method.methods();
    if polyline.is_some() && !methods.contains(&Method::Trace) {
        return Err(CliError::Usage("--polyline needs the trace method".into()));
    }
    let p = load_polynomial(src)?;
    let mut values = std::collections::BTreeMap::new();
    let mut data = Value::Null;
    for m in methods {
        let v = if m == Method::Trace {
            let lem = lemniscate_length_trace_with(&p, &ctx.budget.length.trace)
                .map_err(ExperimentError::from)?;
            if let Some(path) = polyline {
                write_polyline(&lem, path)?;
            }
            data = trace_data(&lem);
            MethodValue {
                value: lem.total_length,
                err: lem.error_estimate,
            }
        } else {
            measure(&p, m, &ctx.budget.length)?
        };
        values.insert(m.name().to_string(), v);
    }
    let report = ExperimentReport {
        polynomial: p.to_string(),
        methods: values,
        bounds: Bounds::for_degree(p.degree()),
        asserts: Vec::new(),
        meta: ctx.meta(),
        data,
    };
    Ok(Outcome {
        lines: method_lines(&report),
        doc: report_value(&report),
        passed: true,
    })
}

fn cmd_bounds(
    ctx: &Ctx,
    src: &PolySource,
    n: Option<usize>,
    random: Option<usize>,
    method: MethodArg,
) -> Result<Outcome, CliError> {
    let given = src.poly.is_some() || src.poly_file.is_some();
    let polys: Vec<Polynomial> = match (given, n, random) {
        (true, None, None) => vec![load_polynomial(src)?],
        (false, Some(n), None) if n >= 1 => vec![Polynomial::unit_roots(n)],
        (false, Some(n), Some(k)) if n >= 1 && k >= 1 => (0..k as u64)
            .map(|i| random_polynomial(n, 0.5, &mut stream_rng(ctx.seed, i)))
            .collect(),
        _ => {
            return Err(CliError::Usage(
                "give --poly/--poly-file, --n, or --n with --random K (K, n >= 1)".into(),
            ))
        }
    };
    let mut reports = Vec::with_capacity(polys.len());
    let mut lines = Vec::new();
    for p in &polys {
        let mut r = bounds_report(p, &method.methods(), &ctx.budget.length)?;
        r.meta.seed = ctx.seed;
        lines.push(format!(
            "{} {}",
            if r.passed() { "PASS" } else { "FAIL" },
            r.polynomial
        ));
        reports.push(r);
    }
    let passed = reports.iter().all(ExperimentReport::passed);
    let doc = if given || random.is_none() {
        report_value(&reports[0])
    } else {
        Value::Array(reports.iter().map(report_value).collect())
    };
    Ok(Outcome { doc, passed, lines })
}

fn cmd_crofton(
    ctx: &Ctx,
    src: &PolySource,
    field: Field,
    radius: Option<f64>,
) -> Result<Outcome, CliError> {
    let p = load_polynomial(src)?;
    let sampler = ctx.budget.length.sampler;
    let (est, r) = match (field, radius) {
        (Field::Modulus, None) => (
            crofton_lemniscate_length(&p, sampler).map_err(ExperimentError::from)?,
            None,
        ),
        (Field::Realpart, Some(r)) if r > 0.0 => (
            crofton_length(&CountField::RealPart(p.clone()), r, sampler)
                .map_err(ExperimentError::from)?,
            Some(r),
        ),
        (Field::Modulus, Some(_)) => {
            return Err(CliError::Usage(
                "--radius applies to --field realpart".into(),
            ))
        }
        _ => {
            return Err(CliError::Usage(
                "--field realpart needs --radius > 0".into(),
            ))
        }
    };
    let mut methods = std::collections::BTreeMap::new();
    methods.insert(
        "crofton".to_string(),
        MethodValue {
            value: est.value,
            err: est.stderr,
        },
    );
    let report = ExperimentReport {
        polynomial: p.to_string(),
        methods,
        bounds: Bounds::for_degree(p.degree()),
        asserts: Vec::new(),
        meta: ctx.meta(),
        data: json!({
            "field": match field { Field::Modulus => "modulus", Field::Realpart => "realpart" },
            "radius": r,
            "sampler": sampler.to_string(),
            "lines": est.lines,
            "resampled": est.resampled,
            "max_count": est.max_count,
        }),
    };
    Ok(Outcome {
        lines: method_lines(&report),
        doc: report_value(&report),
        passed: true,
    })
}

fn cmd_verify(ctx: &Ctx, suite: &str, only: &[u32]) -> Result<Outcome, CliError> {
    if suite != "core" {
        return Err(CliError::Usage(format!(
            "unknown suite `{suite}` (available: core)"
        )));
    }
    if let Some(bad) = only.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(CliError::Usage(format!("unknown criterion {bad}")));
    }
    let mut results = Vec::new();
    let mut lines = Vec::new();
    for &(id, _) in CRITERIA
        .iter()
        .filter(|c| only.is_empty() || only.contains(&c.0))
    {
        let r = run_criterion(id, ctx.seed);
        let line = r.line();
        println!("{line}");
        lines.push(line);
        results.push(r);
    }
    let passed = results.iter().all(|r| r.pass);
    let doc = json!({
        "suite": suite,
        "seed": ctx.seed,
        "passed": passed,
        "criteria": results,
        "meta": { "seed": ctx.seed, "budget": "suite defaults", "elapsed_s": ctx.start.elapsed().as_secs_f64() },
    });
    // lines were streamed as the criteria finished
    Ok(Outcome {
        doc,
        passed,
        lines: Vec::new(),
    })
}

fn run(cli: &Cli, ctx: &Ctx) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Trace { src, polyline } => cmd_trace(ctx, src, polyline.as_deref()),
        Command::Length {
            src,
            method,
            polyline,
        } => cmd_length(ctx, src, *method, polyline.as_deref()),
        Command::Bounds {
            src,
            n,
            random,
            method,
        } => cmd_bounds(ctx, src, *n, *random, *method),
        Command::Perturb { n, a, trials } => {
            let r = local_max_experiment(*n, *a, *trials, ctx.seed, &ctx.budget.length.trace)?;
            Ok(Outcome {
                passed: r.passed(),
                lines: method_lines(&r),
                doc: report_value(&r),
            })
        }
        Command::Search { n } => {
            if !(2..=6).contains(n) {
                return Err(CliError::Usage("search supports 2 <= n <= 6".into()));
            }
            let r = extremal_search(*n, ctx.budget.search, ctx.seed, &ctx.budget.length.trace)?;
            let mut lines = method_lines(&r);
            lines.insert(0, format!("best {}", r.polynomial));
            Ok(Outcome {
                passed: r.passed(),
                lines,
                doc: report_value(&r),
            })
        }
        Command::Crofton { src, field, radius } => cmd_crofton(ctx, src, *field, *radius),
        Command::Verify { suite, only } => cmd_verify(ctx, suite, only),
    }
}

fn write_doc(doc: &Value, out: Option<&Path>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(doc).expect("json value serializes");
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let start = Instant::now();
    let command = cli.command.name();

    let setup = || -> Result<Budget, CliError> {
        if let Some(t) = cli.threads {
            if t == 0 {
                return Err(CliError::Usage("--threads must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
        }
        Budget::parse(cli.budget.as_deref(), cli.seed).map_err(CliError::Usage)
    };

    let result = setup().and_then(|budget| {
        run(
            &cli,
            &Ctx {
                seed: cli.seed,
                budget,
                start,
            },
        )
    });
    match result {
        Ok(outcome) => {
            let quiet_stdout = cli.out.is_none() && command != "verify";
            if !quiet_stdout {
                for line in &outcome.lines {
                    println!("{line}");
                }
            }
            if command != "verify" || cli.out.is_some() {
                if let Err(e) = write_doc(&outcome.doc, cli.out.as_deref()) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error ({}): {}", e.kind(), e.message());
            if let Some(path) = &cli.out {
                let doc = json!({
                    "command": command,
                    "error": { "kind": e.kind(), "message": e.message(), "exit_code": e.code() },
                    "meta": { "seed": cli.seed, "budget": cli.budget.clone().unwrap_or_default(), "elapsed_s": start.elapsed().as_secs_f64() },
                });
                let _ = write_doc(&doc, Some(path));
            }
            ExitCode::from(e.code())
        }
    }
}
