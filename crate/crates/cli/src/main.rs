mod args;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use args::*;
use orlicz_core::classify::{
    classify_function, classify_lp, classify_orlicz_with, ClassifyOptions, IndexInput,
};
use orlicz_core::embed_gauss::{Degree, GaussEmbedding, GaussParams};
use orlicz_core::embed_tent::{embed_vector, TentFamilyParams};
use orlicz_core::funcdsl::{parse, FunctionSpec, GridSpec, OrliczFunction, ValidateOptions};
use orlicz_core::harness::{
    run_distortion, small_distance_check, DistortionReport, Embedding, GaussStackedEmbedding, Generator,
    IdentityLp, MazurEmbedding, SamplePlan, TentEmbedding,
};
use orlicz_core::indices::{
    basis_criterion, cotype, default_q, estimate_c, estimate_indices, small_scale_ratio_limit, small_scale_ratios,
    DyadicGrid,
};
use orlicz_core::mazur::{check_mazur_bounds, mazur_map, MazurParams};
use orlicz_core::moduli::ModulusPair;
use orlicz_core::space::{luxemburg_norm, SparseVector};
use orlicz_core::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERIC: u8 = 3;

/// A failed run: message for stderr and the exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::InvalidFunction(_)
            | Error::InvalidParameter(_)
            | Error::InvalidVector(_)
            | Error::NotOnSphere { .. }
            | Error::QNotAboveBeta { .. } => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

/// What a command produced: the JSON result, optional CSV body, exit code.
struct Output {
    result: Value,
    csv: Option<String>,
    seed: Option<u64>,
    code: u8,
}

impl Output {
    fn ok(result: impl Serialize) -> Self {
        Self { result: to_value(result), csv: None, seed: None, code: 0 }
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or_else(|e| json!({ "serialization_error": e.to_string() }))
}

fn load_function(text: &str) -> Result<OrliczFunction<f64>, Failure> {
    Ok(OrliczFunction::from_spec_str(text, &ValidateOptions::default())?)
}

fn load_vector(text: &str) -> Result<SparseVector<f64>, Failure> {
    let t = text.trim();
    let raw = if t.starts_with('[') || t.starts_with('{') {
        t.to_string()
    } else {
        fs::read_to_string(t).map_err(|e| usage(format!("cannot read vector file `{t}`: {e}")))?
    };
    let v: Value = serde_json::from_str(&raw).map_err(|e| usage(format!("vector is not valid JSON: {e}")))?;
    let v = if v.is_array() { json!({ "entries": v }) } else { v };
    serde_json::from_value(v).map_err(|e| usage(e.to_string()))
}

fn parse_index(text: &str) -> Result<IndexInput<f64>, Failure> {
    let t = text.trim();
    let num = |s: &str| -> Result<f64, Failure> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
            x => x.parse().map_err(|_| usage(format!("bad index `{x}`"))),
        }
    };
    let input = match t.split_once(':') {
        Some((lo, hi)) => IndexInput::Bracket { low: num(lo)?, high: num(hi)? },
        None => IndexInput::exact(num(t)?),
    };
    input.check()?;
    Ok(input)
}

fn grid(levels: u32) -> Result<DyadicGrid, Failure> {
    Ok(DyadicGrid::new(levels)?)
}

fn validate(a: &ValidateArgs) -> Result<Output, Failure> {
    let opts = ValidateOptions { grid: GridSpec::new(a.t_min, a.t_max, a.points)?, ..ValidateOptions::default() };
    let spec = match a.f.function.trim() {
        "power_log" => FunctionSpec::PowerLog,
        s => match OrliczFunction::<f64>::from_spec_str(s, &opts) {
            Ok(m) => return Ok(Output::ok(json!({ "valid": true, "function": m.describe(), "details": m }))),
            Err(Error::InvalidFunction(_)) => FunctionSpec::Expr(parse(s)?),
            Err(e) => return Err(e.into()),
        },
    };
    match OrliczFunction::validate_report(spec, &opts) {
        Ok(m) => Ok(Output::ok(json!({ "valid": true, "function": m.describe(), "details": m }))),
        Err(report) => Ok(Output {
            result: json!({ "valid": false, "summary": report.to_string(), "report": report }),
            csv: None,
            seed: None,
            code: EXIT_USAGE,
        }),
    }
}

fn norm(a: &NormArgs) -> Result<Output, Failure> {
    let m = load_function(&a.f.function)?;
    let x = load_vector(&a.vector)?;
    let r = luxemburg_norm(&m, &x)?;
    Ok(Output::ok(json!({ "norm": r.value, "residual": r.residual, "iterations": r.iterations, "function": m.describe() })))
}

fn indices(a: &IndicesArgs) -> Result<Output, Failure> {
    let m = load_function(&a.f.function)?;
    let est = estimate_indices(&m, grid(a.levels)?)?;
    let q = a.q.unwrap_or_else(|| default_q(&est));
    let constant = match estimate_c(&m, q, &est, a.t_max) {
        Ok(c) => to_value(c),
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok(Output::ok(json!({ "indices": est, "cotype": cotype(&est), "constant": constant })))
}

fn basis(a: &FnArgs) -> Result<Output, Failure> {
    let m = load_function(&a.function)?;
    let series = basis_criterion(&m)?;
    let ratios = small_scale_ratios(&m);
    let mut csv = String::from("series,log2_x,value\n");
    for (j, c) in series.log2_ns.iter().zip(&series.cs) {
        csv.push_str(&format!("c_n,{j},{c:e}\n"));
    }
    for (j, r) in ratios.iter().enumerate() {
        csv.push_str(&format!("m_over_t2,-{},{r:e}\n", j + 1));
    }
    let result = json!({
        "basis_criterion": series,
        "small_scale_ratio": { "trend": small_scale_ratio_limit(&m), "t_log2": (1..=ratios.len()).map(|j| -(j as i64)).collect::<Vec<_>>(), "values": ratios },
    });
    Ok(Output { result, csv: Some(csv), seed: None, code: 0 })
}

fn classify(c: &ClassifyCommand) -> Result<Output, Failure> {
    match c {
        ClassifyCommand::Lp { p, q } => Ok(Output::ok(classify_lp(*p, *q)?)),
        ClassifyCommand::Orlicz(a) => {
            let opts = ClassifyOptions { snap_width: a.snap_width };
            let g = grid(a.levels)?;
            let target = match (&a.beta_n, &a.fn_n) {
                (Some(b), _) => parse_index(b)?,
                (None, Some(f)) => IndexInput::from_estimate(&estimate_indices(&load_function(f)?, g)?),
                (None, None) => return Err(usage("give --beta-n or --fn-n")),
            };
            match (&a.beta_m, &a.fn_m) {
                (Some(b), _) => Ok(Output::ok(classify_orlicz_with(parse_index(b)?, target, &opts)?)),
                (None, Some(f)) => Ok(Output::ok(classify_function(&load_function(f)?, target, g, &opts)?)),
                (None, None) => Err(usage("give --beta-m or --fn-m")),
            }
        }
    }
}

fn tent_params(a: &TentArgs) -> Result<TentFamilyParams<f64>, Failure> {
    let m = load_function(&a.f.function)?;
    Ok(TentFamilyParams::from_function(&m, a.p, a.q, grid(a.levels)?, a.t_max)?.with_tail_eps(a.tail_eps)?)
}

fn gauss_params(a: &GaussArgs) -> Result<GaussParams<f64>, Failure> {
    let degree = match a.degree {
        DegreeArg::Fixed => Degree::Fixed(a.k),
        DegreeArg::Adaptive => Degree::Adaptive,
    };
    Ok(GaussParams::new(a.p, a.levels)
        .and_then(|g| g.with_dim(a.dim))
        .and_then(|g| g.with_degree(degree))
        .and_then(|g| g.with_radius(a.radius))
        .and_then(|g| g.with_eps(a.eps_trunc))?)
}

fn embed(c: &EmbedCommand) -> Result<Output, Failure> {
    match c {
        EmbedCommand::Tent { tent, vector } => {
            let params = tent_params(tent)?;
            let x = load_vector(vector)?;
            let fx = embed_vector(&params, &x)?;
            Ok(Output::ok(json!({ "params": params, "moduli": params.moduli(), "image": fx })))
        }
        EmbedCommand::Gauss { gauss, vector } => {
            let e = GaussEmbedding::new(gauss_params(gauss)?)?;
            let x = load_vector(vector)?;
            let fx = e.stacked_embed(&x)?;
            Ok(Output::ok(json!({
                "params": e.params,
                "degrees": e.degrees(),
                "feature_count": e.feature_count(),
                "image": e.keyed(&fx),
            })))
        }
        EmbedCommand::Mazur { mazur, vector } => {
            let params = MazurParams::new(mazur.p, mazur.q)?;
            let x = load_vector(vector)?;
            Ok(Output::ok(json!({ "params": params, "image": mazur_map(&params, &x)? })))
        }
    }
}

fn sphere_constant(params: &MazurParams<f64>, dim: usize, seed: u64) -> Result<f64, Failure> {
    let plan = SamplePlan::new(Generator::Sphere { p: params.p, dim, near_fraction: 0.5, min_log2: -20 }, 4000, seed)?;
    let pairs = (0..plan.count).map(|i| plan.pair(i)).collect::<Result<Vec<_>, _>>()?;
    check_mazur_bounds(params, &pairs)?
        .c_hat
        .ok_or_else(|| Failure { code: EXIT_NUMERIC, message: "no usable pair for the sphere constant".into() })
}

fn sparse_plan(s: &SparseArgs, sample: &SampleArgs) -> Result<SamplePlan<f64>, Failure> {
    Ok(SamplePlan::new(
        Generator::DyadicSparse {
            max_support: s.max_support,
            index_range: s.index_range,
            min_exp: s.min_exp,
            max_exp: s.max_exp,
            perturb_fraction: s.perturb,
        },
        sample.pairs,
        sample.seed,
    )?)
}

fn finish<E: Embedding<f64>>(
    e: &E,
    moduli: &ModulusPair<f64>,
    plan: &SamplePlan<f64>,
    sample: &SampleArgs,
    extra: Value,
    uniform: bool,
) -> Result<Output, Failure> {
    let report: DistortionReport<f64> = run_distortion(e, moduli, plan, sample.tol)?;
    let write = |path: &std::path::Path, f: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| -> Result<(), Failure> {
        let mut buf = Vec::new();
        f(&mut buf).and_then(|_| fs::write(path, &buf)).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
    };
    if let Some(p) = &sample.pairs_csv {
        write(p, &|b| report.write_csv(b))?;
    }
    if let Some(p) = &sample.curves_csv {
        write(p, &|b| report.write_curves_csv(b))?;
    }
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(|e| usage(e.to_string()))?;
    let mut code = report.exit_code() as u8;
    let small = uniform.then(|| small_distance_check(&report, moduli));
    if let Some(s) = &small {
        if !s.passed && code == 0 {
            code = 2;
        }
    }
    let summary = json!({
        "pairs": report.records.len(),
        "failures": report.failures.len(),
        "violations": report.violations.len(),
        "min_lower_slack": report.min_lower_slack,
        "min_upper_slack": report.min_upper_slack,
        "tol": report.tol,
        "small_distance_check": small,
        "exit_code": code,
    });
    Ok(Output {
        result: json!({ "summary": summary, "setup": extra, "moduli": moduli, "report": report }),
        csv: Some(String::from_utf8_lossy(&csv).into_owned()),
        seed: Some(sample.seed),
        code,
    })
}

fn verify(c: &VerifyCommand) -> Result<Output, Failure> {
    match c {
        VerifyCommand::Tent { tent, sparse, sample } => {
            let e = TentEmbedding { params: tent_params(tent)? };
            let plan = sparse_plan(sparse, sample)?;
            let extra = json!({ "params": e.params });
            finish(&e, &e.params.moduli(), &plan, sample, extra, true)
        }
        VerifyCommand::Gauss { gauss, c_hat, min_quarter_log2, max_quarter_log2, sample } => {
            let params = gauss_params(gauss)?;
            let c = match c_hat {
                Some(c) => *c,
                None => sphere_constant(&MazurParams::new(2.0, params.p)?, 8, sample.seed ^ 0x5EED)?,
            };
            if min_quarter_log2 > max_quarter_log2 {
                return Err(usage("--min-quarter-log2 exceeds --max-quarter-log2"));
            }
            let distances: Vec<f64> = (*min_quarter_log2..=*max_quarter_log2).map(|k| (k as f64 / 4.0).exp2()).collect();
            let plan = SamplePlan::new(
                Generator::PairsAtDistance { dim: params.dim, p: 2.0, distances, radius: params.radius },
                sample.pairs,
                sample.seed,
            )?;
            let e = GaussStackedEmbedding { inner: GaussEmbedding::new(params)? };
            let extra = json!({ "params": e.inner.params, "c_hat": c, "degrees": e.inner.degrees() });
            finish(&e, &e.inner.moduli(c), &plan, sample, extra, true)
        }
        VerifyCommand::Mazur { mazur, dim, c_hat, sample } => {
            let params = MazurParams::new(mazur.p, mazur.q)?;
            let c = match c_hat {
                Some(c) => *c,
                None => sphere_constant(&params, *dim, sample.seed ^ 0x5EED)?,
            };
            let plan = SamplePlan::new(Generator::Sphere { p: params.p, dim: *dim, near_fraction: 0.5, min_log2: -20 }, sample.pairs, sample.seed)?;
            let e = MazurEmbedding { params };
            finish(&e, &e.moduli(c), &plan, sample, json!({ "params": params, "c_hat": c }), false)
        }
        VerifyCommand::Identity { p, sparse, sample } => {
            let e = IdentityLp { p: *p };
            let plan = sparse_plan(sparse, sample)?;
            finish(&e, &e.moduli(), &plan, sample, json!({ "p": p }), false)
        }
    }
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Validate(_) => "validate".into(),
        Command::Norm(_) => "norm".into(),
        Command::Indices(_) => "indices".into(),
        Command::BasisCriterion(_) => "basis-criterion".into(),
        Command::Classify(ClassifyCommand::Lp { .. }) => "classify lp".into(),
        Command::Classify(ClassifyCommand::Orlicz(_)) => "classify orlicz".into(),
        Command::Embed(e) => format!("embed {}", match e {
            EmbedCommand::Tent { .. } => "tent",
            EmbedCommand::Gauss { .. } => "gauss",
            EmbedCommand::Mazur { .. } => "mazur",
        }),
        Command::Verify(v) => format!("verify {}", match v {
            VerifyCommand::Tent { .. } => "tent",
            VerifyCommand::Gauss { .. } => "gauss",
            VerifyCommand::Mazur { .. } => "mazur",
            VerifyCommand::Identity { .. } => "identity",
        }),
    }
}

fn threads() -> Result<Option<usize>, Failure> {
    match std::env::var("ORLICZ_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| usage(format!("ORLICZ_THREADS must be a positive integer, got `{v}`")))?;
            if n == 0 {
                return Err(usage("ORLICZ_THREADS must be positive"));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| usage(format!("cannot size the thread pool: {e}")))?;
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn render(cli: &Cli, out: &Output, threads: Option<usize>) -> Result<String, Failure> {
    let header = json!({
        "tool": "orlicz",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(&cli.command),
        "config": to_value(&cli.command),
        "format": cli.format,
        "seed": out.seed,
        "threads": threads.unwrap_or_else(rayon::current_num_threads),
    });
    match cli.format {
        Format::Json => {
            let doc = json!({ "header": header, "result": out.result });
            Ok(serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n")
        }
        Format::Csv => {
            let body = out.csv.as_ref().ok_or_else(|| usage(format!("`{}` has no CSV output", command_name(&cli.command))))?;
            Ok(format!("# {}\n{body}", serde_json::to_string(&header).expect("JSON values serialize")))
        }
    }
}

fn run(cli: &Cli) -> Result<(String, u8), Failure> {
    let threads = threads()?;
    let out = match &cli.command {
        Command::Validate(a) => validate(a)?,
        Command::Norm(a) => norm(a)?,
        Command::Indices(a) => indices(a)?,
        Command::BasisCriterion(a) => basis(a)?,
        Command::Classify(c) => classify(c)?,
        Command::Embed(c) => embed(c)?,
        Command::Verify(c) => verify(c)?,
    };
    Ok((render(cli, &out, threads)?, out.code))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok((text, code)) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, text.as_bytes()),
                None => std::io::stdout().lock().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
