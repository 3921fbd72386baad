//! Acceptance suite: one PASS/FAIL line per criterion, every tolerance pinned below.
//! Runs without the libtest harness so the lines always print.

use std::time::Instant;

use orlicz_core::classify::{
    classify_function, classify_lp, classify_orlicz, ClassifyOptions, IndexInput, OrliczCase, VerdictKind,
};
use orlicz_core::embed_gauss::{gram_min_eigenvalue, phi, block_distance_sq, Degree, GaussEmbedding, GaussParams};
use orlicz_core::embed_tent::{lower_witness, scalar_sandwich_sum, TentFamilyParams};
use orlicz_core::funcdsl::OrliczFunction;
use orlicz_core::harness::{
    run_distortion, small_distance_check, GaussStackedEmbedding, Generator, SamplePlan, TentEmbedding,
};
use orlicz_core::indices::{basis_criterion, estimate_indices, small_scale_ratio_limit, DyadicGrid, Trend};
use orlicz_core::mazur::{check_mazur_bounds, mazur_map, MazurParams};
use orlicz_core::moduli::Modulus;
use orlicz_core::space::{check_lemma_sum_vs_norm, luxemburg_norm, modular_sum, SparseVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LUX_REL: f64 = 1e-10;
const LUX_SECONDS: f64 = 10.0;
const MODULAR_TOL: f64 = 1e-9;
const INDEX_WIDTH_POWER: f64 = 0.05;
const INDEX_WIDTH_LOG: f64 = 0.1;
const INDEX_SECONDS: f64 = 60.0;
const SANDWICH_REL: f64 = 1e-9;
const WITNESS_REL: f64 = 1e-9;
const MAZUR_INVERSE_TOL: f64 = 1e-9;
const MAZUR_UPPER_REL: f64 = 1e-12;
const KERNEL_EPS: f64 = 1e-6;
const GRAM_FLOOR: f64 = -1e-9;
const GAUSS_REL: f64 = 1e-6;
const CLASSIFY_SECONDS: f64 = 5.0;
const BASIS_C40_MAX: f64 = 0.2;
const PIPELINE_SECONDS: f64 = 10.0;

struct Outcome {
    id: u32,
    title: &'static str,
    checks: Vec<(String, bool)>,
}

impl Outcome {
    fn new(id: u32, title: &'static str) -> Self {
        Self { id, title, checks: Vec::new() }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.1)
    }
}

fn random_sparse(rng: &mut ChaCha8Rng) -> SparseVector<f64> {
    let k = rng.gen_range(1..=32);
    let mut idx: Vec<u64> = Vec::with_capacity(k);
    while idx.len() < k {
        let i = rng.gen_range(1..=4096);
        if !idx.contains(&i) {
            idx.push(i);
        }
    }
    SparseVector::from_entries(idx.into_iter().map(|i| {
        let mag = rng.gen_range(-10.0f64..=10.0).exp2();
        (i, if rng.gen() { mag } else { -mag })
    }))
    .unwrap()
}

fn corpus() -> Vec<SparseVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    (0..10_000).map(|_| random_sparse(&mut rng)).collect()
}

fn luxemburg_oracle(corpus: &[SparseVector<f64>]) -> Outcome {
    let mut out = Outcome::new(1, "Luxemburg norm matches closed-form l_p norm");
    let start = Instant::now();
    for p in [1.0, 1.5, 2.0, 3.0] {
        let m = OrliczFunction::power(p).unwrap();
        let mut worst = 0.0f64;
        let mut errors = 0;
        for x in corpus {
            match luxemburg_norm(&m, x) {
                Ok(r) => worst = worst.max((r.value - x.lp_norm(p)).abs() / x.lp_norm(p)),
                Err(_) => errors += 1,
            }
        }
        out.check(format!("p={p}: max rel err {worst:.2e} <= {LUX_REL:e}, {errors} errors"), worst <= LUX_REL && errors == 0);
    }
    let secs = start.elapsed().as_secs_f64();
    out.check(format!("runtime {secs:.2}s < {LUX_SECONDS}s"), secs < LUX_SECONDS);
    out
}

fn modular_and_lemma(corpus: &[SparseVector<f64>]) -> Outcome {
    let mut out = Outcome::new(2, "modular normalization and sum-versus-norm inequalities");
    let functions = [
        OrliczFunction::power(1.0).unwrap(),
        OrliczFunction::power(1.5).unwrap(),
        OrliczFunction::power(2.0).unwrap(),
        OrliczFunction::power(3.0).unwrap(),
        OrliczFunction::power_log(),
    ];
    for m in &functions {
        let (mut worst, mut violations, mut errors) = (0.0f64, 0usize, 0usize);
        for x in corpus {
            match (luxemburg_norm(m, x), check_lemma_sum_vs_norm(m, x)) {
                (Ok(r), Ok(l)) => {
                    worst = worst.max((modular_sum(m, x, r.value) - 1.0).abs());
                    violations += usize::from(!l.holds);
                }
                _ => errors += 1,
            }
        }
        out.check(
            format!("{}: max |sum M(x/rho) - 1| {worst:.2e} <= {MODULAR_TOL:e}, {violations} lemma violations, {errors} errors", m.describe()),
            worst <= MODULAR_TOL && violations == 0 && errors == 0,
        );
    }
    out
}

fn index_recovery() -> Outcome {
    let mut out = Outcome::new(3, "index brackets recover p and the log-damped square");
    let start = Instant::now();
    for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
        let est = estimate_indices(&OrliczFunction::power(p).unwrap(), DyadicGrid::default()).unwrap();
        let ok = est.alpha_contains(p)
            && est.beta_contains(p)
            && est.alpha_width() <= INDEX_WIDTH_POWER
            && est.beta_width() <= INDEX_WIDTH_POWER;
        out.check(
            format!(
                "t^{p}: alpha [{:.5}, {:.5}], beta [{:.5}, {:.5}], widths <= {INDEX_WIDTH_POWER}",
                est.alpha_low, est.alpha_high, est.beta_low, est.beta_high
            ),
            ok,
        );
    }
    let est = estimate_indices(&OrliczFunction::<f64>::power_log(), DyadicGrid::default()).unwrap();
    let ok = est.alpha_contains(2.0)
        && est.beta_contains(2.0)
        && est.alpha_width() <= INDEX_WIDTH_LOG
        && est.beta_width() <= INDEX_WIDTH_LOG;
    out.check(
        format!(
            "power_log: alpha [{:.5}, {:.5}], beta [{:.5}, {:.5}], widths <= {INDEX_WIDTH_LOG}",
            est.alpha_low, est.alpha_high, est.beta_low, est.beta_high
        ),
        ok,
    );
    let secs = start.elapsed().as_secs_f64();
    out.check(format!("runtime {secs:.2}s < {INDEX_SECONDS}s"), secs < INDEX_SECONDS);
    out
}

fn tent_params_power1() -> TentFamilyParams<f64> {
    let m = OrliczFunction::power(1.0).unwrap();
    TentFamilyParams::from_function(&m, 2.0, Some(1.5), DyadicGrid::default(), 1e4).unwrap()
}

fn tent_sandwich() -> Outcome {
    let mut out = Outcome::new(4, "scalar tent sandwich and single-term lower witness");
    let pr = tent_params_power1();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut lower, mut upper, mut witness, mut errors) = (0, 0, 0, 0);
    for _ in 0..10_000 {
        let s: f64 = rng.gen_range(-300.0..300.0);
        let d = rng.gen_range(-16.0f64..=8.0).exp2();
        let t = if rng.gen() { s + d } else { s - d };
        let (Ok(r), Ok(w)) = (scalar_sandwich_sum(&pr, s, t), lower_witness(&pr, s, t)) else {
            errors += 1;
            continue;
        };
        let m = pr.m.eval((s - t).abs());
        lower += usize::from(r.sum < m * (1.0 - SANDWICH_REL) - r.tail_bound);
        upper += usize::from(r.sum > pr.a * m * (1.0 + SANDWICH_REL) + r.tail_bound);
        witness += usize::from(!w.holds(WITNESS_REL));
    }
    out.check(format!("C = {}, A = {:.4}", pr.c, pr.a), pr.c > 0.0);
    out.check(format!("{lower} lower and {upper} upper violations on 10^4 pairs"), lower == 0 && upper == 0);
    out.check(format!("{witness} witness failures, {errors} errors"), witness == 0 && errors == 0);
    out
}

fn sparse_plan(count: usize, seed: u64) -> SamplePlan<f64> {
    SamplePlan::new(
        Generator::DyadicSparse { max_support: 8, index_range: 64, min_exp: -14, max_exp: 3, perturb_fraction: 0.25 },
        count,
        seed,
    )
    .unwrap()
}

fn tent_distortion() -> Outcome {
    let mut out = Outcome::new(5, "tent embedding satisfies its moduli on random sparse pairs");
    let e = TentEmbedding { params: tent_params_power1() };
    let r = run_distortion(&e, &e.params.moduli(), &sparse_plan(1000, 5), None).unwrap();
    out.check(
        format!("t^1, p=2: exit {}, {} violations, {} failures", r.exit_code(), r.violations.len(), r.failures.len()),
        r.exit_code() == 0,
    );
    let m = OrliczFunction::<f64>::power_log();
    let e = TentEmbedding { params: TentFamilyParams::from_function(&m, 3.0, None, DyadicGrid::default(), 1e4).unwrap() };
    let r = run_distortion(&e, &e.params.moduli(), &sparse_plan(1000, 55), None).unwrap();
    out.check(
        format!(
            "power_log, p=3 (q={:.4}, C={:.4}): exit {}, {} violations, {} failures",
            e.params.q,
            e.params.c,
            r.exit_code(),
            r.violations.len(),
            r.failures.len()
        ),
        r.exit_code() == 0,
    );
    out
}

fn sphere_pairs(count: usize, seed: u64, p: f64) -> Vec<(SparseVector<f64>, SparseVector<f64>)> {
    let plan = SamplePlan::new(Generator::Sphere { p, dim: 8, near_fraction: 0.5, min_log2: -20 }, count, seed).unwrap();
    (0..count).map(|i| plan.pair(i).unwrap()).collect()
}

fn mazur() -> Outcome {
    let mut out = Outcome::new(6, "Mazur map upper estimate, inverse and empirical constant");
    let params = MazurParams::new(2.0, 1.0).unwrap();
    let pairs = sphere_pairs(10_000, 6, 2.0);
    let full = check_mazur_bounds(&params, &pairs).unwrap();
    // check_mazur_bounds allows 1e-12 relative slop on the upper side
    out.check(
        format!("upper (p/q = 2) on 10^4 pairs: holds={}, min slack {:.3e}, slop {MAZUR_UPPER_REL:e}", full.upper_holds, full.min_upper_slack),
        full.upper_holds,
    );
    let inv = params.inverse();
    let mut worst = 0.0f64;
    for (x, _) in &pairs {
        let back = mazur_map(&inv, &mazur_map(&params, x).unwrap()).unwrap();
        worst = worst.max(back.sub(x).max_abs());
    }
    out.check(format!("inverse composition max error {worst:.2e} <= {MAZUR_INVERSE_TOL:e}"), worst <= MAZUR_INVERSE_TOL);
    let small = check_mazur_bounds(&params, &pairs[..1000]).unwrap().c_hat.unwrap_or(f64::NAN);
    let big = check_mazur_bounds(&params, &pairs[..4000]).unwrap().c_hat.unwrap_or(f64::NAN);
    let ratio = small / big;
    out.check(format!("C_hat 10^3 = {small:.4}, 4*10^3 = {big:.4}, ratio {ratio:.4} in [1/2, 2]"), (0.5..=2.0).contains(&ratio));
    out
}

fn kernel_identity() -> Outcome {
    let mut out = Outcome::new(7, "Gaussian feature map reproduces 2(1 - exp(-t |x-y|^2))");
    let g = GaussParams::<f64>::new(1.5, 6)
        .and_then(|g| g.with_dim(4))
        .and_then(|g| g.with_degree(Degree::Fixed(12)))
        .and_then(|g| g.with_radius(2.0))
        .and_then(|g| g.with_eps(KERNEL_EPS))
        .unwrap();
    let distances: Vec<f64> = (-8..=2).map(|k| 2f64.powi(k)).collect();
    let plan = SamplePlan::new(Generator::PairsAtDistance { dim: 4, p: 2.0, distances, radius: 2.0 }, 1000, 7).unwrap();
    let pairs: Vec<_> = (0..1000).map(|i| plan.pair(i).unwrap()).collect();
    let mut worst = 0.0f64;
    let mut gram = f64::INFINITY;
    for n in 1..=6 {
        let t = 4f64.powi(-n);
        for (x, y) in &pairs {
            let (a, b) = (phi(&g, t, x).unwrap(), phi(&g, t, y).unwrap());
            let want = 2.0 * -(-t * x.sub(y).l2_norm().powi(2)).exp_m1();
            worst = worst.max((block_distance_sq(&a, &b) - want).abs());
        }
        let points: Vec<_> = pairs.iter().take(60).flat_map(|(x, y)| [x.clone(), y.clone()]).collect();
        gram = gram.min(gram_min_eigenvalue(&points, t));
    }
    out.check(format!("max deviation {worst:.3e} <= 3 eps_trunc = {:.1e}", 3.0 * KERNEL_EPS), worst <= 3.0 * KERNEL_EPS);
    out.check(format!("Gram min eigenvalue {gram:.3e} >= {GRAM_FLOOR:e}"), gram >= GRAM_FLOOR);
    out
}

fn stacked_embedding() -> Outcome {
    let mut out = Outcome::new(8, "stacked l_2 -> l_p embedding two-sided bounds and small-distance check");
    let p = 1.5;
    let mz = MazurParams::new(2.0, p).unwrap();
    let c_hat = check_mazur_bounds(&mz, &sphere_pairs(4000, 8, 2.0)).unwrap().c_hat.unwrap();
    out.check(format!("C_hat = {c_hat:.6} (antipodal value 2^(1-2/p) = {:.6})", 2f64.powf(1.0 - 2.0 / p)), c_hat > 0.0);
    let g = GaussParams::<f64>::new(p, 12)
        .and_then(|g| g.with_dim(2))
        .and_then(|g| g.with_degree(Degree::Adaptive))
        .and_then(|g| g.with_radius(32.0))
        .unwrap();
    let e = GaussStackedEmbedding { inner: GaussEmbedding::new(g).unwrap() };
    let mp = e.inner.moduli(c_hat);
    let want = 2.0 * 2f64.sqrt() / p * (1.0 - 2f64.powi(-12));
    let slope = match mp.rho2 {
        Modulus::Linear { slope } => slope,
        _ => f64::NAN,
    };
    out.check(format!("rho2 slope {slope:.12} = (2 sqrt2/p)(1 - 2^-12) = {want:.12}"), (slope - want).abs() <= 1e-12 * want);
    let distances: Vec<f64> = (-24..=24).map(|k| (k as f64 / 4.0).exp2()).collect();
    let plan = SamplePlan::new(Generator::PairsAtDistance { dim: 2, p: 2.0, distances, radius: 32.0 }, 500, 8).unwrap();
    let r = run_distortion(&e, &mp, &plan, Some(GAUSS_REL)).unwrap();
    out.check(
        format!(
            "500 pairs in [2^-6, 2^6]: exit {}, {} violations, {} failures, min slacks {:.3e} / {:.3e}",
            r.exit_code(),
            r.violations.len(),
            r.failures.len(),
            r.min_lower_slack,
            r.min_upper_slack
        ),
        r.exit_code() == 0,
    );
    let near: Vec<f64> = (-14..=-11).map(|k| 2f64.powi(k)).collect();
    let plan = SamplePlan::new(Generator::PairsAtDistance { dim: 2, p: 2.0, distances: near, radius: 32.0 }, 64, 88).unwrap();
    let r = run_distortion(&e, &mp, &plan, Some(GAUSS_REL)).unwrap();
    let sd = small_distance_check(&r, &mp);
    out.check(
        format!("small-distance check: bucket {:?}, max out {:.3e} < {:.3e}", sd.bucket, sd.max_out, sd.bound),
        sd.passed && r.exit_code() == 0,
    );
    out
}

/// Independent restatement of the four summary rows.
fn rows_firing(m: f64, n: f64) -> usize {
    let one = m < n || (n <= m && m < 2.0) || (m.is_infinite() && n.is_infinite());
    let two = m > 2.0 && n < m;
    let three = n <= m && m == 2.0;
    let four = m > 2.0 && m == n && m.is_finite();
    [one, two, three, four].iter().filter(|&&b| b).count()
}

fn classifier() -> Outcome {
    let mut out = Outcome::new(9, "classifier tables and exhaustiveness");
    let start = Instant::now();
    let lp_rows = [
        (1.5, 2.0, VerdictKind::StrongUniformEmbeds),
        (2.0, 1.0, VerdictKind::StrongUniformEmbeds),
        (3.0, 2.0, VerdictKind::NoCoarseNoUniform),
        (2.0, 2.0, VerdictKind::StrongUniformEmbeds),
    ];
    for (p, q, k) in lp_rows {
        let got = classify_lp(p, q).unwrap().kind;
        out.check(format!("lp ({p}, {q}) -> {got:?}"), got == k);
    }
    let orlicz_rows = [
        (1.5, 1.2, VerdictKind::StrongUniformEmbeds, "1"),
        (3.0, 2.5, VerdictKind::NoCoarseNoUniform, "2"),
        (2.0, 1.5, VerdictKind::NotDeterminedByIndices, "3"),
        (3.0, 3.0, VerdictKind::OpenProblem, "4"),
    ];
    for (m, n, k, case) in orlicz_rows {
        let v = classify_orlicz(IndexInput::exact(m), IndexInput::exact(n)).unwrap().verdict;
        let ok = v.as_ref().is_some_and(|v| v.kind == k && v.case == case);
        out.check(format!("orlicz ({m}, {n}) -> {:?} case {:?}", v.as_ref().map(|v| v.kind), v.as_ref().map(|v| v.case.clone())), ok);
    }
    let axis: Vec<f64> = (0..1000).map(|i| if i == 999 { f64::INFINITY } else { 1.0 + i as f64 / 128.0 }).collect();
    let (mut bad_oracle, mut bad_verdict) = (0usize, 0usize);
    for &m in &axis {
        for &n in &axis {
            bad_oracle += usize::from(rows_firing(m, n) != 1);
            let v = classify_orlicz(IndexInput::exact(m), IndexInput::exact(n)).unwrap();
            bad_verdict += usize::from(v.possible.len() != 1 || v.verdict.is_none());
        }
    }
    out.check(
        format!("10^6-point sweep (2 and the diagonal hit exactly, inf included): {bad_oracle} points without exactly one row, {bad_verdict} without a single verdict"),
        bad_oracle == 0 && bad_verdict == 0,
    );
    let secs = start.elapsed().as_secs_f64();
    out.check(format!("runtime {secs:.2}s < {CLASSIFY_SECONDS}s"), secs < CLASSIFY_SECONDS);
    out
}

fn log_damped_pipeline() -> Outcome {
    let mut out = Outcome::new(10, "log-damped square: indices, basis criterion and verdict");
    let start = Instant::now();
    let m = OrliczFunction::<f64>::power_log();
    let fv = classify_function(&m, IndexInput::exact(1.5), DyadicGrid::default(), &ClassifyOptions::default()).unwrap();
    let ev = &fv.evidence;
    out.check(
        format!("beta bracket [{:.5}, {:.5}] contains 2, width <= {INDEX_WIDTH_LOG}", ev.beta_low, ev.beta_high),
        ev.beta_low <= 2.0 && 2.0 <= ev.beta_high && ev.beta_high - ev.beta_low <= INDEX_WIDTH_LOG,
    );
    let ratio = small_scale_ratio_limit(&m);
    out.check(format!("M(t)/t^2 trend: {ratio}"), ratio == Trend::Vanishing && ev.small_scale_ratio == Trend::Vanishing);
    let basis = basis_criterion(&m).unwrap();
    let decreasing = basis.cs.windows(2).all(|w| w[1] < w[0]);
    out.check(
        format!("basis criterion: {}, strictly decreasing over n = 2^0..2^{}: {decreasing}", basis.trend, basis.log2_ns.last().unwrap()),
        basis.trend == Trend::Vanishing && decreasing,
    );
    let c40 = basis.c_at(40).unwrap();
    out.check(format!("c_(2^40) = {c40:.4} < {BASIS_C40_MAX}"), c40 < BASIS_C40_MAX);
    let bracket = IndexInput::Bracket { low: ev.beta_low, high: ev.beta_high };
    for target in [1.0, 1.5, 2.0] {
        let v = classify_orlicz(bracket, IndexInput::exact(target)).unwrap();
        let kind = v.verdict.as_ref().map(|v| v.kind);
        out.check(
            format!("target beta_N = {target}: {kind:?} (reachable rows {:?})", v.possible.iter().map(|c| c.number()).collect::<Vec<_>>()),
            kind == Some(VerdictKind::NotDeterminedByIndices) && v.possible.contains(&OrliczCase::HilbertBoundary),
        );
    }
    let cites = fv.rationale.contains("symmetric-basis criterion") && fv.no_hilbert_embedding;
    out.check(format!("rationale: {}", fv.rationale), cites && fv.table.verdict.as_ref().is_some_and(|v| v.kind == VerdictKind::NotDeterminedByIndices));
    let secs = start.elapsed().as_secs_f64();
    out.check(format!("runtime {secs:.2}s < {PIPELINE_SECONDS}s"), secs < PIPELINE_SECONDS);
    out
}

fn main() {
    let corpus = corpus();
    let runs: Vec<Box<dyn Fn() -> Outcome>> = vec![
        Box::new(|| luxemburg_oracle(&corpus)),
        Box::new(|| modular_and_lemma(&corpus)),
        Box::new(index_recovery),
        Box::new(tent_sandwich),
        Box::new(tent_distortion),
        Box::new(mazur),
        Box::new(kernel_identity),
        Box::new(stacked_embedding),
        Box::new(classifier),
        Box::new(log_damped_pipeline),
    ];
    let mut failed = Vec::new();
    for run in &runs {
        let start = Instant::now();
        let o = run();
        let verdict = if o.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {:>2}: {} ({:.2}s)", o.id, o.title, start.elapsed().as_secs_f64());
        for (what, ok) in &o.checks {
            println!("    [{}] {what}", if *ok { "ok" } else { "FAIL" });
        }
        if !o.passed() {
            failed.push(o.id);
        }
    }
    println!("acceptance: {} of {} criteria passed", runs.len() - failed.len(), runs.len());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
