use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::embeddings::Embedding;
use super::plan::SamplePlan;
use crate::error::Result;
use crate::moduli::ModulusPair;
use crate::scalar::{lit, to_f64, Real};

/// Added to the embedding's own error bound when no tolerance is given.
pub const BASE_TOL: f64 = 1e-9;
/// Inputs below this distance feed the uniform-continuity check.
pub const SMALL_DISTANCE_LOG2: i32 = -10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct PairRecord<T> {
    pub index: usize,
    pub d_in: T,
    pub d_out: T,
    pub rho1: T,
    pub rho2: T,
    /// `d_out - ρ1(d_in)`.
    pub slack_lo: T,
    /// `ρ2(d_in) - d_out`.
    pub slack_hi: T,
}

impl<T: Real> PairRecord<T> {
    /// A side fails when its slack is below `-tol * max(1, ρ)`.
    pub fn violates(&self, tol: T) -> (bool, bool) {
        (
            self.slack_lo < -tol * self.rho1.max(T::one()),
            self.slack_hi < -tol * self.rho2.max(T::one()),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairFailure {
    pub index: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Violation<T> {
    pub record: PairRecord<T>,
    pub lower: bool,
    pub upper: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct DistortionReport<T> {
    pub embedding: String,
    pub rho1: String,
    pub rho2: String,
    pub plan: SamplePlan<T>,
    pub tol: T,
    pub records: Vec<PairRecord<T>>,
    pub failures: Vec<PairFailure>,
    pub min_lower_slack: T,
    pub min_upper_slack: T,
    pub violations: Vec<Violation<T>>,
    pub curves: Vec<Bucket<T>>,
}

impl<T: Real> DistortionReport<T> {
    /// 0 without violations or failures, 2 on a violation, 3 on evaluation failures only.
    pub fn exit_code(&self) -> i32 {
        if !self.violations.is_empty() {
            2
        } else if !self.failures.is_empty() {
            3
        } else {
            0
        }
    }

    /// One row per pair: `index,d_in,d_out,rho1,rho2,slack_lo,slack_hi`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,d_in,d_out,rho1,rho2,slack_lo,slack_hi")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.index, r.d_in, r.d_out, r.rho1, r.rho2, r.slack_lo, r.slack_hi
            )?;
        }
        Ok(())
    }

    /// One row per bucket of the empirical moduli.
    pub fn write_curves_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "log2_bucket,count,in_min,in_max,out_min,out_max,lower_envelope,upper_envelope")?;
        for b in &self.curves {
            writeln!(
                w,
                "{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
                b.log2_bucket, b.count, b.in_min, b.in_max, b.out_min, b.out_max, b.lower_envelope, b.upper_envelope
            )?;
        }
        Ok(())
    }
}

/// Evaluates `ρ1(d_in) <= d_out <= ρ2(d_in)` on every pair of the plan. Pairs run in
/// parallel; failures are recorded per pair. `tol` defaults to the embedding's error
/// bound plus [`BASE_TOL`].
pub fn run_distortion<T: Real, E: Embedding<T>>(
    embedding: &E,
    moduli: &ModulusPair<T>,
    plan: &SamplePlan<T>,
    tol: Option<T>,
) -> Result<DistortionReport<T>> {
    plan.check()?;
    let tol = tol.unwrap_or_else(|| embedding.error_bound() + lit(BASE_TOL));
    let rows: Vec<std::result::Result<PairRecord<T>, PairFailure>> = (0..plan.count)
        .into_par_iter()
        .map(|index| {
            let eval = || -> Result<PairRecord<T>> {
                let (x, y) = plan.pair(index)?;
                let d_in = embedding.source_distance(&x, &y)?;
                let d_out = embedding.image_distance(&embedding.embed(&x)?, &embedding.embed(&y)?);
                let (rho1, rho2) = moduli.bounds(d_in);
                Ok(PairRecord { index, d_in, d_out, rho1, rho2, slack_lo: d_out - rho1, slack_hi: rho2 - d_out })
            };
            eval().map_err(|e| PairFailure { index, message: e.to_string() })
        })
        .collect();
    let mut records = Vec::with_capacity(rows.len());
    let mut failures = Vec::new();
    for r in rows {
        match r {
            Ok(rec) => records.push(rec),
            Err(f) => failures.push(f),
        }
    }
    let mut violations = Vec::new();
    let (mut min_lo, mut min_hi) = (T::infinity(), T::infinity());
    for r in &records {
        min_lo = min_lo.min(r.slack_lo);
        min_hi = min_hi.min(r.slack_hi);
        let (lower, upper) = r.violates(tol);
        if lower || upper {
            violations.push(Violation { record: *r, lower, upper });
        }
    }
    let curves = bucket_curves(&records);
    Ok(DistortionReport {
        embedding: embedding.name(),
        rho1: moduli.rho1.describe(),
        rho2: moduli.rho2.describe(),
        plan: plan.clone(),
        tol,
        records,
        failures,
        min_lower_slack: min_lo,
        min_upper_slack: min_hi,
        violations,
        curves,
    })
}

/// Input distances in `[2^b, 2^{b+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Bucket<T> {
    pub log2_bucket: i32,
    pub count: usize,
    pub in_min: T,
    pub in_max: T,
    pub out_min: T,
    pub out_max: T,
    /// `min d_out` over all pairs with `d_in` in this bucket or above: nondecreasing.
    pub lower_envelope: T,
    /// `max d_out` over all pairs with `d_in` in this bucket or below: nondecreasing.
    pub upper_envelope: T,
}

fn bucket_curves<T: Real>(records: &[PairRecord<T>]) -> Vec<Bucket<T>> {
    let mut buckets: Vec<Bucket<T>> = Vec::new();
    let mut sorted: Vec<&PairRecord<T>> = records.iter().filter(|r| r.d_in > T::zero() && r.d_in.is_finite()).collect();
    sorted.sort_by(|a, b| a.d_in.partial_cmp(&b.d_in).unwrap_or(std::cmp::Ordering::Equal));
    for r in sorted {
        let b = to_f64(r.d_in).log2().floor() as i32;
        match buckets.last_mut() {
            Some(last) if last.log2_bucket == b => {
                last.count += 1;
                last.in_max = r.d_in;
                last.out_min = last.out_min.min(r.d_out);
                last.out_max = last.out_max.max(r.d_out);
            }
            _ => buckets.push(Bucket {
                log2_bucket: b,
                count: 1,
                in_min: r.d_in,
                in_max: r.d_in,
                out_min: r.d_out,
                out_max: r.d_out,
                lower_envelope: r.d_out,
                upper_envelope: r.d_out,
            }),
        }
    }
    let mut run = T::neg_infinity();
    for b in buckets.iter_mut() {
        run = run.max(b.out_max);
        b.upper_envelope = run;
    }
    let mut run = T::infinity();
    for b in buckets.iter_mut().rev() {
        run = run.min(b.out_min);
        b.lower_envelope = run;
    }
    buckets
}

/// Log2-bucketed minimum and maximum output distance, with monotone envelopes.
pub fn empirical_moduli<T: Real>(report: &DistortionReport<T>) -> Vec<Bucket<T>> {
    bucket_curves(&report.records)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct SmallDistanceCheck<T> {
    pub threshold: T,
    /// Largest bucket lying entirely below the threshold, if any.
    pub bucket: Option<i32>,
    pub max_out: T,
    pub bound: T,
    pub passed: bool,
}

/// Uniform continuity at small scales: in the largest bucket below `2^-10`, every output
/// distance stays under `ρ2(2^-10) + tol`. Fails when no pair is that close.
pub fn small_distance_check<T: Real>(report: &DistortionReport<T>, moduli: &ModulusPair<T>) -> SmallDistanceCheck<T> {
    let threshold = crate::scalar::pow2::<T>(SMALL_DISTANCE_LOG2 as i64);
    let bound = moduli.rho2.eval(threshold) + report.tol;
    let below = report.curves.iter().filter(|b| b.log2_bucket < SMALL_DISTANCE_LOG2).last();
    match below {
        Some(b) => SmallDistanceCheck { threshold, bucket: Some(b.log2_bucket), max_out: b.out_max, bound, passed: b.out_max < bound },
        None => SmallDistanceCheck { threshold, bucket: None, max_out: T::nan(), bound, passed: false },
    }
}
