//! Decision tables for coarse and uniform embeddability between `ℓ_p` spaces and between
//! Orlicz sequence spaces, driven by upper Matuszewska-Orlicz indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcdsl::OrliczFunction;
use crate::indices::{
    basis_criterion, estimate_indices, small_scale_ratio_limit, DyadicGrid, IndexEstimate, Trend,
};
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VerdictKind {
    StrongUniformEmbeds,
    NoCoarseNoUniform,
    NotDeterminedByIndices,
    OpenProblem,
}

/// The four rows of the Orlicz table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrliczCase {
    /// `β_M < β_N`, or `β_N <= β_M < 2`, or `β_M = β_N = ∞`.
    Embeds,
    /// `β_M > 2` and `β_N < β_M`.
    CotypeBlocked,
    /// `β_N <= β_M = 2`.
    HilbertBoundary,
    /// `2 < β_M = β_N < ∞`.
    EqualAboveTwo,
}

impl OrliczCase {
    pub const ALL: [OrliczCase; 4] = [
        OrliczCase::Embeds,
        OrliczCase::CotypeBlocked,
        OrliczCase::HilbertBoundary,
        OrliczCase::EqualAboveTwo,
    ];

    pub fn number(self) -> u8 {
        match self {
            OrliczCase::Embeds => 1,
            OrliczCase::CotypeBlocked => 2,
            OrliczCase::HilbertBoundary => 3,
            OrliczCase::EqualAboveTwo => 4,
        }
    }

    pub fn kind(self) -> VerdictKind {
        match self {
            OrliczCase::Embeds => VerdictKind::StrongUniformEmbeds,
            OrliczCase::CotypeBlocked => VerdictKind::NoCoarseNoUniform,
            OrliczCase::HilbertBoundary => VerdictKind::NotDeterminedByIndices,
            OrliczCase::EqualAboveTwo => VerdictKind::OpenProblem,
        }
    }

    pub fn citation(self) -> &'static str {
        match self {
            OrliczCase::Embeds => {
                "orlicz-positive: beta_M < beta_N, or beta_N <= beta_M < 2, or beta_M = beta_N = inf; \
                 h_M strongly uniformly embeds into h_N"
            }
            OrliczCase::CotypeBlocked => {
                "orlicz-negative (cotype obstruction): beta_M > 2 and beta_N < beta_M; \
                 h_M does not coarsely or uniformly embed into h_N"
            }
            OrliczCase::HilbertBoundary => {
                "orlicz-undetermined: beta_N <= beta_M = 2; both outcomes occur for the same indices"
            }
            OrliczCase::EqualAboveTwo => "orlicz-open: 2 < beta_M = beta_N < inf; embeddability is open",
        }
    }
}

/// An upper index given exactly, as a bracket, or as `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", bound = "T: Real")]
pub enum IndexInput<T> {
    Exact { value: T },
    Bracket { low: T, high: T },
    Infinite,
}

impl<T: Real> IndexInput<T> {
    pub fn exact(value: T) -> Self {
        if value.is_infinite() {
            IndexInput::Infinite
        } else {
            IndexInput::Exact { value }
        }
    }

    /// The β bracket of an index estimate; an unbounded estimate keeps its finite lower end.
    pub fn from_estimate(est: &IndexEstimate<T>) -> Self {
        IndexInput::Bracket { low: est.beta_low, high: est.beta_high }
    }

    /// `(low, high)` with `+∞` allowed at either end.
    pub fn range(&self) -> (T, T) {
        match *self {
            IndexInput::Exact { value } => (value, value),
            IndexInput::Bracket { low, high } => (low, high),
            IndexInput::Infinite => (T::infinity(), T::infinity()),
        }
    }

    pub fn check(&self) -> Result<()> {
        let (lo, hi) = self.range();
        if lo.is_nan() || hi.is_nan() || lo < T::one() || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "index bracket [{lo}, {hi}] must satisfy 1 <= low <= high"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged, bound = "T: Real")]
pub enum VerdictInputs<T> {
    Lp { p: T, q: T },
    Orlicz { beta_m: IndexInput<T>, beta_n: IndexInput<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Verdict<T> {
    pub kind: VerdictKind,
    /// `"lp"` for the `ℓ_p` table, `"1"`..`"4"` for the Orlicz rows.
    pub case: String,
    pub citation: String,
    pub inputs: VerdictInputs<T>,
}

/// `ℓ_p` into `ℓ_q`: embeds iff `p <= q` or `q < p <= 2`.
pub fn classify_lp<T: Real>(p: T, q: T) -> Result<Verdict<T>> {
    if !(p >= T::one() && q >= T::one() && p.is_finite() && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("lp classification needs p, q in [1, inf), got ({p}, {q})")));
    }
    let two = lit::<T>(2.0);
    let (kind, citation) = if p <= q {
        (VerdictKind::StrongUniformEmbeds, "lp-classification: p <= q, strong uniform embedding")
    } else if p <= two {
        (VerdictKind::StrongUniformEmbeds, "lp-classification: q < p <= 2, strong uniform embedding through l_2")
    } else {
        (VerdictKind::NoCoarseNoUniform, "lp-classification: p > 2 and q < p, cotype obstruction")
    };
    Ok(Verdict { kind, case: "lp".into(), citation: citation.into(), inputs: VerdictInputs::Lp { p, q } })
}

/// Row of the Orlicz table for exact indices (`+∞` allowed). Exactly one row fires on `[1, ∞]²`.
pub fn orlicz_case<T: Real>(beta_m: T, beta_n: T) -> OrliczCase {
    let two = lit::<T>(2.0);
    if beta_m < beta_n || (beta_n <= beta_m && beta_m < two) || (beta_m.is_infinite() && beta_n.is_infinite()) {
        OrliczCase::Embeds
    } else if beta_m > two && beta_n < beta_m {
        OrliczCase::CotypeBlocked
    } else if beta_m == two {
        OrliczCase::HilbertBoundary
    } else {
        OrliczCase::EqualAboveTwo
    }
}

/// Every row that fires somewhere on the rectangle `β_M × β_N`, in row order.
pub fn possible_cases<T: Real>(beta_m: &IndexInput<T>, beta_n: &IndexInput<T>) -> Vec<OrliczCase> {
    let (a1, a2) = beta_m.range();
    let (b1, b2) = beta_n.range();
    let two = lit::<T>(2.0);
    let mut out = Vec::new();
    let embeds = a1 < b2
        || (a1.max(b1) < two && b1 <= a2)
        || (a2.is_infinite() && b2.is_infinite());
    if embeds {
        out.push(OrliczCase::Embeds);
    }
    if a2 > two && b1 < a2 {
        out.push(OrliczCase::CotypeBlocked);
    }
    if a1 <= two && two <= a2 && b1 <= two {
        out.push(OrliczCase::HilbertBoundary);
    }
    let (lo, hi) = (a1.max(b1), a2.min(b2));
    if lo <= hi && hi > two && lo.is_finite() {
        out.push(OrliczCase::EqualAboveTwo);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// A bracket no wider than this that contains a table boundary (`2`, or the other
    /// bracket) is read as sitting on that boundary. Zero disables snapping.
    pub snap_width: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { snap_width: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct OrliczVerdict<T> {
    /// The single verdict when the (snapped) inputs determine one row; `None` otherwise.
    pub verdict: Option<Verdict<T>>,
    /// Rows reachable from the raw brackets.
    pub possible: Vec<OrliczCase>,
    /// The raw brackets straddle a row boundary.
    pub boundary: bool,
    /// Inputs after snapping; equal to the raw inputs when nothing snapped.
    pub resolved: (IndexInput<T>, IndexInput<T>),
    pub snapped: bool,
}

impl<T: Real> OrliczVerdict<T> {
    pub fn kinds(&self) -> Vec<VerdictKind> {
        let mut ks: Vec<VerdictKind> = self.possible.iter().map(|c| c.kind()).collect();
        ks.dedup();
        ks
    }
}

fn narrow<T: Real>(x: &IndexInput<T>, w: T) -> bool {
    let (lo, hi) = x.range();
    lo.is_finite() && hi.is_finite() && hi - lo <= w
}

fn snap<T: Real>(beta_m: IndexInput<T>, beta_n: IndexInput<T>, width: T) -> (IndexInput<T>, IndexInput<T>) {
    let two = lit::<T>(2.0);
    let to_two = |x: IndexInput<T>| {
        let (lo, hi) = x.range();
        if narrow(&x, width) && lo <= two && two <= hi {
            IndexInput::Exact { value: two }
        } else {
            x
        }
    };
    let (m, n) = (to_two(beta_m), to_two(beta_n));
    let ((a1, a2), (b1, b2)) = (m.range(), n.range());
    let overlap = a1.max(b1) <= a2.min(b2);
    if !(overlap && narrow(&m, width) && narrow(&n, width)) || (a1 == a2 && b1 == b2) {
        return (m, n);
    }
    let common = match (m, n) {
        (IndexInput::Exact { value }, _) | (_, IndexInput::Exact { value }) => value,
        _ => (a1.max(b1) + a2.min(b2)) / two,
    };
    (IndexInput::Exact { value: common }, IndexInput::Exact { value: common })
}

pub fn classify_orlicz<T: Real>(beta_m: IndexInput<T>, beta_n: IndexInput<T>) -> Result<OrliczVerdict<T>> {
    classify_orlicz_with(beta_m, beta_n, &ClassifyOptions::default())
}

/// Orlicz table over exact values or brackets. The raw rectangle gives the set of
/// reachable rows; a verdict is issued only when the snapped inputs pin down one row.
pub fn classify_orlicz_with<T: Real>(
    beta_m: IndexInput<T>,
    beta_n: IndexInput<T>,
    opts: &ClassifyOptions,
) -> Result<OrliczVerdict<T>> {
    beta_m.check()?;
    beta_n.check()?;
    let possible = possible_cases(&beta_m, &beta_n);
    let resolved = snap(beta_m, beta_n, lit(opts.snap_width));
    let snapped = resolved != (beta_m, beta_n);
    let after = possible_cases(&resolved.0, &resolved.1);
    let verdict = (after.len() == 1).then(|| {
        let case = after[0];
        Verdict {
            kind: case.kind(),
            case: case.number().to_string(),
            citation: case.citation().into(),
            inputs: VerdictInputs::Orlicz { beta_m, beta_n },
        }
    });
    Ok(OrliczVerdict { verdict, boundary: possible.len() > 1, possible, resolved, snapped })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Obstruction {
    pub blocked: bool,
    pub rationale: String,
}

/// Cotype obstruction: a space with cotype exponent `q_X` cannot coarsely or uniformly
/// embed into a target of nontrivial type with smaller cotype exponent `q_Y`.
pub fn cotype_obstruction<T: Real>(q_x: T, q_y: T, target_has_nontrivial_type: bool) -> Result<Obstruction> {
    let two = lit::<T>(2.0);
    if !(q_x >= two && q_y >= two) {
        return Err(Error::InvalidParameter(format!("cotype exponents must be >= 2, got ({q_x}, {q_y})")));
    }
    let blocked = target_has_nontrivial_type && q_x > q_y;
    let rationale = if blocked {
        format!("cotype obstruction: q_X = {q_x} > q_Y = {q_y} and the target has nontrivial type")
    } else if !target_has_nontrivial_type {
        "no obstruction: the target has trivial type".to_string()
    } else {
        format!("no obstruction: q_X = {q_x} <= q_Y = {q_y}")
    };
    Ok(Obstruction { blocked, rationale })
}

/// Evidence gathered for a concrete function `M` before consulting the table.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Evidence<T> {
    pub function: String,
    pub beta_low: T,
    pub beta_high: T,
    pub alpha_low: T,
    pub alpha_high: T,
    /// Trend of `M(t)/t^2` as `t → 0`.
    pub small_scale_ratio: Trend,
    /// Trend of `n^{-1/2} ||e_1 + ... + e_n||`.
    pub basis_criterion: Trend,
    pub basis_c_2_40: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct FunctionVerdict<T> {
    pub evidence: Evidence<T>,
    pub table: OrliczVerdict<T>,
    /// Table citation, extended with the evidence that settles or sharpens it.
    pub rationale: String,
    /// Set when the evidence rules out embeddings into `ℓ_2`.
    pub no_hilbert_embedding: bool,
}

/// Estimates the indices of `m`, runs the symmetric-basis criterion and consults the
/// Orlicz table against the target index.
pub fn classify_function<T: Real>(
    m: &OrliczFunction<T>,
    target: IndexInput<T>,
    grid: DyadicGrid,
    opts: &ClassifyOptions,
) -> Result<FunctionVerdict<T>> {
    let est = estimate_indices(m, grid)?;
    let ratio = small_scale_ratio_limit(m);
    let basis = basis_criterion(m)?;
    let evidence = Evidence {
        function: m.describe(),
        beta_low: est.beta_low,
        beta_high: est.beta_high,
        alpha_low: est.alpha_low,
        alpha_high: est.alpha_high,
        small_scale_ratio: ratio,
        basis_criterion: basis.trend,
        basis_c_2_40: basis.c_at(40).unwrap_or_else(T::nan),
    };
    let table = classify_orlicz_with(IndexInput::from_estimate(&est), target, opts)?;
    let no_hilbert_embedding = ratio == Trend::Vanishing && basis.trend == Trend::Vanishing;
    let mut rationale = match &table.verdict {
        Some(v) => v.citation.clone(),
        None => format!(
            "indices do not fix a row; reachable rows {:?}",
            table.possible.iter().map(|c| c.number()).collect::<Vec<_>>()
        ),
    };
    if no_hilbert_embedding {
        rationale.push_str(&format!(
            "; symmetric-basis criterion: M(t)/t^2 -> 0 and n^(-1/2)||e_1+...+e_n|| -> 0 \
             (c at n = 2^{} is {:.4}), so h_M does not coarsely or uniformly embed into l_2",
            basis.log2_ns.last().copied().unwrap_or(0),
            to_f64(*basis.cs.last().unwrap_or(&T::nan())),
        ));
    }
    Ok(FunctionVerdict { evidence, table, rationale, no_hilbert_embedding })
}
