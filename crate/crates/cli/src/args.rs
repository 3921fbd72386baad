use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "orlicz", version, about = "Orlicz sequence spaces: norms, indices, embeddings and their certification")]
pub struct Cli {
    /// Output format; CSV is available for series and per-pair reports.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Check that an expression in `t` is an Orlicz function.
    Validate(ValidateArgs),
    /// Luxemburg norm of a finitely supported vector.
    Norm(NormArgs),
    /// Matuszewska-Orlicz index brackets and the lower-bound constant.
    Indices(IndicesArgs),
    /// `n^{-1/2} ||e_1 + ... + e_n||` and `M(t)/t^2` series with their trends.
    BasisCriterion(FnArgs),
    /// Embeddability verdicts.
    #[command(subcommand)]
    Classify(ClassifyCommand),
    /// Image of one vector under an embedding.
    #[command(subcommand)]
    Embed(EmbedCommand),
    /// Sample pairs and check an embedding against its moduli.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Args, Serialize)]
pub struct FnArgs {
    /// Expression in `t` (e.g. "t^2 * (1 + ln(1 + t))") or catalog tag: power(p), power_log.
    #[arg(long = "fn")]
    pub function: String,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long, default_value_t = 1e-8)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1e4)]
    pub t_max: f64,
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct NormArgs {
    #[command(flatten)]
    pub f: FnArgs,
    /// Inline JSON (`[[index, value], ...]` or `{"entries": ...}`) or a path to such a file.
    #[arg(long = "vec")]
    pub vector: String,
}

#[derive(Debug, Args, Serialize)]
pub struct IndicesArgs {
    #[command(flatten)]
    pub f: FnArgs,
    /// Finest dyadic level `J` (at least 20).
    #[arg(long, default_value_t = 4096)]
    pub levels: u32,
    /// Exponent for the constant `C`; defaults to the upper bracket end plus 0.25.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 1e4)]
    pub t_max: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifyCommand {
    /// `ℓ_p` into `ℓ_q`.
    Lp {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
    },
    /// `h_M` into `h_N` from indices (`2`, `1.9:2.1`, `inf`) or from functions.
    Orlicz(OrliczArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct OrliczArgs {
    #[arg(long, conflicts_with = "fn_m", required_unless_present = "fn_m")]
    pub beta_m: Option<String>,
    #[arg(long, conflicts_with = "fn_n", required_unless_present = "fn_n")]
    pub beta_n: Option<String>,
    /// Source function; adds index estimates and the basis criterion as evidence.
    #[arg(long)]
    pub fn_m: Option<String>,
    /// Target function; its β bracket is estimated.
    #[arg(long)]
    pub fn_n: Option<String>,
    #[arg(long, default_value_t = 4096)]
    pub levels: u32,
    /// Brackets this narrow that touch a table boundary are read as on it; 0 disables.
    #[arg(long, default_value_t = 0.1)]
    pub snap_width: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct TentArgs {
    #[command(flatten)]
    pub f: FnArgs,
    /// Target exponent, above the upper index of M.
    #[arg(long)]
    pub p: f64,
    /// Intermediate exponent in (β, p); defaults to a quarter of the way from β to p.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 4096)]
    pub levels: u32,
    #[arg(long, default_value_t = 1e4)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tail_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeArg {
    Fixed,
    Adaptive,
}

#[derive(Debug, Args, Serialize)]
pub struct GaussArgs {
    /// Target exponent in [1, 2).
    #[arg(long)]
    pub p: f64,
    /// Number of widths `t_n = 4^-n`.
    #[arg(long, default_value_t = 12)]
    pub levels: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, value_enum, default_value_t = DegreeArg::Adaptive)]
    pub degree: DegreeArg,
    /// Degree used with `--degree fixed`.
    #[arg(long, default_value_t = 12)]
    pub k: u32,
    #[arg(long, default_value_t = 8.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_trunc: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct MazurArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedCommand {
    Tent {
        #[command(flatten)]
        tent: TentArgs,
        #[arg(long = "vec")]
        vector: String,
    },
    Gauss {
        #[command(flatten)]
        gauss: GaussArgs,
        #[arg(long = "vec")]
        vector: String,
    },
    Mazur {
        #[command(flatten)]
        mazur: MazurArgs,
        #[arg(long = "vec")]
        vector: String,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Violation threshold; defaults to the embedding's error bound plus 1e-9.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Also write the per-pair CSV here.
    #[arg(long)]
    pub pairs_csv: Option<PathBuf>,
    /// Also write the empirical moduli curves (CSV) here.
    #[arg(long)]
    pub curves_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SparseArgs {
    #[arg(long, default_value_t = 8)]
    pub max_support: usize,
    #[arg(long, default_value_t = 64)]
    pub index_range: u64,
    #[arg(long, default_value_t = -14, allow_hyphen_values = true)]
    pub min_exp: i32,
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    pub max_exp: i32,
    /// Share of non-dyadic mantissas.
    #[arg(long, default_value_t = 0.25)]
    pub perturb: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyCommand {
    Tent {
        #[command(flatten)]
        tent: TentArgs,
        #[command(flatten)]
        sparse: SparseArgs,
        #[command(flatten)]
        sample: SampleArgs,
    },
    Gauss {
        #[command(flatten)]
        gauss: GaussArgs,
        /// Lower constant of the sphere map; estimated from 4000 sphere pairs when absent.
        #[arg(long)]
        c_hat: Option<f64>,
        /// Pair distances are `2^(k/4)` for k between these quarter-exponents.
        #[arg(long, default_value_t = -56, allow_hyphen_values = true)]
        min_quarter_log2: i32,
        #[arg(long, default_value_t = 16, allow_hyphen_values = true)]
        max_quarter_log2: i32,
        #[command(flatten)]
        sample: SampleArgs,
    },
    Mazur {
        #[command(flatten)]
        mazur: MazurArgs,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long)]
        c_hat: Option<f64>,
        #[command(flatten)]
        sample: SampleArgs,
    },
    Identity {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[command(flatten)]
        sparse: SparseArgs,
        #[command(flatten)]
        sample: SampleArgs,
    },
}
