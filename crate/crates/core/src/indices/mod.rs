//! Index brackets, the lower-bound constant, cotype and the symmetric-basis series.

mod basis;
mod constant;
mod estimate;

pub use basis::{basis_criterion, basis_criterion_with, small_scale_ratio_limit, small_scale_ratios, classify_trend, BasisCriterionSeries, BasisOptions, Trend};
pub use constant::{default_q, estimate_c, ConstantEstimate};
pub use estimate::{
    cotype, estimate_indices, Bound, DyadicGrid, IndexEstimate, TraceStep, GRID_CEILING, GRID_FLOOR, MIN_LEVELS, Q_MAX,
};
