//! Dimension estimates from count and entropy series.

mod fit;
mod report;

pub use fit::{endpoint_slope, loglog_fit, two_scale_extrapolation, FitResult};
pub use report::{
    build_report, DimensionReport, InequalityVerdict, ReportConfig, ReportOptions,
    DEFAULT_MIN_R_SQUARED, DEFAULT_TOLERANCE, DEFAULT_UNIFORMITY_GAP, REPORT_KEYS,
};
