//! Fractal dimension estimates for finite point sets.
//!
//! Three estimators share one grid machinery:
//!
//! * box counting: the slope of `log2 n(eps)` against `log2(1/eps)`, where
//!   `n(eps)` is the number of occupied half-open grid cells of side `eps`;
//! * volume scaling: `d - slope` of `log2 Vol(A_eps)` against `log2 eps` for the
//!   ε-neighborhood of the set;
//! * information dimension: the slope of the Shannon entropy (bits) of the cell
//!   occupancy frequencies against `log2(1/eps)`.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which the CLI uses throughout.

pub mod boxcount;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod generators;
pub mod geometry;
pub mod infodim;
pub mod io;
pub mod scalar;

pub use boxcount::{
    count_boxes, count_boxes_sharded, count_series, count_series_parallel, histogram_series,
    histogram_series_parallel, volume_dimension, volume_estimate, volume_series, CountEntry,
    CountSeries, OccupancyHistogram, VolumeEstimate, VolumeSeries,
};
pub use error::{DimError, Result};
pub use estimation::{
    build_report, endpoint_slope, loglog_fit, two_scale_extrapolation, DimensionReport, FitResult,
    InequalityVerdict, ReportOptions,
};
pub use generators::{
    cantor_points, henon_orbit, ifs_chaos_game, uniform_segment, uniform_square, AffineMap,
    HenonParams, IfsSpec,
};
pub use geometry::{
    bounding_box, box_index, AnchorMode, BoundingBox, BoxIndex, GridSpec, PointCloud, Scale,
    ScaleFamily, ScaleSchedule,
};
pub use infodim::{
    entropy_series, entropy_series_parallel, information_dimension, probabilities,
    shannon_entropy, EntropyEntry, EntropySeries, ProbabilityVector,
};
pub use scalar::Scalar;

pub type PointCloud64 = PointCloud<f64>;
pub type PointCloud32 = PointCloud<f32>;
pub type GridSpec64 = GridSpec<f64>;
pub type ScaleSchedule64 = ScaleSchedule<f64>;
pub type HenonParams64 = HenonParams<f64>;
pub type IfsSpec64 = IfsSpec<f64>;
pub type CountSeries64 = CountSeries<f64>;
pub type EntropySeries64 = EntropySeries<f64>;
pub type FitResult64 = FitResult<f64>;
pub type DimensionReport64 = DimensionReport<f64>;
