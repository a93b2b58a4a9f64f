use serde::{Deserialize, Serialize};

use super::fit::{endpoint_slope, FitResult};
use crate::boxcount::{CountSeries, VolumeSeries};
use crate::error::{DimError, Result};
use crate::infodim::{information_fit, EntropySeries};
use crate::scalar::Scalar;

/// Slack allowed in every dimension inequality.
pub const DEFAULT_TOLERANCE: f64 = 0.05;
/// Largest per-scale `log2 n - S` (bits) for which occupancy counts as uniform.
pub const DEFAULT_UNIFORMITY_GAP: f64 = 0.1;
/// Fits below this coefficient of determination are flagged as nonlinear.
pub const DEFAULT_MIN_R_SQUARED: f64 = 0.99;

/// Top-level keys of a serialized [`DimensionReport`], in output order.
pub const REPORT_KEYS: [&str; 11] = [
    "dim_box",
    "dim_box_volume",
    "dim_info",
    "fit_box",
    "fit_info",
    "extrapolation",
    "reference_dim",
    "inequality_verdicts",
    "max_uniformity_gap",
    "warnings",
    "config",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ReportOptions<T> {
    pub tolerance: T,
    pub uniformity_gap_threshold: T,
    pub min_r_squared: T,
    /// Free-form description of how the point set was produced.
    pub provenance: Option<serde_json::Value>,
}

impl<T: Scalar> Default for ReportOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::of(DEFAULT_TOLERANCE),
            uniformity_gap_threshold: T::of(DEFAULT_UNIFORMITY_GAP),
            min_r_squared: T::of(DEFAULT_MIN_R_SQUARED),
            provenance: None,
        }
    }
}

/// Everything needed to reproduce the numbers in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ReportConfig<T> {
    pub tolerance: T,
    pub uniformity_gap_threshold: T,
    pub min_r_squared: T,
    pub points: usize,
    pub anchor: Vec<T>,
    pub ks: Vec<i32>,
    pub epsilons: Vec<T>,
    pub volume: bool,
    pub provenance: Option<serde_json::Value>,
}

/// `lhs <= rhs + tolerance`, with `margin = rhs + tolerance - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct InequalityVerdict<T> {
    pub name: String,
    pub holds: bool,
    pub margin: T,
}

impl<T: Scalar> InequalityVerdict<T> {
    fn check(name: &str, lhs: T, rhs: T, tolerance: T) -> Self {
        let margin = rhs + tolerance - lhs;
        Self { name: name.to_string(), holds: margin >= T::zero(), margin }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DimensionReport<T> {
    pub dim_box: T,
    pub dim_box_volume: Option<T>,
    pub dim_info: T,
    pub fit_box: FitResult<T>,
    pub fit_info: FitResult<T>,
    /// Endpoint slope between the coarsest and finest scale.
    pub extrapolation: Option<T>,
    /// Analytically known Hausdorff dimension, when supplied.
    pub reference_dim: Option<T>,
    pub inequality_verdicts: Vec<InequalityVerdict<T>>,
    pub max_uniformity_gap: T,
    pub warnings: Vec<String>,
    pub config: ReportConfig<T>,
}

impl<T: Scalar> DimensionReport<T> {
    pub fn verdict(&self, name: &str) -> Option<&InequalityVerdict<T>> {
        self.inequality_verdicts.iter().find(|v| v.name == name)
    }

    pub fn all_verdicts_hold(&self) -> bool {
        self.inequality_verdicts.iter().all(|v| v.holds)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn same_scales<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_f64().map(f64::to_bits) == y.to_f64().map(f64::to_bits))
}

/// Fits both series and evaluates the dimension inequalities:
///
/// * `info_le_box`: `dim_info <= dim_box + tol`
/// * `reference_le_box`: `reference <= dim_box + tol`
/// * `reference_le_info`: `reference <= dim_info + tol`, only evaluated when every
///   scale has `log2 n - S` below the uniformity threshold
pub fn build_report<T: Scalar>(
    counts: &CountSeries<T>,
    entropy: &EntropySeries<T>,
    volume: Option<&VolumeSeries<T>>,
    reference_dim: Option<T>,
    options: &ReportOptions<T>,
) -> Result<DimensionReport<T>> {
    let eps = counts.epsilons();
    if !same_scales(&eps, &entropy.epsilons()) {
        return Err(DimError::MismatchedSchedules("count and entropy series differ".into()));
    }
    if !same_scales(&counts.anchor, &entropy.anchor) {
        return Err(DimError::MismatchedSchedules("count and entropy anchors differ".into()));
    }
    if counts.entries.iter().zip(&entropy.entries).any(|(c, e)| c.k != e.k || c.count != e.occupied) {
        return Err(DimError::MismatchedSchedules("occupied-cell counts disagree".into()));
    }
    if let Some(v) = volume {
        let veps: Vec<T> = v.entries.iter().map(|e| e.epsilon).collect();
        if !same_scales(&eps, &veps) {
            return Err(DimError::MismatchedSchedules("volume series uses other scales".into()));
        }
    }

    let fit_box = counts.fit()?;
    let fit_info = information_fit(entropy)?;
    let dim_box = fit_box.slope;
    let dim_info = fit_info.slope;
    let dim_box_volume = volume.map(VolumeSeries::dimension).transpose()?;

    let extrapolation = match (counts.entries.first(), counts.entries.last()) {
        (Some(a), Some(b)) if counts.entries.len() >= 2 => {
            Some(endpoint_slope(a.epsilon, a.count, b.epsilon, b.count)?)
        }
        _ => None,
    };

    let tol = options.tolerance;
    let gap = entropy.max_uniformity_gap();
    let mut warnings = Vec::new();
    let mut verdicts = vec![InequalityVerdict::check("info_le_box", dim_info, dim_box, tol)];
    if let Some(reference) = reference_dim {
        verdicts.push(InequalityVerdict::check("reference_le_box", reference, dim_box, tol));
        if gap < options.uniformity_gap_threshold {
            verdicts.push(InequalityVerdict::check("reference_le_info", reference, dim_info, tol));
        } else {
            warnings.push(format!(
                "uniform-occupancy hypothesis unmet: max log2(n) - S = {gap} bits >= {}; reference_le_info not evaluated",
                options.uniformity_gap_threshold
            ));
        }
    }
    for (label, fit) in [("box", &fit_box), ("info", &fit_info)] {
        if fit.r_squared < options.min_r_squared {
            warnings.push(format!(
                "nonlinear scaling regime: {label} fit r^2 = {} < {}",
                fit.r_squared, options.min_r_squared
            ));
        }
    }

    Ok(DimensionReport {
        dim_box,
        dim_box_volume,
        dim_info,
        fit_box,
        fit_info,
        extrapolation,
        reference_dim,
        inequality_verdicts: verdicts,
        max_uniformity_gap: gap,
        warnings,
        config: ReportConfig {
            tolerance: tol,
            uniformity_gap_threshold: options.uniformity_gap_threshold,
            min_r_squared: options.min_r_squared,
            points: counts.points,
            anchor: counts.anchor.clone(),
            ks: counts.entries.iter().map(|e| e.k).collect(),
            epsilons: eps,
            volume: volume.is_some(),
            provenance: options.provenance.clone(),
        },
    })
}
