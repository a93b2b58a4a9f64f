//! Shannon entropy of box occupancy and the information dimension.

use serde::{Deserialize, Serialize};

use crate::boxcount::{histogram_series, histogram_series_parallel, OccupancyHistogram};
use crate::error::{DimError, Result};
use crate::estimation::{loglog_fit, FitResult};
use crate::geometry::{PointCloud, Scale, ScaleSchedule};
use crate::scalar::{CompensatedSum, Scalar};

/// Tolerance on `sum(p) == 1`.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

/// Strictly positive probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector<T> {
    probs: Vec<T>,
}

impl<T: Scalar> ProbabilityVector<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(DimError::InvalidProbabilities("empty probability vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > T::zero())) {
            return Err(DimError::InvalidProbabilities(format!("entry {p} is not positive")));
        }
        let total = probs.iter().copied().collect::<CompensatedSum<T>>().value();
        if (total.as_f64() - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(DimError::InvalidProbabilities(format!("entries sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Empirical cell frequencies `count / total`, in lexicographic cell order.
pub fn probabilities<T: Scalar>(hist: &OccupancyHistogram<T>) -> ProbabilityVector<T> {
    let total = T::of_usize(hist.total());
    let probs = hist
        .sorted_cells()
        .into_iter()
        .map(|(_, c)| T::of_usize(c) / total)
        .collect();
    ProbabilityVector { probs }
}

/// `H(p) = -sum p_i log2 p_i` in bits.
pub fn shannon_entropy<T: Scalar>(p: &ProbabilityVector<T>) -> T {
    let h = p
        .probs
        .iter()
        .map(|&pi| -(pi * pi.log2()))
        .collect::<CompensatedSum<T>>()
        .value();
    h.max(T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EntropyEntry<T> {
    pub k: i32,
    pub epsilon: T,
    pub occupied: usize,
    pub entropy_bits: T,
}

impl<T: Scalar> EntropyEntry<T> {
    /// `log2 n(eps) - S(eps)`; zero exactly when occupancy is uniform.
    pub fn uniformity_gap(&self) -> T {
        (T::of_usize(self.occupied).log2() - self.entropy_bits).max(T::zero())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EntropySeries<T> {
    pub anchor: Vec<T>,
    pub entries: Vec<EntropyEntry<T>>,
}

impl<T: Scalar> EntropySeries<T> {
    pub fn from_histograms(scales: &[Scale<T>], anchor: &[T], histograms: &[OccupancyHistogram<T>]) -> Self {
        let entries = scales
            .iter()
            .zip(histograms)
            .map(|(s, h)| EntropyEntry {
                k: s.k,
                epsilon: s.epsilon,
                occupied: h.occupied(),
                entropy_bits: shannon_entropy(&probabilities(h)),
            })
            .collect();
        Self { anchor: anchor.to_vec(), entries }
    }

    pub fn epsilons(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.epsilon).collect()
    }

    /// Largest per-scale `log2 n - S` over the series.
    pub fn max_uniformity_gap(&self) -> T {
        self.entries
            .iter()
            .map(EntropyEntry::uniformity_gap)
            .fold(T::zero(), T::max)
    }
}

pub fn entropy_series<T: Scalar>(
    cloud: &PointCloud<T>,
    schedule: &ScaleSchedule<T>,
    anchor: &[T],
) -> Result<EntropySeries<T>> {
    let hists = histogram_series(cloud, schedule, anchor)?;
    Ok(EntropySeries::from_histograms(schedule.scales(), anchor, &hists))
}

pub fn entropy_series_parallel<T: Scalar>(
    cloud: &PointCloud<T>,
    schedule: &ScaleSchedule<T>,
    anchor: &[T],
) -> Result<EntropySeries<T>> {
    let hists = histogram_series_parallel(cloud, schedule, anchor)?;
    Ok(EntropySeries::from_histograms(schedule.scales(), anchor, &hists))
}

/// Fit of `S(eps)` against `log2(1/eps)`.
///
/// A series with zero entropy at every scale (one occupied cell throughout)
/// carries no scaling information and is rejected as degenerate.
pub fn information_fit<T: Scalar>(series: &EntropySeries<T>) -> Result<FitResult<T>> {
    if series.entries.iter().all(|e| e.entropy_bits == T::zero()) {
        return Err(DimError::DegenerateFit(
            "entropy is zero at every scale (single occupied cell)".into(),
        ));
    }
    let xs: Vec<T> = series.entries.iter().map(|e| -e.epsilon.log2()).collect();
    let ys: Vec<T> = series.entries.iter().map(|e| e.entropy_bits).collect();
    loglog_fit(&xs, &ys)
}

/// Slope of `S(eps)` versus `log2(1/eps)`.
pub fn information_dimension<T: Scalar>(series: &EntropySeries<T>) -> Result<T> {
    Ok(information_fit(series)?.slope)
}
