//! Grid occupancy counting and ε-neighborhood volume estimation.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DimError, Result};
use crate::estimation::{loglog_fit, FitResult};
use crate::geometry::{bounding_box, BoxIndex, GridSpec, PointCloud, Scale, ScaleSchedule};
use crate::scalar::Scalar;

/// Point counts per occupied cell at one scale. Empty cells are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyHistogram<T> {
    epsilon: T,
    cells: HashMap<BoxIndex, usize>,
    total: usize,
}

impl<T: Scalar> OccupancyHistogram<T> {
    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn occupied(&self) -> usize {
        self.cells.len()
    }

    pub fn get(&self, index: &[i64]) -> Option<usize> {
        self.cells.get(index).copied()
    }

    pub fn cells(&self) -> &HashMap<BoxIndex, usize> {
        &self.cells
    }

    /// Cells in lexicographic index order.
    pub fn sorted_cells(&self) -> Vec<(&BoxIndex, usize)> {
        let mut cells: Vec<_> = self.cells.iter().map(|(k, &v)| (k, v)).collect();
        cells.sort_unstable_by(|a, b| a.0.cmp(b.0));
        cells
    }

    /// Union of two histograms over disjoint point sets at the same scale.
    pub fn merge(mut self, other: Self) -> Self {
        debug_assert!(self.epsilon == other.epsilon);
        for (k, v) in other.cells {
            *self.cells.entry(k).or_insert(0) += v;
        }
        self.total += other.total;
        self
    }
}

fn histogram_of<T: Scalar>(points: &[T], dim: usize, grid: &GridSpec<T>) -> Result<OccupancyHistogram<T>> {
    let mut cells: HashMap<BoxIndex, usize> = HashMap::new();
    let mut buf = vec![0i64; dim];
    let mut total = 0;
    for p in points.chunks_exact(dim) {
        grid.index_into(p, &mut buf)?;
        match cells.get_mut(buf.as_slice()) {
            Some(c) => *c += 1,
            None => {
                cells.insert(buf.clone(), 1);
            }
        }
        total += 1;
    }
    Ok(OccupancyHistogram { epsilon: grid.epsilon(), cells, total })
}

fn check_grid<T: Scalar>(cloud: &PointCloud<T>, grid: &GridSpec<T>) -> Result<()> {
    cloud.require_non_empty()?;
    if grid.dim() != cloud.dim() {
        return Err(DimError::DimensionMismatch { expected: cloud.dim(), found: grid.dim() });
    }
    Ok(())
}

/// Number of distinct cells met by the cloud, with per-cell point counts.
pub fn count_boxes<T: Scalar>(
    cloud: &PointCloud<T>,
    grid: &GridSpec<T>,
) -> Result<(usize, OccupancyHistogram<T>)> {
    check_grid(cloud, grid)?;
    let hist = histogram_of(cloud.coords(), cloud.dim(), grid)?;
    Ok((hist.occupied(), hist))
}

/// [`count_boxes`] with the points split into `shards` ranges counted in
/// parallel and merged. The result is identical to the sequential one.
pub fn count_boxes_sharded<T: Scalar>(
    cloud: &PointCloud<T>,
    grid: &GridSpec<T>,
    shards: usize,
) -> Result<(usize, OccupancyHistogram<T>)> {
    check_grid(cloud, grid)?;
    let d = cloud.dim();
    let per_shard = cloud.len().div_ceil(shards.max(1)).max(1);
    let parts = cloud
        .coords()
        .par_chunks(per_shard * d)
        .map(|chunk| histogram_of(chunk, d, grid))
        .collect::<Result<Vec<_>>>()?;
    let hist = parts
        .into_iter()
        .reduce(OccupancyHistogram::merge)
        .expect("non-empty cloud yields at least one shard");
    Ok((hist.occupied(), hist))
}

/// Histograms at each of `scales`, sharing `anchor`. With `parallel` set, each
/// scale is counted in its own rayon task; the output is identical either way.
pub fn histograms_at<T: Scalar>(
    cloud: &PointCloud<T>,
    scales: &[Scale<T>],
    anchor: &[T],
    parallel: bool,
) -> Result<Vec<OccupancyHistogram<T>>> {
    let one = |s: &Scale<T>| count_boxes(cloud, &GridSpec::new(anchor.to_vec(), s.epsilon)?).map(|(_, h)| h);
    if parallel {
        scales.par_iter().map(one).collect()
    } else {
        scales.iter().map(one).collect()
    }
}

/// Histograms at every scale of `schedule`, sharing `anchor`.
pub fn histogram_series<T: Scalar>(
    cloud: &PointCloud<T>,
    schedule: &ScaleSchedule<T>,
    anchor: &[T],
) -> Result<Vec<OccupancyHistogram<T>>> {
    histograms_at(cloud, schedule.scales(), anchor, false)
}

/// [`histogram_series`] with one rayon task per scale.
pub fn histogram_series_parallel<T: Scalar>(
    cloud: &PointCloud<T>,
    schedule: &ScaleSchedule<T>,
    anchor: &[T],
) -> Result<Vec<OccupancyHistogram<T>>> {
    histograms_at(cloud, schedule.scales(), anchor, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CountEntry<T> {
    pub k: i32,
    pub epsilon: T,
    pub count: usize,
}

/// `(k, epsilon_k, n(epsilon_k))` ordered by `k` ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CountSeries<T> {
    pub anchor: Vec<T>,
    /// Size of the cloud the counts were taken from.
    pub points: usize,
    pub entries: Vec<CountEntry<T>>,
}

impl<T: Scalar> CountSeries<T> {
    pub fn from_histograms(scales: &[Scale<T>], anchor: &[T], histograms: &[OccupancyHistogram<T>]) -> Self {
        let entries = scales
            .iter()
            .zip(histograms)
            .map(|(s, h)| CountEntry { k: s.k, epsilon: s.epsilon, count: h.occupied() })
            .collect();
        let points = histograms.first().map_or(0, OccupancyHistogram::total);
        Self { anchor: anchor.to_vec(), points, entries }
    }

    pub fn epsilons(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.epsilon).collect()
    }

    /// Least-squares fit of `log2 n(eps)` against `log2(1/eps)`; the slope is
    /// the box-counting dimension estimate.
    pub fn fit(&self) -> Result<FitResult<T>> {
        let xs: Vec<T> = self.entries.iter().map(|e| -e.epsilon.log2()).collect();
        let ys: Vec<T> = self.entries.iter().map(|e| T::of_usize(e.count).log2()).collect();
        loglog_fit(&xs, &ys)
    }
}

/// Occupied-cell counts over the schedule with a shared anchor.
pub fn count_series<T: Scalar>(
    cloud: &PointCloud<T>,
    schedule: &ScaleSchedule<T>,
    anchor: &[T],
) -> Result<CountSeries<T>> {
    let hists = histogram_series(cloud, schedule, anchor)?;
    Ok(CountSeries::from_histograms(schedule.scales(), anchor, &hists))
}

/// [`count_series`] computed with one task per scale.
pub fn count_series_parallel<T: Scalar>(
    cloud: &PointCloud<T>,
    schedule: &ScaleSchedule<T>,
    anchor: &[T],
) -> Result<CountSeries<T>> {
    let hists = histogram_series_parallel(cloud, schedule, anchor)?;
    Ok(CountSeries::from_histograms(schedule.scales(), anchor, &hists))
}

/// Dilation volume `Vol(A_eps)` measured on a fine grid of step `resolution`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct VolumeEstimate<T> {
    pub epsilon: T,
    pub volume: T,
    pub resolution: T,
}

/// Fine-grid cells per epsilon in [`volume_estimate`].
pub const VOLUME_SUBDIVISION: usize = 4;

/// Largest fine grid tracked with a dense bitset; bigger grids use a hash set.
const DENSE_MARK_LIMIT: u64 = 1 << 28;

enum Marks {
    Dense(Vec<u64>),
    Sparse(HashSet<u64>),
}

impl Marks {
    fn with_capacity(cells: u64) -> Self {
        if cells <= DENSE_MARK_LIMIT {
            Marks::Dense(vec![0; cells.div_ceil(64) as usize])
        } else {
            Marks::Sparse(HashSet::new())
        }
    }

    fn mark(&mut self, i: u64) {
        match self {
            Marks::Dense(bits) => bits[(i / 64) as usize] |= 1 << (i % 64),
            Marks::Sparse(set) => {
                set.insert(i);
            }
        }
    }

    fn count(&self) -> u64 {
        match self {
            Marks::Dense(bits) => bits.iter().map(|w| w.count_ones() as u64).sum(),
            Marks::Sparse(set) => set.len() as u64,
        }
    }
}

/// Estimates the volume of the ε-neighborhood of the cloud.
///
/// A grid of step `h = eps / 4` is laid over the bounding box inflated by
/// `eps`; a fine cell is marked when its center lies within distance `eps`
/// (inclusive) of some point, and the volume is `marked * h^d`.
pub fn volume_estimate<T: Scalar>(cloud: &PointCloud<T>, epsilon: T) -> Result<VolumeEstimate<T>> {
    cloud.require_non_empty()?;
    let d = cloud.dim();
    if d > 3 {
        return Err(DimError::VolumeDimensionTooHigh(d));
    }
    if !(epsilon.is_finite() && epsilon > T::zero()) {
        return Err(DimError::InvalidEpsilon(epsilon.as_f64()));
    }
    let eps = epsilon.as_f64();
    let h = eps / VOLUME_SUBDIVISION as f64;
    let frame = bounding_box(cloud)?.inflate(epsilon);
    let origin: Vec<f64> = frame.min.iter().map(|v| v.as_f64()).collect();

    let mut extent = Vec::with_capacity(d);
    for (&lo, &hi) in frame.min.iter().zip(&frame.max) {
        let n = ((hi.as_f64() - lo.as_f64()) / h).ceil().max(1.0);
        if n > (1u64 << 40) as f64 {
            return Err(DimError::InvalidParameter(format!(
                "epsilon {eps} too small for the point set extent"
            )));
        }
        extent.push(n as u64);
    }
    let total_cells = extent
        .iter()
        .try_fold(1u64, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| DimError::InvalidParameter(format!("fine grid for epsilon {eps} overflows")))?;
    let strides: Vec<u64> = (0..d).map(|i| extent[i + 1..].iter().product()).collect();

    // points grouped by the fine cell that holds them
    let mut groups: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in cloud.points().enumerate() {
        let cell: Vec<i64> = p
            .iter()
            .zip(&origin)
            .map(|(&x, &o)| ((x.as_f64() - o) / h).floor() as i64)
            .collect();
        groups.entry(cell).or_default().push(i);
    }

    let reach = VOLUME_SUBDIVISION as i64;
    let offsets = neighborhood_offsets(d, reach);
    let r2 = (VOLUME_SUBDIVISION * VOLUME_SUBDIVISION) as f64;
    let mut marks = Marks::with_capacity(total_cells);
    let mut center = vec![0.0; d];

    for (cell, members) in &groups {
        'offset: for off in &offsets {
            // squared distance bounds in units of h for any point of `cell`
            let (mut lo2, mut hi2) = (0.0, 0.0);
            for &o in off {
                let a = (o.abs() as f64 - 0.5).max(0.0);
                let b = o.abs() as f64 + 0.5;
                lo2 += a * a;
                hi2 += b * b;
            }
            if lo2 > r2 {
                continue;
            }
            let mut linear = 0u64;
            for axis in 0..d {
                let idx = cell[axis] + off[axis];
                if idx < 0 || idx as u64 >= extent[axis] {
                    continue 'offset;
                }
                linear += idx as u64 * strides[axis];
                center[axis] = origin[axis] + (idx as f64 + 0.5) * h;
            }
            let hit = hi2 <= r2
                || members.iter().any(|&i| {
                    let dist2: f64 = cloud
                        .point(i)
                        .iter()
                        .zip(&center)
                        .map(|(&x, &c)| (x.as_f64() - c).powi(2))
                        .sum();
                    dist2 <= eps * eps
                });
            if hit {
                marks.mark(linear);
            }
        }
    }

    let volume = marks.count() as f64 * h.powi(d as i32);
    Ok(VolumeEstimate { epsilon, volume: T::of(volume), resolution: T::of(h) })
}

fn neighborhood_offsets(d: usize, reach: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-reach..=reach).map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o);
                    v
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct VolumeSeries<T> {
    pub dim: usize,
    pub entries: Vec<VolumeEstimate<T>>,
}

impl<T: Scalar> VolumeSeries<T> {
    /// Fit of `log2 Vol` against `log2 eps`.
    pub fn fit(&self) -> Result<FitResult<T>> {
        let xs: Vec<T> = self.entries.iter().map(|e| e.epsilon.log2()).collect();
        let ys: Vec<T> = self.entries.iter().map(|e| e.volume.log2()).collect();
        loglog_fit(&xs, &ys)
    }

    /// `d - slope`: `Vol ~ eps^(d - D)` for a set of dimension `D` in `R^d`.
    pub fn dimension(&self) -> Result<T> {
        Ok(T::of_usize(self.dim) - self.fit()?.slope)
    }
}

pub fn volume_series<T: Scalar>(cloud: &PointCloud<T>, schedule: &ScaleSchedule<T>) -> Result<VolumeSeries<T>> {
    let entries = schedule
        .epsilons()
        .map(|eps| volume_estimate(cloud, eps))
        .collect::<Result<Vec<_>>>()?;
    Ok(VolumeSeries { dim: cloud.dim(), entries })
}

/// Dimension from the scaling of the ε-neighborhood volume.
pub fn volume_dimension<T: Scalar>(cloud: &PointCloud<T>, schedule: &ScaleSchedule<T>) -> Result<T> {
    volume_series(cloud, schedule)?.dimension()
}
