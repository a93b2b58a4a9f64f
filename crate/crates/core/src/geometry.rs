//! Point sets, bounding boxes, grid partitions and scale schedules.
//!
//! Cells of a [`GridSpec`] are half-open per axis: a point `x` lies in the cell
//! `floor((x[i] - anchor[i]) / epsilon)`, so every point belongs to exactly one
//! cell and boundary ties go to the cell whose lower face the point sits on.

use serde::{Deserialize, Serialize};

use crate::error::{DimError, Result};
use crate::scalar::Scalar;

/// Integer cell coordinates, one per axis.
pub type BoxIndex = Vec<i64>;

/// A finite set of points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointCloud<T> {
    /// Builds a cloud from flat row-major coordinates.
    pub fn new(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(DimError::InvalidParameter("ambient dimension must be positive".into()));
        }
        if coords.len() % dim != 0 {
            return Err(DimError::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        for (i, &c) in coords.iter().enumerate() {
            check_finite(i % dim, c)?;
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points<P: AsRef<[T]>>(dim: usize, points: &[P]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(DimError::DimensionMismatch { expected: dim, found: p.len() });
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, T> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Applies `f` to every point, producing a cloud of the same dimension.
    pub fn map_points<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[T], &mut [T]),
    {
        let mut out = vec![T::zero(); self.coords.len()];
        for (src, dst) in self.points().zip(out.chunks_exact_mut(self.dim)) {
            f(src, dst);
        }
        Self::new(self.dim, out)
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(DimError::EmptyPointSet)
        } else {
            Ok(())
        }
    }
}

fn check_finite<T: Scalar>(axis: usize, value: T) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(DimError::NonFinite { axis, value: value.as_f64() })
    }
}

/// Axis-aligned box, `min[i] <= max[i]` on every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundingBox<T> {
    pub min: Vec<T>,
    pub max: Vec<T>,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, p: &[T]) -> bool {
        p.iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(&x, (&lo, &hi))| lo <= x && x <= hi)
    }

    pub fn extent(&self) -> Vec<T> {
        self.max.iter().zip(&self.min).map(|(&hi, &lo)| hi - lo).collect()
    }

    /// Grows the box by `margin` on every face.
    pub fn inflate(&self, margin: T) -> Self {
        Self {
            min: self.min.iter().map(|&x| x - margin).collect(),
            max: self.max.iter().map(|&x| x + margin).collect(),
        }
    }
}

/// Tight componentwise bounds of a non-empty cloud.
pub fn bounding_box<T: Scalar>(cloud: &PointCloud<T>) -> Result<BoundingBox<T>> {
    cloud.require_non_empty()?;
    let first = cloud.point(0);
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for p in cloud.points().skip(1) {
        for (i, &x) in p.iter().enumerate() {
            if x < min[i] {
                min[i] = x;
            }
            if x > max[i] {
                max[i] = x;
            }
        }
    }
    Ok(BoundingBox { min, max })
}

/// A uniform partition of `R^d` into half-open cubes of side `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    anchor: Vec<T>,
    epsilon: T,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(anchor: Vec<T>, epsilon: T) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > T::zero()) {
            return Err(DimError::InvalidEpsilon(epsilon.as_f64()));
        }
        for (axis, &a) in anchor.iter().enumerate() {
            check_finite(axis, a)?;
        }
        Ok(Self { anchor, epsilon })
    }

    pub fn anchor(&self) -> &[T] {
        &self.anchor
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    /// Writes the cell index of `point` into `out` without allocating.
    pub fn index_into(&self, point: &[T], out: &mut [i64]) -> Result<()> {
        if point.len() != self.anchor.len() {
            return Err(DimError::DimensionMismatch {
                expected: self.anchor.len(),
                found: point.len(),
            });
        }
        for (axis, ((&x, &a), slot)) in point.iter().zip(&self.anchor).zip(out.iter_mut()).enumerate() {
            check_finite(axis, x)?;
            let q = cell_coordinate((x - a) / self.epsilon);
            *slot = q.to_i64().ok_or_else(|| {
                DimError::InvalidParameter(format!(
                    "cell index {q} on axis {axis} overflows i64"
                ))
            })?;
        }
        Ok(())
    }
}

/// Quotients within a few ulps of an integer are treated as lying on that
/// face, so rounding in `(x - a) / eps` cannot push a point sitting exactly on
/// a lower face into the cell below it.
fn cell_coordinate<T: Scalar>(q: T) -> T {
    let nearest = q.round();
    let slack = T::epsilon() * T::of(FACE_ULPS) * nearest.abs().max(T::one());
    if (q - nearest).abs() <= slack {
        nearest
    } else {
        q.floor()
    }
}

/// Rounding allowance, in ulps of the quotient, for a point to count as on a face.
pub const FACE_ULPS: f64 = 8.0;

/// Index of the half-open cell containing `point`.
pub fn box_index<T: Scalar>(grid: &GridSpec<T>, point: &[T]) -> Result<BoxIndex> {
    let mut out = vec![0; grid.dim()];
    grid.index_into(point, &mut out)?;
    Ok(out)
}

/// How the grid origin is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AnchorMode {
    /// Bounding-box minimum of the cloud.
    #[default]
    Min,
    /// The coordinate origin.
    Origin,
}

impl AnchorMode {
    pub fn resolve<T: Scalar>(self, cloud: &PointCloud<T>) -> Result<Vec<T>> {
        match self {
            AnchorMode::Min => Ok(bounding_box(cloud)?.min),
            AnchorMode::Origin => {
                cloud.require_non_empty()?;
                Ok(vec![T::zero(); cloud.dim()])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleFamily {
    /// `epsilon_k = 2^-k`
    Dyadic,
    /// `epsilon_k = 3^-k`
    Ternary,
    /// Caller-supplied list; `k` is the position in the list.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Scale<T> {
    pub k: i32,
    pub epsilon: T,
}

/// Strictly decreasing list of at least two box sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScaleSchedule<T> {
    family: ScaleFamily,
    scales: Vec<Scale<T>>,
}

impl<T: Scalar> ScaleSchedule<T> {
    pub fn dyadic(k_min: i32, k_max: i32) -> Result<Self> {
        Self::power_family(ScaleFamily::Dyadic, 2.0, k_min, k_max)
    }

    pub fn ternary(k_min: i32, k_max: i32) -> Result<Self> {
        Self::power_family(ScaleFamily::Ternary, 3.0, k_min, k_max)
    }

    fn power_family(family: ScaleFamily, base: f64, k_min: i32, k_max: i32) -> Result<Self> {
        if k_min >= k_max {
            return Err(DimError::InvalidSchedule(format!(
                "need k_min < k_max for at least two scales (got {k_min}..{k_max})"
            )));
        }
        let scales = (k_min..=k_max)
            .map(|k| Scale { k, epsilon: T::of(base.powi(-k)) })
            .collect();
        Self::validated(family, scales)
    }

    /// Schedule from an explicit list of box sizes, largest first.
    pub fn explicit(epsilons: &[T]) -> Result<Self> {
        let scales = epsilons
            .iter()
            .enumerate()
            .map(|(i, &epsilon)| Scale { k: i as i32, epsilon })
            .collect();
        Self::validated(ScaleFamily::Explicit, scales)
    }

    fn validated(family: ScaleFamily, scales: Vec<Scale<T>>) -> Result<Self> {
        if scales.len() < 2 {
            return Err(DimError::InvalidSchedule("at least two scales are required".into()));
        }
        for s in &scales {
            if !(s.epsilon.is_finite() && s.epsilon > T::zero()) {
                return Err(DimError::InvalidEpsilon(s.epsilon.as_f64()));
            }
        }
        if scales.windows(2).any(|w| w[1].epsilon >= w[0].epsilon) {
            return Err(DimError::InvalidSchedule("epsilons must be strictly decreasing".into()));
        }
        Ok(Self { family, scales })
    }

    pub fn family(&self) -> ScaleFamily {
        self.family
    }

    pub fn scales(&self) -> &[Scale<T>] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn epsilons(&self) -> impl Iterator<Item = T> + '_ {
        self.scales.iter().map(|s| s.epsilon)
    }

    /// Same family and k labels with every epsilon multiplied by `factor`.
    pub fn rescaled(&self, factor: T) -> Result<Self> {
        let scales = self
            .scales
            .iter()
            .map(|s| Scale { k: s.k, epsilon: s.epsilon * factor })
            .collect();
        Self::validated(self.family, scales)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cloud(points: &[[f64; 2]]) -> PointCloud<f64> {
        PointCloud::from_points(2, points).unwrap()
    }

    #[test]
    fn bounding_box_of_two_points() {
        let bb = bounding_box(&cloud(&[[0.0, 0.0], [1.0, 2.0]])).unwrap();
        assert_eq!(bb.min, vec![0.0, 0.0]);
        assert_eq!(bb.max, vec![1.0, 2.0]);
    }

    #[test]
    fn bounding_box_of_singleton() {
        let bb = bounding_box(&cloud(&[[0.5, 0.5]])).unwrap();
        assert_eq!(bb.min, bb.max);
        assert_eq!(bb.min, vec![0.5, 0.5]);
    }

    #[test]
    fn bounding_box_rejects_empty() {
        let empty = PointCloud::<f64>::new(2, vec![]).unwrap();
        let err = bounding_box(&empty).unwrap_err();
        assert_eq!(err.to_string(), "empty point set");
    }

    #[test]
    fn cloud_rejects_non_finite_and_ragged() {
        assert!(matches!(
            PointCloud::new(2, vec![0.0, f64::NAN]),
            Err(DimError::NonFinite { axis: 1, .. })
        ));
        assert!(PointCloud::new(2, vec![0.0, 1.0, 2.0]).is_err());
        assert!(PointCloud::<f64>::from_points(2, &[vec![1.0]]).is_err());
    }

    #[test]
    fn box_index_examples() {
        let g = GridSpec::new(vec![0.0, 0.0], 0.25).unwrap();
        assert_eq!(box_index(&g, &[0.5, 0.5]).unwrap(), vec![2, 2]);
        let g = GridSpec::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(box_index(&g, &[-0.1, 0.0]).unwrap(), vec![-1, 0]);
        let g = GridSpec::new(vec![0.0, 0.0], 0.125).unwrap();
        assert_eq!(box_index(&g, &[0.99, 0.01]).unwrap(), vec![7, 0]);
    }

    #[test]
    fn box_index_errors() {
        let g = GridSpec::new(vec![0.0, 0.0], 0.5).unwrap();
        assert!(matches!(box_index(&g, &[f64::INFINITY, 0.0]), Err(DimError::NonFinite { .. })));
        assert!(matches!(box_index(&g, &[0.0]), Err(DimError::DimensionMismatch { .. })));
        assert!(GridSpec::new(vec![0.0], 0.0).is_err());
        assert!(GridSpec::new(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn schedules() {
        let s = ScaleSchedule::<f64>::dyadic(3, 7).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s.scales()[0].epsilon, 0.125);
        assert_eq!(s.scales()[4].epsilon, 1.0 / 128.0);
        assert!(ScaleSchedule::<f64>::dyadic(3, 3).is_err());
        assert!(ScaleSchedule::<f64>::explicit(&[0.5, 0.5]).is_err());
        assert!(ScaleSchedule::<f64>::explicit(&[0.5]).is_err());
        assert!(ScaleSchedule::<f64>::explicit(&[0.5, 0.25, -0.1]).is_err());
        let e = ScaleSchedule::<f64>::explicit(&[0.5, 0.25, 0.1]).unwrap();
        assert_eq!(e.scales()[2].k, 2);
    }

    #[test]
    fn points_on_ternary_faces_stay_on_the_upper_side() {
        // 2/3 and 2/9 are not representable; the quotient lands a rounding
        // error away from the integer face
        for k in 1..=12 {
            let eps = 3f64.powi(-k);
            let g = GridSpec::new(vec![0.0], eps).unwrap();
            for numer in [1u64, 2, 7, 20] {
                let x = numer as f64 / 3f64.powi(k);
                assert_eq!(box_index(&g, &[x]).unwrap(), vec![numer as i64], "k={k} n={numer}");
            }
        }
    }

    #[test]
    fn f32_grid_matches_f64_on_exact_inputs() {
        let g = GridSpec::new(vec![0.0f32, 0.0], 0.25).unwrap();
        assert_eq!(box_index(&g, &[0.5, 0.75]).unwrap(), vec![2, 3]);
    }

    proptest! {
        #[test]
        fn cell_contains_point(
            x in -100.0f64..100.0, y in -100.0f64..100.0,
            ax in -10.0f64..10.0, ay in -10.0f64..10.0,
            k in -3i32..10,
        ) {
            let eps = 2f64.powi(-k);
            let g = GridSpec::new(vec![ax, ay], eps).unwrap();
            let idx = box_index(&g, &[x, y]).unwrap();
            for (axis, (&c, &a)) in [x, y].iter().zip(&[ax, ay]).enumerate() {
                let lo = a + idx[axis] as f64 * eps;
                // lower face is inclusive, upper exclusive (up to rounding of the face itself)
                prop_assert!(lo <= c + eps * 1e-12);
                prop_assert!(c < lo + eps + eps * 1e-12);
            }
        }

        #[test]
        fn translation_covariance(
            x in -50.0f64..50.0, y in -50.0f64..50.0,
            ax in -5.0f64..5.0, ay in -5.0f64..5.0,
        ) {
            // dyadic anchor and epsilon keep x - a exact
            let ax = (ax * 64.0).round() / 64.0;
            let ay = (ay * 64.0).round() / 64.0;
            let eps = 0.125;
            let shifted = GridSpec::new(vec![ax, ay], eps).unwrap();
            let origin = GridSpec::new(vec![0.0, 0.0], eps).unwrap();
            prop_assert_eq!(
                box_index(&shifted, &[x, y]).unwrap(),
                box_index(&origin, &[x - ax, y - ay]).unwrap()
            );
        }

        #[test]
        fn bounding_box_is_order_invariant(
            pts in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..50),
            seed in any::<u64>(),
        ) {
            let a: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
            let mut b = a.clone();
            let n = b.len();
            for i in 0..n {
                let j = ((seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64)) % n as u64) as usize;
                b.swap(i, j);
            }
            let ba = bounding_box(&cloud(&a)).unwrap();
            let bb = bounding_box(&cloud(&b)).unwrap();
            prop_assert_eq!(&ba, &bb);
            for p in &a {
                prop_assert!(ba.contains(p));
            }
            // tight: every face is attained
            for axis in 0..2 {
                prop_assert!(a.iter().any(|p| p[axis] == ba.min[axis]));
                prop_assert!(a.iter().any(|p| p[axis] == ba.max[axis]));
            }
        }
    }
}
