//! Point-set generators: the Hénon orbit and reference sets of known dimension.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DimError, Result};
use crate::geometry::PointCloud;
use crate::scalar::Scalar;

/// Coordinates beyond this magnitude count as an escaped orbit.
pub const ESCAPE_RADIUS: f64 = 1.0e6;

pub const MAX_CANTOR_LEVEL: u32 = 20;

/// Parameters of the planar map `x' = 1 - a x^2 + y`, `y' = b x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HenonParams<T> {
    pub a: T,
    pub b: T,
    pub seed: [T; 2],
    /// Iterates discarded before sampling starts.
    pub transient: usize,
    /// Iterates kept.
    pub samples: usize,
}

impl<T: Scalar> Default for HenonParams<T> {
    /// The classical attractor: `a = 1.4`, `b = 0.3`, seeded at the origin,
    /// 1000 transient iterates and 10^6 samples.
    fn default() -> Self {
        Self {
            a: T::of(1.4),
            b: T::of(0.3),
            seed: [T::zero(), T::zero()],
            transient: 1_000,
            samples: 1_000_000,
        }
    }
}

/// Iterates the Hénon map from `params.seed`. The seed itself is step 0 and
/// is never emitted; the output holds steps `transient + 1 ..= transient + samples`.
pub fn henon_orbit<T: Scalar>(params: &HenonParams<T>) -> Result<PointCloud<T>> {
    if params.samples == 0 {
        return Err(DimError::InvalidParameter("samples must be >= 1".into()));
    }
    let [mut x, mut y] = params.seed;
    let escape = T::of(ESCAPE_RADIUS);
    let total = params.transient + params.samples;
    let mut coords = Vec::with_capacity(params.samples * 2);
    for step in 1..=total {
        let nx = T::one() - params.a * x * x + y;
        let ny = params.b * x;
        x = nx;
        y = ny;
        // NaN compares false, so test the negation
        if !(x.abs() <= escape && y.abs() <= escape) {
            return Err(DimError::OrbitDiverged { step });
        }
        if step > params.transient {
            coords.push(x);
            coords.push(y);
        }
    }
    PointCloud::new(2, coords)
}

/// Left endpoints of the `level`-th middle-thirds construction, ascending, in `R^1`.
pub fn cantor_points<T: Scalar>(level: u32) -> Result<PointCloud<T>> {
    if !(1..=MAX_CANTOR_LEVEL).contains(&level) {
        return Err(DimError::InvalidParameter(format!(
            "cantor level must be in 1..={MAX_CANTOR_LEVEL}, got {level}"
        )));
    }
    let denom = 3u64.pow(level);
    let denom_t = T::of(denom as f64);
    // bit j of `mask` selects ternary digit 2 at position level-1-j
    let coords = (0u64..1 << level)
        .map(|mask| {
            let numer = (0..level).fold(0u64, |acc, j| {
                let digit = if mask >> (level - 1 - j) & 1 == 1 { 2 } else { 0 };
                acc * 3 + digit
            });
            T::of(numer as f64) / denom_t
        })
        .collect();
    PointCloud::new(1, coords)
}

/// `samples` equispaced points of `[0, 1] x {0}` including both ends.
pub fn uniform_segment<T: Scalar>(samples: usize) -> Result<PointCloud<T>> {
    if samples == 0 {
        return Err(DimError::InvalidParameter("samples must be >= 1".into()));
    }
    let mut coords = Vec::with_capacity(samples * 2);
    for i in 0..samples {
        coords.push(equispaced(i, samples));
        coords.push(T::zero());
    }
    PointCloud::new(2, coords)
}

/// Row-major equispaced grid over `[0, 1]^2` with `ceil(sqrt(samples))` points per
/// side, truncated to the first `samples` points. Perfect squares give a full grid.
pub fn uniform_square<T: Scalar>(samples: usize) -> Result<PointCloud<T>> {
    if samples == 0 {
        return Err(DimError::InvalidParameter("samples must be >= 1".into()));
    }
    let mut side = (samples as f64).sqrt() as usize;
    while side * side < samples {
        side += 1;
    }
    while side > 1 && (side - 1) * (side - 1) >= samples {
        side -= 1;
    }
    let mut coords = Vec::with_capacity(samples * 2);
    'fill: for i in 0..side {
        for j in 0..side {
            if coords.len() == samples * 2 {
                break 'fill;
            }
            coords.push(equispaced(i, side));
            coords.push(equispaced(j, side));
        }
    }
    PointCloud::new(2, coords)
}

fn equispaced<T: Scalar>(i: usize, n: usize) -> T {
    if n == 1 {
        T::zero()
    } else {
        T::of_usize(i) / T::of_usize(n - 1)
    }
}

/// `x -> matrix * x + offset`, matrix row-major `d x d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AffineMap<T> {
    pub matrix: Vec<T>,
    pub offset: Vec<T>,
}

impl<T: Scalar> AffineMap<T> {
    /// Uniform contraction by `ratio` toward `fixed_point`.
    pub fn similarity_toward(ratio: T, fixed_point: &[T]) -> Self {
        let d = fixed_point.len();
        let mut matrix = vec![T::zero(); d * d];
        for i in 0..d {
            matrix[i * d + i] = ratio;
        }
        let offset = fixed_point.iter().map(|&v| (T::one() - ratio) * v).collect();
        Self { matrix, offset }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, x: &[T], out: &mut [T]) {
        let d = self.dim();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.matrix[i * d..(i + 1) * d];
            *o = row.iter().zip(x).fold(self.offset[i], |acc, (&m, &v)| acc + m * v);
        }
    }

    /// Spectral norm, by power iteration on `M^T M`.
    pub fn operator_norm(&self) -> f64 {
        let d = self.dim();
        let m: Vec<f64> = self.matrix.iter().map(|v| v.as_f64()).collect();
        let mut ata = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                ata[i * d + j] = (0..d).map(|r| m[r * d + i] * m[r * d + j]).sum();
            }
        }
        // start off-axis so no eigenvector is orthogonal to it by symmetry
        let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * i as f64).collect();
        let mut lambda = 0.0;
        for _ in 0..500 {
            let w: Vec<f64> = (0..d)
                .map(|i| (0..d).map(|j| ata[i * d + j] * v[j]).sum())
                .collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = w.into_iter().map(|x| x / norm).collect();
            if (next - lambda).abs() <= 1e-15 * next {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda.sqrt()
    }
}

/// Random-iteration ("chaos game") description of an iterated function system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct IfsSpec<T> {
    maps: Vec<AffineMap<T>>,
    probabilities: Vec<f64>,
    seed: Vec<T>,
    transient: usize,
    samples: usize,
    rng_seed: u64,
}

impl<T: Scalar> IfsSpec<T> {
    pub fn new(
        maps: Vec<AffineMap<T>>,
        probabilities: Vec<f64>,
        seed: Vec<T>,
        transient: usize,
        samples: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        if maps.is_empty() {
            return Err(DimError::InvalidParameter("an IFS needs at least one map".into()));
        }
        if samples == 0 {
            return Err(DimError::InvalidParameter("samples must be >= 1".into()));
        }
        let d = seed.len();
        for (index, map) in maps.iter().enumerate() {
            if map.dim() != d || map.matrix.len() != d * d {
                return Err(DimError::DimensionMismatch { expected: d, found: map.dim() });
            }
            let norm = map.operator_norm();
            if !(norm < 1.0) {
                return Err(DimError::NonContractive { index, norm });
            }
        }
        if probabilities.len() != maps.len() {
            return Err(DimError::InvalidProbabilities(format!(
                "{} weights for {} maps",
                probabilities.len(),
                maps.len()
            )));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(DimError::InvalidProbabilities("weights must be finite and non-negative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(DimError::InvalidProbabilities(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { maps, probabilities, seed, transient, samples, rng_seed })
    }

    /// Three half-scale maps toward the vertices of a triangle, equal weights.
    pub fn sierpinski(
        vertices: [[T; 2]; 3],
        seed: [T; 2],
        transient: usize,
        samples: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        let half = T::of(0.5);
        let maps = vertices.iter().map(|v| AffineMap::similarity_toward(half, v)).collect();
        Self::new(maps, vec![1.0 / 3.0; 3], seed.to_vec(), transient, samples, rng_seed)
    }

    pub fn maps(&self) -> &[AffineMap<T>] {
        &self.maps
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn dim(&self) -> usize {
        self.seed.len()
    }
}

/// Right-isoceles triangle with legs on the axes, `(0,0), (1,0), (0,1)`.
pub fn unit_right_triangle<T: Scalar>() -> [[T; 2]; 3] {
    [
        [T::zero(), T::zero()],
        [T::one(), T::zero()],
        [T::zero(), T::one()],
    ]
}

/// Iterates needed for a contraction of ratio `ratio` to bring a point at
/// distance `diameter` within `epsilon` of the attractor.
pub fn transient_for(ratio: f64, diameter: f64, epsilon: f64) -> usize {
    if diameter <= epsilon {
        return 0;
    }
    ((epsilon / diameter).ln() / ratio.ln()).ceil() as usize
}

/// Chaos game: a ChaCha8 stream keyed by `rng_seed` picks one map per step.
/// Bit-for-bit reproducible for a fixed spec.
pub fn ifs_chaos_game<T: Scalar>(spec: &IfsSpec<T>) -> Result<PointCloud<T>> {
    let d = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let cumulative: Vec<f64> = spec
        .probabilities
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let last_live = spec.probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0);

    let mut x = spec.seed.clone();
    let mut next = vec![T::zero(); d];
    let mut coords = Vec::with_capacity(spec.samples * d);
    for step in 0..spec.transient + spec.samples {
        let u: f64 = rng.gen();
        let choice = cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(last_live);
        spec.maps[choice].apply(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
        if step >= spec.transient {
            coords.extend_from_slice(&x);
        }
    }
    PointCloud::new(d, coords)
}
