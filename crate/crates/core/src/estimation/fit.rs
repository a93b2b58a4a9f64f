use serde::{Deserialize, Serialize};

use crate::error::{DimError, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// Ordinary least squares line with intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FitResult<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    pub n_points: usize,
    pub residuals: Vec<T>,
}

fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().collect::<CompensatedSum<T>>().value() / T::of_usize(v.len())
}

/// Least-squares fit of `ys` on `xs`. With `xs = log2(1/eps)` and
/// `ys = log2 n(eps)` the slope is the box-counting dimension.
///
/// `r_squared` is 1 when `ys` is constant (the horizontal line is exact).
pub fn loglog_fit<T: Scalar>(xs: &[T], ys: &[T]) -> Result<FitResult<T>> {
    if xs.len() != ys.len() {
        return Err(DimError::DegenerateFit(format!(
            "{} abscissae for {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(DimError::DegenerateFit("at least two points are required".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(DimError::DegenerateFit("non-finite input".into()));
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxx = xs.iter().map(|&x| (x - mx) * (x - mx)).collect::<CompensatedSum<T>>().value();
    if sxx == T::zero() {
        return Err(DimError::DegenerateFit("all abscissae are equal".into()));
    }
    let sxy = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mx) * (y - my))
        .collect::<CompensatedSum<T>>()
        .value();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<T> = xs.iter().zip(ys).map(|(&x, &y)| y - (intercept + slope * x)).collect();
    let ss_res = residuals.iter().map(|&r| r * r).collect::<CompensatedSum<T>>().value();
    let ss_tot = ys.iter().map(|&y| (y - my) * (y - my)).collect::<CompensatedSum<T>>().value();
    let r_squared = if ss_tot == T::zero() {
        T::one()
    } else {
        (T::one() - ss_res / ss_tot).max(T::zero()).min(T::one())
    };
    Ok(FitResult { slope, intercept, r_squared, n_points: xs.len(), residuals })
}

/// Limit of the geometric-growth model `n(2^-b) = n0 (n1/n0)^((b - k0)/(k1 - k0))`:
/// the dimension is `log2(n1/n0) / (k1 - k0)`.
pub fn two_scale_extrapolation<T: Scalar>(k0: i32, n0: usize, k1: i32, n1: usize) -> Result<T> {
    if k1 <= k0 {
        return Err(DimError::DegenerateFit(format!("need k1 > k0 (got k0 = {k0}, k1 = {k1})")));
    }
    if n0 == 0 || n1 == 0 {
        return Err(DimError::InvalidParameter("counts must be >= 1".into()));
    }
    Ok((T::of_usize(n1) / T::of_usize(n0)).log2() / T::of(f64::from(k1 - k0)))
}

/// Endpoint slope for arbitrary box sizes; equals [`two_scale_extrapolation`]
/// on dyadic scales.
pub fn endpoint_slope<T: Scalar>(eps0: T, n0: usize, eps1: T, n1: usize) -> Result<T> {
    if !(eps1 < eps0 && eps1 > T::zero()) {
        return Err(DimError::DegenerateFit("need eps0 > eps1 > 0".into()));
    }
    if n0 == 0 || n1 == 0 {
        return Err(DimError::InvalidParameter("counts must be >= 1".into()));
    }
    Ok((T::of_usize(n1) / T::of_usize(n0)).log2() / (eps0 / eps1).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Normal equations solved in closed form, no compensation: an
    /// independent route to the slope.
    fn normal_equations(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.3 * x + 2.0).collect();
        let fit = loglog_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 1.3).abs() < 1e-12);
        assert!((fit.intercept - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.n_points, 10);
    }

    #[test]
    fn two_points_are_rise_over_run() {
        let fit = loglog_fit(&[1.0f64, 3.0], &[2.0, 7.0]).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-15);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn published_table_slope() {
        let counts = [177.0f64, 433.0, 1037.0, 2467.0, 5763.0];
        let xs: Vec<f64> = (3..=7).map(f64::from).collect();
        let ys: Vec<f64> = counts.iter().map(|c| c.log2()).collect();
        let oracle = normal_equations(&xs, &ys);
        let fit = loglog_fit(&xs, &ys).unwrap();
        assert!((fit.slope - oracle).abs() < 1e-12);
        assert!((fit.slope - 1.2560).abs() < 0.001, "{}", fit.slope);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(loglog_fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(DimError::DegenerateFit(_))));
        assert!(loglog_fit(&[1.0], &[1.0]).is_err());
        assert!(loglog_fit(&[1.0, 2.0], &[1.0]).is_err());
        assert!(loglog_fit(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
        let flat = loglog_fit(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(flat.slope, 0.0);
        assert_eq!(flat.r_squared, 1.0);
    }

    #[test]
    fn extrapolation_examples() {
        let v: f64 = two_scale_extrapolation(3, 177, 7, 5763).unwrap();
        let oracle = (5763.0f64 / 177.0).ln() / 2f64.ln() / 4.0;
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 1.25625).abs() < 1e-5, "{v}");
        assert_eq!(two_scale_extrapolation::<f64>(4, 10, 5, 20).unwrap(), 1.0);
        assert_eq!(two_scale_extrapolation::<f64>(4, 10, 5, 40).unwrap(), 2.0);
        assert!(two_scale_extrapolation::<f64>(3, 10, 3, 20).is_err());
        assert!(two_scale_extrapolation::<f64>(3, 0, 4, 20).is_err());
        let e: f64 = endpoint_slope(0.125, 177, 1.0 / 128.0, 5763).unwrap();
        assert!((e - v).abs() < 1e-14);
    }

    #[test]
    fn residuals_sum_to_zero() {
        let xs = [3.0, 4.0, 5.0, 6.0, 7.0];
        let ys = [7.5, 8.7, 10.1, 11.2, 12.6];
        let fit = loglog_fit(&xs, &ys).unwrap();
        assert!(fit.residuals.iter().sum::<f64>().abs() < 1e-9);
        assert!(fit.r_squared > 0.99 && fit.r_squared <= 1.0);
    }

    proptest! {
        #[test]
        fn affine_equivariance(
            ys in prop::collection::vec(-20.0f64..20.0, 3..12),
            shift in -100.0f64..100.0,
            scale in 0.1f64..10.0,
        ) {
            let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
            let base = loglog_fit(&xs, &ys).unwrap();
            let shifted: Vec<f64> = ys.iter().map(|y| y + shift).collect();
            let s = loglog_fit(&xs, &shifted).unwrap();
            prop_assert!((s.slope - base.slope).abs() < 1e-9);
            prop_assert!((s.intercept - base.intercept - shift).abs() < 1e-9);
            let scaled: Vec<f64> = xs.iter().map(|x| x * scale).collect();
            let c = loglog_fit(&scaled, &ys).unwrap();
            prop_assert!((c.slope - base.slope / scale).abs() < 1e-9 * (1.0 + base.slope.abs() / scale));
            prop_assert!(base.residuals.iter().sum::<f64>().abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&base.r_squared));
        }

        #[test]
        fn two_point_fit_matches_extrapolation(k0 in 0i32..10, dk in 1i32..8, n0 in 1usize..10_000, n1 in 1usize..10_000) {
            let fit = loglog_fit(
                &[f64::from(k0), f64::from(k0 + dk)],
                &[(n0 as f64).log2(), (n1 as f64).log2()],
            ).unwrap();
            let ex: f64 = two_scale_extrapolation(k0, n0, k0 + dk, n1).unwrap();
            prop_assert!((fit.slope - ex).abs() < 1e-12);
        }

        #[test]
        fn exact_power_law_is_recovered(
            d in 0.1f64..3.0, c in 0.5f64..100.0,
            eps in prop::collection::btree_set(1u32..40, 2..8),
        ) {
            // n(eps) = C eps^-d on an arbitrary schedule of box sizes 1/m
            let eps: Vec<f64> = eps.iter().rev().map(|&m| 1.0 / f64::from(m)).collect();
            let xs: Vec<f64> = eps.iter().map(|e| -e.log2()).collect();
            let ys: Vec<f64> = eps.iter().map(|e| (c * e.powf(-d)).log2()).collect();
            let fit = loglog_fit(&xs, &ys).unwrap();
            prop_assert!((fit.slope - d).abs() < 1e-9);
            let ends: f64 = (ys[ys.len() - 1] - ys[0]) / (xs[xs.len() - 1] - xs[0]);
            prop_assert!((ends - d).abs() < 1e-9);
        }
    }
}
