//! Second-order finite differences and cumulative trapezoid sums on a
//! monotone (not necessarily uniform) grid.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("need at least {needed} grid points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("grid is not strictly increasing at index {index}")]
    NotIncreasing { index: usize },
    #[error("grid has {grid} points but {values} values were supplied")]
    LengthMismatch { grid: usize, values: usize },
}

pub fn check_grid(times: &[f64]) -> Result<(), QuadratureError> {
    if times.len() < 2 {
        return Err(QuadratureError::TooFewPoints {
            needed: 2,
            found: times.len(),
        });
    }
    if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(QuadratureError::NotIncreasing { index: i + 1 });
    }
    Ok(())
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "a grid needs at least two points");
    let step = (end - start) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                end
            } else {
                start + step * i as f64
            }
        })
        .collect()
}

/// Derivative estimate at every grid point: three-point central stencil in the
/// interior and three-point one-sided stencils at the ends (two-point
/// difference when only two points exist). Written in terms of differences so
/// that a constant series gives exactly zero.
pub fn derivative(times: &[f64], values: &[f64]) -> Result<Vec<f64>, QuadratureError> {
    check_grid(times)?;
    let n = times.len();
    if values.len() != n {
        return Err(QuadratureError::LengthMismatch {
            grid: n,
            values: values.len(),
        });
    }
    if n == 2 {
        let d = (values[1] - values[0]) / (times[1] - times[0]);
        return Ok(vec![d, d]);
    }
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let h1 = times[i] - times[i - 1];
        let h2 = times[i + 1] - times[i];
        let fwd = values[i + 1] - values[i];
        let back = values[i] - values[i - 1];
        out[i] = (h1 * h1 * fwd + h2 * h2 * back) / (h1 * h2 * (h1 + h2));
    }
    {
        let h1 = times[1] - times[0];
        let h2 = times[2] - times[1];
        let d1 = values[1] - values[0];
        let d2 = values[2] - values[0];
        out[0] = (h1 + h2) / (h1 * h2) * d1 - h1 / (h2 * (h1 + h2)) * d2;
    }
    {
        let h1 = times[n - 2] - times[n - 3];
        let h2 = times[n - 1] - times[n - 2];
        let e1 = values[n - 2] - values[n - 1];
        let e2 = values[n - 3] - values[n - 1];
        out[n - 1] = -(h1 + h2) / (h1 * h2) * e1 + h2 / (h1 * (h1 + h2)) * e2;
    }
    Ok(out)
}

/// Running trapezoid integral; element `i` integrates from `times[0]` to `times[i]`.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Result<Vec<f64>, QuadratureError> {
    check_grid(times)?;
    if values.len() != times.len() {
        return Err(QuadratureError::LengthMismatch {
            grid: times.len(),
            values: values.len(),
        });
    }
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(acc);
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratics_are_differentiated_exactly() {
        // three-point stencils are exact for quadratics, even on a ragged grid
        let t = [0.0, 0.1, 0.25, 0.3, 0.7, 1.0];
        let f: Vec<f64> = t.iter().map(|x| 3.0 * x * x - 2.0 * x + 1.0).collect();
        let d = derivative(&t, &f).unwrap();
        for (x, dx) in t.iter().zip(&d) {
            assert!((dx - (6.0 * x - 2.0)).abs() < 1e-12, "{x}: {dx}");
        }
    }

    #[test]
    fn constant_series_has_zero_derivative() {
        let t = uniform_grid(0.0, 10.0, 2001);
        let f = vec![0.731_058_578_630_004_9; t.len()];
        assert!(derivative(&t, &f).unwrap().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn trapezoid_known_sum() {
        // 0.5 + 2.5 + 6.5 for x^2 on 0..3
        let t = [0.0, 1.0, 2.0, 3.0];
        let f = [0.0, 1.0, 4.0, 9.0];
        assert_eq!(
            cumulative_trapezoid(&t, &f).unwrap(),
            vec![0.0, 0.5, 3.0, 9.5]
        );
    }

    #[test]
    fn trapezoid_is_second_order() {
        let err = |n: usize| {
            let t = uniform_grid(0.0, 2.0, n);
            let f: Vec<f64> = t.iter().map(|x| x.sin()).collect();
            let c = cumulative_trapezoid(&t, &f).unwrap();
            (c[n - 1] - (1.0 - 2.0f64.cos())).abs()
        };
        let ratio = err(101) / err(201);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(
            check_grid(&[1.0]),
            Err(QuadratureError::TooFewPoints { .. })
        ));
        assert!(matches!(
            check_grid(&[0.0, 1.0, 1.0]),
            Err(QuadratureError::NotIncreasing { index: 2 })
        ));
        assert!(derivative(&[0.0, 1.0], &[1.0]).is_err());
        let g = uniform_grid(0.0, 10.0, 2001);
        assert_eq!(g.len(), 2001);
        assert_eq!(g[2000], 10.0);
        assert!((g[1] - 0.005).abs() < 1e-15);
    }
}
