//! Small dense linear-algebra helpers shared by the summaries, the regression
//! adjustment and the depth regions.

use nalgebra::{DMatrix, DVector};

/// Least-squares solution of `x b = y` through a column-equilibrated SVD.
///
/// Singular values below `rcond * s_max` are treated as zero, which yields the
/// minimum-norm solution. Returns the solution and the numerical rank.
pub fn least_squares(x: &DMatrix<f64>, y: &DMatrix<f64>, rcond: f64) -> (DMatrix<f64>, usize) {
    let cols = x.ncols();
    let norms: Vec<f64> = (0..cols)
        .map(|j| {
            let n = x.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = x.clone();
    for (j, &n) in norms.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / n);
    }
    let svd = scaled.svd(true, true);
    let s_max = svd.singular_values.max();
    let cutoff = rcond * s_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut inv_s = DMatrix::zeros(svd.singular_values.len(), svd.singular_values.len());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            inv_s[(i, i)] = 1.0 / s;
        }
    }
    let mut solution = v_t.transpose() * inv_s * u.transpose() * y;
    for (j, &n) in norms.iter().enumerate() {
        solution.row_mut(j).scale_mut(1.0 / n);
    }
    (solution, rank)
}

/// Ordinary least squares of `y` on the given regressor columns (no intercept added).
pub fn ols(columns: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let rows = y.len();
    let x = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let y = DMatrix::from_column_slice(rows, 1, y);
    let (b, _) = least_squares(&x, &y, 1e-12);
    b.column(0).iter().copied().collect()
}

/// Weighted mean and covariance (weights normalized internally, no bias correction).
pub fn weighted_mean_cov(points: &[&[f64]], weights: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let p = points.first().map_or(0, |x| x.len());
    let total: f64 = weights.iter().sum();
    let mut mean = DVector::zeros(p);
    for (x, &w) in points.iter().zip(weights) {
        for j in 0..p {
            mean[j] += w * x[j];
        }
    }
    mean /= total;
    let mut cov = DMatrix::zeros(p, p);
    for (x, &w) in points.iter().zip(weights) {
        for a in 0..p {
            let da = x[a] - mean[a];
            for b in 0..=a {
                cov[(a, b)] += w * da * (x[b] - mean[b]);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            cov[(b, a)] = cov[(a, b)];
        }
    }
    cov /= total;
    (mean, cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_exact_coefficients() {
        let x1: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let x2: Vec<f64> = x1.iter().map(|v| v * v).collect();
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        let b = ols(&[x1, x2], &y);
        assert!((b[0] - 2.0).abs() < 1e-10);
        assert!((b[1] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let y = DMatrix::from_column_slice(3, 1, &[2.0, 4.0, 6.0]);
        let (b, rank) = least_squares(&x, &y, 1e-10);
        assert_eq!(rank, 1);
        assert!((b[(0, 0)] - 1.0).abs() < 1e-10 && (b[(1, 0)] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_design_is_rank_zero() {
        let x = DMatrix::zeros(4, 2);
        let y = DMatrix::from_element(4, 1, 1.0);
        let (b, rank) = least_squares(&x, &y, 1e-10);
        assert_eq!(rank, 0);
        assert!(b.iter().all(|v| *v == 0.0));
    }
}
