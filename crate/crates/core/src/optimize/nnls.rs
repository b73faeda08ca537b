//! Nonnegative least squares (Lawson–Hanson active set) and cone membership.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Result of fitting `w ≈ sum_v lambda_v g_v` with `lambda >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeFit {
    pub feasible: bool,
    pub lambdas: Vec<f64>,
    pub residual: f64,
}

/// Relative feasibility threshold: `residual <= CONE_TOL * (1 + |w|)`.
pub const CONE_TOL: f64 = 1e-8;

/// Solves `min |A x - b|` subject to `x >= 0`, with the columns of `A` given
/// as `cols`. Returns `x` and the residual norm.
pub fn nnls(cols: &[Vec<f64>], b: &[f64]) -> (Vec<f64>, f64) {
    let m = b.len();
    let k = cols.len();
    let a = DMatrix::from_fn(m, k, |i, j| cols[j][i]);
    let bv = DVector::from_column_slice(b);
    let mut x = DVector::zeros(k);
    let mut passive = vec![false; k];
    let tol = 1e-12 * (1.0 + bv.norm()) * (1.0 + a.norm());

    for _ in 0..3 * k + 10 {
        let r = &bv - &a * &x;
        let grad = a.transpose() * r;
        let next = (0..k)
            .filter(|&j| !passive[j] && grad[j] > tol)
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(j) = next else { break };
        passive[j] = true;

        loop {
            let idx: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
            let sub = DMatrix::from_fn(m, idx.len(), |i, c| a[(i, idx[c])]);
            let z = least_squares(&sub, &bv);
            if z.iter().all(|&v| v > 0.0) {
                for (c, &j) in idx.iter().enumerate() {
                    x[j] = z[c];
                }
                break;
            }
            // Step back to the boundary and drop the variables that hit zero.
            let mut alpha = 1.0f64;
            for (c, &j) in idx.iter().enumerate() {
                if z[c] <= 0.0 {
                    let denom = x[j] - z[c];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            for (c, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[c] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if idx.iter().all(|&j| !passive[j]) {
                break;
            }
        }
    }
    let residual = (&bv - &a * &x).norm();
    (x.iter().copied().collect(), residual)
}

fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1e-300);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Whether `w` lies in the cone spanned by `generators`.
pub fn cone_membership(generators: &[Vec<f64>], w: &[f64]) -> ConeFit {
    assert!(!generators.is_empty(), "cone needs at least one generator");
    let (lambdas, residual) = nnls(generators, w);
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    ConeFit {
        feasible: residual <= CONE_TOL * (1.0 + norm),
        lambdas,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_generators_is_inside() {
        let g = vec![vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]];
        let fit = cone_membership(&g, &[1.0, 0.0, -1.0]);
        assert!(fit.feasible);
        assert!(fit.residual < 1e-14);
        assert!((fit.lambdas[0] - 1.0).abs() < 1e-12 && (fit.lambdas[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn opposite_ray_is_outside() {
        let g = vec![vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]];
        let fit = cone_membership(&g, &[-1.0, 1.0, 0.0]);
        assert!(!fit.feasible);
        assert!(fit.lambdas.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn matches_brute_force_on_small_problem() {
        // Columns in R^3; enumerate all supports and keep the best feasible LS fit.
        let cols = vec![vec![1.0, 0.2, 0.0], vec![0.3, 1.0, 0.1], vec![-0.5, 0.4, 1.0], vec![0.0, -1.0, 0.3]];
        let b = [0.4, -0.7, 0.9];
        let (_, res) = nnls(&cols, &b);
        let mut best = f64::INFINITY;
        for mask in 0u32..16 {
            let idx: Vec<usize> = (0..4).filter(|j| mask >> j & 1 == 1).collect();
            let sub = DMatrix::from_fn(3, idx.len(), |i, c| cols[idx[c]][i]);
            let z = least_squares(&sub, &DVector::from_column_slice(&b));
            if z.iter().all(|&v| v >= -1e-12) {
                let r = (DVector::from_column_slice(&b) - &sub * &z).norm();
                best = best.min(r);
            }
        }
        assert!((res - best).abs() < 1e-10, "{res} vs {best}");
    }
}
