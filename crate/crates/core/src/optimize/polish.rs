//! Newton polish on the optimality system of a candidate type face.
//!
//! For a face `G` with normal `l`, the optimum of type `G` is a critical
//! point of `l(phi(theta))` subject to `phi(theta) - mu` lying in the span of
//! `G`. With `N` an orthonormal basis of the complement of that span (and of
//! the all-ones vector), the system is
//! `N (phi(theta) - mu) = 0` and `J^T (l - N^T eta) = 0`.

use nalgebra::{DMatrix, DVector};

use super::{project_params, Candidate, Problem, ZERO_VALUE};
use crate::polytope::Face;

const FACE_TOLS: [f64; 7] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];
const MAX_ITERS: usize = 40;
const SOLVED: f64 = 1e-12;

/// Tries every face suggested by the near-active facets at `theta0` and
/// returns the best point found, if it does not increase the value.
pub(crate) fn polish(prob: &Problem, theta0: &[f64]) -> Option<Candidate> {
    let w = prob.residual(theta0);
    let scores = prob.scores(&w);
    let v0 = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if v0 < ZERO_VALUE {
        return None;
    }
    let ball = &prob.geom.ball;
    let mut masks: Vec<u128> = Vec::new();
    for tol in FACE_TOLS {
        let mask = scores
            .iter()
            .enumerate()
            .filter(|(_, &s)| s >= v0 - tol * v0.max(1e-3))
            .fold(u128::MAX, |m, (f, _)| m & ball.facet_mask(f));
        if mask != 0 && !masks.contains(&mask) {
            masks.push(mask);
        }
    }
    let mut best: Option<Candidate> = None;
    for mask in masks {
        let Some(face) = prob.geom.lattice.face_by_mask(mask) else {
            continue;
        };
        let Some(theta) = solve_face(prob, face, theta0) else {
            continue;
        };
        let value = prob.value(&theta);
        if value <= v0 + 1e-13 && best.as_ref().map_or(true, |b| value < b.value) {
            best = Some(Candidate { theta, value });
        }
    }
    best
}

/// Orthonormal basis of the complement of `span(vectors, 1)` in `R^n`, as rows.
fn complement_basis(n: usize, vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let add = |v: &[f64], basis: &mut Vec<Vec<f64>>| -> bool {
        let mut u = v.to_vec();
        for _ in 0..2 {
            for b in basis.iter() {
                let d: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in u.iter_mut().zip(b) {
                    *x -= d * y;
                }
            }
        }
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            basis.push(u.iter().map(|x| x / norm).collect());
            true
        } else {
            false
        }
    };
    add(&vec![1.0; n], &mut basis);
    for v in vectors {
        add(v, &mut basis);
    }
    let spanned = basis.len();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        add(&e, &mut basis);
    }
    basis.split_off(spanned)
}

fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Some(DVector::zeros(a.ncols()));
    }
    let svd = a.clone().svd(true, true);
    let eps = 1e-13 * svd.singular_values.max().max(1e-300);
    svd.solve(b, eps).ok()
}

fn solve_face(prob: &Problem, face: &Face, theta0: &[f64]) -> Option<Vec<f64>> {
    let n = prob.n;
    let pd = prob.model.param_dim();
    let ball = &prob.geom.ball;
    let spans: Vec<Vec<f64>> = face
        .span_basis
        .iter()
        .map(|&v| ball.vertices()[v].coords_f64(n))
        .collect();
    let nrows = complement_basis(n, &spans);
    let c = nrows.len();
    let nmat = DMatrix::from_fn(c, n, |i, j| nrows[i][j]);
    let ell = DVector::from_column_slice(face.normal_f64(ball));
    let mu = DVector::from_column_slice(&prob.mu);

    let system = |theta: &[f64], eta: &DVector<f64>, with_jac: bool| {
        let jet = prob.model.jet(theta, with_jac);
        let jm = DMatrix::from_row_slice(n, pd, &jet.jac);
        let phi = DVector::from_column_slice(&jet.value);
        let u = &ell - nmat.transpose() * eta;
        let f1 = &nmat * (phi - &mu);
        let f2 = jm.transpose() * &u;
        let mut f = DVector::zeros(c + pd);
        f.rows_mut(0, c).copy_from(&f1);
        f.rows_mut(c, pd).copy_from(&f2);
        let k = with_jac.then(|| {
            let h = DMatrix::from_row_slice(pd, pd, &jet.weighted_hessian(u.as_slice()));
            let mut k = DMatrix::zeros(c + pd, c + pd);
            k.view_mut((0, 0), (c, pd)).copy_from(&(&nmat * &jm));
            k.view_mut((c, 0), (pd, pd)).copy_from(&h);
            k.view_mut((c, pd), (pd, c)).copy_from(&(-(jm.transpose() * nmat.transpose())));
            k
        });
        (f, k)
    };

    let mut theta = theta0.to_vec();
    let mut eta = {
        let jet = prob.model.jet(&theta, false);
        let jm = DMatrix::from_row_slice(n, pd, &jet.jac);
        let a = jm.transpose() * nmat.transpose();
        pinv_solve(&a, &(jm.transpose() * &ell)).unwrap_or_else(|| DVector::zeros(c))
    };

    let mut converged = false;
    for _ in 0..MAX_ITERS {
        let (f, k) = system(&theta, &eta, true);
        let fnorm = f.norm();
        if fnorm <= SOLVED {
            converged = true;
            break;
        }
        let dz = pinv_solve(&k.expect("jacobian requested"), &(-&f))?;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-4 {
            let cand: Vec<f64> = theta.iter().enumerate().map(|(i, x)| x + t * dz[i]).collect();
            let ceta = &eta + dz.rows(pd, c) * t;
            let (cf, _) = system(&cand, &ceta, false);
            if cf.norm() < fnorm {
                theta = cand;
                eta = ceta;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !converged {
        let (f, _) = system(&theta, &eta, false);
        if f.norm() > SOLVED {
            return None;
        }
    }
    let (inside, dist) = project_params(prob.model, &theta);
    (dist <= 1e-9).then_some(inside)
}
