//! Projection of a data distribution onto an independence model: minimize
//! `W_d(mu, phi(theta))` over the model parameters.
//!
//! [`project_global`] scans a grid over the parameter polytope, refines the
//! best cells and random starts with Nelder–Mead, and polishes each local
//! solution by Newton's method on the optimality system of its face.
//! [`project_by_facets`] solves one constrained subproblem per facet of the
//! ball instead, which also yields how many facets admit a feasible point.

mod experiment;
mod facets;
mod global;
mod nelder_mead;
mod nnls;
mod polish;

pub use experiment::{experiment, ExperimentReport, ExperimentRow};
pub use facets::{project_by_facets, solve_facets, FacetResult, FacetSubproblem};
pub use global::project_global;
pub use nelder_mead::{nelder_mead, NmOptions};
pub use nnls::{cone_membership, nnls, ConeFit, CONE_TOL};

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, ParamPoint};
use crate::polar::{polar_degrees, PolarDegrees};
use crate::polytope::{
    build_ball, face_lattice_capped, lipschitz_vertices, minimal_face_containing, Face, FaceLattice,
    LipschitzPolytope, WassersteinBall, DEFAULT_MAX_FACES,
};
use crate::statespace::{Distribution, FiniteMetric};

/// Largest model dimension the grid-based solvers accept.
pub const MAX_PARAM_DIM: usize = 6;

/// The Lipschitz polytope of a metric with its ball and face lattice.
#[derive(Debug, Clone)]
pub struct MetricGeometry {
    pub poly: LipschitzPolytope,
    pub ball: WassersteinBall,
    pub lattice: FaceLattice,
}

impl MetricGeometry {
    pub fn new(metric: &FiniteMetric) -> Result<Self> {
        Self::with_max_faces(metric, DEFAULT_MAX_FACES)
    }

    pub fn with_max_faces(metric: &FiniteMetric, max_faces: usize) -> Result<Self> {
        let poly = lipschitz_vertices(metric)?;
        Self::from_polytope(poly, max_faces)
    }

    pub fn from_polytope(poly: LipschitzPolytope, max_faces: usize) -> Result<Self> {
        let ball = build_ball(&poly);
        let lattice = face_lattice_capped(&ball, max_faces)?;
        Ok(MetricGeometry { poly, ball, lattice })
    }

    pub fn n(&self) -> usize {
        self.poly.n()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectOptions {
    /// Grid points per axis; `None` picks a default from the model dimension.
    pub grid: Option<usize>,
    /// Best distinct grid cells refined by Nelder–Mead.
    pub grid_seeds: usize,
    /// Additional uniformly random starting points.
    pub multistarts: usize,
    pub seed: u64,
    /// Two minimizers tie when their values differ by at most this.
    pub value_tol: f64,
    /// ... and their distributions differ by at least this (max-norm).
    pub separation: f64,
    /// Tolerance for reading off the type face.
    pub face_tol: f64,
    /// Also run the global method inside [`project_by_facets`].
    pub cross_check: bool,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        ProjectOptions {
            grid: None,
            grid_seeds: 12,
            multistarts: 20,
            seed: 0,
            value_tol: 1e-7,
            separation: 1e-4,
            face_tol: crate::polytope::DEFAULT_FACE_TOL,
            cross_check: true,
        }
    }
}

/// Default grid resolution per axis for a model of dimension `param_dim`.
pub fn default_grid(param_dim: usize) -> usize {
    match param_dim {
        0..=2 => 64,
        3..=4 => 24,
        _ => 10,
    }
}

/// Another minimizer within the tie tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tie {
    pub nu: Vec<f64>,
    pub theta: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub nu_star: Distribution,
    pub value: f64,
    pub theta_star: ParamPoint,
    /// Minimal face of the ball containing `(nu* - mu) / value`; `None` when
    /// `mu` lies on the model.
    pub type_face: Option<Face>,
    pub type_dim: Option<usize>,
    /// Additional minimizers, not counting `nu_star`.
    pub ties: Vec<Tie>,
    /// Facets whose subproblem is feasible; only set by [`project_by_facets`].
    pub feasible_facet_count: Option<usize>,
    /// Polar degree bounding the algebraic degree of `nu*`.
    pub degree_bound: Option<BigInt>,
    /// Value found by the global method when cross-checking.
    pub cross_check_value: Option<f64>,
    /// `|facet method - global method|` when cross-checking.
    pub method_gap: Option<f64>,
}

/// Below this the data point is considered to lie on the model.
pub const ZERO_VALUE: f64 = 1e-12;

/// Shared evaluation context for one projection problem.
pub(crate) struct Problem<'a> {
    pub model: &'a ModelSpec,
    pub geom: &'a MetricGeometry,
    pub mu: Vec<f64>,
    pub n: usize,
}

impl<'a> Problem<'a> {
    pub fn new(model: &'a ModelSpec, geom: &'a MetricGeometry, mu: &Distribution) -> Result<Self> {
        let n = geom.n();
        if model.ambient_n() != n {
            return Err(Error::Shape(format!(
                "model has {} states, the metric space has {n}",
                model.ambient_n()
            )));
        }
        if mu.len() != n {
            return Err(Error::Shape(format!(
                "distribution has {} entries, expected {n}",
                mu.len()
            )));
        }
        if model.param_dim() > MAX_PARAM_DIM {
            return Err(Error::capacity(format!(
                "model dimension {} exceeds the supported {MAX_PARAM_DIM}",
                model.param_dim()
            )));
        }
        Ok(Problem {
            model,
            geom,
            mu: mu.to_f64(),
            n,
        })
    }

    /// `phi(theta) - mu` for a point already inside the parameter polytope.
    pub fn residual(&self, theta: &[f64]) -> Vec<f64> {
        let mut nu = vec![0.0; self.n];
        self.model.eval(theta, &mut nu);
        for (v, m) in nu.iter_mut().zip(&self.mu) {
            *v -= m;
        }
        nu
    }

    /// `<l_F, w>` for every facet.
    pub fn scores(&self, w: &[f64]) -> Vec<f64> {
        self.geom
            .ball
            .normals_f64()
            .chunks(self.n)
            .map(|l| l.iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `W_d(mu, phi(theta))` at a point inside the polytope.
    pub fn value(&self, theta: &[f64]) -> f64 {
        self.geom.ball.norm(&self.residual(theta))
    }

    /// Objective extended outside the polytope by projecting back and
    /// charging the distance moved.
    pub fn penalized(&self, theta: &[f64]) -> f64 {
        let (p, dist) = project_params(self.model, theta);
        self.value(&p) + dist
    }

    pub fn nu(&self, theta: &[f64]) -> Vec<f64> {
        let mut nu = vec![0.0; self.n];
        self.model.eval(theta, &mut nu);
        nu
    }
}

/// Euclidean projection onto the product of simplices
/// `{theta_l >= 0, sum theta_l <= 1}` and the distance moved.
pub(crate) fn project_params(model: &ModelSpec, theta: &[f64]) -> (Vec<f64>, f64) {
    let mut out = theta.to_vec();
    for l in 0..model.factors().len() {
        let r = model.factor_params(l);
        let block = &mut out[r];
        let inside = block.iter().all(|&t| t >= 0.0) && block.iter().sum::<f64>() <= 1.0;
        if inside {
            continue;
        }
        let clipped: Vec<f64> = block.iter().map(|t| t.max(0.0)).collect();
        if clipped.iter().sum::<f64>() <= 1.0 {
            block.copy_from_slice(&clipped);
            continue;
        }
        // Projection onto the face sum = 1 of the standard simplex.
        let mut sorted = block.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut cum = 0.0;
        let mut shift = 0.0;
        for (k, v) in sorted.iter().enumerate() {
            cum += v;
            let t = (cum - 1.0) / (k + 1) as f64;
            if v - t > 0.0 {
                shift = t;
            }
        }
        for t in block.iter_mut() {
            *t = (*t - shift).max(0.0);
        }
    }
    let dist = out
        .iter()
        .zip(theta)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    (out, dist)
}

/// All points of the grid with spacing `1/g` on the parameter polytope.
pub(crate) fn parameter_grid(model: &ModelSpec, g: usize) -> Vec<Vec<f64>> {
    let mut per_factor: Vec<Vec<Vec<f64>>> = Vec::new();
    for f in model.factors() {
        let mut pts = Vec::new();
        let mut cur = vec![0usize; f.m - 1];
        simplex_grid(0, g, &mut cur, &mut pts, g);
        per_factor.push(pts);
    }
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for pts in &per_factor {
        let mut next = Vec::with_capacity(out.len() * pts.len());
        for prefix in &out {
            for p in pts {
                let mut v = prefix.clone();
                v.extend_from_slice(p);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn simplex_grid(pos: usize, rem: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>, g: usize) {
    if pos == cur.len() {
        out.push(cur.iter().map(|&i| i as f64 / g as f64).collect());
        return;
    }
    for i in 0..=rem {
        cur[pos] = i;
        simplex_grid(pos + 1, rem - i, cur, out, g);
    }
}

/// A uniformly random point of the parameter polytope.
pub(crate) fn random_params(model: &ModelSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(model.param_dim());
    for f in model.factors() {
        let draws: Vec<f64> = (0..f.m).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        out.extend(draws[..f.m - 1].iter().map(|x| x / total));
    }
    out
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// A local solution.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub theta: Vec<f64>,
    pub value: f64,
}

/// Picks the best candidate, collects ties, reads off the type and the
/// degree bound.
pub(crate) fn finish(
    prob: &Problem,
    mut cands: Vec<Candidate>,
    opts: &ProjectOptions,
    polar: &PolarDegrees,
) -> Result<ProjectionResult> {
    cands.sort_by(|a, b| a.value.total_cmp(&b.value));
    let best = cands.first().cloned().ok_or_else(|| Error::Geometry("no candidate solutions".into()))?;
    let best_nu = prob.nu(&best.theta);
    let mut ties: Vec<Tie> = Vec::new();
    for c in &cands[1..] {
        if c.value > best.value + opts.value_tol {
            break;
        }
        let nu = prob.nu(&c.theta);
        let distinct = max_abs_diff(&nu, &best_nu) >= opts.separation
            && ties.iter().all(|t| max_abs_diff(&nu, &t.nu) >= opts.separation);
        if distinct {
            ties.push(Tie {
                nu,
                theta: c.theta.clone(),
                value: c.value,
            });
        }
    }

    let (type_face, type_dim, degree_bound) = if best.value < ZERO_VALUE {
        (None, None, None)
    } else {
        let w: Vec<f64> = prob.residual(&best.theta).iter().map(|x| x / best.value).collect();
        let face = [opts.face_tol, 1e-6, 1e-5]
            .iter()
            .find_map(|&tol| minimal_face_containing(&prob.geom.ball, &prob.geom.lattice, &w, tol).ok());
        match face {
            Some(f) => {
                let d = f.dim;
                (Some(f), Some(d), Some(polar.degree_bound(d)))
            }
            None => (None, None, None),
        }
    };

    Ok(ProjectionResult {
        nu_star: Distribution::Float(best_nu),
        value: best.value,
        theta_star: ParamPoint::new(best.theta),
        type_face,
        type_dim,
        ties,
        feasible_facet_count: None,
        degree_bound,
        cross_check_value: None,
        method_gap: None,
    })
}

/// Computes polar degrees once per model for repeated projections.
pub(crate) fn polar_for(model: &ModelSpec) -> PolarDegrees {
    polar_degrees(model)
}

/// JSON-friendly summary of a [`ProjectionResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub value: f64,
    pub nu_star: Vec<f64>,
    pub theta_star: Vec<f64>,
    pub type_dim: Option<usize>,
    /// Type face vertices as 1-based pairs `(i, j)` for `(e_i - e_j)/d_ij`.
    pub type_face: Option<Vec<(usize, usize)>>,
    pub ties: Vec<Tie>,
    pub feasible_facet_count: Option<usize>,
    pub degree_bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cross_check_value: Option<f64>,
}

impl ProjectionResult {
    pub fn report(&self, ball: &WassersteinBall) -> ProjectionReport {
        ProjectionReport {
            value: self.value,
            nu_star: self.nu_star.to_f64(),
            theta_star: self.theta_star.free.clone(),
            type_dim: self.type_dim,
            type_face: self.type_face.as_ref().map(|f| {
                f.vertex_set
                    .iter()
                    .map(|&v| {
                        let bv = &ball.vertices()[v];
                        (bv.from + 1, bv.to + 1)
                    })
                    .collect()
            }),
            ties: self.ties.clone(),
            feasible_facet_count: self.feasible_facet_count,
            degree_bound: self.degree_bound.as_ref().map(ToString::to_string),
            cross_check_value: self.cross_check_value,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_onto_simplex_blocks() {
        let m = ModelSpec::segre(&[3, 2]).unwrap();
        let (p, d) = project_params(&m, &[0.2, 0.3, 0.5]);
        assert_eq!(p, vec![0.2, 0.3, 0.5]);
        assert_eq!(d, 0.0);
        let (p, _) = project_params(&m, &[0.9, 0.5, -0.2]);
        assert!((p[0] - 0.7).abs() < 1e-15 && (p[1] - 0.3).abs() < 1e-15);
        assert_eq!(p[2], 0.0);
        let (p, _) = project_params(&m, &[-0.5, 0.4, 1.5]);
        assert_eq!(p, vec![0.0, 0.4, 1.0]);
    }

    #[test]
    fn grid_sizes() {
        let m = ModelSpec::segre(&[3, 2]).unwrap();
        // Triangle grid with 4 steps has 15 points, segment 5.
        assert_eq!(parameter_grid(&m, 4).len(), 15 * 5);
    }
}
