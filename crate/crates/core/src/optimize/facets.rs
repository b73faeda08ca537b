use serde::{Deserialize, Serialize};

use super::global::{global_with, polish_all};
use super::nelder_mead::{nelder_mead, NmOptions};
use super::nnls::{nnls, CONE_TOL};
use super::{
    default_grid, finish, parameter_grid, polar_for, project_params, Candidate, MetricGeometry,
    Problem, ProjectOptions, ProjectionResult,
};
use crate::error::Result;
use crate::model::ModelSpec;
use crate::polytope::Face;
use crate::statespace::Distribution;

const PENALTIES: [f64; 7] = [1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8];
const RESTORATION_SEEDS: usize = 3;

/// Outcome of one facet subproblem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetResult {
    pub theta: Vec<f64>,
    pub nu: Vec<f64>,
    /// `l_F(nu - mu)` at the subproblem's solution.
    pub value: f64,
    pub feasible: bool,
}

/// Minimize `l_F(nu)` over `nu` in the model with `nu - mu` in the cone over `F`.
#[derive(Debug, Clone)]
pub struct FacetSubproblem {
    /// Index of the facet in the ball.
    pub facet: usize,
    pub face: Face,
    pub normal: Vec<f64>,
    pub cone_generators: Vec<Vec<f64>>,
    pub result: Option<FacetResult>,
}

struct FacetCtx<'p, 'a> {
    prob: &'p Problem<'a>,
    normal: Vec<f64>,
    gens: Vec<Vec<f64>>,
}

impl FacetCtx<'_, '_> {
    fn cone_residual(&self, w: &[f64]) -> f64 {
        nnls(&self.gens, w).1
    }

    fn feasible_at(&self, theta: &[f64]) -> bool {
        let w = self.prob.residual(theta);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.cone_residual(&w) <= CONE_TOL * (1.0 + norm)
    }

    fn linear(&self, w: &[f64]) -> f64 {
        self.normal.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    fn penalized(&self, theta: &[f64], rho: f64) -> f64 {
        let (p, dist) = project_params(self.prob.model, theta);
        let w = self.prob.residual(&p);
        let r = self.cone_residual(&w);
        self.linear(&w) + rho * r * r + dist
    }

    fn restoration(&self, theta: &[f64]) -> f64 {
        let (p, dist) = project_params(self.prob.model, theta);
        let r = self.cone_residual(&self.prob.residual(&p));
        r * r + dist
    }
}

/// Solves every facet subproblem. Feasibility is detected on the grid first
/// and otherwise by minimizing the cone-fit residual.
pub fn solve_facets(
    model: &ModelSpec,
    geom: &MetricGeometry,
    mu: &Distribution,
    opts: &ProjectOptions,
) -> Result<Vec<FacetSubproblem>> {
    let prob = Problem::new(model, geom, mu)?;
    Ok(facet_subproblems(&prob, opts))
}

fn facet_subproblems(prob: &Problem, opts: &ProjectOptions) -> Vec<FacetSubproblem> {
    let model = prob.model;
    let ball = &prob.geom.ball;
    let pd = model.param_dim();
    let g = opts.grid.unwrap_or_else(|| default_grid(pd));
    let cell = 1.0 / g as f64;
    let grid = parameter_grid(model, g);
    let nf = ball.num_facets();

    // Best grid point inside each facet region, and the closest ones outside.
    let mut inside: Vec<Option<(f64, usize)>> = vec![None; nf];
    let mut near: Vec<Vec<(f64, usize)>> = vec![Vec::new(); nf];
    for (i, t) in grid.iter().enumerate() {
        let scores = prob.scores(&prob.residual(t));
        let w = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (f, &s) in scores.iter().enumerate() {
            let gap = w - s;
            if gap <= 1e-12 {
                if inside[f].map_or(true, |(v, _)| w < v) {
                    inside[f] = Some((w, i));
                }
            } else if inside[f].is_none() {
                let list = &mut near[f];
                list.push((gap, i));
                if list.len() > 4 * RESTORATION_SEEDS {
                    list.sort_by(|a, b| a.0.total_cmp(&b.0));
                    list.truncate(RESTORATION_SEEDS);
                }
            }
        }
    }

    let nm = NmOptions {
        max_evals: 150 * (pd + 1),
        restarts: 1,
        ..NmOptions::default()
    };
    let mut out = Vec::with_capacity(nf);
    for f in 0..nf {
        let face = prob
            .geom
            .lattice
            .face_by_mask(ball.facet_mask(f))
            .cloned()
            .expect("every facet is in the lattice");
        let ctx = FacetCtx {
            prob,
            normal: ball.normal_f64(f).to_vec(),
            gens: face.cone_generators(ball),
        };

        let seed = match inside[f] {
            Some((_, i)) => Some(grid[i].clone()),
            None => {
                let mut list = near[f].clone();
                list.sort_by(|a, b| a.0.total_cmp(&b.0));
                list.truncate(RESTORATION_SEEDS);
                list.iter().find_map(|&(_, i)| {
                    let mut obj = |t: &[f64]| ctx.restoration(t);
                    let (x, _) = nelder_mead(&mut obj, &grid[i], cell, nm);
                    let (p, _) = project_params(model, &x);
                    ctx.feasible_at(&p).then_some(p)
                })
            }
        };

        let result = seed.map(|mut theta| {
            let mut step = cell;
            for rho in PENALTIES {
                let mut obj = |t: &[f64]| ctx.penalized(t, rho);
                let (x, _) = nelder_mead(&mut obj, &theta, step, nm);
                theta = project_params(model, &x).0;
                step = (step * 0.3).max(1e-6);
            }
            let w = prob.residual(&theta);
            FacetResult {
                nu: prob.nu(&theta),
                value: ctx.linear(&w),
                feasible: true,
                theta,
            }
        });
        out.push(FacetSubproblem {
            facet: f,
            normal: ctx.normal,
            cone_generators: ctx.gens,
            face,
            result,
        });
    }
    out
}

/// Projection by facet decomposition: the best facet subproblem wins.
pub fn project_by_facets(
    model: &ModelSpec,
    geom: &MetricGeometry,
    mu: &Distribution,
    opts: &ProjectOptions,
) -> Result<ProjectionResult> {
    let prob = Problem::new(model, geom, mu)?;
    let polar = polar_for(model);
    let subs = facet_subproblems(&prob, opts);
    let feasible = subs
        .iter()
        .filter(|s| s.result.as_ref().is_some_and(|r| r.feasible))
        .count();
    let cands: Vec<Candidate> = subs
        .iter()
        .filter_map(|s| s.result.as_ref())
        .map(|r| Candidate {
            value: prob.value(&r.theta),
            theta: r.theta.clone(),
        })
        .collect();
    let mut cands = polish_all(&prob, cands);
    let facet_best = cands.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let mut cross = None;
    if opts.cross_check {
        let global = global_with(&prob, opts, &polar)?;
        cross = Some(global.value);
        cands.push(Candidate {
            theta: global.theta_star.free.clone(),
            value: global.value,
        });
        cands.extend(global.ties.iter().map(|t| Candidate {
            theta: t.theta.clone(),
            value: t.value,
        }));
    }
    let mut result = finish(&prob, cands, opts, &polar)?;
    result.feasible_facet_count = Some(feasible);
    result.cross_check_value = cross;
    result.method_gap = cross.map(|g| (g - facet_best).abs());
    Ok(result)
}
