use super::nelder_mead::{nelder_mead, NmOptions};
use super::polish::polish;
use super::{
    default_grid, finish, parameter_grid, polar_for, project_params, random_params, rng_for,
    Candidate, MetricGeometry, Problem, ProjectOptions, ProjectionResult,
};
use crate::error::Result;
use crate::model::ModelSpec;
use crate::polar::PolarDegrees;
use crate::statespace::Distribution;

/// Global minimization of `W_d(mu, phi(theta))` over the parameter polytope.
pub fn project_global(
    model: &ModelSpec,
    geom: &MetricGeometry,
    mu: &Distribution,
    opts: &ProjectOptions,
) -> Result<ProjectionResult> {
    let prob = Problem::new(model, geom, mu)?;
    let polar = polar_for(model);
    global_with(&prob, opts, &polar)
}

pub(crate) fn global_with(
    prob: &Problem,
    opts: &ProjectOptions,
    polar: &PolarDegrees,
) -> Result<ProjectionResult> {
    let cands = local_solutions(prob, opts);
    finish(prob, cands, opts, polar)
}

/// Grid scan, Nelder–Mead from the best cells and random starts, then polish.
pub(crate) fn local_solutions(prob: &Problem, opts: &ProjectOptions) -> Vec<Candidate> {
    let model = prob.model;
    let pd = model.param_dim();
    let g = opts.grid.unwrap_or_else(|| default_grid(pd));
    let grid = parameter_grid(model, g);
    let values: Vec<f64> = grid.iter().map(|t| prob.value(t)).collect();

    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let cell = 1.0 / g as f64;
    let mut starts: Vec<(Vec<f64>, f64)> = Vec::new();
    for &i in &order {
        if starts.len() >= opts.grid_seeds {
            break;
        }
        let far = starts.iter().all(|(s, _)| {
            s.iter().zip(&grid[i]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) > 1.5 * cell
        });
        if far {
            starts.push((grid[i].clone(), cell));
        }
    }
    let mut rng = rng_for(opts.seed, u64::MAX);
    for _ in 0..opts.multistarts {
        starts.push((random_params(model, &mut rng), 0.05));
    }

    let nm = NmOptions {
        max_evals: 600 * (pd + 1),
        ..NmOptions::default()
    };
    let mut cands: Vec<Candidate> = Vec::new();
    for (x0, step) in starts {
        let mut f = |t: &[f64]| prob.penalized(t);
        let (x, _) = nelder_mead(&mut f, &x0, step, nm);
        let (theta, _) = project_params(model, &x);
        let value = prob.value(&theta);
        cands.push(Candidate { theta, value });
    }
    polish_all(prob, cands)
}

/// Polishes each distinct local solution and keeps the better of the two.
pub(crate) fn polish_all(prob: &Problem, mut cands: Vec<Candidate>) -> Vec<Candidate> {
    cands.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut out: Vec<Candidate> = Vec::new();
    for c in cands {
        let dup = out.iter().any(|o| {
            (o.value - c.value).abs() < 1e-12
                && o.theta.iter().zip(&c.theta).all(|(a, b)| (a - b).abs() < 1e-9)
        });
        if dup {
            continue;
        }
        match polish(prob, &c.theta) {
            Some(p) if p.value <= c.value => out.push(p),
            _ => out.push(c),
        }
    }
    out
}
