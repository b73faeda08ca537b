//! Nelder–Mead simplex search with dimension-adaptive coefficients.

#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub max_evals: usize,
    pub ftol: f64,
    pub xtol: f64,
    /// Number of restarts from the best point after convergence.
    pub restarts: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            max_evals: 4000,
            ftol: 1e-15,
            xtol: 1e-11,
            restarts: 2,
        }
    }
}

/// Minimizes `f` from `x0` with initial edge length `step`.
pub fn nelder_mead(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], step: f64, opts: NmOptions) -> (Vec<f64>, f64) {
    let mut best = x0.to_vec();
    let mut fbest = f(&best);
    let mut budget = opts.max_evals;
    let mut step = step;
    for _ in 0..=opts.restarts {
        let (x, fx, used) = run(f, &best, step, opts, budget);
        budget = budget.saturating_sub(used);
        let improved = fx < fbest;
        if fx <= fbest {
            best = x;
            fbest = fx;
        }
        if budget == 0 || (!improved && step <= opts.xtol * 100.0) {
            break;
        }
        step = (step * 0.1).max(opts.xtol * 100.0);
    }
    (best, fbest)
}

fn run(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    opts: NmOptions,
    budget: usize,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;

    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };

    while evals < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let size = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.ftol && size <= opts.xtol {
            break;
        }
        if size <= opts.xtol * 1e-3 {
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / nf;
            }
        }
        let worst = pts[n].clone();
        let xr = lerp(&centroid, &worst, -alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = lerp(&centroid, &worst, -alpha * beta);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let xc = lerp(&centroid, &xr, gamma);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = lerp(&centroid, &worst, gamma);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    pts[i] = lerp(&pts[0], &pts[i], delta);
                    vals[i] = f(&pts[i]);
                }
                evals += n;
            }
        }
    }
    let k = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (pts[k].clone(), vals[k], evals)
}
