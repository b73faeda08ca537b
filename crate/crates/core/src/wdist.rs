//! Wasserstein distance by vertex maximization, and the closed-form
//! projections onto the Hardy–Weinberg curve and the 2-bit surface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{LipschitzPolytope, QuotientPoint};
use crate::rational::{dot, format_rational, to_f64, Rat};
use crate::statespace::Distribution;

/// Float-mode tolerance for a vertex to count as attaining the maximum.
pub const ACTIVE_TOL: f64 = 1e-12;

/// Slack on case inequalities and solution separation in the closed forms.
pub const CASE_TOL: f64 = 1e-12;
const TIE_SEPARATION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCertificate {
    pub value: f64,
    /// Exact value, present when both inputs are exact.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact_value: Option<String>,
    /// An optimal discriminator, a vertex of the Lipschitz polytope.
    pub optimizer: QuotientPoint,
    pub optimizer_index: usize,
    /// Indices of all vertices attaining the maximum.
    pub active: Vec<usize>,
}

/// `W_d(mu, nu) = max_x <mu - nu, x>` over the vertices of `P_d`.
pub fn wasserstein(
    poly: &LipschitzPolytope,
    mu: &Distribution,
    nu: &Distribution,
) -> Result<DistanceCertificate> {
    let n = poly.n();
    if mu.len() != n || nu.len() != n {
        return Err(Error::Shape(format!(
            "distributions have {} and {} entries, the metric space has {n} points",
            mu.len(),
            nu.len()
        )));
    }
    if let (Some(a), Some(b)) = (mu.exact(), nu.exact()) {
        let diff: Vec<Rat> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let scores: Vec<Rat> = poly.vertices().iter().map(|x| dot(x.coords(), &diff)).collect();
        let best = scores.iter().max().cloned().expect("polytope has vertices");
        let active: Vec<usize> = (0..scores.len()).filter(|&k| scores[k] == best).collect();
        return Ok(DistanceCertificate {
            value: to_f64(&best),
            exact_value: Some(format_rational(&best)),
            optimizer: poly.vertices()[active[0]].clone(),
            optimizer_index: active[0],
            active,
        });
    }
    let diff: Vec<f64> = mu.to_f64().iter().zip(nu.to_f64()).map(|(x, y)| x - y).collect();
    let scores = vertex_scores(poly, &diff);
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let active: Vec<usize> = (0..scores.len())
        .filter(|&k| scores[k] >= best - ACTIVE_TOL)
        .collect();
    let arg = (0..scores.len()).find(|&k| scores[k] == best).unwrap_or(active[0]);
    Ok(DistanceCertificate {
        value: best,
        exact_value: None,
        optimizer: poly.vertices()[arg].clone(),
        optimizer_index: arg,
        active,
    })
}

/// `<w, x>` for every vertex `x` of `P_d`.
pub fn vertex_scores(poly: &LipschitzPolytope, w: &[f64]) -> Vec<f64> {
    poly.vertex_matrix()
        .chunks(poly.n())
        .map(|x| x.iter().zip(w).map(|(a, b)| a * b).sum())
        .collect()
}

/// Floating-point `W_d(mu, nu)` without a certificate.
pub fn wasserstein_f64(poly: &LipschitzPolytope, mu: &[f64], nu: &[f64]) -> f64 {
    let w: Vec<f64> = mu.iter().zip(nu).map(|(a, b)| a - b).collect();
    vertex_scores(poly, &w)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Optimal value and solution from a closed-form case analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub value: f64,
    pub solution: Vec<f64>,
    /// 1-based index of the first applicable case.
    pub case_id: usize,
    /// More than one case applies.
    pub boundary: bool,
    /// Further optimal solutions from other applicable cases, if distinct.
    pub ties: Vec<Vec<f64>>,
}

struct Case {
    applies: bool,
    violation: f64,
    value: f64,
    solution: Vec<f64>,
}

fn case(conds: &[f64], value: f64, solution: Vec<f64>) -> Case {
    // Every condition reads `c >= 0`.
    let violation = conds.iter().fold(0.0f64, |v, &c| v.max(-c));
    Case {
        applies: violation <= CASE_TOL,
        violation,
        value,
        solution,
    }
}

fn resolve(cases: Vec<Case>) -> ClosedForm {
    let applicable: Vec<usize> = (0..cases.len()).filter(|&k| cases[k].applies).collect();
    let first = applicable.first().copied().unwrap_or_else(|| {
        // Rounding can leave a point just outside every region.
        (0..cases.len())
            .min_by(|&a, &b| cases[a].violation.total_cmp(&cases[b].violation))
            .expect("nonempty case list")
    });
    let mut ties: Vec<Vec<f64>> = Vec::new();
    for &k in &applicable[applicable.len().min(1)..] {
        let s = &cases[k].solution;
        let distinct = std::iter::once(&cases[first].solution)
            .chain(&ties)
            .all(|t| t.iter().zip(s).any(|(a, b)| (a - b).abs() > TIE_SEPARATION));
        if distinct {
            ties.push(s.clone());
        }
    }
    ClosedForm {
        value: cases[first].value,
        solution: cases[first].solution.clone(),
        case_id: first + 1,
        boundary: applicable.len() > 1,
        ties,
    }
}

fn float_entries(mu: &Distribution, n: usize) -> Result<Vec<f64>> {
    if mu.len() != n {
        return Err(Error::Shape(format!(
            "expected a distribution on {n} states, got {}",
            mu.len()
        )));
    }
    Ok(mu.to_f64())
}

fn sqrt(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

/// Distance to the Hardy–Weinberg curve `p -> (p^2, 2p(1-p), (1-p)^2)`.
/// Square roots are taken in floating point, also for exact input.
pub fn hardy_weinberg_closed_form(mu: &Distribution) -> Result<ClosedForm> {
    let m = float_entries(mu, 3)?;
    let (m1, m2, m3) = (m[0], m[1], m[2]);
    let (r1, r3) = (sqrt(m1), sqrt(m3));
    let cases = vec![
        case(
            &[m1 - m3, m1 - 0.25],
            (2.0 * r1 - 2.0 * m1 - m2).abs(),
            vec![m1, 2.0 * r1 - 2.0 * m1, 1.0 + m1 - 2.0 * r1],
        ),
        case(
            &[m3 - m1, m3 - 0.25],
            (2.0 * r3 - 2.0 * m3 - m2).abs(),
            vec![1.0 + m3 - 2.0 * r3, 2.0 * r3 - 2.0 * m3, m3],
        ),
        case(&[0.25 - m1, 0.25 - m3], m2 - 0.5, vec![0.25, 0.5, 0.25]),
    ];
    Ok(resolve(cases))
}

/// Distance to the 2-bit independence surface under the L0 metric, states
/// ordered `00, 01, 10, 11`.
pub fn twobit_closed_form(mu: &Distribution) -> Result<ClosedForm> {
    let m = float_entries(mu, 4)?;
    let (m1, m2, m3, m4) = (m[0], m[1], m[2], m[3]);
    let r = [sqrt(m1), sqrt(m2), sqrt(m3), sqrt(m4)];
    let det = (m1 * m4 - m2 * m3).abs();
    let corner = |k: usize, others: f64| 2.0 * r[k] * (1.0 - r[k]) - others;
    let split = |a: f64, b: f64| if a + b > 0.0 { det / (a + b) } else { 0.0 };
    let ratio = |x: f64, num: f64, den: f64| if den > 0.0 { x * num / den } else { 0.0 };
    let cases = vec![
        case(
            &[m1 - m4, r[0] - m1 - m2, r[0] - m1 - m3],
            corner(0, m2 + m3),
            vec![m1, r[0] - m1, r[0] - m1, 1.0 - 2.0 * r[0] + m1],
        ),
        case(
            &[m2 - m3, r[1] - m1 - m2, r[1] - m2 - m4],
            corner(1, m1 + m4),
            vec![r[1] - m2, m2, 1.0 - 2.0 * r[1] + m2, r[1] - m2],
        ),
        case(
            &[m3 - m2, r[2] - m1 - m3, r[2] - m3 - m4],
            corner(2, m1 + m4),
            vec![r[2] - m3, 1.0 - 2.0 * r[2] + m3, m3, r[2] - m3],
        ),
        case(
            &[m4 - m1, r[3] - m2 - m4, r[3] - m3 - m4],
            corner(3, m2 + m3),
            vec![1.0 - 2.0 * r[3] + m4, r[3] - m4, r[3] - m4, m4],
        ),
        case(
            &[m1 - m4, m2 - m3, m1 + m2 - r[0], m1 + m2 - r[1]],
            split(m1, m2),
            vec![m1, m2, ratio(m1, m3 + m4, m1 + m2), ratio(m2, m3 + m4, m1 + m2)],
        ),
        case(
            &[m1 - m4, m3 - m2, m1 + m3 - r[0], m1 + m3 - r[2]],
            split(m1, m3),
            vec![m1, ratio(m1, m2 + m4, m1 + m3), m3, ratio(m3, m2 + m4, m1 + m3)],
        ),
        case(
            &[m4 - m1, m2 - m3, m2 + m4 - r[3], m2 + m4 - r[1]],
            split(m2, m4),
            vec![ratio(m2, m1 + m3, m2 + m4), m2, ratio(m4, m1 + m3, m2 + m4), m4],
        ),
        case(
            &[m4 - m1, m3 - m2, m3 + m4 - r[3], m3 + m4 - r[2]],
            split(m3, m4),
            vec![ratio(m3, m1 + m2, m3 + m4), ratio(m4, m1 + m2, m3 + m4), m3, m4],
        ),
    ];
    Ok(resolve(cases))
}
