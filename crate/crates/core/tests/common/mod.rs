//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use wim_core::rational::{rank, rat_int};
use wim_core::wdist::vertex_scores;
use wim_core::{LipschitzPolytope, Rat, WassersteinBall};

/// `W_d(mu, nu)` as the maximum of `<mu - nu, x>` over the Lipschitz vertices.
pub fn w(poly: &LipschitzPolytope, mu: &[f64], nu: &[f64]) -> f64 {
    let diff: Vec<f64> = mu.iter().zip(nu).map(|(a, b)| a - b).collect();
    vertex_scores(poly, &diff).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn hardy_weinberg(p: f64) -> Vec<f64> {
    vec![p * p, 2.0 * p * (1.0 - p), (1.0 - p) * (1.0 - p)]
}

/// Rank-one 2x2 table with `P(X = 0) = p`, `P(Y = 0) = q`, states `00, 01, 10, 11`.
pub fn two_bit(p: f64, q: f64) -> Vec<f64> {
    vec![p * q, p * (1.0 - q), (1.0 - p) * q, (1.0 - p) * (1.0 - q)]
}

/// Minimum of `f` on `[a, b]` by ternary search, assuming unimodality there.
pub fn trisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Local minima of `f` on a grid of `[0, 1]` with spacing `step`, each
/// refined by ternary search on its two neighboring cells. Minima closer
/// than `1e-3` are merged.
pub fn refined_minima_1d(f: &dyn Fn(f64) -> f64, step: f64) -> Vec<(f64, f64)> {
    let n = (1.0 / step).round() as usize;
    let vals: Vec<f64> = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
    let mut out: Vec<(f64, f64)> = Vec::new();
    for i in 0..=n {
        let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
        let right = if i < n { vals[i + 1] } else { f64::INFINITY };
        if vals[i] > left || vals[i] > right {
            continue;
        }
        let a = i.saturating_sub(1) as f64 / n as f64;
        let b = (i + 1).min(n) as f64 / n as f64;
        let (mut x, mut v) = trisect(f, a, b);
        if vals[i] < v {
            x = i as f64 / n as f64;
            v = vals[i];
        }
        match out.iter_mut().find(|(y, _)| (x - *y).abs() < 1e-3) {
            Some(slot) if v < slot.1 => *slot = (x, v),
            Some(_) => {}
            None => out.push((x, v)),
        }
    }
    out
}

pub fn min_1d(f: &dyn Fn(f64) -> f64, step: f64) -> f64 {
    refined_minima_1d(f, step)
        .into_iter()
        .map(|(_, v)| v)
        .fold(f64::INFINITY, f64::min)
}

/// Minimum of `f` on `[0, 1]^2` for `f` convex in its second argument:
/// the inner minimum is found by ternary search, the outer one on a grid of
/// spacing `step` refined around every local minimum.
pub fn min_2d(f: &dyn Fn(f64, f64) -> f64, step: f64) -> f64 {
    let inner = |p: f64| trisect(&|q| f(p, q), 0.0, 1.0).1;
    min_1d(&inner, step)
}

/// f-vector of the Lipschitz polytope computed from its own vertices and
/// facets: faces are the intersections of facet vertex sets, and a face's
/// dimension is the affine rank of its vertices.
pub fn lipschitz_f_vector_direct(poly: &LipschitzPolytope, ball: &WassersteinBall) -> Vec<u64> {
    let n = poly.n();
    let verts = poly.vertices();
    assert!(verts.len() <= 128, "test oracle limited to 128 vertices");
    let facets: Vec<u128> = ball
        .vertices()
        .iter()
        .map(|bv| {
            verts
                .iter()
                .enumerate()
                .filter(|(_, x)| bv.pair_with(x) == rat_int(1))
                .fold(0u128, |m, (k, _)| m | 1 << k)
        })
        .collect();
    let mut seen: HashSet<u128> = facets.iter().copied().collect();
    let mut queue: VecDeque<u128> = facets.iter().copied().collect();
    while let Some(face) = queue.pop_front() {
        for &f in &facets {
            let g = face & f;
            if g != 0 && seen.insert(g) {
                queue.push_back(g);
            }
        }
    }
    let mut counts: HashMap<usize, u64> = HashMap::new();
    for mask in seen {
        let ids: Vec<usize> = (0..verts.len()).filter(|&k| mask >> k & 1 == 1).collect();
        let pinned = |k: usize| -> Vec<Rat> {
            let c = verts[k].coords();
            c.iter().map(|x| x - &c[0]).collect()
        };
        let base = pinned(ids[0]);
        let rows: Vec<Vec<Rat>> = ids[1..]
            .iter()
            .map(|&k| pinned(k).iter().zip(&base).map(|(a, b)| a - b).collect())
            .collect();
        *counts.entry(rank(&rows)).or_default() += 1;
    }
    (0..n - 1).map(|d| counts.get(&d).copied().unwrap_or(0)).collect()
}

/// All permutations generated by `gens`, as index maps.
pub fn group_closure(gens: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let id: Vec<usize> = (0..gens[0].len()).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for h in gens {
            let gh: Vec<usize> = (0..g.len()).map(|i| h[g[i]]).collect();
            if seen.insert(gh.clone()) {
                queue.push_back(gh);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = seen.into_iter().collect();
    out.sort();
    out
}

/// `(g . v)[g(i)] = v[i]`.
pub fn permute(g: &[usize], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (i, &x) in v.iter().enumerate() {
        out[g[i]] = x;
    }
    out
}
