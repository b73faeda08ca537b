use std::collections::HashMap;

use num_traits::{One, Zero};

use super::{LipschitzPolytope, QuotientPoint};
use crate::rational::{to_f64, Rat};

/// The ball vertex `(e_from - e_to) / d(from, to)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BallVertex {
    pub from: usize,
    pub to: usize,
    pub scale: Rat,
}

impl BallVertex {
    pub fn coords(&self, n: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); n];
        v[self.from] = self.scale.clone();
        v[self.to] = -self.scale.clone();
        v
    }

    pub fn coords_f64(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        let s = to_f64(&self.scale);
        v[self.from] = s;
        v[self.to] = -s;
        v
    }

    /// `<x, v>` for a Lipschitz vertex `x`.
    pub fn pair_with(&self, x: &QuotientPoint) -> Rat {
        (&x.coords()[self.from] - &x.coords()[self.to]) * &self.scale
    }
}

/// Wasserstein unit ball `B = P_d^*`. Facet `f` has inner normal
/// `P_d` vertex `f`; `incidence[f]` has bit `v` set iff ball vertex `v` lies on it.
#[derive(Debug, Clone)]
pub struct WassersteinBall {
    n: usize,
    vertices: Vec<BallVertex>,
    incidence: Vec<u128>,
    index: HashMap<(usize, usize), usize>,
    normals: Vec<f64>,
    normals_exact: Vec<QuotientPoint>,
}

/// Builds `B` from the Lipschitz polytope.
///
/// Candidates are `(e_i - e_j)/d_ij` over the constraint pairs of the metric.
/// A candidate is extreme exactly when its inequality is facet-defining for
/// `P_d`, which the polytope already records. Incidences are exact.
pub fn build_ball(poly: &LipschitzPolytope) -> WassersteinBall {
    let n = poly.n();
    let metric = poly.metric();
    let mut vertices = Vec::new();
    let mut index = HashMap::new();
    let mut pairs: Vec<_> = poly.facet_pairs().to_vec();
    pairs.sort();
    for fp in pairs {
        let (from, to) = fp.oriented();
        if index.contains_key(&(from, to)) {
            continue;
        }
        index.insert((from, to), vertices.len());
        vertices.push(BallVertex {
            from,
            to,
            scale: Rat::one() / metric.get(from, to),
        });
    }
    assert!(
        vertices.len() <= 128,
        "ball with {} vertices exceeds the supported 128",
        vertices.len()
    );
    let incidence = poly
        .vertices()
        .iter()
        .map(|x| {
            vertices
                .iter()
                .enumerate()
                .filter(|(_, v)| v.pair_with(x).is_one())
                .fold(0u128, |acc, (k, _)| acc | 1 << k)
        })
        .collect();
    WassersteinBall {
        n,
        vertices,
        incidence,
        index,
        normals: poly.vertex_matrix().to_vec(),
        normals_exact: poly.vertices().to_vec(),
    }
}

impl WassersteinBall {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[BallVertex] {
        &self.vertices
    }

    pub fn num_facets(&self) -> usize {
        self.incidence.len()
    }

    /// Index of the vertex `(e_from - e_to)/d`, if it is a vertex of the ball.
    pub fn vertex_index(&self, from: usize, to: usize) -> Option<usize> {
        self.index.get(&(from, to)).copied()
    }

    /// Bitmask of ball vertices on facet `f`.
    pub fn facet_mask(&self, f: usize) -> u128 {
        self.incidence[f]
    }

    pub fn facet_vertices(&self, f: usize) -> Vec<usize> {
        mask_indices(self.incidence[f])
    }

    /// Inner normal `l_F` of facet `f`, a vertex of `P_d`.
    pub fn normal(&self, f: usize) -> &QuotientPoint {
        &self.normals_exact[f]
    }

    pub fn normal_f64(&self, f: usize) -> &[f64] {
        &self.normals[f * self.n..(f + 1) * self.n]
    }

    /// Row-major matrix of all facet normals.
    pub fn normals_f64(&self) -> &[f64] {
        &self.normals
    }

    /// The polyhedral norm `||w||_B = max_F <l_F, w>` for `w` in the sum-zero hyperplane.
    pub fn norm(&self, w: &[f64]) -> f64 {
        self.normals
            .chunks(self.n)
            .map(|l| l.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the antipodal vertex `-v`.
    pub fn antipode(&self, v: usize) -> Option<usize> {
        let bv = &self.vertices[v];
        self.vertex_index(bv.to, bv.from)
    }
}

pub(crate) fn mask_indices(mut mask: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        let k = mask.trailing_zeros() as usize;
        out.push(k);
        mask &= mask - 1;
    }
    out
}
