//! Face lattice of the Wasserstein ball.
//!
//! Faces are closed vertex sets of the vertex–facet incidence: every proper
//! face is an intersection of facets. Levels are built top-down, since each
//! `(k-1)`-face is `H ∩ F` for some `k`-face `H` and facet `F`. Because ball
//! vertices are scaled roots `e_i - e_j`, the linear span of a vertex set is
//! read off a spanning forest of the graph those roots form on `[n]`.

use std::collections::HashMap;

use num_integer::binomial;
use num_traits::One;

use super::ball::{mask_indices, WassersteinBall};
use crate::error::{Error, Result};
use crate::rational::{to_f64, Rat};

pub const DEFAULT_MAX_FACES: usize = 1_000_000;
pub const DEFAULT_FACE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    /// Sorted ball-vertex indices.
    pub vertex_set: Vec<usize>,
    pub mask: u128,
    pub dim: usize,
    /// Vertices whose vectors form a basis of the span `L_F`.
    pub span_basis: Vec<usize>,
    /// A facet containing this face; its normal is maximized here.
    pub normal: usize,
}

impl Face {
    /// Vertex vectors of the face, the generators of the cone `C_F`.
    pub fn cone_generators(&self, ball: &WassersteinBall) -> Vec<Vec<f64>> {
        self.vertex_set
            .iter()
            .map(|&v| ball.vertices()[v].coords_f64(ball.n()))
            .collect()
    }

    pub fn span_vectors(&self, ball: &WassersteinBall) -> Vec<Vec<Rat>> {
        self.span_basis
            .iter()
            .map(|&v| ball.vertices()[v].coords(ball.n()))
            .collect()
    }

    /// Inner normal `l_F` as floats.
    pub fn normal_f64<'a>(&self, ball: &'a WassersteinBall) -> &'a [f64] {
        ball.normal_f64(self.normal)
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.mask >> v & 1 == 1
    }
}

/// Spanning-forest basis of the roots in `mask` and the resulting face dimension.
fn span_of(ball: &WassersteinBall, mask: u128) -> (Vec<usize>, usize) {
    let n = ball.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut basis = Vec::new();
    for v in mask_indices(mask) {
        let bv = &ball.vertices()[v];
        let (a, b) = (find(&mut parent, bv.from), find(&mut parent, bv.to));
        if a != b {
            parent[a] = b;
            basis.push(v);
        }
    }
    let dim = basis.len().saturating_sub(1);
    (basis, dim)
}

#[derive(Debug, Clone)]
pub struct FaceLattice {
    n: usize,
    faces: Vec<Face>,
    by_dim: Vec<Vec<usize>>,
    index: HashMap<u128, usize>,
}

impl FaceLattice {
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Indices into [`faces`](Self::faces) of the faces of dimension `dim`.
    pub fn faces_of_dim(&self, dim: usize) -> impl Iterator<Item = &Face> {
        self.by_dim
            .get(dim)
            .into_iter()
            .flatten()
            .map(move |&k| &self.faces[k])
    }

    pub fn face_by_mask(&self, mask: u128) -> Option<&Face> {
        self.index.get(&mask).map(|&k| &self.faces[k])
    }

    /// Face spanned by the given ball vertices, if they form exactly a face.
    pub fn face_by_vertices(&self, vertices: &[usize]) -> Option<&Face> {
        self.face_by_mask(vertices.iter().fold(0u128, |m, &v| m | 1 << v))
    }

    /// `(f_0, ..., f_{n-2})` of the ball.
    pub fn f_vector(&self) -> Vec<u64> {
        self.by_dim.iter().map(|l| l.len() as u64).collect()
    }

    /// f-vector of the Lipschitz polytope, `f_i(P_d) = f_{n-2-i}(B)`.
    pub fn lipschitz_f_vector(&self) -> Vec<u64> {
        let mut f = self.f_vector();
        f.reverse();
        f
    }

    /// Euler–Poincaré relation for the boundary of an `(n-1)`-polytope.
    pub fn satisfies_euler(&self) -> bool {
        euler_holds(&self.f_vector(), self.n - 1)
    }
}

pub(crate) fn euler_holds(f: &[u64], polytope_dim: usize) -> bool {
    let alt: i64 = f
        .iter()
        .enumerate()
        .map(|(i, &c)| if i % 2 == 0 { c as i64 } else { -(c as i64) })
        .sum();
    let expected = if polytope_dim % 2 == 1 { 2 } else { 0 };
    alt == expected
}

pub fn face_lattice(ball: &WassersteinBall) -> Result<FaceLattice> {
    face_lattice_capped(ball, DEFAULT_MAX_FACES)
}

/// Enumerates all proper faces of the ball, failing once more than
/// `max_faces` have been produced. The error carries the counts of the
/// dimensions completed so far, from `n-2` downwards.
pub fn face_lattice_capped(ball: &WassersteinBall, max_faces: usize) -> Result<FaceLattice> {
    let n = ball.n();
    let top = n - 2;
    let mut faces: Vec<Face> = Vec::new();
    let mut index: HashMap<u128, usize> = HashMap::new();
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    let mut seen_dim: HashMap<u128, usize> = HashMap::new();

    for f in 0..ball.num_facets() {
        let mask = ball.facet_mask(f);
        if index.contains_key(&mask) {
            continue;
        }
        let (span_basis, dim) = span_of(ball, mask);
        if dim != top {
            return Err(Error::Geometry(format!(
                "facet {f} spans dimension {dim}, expected {top}"
            )));
        }
        index.insert(mask, faces.len());
        by_dim[top].push(faces.len());
        faces.push(Face {
            vertex_set: mask_indices(mask),
            mask,
            dim,
            span_basis,
            normal: f,
        });
    }
    let capacity_error = |by_dim: &Vec<Vec<usize>>, from: usize| Error::Capacity {
        message: format!("face lattice exceeds {max_faces} faces"),
        partial: (from..=top).map(|d| by_dim[d].len() as u64).collect(),
    };
    if faces.len() > max_faces {
        return Err(capacity_error(&by_dim, top));
    }

    for k in (1..=top).rev() {
        let level = by_dim[k].clone();
        for &h in &level {
            let hmask = faces[h].mask;
            let hnormal = faces[h].normal;
            for f in 0..ball.num_facets() {
                let t = hmask & ball.facet_mask(f);
                if t == 0 || t == hmask || index.contains_key(&t) {
                    continue;
                }
                let dim = match seen_dim.get(&t) {
                    Some(&d) => d,
                    None => {
                        let (_, d) = span_of(ball, t);
                        seen_dim.insert(t, d);
                        d
                    }
                };
                if dim + 1 != k {
                    continue;
                }
                let (span_basis, _) = span_of(ball, t);
                // Prefer a facet normal that is exactly one on this face.
                let normal = if ball.facet_mask(f) & t == t { f } else { hnormal };
                index.insert(t, faces.len());
                by_dim[k - 1].push(faces.len());
                faces.push(Face {
                    vertex_set: mask_indices(t),
                    mask: t,
                    dim: k - 1,
                    span_basis,
                    normal,
                });
                if faces.len() > max_faces {
                    return Err(capacity_error(&by_dim, k));
                }
            }
        }
    }
    Ok(FaceLattice {
        n,
        faces,
        by_dim,
        index,
    })
}

/// The face of the ball whose relative interior contains `w`, where `w` is a
/// point on the boundary (`||w||_B = 1` within `tol`). The face is the
/// intersection of all facets with `<l_F, w> >= 1 - tol`.
pub fn minimal_face_containing(
    ball: &WassersteinBall,
    lattice: &FaceLattice,
    w: &[f64],
    tol: f64,
) -> Result<Face> {
    let n = ball.n();
    if w.len() != n {
        return Err(Error::Shape(format!("point has {} coordinates, ball lives in R^{n}", w.len())));
    }
    let scores: Vec<f64> = ball
        .normals_f64()
        .chunks(n)
        .map(|l| l.iter().zip(w).map(|(a, b)| a * b).sum())
        .collect();
    let norm = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if (norm - 1.0).abs() > tol {
        return Err(Error::Geometry(format!(
            "point has norm {norm}, not on the unit sphere within {tol}"
        )));
    }
    let mask = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= 1.0 - tol)
        .fold(u128::MAX, |m, (f, _)| m & ball.facet_mask(f));
    let vmask = if ball.vertices().len() == 128 {
        u128::MAX
    } else {
        (1u128 << ball.vertices().len()) - 1
    };
    lattice
        .face_by_mask(mask & vmask)
        .cloned()
        .ok_or_else(|| Error::Geometry("tight facets do not meet in a face".into()))
}

/// Exact variant: `w` must have `||w||_B = 1` exactly.
pub fn minimal_face_containing_exact(
    ball: &WassersteinBall,
    lattice: &FaceLattice,
    w: &[Rat],
) -> Result<Face> {
    let scores: Vec<Rat> = (0..ball.num_facets())
        .map(|f| crate::rational::dot(ball.normal(f).coords(), w))
        .collect();
    let norm = scores.iter().max().cloned().unwrap_or_default();
    if !norm.is_one() {
        return Err(Error::Geometry(format!(
            "point has norm {}, not 1",
            to_f64(&norm)
        )));
    }
    let mask = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_one())
        .fold(u128::MAX, |m, (f, _)| m & ball.facet_mask(f));
    let vmask = if ball.vertices().len() == 128 {
        u128::MAX
    } else {
        (1u128 << ball.vertices().len()) - 1
    };
    lattice
        .face_by_mask(mask & vmask)
        .cloned()
        .ok_or_else(|| Error::Geometry("tight facets do not meet in a face".into()))
}

/// f-vector of `P_d` for the discrete metric on `[n]`:
/// `f_i = C(n, i) (2^{n-i} - 2)`.
pub fn fvector_discrete_formula(n: usize) -> Vec<u64> {
    assert!(n >= 2, "n must be at least 2");
    (0..=n - 2)
        .map(|i| binomial(n as u64, i as u64) * ((1u64 << (n - i)) - 2))
        .collect()
}

/// f-vector of `P_d` for the path metric on `[n]`, an `(n-1)`-cube:
/// `f_i = 2^{n-i-1} C(n-1, i)`.
pub fn fvector_path_formula(n: usize) -> Vec<u64> {
    assert!(n >= 2, "n must be at least 2");
    (0..=n - 2)
        .map(|i| (1u64 << (n - i - 1)) * binomial((n - 1) as u64, i as u64))
        .collect()
}
