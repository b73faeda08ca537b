//! Lipschitz polytopes `P_d`, their duals (Wasserstein unit balls) and the
//! face lattice of the ball.
//!
//! Points of `R^n / R1` are stored as [`QuotientPoint`]s whose minimum
//! coordinate is zero. Ball vertices live in the sum-zero hyperplane and are
//! stored symbolically as `(e_i - e_j) / d_ij`.

mod ball;
mod dd;
mod lattice;
mod lipschitz;

pub use ball::{build_ball, BallVertex, WassersteinBall};
pub use lattice::{
    face_lattice, face_lattice_capped, fvector_discrete_formula, fvector_path_formula,
    minimal_face_containing, minimal_face_containing_exact, Face, FaceLattice,
    DEFAULT_FACE_TOL, DEFAULT_MAX_FACES,
};
pub use lipschitz::{
    count_bipartite_vertices, lipschitz_vertices, lipschitz_vertices_bipartite,
    lipschitz_vertices_discrete, lipschitz_vertices_general, LipschitzPolytope, FacetPair,
    MAX_BIPARTITE_VERTICES, MAX_DISCRETE_N, MAX_GENERAL_N,
};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::rational::{format_rational, Rat};

/// Canonical representative of a point of `R^n / R1`: minimum coordinate 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuotientPoint {
    #[serde(with = "crate::rational::serde_rat_vec")]
    coords: Vec<Rat>,
}

impl QuotientPoint {
    pub fn new(mut coords: Vec<Rat>) -> Self {
        if let Some(min) = coords.iter().min().cloned() {
            if !min.is_zero() {
                for c in &mut coords {
                    *c -= &min;
                }
            }
        }
        QuotientPoint { coords }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Self::new(coords.iter().map(|&c| crate::rational::rat_int(c)).collect())
    }

    pub fn coords(&self) -> &[Rat] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(crate::rational::to_f64).collect()
    }

    /// The point `-x`, canonicalized.
    pub fn negated(&self) -> Self {
        Self::new(self.coords.iter().map(|c| -c).collect())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coords.iter().map(format_rational).collect()
    }
}
