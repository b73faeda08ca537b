//! Wasserstein distances to discrete independence models.
//!
//! Builds Lipschitz polytopes and Wasserstein unit balls for finite metric
//! spaces, computes distances between distributions, projects onto
//! independence models and evaluates the polar degrees that bound the
//! algebraic complexity of the projection.

pub mod error;
pub mod model;
pub mod optimize;
pub mod polar;
pub mod polytope;
pub mod rational;
pub mod statespace;
pub mod wdist;

pub use error::{Error, Result};
pub use model::{ModelSpec, ParamPoint};
pub use optimize::{
    experiment, project_by_facets, project_global, ExperimentReport, MetricGeometry,
    ProjectOptions, ProjectionReport, ProjectionResult,
};
pub use polar::{polar_degrees, PolarDegrees};
pub use polytope::{
    build_ball, face_lattice, lipschitz_vertices, minimal_face_containing, BallVertex, Face,
    FaceLattice, LipschitzPolytope, QuotientPoint, WassersteinBall,
};
pub use rational::Rat;
pub use wdist::{hardy_weinberg_closed_form, twobit_closed_form, wasserstein, ClosedForm, DistanceCertificate};
pub use statespace::{
    custom_metric, discrete_metric, l0_metric, l1_metric, Distribution, Factor, FiniteMetric,
    MetricKind, MetricSpec, ProductShape,
};
