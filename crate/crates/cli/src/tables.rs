//! Regenerates the reference tables and compares them with the embedded
//! golden values.

use std::collections::BTreeMap;

use anyhow::Result;
use clap::ValueEnum;
use num_bigint::BigInt;
use serde::Deserialize;
use wim_core::optimize::{experiment, MetricGeometry, ProjectOptions};
use wim_core::polar::{polar_degrees, polar_degrees_kbit, polar_degrees_matrix};
use wim_core::polytope::{build_ball, face_lattice_capped, lipschitz_vertices};
use wim_core::{Error, MetricSpec, ModelSpec};

pub const GOLDEN: &str = include_str!("../data/golden_tables.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Polar,
    Fvector,
    Facets,
    Experiments,
    /// Everything except the experiments.
    All,
}

#[derive(Debug, Deserialize)]
pub struct Golden {
    pub version: u32,
    pub polar_kbit: Vec<KbitRow>,
    pub polar_matrix: Vec<MatrixRow>,
    pub polar_models: Vec<ModelRow>,
    pub fvector: Vec<FvectorRow>,
    pub facets: Vec<FacetRow>,
    pub experiments: Vec<ExperimentRow>,
}

#[derive(Debug, Deserialize)]
pub struct KbitRow {
    pub k: usize,
    pub shifted: Vec<u64>,
}

#[derive(Debug, Deserialize)]
pub struct MatrixRow {
    pub m1: usize,
    pub m2: usize,
    pub shifted: Vec<u64>,
}

#[derive(Debug, Deserialize)]
pub struct ModelRow {
    pub name: String,
    pub model: serde_json::Value,
    pub delta: Vec<u64>,
}

#[derive(Debug, Deserialize)]
pub struct FvectorRow {
    pub name: String,
    pub metric: MetricSpec,
    pub f_vector: Vec<u64>,
}

#[derive(Debug, Deserialize)]
pub struct FacetRow {
    pub name: String,
    pub metric: MetricSpec,
    pub facets: usize,
}

#[derive(Debug, Deserialize)]
pub struct ExperimentRow {
    pub name: String,
    pub model: serde_json::Value,
    pub metric: MetricSpec,
    pub mean_feasible: f64,
    pub feasible_rel_tol: f64,
    pub type_percent: BTreeMap<usize, f64>,
    pub percent_tol: f64,
}

/// One compared quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub table: &'static str,
    pub case: String,
    pub quantity: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

const GOLDEN_VERSION: u32 = 1;

pub fn golden() -> Result<Golden> {
    let g: Golden =
        serde_json::from_str(GOLDEN).map_err(|e| Error::Parse(format!("golden tables: {e}")))?;
    if g.version != GOLDEN_VERSION {
        return Err(Error::Parse(format!("golden tables version {} is not {GOLDEN_VERSION}", g.version)).into());
    }
    Ok(g)
}

pub struct TableOptions {
    pub max_faces: usize,
    pub samples: usize,
    pub seed: u64,
}

pub fn run(which: Which, golden: &Golden, opts: &TableOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if matches!(which, Which::Polar | Which::All) {
        polar(golden, &mut out)?;
    }
    if matches!(which, Which::Facets | Which::All) {
        facets(golden, &mut out)?;
    }
    if matches!(which, Which::Fvector | Which::All) {
        fvector(golden, opts.max_faces, &mut out)?;
    }
    if which == Which::Experiments {
        experiments(golden, opts, &mut out)?;
    }
    Ok(out)
}

fn exact_rows(table: &'static str, case: &str, expected: &[u64], observed: &[BigInt], out: &mut Vec<Check>) {
    let len = expected.len().max(observed.len());
    for r in 0..len {
        let e = expected.get(r).map(|v| BigInt::from(*v));
        let o = observed.get(r).cloned();
        out.push(Check {
            table,
            case: case.to_string(),
            quantity: format!("row {r}"),
            expected: e.as_ref().map(ToString::to_string).unwrap_or_default(),
            observed: o.as_ref().map(ToString::to_string).unwrap_or_default(),
            pass: e.is_some() && e == o,
        });
    }
}

fn polar(golden: &Golden, out: &mut Vec<Check>) -> Result<()> {
    for row in &golden.polar_kbit {
        let p = polar_degrees_kbit(row.k);
        exact_rows("polar_kbit", &format!("k={}", row.k), &row.shifted, &p.shifted(), out);
    }
    for row in &golden.polar_matrix {
        let p = polar_degrees_matrix(row.m1, row.m2);
        let case = format!("({},{})", row.m1, row.m2);
        exact_rows("polar_matrix", &case, &row.shifted, &p.shifted(), out);
    }
    for row in &golden.polar_models {
        let p = polar_degrees(&ModelSpec::from_json(&row.model)?);
        exact_rows("polar_model", &row.name, &row.delta, &p.delta, out);
    }
    Ok(())
}

fn facets(golden: &Golden, out: &mut Vec<Check>) -> Result<()> {
    for row in &golden.facets {
        let poly = lipschitz_vertices(&row.metric.build()?)?;
        let got = poly.vertices().len();
        out.push(Check {
            table: "facets",
            case: row.name.clone(),
            quantity: "facets".into(),
            expected: row.facets.to_string(),
            observed: got.to_string(),
            pass: got == row.facets,
        });
    }
    Ok(())
}

fn fvector(golden: &Golden, max_faces: usize, out: &mut Vec<Check>) -> Result<()> {
    for row in &golden.fvector {
        let poly = lipschitz_vertices(&row.metric.build()?)?;
        let ball = build_ball(&poly);
        match face_lattice_capped(&ball, max_faces) {
            Ok(lattice) => {
                let f: Vec<BigInt> = lattice.f_vector().into_iter().map(BigInt::from).collect();
                exact_rows("fvector", &row.name, &row.f_vector, &f, out);
            }
            Err(Error::Capacity { message, .. }) => out.push(Check {
                table: "fvector",
                case: row.name.clone(),
                quantity: "f_vector".into(),
                expected: join(&row.f_vector),
                observed: format!("skipped: {message}"),
                pass: false,
            }),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn join(v: &[u64]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn experiments(golden: &Golden, opts: &TableOptions, out: &mut Vec<Check>) -> Result<()> {
    for row in &golden.experiments {
        let model = ModelSpec::from_json(&row.model)?;
        let geom = MetricGeometry::new(&row.metric.build()?)?;
        let popts = ProjectOptions {
            seed: opts.seed,
            ..ProjectOptions::default()
        };
        let report = experiment(&model, &geom, opts.samples, opts.seed, &popts)?;
        let got = report.mean_feasible_facets;
        out.push(Check {
            table: "experiments",
            case: row.name.clone(),
            quantity: "mean feasible facets".into(),
            expected: format!("{} ± {}%", row.mean_feasible, 100.0 * row.feasible_rel_tol),
            observed: format!("{got:.3}"),
            pass: (got - row.mean_feasible).abs() <= row.feasible_rel_tol * row.mean_feasible,
        });
        for (&dim, &pct) in &row.type_percent {
            let got = report.percent_of_dim(dim);
            out.push(Check {
                table: "experiments",
                case: row.name.clone(),
                quantity: format!("% type dim {dim}"),
                expected: format!("{pct} ± {}", row.percent_tol),
                observed: format!("{got:.1}"),
                pass: (got - pct).abs() <= row.percent_tol,
            });
        }
    }
    Ok(())
}

pub fn to_csv(checks: &[Check]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["table", "case", "quantity", "expected", "observed", "pass"])?;
    for c in checks {
        w.write_record([
            c.table,
            &c.case,
            &c.quantity,
            &c.expected,
            &c.observed,
            if c.pass { "pass" } else { "fail" },
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
