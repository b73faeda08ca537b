//! `wim`: Wasserstein distances to independence models from the command line.

mod input;
mod tables;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use wim_core::optimize::{project_by_facets, project_global, MetricGeometry, ProjectOptions};
use wim_core::polytope::{build_ball, face_lattice_capped, lipschitz_vertices, DEFAULT_MAX_FACES};
use wim_core::{
    experiment, hardy_weinberg_closed_form, polar_degrees, twobit_closed_form, wasserstein, Error,
    MetricSpec,
};

#[derive(Parser)]
#[command(name = "wim", version, about = "Wasserstein distances to discrete independence models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a metric as its spec and full distance matrix.
    Metric {
        /// Metric spec file, inline JSON, or `discrete:N`, `l0:S,..`, `l1:S,..`.
        #[arg(long)]
        metric: String,
    },
    /// Vertices and f-vector of the Lipschitz polytope.
    Lipschitz {
        #[arg(long)]
        metric: String,
        #[arg(long)]
        fvector: bool,
        #[arg(long)]
        vertices: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_FACES)]
        max_faces: usize,
    },
    /// Faces of the Wasserstein unit ball.
    Ball {
        #[arg(long)]
        metric: String,
        /// A face dimension, or `all`.
        #[arg(long, default_value = "all")]
        faces: String,
        #[arg(long, default_value_t = DEFAULT_MAX_FACES)]
        max_faces: usize,
    },
    /// Wasserstein distance between two distributions.
    Distance {
        #[arg(long)]
        metric: String,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: String,
    },
    /// Closed-form projection onto the Hardy–Weinberg curve or the 2-bit model.
    ClosedForm {
        #[arg(long, value_enum)]
        model: ClosedModel,
        #[arg(long)]
        mu: String,
    },
    /// Project a distribution onto a model.
    Project {
        #[arg(long)]
        model: String,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        mu: String,
        #[arg(long, value_enum, default_value_t = Method::Global)]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid points per axis for the initial scan.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Project uniformly sampled distributions and summarize.
    Experiment {
        #[arg(long)]
        model: String,
        #[arg(long)]
        metric: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output path; the summary goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the global method that otherwise cross-checks every sample.
        #[arg(long)]
        no_cross_check: bool,
    },
    /// Polar degrees of a model as decimal strings.
    PolarDegrees {
        #[arg(long)]
        model: String,
        /// Only the nonzero range, starting at the degree.
        #[arg(long)]
        shifted: bool,
    },
    /// Regenerate reference tables and compare with the golden values.
    Tables {
        #[arg(long, value_enum, default_value_t = tables::Which::All)]
        which: tables::Which,
        #[arg(long, default_value_t = DEFAULT_MAX_FACES)]
        max_faces: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClosedModel {
    Hw,
    #[value(name = "2bit")]
    TwoBit,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Global,
    Facets,
    Both,
}

/// Error categories and their exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Failure {
    Other = 1,
    FileNotFound = 3,
    Parse = 4,
    Capacity = 5,
    InvalidInput = 6,
    TableMismatch = 7,
}

impl Failure {
    fn name(self) -> &'static str {
        match self {
            Failure::Other => "error",
            Failure::FileNotFound => "file_not_found",
            Failure::Parse => "parse",
            Failure::Capacity => "capacity",
            Failure::InvalidInput => "invalid_input",
            Failure::TableMismatch => "table_mismatch",
        }
    }

    fn classify(err: &anyhow::Error) -> Self {
        for cause in err.chain() {
            if let Some(e) = cause.downcast_ref::<std::io::Error>() {
                if e.kind() == std::io::ErrorKind::NotFound {
                    return Failure::FileNotFound;
                }
            }
            if cause.downcast_ref::<serde_json::Error>().is_some() {
                return Failure::Parse;
            }
            if cause.downcast_ref::<TableMismatch>().is_some() {
                return Failure::TableMismatch;
            }
            if let Some(e) = cause.downcast_ref::<Error>() {
                return match e {
                    Error::Parse(_) => Failure::Parse,
                    Error::Capacity { .. } => Failure::Capacity,
                    _ => Failure::InvalidInput,
                };
            }
        }
        Failure::Other
    }
}

#[derive(Debug)]
struct TableMismatch(usize);

impl std::fmt::Display for TableMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} table entries differ from the golden values", self.0)
    }
}

impl std::error::Error for TableMismatch {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return report(e);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(err: anyhow::Error) -> ExitCode {
    let kind = Failure::classify(&err);
    let body = json!({ "error": { "kind": kind.name(), "message": format!("{err:#}") } });
    eprintln!("{body}");
    ExitCode::from(kind as u8)
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("WIM_THREADS") {
        let n: usize = raw
            .parse()
            .map_err(|_| Error::Parse(format!("WIM_THREADS must be a positive integer, got {raw:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn print_json(value: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Metric { metric } => {
            let m = input::metric(&metric)?;
            let rows: Vec<Vec<String>> = m
                .rows()
                .iter()
                .map(|r| r.iter().map(wim_core::rational::format_rational).collect())
                .collect();
            print_json(&json!({ "spec": MetricSpec::describe(&m), "n": m.n(), "matrix": rows }))
        }
        Command::Lipschitz { metric, fvector, vertices, max_faces } => {
            let poly = lipschitz_vertices(&input::metric(&metric)?)?;
            let mut out = json!({ "n": poly.n(), "vertex_count": poly.vertices().len() });
            if vertices {
                let vs: Vec<Vec<String>> = poly.vertices().iter().map(|v| v.to_strings()).collect();
                out["vertices"] = json!(vs);
            }
            if fvector {
                let lattice = face_lattice_capped(&build_ball(&poly), max_faces)?;
                out["f_vector"] = json!(lattice.lipschitz_f_vector());
            }
            print_json(&out)
        }
        Command::Ball { metric, faces, max_faces } => {
            let poly = lipschitz_vertices(&input::metric(&metric)?)?;
            let ball = build_ball(&poly);
            let lattice = face_lattice_capped(&ball, max_faces)?;
            let dim = match faces.as_str() {
                "all" => None,
                d => Some(d.parse::<usize>().map_err(|_| {
                    Error::Parse(format!("--faces expects a dimension or `all`, got {d:?}"))
                })?),
            };
            let verts: Vec<[usize; 2]> = ball.vertices().iter().map(|v| [v.from + 1, v.to + 1]).collect();
            let list: Vec<Value> = lattice
                .faces()
                .iter()
                .filter(|f| dim.map_or(true, |d| f.dim == d))
                .map(|f| {
                    json!({
                        "dim": f.dim,
                        "vertex_ids": f.vertex_set,
                        "normal": ball.normal(f.normal).to_strings(),
                    })
                })
                .collect();
            print_json(&json!({
                "n": ball.n(),
                "vertices": verts,
                "f_vector": lattice.f_vector(),
                "faces": list,
            }))
        }
        Command::Distance { metric, mu, nu } => {
            let poly = lipschitz_vertices(&input::metric(&metric)?)?;
            let cert = wasserstein(&poly, &input::distribution(&mu)?, &input::distribution(&nu)?)?;
            print_json(&serde_json::to_value(cert)?)
        }
        Command::ClosedForm { model, mu } => {
            let mu = input::distribution(&mu)?;
            let cf = match model {
                ClosedModel::Hw => hardy_weinberg_closed_form(&mu)?,
                ClosedModel::TwoBit => twobit_closed_form(&mu)?,
            };
            print_json(&serde_json::to_value(cf)?)
        }
        Command::Project { model, metric, mu, method, seed, grid } => {
            let model = input::model(&model)?;
            let geom = MetricGeometry::new(&input::metric(&metric)?)?;
            let mu = input::distribution(&mu)?;
            let opts = ProjectOptions {
                seed,
                grid,
                cross_check: method == Method::Both,
                ..ProjectOptions::default()
            };
            let result = match method {
                Method::Global => project_global(&model, &geom, &mu, &opts)?,
                Method::Facets | Method::Both => project_by_facets(&model, &geom, &mu, &opts)?,
            };
            print_json(&serde_json::to_value(result.report(&geom.ball))?)
        }
        Command::Experiment { model, metric, samples, seed, out, no_cross_check } => {
            let model = input::model(&model)?;
            let geom = MetricGeometry::new(&input::metric(&metric)?)?;
            let opts = ProjectOptions {
                seed,
                cross_check: !no_cross_check,
                ..ProjectOptions::default()
            };
            let report = experiment(&model, &geom, samples, seed, &opts)?;
            if let Some(path) = out {
                fs::write(&path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            print_json(&json!({
                "samples": report.samples,
                "seed": report.seed,
                "type_histogram": report.type_histogram,
                "mean_feasible_facets": report.mean_feasible_facets,
                "max_method_gap": report.max_method_gap,
            }))
        }
        Command::PolarDegrees { model, shifted } => {
            let p = polar_degrees(&input::model(&model)?);
            let list = if shifted { p.shifted() } else { p.delta.clone() };
            let strings: Vec<String> = list.iter().map(ToString::to_string).collect();
            print_json(&json!(strings))
        }
        Command::Tables { which, max_faces, samples, seed, out } => {
            let golden = tables::golden()?;
            let opts = tables::TableOptions { max_faces, samples, seed };
            let checks = tables::run(which, &golden, &opts)?;
            let csv = tables::to_csv(&checks)?;
            match out {
                Some(path) => fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                return Err(TableMismatch(failed).into());
            }
            Ok(())
        }
    }
}
