use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::facets::project_by_facets;
use super::{MetricGeometry, ProjectOptions};
use crate::error::Result;
use crate::model::{sample_one, ModelSpec};

/// One sampled data distribution and its projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub sample_id: u64,
    pub value: f64,
    pub type_dim: Option<usize>,
    pub feasible_facets: usize,
    pub tie_count: usize,
    /// Gap between the facet method and the global method, when cross-checking.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub method_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<ExperimentRow>,
    /// Percentage of samples per type dimension.
    pub type_histogram: BTreeMap<usize, f64>,
    pub mean_feasible_facets: f64,
    /// Largest gap between the facet method and the global method.
    pub max_method_gap: Option<f64>,
}

impl ExperimentReport {
    fn from_rows(rows: Vec<ExperimentRow>, seed: u64) -> Self {
        let samples = rows.len();
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for r in &rows {
            if let Some(d) = r.type_dim {
                *counts.entry(d).or_default() += 1;
            }
        }
        let denom = samples.max(1) as f64;
        let type_histogram = counts
            .into_iter()
            .map(|(d, c)| (d, 100.0 * c as f64 / denom))
            .collect();
        let mean_feasible_facets = rows.iter().map(|r| r.feasible_facets as f64).sum::<f64>() / denom;
        let max_method_gap = rows
            .iter()
            .filter_map(|r| r.method_gap)
            .reduce(f64::max);
        ExperimentReport {
            samples,
            seed,
            rows,
            type_histogram,
            mean_feasible_facets,
            max_method_gap,
        }
    }

    /// Percentage of samples whose type has dimension `dim`.
    pub fn percent_of_dim(&self, dim: usize) -> f64 {
        self.type_histogram.get(&dim).copied().unwrap_or(0.0)
    }

    /// One line per sample: `sample_id,value,type_dim,feasible_facets,tie_count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample_id,value,type_dim,feasible_facets,tie_count\n");
        for r in &self.rows {
            let dim = r.type_dim.map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{:.17e},{},{},{}",
                r.sample_id, r.value, dim, r.feasible_facets, r.tie_count
            );
        }
        out
    }
}

/// Projects `samples` uniform random distributions onto `model` by the facet
/// method. Sample `i` depends only on `(seed, i)`, so results do not depend
/// on the number of threads.
pub fn experiment(
    model: &ModelSpec,
    geom: &MetricGeometry,
    samples: usize,
    seed: u64,
    opts: &ProjectOptions,
) -> Result<ExperimentReport> {
    let n = geom.n();
    let rows: Result<Vec<ExperimentRow>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mu = sample_one(n, seed, i);
            let res = project_by_facets(model, geom, &mu, opts)?;
            Ok(ExperimentRow {
                sample_id: i,
                value: res.value,
                type_dim: res.type_dim,
                feasible_facets: res.feasible_facet_count.unwrap_or(0),
                tie_count: res.ties.len(),
                method_gap: res.method_gap,
            })
        })
        .collect();
    Ok(ExperimentReport::from_rows(rows?, seed))
}
