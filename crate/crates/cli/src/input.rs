//! Loading metrics, models and distributions from command-line arguments.
//!
//! Each argument is a path to a JSON file or the JSON text itself. Metrics
//! also accept the shorthands `discrete:N`, `l0:S1,S2,..` and `l1:S1,S2,..`.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;
use wim_core::{Distribution, FiniteMetric, MetricKind, MetricSpec, ModelSpec};

/// Reads `arg` as inline JSON if it looks like JSON, otherwise as a file path.
pub fn json_arg(arg: &str) -> Result<Value> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(Path::new(arg)).with_context(|| format!("reading {arg}"))?
    };
    let value = serde_json::from_str(&text).with_context(|| format!("parsing JSON from {arg}"))?;
    Ok(value)
}

fn parse_sizes(list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| wim_core::Error::Parse(format!("size {s:?}: {e}")).into())
        })
        .collect()
}

pub fn metric_spec(arg: &str) -> Result<MetricSpec> {
    if let Some((kind, rest)) = arg.split_once(':') {
        let kind = match kind {
            "discrete" => MetricKind::Discrete,
            "l0" => MetricKind::L0,
            "l1" => MetricKind::L1,
            _ => return metric_spec_json(arg),
        };
        let sizes = parse_sizes(rest)?;
        let spec = if kind == MetricKind::Discrete {
            MetricSpec {
                kind,
                n: Some(sizes.iter().product()),
                sizes: None,
                matrix: None,
            }
        } else {
            MetricSpec {
                kind,
                n: None,
                sizes: Some(sizes),
                matrix: None,
            }
        };
        return Ok(spec);
    }
    metric_spec_json(arg)
}

fn metric_spec_json(arg: &str) -> Result<MetricSpec> {
    let value = json_arg(arg)?;
    serde_json::from_value(value)
        .map_err(|e| wim_core::Error::Parse(format!("metric spec: {e}")).into())
}

pub fn metric(arg: &str) -> Result<FiniteMetric> {
    Ok(metric_spec(arg)?.build()?)
}

pub fn model(arg: &str) -> Result<ModelSpec> {
    Ok(ModelSpec::from_json(&json_arg(arg)?)?)
}

pub fn distribution(arg: &str) -> Result<Distribution> {
    Ok(Distribution::from_json(&json_arg(arg)?)?)
}
