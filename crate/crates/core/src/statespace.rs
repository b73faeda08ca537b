//! Product state spaces, finite metrics on them, and probability vectors.
//!
//! States of a product `[m_1] x ... x [m_k]` are indexed lexicographically
//! with the first factor varying slowest, so `(i_1, ..., i_k)` maps to
//! `sum_l i_l * prod_{l' > l} m_{l'}`. A symmetric factor `(m)_d` contributes
//! `C(m+d-1, d)` states, one per exponent vector `a` with `|a| = d`, listed in
//! colex order: `(d,0,..)` first, `(..,0,d)` last.

use std::collections::VecDeque;

use num_integer::binomial;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, rat_int, to_f64, Rat};

/// One factor `(m)_d` of a Segre–Veronese model: `d` i.i.d. draws from `[m]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub m: usize,
    #[serde(default = "one")]
    pub d: usize,
}

fn one() -> usize {
    1
}

impl Factor {
    pub fn new(m: usize, d: usize) -> Self {
        Factor { m, d }
    }

    /// Number of states, `C(m + d - 1, d)`.
    pub fn states(&self) -> usize {
        binomial(self.m + self.d - 1, self.d)
    }

    /// Exponent vectors of the factor's states in colex order.
    pub fn exponents(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![0; self.m];
        compositions(self.d, 0, &mut cur, &mut out);
        out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
        out
    }
}

fn compositions(rem: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == cur.len() {
        cur[pos] = rem;
        out.push(cur.clone());
        return;
    }
    for v in 0..=rem {
        cur[pos] = v;
        compositions(rem - v, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// The tuple `((m_1)_{d_1}, ..., (m_k)_{d_k})` and its state count.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductShape {
    factors: Vec<Factor>,
    n: usize,
}

impl ProductShape {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidShape("a model needs at least one factor".into()));
        }
        for f in &factors {
            if f.m < 2 || f.d < 1 {
                return Err(Error::InvalidShape(format!(
                    "factor (m={}, d={}) needs m >= 2 and d >= 1",
                    f.m, f.d
                )));
            }
        }
        let n = factors.iter().map(Factor::states).product();
        Ok(ProductShape { factors, n })
    }

    /// Plain product `[m_1] x ... x [m_k]` with every `d_i = 1`.
    pub fn segre(sizes: &[usize]) -> Result<Self> {
        Self::new(sizes.iter().map(|&m| Factor::new(m, 1)).collect())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of states contributed by each factor.
    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::states).collect()
    }
}

/// Per-factor local indices of a flat state index.
pub fn state_tuple(sizes: &[usize], mut index: usize) -> Vec<usize> {
    let mut t = vec![0; sizes.len()];
    for l in (0..sizes.len()).rev() {
        t[l] = index % sizes[l];
        index /= sizes[l];
    }
    t
}

/// Flat index of a tuple of per-factor local indices.
pub fn state_index(sizes: &[usize], tuple: &[usize]) -> usize {
    tuple
        .iter()
        .zip(sizes)
        .fold(0, |acc, (&i, &m)| acc * m + i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Discrete,
    L0,
    L1,
    Custom,
}

/// A finite metric space `([n], d)` with exact rational distances.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetric {
    n: usize,
    d: Vec<Rat>,
    graph_edges: Option<Vec<(usize, usize)>>,
    kind: MetricKind,
    sizes: Option<Vec<usize>>,
}

impl FiniteMetric {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.d[i * self.n + j]
    }

    pub fn get_f64(&self, i: usize, j: usize) -> f64 {
        to_f64(self.get(i, j))
    }

    /// Edges `(i, j)` with `i < j` when the metric is a unit-weight graph metric.
    pub fn graph_edges(&self) -> Option<&[(usize, usize)]> {
        self.graph_edges.as_deref()
    }

    /// Factor sizes for the product metrics.
    pub fn sizes(&self) -> Option<&[usize]> {
        self.sizes.as_deref()
    }

    pub fn rows(&self) -> Vec<Vec<Rat>> {
        self.d.chunks(self.n).map(<[Rat]>::to_vec).collect()
    }

    pub fn matrix_f64(&self) -> Vec<Vec<f64>> {
        self.d
            .chunks(self.n)
            .map(|r| r.iter().map(to_f64).collect())
            .collect()
    }

    pub fn diameter(&self) -> Rat {
        self.d.iter().max().cloned().unwrap_or_else(Rat::zero)
    }

    /// Pairs `i < j` whose inequalities `|x_i - x_j| <= d_ij` can define
    /// facets of the Lipschitz polytope: graph edges when known, otherwise all pairs.
    pub fn constraint_pairs(&self) -> Vec<(usize, usize)> {
        match &self.graph_edges {
            Some(e) => e.clone(),
            None => (0..self.n)
                .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
                .collect(),
        }
    }

    /// The same metric with every distance multiplied by `factor`. Graph
    /// structure is dropped unless `factor == 1`.
    pub fn scaled(&self, factor: &Rat) -> Result<Self> {
        if !factor.is_positive() {
            return Err(Error::NotAMetric("scale factor must be positive".into()));
        }
        let keep = factor.is_one();
        Ok(FiniteMetric {
            n: self.n,
            d: self.d.iter().map(|x| x * factor).collect(),
            graph_edges: if keep { self.graph_edges.clone() } else { None },
            kind: if keep { self.kind } else { MetricKind::Custom },
            sizes: self.sizes.clone(),
        })
    }

    /// Checks `d` against all-pairs shortest paths over `graph_edges`.
    pub fn verify_graph(&self) -> bool {
        let Some(edges) = &self.graph_edges else {
            return false;
        };
        let n = self.n;
        let inf = usize::MAX / 4;
        let mut sp = vec![inf; n * n];
        for i in 0..n {
            sp[i * n + i] = 0;
        }
        for &(i, j) in edges {
            sp[i * n + j] = 1;
            sp[j * n + i] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = sp[i * n + k] + sp[k * n + j];
                    if via < sp[i * n + j] {
                        sp[i * n + j] = via;
                    }
                }
            }
        }
        (0..n * n).all(|idx| sp[idx] < inf && rat_int(sp[idx] as i64) == self.d[idx])
    }

    /// Returns whether the graph is connected and bipartite (two-colourable).
    pub fn is_bipartite_graph(&self) -> bool {
        let Some(edges) = &self.graph_edges else {
            return false;
        };
        let adj = adjacency(self.n, edges);
        let mut colour = vec![u8::MAX; self.n];
        colour[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if colour[v] == u8::MAX {
                    colour[v] = 1 - colour[u];
                    queue.push_back(v);
                } else if colour[v] == colour[u] {
                    return false;
                }
            }
        }
        colour.iter().all(|&c| c != u8::MAX)
    }

    fn from_graph(n: usize, edges: Vec<(usize, usize)>, kind: MetricKind, sizes: Option<Vec<usize>>) -> Self {
        let adj = adjacency(n, &edges);
        let mut d = vec![Rat::zero(); n * n];
        for s in 0..n {
            let mut dist = vec![usize::MAX; n];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            for t in 0..n {
                d[s * n + t] = rat_int(dist[t] as i64);
            }
        }
        FiniteMetric {
            n,
            d,
            graph_edges: Some(edges),
            kind,
            sizes,
        }
    }
}

pub(crate) fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    adj
}

/// The discrete metric on `[n]`, i.e. the graph metric of `K_n`.
pub fn discrete_metric(n: usize) -> Result<FiniteMetric> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("discrete metric needs n >= 2, got {n}")));
    }
    let edges = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    Ok(FiniteMetric::from_graph(n, edges, MetricKind::Discrete, None))
}

fn check_sizes(sizes: &[usize]) -> Result<usize> {
    if sizes.is_empty() {
        return Err(Error::InvalidShape("empty list of factor sizes".into()));
    }
    if let Some(&m) = sizes.iter().find(|&&m| m < 2) {
        return Err(Error::InvalidShape(format!("factor size {m} < 2")));
    }
    Ok(sizes.iter().product())
}

fn product_metric(sizes: &[usize], kind: MetricKind) -> Result<FiniteMetric> {
    let n = check_sizes(sizes)?;
    let tuples: Vec<Vec<usize>> = (0..n).map(|i| state_tuple(sizes, i)).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let diffs: Vec<usize> = tuples[i]
                .iter()
                .zip(&tuples[j])
                .map(|(a, b)| a.abs_diff(*b))
                .collect();
            let changed = diffs.iter().filter(|&&x| x > 0).count();
            let adjacent = match kind {
                MetricKind::L0 => changed == 1,
                _ => changed == 1 && diffs.iter().sum::<usize>() == 1,
            };
            if adjacent {
                edges.push((i, j));
            }
        }
    }
    Ok(FiniteMetric::from_graph(n, edges, kind, Some(sizes.to_vec())))
}

/// Hamming metric on `[m_1] x ... x [m_k]`: product of complete graphs.
pub fn l0_metric(sizes: &[usize]) -> Result<FiniteMetric> {
    product_metric(sizes, MetricKind::L0)
}

/// Manhattan metric on `[m_1] x ... x [m_k]`: product of paths.
pub fn l1_metric(sizes: &[usize]) -> Result<FiniteMetric> {
    product_metric(sizes, MetricKind::L1)
}

/// Validates a user-supplied matrix as a metric.
pub fn custom_metric(matrix: Vec<Vec<Rat>>) -> Result<FiniteMetric> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::InvalidSize(format!("metric needs n >= 2, got {n}")));
    }
    if let Some(r) = matrix.iter().position(|row| row.len() != n) {
        return Err(Error::InvalidShape(format!("row {} has length {}, expected {n}", r + 1, matrix[r].len())));
    }
    for i in 0..n {
        if !matrix[i][i].is_zero() {
            return Err(Error::NotAMetric(format!("nonzero diagonal entry at {}", i + 1)));
        }
        for j in (i + 1)..n {
            if matrix[i][j] != matrix[j][i] {
                return Err(Error::NotAMetric(format!("asymmetric at ({}, {})", i + 1, j + 1)));
            }
            if !matrix[i][j].is_positive() {
                return Err(Error::NotAMetric(format!(
                    "non-positive distance at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                if matrix[i][j] > &matrix[i][k] + &matrix[k][j] {
                    return Err(Error::TriangleViolation {
                        i: i + 1,
                        j: j + 1,
                        k: k + 1,
                    });
                }
            }
        }
    }
    Ok(FiniteMetric {
        n,
        d: matrix.into_iter().flatten().collect(),
        graph_edges: None,
        kind: MetricKind::Custom,
        sizes: None,
    })
}

/// Builds a metric on `[3]` from `(d_12, d_13, d_23)`.
pub fn metric_on_three(d12: Rat, d13: Rat, d23: Rat) -> Result<FiniteMetric> {
    let z = Rat::zero();
    custom_metric(vec![
        vec![z.clone(), d12.clone(), d13.clone()],
        vec![d12, z.clone(), d23.clone()],
        vec![d13, d23, z],
    ])
}

/// JSON description of a metric, as read from a metric spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub kind: MetricKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<String>>>,
}

impl MetricSpec {
    pub fn build(&self) -> Result<FiniteMetric> {
        match self.kind {
            MetricKind::Discrete => match (self.n, &self.sizes) {
                (Some(n), _) => discrete_metric(n),
                (None, Some(s)) => discrete_metric(s.iter().product()),
                _ => Err(Error::Parse("discrete metric needs \"n\"".into())),
            },
            MetricKind::L0 | MetricKind::L1 => {
                let sizes = match (&self.sizes, self.n) {
                    (Some(s), _) => s.clone(),
                    (None, Some(n)) => vec![n],
                    _ => return Err(Error::Parse("product metric needs \"sizes\"".into())),
                };
                if self.kind == MetricKind::L0 {
                    l0_metric(&sizes)
                } else {
                    l1_metric(&sizes)
                }
            }
            MetricKind::Custom => {
                let raw = self
                    .matrix
                    .as_ref()
                    .ok_or_else(|| Error::Parse("custom metric needs \"matrix\"".into()))?;
                let m = raw
                    .iter()
                    .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                custom_metric(m)
            }
        }
    }

    /// Spec that rebuilds `metric` exactly.
    pub fn describe(metric: &FiniteMetric) -> Self {
        match metric.kind {
            MetricKind::Discrete => MetricSpec {
                kind: MetricKind::Discrete,
                n: Some(metric.n),
                sizes: None,
                matrix: None,
            },
            MetricKind::L0 | MetricKind::L1 => MetricSpec {
                kind: metric.kind,
                n: None,
                sizes: metric.sizes.clone(),
                matrix: None,
            },
            MetricKind::Custom => MetricSpec {
                kind: MetricKind::Custom,
                n: None,
                sizes: None,
                matrix: Some(
                    metric
                        .rows()
                        .iter()
                        .map(|r| r.iter().map(format_rational).collect())
                        .collect(),
                ),
            },
        }
    }
}

/// Tolerance on the total mass of floating-point distributions.
pub const SUM_TOL: f64 = 1e-12;

/// A point of the probability simplex, exact or floating.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Exact(Vec<Rat>),
    Float(Vec<f64>),
}

impl Distribution {
    pub fn from_f64(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Shape("empty distribution".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(format!("entry {} is negative or not finite", i + 1)));
        }
        let s: f64 = values.iter().sum();
        if (s - 1.0).abs() > SUM_TOL * values.len().max(1) as f64 {
            return Err(Error::Domain(format!("entries sum to {s}, not 1")));
        }
        Ok(Distribution::Float(values))
    }

    pub fn from_rationals(values: Vec<Rat>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Shape("empty distribution".into()));
        }
        if let Some(i) = values.iter().position(Signed::is_negative) {
            return Err(Error::Domain(format!("entry {} is negative", i + 1)));
        }
        let s: Rat = values.iter().sum();
        if !s.is_one() {
            return Err(Error::Domain(format!("entries sum to {}, not 1", format_rational(&s))));
        }
        Ok(Distribution::Exact(values))
    }

    /// Normalizes nonnegative integer weights to an exact distribution.
    pub fn from_weights(weights: &[i64]) -> Result<Self> {
        let total: i64 = weights.iter().sum();
        if total <= 0 {
            return Err(Error::Domain("weights must have positive total".into()));
        }
        Self::from_rationals(weights.iter().map(|&w| crate::rational::rat(w, total)).collect())
    }

    /// Point mass on state `i` of `[n]`.
    pub fn point_mass(n: usize, i: usize) -> Self {
        let mut v = vec![Rat::zero(); n];
        v[i] = Rat::one();
        Distribution::Exact(v)
    }

    pub fn len(&self) -> usize {
        match self {
            Distribution::Exact(v) => v.len(),
            Distribution::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Distribution::Exact(_))
    }

    pub fn exact(&self) -> Option<&[Rat]> {
        match self {
            Distribution::Exact(v) => Some(v),
            Distribution::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Distribution::Exact(v) => v.iter().map(to_f64).collect(),
            Distribution::Float(v) => v.clone(),
        }
    }

    /// Accepts a JSON array of numbers and/or rational strings. Arrays made
    /// only of strings or integers are read exactly.
    pub fn from_json(value: &Value) -> Result<Self> {
        let arr = value
            .as_array()
            .ok_or_else(|| Error::Parse("distribution must be a JSON array".into()))?;
        let exact = arr
            .iter()
            .all(|v| v.is_string() || v.is_i64() || v.is_u64());
        if exact {
            let vals = arr
                .iter()
                .map(|v| match v {
                    Value::String(s) => parse_rational(s),
                    _ => Ok(rat_int(v.as_i64().unwrap_or(0))),
                })
                .collect::<Result<Vec<_>>>()?;
            Self::from_rationals(vals)
        } else {
            let vals = arr
                .iter()
                .map(|v| match v {
                    Value::String(s) => parse_rational(s).map(|r| to_f64(&r)),
                    _ => v
                        .as_f64()
                        .ok_or_else(|| Error::Parse(format!("not a number: {v}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Self::from_f64(vals)
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Distribution::Exact(v) => Value::Array(
                v.iter().map(|r| Value::String(format_rational(r))).collect(),
            ),
            Distribution::Float(v) => serde_json::json!(v),
        }
    }
}
