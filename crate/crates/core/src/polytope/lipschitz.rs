use std::collections::VecDeque;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::dd::{box_then_cut, Halfspace};
use super::QuotientPoint;
use crate::error::{Error, Result};
use crate::rational::{rank, rat_int, Rat};
use crate::statespace::{adjacency, discrete_metric, FiniteMetric};

pub const MAX_DISCRETE_N: usize = 16;
pub const MAX_GENERAL_N: usize = 10;
/// Materialization cap for the bipartite enumerator; use
/// [`count_bipartite_vertices`] beyond it.
pub const MAX_BIPARTITE_VERTICES: usize = 200_000;

/// Facet-defining halfspace `sign * (x_i - x_j) <= d_ij`, with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FacetPair {
    pub i: usize,
    pub j: usize,
    pub sign: i8,
}

impl FacetPair {
    /// Ordered pair `(from, to)` with the inequality `x_from - x_to <= d`.
    pub fn oriented(&self) -> (usize, usize) {
        if self.sign > 0 {
            (self.i, self.j)
        } else {
            (self.j, self.i)
        }
    }
}

#[derive(Debug, Clone)]
pub struct LipschitzPolytope {
    metric: FiniteMetric,
    vertices: Vec<QuotientPoint>,
    facet_pairs: Vec<FacetPair>,
    vertex_f64: Vec<f64>,
}

impl LipschitzPolytope {
    /// Wraps an already enumerated vertex set. Facet-defining pairs are the
    /// graph edges for graph metrics and are found by an exact rank test otherwise.
    pub fn from_vertices(metric: FiniteMetric, mut vertices: Vec<QuotientPoint>) -> Self {
        vertices.sort();
        vertices.dedup();
        let facet_pairs = match metric.graph_edges() {
            Some(edges) => edges
                .iter()
                .flat_map(|&(i, j)| [FacetPair { i, j, sign: 1 }, FacetPair { i, j, sign: -1 }])
                .collect(),
            None => facet_pairs_by_rank(&metric, &vertices),
        };
        let vertex_f64 = vertices.iter().flat_map(QuotientPoint::to_f64).collect();
        LipschitzPolytope {
            metric,
            vertices,
            facet_pairs,
            vertex_f64,
        }
    }

    pub fn metric(&self) -> &FiniteMetric {
        &self.metric
    }

    pub fn n(&self) -> usize {
        self.metric.n()
    }

    pub fn vertices(&self) -> &[QuotientPoint] {
        &self.vertices
    }

    pub fn facet_pairs(&self) -> &[FacetPair] {
        &self.facet_pairs
    }

    /// Row-major `len x n` matrix of the vertices in floating point.
    pub fn vertex_matrix(&self) -> &[f64] {
        &self.vertex_f64
    }

    /// Whether `x` satisfies `|x_i - x_j| <= d_ij` for every pair.
    pub fn contains(&self, x: &QuotientPoint) -> bool {
        let n = self.n();
        (0..n).all(|i| {
            (0..n).all(|j| i == j || &x.coords()[i] - &x.coords()[j] <= *self.metric.get(i, j))
        })
    }

    /// Whether the constraints tight at `x` span the full `(n-1)`-dimensional dual.
    pub fn is_vertex(&self, x: &QuotientPoint) -> bool {
        let n = self.n();
        let mut rows = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && &x.coords()[i] - &x.coords()[j] == *self.metric.get(i, j) {
                    let mut r = vec![Rat::zero(); n];
                    r[i] = Rat::one();
                    r[j] = -Rat::one();
                    rows.push(r);
                }
            }
        }
        rank(&rows) == n - 1
    }
}

fn facet_pairs_by_rank(metric: &FiniteMetric, vertices: &[QuotientPoint]) -> Vec<FacetPair> {
    let n = metric.n();
    let mut out = Vec::new();
    for (i, j) in metric.constraint_pairs() {
        for sign in [1i8, -1] {
            let (a, b) = if sign > 0 { (i, j) } else { (j, i) };
            let tight: Vec<&QuotientPoint> = vertices
                .iter()
                .filter(|x| &x.coords()[a] - &x.coords()[b] == *metric.get(a, b))
                .collect();
            if tight.len() + 1 < n {
                continue;
            }
            // Affine rank of the tight vertices in coordinates relative to x_0.
            let rel = |x: &QuotientPoint| -> Vec<Rat> {
                (1..n).map(|k| &x.coords()[k] - &x.coords()[0]).collect()
            };
            let base = rel(tight[0]);
            let rows: Vec<Vec<Rat>> = tight[1..]
                .iter()
                .map(|x| rel(x).iter().zip(&base).map(|(p, q)| p - q).collect())
                .collect();
            if rank(&rows) == n - 2 {
                out.push(FacetPair { i, j, sign });
            }
        }
    }
    out
}

/// Vertices of `P_d` for the discrete metric: the `2^n - 2` indicator vectors
/// of nonempty proper subsets of `[n]`.
pub fn lipschitz_vertices_discrete(n: usize) -> Result<LipschitzPolytope> {
    let metric = discrete_metric(n)?;
    if n > MAX_DISCRETE_N {
        return Err(Error::capacity(format!(
            "discrete Lipschitz polytope limited to n <= {MAX_DISCRETE_N}"
        )));
    }
    let vertices = (1u32..(1 << n) - 1)
        .map(|set| {
            QuotientPoint::new((0..n).map(|i| rat_int(i64::from(set >> i & 1))).collect())
        })
        .collect();
    Ok(LipschitzPolytope::from_vertices(metric, vertices))
}

struct Labeling<'a> {
    order: Vec<usize>,
    parent: Vec<usize>,
    adj: &'a [Vec<usize>],
    x: Vec<i64>,
    assigned: Vec<bool>,
}

impl Labeling<'_> {
    fn new<'a>(n: usize, adj: &'a [Vec<usize>]) -> Labeling<'a> {
        let mut order = Vec::with_capacity(n);
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        let mut x = vec![0; n];
        let mut assigned = vec![false; n];
        x[0] = 0;
        assigned[0] = true;
        Labeling {
            order,
            parent,
            adj,
            x,
            assigned,
        }
    }

    /// Depth-first over the BFS order; `visit` is called on every complete labeling.
    fn run(&mut self, pos: usize, visit: &mut dyn FnMut(&[i64]) -> bool) -> bool {
        if pos == self.order.len() {
            return visit(&self.x);
        }
        let v = self.order[pos];
        let base = self.x[self.parent[v]];
        for cand in [base - 1, base + 1] {
            let ok = self.adj[v]
                .iter()
                .all(|&u| !self.assigned[u] || (self.x[u] - cand).abs() == 1);
            if !ok {
                continue;
            }
            self.x[v] = cand;
            self.assigned[v] = true;
            let keep_going = self.run(pos + 1, visit);
            self.assigned[v] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }
}

fn bipartite_adjacency(metric: &FiniteMetric) -> Result<Vec<Vec<usize>>> {
    let edges = metric.graph_edges().ok_or_else(|| {
        Error::WrongMethod("metric has no graph structure; use lipschitz_vertices_general".into())
    })?;
    if !metric.is_bipartite_graph() {
        return Err(Error::WrongMethod(
            "graph is not connected and bipartite; use lipschitz_vertices_general".into(),
        ));
    }
    Ok(adjacency(metric.n(), edges))
}

/// Vertices of `P_d` for a bipartite graph metric: integer labelings with
/// `|x_i - x_j| = 1` on every edge, normalized by `x_1 = 0`.
pub fn lipschitz_vertices_bipartite(metric: &FiniteMetric) -> Result<LipschitzPolytope> {
    let adj = bipartite_adjacency(metric)?;
    let mut lab = Labeling::new(metric.n(), &adj);
    let mut found: Vec<Vec<i64>> = Vec::new();
    let mut overflow = false;
    lab.run(1, &mut |x| {
        if found.len() >= MAX_BIPARTITE_VERTICES {
            overflow = true;
            return false;
        }
        found.push(x.to_vec());
        true
    });
    if overflow {
        return Err(Error::capacity(format!(
            "more than {MAX_BIPARTITE_VERTICES} vertices; use count_bipartite_vertices"
        )));
    }
    let vertices = found.iter().map(|x| QuotientPoint::from_ints(x)).collect();
    Ok(LipschitzPolytope::from_vertices(metric.clone(), vertices))
}

/// Number of vertices of `P_d` for a bipartite graph metric, without storing them.
pub fn count_bipartite_vertices(metric: &FiniteMetric) -> Result<u64> {
    let adj = bipartite_adjacency(metric)?;
    let mut lab = Labeling::new(metric.n(), &adj);
    let mut count = 0u64;
    lab.run(1, &mut |_| {
        count += 1;
        true
    });
    Ok(count)
}

/// Vertices of `P_d` for an arbitrary finite metric by exact double description.
pub fn lipschitz_vertices_general(metric: &FiniteMetric) -> Result<LipschitzPolytope> {
    let n = metric.n();
    if n > MAX_GENERAL_N {
        return Err(Error::capacity(format!(
            "general enumeration limited to n <= {MAX_GENERAL_N}, got {n}"
        )));
    }
    // Coordinates y_k = x_k - x_0 for k = 1..n; the box is |y_k| <= d_0k.
    let lo: Vec<Rat> = (1..n).map(|k| -metric.get(0, k).clone()).collect();
    let hi: Vec<Rat> = (1..n).map(|k| metric.get(0, k).clone()).collect();
    let mut extra = Vec::new();
    for (i, j) in metric.constraint_pairs() {
        if i == 0 {
            continue;
        }
        for sign in [1i64, -1] {
            let mut a = vec![Rat::zero(); n - 1];
            a[i - 1] = rat_int(sign);
            a[j - 1] = rat_int(-sign);
            extra.push(Halfspace {
                a,
                b: metric.get(i, j).clone(),
            });
        }
    }
    let ys = box_then_cut(&lo, &hi, &extra)?;
    let vertices = ys
        .into_iter()
        .map(|y| {
            let mut x = Vec::with_capacity(n);
            x.push(Rat::zero());
            x.extend(y);
            QuotientPoint::new(x)
        })
        .collect();
    Ok(LipschitzPolytope::from_vertices(metric.clone(), vertices))
}

/// Picks the specialized enumerator when one applies.
pub fn lipschitz_vertices(metric: &FiniteMetric) -> Result<LipschitzPolytope> {
    use crate::statespace::MetricKind;
    if metric.kind() == MetricKind::Discrete {
        return lipschitz_vertices_discrete(metric.n());
    }
    if metric.is_bipartite_graph() {
        return lipschitz_vertices_bipartite(metric);
    }
    lipschitz_vertices_general(metric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::statespace::{l0_metric, l1_metric, metric_on_three};

    fn vertex_set(poly: &LipschitzPolytope) -> std::collections::HashSet<QuotientPoint> {
        poly.vertices().iter().cloned().collect()
    }

    #[test]
    fn discrete_vertex_counts() {
        assert_eq!(lipschitz_vertices_discrete(4).unwrap().vertices().len(), 14);
        assert_eq!(lipschitz_vertices_discrete(2).unwrap().vertices().len(), 2);
        assert_eq!(lipschitz_vertices_discrete(5).unwrap().vertices().len(), 30);
    }

    #[test]
    fn two_cube_is_octahedron() {
        let p = lipschitz_vertices_bipartite(&l0_metric(&[2, 2]).unwrap()).unwrap();
        assert_eq!(p.vertices().len(), 6);
        // (1/2, -1/2, -1/2, 1/2) up to the all-ones direction.
        assert!(p.vertices().contains(&QuotientPoint::from_ints(&[1, 0, 0, 1])));
        assert!(p.vertices().contains(&QuotientPoint::from_ints(&[2, 1, 1, 0])));
    }

    #[test]
    fn three_cube_has_38_vertices() {
        let p = lipschitz_vertices_bipartite(&l0_metric(&[2, 2, 2]).unwrap()).unwrap();
        assert_eq!(p.vertices().len(), 38);
    }

    #[test]
    fn path_polytope_is_a_cube() {
        for n in 2..=6 {
            let p = lipschitz_vertices_bipartite(&l1_metric(&[n]).unwrap()).unwrap();
            assert_eq!(p.vertices().len(), 1 << (n - 1));
        }
    }

    #[test]
    fn bipartite_rejects_odd_cycles() {
        let err = lipschitz_vertices_bipartite(&l0_metric(&[3, 3]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::WrongMethod(_)));
        let custom = metric_on_three(rat_int(1), rat(9, 10), rat_int(1)).unwrap();
        assert!(matches!(
            lipschitz_vertices_bipartite(&custom),
            Err(Error::WrongMethod(_))
        ));
    }

    #[test]
    fn general_matches_discrete() {
        let a = lipschitz_vertices_general(&discrete_metric(4).unwrap()).unwrap();
        let b = lipschitz_vertices_discrete(4).unwrap();
        assert_eq!(vertex_set(&a), vertex_set(&b));
    }

    #[test]
    fn general_path_on_three_is_parallelogram() {
        let p = lipschitz_vertices_general(&l1_metric(&[3]).unwrap()).unwrap();
        let mut got: Vec<_> = p.vertices().to_vec();
        got.sort();
        // Brute force: the vertices of |x1-x2|<=1, |x2-x3|<=1 modulo 1 are the
        // four sign patterns of the two tight edge constraints.
        let mut expected = Vec::new();
        for s in [-1i64, 1] {
            for t in [-1i64, 1] {
                expected.push(QuotientPoint::from_ints(&[0, s, s + t]));
            }
        }
        expected.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn general_custom_metric_vertices_are_vertices() {
        let m = metric_on_three(rat_int(1), rat(9, 10), rat_int(1)).unwrap();
        let p = lipschitz_vertices_general(&m).unwrap();
        assert_eq!(p.vertices().len(), 6);
        assert!(p.vertices().iter().all(|x| p.contains(x) && p.is_vertex(x)));
        assert_eq!(p.facet_pairs().len(), 6);
    }

    #[test]
    fn general_drops_redundant_pairs() {
        // d_13 = 2 = d_12 + d_23 makes |x_1 - x_3| <= 2 redundant.
        let m = metric_on_three(rat_int(1), rat_int(2), rat_int(1)).unwrap();
        let p = lipschitz_vertices_general(&m).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facet_pairs().len(), 4);
    }

    #[test]
    fn general_size_cap() {
        let err = lipschitz_vertices_general(&discrete_metric(11).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }
}
