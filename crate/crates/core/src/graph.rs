//! Undirected weighted graphs in forward-star form, Dijkstra, all-pairs
//! distances, metrication and terminal pairs.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge {index} ({u}, {v}): self-loop")]
    SelfLoop { index: usize, u: usize, v: usize },
    #[error("edge {index} ({u}, {v}): parallel to edge {first}")]
    Parallel { index: usize, u: usize, v: usize, first: usize },
    #[error("edge {index} ({u}, {v}): weight {w} is not positive and finite")]
    BadWeight { index: usize, u: usize, v: usize, w: f64 },
    #[error("edge {index} ({u}, {v}): node id out of range (n = {n})")]
    NodeOutOfRange { index: usize, u: usize, v: usize, n: usize },
    #[error("graph is disconnected: no path between {u} and {v}")]
    Disconnected { u: usize, v: usize },
    #[error("stretch factor {0} is below 1")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Immutable undirected graph. Edge ids are input positions.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    /// (neighbor, edge id), grouped by node
    star: Vec<(usize, usize)>,
    integral: bool,
}

/// Comparison tolerance for graphs whose weights are not all integers.
pub const FLOAT_TOL: f64 = 1e-9;

/// Builds a graph on nodes `0..n` from `(u, v, w)` triples.
pub fn build_graph(n: usize, edges: &[(usize, usize, f64)]) -> Result<WeightedGraph, GraphError> {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::with_capacity(edges.len());
    let mut list = Vec::with_capacity(edges.len());
    for (index, &(u, v, w)) in edges.iter().enumerate() {
        if u >= n || v >= n {
            return Err(GraphError::NodeOutOfRange { index, u, v, n });
        }
        if u == v {
            return Err(GraphError::SelfLoop { index, u, v });
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(GraphError::BadWeight { index, u, v, w });
        }
        let key = (u.min(v), u.max(v));
        if let Some(&first) = seen.get(&key) {
            return Err(GraphError::Parallel { index, u, v, first });
        }
        seen.insert(key, index);
        list.push(Edge { u, v, w });
    }
    let mut deg = vec![0usize; n + 1];
    for e in &list {
        deg[e.u] += 1;
        deg[e.v] += 1;
    }
    let mut offsets = vec![0usize; n + 1];
    for i in 0..n {
        offsets[i + 1] = offsets[i] + deg[i];
    }
    let mut fill = offsets.clone();
    let mut star = vec![(0usize, 0usize); 2 * list.len()];
    for (id, e) in list.iter().enumerate() {
        star[fill[e.u]] = (e.v, id);
        fill[e.u] += 1;
        star[fill[e.v]] = (e.u, id);
        fill[e.v] += 1;
    }
    let integral = list.iter().all(|e| e.w.fract() == 0.0 && e.w < 1e12);
    Ok(WeightedGraph { n, edges: list, offsets, star, integral })
}

impl WeightedGraph {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn weight(&self, id: usize) -> f64 {
        self.edges[id].w
    }

    /// `(neighbor, edge id)` for every edge incident to `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.star[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn other(&self, id: usize, i: usize) -> usize {
        let e = self.edges[id];
        if e.u == i {
            e.v
        } else {
            e.u
        }
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.neighbors(a).iter().find(|&&(x, _)| x == b).map(|&(_, id)| id)
    }

    /// True when every weight is an integer; comparisons are then exact.
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    /// Tolerance used for distance and budget comparisons on this graph.
    pub fn tol(&self) -> f64 {
        if self.integral {
            0.0
        } else {
            FLOAT_TOL
        }
    }

    pub fn total_weight(&self, ids: &[usize]) -> f64 {
        ids.iter().map(|&e| self.edges[e].w).sum()
    }

    pub fn edge_triples(&self) -> Vec<(usize, usize, f64)> {
        self.edges.iter().map(|e| (e.u, e.v, e.w)).collect()
    }

    /// Graph on the same nodes with only the edges in `keep` (ids renumbered
    /// in increasing original order).
    pub fn subgraph(&self, keep: &[usize]) -> WeightedGraph {
        let mut ids = keep.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let triples: Vec<(usize, usize, f64)> =
            ids.iter().map(|&id| (self.edges[id].u, self.edges[id].v, self.edges[id].w)).collect();
        build_graph(self.n, &triples).expect("subgraph of a valid graph")
    }
}

#[derive(Clone, Copy, PartialEq)]
pub(crate) struct MinKey(pub f64, pub usize);

impl Eq for MinKey {}

impl Ord for MinKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for MinKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths where `cost(edge)` returns `None` for
/// unusable edges. Labels above `limit` are not expanded.
pub fn dijkstra_by<F>(g: &WeightedGraph, source: usize, limit: f64, cost: F) -> Vec<f64>
where
    F: Fn(usize) -> Option<f64>,
{
    let mut dist = vec![f64::INFINITY; g.n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(MinKey(0.0, source));
    while let Some(MinKey(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        for &(j, e) in g.neighbors(i) {
            let Some(c) = cost(e) else { continue };
            let nd = d + c;
            if nd < dist[j] && nd <= limit {
                dist[j] = nd;
                heap.push(MinKey(nd, j));
            }
        }
    }
    dist
}

/// Shortest distances from `source` by edge weight; unreachable nodes get
/// `+inf`.
pub fn dijkstra(g: &WeightedGraph, source: usize) -> Vec<f64> {
    dijkstra_by(g, source, f64::INFINITY, |e| Some(g.edges[e].w))
}

/// Shortest distances from `source` where edges listed in `cost_override`
/// use the given cost instead of their weight.
pub fn dijkstra_override(g: &WeightedGraph, source: usize, cost_override: &HashMap<usize, f64>) -> Vec<f64> {
    dijkstra_by(g, source, f64::INFINITY, |e| Some(cost_override.get(&e).copied().unwrap_or(g.edges[e].w)))
}

/// Symmetric matrix of shortest-path distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.d[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.d[u * self.n..(u + 1) * self.n]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }
}

/// All-pairs distances by one Dijkstra per node. Fails on disconnected
/// graphs.
pub fn all_pairs_distances(g: &WeightedGraph) -> Result<DistanceMatrix, GraphError> {
    let n = g.n;
    let mut d = Vec::with_capacity(n * n);
    for s in 0..n {
        let row = dijkstra(g, s);
        if let Some(t) = row.iter().position(|x| x.is_infinite()) {
            return Err(GraphError::Disconnected { u: s.min(t), v: s.max(t) });
        }
        d.extend_from_slice(&row);
    }
    // symmetrize exactly; the two runs may differ in the last bit for floats
    for u in 0..n {
        for v in u + 1..n {
            let m = d[u * n + v].min(d[v * n + u]);
            d[u * n + v] = m;
            d[v * n + u] = m;
        }
    }
    Ok(DistanceMatrix { n, d })
}

/// Result of [`metricate`].
#[derive(Debug, Clone)]
pub struct Metricated {
    pub graph: WeightedGraph,
    /// original ids of the removed edges
    pub removed: Vec<usize>,
    /// original id of every edge of `graph`
    pub original_ids: Vec<usize>,
}

/// Removes every edge strictly longer than the distance between its
/// endpoints. Distances are unchanged.
pub fn metricate(g: &WeightedGraph) -> Result<Metricated, GraphError> {
    let dm = all_pairs_distances(g)?;
    let tol = g.tol();
    let mut removed = Vec::new();
    let mut kept = Vec::new();
    for (id, e) in g.edges.iter().enumerate() {
        if e.w > dm.get(e.u, e.v) + tol {
            removed.push(id);
        } else {
            kept.push(id);
        }
    }
    Ok(Metricated { graph: g.subgraph(&kept), removed, original_ids: kept })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    Adjacent,
    AllPairs,
}

/// A node pair whose stretch constraint is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalPair {
    pub u: usize,
    pub v: usize,
    pub dist: f64,
    pub budget: f64,
}

/// One pair per edge (`Adjacent`) or per unordered node pair, each with
/// budget `alpha * d(u, v)`. Adjacent pairs follow edge id order, all pairs
/// lexicographic order.
pub fn build_terminal_pairs(
    g: &WeightedGraph,
    dm: &DistanceMatrix,
    alpha: f64,
    mode: PairMode,
) -> Result<Vec<TerminalPair>, GraphError> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(GraphError::InvalidAlpha(alpha));
    }
    let mk = |u: usize, v: usize| {
        let (u, v) = (u.min(v), u.max(v));
        let dist = dm.get(u, v);
        TerminalPair { u, v, dist, budget: alpha * dist }
    };
    Ok(match mode {
        PairMode::Adjacent => g.edges.iter().map(|e| mk(e.u, e.v)).collect(),
        PairMode::AllPairs => {
            let mut out = Vec::new();
            for u in 0..g.n {
                for v in u + 1..g.n {
                    out.push(mk(u, v));
                }
            }
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c4() -> WeightedGraph {
        build_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap()
    }

    fn tri(w02: f64) -> WeightedGraph {
        build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, w02)]).unwrap()
    }

    #[test]
    fn build_examples() {
        let p3 = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!((0..3).map(|i| p3.degree(i)).collect::<Vec<_>>(), vec![1, 2, 1]);
        let g = c4();
        assert!((0..4).all(|i| g.degree(i) == 2));
        assert!(matches!(
            build_graph(2, &[(0, 1, 1.0), (0, 1, 2.0)]),
            Err(GraphError::Parallel { index: 1, first: 0, .. })
        ));
        assert!(matches!(build_graph(2, &[(1, 1, 1.0)]), Err(GraphError::SelfLoop { .. })));
        assert!(matches!(build_graph(2, &[(0, 1, 0.0)]), Err(GraphError::BadWeight { .. })));
        assert!(matches!(build_graph(2, &[(0, 2, 1.0)]), Err(GraphError::NodeOutOfRange { .. })));
    }

    #[test]
    fn dijkstra_examples() {
        let p3 = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(dijkstra(&p3, 0), vec![0.0, 1.0, 2.0]);
        assert_eq!(dijkstra(&c4(), 0), vec![0.0, 1.0, 2.0, 1.0]);
        assert_eq!(dijkstra(&tri(2.0), 0), vec![0.0, 1.0, 2.0]);
        let zero: HashMap<usize, f64> = (0..4).map(|e| (e, 0.0)).collect();
        assert_eq!(dijkstra_override(&c4(), 2, &zero), vec![0.0; 4]);
    }

    #[test]
    fn all_pairs_and_disconnection() {
        let dm = all_pairs_distances(&c4()).unwrap();
        assert_eq!(dm.get(0, 2), 2.0);
        assert_eq!(all_pairs_distances(&tri(2.0)).unwrap().get(0, 2), 2.0);
        let k3 = tri(1.0);
        let dm = all_pairs_distances(&k3).unwrap();
        assert!((0..3).all(|u| (0..3).all(|v| dm.get(u, v) == if u == v { 0.0 } else { 1.0 })));
        let split = build_graph(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(all_pairs_distances(&split), Err(GraphError::Disconnected { .. })));
    }

    #[test]
    fn metricate_examples() {
        let m = metricate(&tri(3.0)).unwrap();
        assert_eq!(m.removed, vec![2]);
        assert_eq!(m.graph.edge_count(), 2);
        assert!(metricate(&tri(2.0)).unwrap().removed.is_empty());
        assert!(metricate(&c4()).unwrap().removed.is_empty());
    }

    #[test]
    fn terminal_pair_examples() {
        let g = c4();
        let dm = all_pairs_distances(&g).unwrap();
        let adj = build_terminal_pairs(&g, &dm, 2.0, PairMode::Adjacent).unwrap();
        assert_eq!(adj.len(), 4);
        assert!(adj.iter().all(|p| p.budget == 2.0));
        let all = build_terminal_pairs(&g, &dm, 2.0, PairMode::AllPairs).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(all.iter().filter(|p| p.budget == 4.0).count(), 2);
        let p3 = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let dm = all_pairs_distances(&p3).unwrap();
        let b: Vec<f64> =
            build_terminal_pairs(&p3, &dm, 1.5, PairMode::Adjacent).unwrap().iter().map(|p| p.budget).collect();
        assert_eq!(b, vec![1.5, 1.5]);
        assert!(build_terminal_pairs(&p3, &dm, 0.5, PairMode::Adjacent).is_err());
    }
}
