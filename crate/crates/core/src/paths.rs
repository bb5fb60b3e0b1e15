//! Budget-bounded simple paths: k shortest via A*, exhaustive enumeration,
//! and uniqueness detection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DistanceMatrix, TerminalPair, WeightedGraph};

/// Default cap on the number of paths [`enumerate_all_bounded`] may emit.
pub const ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("more than {cap} bounded paths between {u} and {v}")]
    Overflow { u: usize, v: usize, cap: usize },
}

/// A simple `u`-`v` path stored as the edge ids traversed from `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathColumn {
    pub pair: TerminalPair,
    pub edges: Vec<usize>,
    pub weight: f64,
}

impl PathColumn {
    /// Node sequence from `pair.u` to `pair.v`.
    pub fn nodes(&self, g: &WeightedGraph) -> Vec<usize> {
        let mut out = vec![self.pair.u];
        let mut cur = self.pair.u;
        for &e in &self.edges {
            cur = g.other(e, cur);
            out.push(cur);
        }
        out
    }

    /// Checks endpoints, simplicity and budget.
    pub fn is_valid(&self, g: &WeightedGraph) -> bool {
        let nodes = self.nodes(g);
        let mut seen = vec![false; g.node_count()];
        for (k, &e) in self.edges.iter().enumerate() {
            let ed = g.edge(e);
            let (a, b) = (nodes[k], nodes[k + 1]);
            if !((ed.u == a && ed.v == b) || (ed.u == b && ed.v == a)) {
                return false;
            }
        }
        for &i in &nodes {
            if seen[i] {
                return false;
            }
            seen[i] = true;
        }
        let w = g.total_weight(&self.edges);
        nodes.last() == Some(&self.pair.v)
            && (w - self.weight).abs() <= 1e-9 * (1.0 + w)
            && within_budget(g, w, self.pair.budget)
    }
}

/// `weight <= budget` with the graph's comparison tolerance.
pub fn within_budget(g: &WeightedGraph, weight: f64, budget: f64) -> bool {
    weight <= budget + g.tol() * (1.0 + budget.abs())
}

/// Orders paths by weight, then lexicographic edge sequence.
pub fn path_order(a: &PathColumn, b: &PathColumn) -> Ordering {
    a.weight.total_cmp(&b.weight).then_with(|| a.edges.cmp(&b.edges))
}

struct Partial {
    f: f64,
    g: f64,
    node: usize,
    edges: Vec<usize>,
    visited: Vec<u64>,
}

impl PartialEq for Partial {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Partial {}
impl PartialOrd for Partial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Partial {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (f, edge sequence)
        other.f.total_cmp(&self.f).then_with(|| other.edges.cmp(&self.edges))
    }
}

fn has(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

/// The `k` shortest simple paths of `pair` with weight within budget that
/// only use edges accepted by `allowed`, sorted by [`path_order`].
///
/// A* over partial simple paths with `f = g + d_G(i, v)`. Partial paths whose
/// `f` exceeds the budget are discarded. The search continues until the open
/// set cannot contain a path of weight at most the `k`-th found one, so ties
/// are resolved by edge sequence exactly.
pub fn k_shortest_filtered(
    g: &WeightedGraph,
    dm: &DistanceMatrix,
    pair: &TerminalPair,
    k: usize,
    allowed: &dyn Fn(usize) -> bool,
) -> Vec<PathColumn> {
    let mut found: Vec<PathColumn> = Vec::new();
    if k == 0 {
        return found;
    }
    let target = pair.v;
    let h = dm.row(target);
    let words = g.node_count().div_ceil(64);
    let mut start_bits = vec![0u64; words];
    start_bits[pair.u / 64] |= 1 << (pair.u % 64);
    let mut heap = BinaryHeap::new();
    heap.push(Partial { f: h[pair.u], g: 0.0, node: pair.u, edges: Vec::new(), visited: start_bits });
    let mut kth = f64::INFINITY;
    while let Some(p) = heap.pop() {
        if found.len() >= k && p.f > kth {
            break;
        }
        if p.node == target {
            found.push(PathColumn { pair: *pair, edges: p.edges, weight: p.g });
            if found.len() >= k {
                found.sort_by(path_order);
                kth = found[k - 1].weight;
            }
            continue;
        }
        for &(j, e) in g.neighbors(p.node) {
            if has(&p.visited, j) || !allowed(e) {
                continue;
            }
            let ng = p.g + g.weight(e);
            let f = ng + h[j];
            if !within_budget(g, f, pair.budget) || (found.len() >= k && f > kth) {
                continue;
            }
            let mut edges = p.edges.clone();
            edges.push(e);
            let mut visited = p.visited.clone();
            visited[j / 64] |= 1 << (j % 64);
            heap.push(Partial { f, g: ng, node: j, edges, visited });
        }
    }
    found.sort_by(path_order);
    found.truncate(k);
    found
}

/// The `k` shortest simple paths of `pair` within budget.
pub fn k_shortest_bounded(g: &WeightedGraph, dm: &DistanceMatrix, pair: &TerminalPair, k: usize) -> Vec<PathColumn> {
    k_shortest_filtered(g, dm, pair, k, &|_| true)
}

/// Every simple path of `pair` within budget, sorted by [`path_order`].
pub fn enumerate_all_bounded(
    g: &WeightedGraph,
    dm: &DistanceMatrix,
    pair: &TerminalPair,
    cap: usize,
) -> Result<Vec<PathColumn>, PathError> {
    let mut out = Vec::new();
    let mut on_path = vec![false; g.node_count()];
    let mut edges = Vec::new();
    on_path[pair.u] = true;
    let h = dm.row(pair.v);
    fn dfs(
        g: &WeightedGraph,
        h: &[f64],
        pair: &TerminalPair,
        cap: usize,
        node: usize,
        w: f64,
        on_path: &mut [bool],
        edges: &mut Vec<usize>,
        out: &mut Vec<PathColumn>,
    ) -> Result<(), PathError> {
        if node == pair.v {
            if out.len() >= cap {
                return Err(PathError::Overflow { u: pair.u, v: pair.v, cap });
            }
            out.push(PathColumn { pair: *pair, edges: edges.clone(), weight: w });
            return Ok(());
        }
        for &(j, e) in g.neighbors(node) {
            if on_path[j] {
                continue;
            }
            let nw = w + g.weight(e);
            if !within_budget(g, nw + h[j], pair.budget) {
                continue;
            }
            on_path[j] = true;
            edges.push(e);
            let r = dfs(g, h, pair, cap, j, nw, on_path, edges, out);
            edges.pop();
            on_path[j] = false;
            r?;
        }
        Ok(())
    }
    dfs(g, h, pair, cap, pair.u, 0.0, &mut on_path, &mut edges, &mut out)?;
    out.sort_by(path_order);
    Ok(out)
}

/// The only budget-feasible path of `pair`, if it is unique.
pub fn unique_path_detect(g: &WeightedGraph, dm: &DistanceMatrix, pair: &TerminalPair) -> Option<PathColumn> {
    let mut two = k_shortest_bounded(g, dm, pair, 2);
    if two.len() == 1 {
        two.pop()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_pairs_distances, build_graph};

    fn pair(dm: &DistanceMatrix, u: usize, v: usize, alpha: f64) -> TerminalPair {
        TerminalPair { u, v, dist: dm.get(u, v), budget: alpha * dm.get(u, v) }
    }

    #[test]
    fn triangle_two_paths() {
        let g = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)]).unwrap();
        let dm = all_pairs_distances(&g).unwrap();
        let ps = k_shortest_bounded(&g, &dm, &pair(&dm, 0, 2, 1.0), 2);
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].edges, vec![0, 1]);
        assert_eq!(ps[1].edges, vec![2]);
        assert!(ps.iter().all(|p| p.weight == 2.0 && p.is_valid(&g)));
    }

    #[test]
    fn c4_examples() {
        let g = build_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let dm = all_pairs_distances(&g).unwrap();
        let adj = pair(&dm, 0, 1, 2.0);
        assert_eq!(k_shortest_bounded(&g, &dm, &adj, 5).len(), 1);
        assert_eq!(enumerate_all_bounded(&g, &dm, &adj, ENUMERATION_CAP).unwrap().len(), 1);
        assert_eq!(unique_path_detect(&g, &dm, &adj).unwrap().edges, vec![0]);
        let diag = enumerate_all_bounded(&g, &dm, &pair(&dm, 0, 2, 2.0), ENUMERATION_CAP).unwrap();
        assert_eq!(diag.len(), 2);
        assert!(diag.iter().all(|p| p.weight == 2.0));
        assert!(matches!(
            enumerate_all_bounded(&g, &dm, &pair(&dm, 0, 2, 2.0), 1),
            Err(PathError::Overflow { cap: 1, .. })
        ));
    }

    #[test]
    fn k3_and_p3() {
        let k3 = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let dm = all_pairs_distances(&k3).unwrap();
        assert_eq!(enumerate_all_bounded(&k3, &dm, &pair(&dm, 0, 1, 2.0), 100).unwrap().len(), 2);
        assert!(unique_path_detect(&k3, &dm, &pair(&dm, 0, 1, 2.0)).is_none());
        let p3 = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let dm = all_pairs_distances(&p3).unwrap();
        assert_eq!(k_shortest_bounded(&p3, &dm, &pair(&dm, 0, 1, 5.0), 3).len(), 1);
        assert_eq!(unique_path_detect(&p3, &dm, &pair(&dm, 0, 1, 5.0)).unwrap().edges, vec![0]);
    }
}
