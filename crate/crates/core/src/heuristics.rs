//! Basic Greedy spanner construction and spanner verification.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::graph::{all_pairs_distances, DistanceMatrix, GraphError, MinKey, PairMode, WeightedGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpannerSolution {
    pub edge_ids: Vec<usize>,
    pub total_weight: f64,
    /// stretch factor the edge set was verified for, if any
    pub feasible_for_alpha: Option<f64>,
}

impl SpannerSolution {
    pub fn new(g: &WeightedGraph, mut edge_ids: Vec<usize>) -> Self {
        edge_ids.sort_unstable();
        edge_ids.dedup();
        let total_weight = g.total_weight(&edge_ids);
        SpannerSolution { edge_ids, total_weight, feasible_for_alpha: None }
    }
}

/// Distance from `s` to `t` in the growing greedy subgraph, giving up once
/// every open label exceeds `limit`.
fn bounded_distance(adj: &[Vec<(usize, f64)>], s: usize, t: usize, limit: f64, dist: &mut [f64]) -> f64 {
    let mut touched = vec![s];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(MinKey(0.0, s));
    let mut found = f64::INFINITY;
    while let Some(MinKey(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        if i == t {
            found = d;
            break;
        }
        for &(j, w) in &adj[i] {
            let nd = d + w;
            if nd < dist[j] && nd <= limit {
                if dist[j].is_infinite() {
                    touched.push(j);
                }
                dist[j] = nd;
                heap.push(MinKey(nd, j));
            }
        }
    }
    for i in touched {
        dist[i] = f64::INFINITY;
    }
    found
}

/// Greedy spanner: scan edges by nondecreasing weight (ties by id) and keep
/// an edge iff the current subgraph has no `u`-`v` path of length at most
/// `alpha * w`.
pub fn basic_greedy(g: &WeightedGraph, alpha: f64) -> SpannerSolution {
    let n = g.node_count();
    let tol = g.tol();
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_by(|&a, &b| g.weight(a).total_cmp(&g.weight(b)).then(a.cmp(&b)));
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut dist = vec![f64::INFINITY; n];
    let mut kept = Vec::new();
    for id in order {
        let e = g.edge(id);
        let limit = alpha * e.w + tol * (1.0 + alpha * e.w);
        if bounded_distance(&adj, e.u, e.v, limit, &mut dist) > limit {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
            kept.push(id);
        }
    }
    let mut sol = SpannerSolution::new(g, kept);
    sol.feasible_for_alpha = Some(alpha);
    sol
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub feasible: bool,
    /// pair with the largest stretch, if there is any pair
    pub worst_pair: Option<(usize, usize)>,
    /// `d_H / d_G` for the worst pair; `inf` if it is disconnected in H
    pub worst_ratio: f64,
}

/// Checks `d_H(u, v) <= alpha * d_G(u, v)` for every pair in the mode.
pub fn verify_spanner(
    g: &WeightedGraph,
    alpha: f64,
    edge_ids: &[usize],
    mode: PairMode,
) -> Result<Verification, GraphError> {
    let dm = all_pairs_distances(g)?;
    Ok(verify_spanner_with(g, &dm, alpha, edge_ids, mode))
}

/// As [`verify_spanner`] with precomputed distances of `g`.
pub fn verify_spanner_with(
    g: &WeightedGraph,
    dm: &DistanceMatrix,
    alpha: f64,
    edge_ids: &[usize],
    mode: PairMode,
) -> Verification {
    let n = g.node_count();
    let tol = g.tol();
    let h = g.subgraph(edge_ids);
    let mut feasible = true;
    let mut worst_pair = None;
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut check = |u: usize, v: usize, dh: f64| {
        let dg = dm.get(u, v);
        let ratio = dh / dg;
        if dh > alpha * dg + tol * (1.0 + alpha * dg) {
            feasible = false;
        }
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_pair = Some((u, v));
        }
    };
    match mode {
        PairMode::AllPairs => {
            for u in 0..n {
                let row = crate::graph::dijkstra(&h, u);
                for v in u + 1..n {
                    check(u, v, row[v]);
                }
            }
        }
        PairMode::Adjacent => {
            let mut rows: Vec<Option<Vec<f64>>> = vec![None; n];
            for e in g.edges() {
                let (u, v) = (e.u.min(e.v), e.u.max(e.v));
                let row = rows[u].get_or_insert_with(|| crate::graph::dijkstra(&h, u));
                let dh = row[v];
                check(u, v, dh);
            }
        }
    }
    if worst_pair.is_none() {
        worst_ratio = 1.0;
    }
    Verification { feasible, worst_pair, worst_ratio }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("reference bound {0} is not positive")]
pub struct NonPositiveBound(pub f64);

/// `100 * (heuristic - reference) / reference`.
pub fn gap_percent(heuristic_weight: f64, reference_bound: f64) -> Result<f64, NonPositiveBound> {
    if !(reference_bound > 0.0) {
        return Err(NonPositiveBound(reference_bound));
    }
    Ok(100.0 * (heuristic_weight - reference_bound) / reference_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn greedy_examples() {
        let p3 = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(basic_greedy(&p3, 2.0).total_weight, 2.0);
        let tri = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)]).unwrap();
        let s = basic_greedy(&tri, 1.0);
        assert_eq!(s.edge_ids, vec![0, 1]);
        assert_eq!(s.total_weight, 2.0);
        let c4 = build_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert_eq!(basic_greedy(&c4, 2.0).total_weight, 4.0);
    }

    #[test]
    fn verify_examples() {
        let c4 = build_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let full = verify_spanner(&c4, 2.0, &[0, 1, 2, 3], PairMode::AllPairs).unwrap();
        assert!(full.feasible);
        assert_eq!(full.worst_ratio, 1.0);
        let minus = verify_spanner(&c4, 2.0, &[0, 1, 2], PairMode::Adjacent).unwrap();
        assert!(!minus.feasible);
        assert_eq!(minus.worst_ratio, 3.0);
        assert_eq!(minus.worst_pair, Some((0, 3)));
        let empty = verify_spanner(&c4, 2.0, &[], PairMode::Adjacent).unwrap();
        assert!(!empty.feasible);
        assert!(empty.worst_ratio.is_infinite());
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gap_percent(10.0, 10.0).unwrap(), 0.0);
        assert_eq!(gap_percent(11.0, 10.0).unwrap(), 10.0);
        assert!(gap_percent(1.0, 0.0).is_err());
    }
}
