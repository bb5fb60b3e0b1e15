//! Exhaustive reference optimum for small graphs.

use std::collections::BinaryHeap;

use thiserror::Error;

use crate::graph::{all_pairs_distances, DistanceMatrix, GraphError, MinKey, WeightedGraph};
use crate::heuristics::{basic_greedy, SpannerSolution};

/// Largest edge count [`oracle_optimum`] accepts.
pub const ORACLE_MAX_EDGES: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{edges} edges exceed the exhaustive search cap of {cap}")]
    TooLarge { edges: usize, cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

struct Search<'a> {
    g: &'a WeightedGraph,
    dm: &'a DistanceMatrix,
    alpha: f64,
    tol: f64,
    order: Vec<usize>,
    /// edge present (included or undecided)
    state: Vec<bool>,
    best_weight: f64,
    best: Vec<usize>,
}

impl Search<'_> {
    /// All pairs within stretch using the edges marked in `state`.
    fn feasible(&self) -> bool {
        let n = self.g.node_count();
        let mut dist = vec![f64::INFINITY; n];
        for s in 0..n {
            dist.iter_mut().for_each(|d| *d = f64::INFINITY);
            dist[s] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(MinKey(0.0, s));
            while let Some(MinKey(d, i)) = heap.pop() {
                if d > dist[i] {
                    continue;
                }
                for &(j, e) in self.g.neighbors(i) {
                    if self.state[e] && d + self.g.weight(e) < dist[j] {
                        dist[j] = d + self.g.weight(e);
                        heap.push(MinKey(dist[j], j));
                    }
                }
            }
            for t in s + 1..n {
                let b = self.alpha * self.dm.get(s, t);
                if dist[t] > b + self.tol * (1.0 + b) {
                    return false;
                }
            }
        }
        true
    }

    /// Decides `order[k..]`; edges not yet decided are tentatively present.
    fn go(&mut self, k: usize, weight_in: f64) {
        if weight_in >= self.best_weight - self.tol * (1.0 + self.best_weight) {
            return;
        }
        if k == self.order.len() {
            self.best_weight = weight_in;
            self.best = (0..self.g.edge_count()).filter(|&e| self.state[e]).collect();
            return;
        }
        let e = self.order[k];
        let w = self.g.weight(e);
        // leave e out first; the remaining set must stay feasible
        self.state[e] = false;
        if self.feasible() {
            self.go(k + 1, weight_in);
        }
        self.state[e] = true;
        self.go(k + 1, weight_in + w);
    }
}

/// Minimum-weight spanner with the stretch constraint on all node pairs, by
/// depth-first search over edge subsets (heaviest edges decided first) with
/// weight and feasibility pruning. The basic greedy solution seeds the
/// incumbent.
pub fn oracle_optimum(g: &WeightedGraph, alpha: f64) -> Result<SpannerSolution, OracleError> {
    if g.edge_count() > ORACLE_MAX_EDGES {
        return Err(OracleError::TooLarge { edges: g.edge_count(), cap: ORACLE_MAX_EDGES });
    }
    if !(alpha >= 1.0) {
        return Err(GraphError::InvalidAlpha(alpha).into());
    }
    let dm = all_pairs_distances(g)?;
    let greedy = basic_greedy(g, alpha);
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_by(|&a, &b| g.weight(b).total_cmp(&g.weight(a)).then(a.cmp(&b)));
    let mut s = Search {
        g,
        dm: &dm,
        alpha,
        tol: g.tol(),
        order,
        state: vec![true; g.edge_count()],
        best_weight: f64::INFINITY,
        best: Vec::new(),
    };
    s.best_weight = greedy.total_weight;
    s.best = greedy.edge_ids.clone();
    // the greedy solution is only beaten by a strictly lighter subset
    s.go(0, 0.0);
    let mut sol = SpannerSolution::new(g, s.best);
    sol.feasible_for_alpha = Some(alpha);
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn small_examples() {
        let p3 = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(oracle_optimum(&p3, 2.0).unwrap().total_weight, 2.0);
        let tri = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)]).unwrap();
        assert_eq!(oracle_optimum(&tri, 1.0).unwrap().total_weight, 2.0);
        let k3 = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(oracle_optimum(&k3, 2.0).unwrap().total_weight, 2.0);
        let c4 = build_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert_eq!(oracle_optimum(&c4, 2.0).unwrap().total_weight, 4.0);
    }
}
