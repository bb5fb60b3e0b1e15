//! Pricing for the path formulation: constrained shortest paths under dual
//! edge costs, and the cache that skips calls which cannot succeed.
//!
//! A pricing problem asks for simple `u`-`v` paths with weight within the
//! pair's budget and total edge cost strictly below the cap. Costs are
//! nonnegative; weights are positive.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::graph::{dijkstra_by, DistanceMatrix, TerminalPair, WeightedGraph};
use crate::paths::{within_budget, PathColumn};

/// Unlimited number of columns per pricing call.
pub const MU_INF: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
pub struct PricingProblem<'a> {
    pub pair: TerminalPair,
    /// cost per edge id, all `>= 0`
    pub costs: &'a [f64],
    pub cost_cap: f64,
    /// maximum number of columns, [`MU_INF`] for all
    pub mu: usize,
}

/// A priced path: the column and its total edge cost.
#[derive(Debug, Clone, PartialEq)]
pub struct PricedPath {
    pub cost: f64,
    pub path: PathColumn,
}

fn path_cost(costs: &[f64], edges: &[usize]) -> f64 {
    edges.iter().map(|&e| costs[e]).sum()
}

#[derive(Clone, Copy, PartialEq)]
struct Key {
    c: f64,
    w: f64,
    /// 0 for joined paths, 1 for search labels: joins pop first on ties
    kind: u8,
    idx: u32,
}

impl Eq for Key {}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        o.c.total_cmp(&self.c)
            .then_with(|| o.w.total_cmp(&self.w))
            .then_with(|| o.kind.cmp(&self.kind))
            .then_with(|| o.idx.cmp(&self.idx))
    }
}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Label {
    node: u32,
    parent: u32,
    edge: u32,
    backward: bool,
    cost: f64,
    weight: f64,
}

struct Arena {
    labels: Vec<Label>,
}

impl Arena {
    fn on_chain(&self, mut l: u32, node: usize) -> bool {
        while l != NONE {
            let lab = &self.labels[l as usize];
            if lab.node as usize == node {
                return true;
            }
            l = lab.parent;
        }
        false
    }

    /// Edge ids from the label's root to its node.
    fn chain_edges(&self, mut l: u32) -> Vec<usize> {
        let mut out = Vec::new();
        while l != NONE {
            let lab = &self.labels[l as usize];
            if lab.parent != NONE {
                out.push(lab.edge as usize);
            }
            l = lab.parent;
        }
        out.reverse();
        out
    }

    fn dominated(&self, settled: &[u32], cost: f64, weight: f64) -> bool {
        settled.iter().any(|&s| {
            let o = &self.labels[s as usize];
            o.cost <= cost && o.weight <= weight
        })
    }
}

fn cost_distances(g: &WeightedGraph, costs: &[f64], source: usize) -> Vec<f64> {
    dijkstra_by(g, source, f64::INFINITY, |e| Some(costs[e]))
}

/// Minimum-cost path with weight within budget and cost below the cap
/// (ties by weight), found by unidirectional lexicographic label setting
/// with cost and weight lower bounds toward `v`.
pub fn basic_csp(g: &WeightedGraph, dm: &DistanceMatrix, p: &PricingProblem) -> Option<PricedPath> {
    let (u, v) = (p.pair.u, p.pair.v);
    let lbc = cost_distances(g, p.costs, v);
    let lbw = dm.row(v);
    let budget = p.pair.budget;
    if !(lbc[u] < p.cost_cap) {
        return None;
    }
    let mut arena = Arena { labels: Vec::new() };
    let mut settled: Vec<Vec<u32>> = vec![Vec::new(); g.node_count()];
    let mut heap = BinaryHeap::new();
    arena.labels.push(Label { node: u as u32, parent: NONE, edge: 0, backward: false, cost: 0.0, weight: 0.0 });
    heap.push(Key { c: lbc[u], w: lbw[u], kind: 1, idx: 0 });
    while let Some(k) = heap.pop() {
        let l = arena.labels[k.idx as usize];
        let i = l.node as usize;
        if arena.dominated(&settled[i], l.cost, l.weight) {
            continue;
        }
        settled[i].push(k.idx);
        if i == v {
            let edges = arena.chain_edges(k.idx);
            let weight = g.total_weight(&edges);
            let cost = path_cost(p.costs, &edges);
            return Some(PricedPath { cost, path: PathColumn { pair: p.pair, edges, weight } });
        }
        for &(j, e) in g.neighbors(i) {
            let c = l.cost + p.costs[e];
            let w = l.weight + g.weight(e);
            if !(c + lbc[j] < p.cost_cap) || !within_budget(g, w + lbw[j], budget) {
                continue;
            }
            if arena.on_chain(k.idx, j) || arena.dominated(&settled[j], c, w) {
                continue;
            }
            let idx = arena.labels.len() as u32;
            arena.labels.push(Label { node: j as u32, parent: k.idx, edge: e as u32, backward: false, cost: c, weight: w });
            heap.push(Key { c: c + lbc[j], w: w + lbw[j], kind: 1, idx });
        }
    }
    None
}

struct Join {
    fwd: u32,
    bwd: u32,
}

/// The first `mu` entries of the Pareto front of feasible paths, in
/// increasing cost and strictly decreasing weight.
///
/// Forward labels grow from `u`, backward labels from `v`; both sit in one
/// heap keyed lexicographically by estimated total (cost, weight), with cost
/// and weight distances to the opposite end as lower bounds. A label is only
/// extended while its weight is below half the budget; every path then has a
/// node where a forward prefix and a backward suffix meet. When a label is
/// settled it is joined with the settled opposite labels at its node, and
/// the joined paths enter the same heap keyed by their exact (cost, weight).
/// A popped joined path is emitted iff it is simple and lighter than the
/// previous emission.
pub fn bi_a_star_mu(g: &WeightedGraph, dm: &DistanceMatrix, p: &PricingProblem) -> Vec<PricedPath> {
    let mut front = Vec::new();
    if p.mu == 0 {
        return front;
    }
    let n = g.node_count();
    let (u, v) = (p.pair.u, p.pair.v);
    let budget = p.pair.budget;
    let half = budget / 2.0;
    let tol = g.tol() * (1.0 + budget);
    // lower bounds toward the far end: forward labels head to v, backward to u
    let lbc = [cost_distances(g, p.costs, v), cost_distances(g, p.costs, u)];
    let lbw = [dm.row(v), dm.row(u)];
    if !(lbc[0][u] < p.cost_cap) {
        return front;
    }
    let mut arena = Arena { labels: Vec::new() };
    let mut settled: [Vec<Vec<u32>>; 2] = [vec![Vec::new(); n], vec![Vec::new(); n]];
    let mut joins: Vec<Join> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut last_weight = f64::INFINITY;
    let mut marks = vec![0u32; n];
    let mut stamp = 0u32;

    for (d, root) in [(0usize, u), (1usize, v)] {
        let idx = arena.labels.len() as u32;
        arena.labels.push(Label { node: root as u32, parent: NONE, edge: 0, backward: d == 1, cost: 0.0, weight: 0.0 });
        heap.push(Key { c: lbc[d][root], w: lbw[d][root], kind: 1, idx });
    }

    while let Some(k) = heap.pop() {
        if !(k.c < p.cost_cap) {
            break;
        }
        if k.kind == 0 {
            if k.w >= last_weight {
                continue;
            }
            let j = &joins[k.idx as usize];
            let mut edges = arena.chain_edges(j.fwd);
            let mut tail = arena.chain_edges(j.bwd);
            tail.reverse();
            // simplicity: the forward part's nodes must not reappear in the tail
            stamp += 1;
            let mut cur = u;
            marks[cur] = stamp;
            for &e in &edges {
                cur = g.other(e, cur);
                marks[cur] = stamp;
            }
            let mut simple = true;
            for &e in &tail {
                cur = g.other(e, cur);
                if marks[cur] == stamp {
                    simple = false;
                    break;
                }
            }
            if !simple {
                continue;
            }
            edges.extend(tail);
            last_weight = k.w;
            let weight = g.total_weight(&edges);
            let cost = path_cost(p.costs, &edges);
            front.push(PricedPath { cost, path: PathColumn { pair: p.pair, edges, weight } });
            if front.len() >= p.mu {
                break;
            }
            continue;
        }
        if !(k.w < last_weight) || !within_budget(g, k.w, budget) {
            continue;
        }
        let l = arena.labels[k.idx as usize];
        let d = l.backward as usize;
        let i = l.node as usize;
        if arena.dominated(&settled[d][i], l.cost, l.weight) {
            continue;
        }
        settled[d][i].push(k.idx);
        for &o in &settled[1 - d][i] {
            let ol = &arena.labels[o as usize];
            let c = l.cost + ol.cost;
            let w = l.weight + ol.weight;
            if c < p.cost_cap && w <= budget + tol && w < last_weight {
                let (fwd, bwd) = if d == 0 { (k.idx, o) } else { (o, k.idx) };
                let idx = joins.len() as u32;
                joins.push(Join { fwd, bwd });
                heap.push(Key { c, w, kind: 0, idx });
            }
        }
        let far = if d == 0 { v } else { u };
        if i == far || !(l.weight < half) {
            continue;
        }
        for &(j, e) in g.neighbors(i) {
            let c = l.cost + p.costs[e];
            let w = l.weight + g.weight(e);
            let (ec, ew) = (c + lbc[d][j], w + lbw[d][j]);
            if !(ec < p.cost_cap) || !within_budget(g, ew, budget) || !(ew < last_weight) {
                continue;
            }
            if arena.on_chain(k.idx, j) || arena.dominated(&settled[d][j], c, w) {
                continue;
            }
            let idx = arena.labels.len() as u32;
            arena.labels.push(Label { node: j as u32, parent: k.idx, edge: e as u32, backward: d == 1, cost: c, weight: w });
            heap.push(Key { c: ec, w: ew, kind: 1, idx });
        }
    }
    front
}

/// Sparse snapshot of a pricing problem that produced no column.
#[derive(Debug, Clone, PartialEq)]
struct CacheEntry {
    /// nonzero costs by increasing edge id
    costs: Vec<(usize, f64)>,
    cap: f64,
}

/// Per-pair record of the last unsuccessful pricing problem.
#[derive(Debug, Clone, Default)]
pub struct PricingCache {
    entries: Vec<Option<CacheEntry>>,
}

impl PricingCache {
    pub fn new(pairs: usize) -> Self {
        PricingCache { entries: vec![None; pairs] }
    }

    pub fn clear(&mut self) {
        self.entries.iter_mut().for_each(|e| *e = None);
    }

    /// True when a recorded failure for `pair` proves this problem has no
    /// solution either: the cap did not grow and no edge cost dropped.
    pub fn check(&self, pair: usize, costs: &[f64], cap: f64) -> bool {
        match self.entries.get(pair).and_then(|e| e.as_ref()) {
            None => false,
            Some(entry) => cap <= entry.cap && entry.costs.iter().all(|&(e, c)| costs[e] >= c),
        }
    }

    /// Records a problem whose run returned nothing.
    pub fn store(&mut self, pair: usize, costs: &[f64], cap: f64) {
        if self.entries.len() <= pair {
            self.entries.resize(pair + 1, None);
        }
        let sparse = costs.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(e, &c)| (e, c)).collect();
        self.entries[pair] = Some(CacheEntry { costs: sparse, cap });
    }

    /// As [`PricingCache::store`] with the nonzero costs already listed.
    pub fn store_sparse(&mut self, pair: usize, mut nonzero: Vec<(usize, f64)>, cap: f64) {
        if self.entries.len() <= pair {
            self.entries.resize(pair + 1, None);
        }
        nonzero.retain(|&(_, c)| c != 0.0);
        nonzero.sort_by_key(|&(e, _)| e);
        self.entries[pair] = Some(CacheEntry { costs: nonzero, cap });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_pairs_distances, build_graph};

    /// nodes u=0, a=1, v=2; edges u-a, a-v, u-v
    fn three() -> (WeightedGraph, DistanceMatrix, Vec<f64>) {
        let g = build_graph(3, &[(0, 1, 2.0), (1, 2, 2.0), (0, 2, 3.0)]).unwrap();
        let dm = all_pairs_distances(&g).unwrap();
        (g, dm, vec![1.0, 1.0, 5.0])
    }

    fn problem<'a>(costs: &'a [f64], budget: f64, cap: f64, mu: usize) -> PricingProblem<'a> {
        PricingProblem { pair: TerminalPair { u: 0, v: 2, dist: 3.0, budget }, costs, cost_cap: cap, mu }
    }

    fn values(front: &[PricedPath]) -> Vec<(f64, f64)> {
        front.iter().map(|p| (p.cost, p.path.weight)).collect()
    }

    #[test]
    fn basic_examples() {
        let (g, dm, costs) = three();
        let r = basic_csp(&g, &dm, &problem(&costs, 4.0, 6.0, 1)).unwrap();
        assert_eq!((r.cost, r.path.weight, r.path.edges.clone()), (2.0, 4.0, vec![0, 1]));
        let r = basic_csp(&g, &dm, &problem(&costs, 3.0, 6.0, 1)).unwrap();
        assert_eq!((r.cost, r.path.weight, r.path.edges.clone()), (5.0, 3.0, vec![2]));
        assert!(basic_csp(&g, &dm, &problem(&costs, 3.0, 5.0, 1)).is_none());
    }

    #[test]
    fn bidirectional_examples() {
        let (g, dm, costs) = three();
        assert_eq!(values(&bi_a_star_mu(&g, &dm, &problem(&costs, 4.0, 6.0, 2))), vec![(2.0, 4.0), (5.0, 3.0)]);
        assert_eq!(values(&bi_a_star_mu(&g, &dm, &problem(&costs, 4.0, 6.0, 1))), vec![(2.0, 4.0)]);
        assert_eq!(values(&bi_a_star_mu(&g, &dm, &problem(&costs, 3.0, 6.0, MU_INF))), vec![(5.0, 3.0)]);
        assert!(bi_a_star_mu(&g, &dm, &problem(&costs, 3.0, 5.0, 3)).is_empty());
    }

    #[test]
    fn free_minimum_weight_path_ends_the_front() {
        let (g, dm, _) = three();
        let costs = vec![1.0, 1.0, 0.0];
        let front = bi_a_star_mu(&g, &dm, &problem(&costs, 4.0, 6.0, 3));
        assert_eq!(values(&front), vec![(0.0, 3.0)]);
    }

    #[test]
    fn cache_examples() {
        let (_, _, costs) = three();
        let mut cache = PricingCache::new(1);
        assert!(!cache.check(0, &costs, 6.0));
        cache.store(0, &costs, 6.0);
        assert!(cache.check(0, &costs, 6.0));
        assert!(!cache.check(0, &costs, 6.5));
        let lowered = vec![0.5, 1.0, 5.0];
        assert!(!cache.check(0, &lowered, 6.0));
        let mut sparse = vec![1.0, 0.0, 5.0];
        cache.store(0, &sparse, 6.0);
        sparse[1] = 2.0;
        assert!(cache.check(0, &sparse, 6.0));
    }
}
