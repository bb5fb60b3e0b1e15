#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spanner_core::graph::{build_graph, WeightedGraph};

/// Connected random graph: a random spanning tree plus extra edges with
/// probability `p`. Weights are drawn by `weight`.
pub fn random_connected(n: usize, p: f64, seed: u64, weight: &mut dyn FnMut(&mut ChaCha8Rng) -> f64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for v in 1..n {
        let u = rng.gen_range(0..v);
        present[u][v] = true;
        edges.push((u, v, weight(&mut rng)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u][v] && rng.gen_bool(p) {
                present[u][v] = true;
                edges.push((u, v, weight(&mut rng)));
            }
        }
    }
    build_graph(n, &edges).unwrap()
}

/// Every simple u-v path as (edge sequence, weight, cost), by plain DFS
/// without any pruning.
pub fn all_simple_paths(g: &WeightedGraph, u: usize, v: usize, costs: &[f64]) -> Vec<(Vec<usize>, f64, f64)> {
    fn go(
        g: &WeightedGraph,
        at: usize,
        v: usize,
        costs: &[f64],
        seen: &mut Vec<bool>,
        edges: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, f64, f64)>,
    ) {
        if at == v {
            let w = edges.iter().map(|&e| g.weight(e)).sum();
            let c = edges.iter().map(|&e| costs[e]).sum();
            out.push((edges.clone(), w, c));
            return;
        }
        for &(j, e) in g.neighbors(at) {
            if !seen[j] {
                seen[j] = true;
                edges.push(e);
                go(g, j, v, costs, seen, edges, out);
                edges.pop();
                seen[j] = false;
            }
        }
    }
    let mut seen = vec![false; g.node_count()];
    seen[u] = true;
    let mut out = Vec::new();
    go(g, u, v, costs, &mut seen, &mut Vec::new(), &mut out);
    out
}

/// Pareto front of (cost, weight) over feasible simple paths, cost ascending.
pub fn pareto_front(g: &WeightedGraph, u: usize, v: usize, costs: &[f64], budget: f64, cap: f64) -> Vec<(f64, f64)> {
    let mut feas: Vec<(f64, f64)> = all_simple_paths(g, u, v, costs)
        .into_iter()
        .filter(|(_, w, c)| *w <= budget + 1e-9 && *c < cap)
        .map(|(_, w, c)| (c, w))
        .collect();
    feas.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut front: Vec<(f64, f64)> = Vec::new();
    for (c, w) in feas {
        if front.last().map_or(true, |&(_, lw)| w < lw) {
            front.push((c, w));
        }
    }
    front
}

/// Exhaustive minimum spanner weight over all edge subsets (independent of
/// the library oracle).
pub fn subset_optimum(g: &WeightedGraph, alpha: f64) -> f64 {
    let m = g.edge_count();
    assert!(m <= 22);
    let n = g.node_count();
    let full = floyd(g, (1u64 << m) - 1);
    let mut best = f64::INFINITY;
    for mask in 0u64..(1u64 << m) {
        let w: f64 = (0..m).filter(|&e| mask >> e & 1 == 1).map(|e| g.weight(e)).sum();
        if w >= best {
            continue;
        }
        let d = floyd(g, mask);
        let ok = (0..n).all(|a| (0..n).all(|b| d[a][b] <= alpha * full[a][b] + 1e-9 * (1.0 + full[a][b])));
        if ok {
            best = w;
        }
    }
    best
}

fn floyd(g: &WeightedGraph, mask: u64) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (id, e) in g.edges().iter().enumerate() {
        if mask >> id & 1 == 1 {
            d[e.u][e.v] = d[e.u][e.v].min(e.w);
            d[e.v][e.u] = d[e.v][e.u].min(e.w);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}
