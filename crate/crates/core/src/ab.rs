//! Arc-based multicommodity-flow model.
//!
//! Per terminal pair `(u, v)` and edge `{i, j}` there are two arc variables
//! `f_ij`, `f_ji`. Rows per pair: flow conservation at every node, coupling
//! `f_ij + f_ji - x_e <= 0`, one length row `sum w (f_ij + f_ji) <= budget`
//! and outflow rows `sum_j f_ij <= [i != v]`.

use std::collections::BinaryHeap;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use spanner_lp::{write_lp, LinearProgram, LpError, LpSolution, LpStatus, Sense, VarId};
use thiserror::Error;

use crate::graph::{
    all_pairs_distances, build_terminal_pairs, dijkstra_by, metricate, DistanceMatrix, GraphError, PairMode,
    TerminalPair, WeightedGraph,
};
use crate::heuristics::{basic_greedy, verify_spanner_with, SpannerSolution};
use crate::paths::{k_shortest_bounded, within_budget};
use crate::pb::{SolveResult, SolveStats, SolveStatus, INT_TOL};

#[derive(Debug, Error)]
pub enum AbError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("LP relaxation reported {0:?}")]
    UnexpectedLp(LpStatus),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbOptions {
    pub alpha: f64,
    pub pairs: PairMode,
    pub metricate: bool,
    /// omit arc variables no budget-feasible path can use
    pub fix_unreachable: bool,
    pub fix_mandatory: bool,
    /// start with the greedy spanner as incumbent
    pub bg_bound: bool,
    /// outflow right-hand side 1 at every node instead of `[i != v]`
    pub weak_outflow: bool,
}

impl AbOptions {
    pub fn new(alpha: f64) -> Self {
        AbOptions {
            alpha,
            pairs: PairMode::Adjacent,
            metricate: true,
            fix_unreachable: true,
            fix_mandatory: true,
            bg_bound: true,
            weak_outflow: false,
        }
    }

    /// The plain model without any preprocessing on the variables.
    pub fn unfixed(alpha: f64) -> Self {
        AbOptions { fix_unreachable: false, fix_mandatory: false, bg_bound: false, ..AbOptions::new(alpha) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixReason {
    Unreachable,
    Mandatory,
}

/// One fixed variable. `arc` is `None` for edge variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixRecord {
    pub pair: Option<usize>,
    pub edge: usize,
    pub arc: Option<(usize, usize)>,
    pub value: f64,
    pub reason: FixReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AbCounts {
    /// `2 |K| |E|` arc variables of the unreduced model
    pub flow_vars_total: usize,
    /// arc variables present in the LP
    pub flow_vars_created: usize,
    /// variables neither omitted nor fixed (edge and arc variables)
    pub unfixed_vars: usize,
    pub rows: usize,
    pub construction_secs: f64,
    pub fixing_secs: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ArcVar {
    pub pair: usize,
    pub edge: usize,
    pub from: usize,
    pub to: usize,
    pub var: VarId,
}

pub struct AbModel {
    pub options: AbOptions,
    pub lp: LinearProgram,
    graph: WeightedGraph,
    original_ids: Vec<usize>,
    dm: DistanceMatrix,
    pairs: Vec<TerminalPair>,
    pub x: Vec<VarId>,
    pub arcs: Vec<ArcVar>,
    pub ledger: Vec<FixRecord>,
    pub counts: AbCounts,
    incumbent: Option<SpannerSolution>,
    removed_by_metrication: usize,
}

fn tol_gt(g: &WeightedGraph, a: f64, budget: f64) -> bool {
    !within_budget(g, a, budget)
}

/// Builds the arc-based model for `g` with the given options.
pub fn build_ab_model(g: &WeightedGraph, options: AbOptions) -> Result<AbModel, AbError> {
    let start = Instant::now();
    if !(options.alpha >= 1.0) {
        return Err(GraphError::InvalidAlpha(options.alpha).into());
    }
    all_pairs_distances(g)?;
    let (graph, original_ids, removed) = if options.metricate {
        let m = metricate(g)?;
        let removed = m.removed.len();
        (m.graph, m.original_ids, removed)
    } else {
        (g.clone(), (0..g.edge_count()).collect(), 0)
    };
    let dm = all_pairs_distances(&graph)?;
    let pairs = build_terminal_pairs(&graph, &dm, options.alpha, options.pairs)?;
    let n = graph.node_count();
    let m = graph.edge_count();
    let mut lp = LinearProgram::new();
    let x = (0..m)
        .map(|e| {
            let v = lp.add_named_column(format!("x{e}"), graph.weight(e), &[], 0.0, 1.0)?;
            lp.set_integer(v, true);
            Ok(v)
        })
        .collect::<Result<Vec<_>, LpError>>()?;
    let mut ledger = Vec::new();
    let mut arcs = Vec::new();
    let mut fixing = Duration::ZERO;
    let mut x_fixed = vec![false; m];
    for (p, pair) in pairs.iter().enumerate() {
        let fix_start = Instant::now();
        let du = dm.row(pair.u);
        let dv = dm.row(pair.v);
        let reachable = |a: usize, b: usize, w: f64| !tol_gt(&graph, du[a] + w + dv[b], pair.budget);
        // mandatory orientations on one shortest path
        let mut forced: Vec<Option<(usize, usize)>> = vec![None; m];
        let mut forced_edges = Vec::new();
        if options.fix_mandatory {
            if let Some(sp) = k_shortest_bounded(&graph, &dm, pair, 1).into_iter().next() {
                let nodes = sp.nodes(&graph);
                for (k, &e) in sp.edges.iter().enumerate() {
                    let w = graph.weight(e);
                    let limit = pair.budget + graph.tol() * (1.0 + pair.budget);
                    let d = dijkstra_by(&graph, pair.u, limit, |id| if id == e { None } else { Some(graph.weight(id)) });
                    if !tol_gt(&graph, d[pair.v], pair.budget) {
                        continue;
                    }
                    forced_edges.push(e);
                    let (a, b) = (nodes[k], nodes[k + 1]);
                    if !reachable(b, a, w) {
                        forced[e] = Some((a, b));
                    }
                }
            }
        }
        fixing += fix_start.elapsed();
        for e in forced_edges {
            if !x_fixed[e] {
                x_fixed[e] = true;
                lp.set_bounds(x[e], 1.0, 1.0)?;
                ledger.push(FixRecord { pair: Some(p), edge: e, arc: None, value: 1.0, reason: FixReason::Mandatory });
            }
        }
        for e in 0..m {
            let ed = graph.edge(e);
            for (a, b) in [(ed.u, ed.v), (ed.v, ed.u)] {
                let reach = reachable(a, b, ed.w);
                if options.fix_unreachable && !reach {
                    ledger.push(FixRecord {
                        pair: Some(p),
                        edge: e,
                        arc: Some((a, b)),
                        value: 0.0,
                        reason: FixReason::Unreachable,
                    });
                    continue;
                }
                let (lo, hi) = match forced[e] {
                    Some(dir) if dir == (a, b) => (1.0, 1.0),
                    Some(_) if options.fix_unreachable => unreachable!("reverse of a forced arc is unreachable"),
                    Some(_) => (0.0, 0.0),
                    None => (0.0, 1.0),
                };
                if forced[e].is_some() {
                    ledger.push(FixRecord { pair: Some(p), edge: e, arc: Some((a, b)), value: lo, reason: FixReason::Mandatory });
                }
                let var = lp.add_named_column(format!("f{p}_{a}_{b}"), 0.0, &[], lo, hi)?;
                lp.set_integer(var, true);
                arcs.push(ArcVar { pair: p, edge: e, from: a, to: b, var });
            }
        }
    }
    // rows, grouped per pair
    let mut by_pair: Vec<Vec<usize>> = vec![Vec::new(); pairs.len()];
    for (k, a) in arcs.iter().enumerate() {
        by_pair[a.pair].push(k);
    }
    for (p, pair) in pairs.iter().enumerate() {
        let mut kirch: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n];
        let mut outflow: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n];
        let mut coupling: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); m];
        let mut length = Vec::new();
        for &k in &by_pair[p] {
            let a = arcs[k];
            kirch[a.from].push((a.var, 1.0));
            kirch[a.to].push((a.var, -1.0));
            outflow[a.from].push((a.var, 1.0));
            coupling[a.edge].push((a.var, 1.0));
            length.push((a.var, graph.weight(a.edge)));
        }
        for (i, row) in kirch.into_iter().enumerate() {
            let rhs = if i == pair.u {
                1.0
            } else if i == pair.v {
                -1.0
            } else {
                0.0
            };
            if !row.is_empty() || rhs != 0.0 {
                lp.add_named_row(format!("kirch{p}_{i}"), &row, Sense::Eq, rhs)?;
            }
        }
        for (e, mut row) in coupling.into_iter().enumerate() {
            if !row.is_empty() {
                row.push((x[e], -1.0));
                lp.add_named_row(format!("arc{p}_{e}"), &row, Sense::Le, 0.0)?;
            }
        }
        if !length.is_empty() {
            lp.add_named_row(format!("stretch{p}"), &length, Sense::Le, pair.budget)?;
        }
        for (i, row) in outflow.into_iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let rhs = if options.weak_outflow || i != pair.v { 1.0 } else { 0.0 };
            lp.add_named_row(format!("out{p}_{i}"), &row, Sense::Le, rhs)?;
        }
    }
    let incumbent = options.bg_bound.then(|| basic_greedy(&graph, options.alpha));
    let unfixed_x = (0..m).filter(|&e| !x_fixed[e]).count();
    let unfixed_f = arcs.iter().filter(|a| lp.bounds(a.var).0 < lp.bounds(a.var).1).count();
    let counts = AbCounts {
        flow_vars_total: 2 * pairs.len() * m,
        flow_vars_created: arcs.len(),
        unfixed_vars: unfixed_x + unfixed_f,
        rows: lp.num_rows(),
        construction_secs: (start.elapsed() - fixing).as_secs_f64(),
        fixing_secs: fixing.as_secs_f64(),
    };
    Ok(AbModel {
        options,
        lp,
        graph,
        original_ids,
        dm,
        pairs,
        x,
        arcs,
        ledger,
        counts,
        incumbent,
        removed_by_metrication: removed,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AbLimits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
}

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    fixes: Vec<(VarId, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == std::cmp::Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.bound.total_cmp(&self.bound).then(self.depth.cmp(&o.depth)).then(o.id.cmp(&self.id))
    }
}

impl AbModel {
    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn pairs(&self) -> &[TerminalPair] {
        &self.pairs
    }

    fn solve_lp(&mut self, stats: &mut SolveStats) -> Result<LpSolution, AbError> {
        let before = self.lp.total_pivots();
        let sol = self.lp.solve()?;
        stats.lp_pivots += self.lp.total_pivots() - before;
        Ok(sol)
    }

    /// Value of the LP relaxation under the model's current bounds.
    pub fn solve_root(&mut self) -> Result<f64, AbError> {
        let sol = self.lp.solve()?;
        match sol.status {
            LpStatus::Optimal => Ok(sol.objective),
            s => Err(AbError::UnexpectedLp(s)),
        }
    }

    /// Fixed-variable ledger as JSON.
    pub fn ledger_json(&self) -> serde_json::Value {
        serde_json::json!({
            "counts": self.counts,
            "fixed": self.ledger,
        })
    }

    /// Writes the model in LP format.
    pub fn export_lp(&self, path: &Path) -> Result<(), AbError> {
        let mut header = vec![
            "arc-based spanner model".to_string(),
            format!("alpha {} pairs {:?} metricate {}", self.options.alpha, self.options.pairs, self.options.metricate),
            format!("nodes {} edges {} terminal pairs {}", self.graph.node_count(), self.graph.edge_count(), self.pairs.len()),
        ];
        if self.removed_by_metrication > 0 {
            let ids: Vec<String> = self.original_ids.iter().map(|i| i.to_string()).collect();
            header.push(format!("input edge id of x0, x1, ...: {}", ids.join(" ")));
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_lp(&self.lp, &header, &mut f)?;
        f.flush()?;
        Ok(())
    }

    fn prunable(&self, bound: f64, incumbent: Option<f64>) -> bool {
        match incumbent {
            None => false,
            Some(inc) if self.graph.is_integral() => (bound - INT_TOL).ceil() >= inc - 0.5,
            Some(inc) => bound >= inc - INT_TOL,
        }
    }

    /// Branch-and-bound over the LP relaxation: fractional edge variables
    /// first, then fractional arc variables.
    pub fn solve(mut self, limits: AbLimits) -> Result<SolveResult, AbError> {
        let start = Instant::now();
        let m = self.graph.edge_count();
        let mut stats = SolveStats { removed_by_metrication: self.removed_by_metrication, ..Default::default() };
        stats.fixed_edges = self.ledger.iter().filter(|r| r.arc.is_none()).count();
        self.lp.set_deadline(limits.time_limit.map(|t| start + t));
        let root_bounds: Vec<(f64, f64)> = (0..self.lp.num_vars()).map(|j| self.lp.bounds(VarId(j))).collect();
        let mut best: Option<(f64, Vec<usize>)> = self.incumbent.as_ref().map(|s| (s.total_weight, s.edge_ids.clone()));
        let mut open = BinaryHeap::new();
        open.push(Node { bound: f64::NEG_INFINITY, depth: 0, id: 0, fixes: Vec::new() });
        let mut next_id = 1;
        let mut limit_hit = false;
        let mut limit_bound = f64::INFINITY;
        let mut touched: Vec<VarId> = Vec::new();
        while let Some(node) = open.pop() {
            if self.prunable(node.bound, best.as_ref().map(|b| b.0)) {
                continue;
            }
            if limits.time_limit.is_some_and(|t| start.elapsed() >= t)
                || limits.node_limit.is_some_and(|l| stats.nodes >= l)
            {
                limit_bound = node.bound;
                limit_hit = true;
                break;
            }
            stats.nodes += 1;
            for v in touched.drain(..) {
                let (lo, hi) = root_bounds[v.0];
                self.lp.set_bounds(v, lo, hi)?;
            }
            for &(v, val) in &node.fixes {
                self.lp.set_bounds(v, val, val)?;
                touched.push(v);
            }
            let sol = match self.solve_lp(&mut stats) {
                Err(AbError::Lp(LpError::TimeLimit(_))) => {
                    limit_bound = node.bound;
                    limit_hit = true;
                    break;
                }
                r => r?,
            };
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => continue,
                s => return Err(AbError::UnexpectedLp(s)),
            }
            if stats.root_lp.is_none() {
                stats.root_lp = Some(sol.objective);
            }
            let z = sol.objective.max(node.bound);
            if self.prunable(z, best.as_ref().map(|b| b.0)) {
                continue;
            }
            let xs: Vec<f64> = self.x.iter().map(|v| sol.primal[v.0]).collect();
            let mut pick: Option<(VarId, f64, f64)> = None;
            for (e, &xe) in xs.iter().enumerate() {
                if (xe - xe.round()).abs() <= INT_TOL {
                    continue;
                }
                let score = (xe - 0.5).abs();
                let w = self.graph.weight(e);
                let better = pick.map_or(true, |(_, bs, bw)| score < bs - 1e-12 || (score <= bs + 1e-12 && w > bw));
                if better {
                    pick = Some((self.x[e], score, w));
                }
            }
            let h: Vec<usize> = (0..m).filter(|&e| xs[e] >= 1.0 - INT_TOL).collect();
            if pick.is_none() {
                let check = verify_spanner_with(&self.graph, &self.dm, self.options.alpha, &h, PairMode::AllPairs);
                if check.feasible {
                    let w = self.graph.total_weight(&h);
                    if best.as_ref().map_or(true, |b| w < b.0 - 1e-9) {
                        best = Some((w, h));
                    }
                    continue;
                }
                for a in &self.arcs {
                    let f = sol.primal[a.var.0];
                    if (f - f.round()).abs() > INT_TOL {
                        let score = (f - 0.5).abs();
                        if pick.map_or(true, |(_, bs, _)| score < bs - 1e-12) {
                            pick = Some((a.var, score, 0.0));
                        }
                    }
                }
            }
            let Some((var, _, _)) = pick else {
                // integral flows always describe feasible paths
                debug_assert!(false, "integral arc solution failed verification");
                continue;
            };
            for val in [0.0, 1.0] {
                let mut fixes = node.fixes.clone();
                fixes.push((var, val));
                open.push(Node { bound: z, depth: node.depth + 1, id: next_id, fixes });
                next_id += 1;
            }
        }
        let open_bound = open.iter().map(|n| n.bound).fold(limit_bound, f64::min);
        stats.wall_secs = start.elapsed().as_secs_f64();
        let best = best.map(|(w, h)| {
            let mut ids: Vec<usize> = h.iter().map(|&e| self.original_ids[e]).collect();
            ids.sort_unstable();
            SpannerSolution { edge_ids: ids, total_weight: w, feasible_for_alpha: Some(self.options.alpha) }
        });
        let primal = best.as_ref().map_or(f64::INFINITY, |b| b.total_weight);
        let (status, dual) = if limit_hit {
            let d = if open_bound.is_finite() { open_bound } else { stats.root_lp.unwrap_or(0.0) };
            (SolveStatus::BoundOnly, d.min(primal))
        } else if best.is_none() {
            (SolveStatus::Infeasible, f64::INFINITY)
        } else {
            (SolveStatus::Optimal, primal)
        };
        Ok(SolveResult { best, primal_bound: primal, dual_bound: dual, status, stats })
    }
}

/// Builds and solves the arc-based model.
pub fn solve_ab(g: &WeightedGraph, options: AbOptions, limits: AbLimits) -> Result<SolveResult, AbError> {
    build_ab_model(g, options)?.solve(limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn c4() -> WeightedGraph {
        build_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap()
    }

    #[test]
    fn c4_gap_closes_with_unreachable_fixing() {
        let mut plain = build_ab_model(&c4(), AbOptions::unfixed(2.0)).unwrap();
        assert_eq!(plain.counts.flow_vars_created, 32);
        assert_eq!(plain.lp.num_vars(), 36);
        assert!((plain.solve_root().unwrap() - 2.0).abs() < 1e-9);
        let opts = AbOptions { fix_unreachable: true, ..AbOptions::unfixed(2.0) };
        let mut fixed = build_ab_model(&c4(), opts).unwrap();
        assert!((fixed.solve_root().unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn small_optima() {
        let p3 = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let tri = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)]).unwrap();
        for opts in [AbOptions::new(1.0), AbOptions::unfixed(1.0)] {
            assert_eq!(solve_ab(&tri, opts, AbLimits::default()).unwrap().primal_bound, 2.0);
        }
        let r = solve_ab(&p3, AbOptions::unfixed(2.0), AbLimits::default()).unwrap();
        assert_eq!((r.status, r.primal_bound), (SolveStatus::Optimal, 2.0));
        let r = solve_ab(&c4(), AbOptions::unfixed(2.0), AbLimits::default()).unwrap();
        assert_eq!(r.primal_bound, 4.0);
    }

    #[test]
    fn mandatory_fixing_on_c4() {
        let m = build_ab_model(&c4(), AbOptions::new(2.0)).unwrap();
        assert_eq!(m.ledger.iter().filter(|r| r.arc.is_none()).count(), 4);
        assert_eq!(m.counts.unfixed_vars, 0);
    }
}
