//! Path-based branch-and-price.
//!
//! Master LP over edge variables `x_e in [0, 1]` (cost `w_e`) and path
//! variables `y_P >= 0` (cost 0), one row per terminal pair
//! `sum_{P in P'_uv} y_P >= 1` and one row per (edge, pair) with at least one
//! column, `sum_{P ∋ e} y_P - x_e <= 0`. With `sigma` the dual of a pair row
//! and `pi = -dual` of an edge row, a path is an improving column iff
//! `sum_{e in P} pi_e < sigma`.

use std::collections::{BinaryHeap, HashMap, HashSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use spanner_lp::{LinearProgram, LpError, LpSolution, LpStatus, RowId, Sense, VarId};
use thiserror::Error;

use crate::graph::{
    all_pairs_distances, build_terminal_pairs, metricate, DistanceMatrix, GraphError, PairMode, TerminalPair,
    WeightedGraph,
};
use crate::heuristics::{basic_greedy, verify_spanner_with, SpannerSolution};
use crate::paths::{
    enumerate_all_bounded, k_shortest_bounded, k_shortest_filtered, unique_path_detect, PathColumn, PathError,
    ENUMERATION_CAP,
};
use crate::pricing::{basic_csp, bi_a_star_mu, PricingCache, PricingProblem};

/// Integrality tolerance for edge variables.
pub const INT_TOL: f64 = 1e-6;
/// Columns must beat the pair dual by this margin.
const PRICE_EPS: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum PbError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("column generation did not converge within {0} iterations")]
    IterationCap(usize),
    #[error("master LP reported {0:?}")]
    UnexpectedLp(LpStatus),
    #[error("time limit reached")]
    TimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// one shortest path per pair
    Ksp1,
    /// k shortest paths per pair plus a shortest path inside the greedy spanner
    KspBg,
    /// every budget-feasible path
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pricer {
    Basic,
    BiAStar,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PbConfig {
    pub alpha: f64,
    pub pairs: PairMode,
    pub init: InitStrategy,
    pub k: usize,
    /// columns per pricing call, `usize::MAX` for all
    pub mu: usize,
    pub pricer: Pricer,
    pub metricate: bool,
    pub fix_mandatory: bool,
    pub prune: bool,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub max_cg_iterations: usize,
    /// re-run every pruned pricing call and count the ones that find columns
    pub audit_pruning: bool,
}

impl PbConfig {
    pub fn new(alpha: f64) -> Self {
        PbConfig {
            alpha,
            pairs: PairMode::Adjacent,
            init: InitStrategy::KspBg,
            k: 10,
            mu: 3,
            pricer: Pricer::BiAStar,
            metricate: true,
            fix_mandatory: true,
            prune: true,
            time_limit: None,
            node_limit: None,
            max_cg_iterations: 100_000,
            audit_pruning: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    BoundOnly,
    Infeasible,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub initial_columns: usize,
    /// columns added by pricing
    pub columns: usize,
    pub pricing_calls: usize,
    pub pruned_calls: usize,
    /// priced columns with zero dual cost
    pub free_paths: usize,
    /// pruned calls that found a column when forced to run (audit mode)
    pub pruning_violations: usize,
    pub nodes: usize,
    pub root_lp: Option<f64>,
    pub fixed_edges: usize,
    pub removed_by_metrication: usize,
    pub lp_pivots: usize,
    pub wall_secs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    /// best spanner found, in the input graph's edge ids
    pub best: Option<SpannerSolution>,
    pub primal_bound: f64,
    pub dual_bound: f64,
    pub status: SolveStatus,
    pub stats: SolveStats,
}

/// Pair and edge duals of the master LP.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DualSolution {
    pub sigma: Vec<f64>,
    /// per pair, `(edge, pi)` for the pair's edge rows
    pub pi: Vec<Vec<(usize, f64)>>,
}

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    zero: Vec<usize>,
    one: Vec<usize>,
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
    // best bound first, then deeper, then older
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.bound.total_cmp(&self.bound).then(self.depth.cmp(&o.depth)).then(o.id.cmp(&self.id))
    }
}

/// Solver state: the working graph (after optional metrication), pairs and
/// the restricted master problem.
pub struct PbSolver {
    pub config: PbConfig,
    graph: WeightedGraph,
    /// input-graph id of every working-graph edge
    original_ids: Vec<usize>,
    input_edges: usize,
    dm: DistanceMatrix,
    pairs: Vec<TerminalPair>,
    lp: LinearProgram,
    x: Vec<VarId>,
    pair_rows: Vec<RowId>,
    edge_rows: Vec<HashMap<usize, RowId>>,
    columns: Vec<Vec<(VarId, PathColumn)>>,
    known: Vec<HashSet<Vec<usize>>>,
    /// pairs whose only feasible path is already a column
    unique: Vec<bool>,
    mandatory: Vec<bool>,
    cache: PricingCache,
    costs: Vec<f64>,
    incumbent: Option<(f64, Vec<usize>)>,
    stats: SolveStats,
    start: Instant,
}

impl PbSolver {
    /// Preprocesses `g` and builds the initial master problem.
    pub fn new(g: &WeightedGraph, config: PbConfig) -> Result<Self, PbError> {
        let start = Instant::now();
        all_pairs_distances(g)?;
        if !(config.alpha >= 1.0) {
            return Err(GraphError::InvalidAlpha(config.alpha).into());
        }
        let (graph, original_ids, removed) = if config.metricate {
            let m = metricate(g)?;
            let removed = m.removed.len();
            (m.graph, m.original_ids, removed)
        } else {
            (g.clone(), (0..g.edge_count()).collect(), 0)
        };
        let dm = all_pairs_distances(&graph)?;
        let pairs = build_terminal_pairs(&graph, &dm, config.alpha, config.pairs)?;
        let np = pairs.len();
        let mut lp = LinearProgram::new();
        let x = (0..graph.edge_count())
            .map(|e| lp.add_named_column(format!("x{e}"), graph.weight(e), &[], 0.0, 1.0))
            .collect::<Result<Vec<_>, _>>()?;
        let pair_rows = (0..np)
            .map(|p| lp.add_named_row(format!("path{p}"), &[], Sense::Ge, 1.0))
            .collect::<Result<Vec<_>, _>>()?;
        let mut s = PbSolver {
            costs: vec![0.0; graph.edge_count()],
            config,
            input_edges: g.edge_count(),
            graph,
            original_ids,
            dm,
            pairs,
            lp,
            x,
            pair_rows,
            edge_rows: vec![HashMap::new(); np],
            columns: vec![Vec::new(); np],
            known: vec![HashSet::new(); np],
            unique: vec![false; np],
            mandatory: vec![false; 0],
            cache: PricingCache::new(np),
            incumbent: None,
            stats: SolveStats { removed_by_metrication: removed, ..Default::default() },
            start,
        };
        s.mandatory = vec![false; s.graph.edge_count()];
        if let Some(t) = s.config.time_limit {
            s.lp.set_deadline(Some(start + t));
        }
        s.initialize()?;
        if s.config.fix_mandatory {
            s.fix_mandatory()?;
        }
        Ok(s)
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.dm
    }

    pub fn pairs(&self) -> &[TerminalPair] {
        &self.pairs
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn num_columns(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    /// Incumbent weight, if any.
    pub fn incumbent_weight(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|i| i.0)
    }

    fn initialize(&mut self) -> Result<(), PbError> {
        let np = self.pairs.len();
        let mut seeded: Vec<Vec<PathColumn>> = Vec::with_capacity(np);
        let mut uniqueness_known = false;
        match self.config.init {
            InitStrategy::Ksp1 => {
                for p in &self.pairs {
                    seeded.push(k_shortest_bounded(&self.graph, &self.dm, p, 1));
                }
            }
            InitStrategy::KspBg => {
                let k = self.config.k.max(1);
                uniqueness_known = k >= 2;
                let bg = basic_greedy(&self.graph, self.config.alpha);
                let mut in_h = vec![false; self.graph.edge_count()];
                for &e in &bg.edge_ids {
                    in_h[e] = true;
                }
                for p in &self.pairs {
                    let mut cols = k_shortest_bounded(&self.graph, &self.dm, p, k);
                    if !uniqueness_known || cols.len() != 1 {
                        cols.extend(k_shortest_filtered(&self.graph, &self.dm, p, 1, &|e| in_h[e]));
                    }
                    seeded.push(cols);
                }
                self.incumbent = Some((bg.total_weight, bg.edge_ids));
            }
            InitStrategy::Brute => {
                uniqueness_known = true;
                for p in &self.pairs {
                    seeded.push(enumerate_all_bounded(&self.graph, &self.dm, p, ENUMERATION_CAP)?);
                }
            }
        }
        for (p, cols) in seeded.into_iter().enumerate() {
            if uniqueness_known && cols.len() == 1 {
                self.unique[p] = true;
            }
            for c in cols {
                self.add_column(p, c)?;
            }
        }
        if !uniqueness_known && self.config.fix_mandatory {
            for p in 0..np {
                if let Some(c) = unique_path_detect(&self.graph, &self.dm, &self.pairs[p]) {
                    self.unique[p] = true;
                    self.add_column(p, c)?;
                }
            }
        }
        self.stats.initial_columns = self.num_columns();
        Ok(())
    }

    /// Adds `path` as a column of pair `p` unless it is already present.
    fn add_column(&mut self, p: usize, path: PathColumn) -> Result<bool, PbError> {
        if !self.known[p].insert(path.edges.clone()) {
            return Ok(false);
        }
        let mut coeffs = vec![(self.pair_rows[p], 1.0)];
        for &e in &path.edges {
            let row = match self.edge_rows[p].get(&e) {
                Some(&r) => r,
                None => {
                    let r = self.lp.add_named_row(format!("e{e}_p{p}"), &[(self.x[e], -1.0)], Sense::Le, 0.0)?;
                    self.edge_rows[p].insert(e, r);
                    r
                }
            };
            coeffs.push((row, 1.0));
        }
        let k = self.columns[p].len();
        let var = self.lp.add_named_column(format!("y{p}_{k}"), 0.0, &coeffs, 0.0, f64::INFINITY)?;
        self.columns[p].push((var, path));
        Ok(true)
    }

    /// Fixes the unique column of every single-path pair to at least 1 and
    /// its edges to 1. Returns the number of newly fixed edges.
    pub fn fix_mandatory(&mut self) -> Result<usize, PbError> {
        let mut count = 0;
        for p in 0..self.pairs.len() {
            if !self.unique[p] {
                continue;
            }
            let (var, path) = &self.columns[p][0];
            self.lp.set_bounds(*var, 1.0, f64::INFINITY)?;
            for &e in &path.edges {
                if !self.mandatory[e] {
                    self.mandatory[e] = true;
                    self.lp.set_bounds(self.x[e], 1.0, 1.0)?;
                    count += 1;
                }
            }
        }
        self.stats.fixed_edges += count;
        Ok(count)
    }

    fn deadline_passed(&self) -> bool {
        self.config.time_limit.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn duals(&self, sol: &LpSolution) -> DualSolution {
        let sigma = self.pair_rows.iter().map(|r| sol.dual[r.0].max(0.0)).collect();
        let pi = self
            .edge_rows
            .iter()
            .map(|rows| {
                let mut v: Vec<(usize, f64)> = rows.iter().map(|(&e, r)| (e, (-sol.dual[r.0]).max(0.0))).collect();
                v.sort_by_key(|t| t.0);
                v
            })
            .collect();
        DualSolution { sigma, pi }
    }

    /// Prices every pair once. Edges in `local_zero` cost `sigma`, so no
    /// improving path uses them. Returns the number of added columns.
    pub fn price_all(&mut self, duals: &DualSolution, local_zero: &[usize]) -> Result<usize, PbError> {
        let mut added = 0;
        let mut pending: Vec<(usize, Vec<crate::pricing::PricedPath>)> = Vec::new();
        for p in 0..self.pairs.len() {
            if self.unique[p] && self.config.fix_mandatory {
                continue;
            }
            self.stats.pricing_calls += 1;
            let sigma = duals.sigma[p];
            let cap = sigma - PRICE_EPS;
            if cap <= 0.0 {
                continue;
            }
            for &(e, pi) in &duals.pi[p] {
                self.costs[e] = pi;
            }
            for &e in local_zero {
                self.costs[e] = sigma;
            }
            let problem = PricingProblem { pair: self.pairs[p], costs: &self.costs, cost_cap: cap, mu: self.config.mu };
            let pruned = self.config.prune && self.cache.check(p, &self.costs, cap);
            let found = if pruned {
                self.stats.pruned_calls += 1;
                if self.config.audit_pruning && !self.run_pricer(&problem).is_empty() {
                    self.stats.pruning_violations += 1;
                }
                Vec::new()
            } else {
                let found = self.run_pricer(&problem);
                if found.is_empty() && self.config.prune {
                    let mut nz: Vec<(usize, f64)> = duals.pi[p].clone();
                    nz.extend(local_zero.iter().map(|&e| (e, sigma)));
                    nz.sort_by_key(|t| t.0);
                    nz.dedup_by_key(|t| t.0);
                    let nz = nz.into_iter().map(|(e, _)| (e, self.costs[e])).collect();
                    self.cache.store_sparse(p, nz, cap);
                }
                found
            };
            for &(e, _) in &duals.pi[p] {
                self.costs[e] = 0.0;
            }
            for &e in local_zero {
                self.costs[e] = 0.0;
            }
            if !found.is_empty() {
                pending.push((p, found));
            }
        }
        for (p, found) in pending {
            for f in found {
                let free = f.cost == 0.0;
                if self.add_column(p, f.path)? {
                    added += 1;
                    self.stats.columns += 1;
                    if free {
                        self.stats.free_paths += 1;
                    }
                }
            }
        }
        Ok(added)
    }

    fn run_pricer(&self, problem: &PricingProblem) -> Vec<crate::pricing::PricedPath> {
        match self.config.pricer {
            Pricer::Basic => basic_csp(&self.graph, &self.dm, problem).into_iter().collect(),
            Pricer::BiAStar => bi_a_star_mu(&self.graph, &self.dm, problem),
        }
    }

    fn solve_lp(&mut self) -> Result<LpSolution, PbError> {
        let before = self.lp.total_pivots();
        let sol = self.lp.solve()?;
        self.stats.lp_pivots += self.lp.total_pivots() - before;
        Ok(sol)
    }

    /// Column generation under the current bounds.
    fn column_generation(&mut self, local_zero: &[usize]) -> Result<CgOutcome, PbError> {
        for _ in 0..self.config.max_cg_iterations {
            let sol = match self.solve_lp() {
                Err(PbError::Lp(LpError::TimeLimit(_))) => return Ok(CgOutcome::TimedOut),
                r => r?,
            };
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Ok(CgOutcome::Infeasible),
                s => return Err(PbError::UnexpectedLp(s)),
            }
            if self.deadline_passed() {
                return Ok(CgOutcome::TimedOut);
            }
            let duals = self.duals(&sol);
            if self.price_all(&duals, local_zero)? == 0 {
                return Ok(CgOutcome::Optimal(sol, duals));
            }
        }
        Err(PbError::IterationCap(self.config.max_cg_iterations))
    }

    /// Solves the LP relaxation of the full path model at the root.
    pub fn solve_root(&mut self) -> Result<(f64, DualSolution), PbError> {
        match self.column_generation(&[])? {
            CgOutcome::Optimal(sol, duals) => {
                self.stats.root_lp = Some(sol.objective);
                Ok((sol.objective, duals))
            }
            CgOutcome::Infeasible => Err(PbError::UnexpectedLp(LpStatus::Infeasible)),
            CgOutcome::TimedOut => Err(PbError::TimeLimit),
        }
    }

    /// Ensures every pair has a column avoiding `zero`. Returns false if some
    /// pair has no budget-feasible path without those edges.
    fn cover_pairs(&mut self, zero: &[bool]) -> Result<bool, PbError> {
        for p in 0..self.pairs.len() {
            if self.columns[p].iter().any(|(_, c)| c.edges.iter().all(|&e| !zero[e])) {
                continue;
            }
            let found = k_shortest_filtered(&self.graph, &self.dm, &self.pairs[p], 1, &|e| !zero[e]);
            match found.into_iter().next() {
                Some(c) => {
                    self.add_column(p, c)?;
                }
                None => return Ok(false),
            }
        }
        Ok(true)
    }

    fn apply_node_bounds(&mut self, zero: &[usize], one: &[usize]) -> Result<(), PbError> {
        for e in 0..self.graph.edge_count() {
            let lo = if self.mandatory[e] { 1.0 } else { 0.0 };
            self.lp.set_bounds(self.x[e], lo, 1.0)?;
        }
        for &e in zero {
            self.lp.set_bounds(self.x[e], 0.0, 0.0)?;
        }
        for &e in one {
            self.lp.set_bounds(self.x[e], 1.0, 1.0)?;
        }
        Ok(())
    }

    fn prunable(&self, bound: f64) -> bool {
        match &self.incumbent {
            None => false,
            Some((inc, _)) => {
                if self.graph.is_integral() {
                    (bound - INT_TOL).ceil() >= *inc - 0.5
                } else {
                    bound >= inc - INT_TOL
                }
            }
        }
    }

    /// Best-first branch-and-price over the edge variables.
    pub fn branch_and_price(mut self) -> Result<SolveResult, PbError> {
        let m = self.graph.edge_count();
        let mut open = BinaryHeap::new();
        open.push(Node { bound: f64::NEG_INFINITY, depth: 0, id: 0, zero: Vec::new(), one: Vec::new() });
        let mut next_id = 1;
        let mut limit_hit = false;
        let mut infeasible_root = false;
        let mut root_done = false;
        let mut limit_bound = f64::INFINITY;
        while let Some(node) = open.pop() {
            if self.prunable(node.bound) {
                continue;
            }
            if self.deadline_passed() || self.config.node_limit.is_some_and(|l| self.stats.nodes >= l) {
                limit_bound = limit_bound.min(node.bound);
                limit_hit = true;
                break;
            }
            self.stats.nodes += 1;
            self.cache.clear();
            self.apply_node_bounds(&node.zero, &node.one)?;
            let mut zero_mask = vec![false; m];
            for &e in &node.zero {
                zero_mask[e] = true;
            }
            if !self.cover_pairs(&zero_mask)? {
                if !root_done {
                    infeasible_root = true;
                }
                continue;
            }
            let (sol, _) = match self.column_generation(&node.zero)? {
                CgOutcome::Optimal(sol, d) => (sol, d),
                CgOutcome::Infeasible => {
                    if !root_done {
                        infeasible_root = true;
                    }
                    continue;
                }
                CgOutcome::TimedOut => {
                    limit_bound = limit_bound.min(node.bound);
                    limit_hit = true;
                    break;
                }
            };
            let z = sol.objective.max(node.bound);
            if !root_done {
                root_done = true;
                self.stats.root_lp = Some(sol.objective);
            }
            if self.prunable(z) {
                continue;
            }
            let xs: Vec<f64> = self.x.iter().map(|v| sol.primal[v.0]).collect();
            let mut branch: Option<(usize, f64)> = None;
            for (e, &xe) in xs.iter().enumerate() {
                let frac = (xe - xe.round()).abs();
                if frac <= INT_TOL {
                    continue;
                }
                let score = (xe - 0.5).abs();
                let better = match branch {
                    None => true,
                    Some((b, bs)) => {
                        score < bs - 1e-12
                            || (score <= bs + 1e-12
                                && (self.graph.weight(e) > self.graph.weight(b)
                                    || (self.graph.weight(e) == self.graph.weight(b) && e < b)))
                    }
                };
                if better {
                    branch = Some((e, score));
                }
            }
            match branch {
                None => {
                    let h: Vec<usize> = (0..m).filter(|&e| xs[e] >= 1.0 - INT_TOL).collect();
                    let check = verify_spanner_with(&self.graph, &self.dm, self.config.alpha, &h, PairMode::AllPairs);
                    debug_assert!(check.feasible, "integral master solution is not a spanner");
                    if check.feasible {
                        let w = self.graph.total_weight(&h);
                        if self.incumbent.as_ref().map_or(true, |(inc, _)| w < *inc - 1e-9) {
                            self.incumbent = Some((w, h));
                        }
                    }
                }
                Some((e, _)) => {
                    let mut zero = node.zero.clone();
                    zero.push(e);
                    let mut one = node.one.clone();
                    one.push(e);
                    open.push(Node { bound: z, depth: node.depth + 1, id: next_id, zero, one: node.one.clone() });
                    open.push(Node { bound: z, depth: node.depth + 1, id: next_id + 1, zero: node.zero.clone(), one });
                    next_id += 2;
                }
            }
        }
        let open_bound = open.iter().map(|n| n.bound).fold(limit_bound, f64::min);
        self.stats.wall_secs = self.start.elapsed().as_secs_f64();
        let best = self.incumbent.as_ref().map(|(_, h)| {
            let ids: Vec<usize> = h.iter().map(|&e| self.original_ids[e]).collect();
            let mut s = SpannerSolution { edge_ids: ids, total_weight: 0.0, feasible_for_alpha: Some(self.config.alpha) };
            s.edge_ids.sort_unstable();
            s.total_weight = self.graph.total_weight(h);
            s
        });
        let primal = best.as_ref().map_or(f64::INFINITY, |b| b.total_weight);
        debug_assert!(best.as_ref().map_or(true, |b| b.edge_ids.iter().all(|&e| e < self.input_edges)));
        let (status, dual) = if limit_hit {
            let d = if open_bound.is_finite() { open_bound.min(primal) } else { self.stats.root_lp.unwrap_or(0.0).min(primal) };
            (SolveStatus::BoundOnly, d)
        } else if best.is_none() || infeasible_root {
            (SolveStatus::Infeasible, f64::INFINITY)
        } else {
            (SolveStatus::Optimal, primal)
        };
        Ok(SolveResult { best, primal_bound: primal, dual_bound: dual, status, stats: self.stats })
    }
}

enum CgOutcome {
    Optimal(LpSolution, DualSolution),
    Infeasible,
    TimedOut,
}

/// Runs the path-based solver with `config` on `g`.
pub fn branch_and_price(g: &WeightedGraph, config: &PbConfig) -> Result<SolveResult, PbError> {
    PbSolver::new(g, config.clone())?.branch_and_price()
}

/// Lists every budget-feasible path whose dual cost is below its pair's
/// `sigma` by more than `1e-6`, i.e. every improving column.
pub fn check_dual_feasibility_exhaustive(
    g: &WeightedGraph,
    dm: &DistanceMatrix,
    pairs: &[TerminalPair],
    duals: &DualSolution,
) -> Result<Vec<PathColumn>, PathError> {
    let mut out = Vec::new();
    let mut costs = vec![0.0; g.edge_count()];
    for (p, pair) in pairs.iter().enumerate() {
        for &(e, pi) in &duals.pi[p] {
            costs[e] = pi;
        }
        for path in enumerate_all_bounded(g, dm, pair, ENUMERATION_CAP)? {
            let c: f64 = path.edges.iter().map(|&e| costs[e]).sum();
            if c < duals.sigma[p] - 1e-6 {
                out.push(path);
            }
        }
        for &(e, _) in &duals.pi[p] {
            costs[e] = 0.0;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn p3() -> WeightedGraph {
        build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }
    fn tri() -> WeightedGraph {
        build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)]).unwrap()
    }
    fn c4() -> WeightedGraph {
        build_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap()
    }
    fn k3() -> WeightedGraph {
        build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn initialization_examples() {
        let mut cfg = PbConfig::new(2.0);
        cfg.init = InitStrategy::Ksp1;
        let mut s = PbSolver::new(&p3(), cfg).unwrap();
        assert_eq!(s.num_columns(), 2);
        assert_eq!(s.solve_root().unwrap().0, 2.0);

        let s = PbSolver::new(&c4(), PbConfig::new(2.0)).unwrap();
        assert_eq!(s.num_columns(), 4);
        assert_eq!(s.incumbent_weight(), Some(4.0));

        let mut cfg = PbConfig::new(1.0);
        cfg.fix_mandatory = false;
        let s = PbSolver::new(&tri(), cfg).unwrap();
        assert_eq!(s.columns[2].len(), 2);
    }

    #[test]
    fn mandatory_fixing_examples() {
        let mut cfg = PbConfig::new(2.0);
        cfg.fix_mandatory = false;
        let mut s = PbSolver::new(&c4(), cfg.clone()).unwrap();
        assert_eq!(s.fix_mandatory().unwrap(), 4);
        let (v, _) = s.solve_root().unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(s.stats().columns, 0);

        let mut s = PbSolver::new(&k3(), cfg.clone()).unwrap();
        assert_eq!(s.fix_mandatory().unwrap(), 0);
        let mut s = PbSolver::new(&p3(), cfg).unwrap();
        assert_eq!(s.fix_mandatory().unwrap(), 2);
    }

    #[test]
    fn pricing_adds_the_detour() {
        // ksp1 seeds pair (0, 2) with its direct edge; the detour over node 1
        // only uses edges the other two pairs pay for anyway
        let g = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.5)]).unwrap();
        let cfg = PbConfig { init: InitStrategy::Ksp1, fix_mandatory: false, ..PbConfig::new(1.5) };
        let mut s = PbSolver::new(&g, cfg).unwrap();
        assert_eq!(s.num_columns(), 3);
        assert_eq!(s.solve_lp().unwrap().objective, 3.5);
        let (root, duals) = s.solve_root().unwrap();
        assert!((root - 2.0).abs() < 1e-9);
        assert_eq!(s.stats().columns, 1);
        let violated = check_dual_feasibility_exhaustive(s.graph(), s.distances(), s.pairs(), &duals).unwrap();
        assert!(violated.is_empty());
    }

    #[test]
    fn dual_check_examples() {
        let g = c4();
        let dm = all_pairs_distances(&g).unwrap();
        let pairs = build_terminal_pairs(&g, &dm, 2.0, PairMode::Adjacent).unwrap();
        let zero = DualSolution { sigma: vec![0.0; 4], pi: vec![Vec::new(); 4] };
        assert!(check_dual_feasibility_exhaustive(&g, &dm, &pairs, &zero).unwrap().is_empty());
        let mut one = zero.clone();
        one.sigma[0] = 1.0;
        assert_eq!(check_dual_feasibility_exhaustive(&g, &dm, &pairs, &one).unwrap().len(), 1);
    }

    #[test]
    fn branch_and_price_examples() {
        let r = branch_and_price(&p3(), &PbConfig::new(2.0)).unwrap();
        assert_eq!((r.status, r.primal_bound, r.stats.nodes), (SolveStatus::Optimal, 2.0, 1));
        let r = branch_and_price(&tri(), &PbConfig::new(1.0)).unwrap();
        assert_eq!(r.primal_bound, 2.0);
        assert_eq!(r.best.unwrap().edge_ids, vec![0, 1]);
        let r = branch_and_price(&c4(), &PbConfig::new(2.0)).unwrap();
        assert_eq!(r.primal_bound, 4.0);
    }
}
