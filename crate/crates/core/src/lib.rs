//! Exact and heuristic solvers for the minimum-weight multiplicative
//! spanner problem: given a connected weighted graph and a stretch factor
//! `alpha >= 1`, find a lightest subgraph `H` with
//! `d_H(u, v) <= alpha * d_G(u, v)` for every node pair.

pub mod ab;
pub mod graph;
pub mod heuristics;
pub mod instances;
pub mod oracle;
pub mod paths;
pub mod pb;
pub mod pricing;
