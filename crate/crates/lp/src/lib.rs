//! Linear programming backend for the spanner solvers.
//!
//! [`LinearProgram`] is an incrementally built minimization LP with bounded
//! variables. It is solved by a bounded-variable revised primal simplex
//! that reports row duals and reduced costs and keeps its basis between
//! solves, which is what column generation and branch-and-bound need.

mod lp_file;
mod lu;
mod model;
mod simplex;

pub use lp_file::{parse_lp, write_lp, ParsedLp};
pub use model::{Basis, LinearProgram, RowId, Sense, VarId};
pub use simplex::{LpSolution, LpStatus, DUAL_TOL, PRIMAL_TOL};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("unknown row {0}")]
    UnknownRow(usize),
    #[error("unknown variable {0}")]
    UnknownVar(usize),
    #[error("invalid bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("value {value} outside original bounds [{lo}, {hi}]")]
    FixOutOfBounds { value: f64, lo: f64, hi: f64 },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("basis does not belong to this program")]
    BasisMismatch,
    #[error("iteration limit reached after {0} pivots")]
    IterationLimit(usize),
    #[error("time limit reached after {0} pivots")]
    TimeLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("LP file parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Violations of the optimality conditions of a solution, measured against
/// the program it came from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OptimalityReport {
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub complementarity: f64,
    /// |primal objective - dual objective|
    pub duality_gap: f64,
}

impl OptimalityReport {
    /// True when every measure is within the documented tolerances.
    pub fn is_optimal(&self, objective: f64) -> bool {
        self.primal_infeasibility <= 1e-7
            && self.dual_infeasibility <= 1e-7
            && self.complementarity <= 1e-6
            && self.duality_gap <= 1e-6 * (1.0 + objective.abs())
    }
}

impl LinearProgram {
    /// Checks primal feasibility, dual feasibility, complementary slackness
    /// and the duality gap of `sol` from first principles.
    ///
    /// The dual objective is `b'y` plus the bound terms of the reduced costs:
    /// a variable at its lower (upper) bound contributes `d_j lo_j`
    /// (`d_j hi_j`).
    pub fn check_optimality(&self, sol: &LpSolution) -> OptimalityReport {
        let mut rep = OptimalityReport::default();
        let rows = self.row_entries();
        for (i, row) in rows.iter().enumerate() {
            let act: f64 = row.iter().map(|&(v, a)| a * sol.primal[v.0]).sum();
            let rhs = self.rows[i].rhs;
            let viol = match self.rows[i].sense {
                Sense::Le => (act - rhs).max(0.0),
                Sense::Ge => (rhs - act).max(0.0),
                Sense::Eq => (act - rhs).abs(),
            };
            rep.primal_infeasibility = rep.primal_infeasibility.max(viol);
            let y = sol.dual[i];
            let dual_viol = match self.rows[i].sense {
                Sense::Le => y.max(0.0),
                Sense::Ge => (-y).max(0.0),
                Sense::Eq => 0.0,
            };
            rep.dual_infeasibility = rep.dual_infeasibility.max(dual_viol);
            if self.rows[i].sense != Sense::Eq {
                rep.complementarity = rep.complementarity.max((y * (act - rhs)).abs());
            }
        }
        let mut dual_obj: f64 = self.rows.iter().zip(&sol.dual).map(|(r, y)| r.rhs * y).sum();
        let mut primal_obj = 0.0;
        for (j, s) in self.structs.iter().enumerate() {
            let c = &self.cols[s.inner];
            let x = sol.primal[j];
            primal_obj += c.cost * x;
            rep.primal_infeasibility = rep
                .primal_infeasibility
                .max((c.lo - x).max(0.0))
                .max((x - c.hi).max(0.0));
            let d = c.cost - c.entries.iter().map(|&(r, a)| a * sol.dual[r]).sum::<f64>();
            // d > 0 needs x at lo, d < 0 needs x at hi
            if d > 0.0 {
                if c.lo.is_finite() {
                    dual_obj += d * c.lo;
                    rep.complementarity = rep.complementarity.max((d * (x - c.lo)).abs());
                } else {
                    rep.dual_infeasibility = rep.dual_infeasibility.max(d);
                }
            } else if d < 0.0 {
                if c.hi.is_finite() {
                    dual_obj += d * c.hi;
                    rep.complementarity = rep.complementarity.max((d * (c.hi - x)).abs());
                } else {
                    rep.dual_infeasibility = rep.dual_infeasibility.max(-d);
                }
            }
        }
        rep.duality_gap = (primal_obj - dual_obj).abs();
        rep
    }
}
