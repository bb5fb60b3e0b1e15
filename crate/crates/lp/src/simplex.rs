//! Bounded-variable primal simplex on top of [`LinearProgram`].
//!
//! Phase 1 minimizes the sum of bound violations of the basic variables
//! (composite method), so any basis, including a warm start that became
//! infeasible after bound changes or row additions, can be continued.
//! Pricing uses devex reference weights (an approximation of steepest edge).
//! A run of degenerate pivots first triggers a small deterministic widening
//! of all bounds, which is removed again before the solution is reported;
//! stalls after that fall back to Bland's rule until progress resumes.

use crate::lu::Factor;
use crate::model::{Basis, LinearProgram, VarStatus};
use crate::LpError;

pub const PRIMAL_TOL: f64 = 1e-9;
pub const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 80;
const DEGENERATE_RUN: usize = 60;
/// stalls answered by bound perturbation before falling back to Bland
const MAX_PERTURBATIONS: usize = 2;
const PERTURB_SCALE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// value per structural variable
    pub primal: Vec<f64>,
    /// dual value per row; for a minimization, `>=` rows have nonnegative and
    /// `<=` rows nonpositive duals
    pub dual: Vec<f64>,
    /// reduced cost per structural variable
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    pub basis: Basis,
}

/// Deterministic value in `[0, 1)` (splitmix64 finalizer).
fn unit_hash(mut z: u64) -> f64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

impl LinearProgram {
    /// Solves from the retained basis (warm start).
    pub fn solve(&mut self) -> Result<LpSolution, LpError> {
        let limit = 200 * (self.rows.len() + self.cols.len()) + 10_000;
        self.run_simplex(limit)
    }

    /// Solves starting from `warm`, or from the slack basis when `None`.
    pub fn solve_from(&mut self, warm: Option<&Basis>) -> Result<LpSolution, LpError> {
        match warm {
            Some(b) => self.set_basis(b)?,
            None => self.reset_basis(),
        }
        self.solve()
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.rows.len();
        for attempt in 0..=m.max(1) {
            let cols: Vec<&[(usize, f64)]> =
                self.basic.iter().map(|&j| self.cols[j].entries.as_slice()).collect();
            match Factor::new(m, &cols) {
                Ok(f) => {
                    self.factor = Some(f);
                    return Ok(());
                }
                Err(sing) => {
                    if attempt == m.max(1) {
                        break;
                    }
                    // swap dependent columns for the slacks of uncovered rows
                    for (&pos, &row) in sing.positions.iter().zip(&sing.rows) {
                        let out = self.basic[pos];
                        let slack = self.rows[row].inner;
                        self.status[out] = VarStatus::Lower;
                        self.normalize_nonbasic(out);
                        if let VarStatus::Basic(old_pos) = self.status[slack] {
                            // slack already basic elsewhere; should not happen
                            debug_assert!(false, "slack {slack} basic at {old_pos}");
                        }
                        self.basic[pos] = slack;
                        self.status[slack] = VarStatus::Basic(pos);
                    }
                }
            }
        }
        Err(LpError::Numerical("basis repair failed".into()))
    }

    /// Recomputes basic values from the nonbasic ones.
    fn compute_basic_values(&mut self) {
        let m = self.rows.len();
        let mut rhs: Vec<f64> = self.rows.iter().map(|r| r.rhs).collect();
        for (j, c) in self.cols.iter().enumerate() {
            if matches!(self.status[j], VarStatus::Basic(_)) {
                continue;
            }
            let xj = self.x[j];
            if xj != 0.0 {
                for &(r, a) in &c.entries {
                    rhs[r] -= a * xj;
                }
            }
        }
        let f = self.factor.as_ref().expect("factorized");
        f.ftran(&mut rhs);
        for p in 0..m {
            self.x[self.basic[p]] = rhs[p];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let c = &self.cols[j];
        let x = self.x[j];
        if x < c.lo - PRIMAL_TOL {
            c.lo - x
        } else if x > c.hi + PRIMAL_TOL {
            x - c.hi
        } else {
            0.0
        }
    }

    fn phase_costs(&self, phase: Phase) -> Vec<f64> {
        self.basic
            .iter()
            .map(|&j| match phase {
                Phase::Two => self.cols[j].cost,
                Phase::One => {
                    let c = &self.cols[j];
                    if self.x[j] < c.lo - PRIMAL_TOL {
                        -1.0
                    } else if self.x[j] > c.hi + PRIMAL_TOL {
                        1.0
                    } else {
                        0.0
                    }
                }
            })
            .collect()
    }

    fn duals_for(&self, cb: Vec<f64>) -> Vec<f64> {
        let mut y = cb;
        self.factor.as_ref().expect("factorized").btran(&mut y);
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase: Phase) -> f64 {
        let c = &self.cols[j];
        let base = if phase == Phase::Two { c.cost } else { 0.0 };
        base - c.entries.iter().map(|&(r, a)| a * y[r]).sum::<f64>()
    }

    /// Direction (+1 increase, -1 decrease) in which nonbasic `j` improves.
    fn improving_direction(&self, j: usize, d: f64) -> Option<f64> {
        let c = &self.cols[j];
        if c.lo == c.hi {
            return None;
        }
        match self.status[j] {
            VarStatus::Basic(_) => None,
            VarStatus::Lower if d < -DUAL_TOL => Some(1.0),
            VarStatus::Upper if d > DUAL_TOL => Some(-1.0),
            VarStatus::Zero if d < -DUAL_TOL => Some(1.0),
            VarStatus::Zero if d > DUAL_TOL => Some(-1.0),
            _ => None,
        }
    }

    fn run_simplex(&mut self, iter_limit: usize) -> Result<LpSolution, LpError> {
        let mut saved = None;
        let result = self.simplex_loop(iter_limit, &mut saved);
        if let Some(b) = saved {
            // early exit while perturbed
            self.restore_bounds(b);
        }
        result
    }

    fn simplex_loop(&mut self, iter_limit: usize, saved: &mut Option<Vec<(f64, f64)>>) -> Result<LpSolution, LpError> {
        let m = self.rows.len();
        let n = self.cols.len();
        self.refactor()?;
        self.compute_basic_values();
        let mut iterations = 0usize;
        let mut degenerate_run = 0usize;
        let mut confirmations = 0usize;
        let mut weights = vec![1.0f64; n];
        let mut perturbations = 0usize;
        // phase 2 reduced costs, updated across pivots until the next refactor
        let mut dvec = vec![0.0f64; n];
        let mut d_valid = false;

        loop {
            if iterations >= iter_limit {
                return Err(LpError::IterationLimit(iterations));
            }
            if iterations % 32 == 31 && self.deadline.is_some_and(|d| std::time::Instant::now() >= d) {
                return Err(LpError::TimeLimit(iterations));
            }
            if self.factor.as_ref().map_or(true, |f| f.num_etas() >= REFACTOR_EVERY) {
                self.refactor()?;
                self.compute_basic_values();
                d_valid = false;
            }
            let infeasible = self.basic.iter().any(|&j| self.infeasibility(j) > 0.0);
            let phase = if infeasible { Phase::One } else { Phase::Two };
            if phase == Phase::One || !d_valid {
                let y = self.duals_for(self.phase_costs(phase));
                for j in 0..n {
                    dvec[j] = if matches!(self.status[j], VarStatus::Basic(_)) {
                        0.0
                    } else {
                        self.reduced_cost(j, &y, phase)
                    };
                }
                d_valid = phase == Phase::Two;
            }
            if degenerate_run >= DEGENERATE_RUN && saved.is_none() && perturbations < MAX_PERTURBATIONS {
                *saved = Some(self.perturb_bounds(perturbations));
                perturbations += 1;
                degenerate_run = 0;
                continue;
            }
            let bland = degenerate_run >= DEGENERATE_RUN;

            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..n {
                if matches!(self.status[j], VarStatus::Basic(_)) {
                    continue;
                }
                let d = dvec[j];
                if let Some(dir) = self.improving_direction(j, d) {
                    if bland {
                        entering = Some((j, dir, d));
                        break;
                    }
                    let score = d * d / weights[j];
                    if entering.map_or(true, |(_, _, best)| score > best) {
                        entering = Some((j, dir, score));
                    }
                }
            }

            let Some((q, dir, _)) = entering else {
                if let Some(b) = saved.take() {
                    self.restore_bounds(b);
                    degenerate_run = 0;
                    continue;
                }
                // no improving column: confirm on a fresh factorization
                if self.factor.as_ref().map_or(0, |f| f.num_etas()) > 0 && confirmations < 3 {
                    confirmations += 1;
                    self.refactor()?;
                    self.compute_basic_values();
                    d_valid = false;
                    continue;
                }
                let status = if phase == Phase::One { LpStatus::Infeasible } else { LpStatus::Optimal };
                return Ok(self.extract(status, iterations));
            };

            let mut alpha = vec![0.0; m];
            for &(r, a) in &self.cols[q].entries {
                alpha[r] = a;
            }
            self.factor.as_ref().expect("factorized").ftran(&mut alpha);

            let leave = if bland { self.ratio_textbook(&alpha, dir) } else { self.ratio_harris(&alpha, dir) };

            let c = &self.cols[q];
            let flip_range = c.hi - c.lo;
            let leave_theta = leave.map_or(f64::INFINITY, |l| l.1);
            iterations += 1;
            self.total_pivots += 1;

            if flip_range.is_finite() && flip_range <= leave_theta {
                // bound flip of the entering variable
                let theta = flip_range;
                self.x[q] += dir * theta;
                for p in 0..m {
                    if alpha[p] != 0.0 {
                        let j = self.basic[p];
                        self.x[j] -= dir * theta * alpha[p];
                    }
                }
                self.status[q] = if dir > 0.0 { VarStatus::Upper } else { VarStatus::Lower };
                degenerate_run = if theta > 1e-12 { 0 } else { degenerate_run + 1 };
                continue;
            }
            let Some((r, theta, bound)) = leave else {
                if let Some(b) = saved.take() {
                    self.restore_bounds(b);
                    degenerate_run = 0;
                    continue;
                }
                if phase == Phase::One {
                    return Err(LpError::Numerical("phase 1 ray without blocking variable".into()));
                }
                return Ok(self.extract(LpStatus::Unbounded, iterations));
            };

            self.x[q] += dir * theta;
            for p in 0..m {
                if alpha[p] != 0.0 {
                    let j = self.basic[p];
                    self.x[j] -= dir * theta * alpha[p];
                }
            }
            let out = self.basic[r];
            self.update_pivot_row(&mut weights, !bland, &mut dvec, d_valid, q, out, r, alpha[r]);
            self.x[out] = bound;
            let oc = &self.cols[out];
            self.status[out] = if oc.lo == oc.hi || bound == oc.lo {
                VarStatus::Lower
            } else {
                VarStatus::Upper
            };
            if !oc.lo.is_finite() && !oc.hi.is_finite() {
                self.status[out] = VarStatus::Zero;
            }
            self.basic[r] = q;
            self.status[q] = VarStatus::Basic(r);
            self.factor.as_mut().expect("factorized").push_eta(r, &alpha);
            degenerate_run = if theta > 1e-12 { 0 } else { degenerate_run + 1 };
            confirmations = 0;
        }
    }

    /// Widens every non-fixed finite bound by a small pseudo-random amount,
    /// moves nonbasic variables onto their new bounds and returns the
    /// original bounds.
    fn perturb_bounds(&mut self, round: usize) -> Vec<(f64, f64)> {
        let saved: Vec<(f64, f64)> = self.cols.iter().map(|c| (c.lo, c.hi)).collect();
        for (j, c) in self.cols.iter_mut().enumerate() {
            if c.lo == c.hi {
                continue;
            }
            let u = unit_hash((j as u64) << 8 | round as u64);
            if c.lo.is_finite() {
                c.lo -= PERTURB_SCALE * (1.0 + c.lo.abs()) * (1.0 + u);
            }
            if c.hi.is_finite() {
                c.hi += PERTURB_SCALE * (1.0 + c.hi.abs()) * (1.0 + u);
            }
        }
        self.snap_nonbasic();
        saved
    }

    fn restore_bounds(&mut self, saved: Vec<(f64, f64)>) {
        for (c, (lo, hi)) in self.cols.iter_mut().zip(saved) {
            c.lo = lo;
            c.hi = hi;
        }
        self.snap_nonbasic();
    }

    fn snap_nonbasic(&mut self) {
        for j in 0..self.cols.len() {
            self.normalize_nonbasic(j);
        }
        if self.factor.is_some() {
            self.compute_basic_values();
        }
    }

    /// Computes row `r` of `B^-1 A` for entering `q` replacing `out` and
    /// updates the devex weights and (if `update_d`) the reduced costs.
    #[allow(clippy::too_many_arguments)]
    fn update_pivot_row(
        &self,
        weights: &mut [f64],
        devex: bool,
        dvec: &mut [f64],
        update_d: bool,
        q: usize,
        out: usize,
        r: usize,
        alpha_rq: f64,
    ) {
        let mut rho = vec![0.0; self.rows.len()];
        rho[r] = 1.0;
        self.factor.as_ref().expect("factorized").btran(&mut rho);
        let wq = weights[q];
        let step = dvec[q] / alpha_rq;
        let mut reset = false;
        for (j, c) in self.cols.iter().enumerate() {
            if j == q || matches!(self.status[j], VarStatus::Basic(_)) {
                continue;
            }
            let arj: f64 = c.entries.iter().map(|&(i, a)| a * rho[i]).sum();
            if arj != 0.0 {
                if update_d {
                    dvec[j] -= step * arj;
                }
                if devex {
                    let ratio = arj / alpha_rq;
                    weights[j] = weights[j].max(ratio * ratio * wq);
                    reset |= weights[j] > 1e8;
                }
            }
        }
        dvec[out] = -step;
        dvec[q] = 0.0;
        if devex {
            weights[out] = (wq / (alpha_rq * alpha_rq)).max(1.0);
            if reset {
                weights.iter_mut().for_each(|w| *w = 1.0);
            }
        }
    }

    /// Two-pass Harris ratio test: the step is bounded by the tolerance-relaxed
    /// minimum ratio, and among candidates within it the largest pivot wins.
    /// Returns (position, step, bound reached by the leaving variable).
    fn ratio_harris(&self, alpha: &[f64], dir: f64) -> Option<(usize, f64, f64)> {
        let mut theta_max = f64::INFINITY;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let delta = -dir * a;
            let j = self.basic[p];
            if let Some(bound) = self.blocking_bound(j, delta) {
                let relaxed = if delta > 0.0 { bound + PRIMAL_TOL } else { bound - PRIMAL_TOL };
                theta_max = theta_max.min(((relaxed - self.x[j]) / delta).max(0.0));
            }
        }
        let mut leave: Option<(usize, f64, f64)> = None;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let delta = -dir * a;
            let j = self.basic[p];
            if let Some(bound) = self.blocking_bound(j, delta) {
                let t = ((bound - self.x[j]) / delta).max(0.0);
                if t <= theta_max && leave.map_or(true, |(lp, _, _)| a.abs() > alpha[lp].abs()) {
                    leave = Some((p, t, bound));
                }
            }
        }
        leave
    }

    /// Exact minimum ratio with ties broken by smallest variable index.
    fn ratio_textbook(&self, alpha: &[f64], dir: f64) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let delta = -dir * a;
            let j = self.basic[p];
            if let Some(bound) = self.blocking_bound(j, delta) {
                let t = ((bound - self.x[j]) / delta).max(0.0);
                let take = match best {
                    None => true,
                    Some((bp, bt, _)) => t < bt - 1e-12 || (t <= bt + 1e-12 && j < self.basic[bp]),
                };
                if take {
                    best = Some((p, t, bound));
                }
            }
        }
        best
    }

    /// Bound hit by basic variable `j` moving at rate `delta`, if any.
    fn blocking_bound(&self, j: usize, delta: f64) -> Option<f64> {
        let c = &self.cols[j];
        let x = self.x[j];
        if delta > 0.0 {
            if x < c.lo - PRIMAL_TOL {
                Some(c.lo)
            } else if x > c.hi + PRIMAL_TOL || !c.hi.is_finite() {
                None
            } else {
                Some(c.hi)
            }
        } else if x > c.hi + PRIMAL_TOL {
            Some(c.hi)
        } else if x < c.lo - PRIMAL_TOL || !c.lo.is_finite() {
            None
        } else {
            Some(c.lo)
        }
    }

    fn extract(&self, status: LpStatus, iterations: usize) -> LpSolution {
        let y = self.duals_for(self.phase_costs(Phase::Two));
        let primal: Vec<f64> = self.structs.iter().map(|s| self.x[s.inner]).collect();
        let reduced_costs = self
            .structs
            .iter()
            .map(|s| {
                if matches!(self.status[s.inner], VarStatus::Basic(_)) {
                    0.0
                } else {
                    self.reduced_cost(s.inner, &y, Phase::Two)
                }
            })
            .collect();
        let objective = self.structs.iter().map(|s| self.cols[s.inner].cost * self.x[s.inner]).sum();
        LpSolution {
            status,
            objective,
            primal,
            dual: y,
            reduced_costs,
            iterations,
            basis: self.basis(),
        }
    }
}
