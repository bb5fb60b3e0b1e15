use crate::lu::Factor;
use crate::LpError;

/// Index of a structural variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Index of a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarStatus {
    Basic(usize),
    Lower,
    Upper,
    /// nonbasic free variable held at zero
    Zero,
}

/// Internal column: either a structural variable or the slack of a row.
/// Every row `i` reads `a_i x + s_i = rhs_i`, so slack bounds encode the sense.
#[derive(Debug, Clone)]
pub(crate) struct Column {
    pub cost: f64,
    pub lo: f64,
    pub hi: f64,
    pub entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct StructInfo {
    pub inner: usize,
    pub name: String,
    pub integer: bool,
    pub orig_lo: f64,
    pub orig_hi: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct RowInfo {
    pub inner: usize,
    pub name: String,
    pub sense: Sense,
    pub rhs: f64,
}

/// Warm-start token: the basis of a previous solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub(crate) basic: Vec<usize>,
    pub(crate) status: Vec<VarStatus>,
}

impl Basis {
    pub fn num_rows(&self) -> usize {
        self.basic.len()
    }
}

/// A minimization LP with bounded variables, built incrementally.
///
/// Indices handed out by [`LinearProgram::add_column`] and
/// [`LinearProgram::add_row`] stay valid for the lifetime of the program.
/// The basis of the last solve is retained, so re-solving after adding rows,
/// columns or changing bounds starts from it.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub(crate) cols: Vec<Column>,
    pub(crate) structs: Vec<StructInfo>,
    pub(crate) rows: Vec<RowInfo>,
    pub(crate) basic: Vec<usize>,
    pub(crate) status: Vec<VarStatus>,
    pub(crate) x: Vec<f64>,
    pub(crate) factor: Option<Factor>,
    pub(crate) total_pivots: usize,
    pub(crate) deadline: Option<std::time::Instant>,
}

pub(crate) fn slack_bounds(sense: Sense) -> (f64, f64) {
    match sense {
        Sense::Le => (0.0, f64::INFINITY),
        Sense::Ge => (f64::NEG_INFINITY, 0.0),
        Sense::Eq => (0.0, 0.0),
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.structs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Total simplex pivots performed over the lifetime of the program.
    pub fn total_pivots(&self) -> usize {
        self.total_pivots
    }

    /// Solves give up with [`LpError::TimeLimit`] once `deadline` passes.
    pub fn set_deadline(&mut self, deadline: Option<std::time::Instant>) {
        self.deadline = deadline;
    }

    /// Adds a variable with objective coefficient `obj`, coefficients in
    /// existing rows, and bounds `[lo, hi]`.
    pub fn add_column(
        &mut self,
        obj: f64,
        coeffs: &[(RowId, f64)],
        lo: f64,
        hi: f64,
    ) -> Result<VarId, LpError> {
        let name = format!("x{}", self.structs.len());
        self.add_named_column(name, obj, coeffs, lo, hi)
    }

    pub fn add_named_column(
        &mut self,
        name: impl Into<String>,
        obj: f64,
        coeffs: &[(RowId, f64)],
        lo: f64,
        hi: f64,
    ) -> Result<VarId, LpError> {
        if !(lo <= hi) || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(LpError::InvalidBounds { lo, hi });
        }
        if !obj.is_finite() {
            return Err(LpError::NonFinite);
        }
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for &(RowId(r), v) in coeffs {
            if r >= self.rows.len() {
                return Err(LpError::UnknownRow(r));
            }
            if !v.is_finite() {
                return Err(LpError::NonFinite);
            }
            entries.push((r, v));
        }
        merge_entries(&mut entries);
        let inner = self.cols.len();
        self.cols.push(Column { cost: obj, lo, hi, entries });
        let (status, x) = initial_status(lo, hi);
        self.status.push(status);
        self.x.push(x);
        let id = VarId(self.structs.len());
        self.structs.push(StructInfo { inner, name: name.into(), integer: false, orig_lo: lo, orig_hi: hi });
        Ok(id)
    }

    /// Adds the row `sum coeffs (sense) rhs`.
    pub fn add_row(&mut self, coeffs: &[(VarId, f64)], sense: Sense, rhs: f64) -> Result<RowId, LpError> {
        let name = format!("c{}", self.rows.len());
        self.add_named_row(name, coeffs, sense, rhs)
    }

    pub fn add_named_row(
        &mut self,
        name: impl Into<String>,
        coeffs: &[(VarId, f64)],
        sense: Sense,
        rhs: f64,
    ) -> Result<RowId, LpError> {
        if !rhs.is_finite() {
            return Err(LpError::NonFinite);
        }
        for &(VarId(j), v) in coeffs {
            if j >= self.structs.len() {
                return Err(LpError::UnknownVar(j));
            }
            if !v.is_finite() {
                return Err(LpError::NonFinite);
            }
        }
        let r = self.rows.len();
        let mut merged: Vec<(usize, f64)> = coeffs.iter().map(|&(VarId(j), v)| (j, v)).collect();
        merge_entries(&mut merged);
        for (j, v) in merged {
            let inner = self.structs[j].inner;
            self.cols[inner].entries.push((r, v));
        }
        let (lo, hi) = slack_bounds(sense);
        let inner = self.cols.len();
        self.cols.push(Column { cost: 0.0, lo, hi, entries: vec![(r, 1.0)] });
        let pos = self.basic.len();
        self.basic.push(inner);
        self.status.push(VarStatus::Basic(pos));
        self.x.push(0.0);
        self.rows.push(RowInfo { inner, name: name.into(), sense, rhs });
        self.factor = None;
        Ok(RowId(r))
    }

    /// Marks a variable as integral; only used for LP-file export.
    pub fn set_integer(&mut self, v: VarId, integer: bool) {
        self.structs[v.0].integer = integer;
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.structs[v.0].name
    }

    pub fn row_name(&self, r: RowId) -> &str {
        &self.rows[r.0].name
    }

    pub fn bounds(&self, v: VarId) -> (f64, f64) {
        let c = &self.cols[self.structs[v.0].inner];
        (c.lo, c.hi)
    }

    pub fn original_bounds(&self, v: VarId) -> (f64, f64) {
        let s = &self.structs[v.0];
        (s.orig_lo, s.orig_hi)
    }

    pub fn objective_coeff(&self, v: VarId) -> f64 {
        self.cols[self.structs[v.0].inner].cost
    }

    pub fn row_sense(&self, r: RowId) -> Sense {
        self.rows[r.0].sense
    }

    pub fn row_rhs(&self, r: RowId) -> f64 {
        self.rows[r.0].rhs
    }

    pub fn set_objective_coeff(&mut self, v: VarId, obj: f64) {
        let inner = self.structs[v.0].inner;
        self.cols[inner].cost = obj;
    }

    /// Coefficients of a variable as `(row, value)`.
    pub fn column(&self, v: VarId) -> Vec<(RowId, f64)> {
        self.cols[self.structs[v.0].inner].entries.iter().map(|&(r, a)| (RowId(r), a)).collect()
    }

    /// Row-wise view of the constraint matrix.
    pub fn row_entries(&self) -> Vec<Vec<(VarId, f64)>> {
        let mut rows = vec![Vec::new(); self.rows.len()];
        for (j, s) in self.structs.iter().enumerate() {
            for &(r, a) in &self.cols[s.inner].entries {
                rows[r].push((VarId(j), a));
            }
        }
        rows
    }

    /// Sets the current bounds of a variable. The original bounds (used by
    /// [`LinearProgram::unfix`]) are unchanged.
    pub fn set_bounds(&mut self, v: VarId, lo: f64, hi: f64) -> Result<(), LpError> {
        if !(lo <= hi) || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(LpError::InvalidBounds { lo, hi });
        }
        let inner = self.structs.get(v.0).ok_or(LpError::UnknownVar(v.0))?.inner;
        self.cols[inner].lo = lo;
        self.cols[inner].hi = hi;
        self.normalize_nonbasic(inner);
        Ok(())
    }

    /// Fixes a variable to `value`, which must lie inside its original bounds.
    pub fn fix_variable(&mut self, v: VarId, value: f64) -> Result<(), LpError> {
        let s = self.structs.get(v.0).ok_or(LpError::UnknownVar(v.0))?;
        if value < s.orig_lo || value > s.orig_hi {
            return Err(LpError::FixOutOfBounds { value, lo: s.orig_lo, hi: s.orig_hi });
        }
        self.set_bounds(v, value, value)
    }

    /// Restores the original bounds of a variable.
    pub fn unfix(&mut self, v: VarId) -> Result<(), LpError> {
        let s = self.structs.get(v.0).ok_or(LpError::UnknownVar(v.0))?;
        let (lo, hi) = (s.orig_lo, s.orig_hi);
        self.set_bounds(v, lo, hi)
    }

    pub fn basis(&self) -> Basis {
        Basis { basic: self.basic.clone(), status: self.status.clone() }
    }

    /// Installs a basis from an earlier solve of this program. Rows and
    /// columns added since are completed with slack-basic / at-bound entries.
    pub fn set_basis(&mut self, basis: &Basis) -> Result<(), LpError> {
        if basis.basic.len() > self.rows.len() || basis.status.len() > self.cols.len() {
            return Err(LpError::BasisMismatch);
        }
        // a basis saved before rows/columns were added is extended with the new slacks
        let mut basic = basis.basic.clone();
        let mut status = basis.status.clone();
        for (p, &j) in basic.iter().enumerate() {
            if j >= status.len() || status[j] != VarStatus::Basic(p) {
                return Err(LpError::BasisMismatch);
            }
        }
        while status.len() < self.cols.len() {
            let j = status.len();
            let c = &self.cols[j];
            status.push(initial_status(c.lo, c.hi).0);
        }
        for r in basis.basic.len()..self.rows.len() {
            let j = self.rows[r].inner;
            if matches!(status[j], VarStatus::Basic(_)) {
                return Err(LpError::BasisMismatch);
            }
            status[j] = VarStatus::Basic(basic.len());
            basic.push(j);
        }
        self.basic = basic;
        self.status = status;
        for j in 0..self.cols.len() {
            self.normalize_nonbasic(j);
        }
        self.factor = None;
        Ok(())
    }

    /// Resets to the all-slack basis.
    pub fn reset_basis(&mut self) {
        for j in 0..self.cols.len() {
            let c = &self.cols[j];
            let (st, x) = initial_status(c.lo, c.hi);
            self.status[j] = st;
            self.x[j] = x;
        }
        for (p, r) in self.rows.iter().enumerate() {
            self.basic[p] = r.inner;
            self.status[r.inner] = VarStatus::Basic(p);
        }
        self.factor = None;
    }

    pub(crate) fn normalize_nonbasic(&mut self, j: usize) {
        let (lo, hi) = (self.cols[j].lo, self.cols[j].hi);
        let st = match self.status[j] {
            VarStatus::Basic(_) => return,
            VarStatus::Lower if lo.is_finite() => VarStatus::Lower,
            VarStatus::Upper if hi.is_finite() => VarStatus::Upper,
            _ => initial_status(lo, hi).0,
        };
        self.status[j] = st;
        self.x[j] = match st {
            VarStatus::Lower => lo,
            VarStatus::Upper => hi,
            _ => 0.0,
        };
    }
}

pub(crate) fn initial_status(lo: f64, hi: f64) -> (VarStatus, f64) {
    if lo.is_finite() {
        (VarStatus::Lower, lo)
    } else if hi.is_finite() {
        (VarStatus::Upper, hi)
    } else {
        (VarStatus::Zero, 0.0)
    }
}

fn merge_entries(entries: &mut Vec<(usize, f64)>) {
    entries.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    for &(i, v) in entries.iter() {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    *entries = out;
}
