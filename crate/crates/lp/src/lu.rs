//! Basis factorization.
//!
//! The basis matrix is permuted into block upper triangular form: column
//! singletons first, then a "bump" factorized by sparse Gaussian elimination
//! with Markowitz pivoting, then row singletons. Updates between
//! refactorizations are kept as a product-form eta file.

const PIVOT_TOL: f64 = 1e-11;

/// A factorization failed because the basis is (numerically) singular.
/// `positions` are basis positions that could not be pivoted and `rows` the
/// rows left uncovered; they pair up one to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct Factor {
    m: usize,
    /// pivot index -> row
    prow: Vec<usize>,
    /// pivot index -> basis position
    pcol: Vec<usize>,
    /// diagonal value for non-bump pivots
    diag: Vec<f64>,
    /// strictly-upper entries of each pivot column as (pivot index, value)
    upper: Vec<Vec<(usize, f64)>>,
    bump_start: usize,
    bump_len: usize,
    /// bump L as elimination steps: for pivot k, `(i, l)` means pivot row
    /// `i` (> k) had `l` times pivot row `k` subtracted
    bump_l: Vec<Vec<(usize, f64)>>,
    /// off-diagonal entries of U per bump pivot row, as (pivot index > k, value);
    /// the diagonal is in `diag`
    bump_u: Vec<Vec<(usize, f64)>>,
    etas: Vec<Eta>,
}

impl Factor {
    /// Factorizes the basis whose columns are given per basis position as
    /// sparse `(row, value)` lists.
    pub fn new(m: usize, cols: &[&[(usize, f64)]]) -> Result<Factor, Singular> {
        assert_eq!(cols.len(), m);
        let mut row_entries: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut col_count = vec![0usize; m];
        for (p, col) in cols.iter().enumerate() {
            for &(r, v) in col.iter() {
                if v != 0.0 {
                    row_entries[r].push(p);
                    col_count[p] += 1;
                }
            }
        }
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];

        let mut head: Vec<(usize, usize, f64)> = Vec::new();
        let mut stack: Vec<usize> = (0..m).filter(|&p| col_count[p] == 1).collect();
        while let Some(p) = stack.pop() {
            if !col_active[p] || col_count[p] != 1 {
                continue;
            }
            let Some(&(r, v)) = cols[p].iter().find(|&&(r, v)| v != 0.0 && row_active[r]) else {
                continue;
            };
            if v.abs() < PIVOT_TOL {
                continue;
            }
            head.push((r, p, v));
            col_active[p] = false;
            row_active[r] = false;
            for &q in &row_entries[r] {
                if col_active[q] {
                    col_count[q] -= 1;
                    if col_count[q] == 1 {
                        stack.push(q);
                    }
                }
            }
        }

        let mut row_count = vec![0usize; m];
        for r in 0..m {
            if row_active[r] {
                row_count[r] = row_entries[r].iter().filter(|&&p| col_active[p]).count();
            }
        }
        let mut tail: Vec<(usize, usize, f64)> = Vec::new();
        let mut stack: Vec<usize> = (0..m).filter(|&r| row_active[r] && row_count[r] == 1).collect();
        while let Some(r) = stack.pop() {
            if !row_active[r] || row_count[r] != 1 {
                continue;
            }
            let Some(&p) = row_entries[r].iter().find(|&&p| col_active[p]) else {
                continue;
            };
            let v = cols[p].iter().filter(|e| e.0 == r).map(|e| e.1).sum::<f64>();
            if v.abs() < PIVOT_TOL {
                continue;
            }
            tail.push((r, p, v));
            row_active[r] = false;
            col_active[p] = false;
            for &(r2, v2) in cols[p].iter() {
                if v2 != 0.0 && row_active[r2] {
                    row_count[r2] -= 1;
                    if row_count[r2] == 1 {
                        stack.push(r2);
                    }
                }
            }
        }

        let bump_rows: Vec<usize> = (0..m).filter(|&r| row_active[r]).collect();
        let bump_cols: Vec<usize> = (0..m).filter(|&p| col_active[p]).collect();
        debug_assert_eq!(bump_rows.len(), bump_cols.len());
        let b = bump_cols.len();
        let mut local_row = vec![usize::MAX; m];
        for (i, &r) in bump_rows.iter().enumerate() {
            local_row[r] = i;
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); b];
        for (j, &p) in bump_cols.iter().enumerate() {
            for &(r, v) in cols[p].iter() {
                if v != 0.0 && row_active[r] {
                    rows[local_row[r]].push((j, v));
                }
            }
        }
        let sb = match SparseBump::factor(rows, b) {
            Ok(sb) => sb,
            Err((dcols, drows)) => {
                return Err(Singular {
                    positions: dcols.into_iter().map(|j| bump_cols[j]).collect(),
                    rows: drows.into_iter().map(|i| bump_rows[i]).collect(),
                })
            }
        };

        let mut prow = Vec::with_capacity(m);
        let mut pcol = Vec::with_capacity(m);
        let mut diag = Vec::with_capacity(m);
        for &(r, p, v) in &head {
            prow.push(r);
            pcol.push(p);
            diag.push(v);
        }
        let bump_start = prow.len();
        for k in 0..b {
            prow.push(bump_rows[sb.prow[k]]);
            pcol.push(bump_cols[sb.pcol[k]]);
            diag.push(sb.diag[k]);
        }
        for &(r, p, v) in tail.iter().rev() {
            prow.push(r);
            pcol.push(p);
            diag.push(v);
        }
        let mut row_pivot = vec![0usize; m];
        for (k, &r) in prow.iter().enumerate() {
            row_pivot[r] = k;
        }
        let bump_end = bump_start + b;
        let mut upper = vec![Vec::new(); m];
        for k in 0..m {
            let p = pcol[k];
            let in_bump = k >= bump_start && k < bump_end;
            for &(r, v) in cols[p].iter() {
                if v == 0.0 {
                    continue;
                }
                let i = row_pivot[r];
                if in_bump {
                    if i < bump_start {
                        upper[k].push((i, v));
                    }
                } else if i < k {
                    upper[k].push((i, v));
                }
            }
        }
        Ok(Factor {
            m,
            prow,
            pcol,
            diag,
            upper,
            bump_start,
            bump_len: b,
            bump_l: sb.l,
            bump_u: sb.u,
            etas: Vec::new(),
        })
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = rhs` in place; `rhs` is indexed by row on input and by
    /// basis position on output.
    pub fn ftran(&self, rhs: &mut [f64]) {
        let m = self.m;
        let mut v: Vec<f64> = self.prow.iter().map(|&r| rhs[r]).collect();
        let mut z = vec![0.0; m];
        let bs = self.bump_start;
        let be = bs + self.bump_len;
        for k in (be..m).rev() {
            let zk = v[k] / self.diag[k];
            z[k] = zk;
            if zk != 0.0 {
                for &(i, a) in &self.upper[k] {
                    v[i] -= a * zk;
                }
            }
        }
        if self.bump_len > 0 {
            let b = self.bump_len;
            let mut x: Vec<f64> = v[bs..bs + b].to_vec();
            for k in 0..b {
                let t = x[k];
                if t != 0.0 {
                    for &(i, l) in &self.bump_l[k] {
                        x[i] -= l * t;
                    }
                }
            }
            for k in (0..b).rev() {
                let t: f64 = self.bump_u[k].iter().map(|&(j, u)| u * x[j]).sum();
                x[k] = (x[k] - t) / self.diag[bs + k];
            }
            for k in 0..b {
                z[bs + k] = x[k];
                if x[k] != 0.0 {
                    for &(i, a) in &self.upper[bs + k] {
                        v[i] -= a * x[k];
                    }
                }
            }
        }
        for k in (0..bs).rev() {
            let zk = v[k] / self.diag[k];
            z[k] = zk;
            if zk != 0.0 {
                for &(i, a) in &self.upper[k] {
                    v[i] -= a * zk;
                }
            }
        }
        for k in 0..m {
            rhs[self.pcol[k]] = z[k];
        }
        for eta in &self.etas {
            let xr = rhs[eta.pos] / eta.pivot;
            rhs[eta.pos] = xr;
            if xr != 0.0 {
                for &(i, a) in &eta.entries {
                    rhs[i] -= a * xr;
                }
            }
        }
    }

    /// Solves `B^T y = c` in place; `c` is indexed by basis position on input
    /// and by row on output.
    pub fn btran(&self, c: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for &(i, a) in &eta.entries {
                s -= a * c[i];
            }
            c[eta.pos] = s / eta.pivot;
        }
        let cp: Vec<f64> = self.pcol.iter().map(|&p| c[p]).collect();
        let mut v = vec![0.0; m];
        let bs = self.bump_start;
        let be = bs + self.bump_len;
        for k in 0..bs {
            let mut s = cp[k];
            for &(i, a) in &self.upper[k] {
                s -= a * v[i];
            }
            v[k] = s / self.diag[k];
        }
        if self.bump_len > 0 {
            let b = self.bump_len;
            let mut s = vec![0.0; b];
            for k in 0..b {
                let mut t = cp[bs + k];
                for &(i, a) in &self.upper[bs + k] {
                    t -= a * v[i];
                }
                s[k] = t;
            }
            for k in 0..b {
                let t = s[k] / self.diag[bs + k];
                s[k] = t;
                if t != 0.0 {
                    for &(j, u) in &self.bump_u[k] {
                        s[j] -= u * t;
                    }
                }
            }
            for k in (0..b).rev() {
                let t: f64 = self.bump_l[k].iter().map(|&(i, l)| l * s[i]).sum();
                s[k] -= t;
            }
            for k in 0..b {
                v[bs + k] = s[k];
            }
        }
        for k in be..m {
            let mut s = cp[k];
            for &(i, a) in &self.upper[k] {
                s -= a * v[i];
            }
            v[k] = s / self.diag[k];
        }
        for k in 0..m {
            c[self.prow[k]] = v[k];
        }
    }

    /// Records the replacement of the column at basis position `pos` by a
    /// column whose FTRAN image is `alpha` (indexed by basis position).
    pub fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a.abs() > 1e-14)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta { pos, pivot: alpha[pos], entries });
    }
}

/// Sparse LU of the bump with Markowitz pivot selection and threshold
/// partial pivoting. Indices are local to the bump.
struct SparseBump {
    /// pivot k -> local row / local column
    prow: Vec<usize>,
    pcol: Vec<usize>,
    diag: Vec<f64>,
    l: Vec<Vec<(usize, f64)>>,
    u: Vec<Vec<(usize, f64)>>,
}

const THRESHOLD: f64 = 0.1;
const SEARCH_COLS: usize = 4;

impl SparseBump {
    /// On failure returns the deficient columns and the uncovered rows.
    fn factor(mut rows: Vec<Vec<(usize, f64)>>, b: usize) -> Result<SparseBump, (Vec<usize>, Vec<usize>)> {
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); b];
        let mut col_count = vec![0usize; b];
        for (i, row) in rows.iter().enumerate() {
            for &(j, _) in row {
                col_rows[j].push(i);
                col_count[j] += 1;
            }
        }
        let mut row_done = vec![false; b];
        let mut col_done = vec![false; b];
        let mut prow = Vec::with_capacity(b);
        let mut pcol = Vec::with_capacity(b);
        let mut diag = Vec::with_capacity(b);
        let mut l_local: Vec<Vec<(usize, f64)>> = Vec::with_capacity(b);
        let mut u_local: Vec<Vec<(usize, f64)>> = Vec::with_capacity(b);
        let mut deficient = Vec::new();
        let mut pos = vec![usize::MAX; b];
        let mut remaining = b;
        while remaining > 0 {
            // columns with the fewest entries
            let mut cand: Vec<usize> = Vec::with_capacity(SEARCH_COLS);
            let mut cmin = usize::MAX;
            for j in 0..b {
                if col_done[j] {
                    continue;
                }
                let c = col_count[j];
                if c < cmin {
                    cmin = c;
                    cand.clear();
                }
                if c == cmin && cand.len() < SEARCH_COLS {
                    cand.push(j);
                }
                if cmin == 0 {
                    break;
                }
            }
            let mut best: Option<(usize, usize, f64, usize)> = None;
            for &j in &cand {
                let entries: Vec<(usize, f64)> = col_rows[j]
                    .iter()
                    .filter(|&&i| !row_done[i])
                    .filter_map(|&i| rows[i].iter().find(|e| e.0 == j).map(|e| (i, e.1)))
                    .collect();
                let cmax = entries.iter().fold(0.0f64, |a, e| a.max(e.1.abs()));
                if cmax < PIVOT_TOL {
                    continue;
                }
                for (i, v) in entries {
                    if v.abs() < THRESHOLD * cmax {
                        continue;
                    }
                    let cost = (rows[i].len() - 1) * (col_count[j] - 1);
                    let better = best.map_or(true, |(_, _, bv, bc)| cost < bc || (cost == bc && v.abs() > bv.abs()));
                    if better {
                        best = Some((i, j, v, cost));
                    }
                }
            }
            let Some((pr, pc, piv, _)) = best else {
                // every candidate column is numerically empty
                for &j in &cand {
                    col_done[j] = true;
                    deficient.push(j);
                    remaining -= 1;
                    for &i in &col_rows[j] {
                        rows[i].retain(|e| e.0 != j);
                    }
                }
                continue;
            };
            row_done[pr] = true;
            col_done[pc] = true;
            remaining -= 1;
            let prow_entries: Vec<(usize, f64)> = rows[pr].iter().copied().filter(|e| e.0 != pc).collect();
            for &(j, _) in &prow_entries {
                col_count[j] -= 1;
            }
            let mut lk = Vec::new();
            let others: Vec<usize> = col_rows[pc].iter().copied().filter(|&i| !row_done[i]).collect();
            for i in others {
                let Some(at) = rows[i].iter().position(|e| e.0 == pc) else { continue };
                let l = rows[i][at].1 / piv;
                rows[i].swap_remove(at);
                lk.push((i, l));
                for (k, e) in rows[i].iter().enumerate() {
                    pos[e.0] = k;
                }
                for &(j, u) in &prow_entries {
                    if pos[j] != usize::MAX {
                        rows[i][pos[j]].1 -= l * u;
                    } else {
                        rows[i].push((j, -l * u));
                        col_rows[j].push(i);
                        col_count[j] += 1;
                    }
                }
                for e in rows[i].iter() {
                    pos[e.0] = usize::MAX;
                }
            }
            prow.push(pr);
            pcol.push(pc);
            diag.push(piv);
            l_local.push(lk);
            u_local.push(prow_entries);
            rows[pr].clear();
        }
        if !deficient.is_empty() {
            let uncovered = (0..b).filter(|&i| !row_done[i]).collect();
            return Err((deficient, uncovered));
        }
        let mut kr = vec![0usize; b];
        let mut kc = vec![0usize; b];
        for k in 0..b {
            kr[prow[k]] = k;
            kc[pcol[k]] = k;
        }
        let l = l_local.into_iter().map(|v| v.into_iter().map(|(i, x)| (kr[i], x)).collect()).collect();
        let u = u_local.into_iter().map(|v| v.into_iter().map(|(j, x)| (kc[j], x)).collect()).collect();
        Ok(SparseBump { prow, pcol, diag, l, u })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_cols(a: &[Vec<f64>]) -> Vec<Vec<(usize, f64)>> {
        let m = a.len();
        (0..m)
            .map(|j| (0..m).filter(|&i| a[i][j] != 0.0).map(|i| (i, a[i][j])).collect())
            .collect()
    }

    fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    fn check_solves(a: &[Vec<f64>]) {
        let m = a.len();
        let cols = dense_cols(a);
        let refs: Vec<&[(usize, f64)]> = cols.iter().map(|c| c.as_slice()).collect();
        let f = Factor::new(m, &refs).unwrap();
        let x: Vec<f64> = (0..m).map(|i| 1.0 + i as f64 * 0.5).collect();
        let mut b = mat_vec(a, &x);
        f.ftran(&mut b);
        for i in 0..m {
            assert!((b[i] - x[i]).abs() < 1e-9, "ftran {i}: {} vs {}", b[i], x[i]);
        }
        let at: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| a[j][i]).collect()).collect();
        let mut c = mat_vec(&at, &x);
        f.btran(&mut c);
        for i in 0..m {
            assert!((c[i] - x[i]).abs() < 1e-9, "btran {i}");
        }
    }

    #[test]
    fn triangular_and_bump() {
        check_solves(&[vec![2.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 3.0, 4.0]]);
        check_solves(&[
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 0.0, 0.0, 1.0 + 1e-3],
        ]);
        check_solves(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let cols = dense_cols(&a);
        let refs: Vec<&[(usize, f64)]> = cols.iter().map(|c| c.as_slice()).collect();
        let err = Factor::new(3, &refs).unwrap_err();
        assert_eq!(err.positions.len(), 1);
        assert_eq!(err.rows.len(), 1);
    }

    #[test]
    fn eta_updates_match_refactorization() {
        let a = vec![vec![2.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 3.0]];
        let cols = dense_cols(&a);
        let refs: Vec<&[(usize, f64)]> = cols.iter().map(|c| c.as_slice()).collect();
        let mut f = Factor::new(3, &refs).unwrap();
        let new_col = vec![1.0, 2.0, 1.0];
        let mut alpha = new_col.clone();
        f.ftran(&mut alpha);
        f.push_eta(1, &alpha);
        let mut a2 = a.clone();
        for i in 0..3 {
            a2[i][1] = new_col[i];
        }
        let x = vec![0.3, -1.0, 2.0];
        let mut b = mat_vec(&a2, &x);
        f.ftran(&mut b);
        for i in 0..3 {
            assert!((b[i] - x[i]).abs() < 1e-9);
        }
        let at: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| a2[j][i]).collect()).collect();
        let mut c = mat_vec(&at, &x);
        f.btran(&mut c);
        for i in 0..3 {
            assert!((c[i] - x[i]).abs() < 1e-9);
        }
    }
}
