//! Textual LP file format (the CPLEX-style subset read by most solvers).
//!
//! Layout written by [`write_lp`], in this order:
//!
//! 1. `\` comment lines (optional header),
//! 2. `Minimize` then one line ` obj: <terms>` listing every variable in
//!    index order, zero coefficients included, so that a reader assigning
//!    indices by first appearance recovers the original numbering,
//! 3. `Subject To` then one line per row in row order,
//!    ` <row name>: <terms> <= | >= | = <rhs>`, terms in variable index order,
//! 4. `Bounds` then one line per variable in index order: ` <name> = v` for
//!    fixed variables, ` <name> free`, ` lo <= <name> <= hi`, ` <name> >= lo`,
//!    or ` -inf <= <name> <= hi`,
//! 5. `Binaries` listing integer variables with bounds inside `[0, 1]`, then
//!    `Generals` listing the remaining integer variables (each omitted when
//!    empty),
//! 6. `End`.
//!
//! Terms are written as ` + 3 x` / ` - 2.5 y`, numbers in shortest
//! round-trip decimal form. Empty rows are written as `0 <first var>`.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::model::{LinearProgram, RowId, Sense, VarId};
use crate::LpError;

fn write_terms<W: Write>(
    out: &mut W,
    terms: &[(VarId, f64)],
    lp: &LinearProgram,
    keep_zeros: bool,
) -> io::Result<()> {
    let nonzero: Vec<&(VarId, f64)> = terms.iter().filter(|t| keep_zeros || t.1 != 0.0).collect();
    if nonzero.is_empty() {
        if lp.num_vars() > 0 {
            write!(out, " 0 {}", lp.var_name(VarId(0)))?;
        } else {
            write!(out, " 0")?;
        }
        return Ok(());
    }
    for (k, &&(v, a)) in nonzero.iter().enumerate() {
        let sign = if a.is_sign_negative() { "-" } else { "+" };
        if k == 0 && !a.is_sign_negative() {
            write!(out, " {} {}", a, lp.var_name(v))?;
        } else {
            write!(out, " {} {} {}", sign, a.abs(), lp.var_name(v))?;
        }
    }
    Ok(())
}

/// Writes `lp` in LP file format. `header` lines become `\` comments.
pub fn write_lp<W: Write>(lp: &LinearProgram, header: &[String], out: &mut W) -> io::Result<()> {
    for h in header {
        writeln!(out, "\\ {h}")?;
    }
    writeln!(out, "Minimize")?;
    write!(out, " obj:")?;
    let obj: Vec<(VarId, f64)> = (0..lp.num_vars()).map(|j| (VarId(j), lp.objective_coeff(VarId(j)))).collect();
    write_terms(out, &obj, lp, true)?;
    writeln!(out)?;
    writeln!(out, "Subject To")?;
    let rows = lp.row_entries();
    for (i, row) in rows.iter().enumerate() {
        let r = RowId(i);
        write!(out, " {}:", lp.row_name(r))?;
        write_terms(out, row, lp, false)?;
        let op = match lp.row_sense(r) {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        writeln!(out, " {} {}", op, lp.row_rhs(r))?;
    }
    writeln!(out, "Bounds")?;
    for j in 0..lp.num_vars() {
        let v = VarId(j);
        let name = lp.var_name(v);
        let (lo, hi) = lp.bounds(v);
        if lo == hi {
            writeln!(out, " {name} = {lo}")?;
        } else if !lo.is_finite() && !hi.is_finite() {
            writeln!(out, " {name} free")?;
        } else if !hi.is_finite() {
            writeln!(out, " {name} >= {lo}")?;
        } else if !lo.is_finite() {
            writeln!(out, " -inf <= {name} <= {hi}")?;
        } else {
            writeln!(out, " {lo} <= {name} <= {hi}")?;
        }
    }
    let (mut bins, mut gens) = (Vec::new(), Vec::new());
    for j in 0..lp.num_vars() {
        let v = VarId(j);
        if lp.structs[j].integer {
            let (lo, hi) = lp.bounds(v);
            if lo >= 0.0 && hi <= 1.0 {
                bins.push(lp.var_name(v).to_string());
            } else {
                gens.push(lp.var_name(v).to_string());
            }
        }
    }
    if !bins.is_empty() {
        writeln!(out, "Binaries")?;
        for b in &bins {
            writeln!(out, " {b}")?;
        }
    }
    if !gens.is_empty() {
        writeln!(out, "Generals")?;
        for g in &gens {
            writeln!(out, " {g}")?;
        }
    }
    writeln!(out, "End")
}

/// Content of an LP file as read back by [`parse_lp`].
#[derive(Debug, Clone, Default)]
pub struct ParsedLp {
    pub var_names: Vec<String>,
    pub objective: Vec<(usize, f64)>,
    pub rows: Vec<(String, Vec<(usize, f64)>, Sense, f64)>,
    pub bounds: Vec<(f64, f64)>,
    pub integers: Vec<usize>,
}

impl ParsedLp {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Builds a fresh program from the parsed content.
    pub fn to_program(&self) -> Result<LinearProgram, LpError> {
        let mut lp = LinearProgram::new();
        let mut obj = vec![0.0; self.var_names.len()];
        for &(j, c) in &self.objective {
            obj[j] += c;
        }
        for (j, name) in self.var_names.iter().enumerate() {
            let (lo, hi) = self.bounds[j];
            lp.add_named_column(name.clone(), obj[j], &[], lo, hi)?;
        }
        for &j in &self.integers {
            lp.set_integer(VarId(j), true);
        }
        for (name, terms, sense, rhs) in &self.rows {
            let t: Vec<(VarId, f64)> = terms.iter().map(|&(j, a)| (VarId(j), a)).collect();
            lp.add_named_row(name.clone(), &t, *sense, *rhs)?;
        }
        Ok(lp)
    }
}

#[derive(PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Integers,
}

fn parse_num(tok: &str, line: usize) -> Result<f64, LpError> {
    match tok {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok.parse::<f64>().map_err(|_| LpError::Parse { line, msg: format!("bad number '{tok}'") }),
    }
}

struct Names {
    index: HashMap<String, usize>,
    list: Vec<String>,
}

impl Names {
    fn get(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        let j = self.list.len();
        self.index.insert(name.to_string(), j);
        self.list.push(name.to_string());
        j
    }
}

fn parse_terms(toks: &[&str], names: &mut Names, line: usize) -> Result<Vec<(usize, f64)>, LpError> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for &t in toks {
        match t {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => {
                if let Ok(v) = t.parse::<f64>() {
                    coef = Some(v);
                } else {
                    let j = names.get(t);
                    terms.push((j, sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    if coef.is_some_and(|c| c != 0.0) {
        return Err(LpError::Parse { line, msg: "dangling coefficient".into() });
    }
    Ok(terms)
}

/// Parses the subset of the LP format produced by [`write_lp`].
pub fn parse_lp(text: &str) -> Result<ParsedLp, LpError> {
    let mut names = Names { index: HashMap::new(), list: Vec::new() };
    let mut section = Section::None;
    let mut objective = Vec::new();
    let mut rows = Vec::new();
    let mut bounds_raw: Vec<(usize, f64, f64)> = Vec::new();
    let mut integers = Vec::new();
    let mut ended = false;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('\\') {
            continue;
        }
        match l.to_ascii_lowercase().as_str() {
            "minimize" | "minimum" | "min" => {
                section = Section::Objective;
                continue;
            }
            "subject to" | "st" | "s.t." => {
                section = Section::Constraints;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "binaries" | "binary" | "generals" | "general" => {
                section = Section::Integers;
                continue;
            }
            "end" => {
                ended = true;
                break;
            }
            _ => {}
        }
        let (label, body) = match l.split_once(':') {
            Some((a, b)) => (Some(a.trim().to_string()), b),
            None => (None, l),
        };
        let toks: Vec<&str> = body.split_whitespace().collect();
        match section {
            Section::Objective => objective.extend(parse_terms(&toks, &mut names, line)?),
            Section::Constraints => {
                let pos = toks
                    .iter()
                    .position(|t| matches!(*t, "<=" | ">=" | "=" | "=<" | "=>"))
                    .ok_or(LpError::Parse { line, msg: "missing comparison".into() })?;
                let sense = match toks[pos] {
                    "<=" | "=<" => Sense::Le,
                    ">=" | "=>" => Sense::Ge,
                    _ => Sense::Eq,
                };
                let rhs_tok = toks.get(pos + 1).ok_or(LpError::Parse { line, msg: "missing rhs".into() })?;
                let rhs = parse_num(rhs_tok, line)?;
                let terms = parse_terms(&toks[..pos], &mut names, line)?;
                let name = label.unwrap_or_else(|| format!("r{}", rows.len()));
                rows.push((name, terms, sense, rhs));
            }
            Section::Bounds => {
                let b = match toks.as_slice() {
                    [v, "free"] => (names.get(v), f64::NEG_INFINITY, f64::INFINITY),
                    [v, "=", x] => {
                        let x = parse_num(x, line)?;
                        (names.get(v), x, x)
                    }
                    [v, ">=", x] => (names.get(v), parse_num(x, line)?, f64::INFINITY),
                    [v, "<=", x] => (names.get(v), 0.0, parse_num(x, line)?),
                    [lo, "<=", v, "<=", hi] => (names.get(v), parse_num(lo, line)?, parse_num(hi, line)?),
                    _ => return Err(LpError::Parse { line, msg: format!("bad bound '{l}'") }),
                };
                bounds_raw.push(b);
            }
            Section::Integers => {
                for t in toks {
                    integers.push(names.get(t));
                }
            }
            Section::None => return Err(LpError::Parse { line, msg: "content outside a section".into() }),
        }
    }
    if !ended {
        return Err(LpError::Parse { line: text.lines().count(), msg: "missing End".into() });
    }
    let mut bounds = vec![(0.0, f64::INFINITY); names.list.len()];
    for (j, lo, hi) in bounds_raw {
        bounds[j] = (lo, hi);
    }
    Ok(ParsedLp { var_names: names.list, objective, rows, bounds, integers })
}
