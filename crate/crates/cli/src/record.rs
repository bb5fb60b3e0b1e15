//! Run records (one JSON object per solver run) and the aggregate CSV.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spanner_core::heuristics::gap_percent;
use spanner_core::instances::{Family, Provenance, WeightModel};
use spanner_core::pb::{SolveResult, SolveStatus};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub family: String,
    pub nodes: usize,
    pub edges: usize,
    pub weight_model: String,
    pub seed: Option<u64>,
    pub solver: String,
    pub alpha: f64,
    pub pairs: String,
    pub status: String,
    pub primal: Option<f64>,
    pub dual: f64,
    pub gap_percent: Option<f64>,
    pub wall_secs: f64,
    pub root_lp: Option<f64>,
    pub initial_columns: usize,
    /// columns added by pricing
    pub columns: usize,
    pub pricing_calls: usize,
    pub pruned_percent: f64,
    pub free_path_percent: f64,
    pub bb_nodes: usize,
    pub lp_pivots: usize,
    pub fixed_edges: usize,
    pub removed_by_metrication: usize,
    pub flow_vars_total: Option<usize>,
    pub unfixed_vars: Option<usize>,
    pub construction_secs: Option<f64>,
    pub fixing_secs: Option<f64>,
    pub solution: Vec<usize>,
}

/// Instance columns of a record, taken from the file's provenance.
pub struct InstanceInfo {
    pub name: String,
    pub family: String,
    pub weight_model: String,
    pub seed: Option<u64>,
    pub nodes: usize,
    pub edges: usize,
}

impl InstanceInfo {
    pub fn new(name: String, provenance: Option<&Provenance>, nodes: usize, edges: usize) -> Self {
        let (family, weight_model, seed) = match provenance {
            Some(Provenance::Spec(s)) => (family_name(s.family), weight_name(s.weight), Some(s.seed)),
            Some(Provenance::Fixture(f)) => (f.clone(), "fixture".into(), None),
            _ => ("file".into(), "file".into(), None),
        };
        InstanceInfo { name, family, weight_model, seed, nodes, edges }
    }
}

pub fn family_name(f: Family) -> String {
    match f {
        Family::Er => "er",
        Family::Wm => "wm",
        Family::Cmp => "cmp",
        Family::Fixture => "fixture",
    }
    .into()
}

pub fn weight_name(w: WeightModel) -> String {
    match w {
        WeightModel::W1 => "w1",
        WeightModel::Euc => "euc",
        WeightModel::Wn => "wn",
    }
    .into()
}

pub fn status_name(s: SolveStatus) -> String {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::BoundOnly => "bound_only",
        SolveStatus::Infeasible => "infeasible",
    }
    .into()
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

impl RunRecord {
    pub fn from_result(info: &InstanceInfo, solver: &str, alpha: f64, pairs: &str, r: &SolveResult) -> Self {
        let primal = r.best.as_ref().map(|b| b.total_weight);
        let gap = primal.and_then(|p| gap_percent(p, r.dual_bound).ok());
        let s = &r.stats;
        RunRecord {
            instance: info.name.clone(),
            family: info.family.clone(),
            nodes: info.nodes,
            edges: info.edges,
            weight_model: info.weight_model.clone(),
            seed: info.seed,
            solver: solver.into(),
            alpha,
            pairs: pairs.into(),
            status: status_name(r.status),
            primal,
            dual: r.dual_bound,
            gap_percent: gap,
            wall_secs: s.wall_secs,
            root_lp: s.root_lp,
            initial_columns: s.initial_columns,
            columns: s.columns,
            pricing_calls: s.pricing_calls,
            pruned_percent: percent(s.pruned_calls, s.pricing_calls),
            free_path_percent: percent(s.free_paths, s.columns),
            bb_nodes: s.nodes,
            lp_pivots: s.lp_pivots,
            fixed_edges: s.fixed_edges,
            removed_by_metrication: s.removed_by_metrication,
            solution: r.best.as_ref().map(|b| b.edge_ids.clone()).unwrap_or_default(),
            ..Default::default()
        }
    }

    /// A heuristic or reference run that only has a primal value.
    pub fn primal_only(info: &InstanceInfo, solver: &str, alpha: f64, weight: f64, edges: Vec<usize>, secs: f64) -> Self {
        RunRecord {
            instance: info.name.clone(),
            family: info.family.clone(),
            nodes: info.nodes,
            edges: info.edges,
            weight_model: info.weight_model.clone(),
            seed: info.seed,
            solver: solver.into(),
            alpha,
            pairs: "all".into(),
            status: "feasible".into(),
            primal: Some(weight),
            dual: 0.0,
            wall_secs: secs,
            solution: edges,
            ..Default::default()
        }
    }
}

pub fn append_jsonl(path: &Path, records: &[RunRecord]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    for r in records {
        writeln!(f, "{}", serde_json::to_string(r).expect("record serializes"))?;
    }
    Ok(())
}

pub fn read_jsonl(path: &Path) -> anyhow::Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn median_iqr(mut xs: Vec<f64>) -> (f64, f64) {
    xs.retain(|x| x.is_finite());
    xs.sort_by(f64::total_cmp);
    (quantile(&xs, 0.5), quantile(&xs, 0.75) - quantile(&xs, 0.25))
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.6}")
    }
}

pub const CSV_HEADER: &str = "family,nodes,weight_model,alpha,solver,runs,optimal,median_wall_secs,iqr_wall_secs,median_gap_percent,iqr_gap_percent,median_bb_nodes,median_pruned_percent,median_free_path_percent,median_unfixed_vars";

/// One row per (family, nodes, weight model, alpha, solver).
pub fn summary_csv(records: &[RunRecord]) -> String {
    let mut groups: BTreeMap<(String, usize, String, String, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.family.clone(), r.nodes, r.weight_model.clone(), format!("{}", r.alpha), r.solver.clone());
        groups.entry(key).or_default().push(r);
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for ((family, nodes, weight, alpha, solver), rs) in groups {
        let optimal = rs.iter().filter(|r| r.status == "optimal").count();
        let (mt, it) = median_iqr(rs.iter().map(|r| r.wall_secs).collect());
        let (mg, ig) = median_iqr(rs.iter().filter_map(|r| r.gap_percent).collect());
        let (mn, _) = median_iqr(rs.iter().map(|r| r.bb_nodes as f64).collect());
        let (mp, _) = median_iqr(rs.iter().map(|r| r.pruned_percent).collect());
        let (mf, _) = median_iqr(rs.iter().map(|r| r.free_path_percent).collect());
        let (mu, _) = median_iqr(rs.iter().filter_map(|r| r.unfixed_vars.map(|v| v as f64)).collect());
        out.push_str(&format!(
            "{family},{nodes},{weight},{alpha},{solver},{},{optimal},{},{},{},{},{},{},{},{}\n",
            rs.len(),
            fmt(mt),
            fmt(it),
            fmt(mg),
            fmt(ig),
            fmt(mn),
            fmt(mp),
            fmt(mf),
            fmt(mu)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(median_iqr(vec![4.0, 1.0, 3.0, 2.0, 5.0]), (3.0, 2.0));
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn summary_groups_by_solver() {
        let a = RunRecord { family: "er".into(), nodes: 5, solver: "pb".into(), alpha: 2.0, wall_secs: 1.0, status: "optimal".into(), ..Default::default() };
        let b = RunRecord { wall_secs: 3.0, ..a.clone() };
        let c = RunRecord { solver: "ab".into(), ..a.clone() };
        let csv = summary_csv(&[a, b, c]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("er,5,,2,ab,1,1,1.000000,0.000000"));
        assert!(lines[2].starts_with("er,5,,2,pb,2,2,2.000000,1.000000"));
    }
}
