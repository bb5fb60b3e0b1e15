//! Benchmark suites.

use std::time::{Duration, Instant};

use clap::ValueEnum;
use spanner_core::graph::WeightedGraph;
use spanner_core::heuristics::gap_percent;
use spanner_core::instances::{generate, Density, Family, InstanceSpec, Provenance, WeightModel};
use spanner_core::oracle::oracle_optimum;

use crate::record::{InstanceInfo, RunRecord};
use crate::{run_solver, InitArg, PairsArg, PricerArg, SolverArg, SolverFlags};

#[derive(Clone, Copy, PartialEq, ValueEnum)]
pub enum Suite {
    /// small ER graphs; PB, AB and the exhaustive oracle must agree
    SmallOracle,
    /// PB configuration variants on ER graphs (degree 4, wn weights, alpha 2)
    Ablation,
    /// PB, AB and BG on ER graphs with 100 nodes (degree 4, wn weights, alpha 2)
    Desk,
}

pub struct Outcome {
    pub records: Vec<RunRecord>,
    pub report: Vec<String>,
    /// false when solvers disagree or a required solve hit a limit
    pub ok: bool,
}

fn base_flags(solver: SolverArg, alpha: f64, limit: Duration) -> SolverFlags {
    SolverFlags {
        solver,
        alpha,
        pairs: PairsArg::Adjacent,
        init: None,
        k: None,
        mu: None,
        pricer: None,
        no_metricate: false,
        no_fix: false,
        no_prune: false,
        time_limit: (solver != SolverArg::Bg).then_some(limit.as_secs_f64()),
        node_limit: None,
    }
}

fn instance(spec: InstanceSpec) -> anyhow::Result<(WeightedGraph, InstanceInfo)> {
    let inst = generate(&spec)?;
    let g = inst.graph;
    let info = InstanceInfo::new(spec.name(), Some(&Provenance::Spec(spec)), g.node_count(), g.edge_count());
    Ok((g, info))
}

fn same(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= 1e-6 * (1.0 + a.abs()),
        _ => false,
    }
}

/// Gap of a greedy run against the best dual bound found on its instance.
fn bg_gap(bg: &RunRecord, dual: f64) -> Option<f64> {
    bg.primal.and_then(|p| gap_percent(p, dual).ok())
}

pub fn run(suite: Suite, count: Option<usize>, seed: u64, nodes: Option<usize>, limit: Duration) -> anyhow::Result<Outcome> {
    match suite {
        Suite::SmallOracle => small_oracle(count.unwrap_or(30), seed, limit),
        Suite::Ablation => ablation(count.unwrap_or(5), seed, nodes.unwrap_or(30), limit),
        Suite::Desk => desk(count.unwrap_or(3), seed, nodes.unwrap_or(100), limit),
    }
}

fn small_oracle(count: usize, seed: u64, limit: Duration) -> anyhow::Result<Outcome> {
    let mut records = Vec::new();
    let mut report = Vec::new();
    let mut agree = 0;
    let mut bg_ok = 0;
    for i in 0..count {
        let s = seed + i as u64;
        let weight = [WeightModel::W1, WeightModel::Euc, WeightModel::Wn][i % 3];
        let alphas: &[f64] = if weight == WeightModel::W1 { &[2.0, 3.0] } else { &[1.5, 2.0, 3.0] };
        let alpha = alphas[(i / 3) % alphas.len()];
        let (g, info) = instance(InstanceSpec::new(Family::Er, 5 + i % 4, Density::Relative(0.5), weight, s))?;
        let pb = run_solver(&g, &info, &base_flags(SolverArg::Pb, alpha, limit), "pb")?;
        let ab = run_solver(&g, &info, &base_flags(SolverArg::Ab, alpha, limit), "ab")?;
        let mut bg = run_solver(&g, &info, &base_flags(SolverArg::Bg, alpha, limit), "bg")?;
        bg.gap_percent = bg_gap(&bg, pb.dual.max(ab.dual));
        let t = Instant::now();
        let opt = oracle_optimum(&g, alpha)?;
        let mut or = RunRecord::primal_only(&info, "oracle", alpha, opt.total_weight, opt.edge_ids, t.elapsed().as_secs_f64());
        or.status = "optimal".into();
        or.dual = opt.total_weight;
        or.gap_percent = Some(0.0);
        let ok = pb.status == "optimal" && ab.status == "optimal" && same(pb.primal, or.primal) && same(ab.primal, or.primal);
        if ok {
            agree += 1;
        } else {
            report.push(format!("mismatch {} alpha {alpha}: pb {:?} ab {:?} oracle {}", info.name, pb.primal, ab.primal, opt.total_weight));
        }
        if bg.primal.is_some_and(|w| w >= opt.total_weight - 1e-6 * (1.0 + w)) {
            bg_ok += 1;
        }
        records.extend([pb, ab, bg, or]);
    }
    report.push(format!("small-oracle: {count} instances, pb/ab/oracle agree on {agree}, bg >= optimum on {bg_ok}"));
    Ok(Outcome { records, report, ok: agree == count && bg_ok == count })
}

/// PB variants named after the toggle they switch off.
fn ablation_variants(alpha: f64, limit: Duration) -> Vec<(&'static str, SolverFlags)> {
    let base = base_flags(SolverArg::Pb, alpha, limit);
    vec![
        ("pb", base.clone()),
        ("pb_no_metricate", SolverFlags { no_metricate: true, ..base.clone() }),
        ("pb_all_pairs", SolverFlags { pairs: PairsArg::All, ..base.clone() }),
        ("pb_no_fix", SolverFlags { no_fix: true, ..base.clone() }),
        ("pb_simple_init", SolverFlags { init: Some(InitArg::Ksp1), ..base.clone() }),
        ("pb_no_prune", SolverFlags { no_prune: true, ..base.clone() }),
        ("pb_basic_pricer", SolverFlags { pricer: Some(PricerArg::Basic), ..base.clone() }),
        ("pb_mu1", SolverFlags { mu: Some(1), ..base.clone() }),
    ]
}

fn ablation(count: usize, seed: u64, n: usize, limit: Duration) -> anyhow::Result<Outcome> {
    let mut records = Vec::new();
    let mut report = Vec::new();
    let mut ok = true;
    for i in 0..count {
        let (g, info) = instance(InstanceSpec::new(Family::Er, n, Density::Degree(4.0), WeightModel::Wn, seed + i as u64))?;
        let mut optimum: Option<f64> = None;
        for (label, flags) in ablation_variants(2.0, limit) {
            let r = run_solver(&g, &info, &flags, label)?;
            if r.status == "optimal" {
                match optimum {
                    None => optimum = r.primal,
                    Some(o) if !same(Some(o), r.primal) => {
                        ok = false;
                        report.push(format!("mismatch {} {label}: {:?} vs {o}", info.name, r.primal));
                    }
                    _ => {}
                }
            }
            records.push(r);
        }
    }
    report.push(format!("ablation: {count} instances x {} variants, optima {}", ablation_variants(2.0, limit).len(), if ok { "agree" } else { "differ" }));
    Ok(Outcome { records, report, ok })
}

fn desk(count: usize, seed: u64, n: usize, limit: Duration) -> anyhow::Result<Outcome> {
    let mut records = Vec::new();
    let mut report = Vec::new();
    let mut solved = 0;
    for i in 0..count {
        let (g, info) = instance(InstanceSpec::new(Family::Er, n, Density::Degree(4.0), WeightModel::Wn, seed + i as u64))?;
        let mut best_dual: f64 = 0.0;
        for solver in [SolverArg::Pb, SolverArg::Ab, SolverArg::Bg] {
            let label = crate::solver_label(solver);
            let mut r = run_solver(&g, &info, &base_flags(solver, 2.0, limit), label)?;
            if solver == SolverArg::Bg {
                r.gap_percent = bg_gap(&r, best_dual);
            } else {
                best_dual = best_dual.max(r.dual);
            }
            if solver == SolverArg::Pb && r.status == "optimal" {
                solved += 1;
            }
            report.push(format!("{} {label}: {} primal {:?} dual {} in {:.2}s", info.name, r.status, r.primal, r.dual, r.wall_secs));
            records.push(r);
        }
    }
    report.push(format!("desk: pb solved {solved} of {count}"));
    Ok(Outcome { records, report, ok: solved == count })
}
