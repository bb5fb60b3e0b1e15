mod bench;
mod record;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use spanner_core::ab::{build_ab_model, AbLimits, AbOptions};
use spanner_core::graph::{PairMode, WeightedGraph};
use spanner_core::heuristics::{basic_greedy, verify_spanner};
use spanner_core::instances::{
    generate, read_instance, read_sidecar, sidecar_path, write_instance, write_sidecar, Density, Family, FileFormat,
    InstanceSpec, Provenance, WeightModel,
};
use spanner_core::oracle::oracle_optimum;
use spanner_core::pb::{branch_and_price, InitStrategy, PbConfig, Pricer};
use spanner_core::pricing::MU_INF;

use record::{append_jsonl, read_jsonl, summary_csv, InstanceInfo, RunRecord};

pub const EXIT_LIMIT: u8 = 2;
pub const EXIT_USAGE: u8 = 1;

#[derive(Parser)]
#[command(name = "spanner", version, about = "Exact minimum-weight multiplicative spanners")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a random instance and write it with a JSON sidecar
    Generate(GenerateArgs),
    /// Solve one instance file
    Solve(SolveArgs),
    /// Check the stretch of a subgraph (the whole graph by default)
    Verify(VerifyArgs),
    /// Run a benchmark suite and write runs.jsonl and summary.csv
    Bench(BenchArgs),
    /// Write the arc-based model in LP format, plus its fixing ledger
    ExportLp(ExportArgs),
    /// Exhaustive optimum for small instances
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Er,
    Wm,
    Cmp,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightArg {
    W1,
    Euc,
    Wn,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    nodes: usize,
    /// edge probability (ER) or relative density (WM)
    #[arg(long, conflicts_with = "degree")]
    rho: Option<f64>,
    /// expected average degree
    #[arg(long)]
    degree: Option<f64>,
    #[arg(long, value_enum, default_value = "w1")]
    weights: WeightArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.14)]
    beta: f64,
    /// output file; `.stp` selects the SteinLib format, anything else an edge list
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
pub enum SolverArg {
    Pb,
    Ab,
    Bg,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
pub enum PairsArg {
    Adjacent,
    All,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
pub enum InitArg {
    Ksp1,
    #[value(name = "kspk+bg")]
    KspkBg,
    Brute,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
pub enum PricerArg {
    Basic,
    Bia,
}

#[derive(Args, Clone)]
pub struct SolverFlags {
    #[arg(long, value_enum, default_value = "pb")]
    pub solver: SolverArg,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "adjacent")]
    pub pairs: PairsArg,
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// paths per pair for kspk+bg initialization
    #[arg(long)]
    pub k: Option<usize>,
    /// columns per pricing call: 1, 2, 3 or inf
    #[arg(long, value_parser = parse_mu)]
    pub mu: Option<usize>,
    #[arg(long, value_enum)]
    pub pricer: Option<PricerArg>,
    #[arg(long)]
    pub no_metricate: bool,
    #[arg(long)]
    pub no_fix: bool,
    #[arg(long)]
    pub no_prune: bool,
    /// seconds
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<usize>,
}

fn parse_mu(s: &str) -> Result<usize, String> {
    match s {
        "inf" => Ok(MU_INF),
        "1" | "2" | "3" => Ok(s.parse().unwrap()),
        _ => Err(format!("mu must be 1, 2, 3 or inf, not {s}")),
    }
}

impl SolverFlags {
    fn pair_mode(&self) -> PairMode {
        match self.pairs {
            PairsArg::Adjacent => PairMode::Adjacent,
            PairsArg::All => PairMode::AllPairs,
        }
    }

    fn pairs_name(&self) -> &'static str {
        match self.pairs {
            PairsArg::Adjacent => "adjacent",
            PairsArg::All => "all",
        }
    }

    /// Rejects flags the chosen solver does not understand.
    fn check(&self) -> Result<(), String> {
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return Err(format!("--alpha must be a finite number >= 1, not {}", self.alpha));
        }
        if self.time_limit.is_some_and(|t| !(t > 0.0) || !t.is_finite()) {
            return Err("--time-limit must be a positive number of seconds".into());
        }
        let pb_only = [
            ("--init", self.init.is_some()),
            ("--k", self.k.is_some()),
            ("--mu", self.mu.is_some()),
            ("--pricer", self.pricer.is_some()),
            ("--no-prune", self.no_prune),
        ];
        let name = match self.solver {
            SolverArg::Pb => return self.check_pb(),
            SolverArg::Ab => "ab",
            SolverArg::Bg => "bg",
        };
        for (flag, set) in pb_only {
            if set {
                return Err(format!("{flag} only applies to --solver pb, not {name}"));
            }
        }
        if self.solver == SolverArg::Bg {
            let search = [
                ("--pairs", self.pairs != PairsArg::Adjacent),
                ("--no-metricate", self.no_metricate),
                ("--no-fix", self.no_fix),
                ("--time-limit", self.time_limit.is_some()),
                ("--node-limit", self.node_limit.is_some()),
            ];
            for (flag, set) in search {
                if set {
                    return Err(format!("{flag} does not apply to --solver bg"));
                }
            }
        }
        Ok(())
    }

    fn check_pb(&self) -> Result<(), String> {
        if self.k == Some(0) {
            return Err("--k must be positive".into());
        }
        if self.k.is_some() && self.init.is_some_and(|i| i != InitArg::KspkBg) {
            return Err("--k only applies to --init kspk+bg".into());
        }
        if self.pricer == Some(PricerArg::Basic) && self.mu.is_some_and(|m| m != 1) {
            return Err("--pricer basic returns one column per call; use --mu 1 or omit it".into());
        }
        Ok(())
    }

    pub fn pb_config(&self) -> PbConfig {
        let mut c = PbConfig::new(self.alpha);
        c.pairs = self.pair_mode();
        c.init = match self.init.unwrap_or(InitArg::KspkBg) {
            InitArg::Ksp1 => InitStrategy::Ksp1,
            InitArg::KspkBg => InitStrategy::KspBg,
            InitArg::Brute => InitStrategy::Brute,
        };
        if let Some(k) = self.k {
            c.k = k;
        }
        c.pricer = match self.pricer.unwrap_or(PricerArg::Bia) {
            PricerArg::Basic => Pricer::Basic,
            PricerArg::Bia => Pricer::BiAStar,
        };
        c.mu = match (self.mu, c.pricer) {
            (Some(m), _) => m,
            (None, Pricer::Basic) => 1,
            (None, Pricer::BiAStar) => c.mu,
        };
        c.metricate = !self.no_metricate;
        c.fix_mandatory = !self.no_fix;
        c.prune = !self.no_prune;
        c.time_limit = self.time_limit.map(Duration::from_secs_f64);
        c.node_limit = self.node_limit;
        c
    }

    pub fn ab_options(&self) -> AbOptions {
        let mut o = AbOptions::new(self.alpha);
        o.pairs = self.pair_mode();
        o.metricate = !self.no_metricate;
        o.fix_unreachable = !self.no_fix;
        o.fix_mandatory = !self.no_fix;
        o
    }

    pub fn ab_limits(&self) -> AbLimits {
        AbLimits { time_limit: self.time_limit.map(Duration::from_secs_f64), node_limit: self.node_limit }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// instance file (edge list, or SteinLib `.stp`)
    file: PathBuf,
    #[command(flatten)]
    flags: SolverFlags,
    /// JSON-lines file to append the record to; a CSV summary of the whole
    /// file is written next to it
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long)]
    alpha: f64,
    /// edge ids of the subgraph: a run record, a JSON array, or whitespace
    /// separated integers; the whole graph when omitted
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    pairs: PairsArg,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    suite: bench::Suite,
    /// number of instances
    #[arg(long)]
    count: Option<usize>,
    /// first instance seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// node count for the ablation and desk suites
    #[arg(long)]
    nodes: Option<usize>,
    /// seconds per solver run
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// output directory (default: $SPANNER_OUT_DIR, else the current directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    file: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "adjacent")]
    pairs: PairsArg,
    #[arg(long)]
    no_metricate: bool,
    #[arg(long)]
    no_fix: bool,
    /// LP file; the fixing ledger goes to `<out>.fixed.json`
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    file: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Loaded {
    graph: WeightedGraph,
    info: InstanceInfo,
}

fn load(path: &Path) -> anyhow::Result<Loaded> {
    let inst = read_instance(path, FileFormat::from_path(path)).with_context(|| format!("reading {}", path.display()))?;
    let side = sidecar_path(path);
    let provenance = if side.exists() {
        Some(read_sidecar(&side).with_context(|| format!("reading {}", side.display()))?.provenance)
    } else {
        None
    };
    let name = match &provenance {
        Some(Provenance::Spec(s)) => s.name(),
        _ => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    let info = InstanceInfo::new(name, provenance.as_ref(), inst.graph.node_count(), inst.graph.edge_count());
    Ok(Loaded { graph: inst.graph, info })
}

fn out_dir(explicit: Option<PathBuf>) -> PathBuf {
    explicit.or_else(|| std::env::var_os("SPANNER_OUT_DIR").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."))
}

/// Appends records to a JSON-lines file and rewrites its CSV summary.
fn persist(jsonl: &Path, records: &[RunRecord]) -> anyhow::Result<()> {
    append_jsonl(jsonl, records).with_context(|| format!("writing {}", jsonl.display()))?;
    let all = read_jsonl(jsonl)?;
    let csv = jsonl.with_extension("csv");
    std::fs::write(&csv, summary_csv(&all)).with_context(|| format!("writing {}", csv.display()))?;
    Ok(())
}

/// Runs one solver on a graph and returns the record.
pub fn run_solver(g: &WeightedGraph, info: &InstanceInfo, flags: &SolverFlags, label: &str) -> anyhow::Result<RunRecord> {
    Ok(match flags.solver {
        SolverArg::Pb => {
            let r = branch_and_price(g, &flags.pb_config())?;
            RunRecord::from_result(info, label, flags.alpha, flags.pairs_name(), &r)
        }
        SolverArg::Ab => {
            let model = build_ab_model(g, flags.ab_options())?;
            let counts = model.counts.clone();
            let r = model.solve(flags.ab_limits())?;
            let mut rec = RunRecord::from_result(info, label, flags.alpha, flags.pairs_name(), &r);
            rec.flow_vars_total = Some(counts.flow_vars_total);
            rec.unfixed_vars = Some(counts.unfixed_vars);
            rec.construction_secs = Some(counts.construction_secs);
            rec.fixing_secs = Some(counts.fixing_secs);
            rec
        }
        SolverArg::Bg => {
            let t = Instant::now();
            let s = basic_greedy(g, flags.alpha);
            RunRecord::primal_only(info, label, flags.alpha, s.total_weight, s.edge_ids, t.elapsed().as_secs_f64())
        }
    })
}

fn solver_label(s: SolverArg) -> &'static str {
    match s {
        SolverArg::Pb => "pb",
        SolverArg::Ab => "ab",
        SolverArg::Bg => "bg",
    }
}

fn cmd_generate(a: GenerateArgs) -> anyhow::Result<u8> {
    let family = match a.family {
        FamilyArg::Er => Family::Er,
        FamilyArg::Wm => Family::Wm,
        FamilyArg::Cmp => Family::Cmp,
    };
    let density = match (a.rho, a.degree, family) {
        (_, _, Family::Cmp) => Density::Complete,
        (Some(r), None, _) => Density::Relative(r),
        (None, Some(d), _) => Density::Degree(d),
        _ => bail!(Usage("--rho or --degree is required for er and wm".into())),
    };
    let weight = match a.weights {
        WeightArg::W1 => WeightModel::W1,
        WeightArg::Euc => WeightModel::Euc,
        WeightArg::Wn => WeightModel::Wn,
    };
    let mut spec = InstanceSpec::new(family, a.nodes, density, weight, a.seed);
    spec.waxman_beta = a.beta;
    let inst = generate(&spec)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_instance(&inst, &a.out, FileFormat::from_path(&a.out))?;
    write_sidecar(&inst, &sidecar_path(&a.out))?;
    println!(
        "{}",
        serde_json::json!({
            "instance": inst.name(),
            "path": a.out.display().to_string(),
            "nodes": inst.graph.node_count(),
            "edges": inst.graph.edge_count(),
            "resamples": inst.resamples,
        })
    );
    Ok(0)
}

fn cmd_solve(a: SolveArgs) -> anyhow::Result<u8> {
    a.flags.check().map_err(Usage)?;
    let l = load(&a.file)?;
    let rec = run_solver(&l.graph, &l.info, &a.flags, solver_label(a.flags.solver))?;
    println!("{}", serde_json::to_string(&rec)?);
    let target = a.out.or_else(|| std::env::var_os("SPANNER_OUT_DIR").map(|d| PathBuf::from(d).join("runs.jsonl")));
    if let Some(path) = target {
        persist(&path, &[rec.clone()])?;
    }
    Ok(if rec.status == "optimal" || rec.status == "feasible" { 0 } else { EXIT_LIMIT })
}

fn read_solution(path: &Path) -> anyhow::Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
        let arr = v.get("solution").cloned().unwrap_or(v);
        return Ok(serde_json::from_value(arr).context("solution must be a list of edge ids")?);
    }
    text.split_whitespace().map(|t| t.parse::<usize>().with_context(|| format!("bad edge id {t:?}"))).collect()
}

fn cmd_verify(a: VerifyArgs) -> anyhow::Result<u8> {
    let l = load(&a.file)?;
    let ids = match &a.solution {
        Some(p) => read_solution(p)?,
        None => (0..l.graph.edge_count()).collect(),
    };
    if let Some(&bad) = ids.iter().find(|&&e| e >= l.graph.edge_count()) {
        bail!("edge id {bad} out of range ({} edges)", l.graph.edge_count());
    }
    let mode = match a.pairs {
        PairsArg::Adjacent => PairMode::Adjacent,
        PairsArg::All => PairMode::AllPairs,
    };
    let v = verify_spanner(&l.graph, a.alpha, &ids, mode)?;
    println!(
        "{}",
        serde_json::json!({
            "instance": l.info.name,
            "alpha": a.alpha,
            "edges": ids.len(),
            "weight": l.graph.total_weight(&ids),
            "feasible": v.feasible,
            "worst_ratio": v.worst_ratio,
            "worst_pair": v.worst_pair,
        })
    );
    Ok(if v.feasible { 0 } else { EXIT_LIMIT })
}

fn cmd_export(a: ExportArgs) -> anyhow::Result<u8> {
    if !(a.alpha >= 1.0) {
        bail!(Usage(format!("--alpha must be >= 1, not {}", a.alpha)));
    }
    let l = load(&a.file)?;
    let mut o = AbOptions::new(a.alpha);
    o.pairs = match a.pairs {
        PairsArg::Adjacent => PairMode::Adjacent,
        PairsArg::All => PairMode::AllPairs,
    };
    o.metricate = !a.no_metricate;
    o.fix_unreachable = !a.no_fix;
    o.fix_mandatory = !a.no_fix;
    let model = build_ab_model(&l.graph, o)?;
    model.export_lp(&a.out)?;
    let mut ledger = a.out.as_os_str().to_owned();
    ledger.push(".fixed.json");
    std::fs::write(&ledger, serde_json::to_string_pretty(&model.ledger_json())? + "\n")?;
    println!("{}", serde_json::json!({ "lp": a.out.display().to_string(), "ledger": PathBuf::from(ledger).display().to_string(), "counts": model.counts }));
    Ok(0)
}

fn cmd_oracle(a: OracleArgs) -> anyhow::Result<u8> {
    let l = load(&a.file)?;
    let t = Instant::now();
    let s = oracle_optimum(&l.graph, a.alpha)?;
    let mut rec = RunRecord::primal_only(&l.info, "oracle", a.alpha, s.total_weight, s.edge_ids, t.elapsed().as_secs_f64());
    rec.status = "optimal".into();
    rec.dual = s.total_weight;
    rec.gap_percent = Some(0.0);
    println!("{}", serde_json::to_string(&rec)?);
    if let Some(p) = a.out {
        persist(&p, &[rec])?;
    }
    Ok(0)
}

fn cmd_bench(a: BenchArgs) -> anyhow::Result<u8> {
    if !(a.time_limit > 0.0) {
        bail!(Usage("--time-limit must be positive".into()));
    }
    let dir = out_dir(a.out);
    std::fs::create_dir_all(&dir)?;
    let outcome = bench::run(a.suite, a.count, a.seed, a.nodes, Duration::from_secs_f64(a.time_limit))?;
    let jsonl = dir.join("runs.jsonl");
    if jsonl.exists() {
        std::fs::remove_file(&jsonl)?;
    }
    persist(&jsonl, &outcome.records)?;
    for line in &outcome.report {
        println!("{line}");
    }
    println!("wrote {} records to {}", outcome.records.len(), jsonl.display());
    Ok(if outcome.ok { 0 } else { EXIT_LIMIT })
}

/// An error that maps to the usage exit code.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::ExportLp(a) => cmd_export(a),
        Cmd::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(args: &[&str]) -> SolverFlags {
        #[derive(Parser)]
        struct T {
            #[command(flatten)]
            f: SolverFlags,
        }
        let mut v = vec!["t"];
        v.extend_from_slice(args);
        T::try_parse_from(v).unwrap().f
    }

    #[test]
    fn flags_map_to_configs() {
        let f = flags(&["--alpha", "2", "--mu", "inf", "--init", "ksp1", "--no-prune", "--pairs", "all"]);
        let c = f.pb_config();
        assert_eq!(c.mu, MU_INF);
        assert_eq!(c.init, InitStrategy::Ksp1);
        assert!(!c.prune && c.metricate && c.fix_mandatory);
        assert_eq!(c.pairs, PairMode::AllPairs);
        assert_eq!(flags(&["--alpha", "2", "--pricer", "basic"]).pb_config().mu, 1);
        let o = flags(&["--solver", "ab", "--alpha", "1.5", "--no-fix"]).ab_options();
        assert!(!o.fix_unreachable && !o.fix_mandatory && o.bg_bound);
    }

    #[test]
    fn conflicts_are_rejected() {
        assert!(flags(&["--solver", "ab", "--alpha", "2", "--mu", "2"]).check().is_err());
        assert!(flags(&["--solver", "bg", "--alpha", "2", "--no-fix"]).check().is_err());
        assert!(flags(&["--alpha", "2", "--pricer", "basic", "--mu", "3"]).check().is_err());
        assert!(flags(&["--alpha", "0.5"]).check().is_err());
        assert!(flags(&["--alpha", "2", "--init", "ksp1", "--k", "4"]).check().is_err());
        assert!(flags(&["--alpha", "2", "--no-prune", "--mu", "inf"]).check().is_ok());
    }
}
