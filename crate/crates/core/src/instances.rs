//! Instance generators (Erdős-Rényi, Waxman, complete), the small witness
//! graphs, and edge-list / SteinLib file I/O.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_graph, GraphError, WeightedGraph};

/// Cap on connectivity resampling attempts.
pub const MAX_RESAMPLES: u64 = 1000;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),
    #[error("no connected sample after {attempts} attempts (n = {n}, expected degree {expected_degree:.3})")]
    Disconnected { attempts: u64, n: usize, expected_degree: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Er,
    Wm,
    Cmp,
    Fixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "value")]
pub enum Density {
    /// probability that a node pair is an edge
    Relative(f64),
    /// expected average degree
    Degree(f64),
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightModel {
    /// all weights 1
    W1,
    /// euclidean distance between endpoints in the unit square
    Euc,
    /// uniform integers in `1..=n`
    Wn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub family: Family,
    pub n: usize,
    pub density: Density,
    pub weight: WeightModel,
    pub seed: u64,
    pub waxman_beta: f64,
}

impl InstanceSpec {
    pub fn new(family: Family, n: usize, density: Density, weight: WeightModel, seed: u64) -> Self {
        InstanceSpec { family, n, density, weight, seed, waxman_beta: 0.14 }
    }

    /// `{family}_n{n}_{weights}_s{seed}`, e.g. `er_n20_wn_s3`.
    pub fn name(&self) -> String {
        let fam = match self.family {
            Family::Er => "er",
            Family::Wm => "wm",
            Family::Cmp => "cmp",
            Family::Fixture => "fixture",
        };
        let w = match self.weight {
            WeightModel::W1 => "w1",
            WeightModel::Euc => "euc",
            WeightModel::Wn => "wn",
        };
        format!("{fam}_n{}_{w}_s{}", self.n, self.seed)
    }

    /// Edge probability (ER) or target relative density (WM).
    fn relative_density(&self) -> Result<f64, InstanceError> {
        let n = self.n as f64;
        match (self.family, self.density) {
            (Family::Cmp, _) | (_, Density::Complete) => Ok(1.0),
            (_, Density::Relative(r)) if r > 0.0 && r <= 1.0 => Ok(r),
            (_, Density::Degree(d)) if d > 0.0 && d < n - 1.0 => Ok(d / (n - 1.0)),
            (_, d) => Err(InstanceError::InvalidSpec(format!("density {d:?} out of range for n = {}", self.n))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Spec(InstanceSpec),
    File(String),
    Fixture(String),
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: WeightedGraph,
    pub coords: Option<Vec<(f64, f64)>>,
    pub provenance: Provenance,
    /// rejected disconnected samples before this one
    pub resamples: u64,
}

impl Instance {
    pub fn name(&self) -> String {
        match &self.provenance {
            Provenance::Spec(s) => s.name(),
            Provenance::File(p) => p.clone(),
            Provenance::Fixture(f) => f.clone(),
        }
    }
}

fn is_connected(n: usize, edges: &[(usize, usize, f64)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = n;
    for &(u, v, _) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            comps -= 1;
        }
    }
    comps <= 1
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Draws an instance. Disconnected samples are rejected and redrawn from
/// the next random stream of the same seed.
pub fn generate(spec: &InstanceSpec) -> Result<Instance, InstanceError> {
    if spec.n < 2 {
        return Err(InstanceError::InvalidSpec(format!("n = {} is below 2", spec.n)));
    }
    if spec.family == Family::Fixture {
        return Err(InstanceError::InvalidSpec("fixtures are constructed, not generated".into()));
    }
    if spec.family == Family::Wm && !(spec.waxman_beta > 0.0) {
        return Err(InstanceError::InvalidSpec(format!("waxman beta {} must be positive", spec.waxman_beta)));
    }
    let rho = spec.relative_density()?;
    let n = spec.n;
    for attempt in 0..MAX_RESAMPLES {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(attempt);
        let needs_coords = spec.family == Family::Wm || spec.weight == WeightModel::Euc;
        let coords: Option<Vec<(f64, f64)>> =
            needs_coords.then(|| (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect());
        let mut pairs = Vec::new();
        match spec.family {
            Family::Cmp => {
                for u in 0..n {
                    for v in u + 1..n {
                        pairs.push((u, v));
                    }
                }
            }
            Family::Er => {
                for u in 0..n {
                    for v in u + 1..n {
                        if rng.gen_bool(rho) {
                            pairs.push((u, v));
                        }
                    }
                }
            }
            Family::Wm => {
                let c = coords.as_ref().expect("waxman coordinates");
                let mut l: f64 = 0.0;
                for u in 0..n {
                    for v in u + 1..n {
                        l = l.max(dist(c[u], c[v]));
                    }
                }
                let scale = spec.waxman_beta * l.max(f64::MIN_POSITIVE);
                let mut s = Vec::with_capacity(n * (n - 1) / 2);
                for u in 0..n {
                    for v in u + 1..n {
                        s.push((u, v, (-dist(c[u], c[v]) / scale).exp()));
                    }
                }
                let gamma = waxman_gamma(rho * (n * (n - 1) / 2) as f64, s.iter().map(|t| t.2).sum());
                for (u, v, sv) in s {
                    if rng.gen_bool((gamma * sv).clamp(0.0, 1.0)) {
                        pairs.push((u, v));
                    }
                }
            }
            Family::Fixture => unreachable!(),
        }
        let edges: Vec<(usize, usize, f64)> = pairs
            .into_iter()
            .map(|(u, v)| {
                let w = match spec.weight {
                    WeightModel::W1 => 1.0,
                    WeightModel::Wn => rng.gen_range(1..=n) as f64,
                    WeightModel::Euc => {
                        let c = coords.as_ref().expect("coordinates");
                        dist(c[u], c[v]).max(1e-12)
                    }
                };
                (u, v, w)
            })
            .collect();
        if !is_connected(n, &edges) {
            continue;
        }
        let graph = build_graph(n, &edges)?;
        return Ok(Instance { graph, coords, provenance: Provenance::Spec(*spec), resamples: attempt });
    }
    Err(InstanceError::Disconnected { attempts: MAX_RESAMPLES, n, expected_degree: rho * (n - 1) as f64 })
}

/// Waxman scale factor hitting `target_edges` in expectation, clamped to
/// `(0, 1]`.
pub fn waxman_gamma(target_edges: f64, sum_of_factors: f64) -> f64 {
    if sum_of_factors <= 0.0 {
        return 1.0;
    }
    (target_edges / sum_of_factors).clamp(f64::MIN_POSITIVE, 1.0)
}

/// Unit-weight 4-cycle 0-1-2-3-0.
pub fn make_c4_witness() -> Instance {
    let graph = build_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).expect("c4");
    Instance { graph, coords: None, provenance: Provenance::Fixture("c4".into()), resamples: 0 }
}

/// K5 on nodes 0..4 whose Hamilton cycle 0-1-2-3-4-0 is subdivided: node
/// `5 + i` splits edge {i, i+1 mod 5}. The chords {i, i+2 mod 5} stay.
/// Unit weights, 10 nodes, 15 edges.
pub fn make_k5_subdivision_witness() -> Instance {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, 5 + i, 1.0));
        edges.push((5 + i, (i + 1) % 5, 1.0));
    }
    for i in 0..5 {
        edges.push((i, (i + 2) % 5, 1.0));
    }
    let graph = build_graph(10, &edges).expect("k5 subdivision");
    Instance { graph, coords: None, provenance: Provenance::Fixture("k5_subdivision".into()), resamples: 0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    EdgeList,
    Stp,
}

impl FileFormat {
    /// `.stp` files are SteinLib, everything else edge lists.
    pub fn from_path(path: &Path) -> FileFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("stp") => FileFormat::Stp,
            _ => FileFormat::EdgeList,
        }
    }
}

/// Edge list text: `n m`, then `u v w` per edge in id order.
pub fn to_edge_list(g: &WeightedGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", g.node_count(), g.edge_count());
    for e in g.edges() {
        let _ = writeln!(s, "{} {} {}", e.u, e.v, e.w);
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> InstanceError {
    InstanceError::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, InstanceError> {
    let t = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    t.parse().map_err(|_| perr(line, format!("bad {what} '{t}'")))
}

/// Parses edge list text. Blank lines and lines starting with `#` are
/// skipped.
pub fn parse_edge_list(text: &str) -> Result<WeightedGraph, InstanceError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let mut it = l.split_whitespace();
        if header.is_none() {
            let n = num(it.next(), line, "node count")?;
            let m = num(it.next(), line, "edge count")?;
            header = Some((n, m));
        } else {
            let u: usize = num(it.next(), line, "endpoint")?;
            let v: usize = num(it.next(), line, "endpoint")?;
            let w: f64 = num(it.next(), line, "weight")?;
            if it.next().is_some() {
                return Err(perr(line, "trailing tokens"));
            }
            edges.push((u, v, w));
        }
        if let Some((n, _)) = header {
            if let Some(&(u, v, w)) = edges.last() {
                if u >= n || v >= n || u == v || !(w > 0.0) || !w.is_finite() {
                    return Err(perr(line, format!("invalid edge {u} {v} {w}")));
                }
            }
        }
    }
    let (n, m) = header.ok_or_else(|| perr(last.max(1), "missing header"))?;
    if edges.is_empty() {
        return Err(perr(last.max(1), "empty edge section"));
    }
    if edges.len() != m {
        return Err(perr(last, format!("header announces {m} edges, found {}", edges.len())));
    }
    Ok(build_graph(n, &edges)?)
}

/// SteinLib text with the graph section only.
pub fn to_stp(g: &WeightedGraph) -> String {
    let mut s = String::from("33D32945 STP File, STP Format Version 1.0\n\nSECTION Graph\n");
    let _ = writeln!(s, "Nodes {}", g.node_count());
    let _ = writeln!(s, "Edges {}", g.edge_count());
    for e in g.edges() {
        let _ = writeln!(s, "E {} {} {}", e.u + 1, e.v + 1, e.w);
    }
    s.push_str("END\n\nEOF\n");
    s
}

/// Reads the graph section of a SteinLib file (1-based node ids are shifted
/// to 0-based); other sections are skipped.
pub fn parse_stp(text: &str) -> Result<WeightedGraph, InstanceError> {
    let mut in_graph = false;
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        let l = raw.trim();
        let mut it = l.split_whitespace();
        let Some(first) = it.next() else { continue };
        match first.to_ascii_uppercase().as_str() {
            "SECTION" => in_graph = it.next().is_some_and(|s| s.eq_ignore_ascii_case("graph")),
            "END" => in_graph = false,
            "NODES" if in_graph => n = Some(num(it.next(), line, "node count")?),
            "E" | "A" if in_graph => {
                let u: usize = num(it.next(), line, "endpoint")?;
                let v: usize = num(it.next(), line, "endpoint")?;
                let w: f64 = num(it.next(), line, "weight")?;
                if u == 0 || v == 0 {
                    return Err(perr(line, "node ids are 1-based"));
                }
                edges.push((u - 1, v - 1, w));
            }
            _ => {}
        }
    }
    let n = n.ok_or_else(|| perr(last.max(1), "missing Nodes line in graph section"))?;
    if edges.is_empty() {
        return Err(perr(last.max(1), "empty edge section"));
    }
    Ok(build_graph(n, &edges)?)
}

pub fn read_instance(path: &Path, format: FileFormat) -> Result<Instance, InstanceError> {
    let text = std::fs::read_to_string(path)?;
    let graph = match format {
        FileFormat::EdgeList => parse_edge_list(&text)?,
        FileFormat::Stp => parse_stp(&text)?,
    };
    Ok(Instance { graph, coords: None, provenance: Provenance::File(path.display().to_string()), resamples: 0 })
}

pub fn write_instance(instance: &Instance, path: &Path, format: FileFormat) -> Result<(), InstanceError> {
    let text = match format {
        FileFormat::EdgeList => to_edge_list(&instance.graph),
        FileFormat::Stp => to_stp(&instance.graph),
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub provenance: Provenance,
    pub nodes: usize,
    pub edges: usize,
    pub resamples: u64,
    pub coords: Option<Vec<(f64, f64)>>,
}

/// Path of the JSON metadata file next to an instance file.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

pub fn write_sidecar(instance: &Instance, path: &Path) -> Result<(), InstanceError> {
    let meta = Sidecar {
        provenance: instance.provenance.clone(),
        nodes: instance.graph.node_count(),
        edges: instance.graph.edge_count(),
        resamples: instance.resamples,
        coords: instance.coords.clone(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar, InstanceError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph() {
        let inst = generate(&InstanceSpec::new(Family::Cmp, 5, Density::Complete, WeightModel::W1, 1)).unwrap();
        assert_eq!(inst.graph.edge_count(), 10);
        assert!(inst.graph.edges().iter().all(|e| e.w == 1.0));
    }

    #[test]
    fn waxman_gamma_clamps() {
        assert_eq!(waxman_gamma(10.0, 5.0), 1.0);
        assert_eq!(waxman_gamma(5.0, 10.0), 0.5);
    }

    #[test]
    fn waxman_infinite_beta_is_complete() {
        let mut spec = InstanceSpec::new(Family::Wm, 8, Density::Relative(1.0), WeightModel::Euc, 3);
        spec.waxman_beta = 1e300;
        assert_eq!(generate(&spec).unwrap().graph.edge_count(), 28);
    }

    #[test]
    fn weight_models() {
        let wn = generate(&InstanceSpec::new(Family::Er, 12, Density::Relative(0.5), WeightModel::Wn, 9)).unwrap();
        assert!(wn.graph.edges().iter().all(|e| e.w.fract() == 0.0 && e.w >= 1.0 && e.w <= 12.0));
        let euc = generate(&InstanceSpec::new(Family::Er, 12, Density::Relative(0.5), WeightModel::Euc, 9)).unwrap();
        let c = euc.coords.as_ref().unwrap();
        assert!(euc.graph.edges().iter().all(|e| (e.w - dist(c[e.u], c[e.v])).abs() < 1e-15));
    }

    #[test]
    fn witnesses() {
        let c4 = make_c4_witness();
        assert_eq!((c4.graph.node_count(), c4.graph.edge_count()), (4, 4));
        let k5 = make_k5_subdivision_witness();
        let g = &k5.graph;
        assert_eq!((g.node_count(), g.edge_count()), (10, 15));
        assert!((0..5).all(|i| g.degree(i) == 4));
        assert!((5..10).all(|i| g.degree(i) == 2));
    }

    #[test]
    fn stp_reader() {
        let text = "33D32945 STP File\nSECTION Comment\nName \"x\"\nEND\nSECTION Graph\nNodes 3\nEdges 2\nE 1 2 3\nE 2 3 1\nEND\nSECTION Terminals\nTerminals 1\nT 1\nEND\nEOF\n";
        let g = parse_stp(text).unwrap();
        assert_eq!(g.edge(0), crate::graph::Edge { u: 0, v: 1, w: 3.0 });
        assert!(parse_stp("SECTION Graph\nNodes 3\nEdges 0\nEND\n").is_err());
        assert!(matches!(parse_stp("SECTION Graph\nNodes 3\nE 1 x 2\nEND\n"), Err(InstanceError::Parse { line: 3, .. })));
    }

    #[test]
    fn edge_list_errors_carry_lines() {
        assert!(matches!(parse_edge_list("3 2\n0 1 1\n1 2 zz\n"), Err(InstanceError::Parse { line: 3, .. })));
        assert!(matches!(parse_edge_list("3 0\n"), Err(InstanceError::Parse { .. })));
        assert!(matches!(parse_edge_list("3 2\n0 1 1\n"), Err(InstanceError::Parse { .. })));
    }
}
