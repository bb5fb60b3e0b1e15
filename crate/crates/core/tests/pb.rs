mod common;

use rand::Rng;
use spanner_core::graph::PairMode;
use spanner_core::pb::{branch_and_price, check_dual_feasibility_exhaustive, InitStrategy, PbConfig, PbSolver, SolveStatus};

fn small(seed: u64) -> (spanner_core::graph::WeightedGraph, f64) {
    let n = 4 + (seed as usize % 5);
    let g = common::random_connected(n, 0.45, seed, &mut |r| r.gen_range(1..=6) as f64);
    let alpha = [1.0, 1.5, 2.0, 3.0][(seed / 5) as usize % 4];
    (g, alpha)
}

#[test]
fn optimum_matches_subset_oracle() {
    let mut tested = 0;
    for seed in 0..80 {
        let (g, alpha) = small(seed);
        if g.edge_count() > 16 {
            continue;
        }
        tested += 1;
        let want = common::subset_optimum(&g, alpha);
        let r = branch_and_price(&g, &PbConfig::new(alpha)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.primal_bound, want, "seed {seed}");
        assert!(r.dual_bound <= r.primal_bound);
    }
    assert!(tested >= 40);
}

#[test]
fn root_value_is_invariant_to_configuration() {
    for seed in 0..40 {
        let (g, alpha) = small(seed);
        let base = PbConfig::new(alpha);
        let mut variants = vec![base.clone()];
        for init in [InitStrategy::Ksp1, InitStrategy::Brute] {
            variants.push(PbConfig { init, ..base.clone() });
        }
        variants.push(PbConfig { pairs: PairMode::AllPairs, ..base.clone() });
        variants.push(PbConfig { fix_mandatory: false, prune: false, ..base.clone() });
        variants.push(PbConfig { mu: 1, pricer: spanner_core::pb::Pricer::Basic, ..base.clone() });
        variants.push(PbConfig { mu: usize::MAX, metricate: false, ..base.clone() });
        let mut roots = Vec::new();
        for cfg in variants {
            let mut s = PbSolver::new(&g, cfg).unwrap();
            let (v, duals) = s.solve_root().unwrap();
            let bad = check_dual_feasibility_exhaustive(s.graph(), s.distances(), s.pairs(), &duals).unwrap();
            assert!(bad.is_empty(), "seed {seed}");
            roots.push(v);
        }
        // all-pairs is a different relaxation; only adjacent variants must agree
        let adj: Vec<f64> = roots.iter().enumerate().filter(|(i, _)| *i != 3).map(|(_, v)| *v).collect();
        for v in &adj {
            assert!((v - adj[0]).abs() < 1e-6, "seed {seed}: {roots:?}");
        }
    }
}
