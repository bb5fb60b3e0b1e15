mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::Rng;
use spanner_core::graph::{all_pairs_distances, build_terminal_pairs, dijkstra_override, metricate, PairMode};
use spanner_core::heuristics::{basic_greedy, verify_spanner};
use spanner_core::instances::{
    generate, read_instance, to_edge_list, write_instance, Density, Family, FileFormat, InstanceSpec, WeightModel,
};
use spanner_core::oracle::oracle_optimum;
use spanner_core::paths::{enumerate_all_bounded, k_shortest_bounded, ENUMERATION_CAP};
use spanner_core::pb::{branch_and_price, PbConfig, SolveStatus};

fn weight_model(i: usize) -> WeightModel {
    [WeightModel::W1, WeightModel::Euc, WeightModel::Wn][i % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn greedy_is_feasible_and_monotone(seed in 0u64..10_000, n in 4usize..25, w in 0usize..3) {
        let g = generate(&InstanceSpec::new(Family::Er, n, Density::Degree(3.0f64.min(n as f64 - 1.5)), weight_model(w), seed)).unwrap().graph;
        let mut last = f64::INFINITY;
        for alpha in [1.0, 1.25, 1.5, 2.0, 3.0, 5.0] {
            let bg = basic_greedy(&g, alpha);
            let v = verify_spanner(&g, alpha, &bg.edge_ids, PairMode::AllPairs).unwrap();
            prop_assert!(v.feasible, "alpha {alpha}");
            prop_assert!(bg.total_weight <= last + 1e-9, "alpha {alpha}: {} > {last}", bg.total_weight);
            last = bg.total_weight;
        }
    }

    #[test]
    fn greedy_is_never_below_the_optimum(seed in 0u64..10_000, n in 4usize..10, alpha in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0])) {
        let g = common::random_connected(n, 0.4, seed, &mut |r| r.gen_range(1..=9) as f64);
        prop_assume!(g.edge_count() <= 22);
        let opt = oracle_optimum(&g, alpha).unwrap().total_weight;
        prop_assert!(basic_greedy(&g, alpha).total_weight >= opt);
    }

    #[test]
    fn adjacent_feasibility_implies_all_pairs(seed in 0u64..10_000, n in 3usize..13, alpha in 1.0f64..4.0, keep in 0.3f64..1.0) {
        let g = common::random_connected(n, 0.4, seed, &mut |r| r.gen_range(1..=9) as f64);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let h: Vec<usize> = (0..g.edge_count()).filter(|_| rng.gen_bool(keep)).collect();
        let adj = verify_spanner(&g, alpha, &h, PairMode::Adjacent).unwrap();
        let all = verify_spanner(&g, alpha, &h, PairMode::AllPairs).unwrap();
        if adj.feasible {
            prop_assert!(all.feasible);
            prop_assert!(all.worst_ratio <= alpha + 1e-9);
        }
    }

    #[test]
    fn ksp_is_a_prefix_of_enumeration(seed in 0u64..10_000, n in 3usize..13, k in 1usize..12, alpha in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0])) {
        let g = common::random_connected(n, 0.35, seed, &mut |r| r.gen_range(1..=4) as f64);
        let dm = all_pairs_distances(&g).unwrap();
        for pair in build_terminal_pairs(&g, &dm, alpha, PairMode::AllPairs).unwrap().iter().take(6) {
            let all = enumerate_all_bounded(&g, &dm, pair, ENUMERATION_CAP).unwrap();
            let ksp = k_shortest_bounded(&g, &dm, pair, k);
            prop_assert_eq!(ksp.len(), all.len().min(k));
            for (a, b) in ksp.iter().zip(&all) {
                prop_assert_eq!(&a.edges, &b.edges);
                prop_assert!(a.is_valid(&g) && a.weight <= pair.budget + 1e-9);
            }
        }
    }

    #[test]
    fn metrication_keeps_distances_and_optimum(seed in 0u64..10_000, n in 4usize..9, alpha in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0])) {
        let g = common::random_connected(n, 0.5, seed, &mut |r| r.gen_range(1..=n) as f64);
        prop_assume!(g.edge_count() <= 20);
        let m = metricate(&g).unwrap();
        let (d0, d1) = (all_pairs_distances(&g).unwrap(), all_pairs_distances(&m.graph).unwrap());
        for u in 0..n {
            prop_assert_eq!(d0.row(u), d1.row(u));
        }
        prop_assert_eq!(oracle_optimum(&g, alpha).unwrap().total_weight, oracle_optimum(&m.graph, alpha).unwrap().total_weight);
    }

    #[test]
    fn incumbents_verify_on_all_pairs(seed in 0u64..10_000, n in 4usize..12, w in 0usize..3, alpha in prop::sample::select(vec![1.5, 2.0, 3.0])) {
        let g = generate(&InstanceSpec::new(Family::Er, n, Density::Relative(0.4), weight_model(w), seed)).unwrap().graph;
        let r = branch_and_price(&g, &PbConfig::new(alpha)).unwrap();
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        let best = r.best.unwrap();
        prop_assert!(verify_spanner(&g, alpha, &best.edge_ids, PairMode::AllPairs).unwrap().feasible);
        prop_assert!(r.dual_bound <= r.primal_bound + 1e-9);
    }
}

#[test]
fn zero_override_reaches_everything_at_zero() {
    let g = common::random_connected(9, 0.3, 4, &mut |r| r.gen_range(1..=5) as f64);
    let zero: HashMap<usize, f64> = (0..g.edge_count()).map(|e| (e, 0.0)).collect();
    assert!(dijkstra_override(&g, 3, &zero).iter().all(|&d| d == 0.0));
}

#[test]
fn generation_is_deterministic() {
    for family in [Family::Er, Family::Wm, Family::Cmp] {
        for w in 0..3 {
            let spec = InstanceSpec::new(family, 30, Density::Degree(8.0), weight_model(w), 17);
            let (a, b) = (generate(&spec).unwrap(), generate(&spec).unwrap());
            assert_eq!(to_edge_list(&a.graph), to_edge_list(&b.graph));
            assert_eq!(a.coords, b.coords);
        }
    }
}

#[test]
fn er_edge_count_tracks_the_target() {
    let (n, p) = (40, 0.2);
    let total: usize = (0..100)
        .map(|s| generate(&InstanceSpec::new(Family::Er, n, Density::Relative(p), WeightModel::W1, s)).unwrap().graph.edge_count())
        .sum();
    let mean = total as f64 / 100.0;
    let target = p * (n * (n - 1) / 2) as f64;
    assert!((mean / target - 1.0).abs() < 0.05, "mean {mean} target {target}");
}

#[test]
fn waxman_density_is_calibrated() {
    // targets the default beta can reach with gamma < 1
    for (n, degree) in [(60, 5.0), (100, 6.0), (200, 8.0)] {
        let total: usize = (0..100)
            .map(|s| generate(&InstanceSpec::new(Family::Wm, n, Density::Degree(degree), WeightModel::Euc, s)).unwrap().graph.edge_count())
            .sum();
        let realized = total as f64 / 100.0;
        let target = degree * n as f64 / 2.0;
        assert!((realized / target - 1.0).abs() <= 0.10, "n {n}: realized {realized} target {target}");
    }
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for w in 0..3 {
        let inst = generate(&InstanceSpec::new(Family::Wm, 40, Density::Degree(6.0), weight_model(w), 3)).unwrap();
        for (format, name) in [(FileFormat::EdgeList, "g.txt"), (FileFormat::Stp, "g.stp")] {
            let path = dir.path().join(name);
            write_instance(&inst, &path, format).unwrap();
            let back = read_instance(&path, format).unwrap();
            assert_eq!(back.graph.node_count(), inst.graph.node_count());
            assert_eq!(back.graph.edges(), inst.graph.edges(), "{name} {w}");
        }
    }
}
