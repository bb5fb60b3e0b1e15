mod common;

use proptest::prelude::*;
use rand::Rng;
use spanner_core::graph::{all_pairs_distances, TerminalPair};
use spanner_core::pricing::{basic_csp, bi_a_star_mu, PricingCache, PricingProblem, MU_INF};

fn case(seed: u64, n: usize, mu: usize) {
    let g = common::random_connected(n, 0.35, seed, &mut |r| r.gen_range(1..=5) as f64);
    let dm = all_pairs_distances(&g).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed ^ 0xabc);
    // dyadic costs keep every sum exact
    let costs: Vec<f64> = (0..g.edge_count())
        .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0..=24) as f64 / 8.0 })
        .collect();
    let u = rng.gen_range(0..n);
    let v = (u + rng.gen_range(1..n)) % n;
    let (u, v) = (u.min(v), u.max(v));
    let alpha = [1.0, 1.5, 2.0, 3.0][rng.gen_range(0..4)];
    let cap = rng.gen_range(1..=40) as f64 / 4.0;
    let pair = TerminalPair { u, v, dist: dm.get(u, v), budget: alpha * dm.get(u, v) };
    let p = PricingProblem { pair, costs: &costs, cost_cap: cap, mu };
    let oracle = common::pareto_front(&g, u, v, &costs, pair.budget, cap);
    let got = bi_a_star_mu(&g, &dm, &p);
    let vals: Vec<(f64, f64)> = got.iter().map(|x| (x.cost, x.path.weight)).collect();
    let want: Vec<(f64, f64)> = oracle.iter().take(mu).copied().collect();
    assert_eq!(vals, want, "seed {seed} n {n} mu {mu}");
    for x in &got {
        assert!(x.path.is_valid(&g));
    }
    let basic = basic_csp(&g, &dm, &p).map(|x| (x.cost, x.path.weight));
    assert_eq!(basic, oracle.first().copied(), "basic seed {seed}");
}

#[test]
fn matches_pareto_oracle_on_fixed_seeds() {
    for seed in 0..300 {
        for mu in [1, 2, 3, MU_INF] {
            case(seed, 4 + (seed as usize % 9), mu);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn matches_pareto_oracle(seed in 1000u64..100_000, n in 3usize..13, mu in prop::sample::select(vec![1usize, 2, 3, MU_INF])) {
        case(seed, n, mu);
    }

    #[test]
    fn pruned_calls_are_empty(seed in 0u64..10_000, n in 4usize..11) {
        // a stored failure stays a failure when costs rise and the cap shrinks
        let g = common::random_connected(n, 0.4, seed, &mut |r| r.gen_range(1..=4) as f64);
        let dm = all_pairs_distances(&g).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let costs: Vec<f64> = (0..g.edge_count()).map(|_| rng.gen_range(0..=16) as f64 / 4.0).collect();
        let pair = TerminalPair { u: 0, v: n - 1, dist: dm.get(0, n - 1), budget: 2.0 * dm.get(0, n - 1) };
        let cap = rng.gen_range(0..=12) as f64 / 4.0;
        let p = PricingProblem { pair, costs: &costs, cost_cap: cap, mu: MU_INF };
        let mut cache = PricingCache::new(1);
        if bi_a_star_mu(&g, &dm, &p).is_empty() {
            cache.store(0, &costs, cap);
            let raised: Vec<f64> = costs.iter().map(|c| c + rng.gen_range(0..=2) as f64 / 4.0).collect();
            let cap2 = cap - rng.gen_range(0..=2) as f64 / 4.0;
            prop_assert!(cache.check(0, &raised, cap2));
            let q = PricingProblem { pair, costs: &raised, cost_cap: cap2, mu: MU_INF };
            prop_assert!(bi_a_star_mu(&g, &dm, &q).is_empty());
        }
    }
}
