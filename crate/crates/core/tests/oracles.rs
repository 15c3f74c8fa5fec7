//! Library results against independent reference computations.

mod common;

use aoi_core::experiment::graphs::enumerate_connected_graphs;
use aoi_core::experiment::scenario::Scenario;
use aoi_core::policy::age_debt::AgeDebt;
use aoi_core::policy::baselines::{MaxWeight, RoundRobin};
use aoi_core::policy::dp::{value_iteration, value_iteration_oracle, DpInstance, DpParams};
use aoi_core::sim::{mean_ci, replication_seed, run_replications, SimulationConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Connected graphs up to isomorphism, by trying every relabeling.
fn brute_force_graph_count(n: usize) -> usize {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let perms = permutations(n);
    let mut seen = std::collections::HashSet::new();
    for mask in 0u32..1 << pairs.len() {
        let edges: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &p)| p).collect();
        if !connected(n, &edges) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b]))).collect();
                e.sort();
                e
            })
            .min()
            .unwrap();
        seen.insert(canon);
    }
    seen.len()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(c: &mut Vec<usize>, x: usize) -> usize {
        if c[x] != x {
            let r = find(c, c[x]);
            c[x] = r;
        }
        c[x]
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
        comp[ra] = rb;
    }
    (0..n).all(|v| find(&mut comp, v) == find(&mut comp, 0))
}

#[test]
fn graph_counts_match_brute_force() {
    for n in 1..=5 {
        assert_eq!(enumerate_connected_graphs(n).unwrap().len(), brute_force_graph_count(n), "n = {n}");
    }
}

#[test]
fn enumerated_graphs_are_pairwise_non_isomorphic_and_connected() {
    let graphs = enumerate_connected_graphs(5).unwrap();
    let perms = permutations(5);
    let canon = |edges: &[(usize, usize)]| {
        perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> =
                    edges.iter().map(|&(a, b)| (p[a - 1].min(p[b - 1]), p[a - 1].max(p[b - 1]))).collect();
                e.sort();
                e
            })
            .min()
            .unwrap()
    };
    let forms: std::collections::HashSet<_> = graphs.iter().map(|g| canon(&g.edges)).collect();
    assert_eq!(forms.len(), graphs.len());
    for g in &graphs {
        let zero_based: Vec<(usize, usize)> = g.edges.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
        assert!(connected(5, &zero_based));
    }
}

#[test]
fn replication_seed_is_splitmix64() {
    // First SplitMix64 output for state 0.
    assert_eq!(replication_seed(0, 0), 0xE220_A839_7B1D_CDAF);
}

#[test]
fn confidence_interval_uses_student_t() {
    // t quantile 0.975 with one degree of freedom is 12.7062.
    let ci = mean_ci(&[1.0, 3.0]).ci95.unwrap();
    let half = 12.706_204_736 * 1.0;
    assert!((ci.0 - (2.0 - half)).abs() < 1e-6 && (ci.1 - (2.0 + half)).abs() < 1e-6);
    assert!(mean_ci(&[4.0]).ci95.is_none());
}

#[test]
fn dp_policy_beats_heuristics() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let instance = common::random_single_hop(&mut rng, 3, 0.5);
    let params = DpParams { a_max: 25, ..DpParams::default() };
    let oracle = value_iteration_oracle(&instance, &params, 200_000, 1).unwrap();
    let config = SimulationConfig::new(100_000, 9).with_replications(5);
    let dp = run_replications(&config, &instance, || Ok(Box::new(oracle.solution.policy()))).unwrap();
    let alpha: Vec<f64> = oracle.targets.iter().map(|a| a * 1.05).collect();
    let others = [
        run_replications(&config, &instance, || Ok(Box::new(MaxWeight))).unwrap(),
        run_replications(&config, &instance, || Ok(Box::new(RoundRobin::default()))).unwrap(),
        run_replications(&config, &instance, || Ok(Box::new(AgeDebt::fixed(alpha.clone())))).unwrap(),
    ];
    let half = |s: &aoi_core::sim::ReplicationSummary| s.total_cost.ci95.map_or(0.0, |c| (c.1 - c.0) / 2.0);
    for o in &others {
        assert!(
            dp.total_cost.mean <= o.total_cost.mean + half(&dp) + half(o),
            "dp {} vs {}",
            dp.total_cost.mean,
            o.total_cost.mean
        );
    }
    // The chain's gain and the simulated cost of its policy agree.
    assert!((dp.total_cost.mean - oracle.solution.gain).abs() < 0.02 * oracle.solution.gain);
}

#[test]
fn dp_truncation_is_adequate() {
    let instance = Scenario::FunctionsStar { sources: 4, gamma: 1.0 }.build(0).unwrap();
    let gain = |a_max| {
        let params = DpParams { a_max, ..DpParams::default() };
        value_iteration(&DpInstance::new(&instance, &params).unwrap(), &params).unwrap().gain
    };
    let (small, large) = (gain(12), gain(24));
    assert!((small - large).abs() < 0.005 * large, "{small} vs {large}");
}
