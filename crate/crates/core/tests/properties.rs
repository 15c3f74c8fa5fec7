//! Property tests on random instances, each against a brute-force or
//! independently computed reference.

mod common;

use aoi_core::action::{InterferenceSpec, TransmissionSpec};
use aoi_core::age::AgeState;
use aoi_core::channel::LinkStates;
use aoi_core::instance::Instance;
use aoi_core::policy::age_debt::{expected_drifts, single_hop_bound_decide, DebtModel, DebtState, IntermediateQueues};
use aoi_core::policy::age_difference::{ad_decide, age_difference_weights};
use aoi_core::policy::stationary::{
    frequencies_from_distribution, optimize_distribution, project_to_simplex, reduce_to_single_hop,
    weighted_objective, SingleHopProblem, SolverParams, SrTerm,
};
use aoi_core::sim::{run_simulation, SimulationConfig};
use aoi_core::topology::{NetworkTopology, NodeId, UNREACHABLE};
use aoi_core::flow::{DestinationSpec, FlowSpec};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Expected weighted age over commissioned and destination nodes after
/// `action`, by enumerating every link outcome.
fn expected_next_c(instance: &Instance, ages: &AgeState, action: usize) -> f64 {
    all_link_outcomes(instance)
        .iter()
        .map(|(p, links)| p * step(instance, ages, action, links).relay_weighted_sum(instance.flows()))
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_actions_respect_roles(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 6, 4);
        for a in inst.actions().actions() {
            for t in a.transmissions() {
                let f = &inst.flows()[t.flow];
                prop_assert!(f.can_transmit(t.from), "{t:?}");
                prop_assert!(f.can_receive(t.to), "{t:?}");
                let e = inst.topology().edge(t.edge);
                prop_assert!((e.u, e.v) == (t.from, t.to) || (e.v, e.u) == (t.from, t.to));
            }
        }
    }

    #[test]
    fn explicit_actions_reject_role_violations(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 5, 3);
        let topo = NetworkTopology::validate(&inst.topology().to_raw()).unwrap();
        let specs: Vec<FlowSpec> = inst.flows().iter().map(|f| f.to_spec()).collect();
        let f = &inst.flows()[0];
        // An edge whose receiver is not allowed to hold the flow.
        let bad = inst.topology().edges().iter().find_map(|e| {
            if f.can_transmit(e.u) && !f.can_receive(e.v) {
                Some((e.u, e.v))
            } else if f.can_transmit(e.v) && !f.can_receive(e.u) {
                Some((e.v, e.u))
            } else {
                None
            }
        });
        prop_assume!(bad.is_some());
        let (from, to) = bad.unwrap();
        let spec = InterferenceSpec::Explicit {
            actions: vec![vec![TransmissionSpec { from, to, flow: 0 }]],
        };
        prop_assert!(Instance::new(topo, &specs, spec).is_err());
    }

    #[test]
    fn constrained_hops_match_bfs(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 6, 4);
        let topo = inst.topology();
        for f in inst.flows() {
            let from = f.source();
            let first: Vec<_> = topo.neighbors(from).iter().map(|&(_, e)| e).collect();
            // Plain BFS over nodes allowed to forward the flow.
            let n = topo.node_count();
            let mut dist = vec![UNREACHABLE; n];
            dist[from.index()] = 0;
            let mut frontier = vec![from];
            let mut d = 0;
            while !frontier.is_empty() {
                d += 1;
                let mut next = vec![];
                for u in frontier {
                    if u != from && !(f.can_transmit(u) && f.can_receive(u)) {
                        continue;
                    }
                    for &(v, _) in topo.neighbors(u) {
                        if dist[v.index()] == UNREACHABLE {
                            dist[v.index()] = d;
                            next.push(v);
                        }
                    }
                }
                frontier = next;
            }
            for to in topo.nodes().filter(|&v| v != from) {
                prop_assert_eq!(inst.constrained_min_hops(f.id(), from, to, &first), dist[to.index()], "to {}", to);
            }
        }
    }

    #[test]
    fn weighted_age_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 6, 4);
        let ages = random_ages(&mut r, &inst, 30);
        let a = r.gen_range(0..inst.actions().len());
        let links = LinkStates::sample(inst.topology(), &mut r);
        let next = step(&inst, &ages, a, &links);
        let c0 = ages.relay_weighted_sum(inst.flows());
        let c1 = next.relay_weighted_sum(inst.flows());
        let growth: f64 = inst
            .flows()
            .iter()
            .map(|f| f.tracked_nodes().iter().map(|&j| f.node_weight(j)).sum::<f64>())
            .sum();
        let drop: f64 = inst.actions().actions()[a]
            .transmissions()
            .iter()
            .filter(|t| links.is_on(t.edge))
            .map(|t| {
                let (ai, aj) = (ages.age(t.flow, t.from), ages.age(t.flow, t.to));
                inst.flows()[t.flow].node_weight(t.to) * aj.saturating_sub(ai) as f64
            })
            .sum();
        prop_assert!(close(c1 - c0, growth - drop, 1e-12), "{} vs {}", c1 - c0, growth - drop);
    }

    #[test]
    fn monotone_coupling(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 6, 4);
        let mut low = random_ages(&mut r, &inst, 20);
        let n = inst.topology().node_count();
        let bumped = (0..inst.flows().len())
            .map(|k| (0..n).map(|v| low.age(k, NodeId::from_index(v)) + r.gen_range(0..5)).collect())
            .collect();
        let mut high = AgeState::from_ages(&inst, bumped, 0).unwrap();
        for _ in 0..60 {
            let a = r.gen_range(0..inst.actions().len());
            let links = LinkStates::sample(inst.topology(), &mut r);
            low = step(&inst, &low, a, &links);
            high = step(&inst, &high, a, &links);
            for k in 0..inst.flows().len() {
                for (l, h) in low.flow_ages(k).iter().zip(high.flow_ages(k)) {
                    prop_assert!(h >= l);
                }
            }
        }
    }

    #[test]
    fn line_forwarding_copies_upstream_age(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(3..=6);
        let gammas: Vec<f64> = (1..n).map(|_| r.gen_range(0.5..=1.0)).collect();
        let inst = line_instance(&gammas, InterferenceSpec::SingleTransmitter);
        let forward: Vec<usize> = (1..n)
            .map(|h| {
                inst.actions().actions().iter().position(|a| a.contains(NodeId(h), NodeId(h + 1), 0)).unwrap()
            })
            .collect();
        let mut ages = AgeState::new(&inst);
        for _ in 0..200 {
            let h = r.gen_range(0..n - 1);
            let links = LinkStates::sample(inst.topology(), &mut r);
            let next = step(&inst, &ages, forward[h], &links);
            let (up, down) = (NodeId(h + 1), NodeId(h + 2));
            if links.is_on(inst.actions().actions()[forward[h]].transmissions()[0].edge) {
                prop_assert_eq!(next.age(0, down), ages.age(0, up) + 1);
            } else {
                prop_assert_eq!(next.age(0, down), ages.age(0, down) + 1);
            }
            ages = next;
        }
    }

    #[test]
    fn age_difference_is_one_step_greedy(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 4, 1);
        let ages = random_ages(&mut r, &inst, 25);
        let chosen = ad_decide(&age_difference_weights(&inst, &ages, None));
        let expected: Vec<f64> = (0..inst.actions().len()).map(|a| expected_next_c(&inst, &ages, a)).collect();
        let best = expected.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(close(expected[chosen], best, 1e-12), "{expected:?} chose {chosen}");

        // With the channel observed, the choice is best for the realized links.
        let links = LinkStates::sample(inst.topology(), &mut r);
        let chosen = ad_decide(&age_difference_weights(&inst, &ages, Some(&links)));
        let realized: Vec<f64> = (0..inst.actions().len())
            .map(|a| step(&inst, &ages, a, &links).relay_weighted_sum(inst.flows()))
            .collect();
        let best = realized.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(close(realized[chosen], best, 1e-12));
    }

    #[test]
    fn drift_matches_outcome_enumeration(seed in any::<u64>(), mode in 0usize..3) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 4, 1);
        let mode = [IntermediateQueues::Off, IntermediateQueues::Relays, IntermediateQueues::RelaysAndSource][mode];
        let model = DebtModel::new(&inst, mode);
        let ages = random_ages(&mut r, &inst, 12);
        let mut debts = DebtState::zeros(&model);
        for q in debts.destination.iter_mut().chain(debts.relay.iter_mut()) {
            *q = if r.gen_bool(0.2) { 0.0 } else { r.gen_range(0.0..40.0) };
        }
        let alpha: Vec<f64> = (0..model.pair_count()).map(|_| r.gen_range(0.5..15.0)).collect();
        let drifts = expected_drifts(&model, &inst, &ages, &debts, &alpha, None);
        let outcomes = all_link_outcomes(&inst);
        for a in 0..inst.actions().len() {
            let mut expect = 0.0;
            for (p, links) in &outcomes {
                let next = step(&inst, &ages, a, links);
                let mut d = debts.clone();
                d.update(&model, a, &ages, &next, &alpha);
                expect += p * (d.lyapunov() - debts.lyapunov());
            }
            prop_assert!(close(drifts[a], expect, 1e-9), "action {a}: {} vs {expect}", drifts[a]);
        }
        // Observed links make the drift deterministic.
        let (_, links) = &outcomes[r.gen_range(0..outcomes.len())];
        let observed = expected_drifts(&model, &inst, &ages, &debts, &alpha, Some(links));
        for (a, &v) in observed.iter().enumerate() {
            let next = step(&inst, &ages, a, links);
            let mut d = debts.clone();
            d.update(&model, a, &ages, &next, &alpha);
            prop_assert!(close(v, d.lyapunov() - debts.lyapunov(), 1e-9));
        }
    }

    #[test]
    fn bound_rule_minimizes_the_drift_bound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sources = r.gen_range(1..=6);
        let inst = random_single_hop(&mut r, sources, 0.2);
        let ages = random_ages(&mut r, &inst, 30);
        let q: Vec<f64> = (0..inst.pairs().len()).map(|_| r.gen_range(0.0..50.0)).collect();
        let chosen = single_hop_bound_decide(&inst, &ages, &q).unwrap();
        let bounds = drift_bounds(&inst, &ages, &q);
        let best = bounds.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(close(bounds[chosen], best, 1e-12), "{bounds:?} chose {chosen}");
    }
}

/// Random line carrying one or two sub-path flows.
fn random_path_instance<R: Rng>(r: &mut R) -> Instance {
    let n = r.gen_range(2..=6);
    let gammas: Vec<f64> = (1..n).map(|_| r.gen_range(0.3..=1.0)).collect();
    let base = line_instance(&gammas, InterferenceSpec::SingleTransmitter);
    let topo = NetworkTopology::validate(&base.topology().to_raw()).unwrap();
    let flows: Vec<FlowSpec> = (0..r.gen_range(1..=2))
        .map(|_| {
            let s = r.gen_range(1..n);
            let d = r.gen_range(s + 1..=n);
            FlowSpec {
                source: NodeId(s),
                commissioned: (s + 1..d).map(NodeId).collect(),
                destinations: vec![DestinationSpec::linear(NodeId(d), r.gen_range(0.2..3.0))],
                path: Some((s..=d).map(NodeId).collect()),
            }
        })
        .collect();
    Instance::new(topo, &flows, InterferenceSpec::SingleTransmitter).unwrap()
}

fn random_simplex<R: Rng>(r: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| r.gen_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn reduction_preserves_objective(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_path_instance(&mut r);
        let reduced = reduce_to_single_hop(&inst).unwrap();
        for _ in 0..10 {
            let x = random_simplex(&mut r, inst.actions().len());
            let direct = weighted_objective(&inst, &frequencies_from_distribution(&x, inst.actions()).unwrap()).unwrap();
            prop_assert!(close(direct, reduced.objective(&x), 1e-10), "{direct} vs {}", reduced.objective(&x));
        }
    }

    #[test]
    fn projection_is_nearest_simplex_point(v in prop::collection::vec(-3.0f64..3.0, 1..7)) {
        let p = project_to_simplex(&v);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        // Optimality: (v - p) · (y - p) <= 0 for every vertex y.
        for k in 0..v.len() {
            let dot: f64 = (0..v.len())
                .map(|i| (v[i] - p[i]) * ((i == k) as u8 as f64 - p[i]))
                .sum();
            prop_assert!(dot <= 1e-12);
        }
    }

    #[test]
    fn optimum_ignores_weight_scale(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let mut r = rng(seed);
        let m = r.gen_range(2..=4);
        let terms: Vec<SrTerm> = (0..m - 1)
            .map(|k| SrTerm {
                link: aoi_core::policy::stationary::LinkFlow { from: NodeId(k + 1), to: NodeId(9), flow: k },
                weight: r.gen_range(0.2..3.0),
                gamma: r.gen_range(0.3..=1.0),
            })
            .collect();
        // Action 0 idles; action k + 1 serves term k.
        let coverage: Vec<Vec<usize>> = (0..m - 1).map(|k| vec![k + 1]).collect();
        let scaled: Vec<SrTerm> = terms.iter().map(|t| SrTerm { weight: t.weight * scale, ..t.clone() }).collect();
        let a = optimize_distribution(&SingleHopProblem::new(terms, coverage.clone(), m).unwrap(), &SolverParams::default()).unwrap();
        let b = optimize_distribution(&SingleHopProblem::new(scaled, coverage, m).unwrap(), &SolverParams::default()).unwrap();
        for (x, y) in a.x.iter().zip(&b.x) {
            prop_assert!((x - y).abs() < 1e-5, "{:?} vs {:?}", a.x, b.x);
        }
    }

    #[test]
    fn same_seed_same_run(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 5, 2);
        let cfg = SimulationConfig::new(2_000, seed);
        let mut p1 = aoi_core::policy::stationary::StationaryRandomized::new(random_simplex(&mut r, inst.actions().len())).unwrap();
        let mut p2 = p1.clone();
        let a = run_simulation(&cfg, &inst, &mut p1, seed).unwrap();
        let b = run_simulation(&cfg, &inst, &mut p2, seed).unwrap();
        prop_assert_eq!(a.metrics, b.metrics);
    }
}

#[test]
fn link_frequencies_track_gamma() {
    let mut r = rng(17);
    let raw = random_topology(&mut r, 6, 4, 0.05);
    let topo = NetworkTopology::validate(&raw).unwrap();
    let samples = 20_000;
    let mut hits = vec![0u32; topo.edges().len()];
    for rep in 0..5u64 {
        let mut g = rng(1000 + rep);
        for _ in 0..samples {
            let s = LinkStates::sample(&topo, &mut g);
            for (e, h) in hits.iter_mut().enumerate() {
                *h += s.as_slice()[e] as u32;
            }
        }
    }
    let total = 5.0 * samples as f64;
    for (e, &h) in hits.iter().enumerate() {
        let g = topo.edges()[e].gamma;
        let sigma = (g * (1.0 - g) / total).sqrt();
        assert!((h as f64 / total - g).abs() <= 4.0 * sigma.max(1e-12), "edge {e}");
    }
}
