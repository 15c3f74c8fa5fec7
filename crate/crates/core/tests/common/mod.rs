//! Random instances and brute-force helpers shared by the integration tests.
#![allow(dead_code)]

use aoi_core::action::InterferenceSpec;
use aoi_core::age::AgeState;
use aoi_core::channel::LinkStates;
use aoi_core::cost::{CostShape, DEFAULT_COST_CAP};
use aoi_core::flow::{DestinationSpec, FlowSpec};
use aoi_core::instance::Instance;
use aoi_core::topology::{EdgeSpec, NetworkTopology, NodeId, RawTopology};
use rand::seq::SliceRandom;
use rand::Rng;

/// Connected graph on `n` nodes: a random spanning tree plus up to `extra`
/// further edges.
pub fn random_topology<R: Rng>(rng: &mut R, n: usize, extra: usize, gamma_lo: f64) -> RawTopology {
    let mut pairs: Vec<(usize, usize)> = (2..=n).map(|v| (rng.gen_range(1..v), v)).collect();
    let mut rest: Vec<(usize, usize)> = (1..=n)
        .flat_map(|u| (u + 1..=n).map(move |v| (u, v)))
        .filter(|p| !pairs.contains(p))
        .collect();
    rest.shuffle(rng);
    pairs.extend(rest.into_iter().take(extra));
    RawTopology {
        node_count: n,
        edges: pairs
            .into_iter()
            .map(|(u, v)| EdgeSpec { u: NodeId(u), v: NodeId(v), gamma: rng.gen_range(gamma_lo..=1.0) })
            .collect(),
    }
}

pub fn random_cost<R: Rng>(rng: &mut R) -> CostShape {
    match rng.gen_range(0..3) {
        0 => CostShape::Linear { slope: rng.gen_range(0.5..3.0) },
        1 => CostShape::Power { exponent: 2.0, scale: rng.gen_range(0.2..1.5) },
        _ => {
            let mut acc = 0.0;
            let values = (0..8)
                .map(|_| {
                    acc += rng.gen_range(0.0..3.0);
                    acc
                })
                .collect();
            CostShape::Table { values }
        }
    }
}

/// One or two flows with random destinations and relays on a random graph,
/// single-transmitter interference.
pub fn random_instance<R: Rng>(rng: &mut R, max_nodes: usize, extra: usize) -> Instance {
    loop {
        let n = rng.gen_range(2..=max_nodes);
        let extra = rng.gen_range(0..=extra);
        let topo = random_topology(rng, n, extra, 0.3);
        let flows: Vec<FlowSpec> = (0..rng.gen_range(1..=2))
            .map(|_| {
                let source = rng.gen_range(1..=n);
                let mut others: Vec<usize> = (1..=n).filter(|&v| v != source).collect();
                others.shuffle(rng);
                let d = rng.gen_range(1..=others.len());
                let destinations = others[..d]
                    .iter()
                    .map(|&v| DestinationSpec {
                        node: NodeId(v),
                        weight: rng.gen_range(0.2..2.0),
                        cost: random_cost(rng),
                        cost_cap: DEFAULT_COST_CAP,
                    })
                    .collect();
                let commissioned = others.iter().filter(|_| rng.gen_bool(0.5)).map(|&v| NodeId(v)).collect();
                FlowSpec { source: NodeId(source), commissioned, destinations, path: None }
            })
            .collect();
        let Ok(topo) = NetworkTopology::validate(&topo) else { continue };
        if let Ok(inst) = Instance::new(topo, &flows, InterferenceSpec::SingleTransmitter) {
            return inst;
        }
    }
}

/// `n - 1` sources each with one link to a hub, random costs and links.
pub fn random_single_hop<R: Rng>(rng: &mut R, sources: usize, gamma_lo: f64) -> Instance {
    let hub = NodeId(sources + 1);
    let topo = NetworkTopology::validate(&RawTopology {
        node_count: sources + 1,
        edges: (1..=sources)
            .map(|i| EdgeSpec { u: NodeId(i), v: hub, gamma: rng.gen_range(gamma_lo..=1.0) })
            .collect(),
    })
    .unwrap();
    let flows: Vec<FlowSpec> = (1..=sources)
        .map(|i| FlowSpec {
            source: NodeId(i),
            commissioned: vec![],
            destinations: vec![DestinationSpec {
                node: hub,
                weight: rng.gen_range(0.2..2.0),
                cost: random_cost(rng),
                cost_cap: DEFAULT_COST_CAP,
            }],
            path: None,
        })
        .collect();
    Instance::new(topo, &flows, InterferenceSpec::SingleTransmitter).unwrap()
}

/// Line `1 - ... - n` carrying one flow `1 -> n` on its fixed path.
pub fn line_instance(gammas: &[f64], interference: InterferenceSpec) -> Instance {
    let n = gammas.len() + 1;
    let topo = NetworkTopology::validate(&RawTopology {
        node_count: n,
        edges: gammas
            .iter()
            .enumerate()
            .map(|(i, &gamma)| EdgeSpec { u: NodeId(i + 1), v: NodeId(i + 2), gamma })
            .collect(),
    })
    .unwrap();
    let flow = FlowSpec {
        source: NodeId(1),
        commissioned: (2..n).map(NodeId).collect(),
        destinations: vec![DestinationSpec::linear(NodeId(n), 1.0)],
        path: Some((1..=n).map(NodeId).collect()),
    };
    Instance::new(topo, &[flow], interference).unwrap()
}

/// Random ages in `1..=max` for every tracked node.
pub fn random_ages<R: Rng>(rng: &mut R, instance: &Instance, max: u64) -> AgeState {
    let n = instance.topology().node_count();
    let ages = instance
        .flows()
        .iter()
        .map(|_| (0..n).map(|_| rng.gen_range(1..=max)).collect())
        .collect();
    AgeState::from_ages(instance, ages, 0).unwrap()
}

/// Every on/off assignment of the links with its probability.
pub fn all_link_outcomes(instance: &Instance) -> Vec<(f64, LinkStates)> {
    let edges = instance.topology().edges();
    (0..1u32 << edges.len())
        .map(|mask| {
            let mut p = 1.0;
            let states = edges
                .iter()
                .enumerate()
                .map(|(e, spec)| {
                    let on = mask >> e & 1 == 1;
                    p *= if on { spec.gamma } else { 1.0 - spec.gamma };
                    on
                })
                .collect();
            (p, LinkStates::from_vec(states))
        })
        .collect()
}

/// Ages after `action` under `links`.
pub fn step(instance: &Instance, ages: &AgeState, action: usize, links: &LinkStates) -> AgeState {
    let mut next = ages.clone();
    next.evolve(instance.flows(), &instance.actions().actions()[action], links).unwrap();
    next
}

/// `Σ_i Q_i (E[g_i(A_i(t+1))] − α_i)` per action, dropping the terms that do
/// not depend on the action.
pub fn drift_bounds(inst: &Instance, ages: &AgeState, q: &[f64]) -> Vec<f64> {
    inst.actions()
        .actions()
        .iter()
        .map(|a| {
            inst.pairs()
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let d = &inst.flows()[p.flow].destinations()[p.dest];
                    let age = ages.age(p.flow, d.node);
                    let grow = d.cost.eval(age + 1);
                    let next = match a.transmissions().iter().find(|t| t.flow == p.flow) {
                        Some(t) => {
                            let g = inst.topology().gamma(t.edge);
                            g * d.cost.eval(1) + (1.0 - g) * grow
                        }
                        None => grow,
                    };
                    q[i] * next
                })
                .sum()
        })
        .collect()
}
