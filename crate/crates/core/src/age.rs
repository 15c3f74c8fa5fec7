//! Per-flow, per-node age state, the slot update law, and time averages.

use crate::action::Action;
use crate::channel::LinkStates;
use crate::error::{Error, Result};
use crate::flow::Flow;
use crate::instance::{Instance, Pair};
use crate::topology::NodeId;

/// Ages `A_j^k(t)` for every flow and node, plus the slot counter.
///
/// Only nodes in `C_k ∪ D_k` evolve; the source entry stays 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgeState {
    ages: Vec<Vec<u64>>,
    slot: u64,
}

impl AgeState {
    /// All ages 0 at slot 0.
    pub fn new(instance: &Instance) -> Self {
        let n = instance.topology().node_count();
        AgeState {
            ages: vec![vec![0; n]; instance.flows().len()],
            slot: 0,
        }
    }

    /// Builds a state from explicit per-flow age vectors (indexed by node
    /// position). Source entries are forced to 0.
    pub fn from_ages(instance: &Instance, mut ages: Vec<Vec<u64>>, slot: u64) -> Result<Self> {
        let n = instance.topology().node_count();
        if ages.len() != instance.flows().len() {
            return Err(Error::Dimension {
                expected: instance.flows().len(),
                got: ages.len(),
            });
        }
        for (flow, row) in instance.flows().iter().zip(ages.iter_mut()) {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: row.len(),
                });
            }
            row[flow.source().index()] = 0;
        }
        Ok(AgeState { ages, slot })
    }

    #[inline]
    pub fn age(&self, flow: usize, node: NodeId) -> u64 {
        self.ages[flow][node.index()]
    }

    pub fn flow_ages(&self, flow: usize) -> &[u64] {
        &self.ages[flow]
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn pair_age(&self, instance: &Instance, pair: Pair) -> u64 {
        self.age(pair.flow, instance.pair_node(pair))
    }

    /// Applies one slot of the update law: a node that hears a successful
    /// transmission of flow `k` from `i` takes `min(A_j, A_i) + 1` (minimum
    /// over all successful senders); every other tracked node ages by one.
    pub fn evolve(&mut self, flows: &[Flow], action: &Action, links: &LinkStates) -> Result<()> {
        let mut deliveries = Vec::with_capacity(action.transmissions().len());
        for t in action.transmissions() {
            if t.flow >= flows.len() || t.edge >= links.as_slice().len() {
                return Err(Error::Action {
                    action: usize::MAX,
                    message: format!("transmission {t:?} references unknown flow or edge"),
                });
            }
            if links.is_on(t.edge) {
                deliveries.push((t.flow, t.to, self.ages[t.flow][t.from.index()]));
            }
        }
        for (flow, row) in flows.iter().zip(self.ages.iter_mut()) {
            for node in flow.tracked_nodes() {
                row[node.index()] += 1;
            }
        }
        for (flow, to, sender_age) in deliveries {
            let cell = &mut self.ages[flow][to.index()];
            *cell = (*cell).min(sender_age + 1);
        }
        self.slot += 1;
        Ok(())
    }

    /// `B_j^k = g_j^k(A_j^k)` for every destination pair, in `instance.pairs()` order.
    pub fn costs(&self, instance: &Instance) -> Vec<f64> {
        instance
            .pairs()
            .iter()
            .map(|&p| {
                let d = &instance.flows()[p.flow].destinations()[p.dest];
                d.cost.eval(self.age(p.flow, d.node))
            })
            .collect()
    }

    /// Weighted age over commissioned and destination nodes:
    /// `C(t) = Σ_k Σ_{j ∈ C_k ∪ D_k} w_j^k A_j^k(t)`.
    pub fn relay_weighted_sum(&self, flows: &[Flow]) -> f64 {
        flows
            .iter()
            .map(|f| {
                f.tracked_nodes()
                    .iter()
                    .map(|&j| f.node_weight(j) * self.age(f.id(), j) as f64)
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Time averages for one destination pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairMetrics {
    pub pair: Pair,
    pub source: NodeId,
    pub node: NodeId,
    pub weight: f64,
    pub avg_age: f64,
    pub avg_cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub pairs: Vec<PairMetrics>,
    /// `Σ w_j^k · avg A_j^k`
    pub weighted_age: f64,
    /// `Σ avg B_j^k`
    pub total_cost: f64,
    pub slots: u64,
}

/// Running sums of ages and costs after a burn-in period.
#[derive(Clone, Debug)]
pub struct MetricsAccumulator {
    burn_in: u64,
    age_sums: Vec<f64>,
    cost_sums: Vec<f64>,
    slots: u64,
}

impl MetricsAccumulator {
    pub fn new(instance: &Instance, burn_in: u64) -> Self {
        let n = instance.pairs().len();
        MetricsAccumulator {
            burn_in,
            age_sums: vec![0.0; n],
            cost_sums: vec![0.0; n],
            slots: 0,
        }
    }

    /// Adds the state if its slot lies past the burn-in.
    pub fn record(&mut self, instance: &Instance, state: &AgeState) {
        if state.slot() <= self.burn_in {
            return;
        }
        self.slots += 1;
        for (i, &p) in instance.pairs().iter().enumerate() {
            let d = &instance.flows()[p.flow].destinations()[p.dest];
            let a = state.age(p.flow, d.node);
            self.age_sums[i] += a as f64;
            self.cost_sums[i] += d.cost.eval(a);
        }
    }

    pub fn slots(&self) -> u64 {
        self.slots
    }

    pub fn finalize(&self, instance: &Instance) -> Result<RunMetrics> {
        if self.slots == 0 {
            return Err(Error::Simulation(
                "no slots recorded after burn-in (horizon must exceed burn-in)".into(),
            ));
        }
        let n = self.slots as f64;
        let pairs: Vec<PairMetrics> = instance
            .pairs()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let flow = &instance.flows()[p.flow];
                let d = &flow.destinations()[p.dest];
                PairMetrics {
                    pair: p,
                    source: flow.source(),
                    node: d.node,
                    weight: d.weight,
                    avg_age: self.age_sums[i] / n,
                    avg_cost: self.cost_sums[i] / n,
                }
            })
            .collect();
        Ok(RunMetrics {
            weighted_age: pairs.iter().map(|p| p.weight * p.avg_age).sum(),
            total_cost: pairs.iter().map(|p| p.avg_cost).sum(),
            pairs,
            slots: self.slots,
        })
    }
}

/// Averages a finite age sequence after discarding `burn_in` leading slots.
pub fn accumulate_and_finalize(
    instance: &Instance,
    burn_in: u64,
    states: impl IntoIterator<Item = AgeState>,
) -> Result<RunMetrics> {
    let mut acc = MetricsAccumulator::new(instance, burn_in);
    for s in states {
        acc.record(instance, &s);
    }
    acc.finalize(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::InterferenceSpec;
    use crate::flow::{DestinationSpec, FlowSpec};
    use crate::topology::{EdgeSpec, NetworkTopology, RawTopology};

    fn line3() -> Instance {
        let topo = NetworkTopology::validate(&RawTopology {
            node_count: 3,
            edges: vec![
                EdgeSpec { u: NodeId(1), v: NodeId(2), gamma: 1.0 },
                EdgeSpec { u: NodeId(2), v: NodeId(3), gamma: 1.0 },
            ],
        })
        .unwrap();
        let flow = FlowSpec {
            source: NodeId(1),
            commissioned: vec![NodeId(2)],
            destinations: vec![DestinationSpec::linear(NodeId(3), 1.0)],
            path: Some(vec![NodeId(1), NodeId(2), NodeId(3)]),
        };
        Instance::new(topo, &[flow], InterferenceSpec::SingleTransmitter).unwrap()
    }

    fn with_ages(inst: &Instance, a2: u64, a3: u64) -> AgeState {
        AgeState::from_ages(inst, vec![vec![0, a2, a3]], 0).unwrap()
    }

    #[test]
    fn fresher_sender_resets_receiver() {
        let inst = line3();
        let b = &inst.actions().actions()[2]; // 2 -> 3
        let mut s = with_ages(&inst, 2, 5);
        s.evolve(inst.flows(), b, &LinkStates::all_on(2)).unwrap();
        assert_eq!(s.age(0, NodeId(3)), 3);
        assert_eq!(s.age(0, NodeId(2)), 3);
        assert_eq!(s.age(0, NodeId(1)), 0);
    }

    #[test]
    fn no_transmission_ages_by_one() {
        let inst = line3();
        let idle = &inst.actions().actions()[0];
        let mut s = with_ages(&inst, 2, 5);
        s.evolve(inst.flows(), idle, &LinkStates::all_on(2)).unwrap();
        assert_eq!(s.age(0, NodeId(3)), 6);
        assert_eq!(s.slot(), 1);
    }

    #[test]
    fn stale_sender_cannot_worsen_receiver() {
        let inst = line3();
        let b = &inst.actions().actions()[2];
        let mut s = with_ages(&inst, 7, 4);
        s.evolve(inst.flows(), b, &LinkStates::all_on(2)).unwrap();
        assert_eq!(s.age(0, NodeId(3)), 5);
    }

    #[test]
    fn failed_link_is_no_delivery() {
        let inst = line3();
        let b = &inst.actions().actions()[2];
        let mut s = with_ages(&inst, 2, 5);
        s.evolve(inst.flows(), b, &LinkStates::from_vec(vec![true, false])).unwrap();
        assert_eq!(s.age(0, NodeId(3)), 6);
    }

    #[test]
    fn constant_and_alternating_averages() {
        let inst = line3();
        let constant = (1..=10).map(|t| with_slot(&inst, 1, 1, t));
        let m = accumulate_and_finalize(&inst, 0, constant).unwrap();
        assert_eq!(m.pairs[0].avg_age, 1.0);
        let alt = (1..=10).map(|t| with_slot(&inst, 1, if t % 2 == 0 { 2 } else { 3 }, t));
        let m = accumulate_and_finalize(&inst, 0, alt).unwrap();
        assert_eq!(m.pairs[0].avg_age, 2.5);
        assert_eq!(m.weighted_age, 2.5);
    }

    #[test]
    fn burn_in_is_discarded_and_empty_horizon_errors() {
        let inst = line3();
        let seq = (1..=4).map(|t| with_slot(&inst, 1, t, t));
        let m = accumulate_and_finalize(&inst, 2, seq).unwrap();
        assert_eq!(m.pairs[0].avg_age, 3.5);
        let seq = (1..=4).map(|t| with_slot(&inst, 1, t, t));
        assert!(accumulate_and_finalize(&inst, 4, seq).is_err());
    }

    fn with_slot(inst: &Instance, a2: u64, a3: u64, slot: u64) -> AgeState {
        AgeState::from_ages(inst, vec![vec![0, a2, a3]], slot).unwrap()
    }
}
