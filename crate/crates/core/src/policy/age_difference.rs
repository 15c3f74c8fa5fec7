//! Greedy age-difference scheduling: each transmission is worth
//! `w_j · c_ij · [A_j − A_i]⁺`, where `c_ij` is the realized link state when
//! the channel is observable and `γ_ij` otherwise.

use rand::RngCore;

use crate::action::{ActionSpace, Transmission};
use crate::age::AgeState;
use crate::channel::LinkStates;
use crate::instance::Instance;
use crate::policy::argmax_lowest;
use crate::sim::{Observation, Policy};

/// `Δ_ij^k` for one transmission.
pub fn transmission_weight(
    instance: &Instance,
    ages: &AgeState,
    links: Option<&LinkStates>,
    t: &Transmission,
) -> f64 {
    let channel = match links {
        Some(s) => {
            if s.is_on(t.edge) {
                1.0
            } else {
                0.0
            }
        }
        None => instance.topology().gamma(t.edge),
    };
    let (ai, aj) = (ages.age(t.flow, t.from), ages.age(t.flow, t.to));
    if aj <= ai || channel == 0.0 {
        return 0.0;
    }
    instance.flows()[t.flow].node_weight(t.to) * channel * (aj - ai) as f64
}

/// Per-action sums of age-difference weights.
pub fn age_difference_weights(
    instance: &Instance,
    ages: &AgeState,
    links: Option<&LinkStates>,
) -> Vec<f64> {
    action_scores(instance.actions(), |t| transmission_weight(instance, ages, links, t))
}

fn action_scores(actions: &ActionSpace, weight: impl Fn(&Transmission) -> f64) -> Vec<f64> {
    actions
        .actions()
        .iter()
        .map(|a| a.transmissions().iter().map(&weight).sum())
        .collect()
}

/// Action with the largest total weight, lowest index on ties.
pub fn ad_decide(weights: &[f64]) -> usize {
    argmax_lowest(weights.iter().copied()).unwrap_or(0)
}

#[derive(Clone, Debug, Default)]
pub struct AgeDifference;

impl Policy for AgeDifference {
    fn name(&self) -> String {
        "age_difference".into()
    }

    fn decide(&mut self, obs: &Observation<'_>, _rng: &mut dyn RngCore) -> usize {
        ad_decide(&age_difference_weights(obs.instance, obs.ages, obs.link_states))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::InterferenceSpec;
    use crate::flow::{DestinationSpec, FlowSpec};
    use crate::topology::{EdgeSpec, NetworkTopology, NodeId, RawTopology};

    fn line3(gamma: f64) -> Instance {
        let topo = NetworkTopology::validate(&RawTopology {
            node_count: 3,
            edges: vec![
                EdgeSpec { u: NodeId(1), v: NodeId(2), gamma },
                EdgeSpec { u: NodeId(2), v: NodeId(3), gamma },
            ],
        })
        .unwrap();
        let flow = FlowSpec {
            source: NodeId(1),
            commissioned: vec![NodeId(2)],
            destinations: vec![DestinationSpec::linear(NodeId(3), 2.0)],
            path: Some(vec![NodeId(1), NodeId(2), NodeId(3)]),
        };
        Instance::new(topo, &[flow], InterferenceSpec::SingleTransmitter).unwrap()
    }

    #[test]
    fn weight_examples() {
        let inst = line3(1.0);
        let ages = AgeState::from_ages(&inst, vec![vec![0, 2, 5]], 0).unwrap();
        let b = inst.actions().actions()[2].transmissions()[0];
        assert_eq!(b.to, NodeId(3));
        // Destination weight 2, difference 3.
        assert_eq!(transmission_weight(&inst, &ages, None, &b), 6.0);
        let off = LinkStates::from_vec(vec![true, false]);
        assert_eq!(transmission_weight(&inst, &ages, Some(&off), &b), 0.0);
        let stale = AgeState::from_ages(&inst, vec![vec![0, 5, 2]], 0).unwrap();
        assert_eq!(transmission_weight(&inst, &stale, None, &b), 0.0);
        // Relay node 2 uses weight 1 and the expected channel.
        let inst = line3(0.5);
        let a = inst.actions().actions()[1].transmissions()[0];
        assert_eq!(transmission_weight(&inst, &ages, None, &a), 1.0);
    }

    #[test]
    fn decide_examples() {
        assert_eq!(ad_decide(&[0.0, 3.0, 1.0]), 1);
        assert_eq!(ad_decide(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(ad_decide(&[0.0, 3.0, 4.0]), 2);
        assert_eq!(ad_decide(&[0.0, 2.0, 2.0]), 1);
    }
}
