//! Interference-free actions: sets of directed (edge, flow) transmissions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::Flow;
use crate::topology::{EdgeId, NetworkTopology, NodeId};

/// One scheduled flow update over a directed use of an undirected edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transmission {
    pub from: NodeId,
    pub to: NodeId,
    pub flow: usize,
    pub edge: EdgeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionSpec {
    pub from: NodeId,
    pub to: NodeId,
    pub flow: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Action {
    transmissions: Vec<Transmission>,
}

impl Action {
    pub fn idle() -> Self {
        Action::default()
    }

    pub fn transmissions(&self) -> &[Transmission] {
        &self.transmissions
    }

    pub fn is_idle(&self) -> bool {
        self.transmissions.is_empty()
    }

    pub fn contains(&self, from: NodeId, to: NodeId, flow: usize) -> bool {
        self.transmissions
            .iter()
            .any(|t| t.from == from && t.to == to && t.flow == flow)
    }
}

/// How the action list was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Explicit,
    Generated,
}

/// Interference model used to build an [`ActionSpace`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterferenceSpec {
    /// User-supplied action list; the idle action is added when missing.
    Explicit { actions: Vec<Vec<TransmissionSpec>> },
    /// One node transmits one flow over one adjacent edge per slot.
    SingleTransmitter,
    /// Line `1 - 2 - ... - N`: either every odd-numbered or every
    /// even-numbered node forwards toward its higher-numbered neighbor.
    LineOddEven,
}

#[derive(Clone, Debug)]
pub struct ActionSpace {
    actions: Vec<Action>,
    provenance: Provenance,
    idle: usize,
}

impl ActionSpace {
    pub fn build(
        topology: &NetworkTopology,
        flows: &[Flow],
        spec: &InterferenceSpec,
    ) -> Result<Self> {
        match spec {
            InterferenceSpec::Explicit { actions } => {
                let mut built = Vec::with_capacity(actions.len() + 1);
                for (idx, specs) in actions.iter().enumerate() {
                    let mut txs = Vec::with_capacity(specs.len());
                    for s in specs {
                        let edge = topology.edge_between(s.from, s.to).ok_or_else(|| {
                            Error::Action {
                                action: idx,
                                message: format!("no edge {}-{}", s.from, s.to),
                            }
                        })?;
                        txs.push(Transmission {
                            from: s.from,
                            to: s.to,
                            flow: s.flow,
                            edge,
                        });
                    }
                    let action = Action { transmissions: txs };
                    check_action(idx, &action, topology, flows)?;
                    built.push(action);
                }
                if !built.iter().any(Action::is_idle) {
                    built.insert(0, Action::idle());
                }
                Ok(Self::from_actions(built, Provenance::Explicit))
            }
            InterferenceSpec::SingleTransmitter => {
                let mut built = vec![Action::idle()];
                for node in topology.nodes() {
                    for flow in flows {
                        if !flow.can_transmit(node) {
                            continue;
                        }
                        let mut nbrs = topology.neighbors(node).to_vec();
                        nbrs.sort();
                        for (to, edge) in nbrs {
                            if flow.can_receive(to) {
                                built.push(Action {
                                    transmissions: vec![Transmission {
                                        from: node,
                                        to,
                                        flow: flow.id(),
                                        edge,
                                    }],
                                });
                            }
                        }
                    }
                }
                Ok(Self::from_actions(built, Provenance::Generated))
            }
            InterferenceSpec::LineOddEven => {
                let n = topology.node_count();
                if topology.edges().len() != n - 1
                    || (1..n).any(|i| topology.edge_between(NodeId(i), NodeId(i + 1)).is_none())
                {
                    return Err(Error::Unsupported(
                        "line_odd_even requires the line topology 1 - 2 - ... - N".into(),
                    ));
                }
                if flows.len() != 1 {
                    return Err(Error::Unsupported(
                        "line_odd_even supports a single flow".into(),
                    ));
                }
                let flow = &flows[0];
                let mut built = vec![Action::idle()];
                for parity in [1usize, 0] {
                    let txs: Vec<Transmission> = (1..n)
                        .filter(|i| i % 2 == parity)
                        .map(|i| (NodeId(i), NodeId(i + 1)))
                        .filter(|&(a, b)| flow.can_transmit(a) && flow.can_receive(b))
                        .map(|(a, b)| Transmission {
                            from: a,
                            to: b,
                            flow: flow.id(),
                            edge: topology.edge_between(a, b).unwrap(),
                        })
                        .collect();
                    if !txs.is_empty() {
                        built.push(Action { transmissions: txs });
                    }
                }
                Ok(Self::from_actions(built, Provenance::Generated))
            }
        }
    }

    fn from_actions(actions: Vec<Action>, provenance: Provenance) -> Self {
        let idle = actions.iter().position(Action::is_idle).expect("idle present");
        ActionSpace {
            actions,
            provenance,
            idle,
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn get(&self, index: usize) -> Option<&Action> {
        self.actions.get(index)
    }

    pub fn idle_index(&self) -> usize {
        self.idle
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Re-checks every action against edge and role constraints.
    pub fn validate(&self, topology: &NetworkTopology, flows: &[Flow]) -> Result<()> {
        for (idx, a) in self.actions.iter().enumerate() {
            check_action(idx, a, topology, flows)?;
        }
        Ok(())
    }
}

fn check_action(
    idx: usize,
    action: &Action,
    topology: &NetworkTopology,
    flows: &[Flow],
) -> Result<()> {
    let err = |message: String| Error::Action {
        action: idx,
        message,
    };
    let mut used = vec![false; topology.edges().len()];
    for t in &action.transmissions {
        let flow = flows
            .get(t.flow)
            .ok_or_else(|| err(format!("unknown flow {}", t.flow)))?;
        if topology.edge_between(t.from, t.to) != Some(t.edge) {
            return Err(err(format!("no edge {}-{}", t.from, t.to)));
        }
        if std::mem::replace(&mut used[t.edge], true) {
            return Err(err(format!("edge {}-{} used twice", t.from, t.to)));
        }
        if !flow.can_transmit(t.from) {
            return Err(err(format!(
                "node {} may not transmit flow {}",
                t.from, t.flow
            )));
        }
        if !flow.can_receive(t.to) {
            return Err(err(format!(
                "node {} may not receive flow {}",
                t.to, t.flow
            )));
        }
    }
    Ok(())
}
