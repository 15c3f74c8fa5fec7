//! A validated network instance: topology, flows and the action space.

use serde::{Deserialize, Serialize};

use crate::action::{ActionSpace, InterferenceSpec};
use crate::error::{Error, Result};
use crate::flow::{Flow, FlowSpec};
use crate::topology::{EdgeId, NetworkTopology, NodeId, RawTopology, UNREACHABLE};

/// Serializable description of an [`Instance`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub topology: RawTopology,
    pub flows: Vec<FlowSpec>,
    pub interference: InterferenceSpec,
}

/// A (flow, destination) pair, indexed into `Flow::destinations`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    pub flow: usize,
    pub dest: usize,
}

#[derive(Clone, Debug)]
pub struct Instance {
    topology: NetworkTopology,
    flows: Vec<Flow>,
    actions: ActionSpace,
    interference: InterferenceSpec,
    pairs: Vec<Pair>,
}

impl Instance {
    pub fn from_spec(spec: &InstanceSpec) -> Result<Self> {
        let topology = NetworkTopology::validate(&spec.topology)?;
        Self::new(topology, &spec.flows, spec.interference.clone())
    }

    pub fn new(
        topology: NetworkTopology,
        flows: &[FlowSpec],
        interference: InterferenceSpec,
    ) -> Result<Self> {
        if flows.is_empty() {
            return Err(Error::Flow {
                flow: 0,
                message: "at least one flow is required".into(),
            });
        }
        let flows = flows
            .iter()
            .enumerate()
            .map(|(k, f)| Flow::validate(k, f, &topology))
            .collect::<Result<Vec<_>>>()?;
        let actions = ActionSpace::build(&topology, &flows, &interference)?;
        let pairs = flows
            .iter()
            .flat_map(|f| (0..f.destinations().len()).map(move |d| Pair { flow: f.id(), dest: d }))
            .collect();
        Ok(Instance {
            topology,
            flows,
            actions,
            interference,
            pairs,
        })
    }

    pub fn to_spec(&self) -> InstanceSpec {
        InstanceSpec {
            topology: self.topology.to_raw(),
            flows: self.flows.iter().map(Flow::to_spec).collect(),
            interference: self.interference.clone(),
        }
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn actions(&self) -> &ActionSpace {
        &self.actions
    }

    pub fn interference(&self) -> &InterferenceSpec {
        &self.interference
    }

    /// All destination pairs, flow-major.
    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn pair_node(&self, pair: Pair) -> NodeId {
        self.flows[pair.flow].destinations()[pair.dest].node
    }

    /// True when every transmission of every action goes from a flow's
    /// source straight to one of its destinations.
    pub fn is_single_hop(&self) -> bool {
        self.actions.actions().iter().all(|a| {
            a.transmissions().iter().all(|t| {
                let f = &self.flows[t.flow];
                t.from == f.source() && f.destination_index(t.to).is_some()
            })
        }) && self
            .flows
            .iter()
            .all(|f| f.commissioned().is_empty() && f.destinations().len() == 1)
    }

    /// Minimum hops from `from` to `to` for `flow` when the first hop must use
    /// an edge of `first_hops`. Later relays must be allowed to forward the
    /// flow, and the path never revisits `from`. Returns [`UNREACHABLE`] when
    /// no such path exists.
    pub fn constrained_min_hops(
        &self,
        flow: usize,
        from: NodeId,
        to: NodeId,
        first_hops: &[EdgeId],
    ) -> u32 {
        let f = &self.flows[flow];
        let topo = &self.topology;
        let mut best = UNREACHABLE;
        for &edge in first_hops {
            let e = topo.edge(edge);
            let next = if e.u == from {
                e.v
            } else if e.v == from {
                e.u
            } else {
                continue;
            };
            if next == to {
                return 1;
            }
            if !f.can_transmit(next) || !f.can_receive(next) {
                continue;
            }
            let dist = topo.bfs(next, |v| v != from && f.can_transmit(v));
            let d = dist[to.index()];
            if d != UNREACHABLE {
                best = best.min(d + 1);
            }
        }
        best
    }
}
