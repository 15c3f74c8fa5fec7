//! Flows: a source, its commissioned forwarders and its destinations.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cost::{CostFunction, CostShape, DEFAULT_COST_CAP};
use crate::error::{Error, Result};
use crate::topology::{NetworkTopology, NodeId, UNREACHABLE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DestinationSpec {
    pub node: NodeId,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    #[serde(default)]
    pub cost: CostShape,
    #[serde(default = "default_cap")]
    pub cost_cap: f64,
}

fn unit_weight() -> f64 {
    1.0
}

fn default_cap() -> f64 {
    DEFAULT_COST_CAP
}

impl DestinationSpec {
    pub fn linear(node: NodeId, weight: f64) -> Self {
        DestinationSpec {
            node,
            weight,
            cost: CostShape::Linear { slope: 1.0 },
            cost_cap: DEFAULT_COST_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub source: NodeId,
    #[serde(default)]
    pub commissioned: Vec<NodeId>,
    pub destinations: Vec<DestinationSpec>,
    /// Fixed route as a node sequence from source to the single destination.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<NodeId>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowKind {
    Unicast,
    Multicast,
    Broadcast,
}

#[derive(Clone, Debug)]
pub struct Destination {
    pub node: NodeId,
    pub weight: f64,
    pub cost: CostFunction,
}

#[derive(Clone, Debug)]
pub struct Flow {
    id: usize,
    source: NodeId,
    commissioned: Vec<NodeId>,
    destinations: Vec<Destination>,
    path: Option<Vec<NodeId>>,
    kind: FlowKind,
    transmitter: Vec<bool>,
    receiver: Vec<bool>,
    dest_slot: Vec<Option<usize>>,
    tracked: Vec<NodeId>,
}

impl Flow {
    pub fn validate(id: usize, spec: &FlowSpec, topology: &NetworkTopology) -> Result<Self> {
        let n = topology.node_count();
        let err = |message: String| Error::Flow { flow: id, message };
        let in_range = |v: NodeId| v.0 >= 1 && v.0 <= n;
        if !in_range(spec.source) {
            return Err(err(format!("source {} outside [1, {n}]", spec.source)));
        }
        if spec.destinations.is_empty() {
            return Err(err("destination set is empty".into()));
        }
        let mut commissioned = BTreeSet::new();
        for &c in &spec.commissioned {
            if !in_range(c) || c == spec.source {
                return Err(err(format!("invalid commissioned node {c}")));
            }
            commissioned.insert(c);
        }
        let mut dest_slot = vec![None; n];
        let mut destinations = Vec::with_capacity(spec.destinations.len());
        for d in &spec.destinations {
            if !in_range(d.node) {
                return Err(err(format!("destination {} outside [1, {n}]", d.node)));
            }
            if d.node == spec.source {
                return Err(err("source cannot be its own destination".into()));
            }
            if dest_slot[d.node.index()].is_some() {
                return Err(err(format!("duplicate destination {}", d.node)));
            }
            if !(d.weight > 0.0) || !d.weight.is_finite() {
                return Err(err(format!("weight of destination {} must be positive", d.node)));
            }
            let cost = CostFunction::new(d.cost.clone(), d.cost_cap)
                .map_err(|e| err(format!("destination {}: {e}", d.node)))?;
            dest_slot[d.node.index()] = Some(destinations.len());
            destinations.push(Destination {
                node: d.node,
                weight: d.weight,
                cost,
            });
        }

        let kind = if destinations.len() == n - 1 {
            FlowKind::Broadcast
        } else if destinations.len() == 1 {
            FlowKind::Unicast
        } else {
            FlowKind::Multicast
        };

        let mut transmitter = vec![false; n];
        let mut receiver = vec![false; n];
        transmitter[spec.source.index()] = true;
        for &c in &commissioned {
            transmitter[c.index()] = true;
            receiver[c.index()] = true;
        }
        for d in &destinations {
            receiver[d.node.index()] = true;
        }
        let tracked: Vec<NodeId> = topology.nodes().filter(|v| receiver[v.index()]).collect();

        // Every destination must be reachable through nodes allowed to forward.
        let dist = topology.bfs(spec.source, |v| transmitter[v.index()]);
        for d in &destinations {
            if dist[d.node.index()] == UNREACHABLE {
                return Err(err(format!(
                    "destination {} unreachable through the commissioned subgraph",
                    d.node
                )));
            }
        }

        if let Some(path) = &spec.path {
            if destinations.len() != 1 {
                return Err(err("a fixed path requires a unicast flow".into()));
            }
            if path.len() < 2
                || path[0] != spec.source
                || *path.last().unwrap() != destinations[0].node
            {
                return Err(err("path must run from the source to the destination".into()));
            }
            let distinct: BTreeSet<_> = path.iter().collect();
            if distinct.len() != path.len() {
                return Err(err("path must be simple".into()));
            }
            for hop in &path[1..path.len() - 1] {
                if !commissioned.contains(hop) {
                    return Err(err(format!("path node {hop} is not commissioned")));
                }
            }
            for w in path.windows(2) {
                if topology.edge_between(w[0], w[1]).is_none() {
                    return Err(err(format!("path hop {}-{} is not an edge", w[0], w[1])));
                }
            }
        }

        Ok(Flow {
            id,
            source: spec.source,
            commissioned: commissioned.into_iter().collect(),
            destinations,
            path: spec.path.clone(),
            kind,
            transmitter,
            receiver,
            dest_slot,
            tracked,
        })
    }

    pub fn to_spec(&self) -> FlowSpec {
        FlowSpec {
            source: self.source,
            commissioned: self.commissioned.clone(),
            destinations: self
                .destinations
                .iter()
                .map(|d| DestinationSpec {
                    node: d.node,
                    weight: d.weight,
                    cost: d.cost.shape().clone(),
                    cost_cap: d.cost.cap(),
                })
                .collect(),
            path: self.path.clone(),
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn commissioned(&self) -> &[NodeId] {
        &self.commissioned
    }

    pub fn destinations(&self) -> &[Destination] {
        &self.destinations
    }

    pub fn kind(&self) -> FlowKind {
        self.kind
    }

    pub fn path(&self) -> Option<&[NodeId]> {
        self.path.as_deref()
    }

    /// `{k} ∪ C_k`
    pub fn can_transmit(&self, node: NodeId) -> bool {
        self.transmitter[node.index()]
    }

    /// `C_k ∪ D_k`
    pub fn can_receive(&self, node: NodeId) -> bool {
        self.receiver[node.index()]
    }

    pub fn is_commissioned(&self, node: NodeId) -> bool {
        node != self.source && self.transmitter[node.index()]
    }

    /// Position of `node` in the destination list, if it is a destination.
    pub fn destination_index(&self, node: NodeId) -> Option<usize> {
        self.dest_slot[node.index()]
    }

    /// Nodes whose age is tracked for this flow (`C_k ∪ D_k`), ascending.
    pub fn tracked_nodes(&self) -> &[NodeId] {
        &self.tracked
    }

    /// Weight used by age-difference style sums: destination weight, or 1 for
    /// commissioned relays.
    pub fn node_weight(&self, node: NodeId) -> f64 {
        match self.destination_index(node) {
            Some(i) => self.destinations[i].weight,
            None => 1.0,
        }
    }
}
