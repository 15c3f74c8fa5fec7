//! Undirected network graph with per-edge delivery reliability.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 1-based node identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    /// Zero-based position, for indexing dense per-node storage.
    #[inline]
    pub fn index(self) -> usize {
        self.0 - 1
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        NodeId(index + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of an undirected edge within its topology.
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub u: NodeId,
    pub v: NodeId,
    pub gamma: f64,
}

/// Unvalidated topology, as read from a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTopology {
    pub node_count: usize,
    pub edges: Vec<EdgeSpec>,
}

/// Hop count sentinel for unreachable targets.
pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct NetworkTopology {
    node_count: usize,
    /// Edges with `u < v`.
    edges: Vec<EdgeSpec>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    lookup: HashMap<(NodeId, NodeId), EdgeId>,
}

impl NetworkTopology {
    /// Validates a raw description and normalizes each edge to `u < v`.
    pub fn validate(raw: &RawTopology) -> Result<Self> {
        if raw.node_count == 0 {
            return Err(Error::Topology("node_count must be positive".into()));
        }
        let n = raw.node_count;
        let mut edges = Vec::with_capacity(raw.edges.len());
        let mut lookup = HashMap::new();
        let mut adjacency = vec![Vec::new(); n];
        for (idx, e) in raw.edges.iter().enumerate() {
            let label = format!("edges[{idx}] ({}-{})", e.u, e.v);
            for node in [e.u, e.v] {
                if node.0 == 0 || node.0 > n {
                    return Err(Error::Topology(format!(
                        "{label}: node {node} outside [1, {n}]"
                    )));
                }
            }
            if e.u == e.v {
                return Err(Error::Topology(format!("{label}: self-loop")));
            }
            if !(e.gamma > 0.0 && e.gamma <= 1.0) {
                return Err(Error::Topology(format!(
                    "{label}: gamma {} out of range (0, 1]",
                    e.gamma
                )));
            }
            let (u, v) = if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) };
            if lookup.insert((u, v), idx).is_some() {
                return Err(Error::Topology(format!("{label}: duplicate edge")));
            }
            adjacency[u.index()].push((v, idx));
            adjacency[v.index()].push((u, idx));
            edges.push(EdgeSpec { u, v, gamma: e.gamma });
        }
        Ok(NetworkTopology {
            node_count: n,
            edges,
            adjacency,
            lookup,
        })
    }

    pub fn to_raw(&self) -> RawTopology {
        RawTopology {
            node_count: self.node_count,
            edges: self.edges.clone(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (1..=self.node_count).map(NodeId)
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &EdgeSpec {
        &self.edges[id]
    }

    pub fn gamma(&self, id: EdgeId) -> f64 {
        self.edges[id].gamma
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.lookup.get(&key).copied()
    }

    /// Neighbors of `node` together with the connecting edge.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[node.index()]
    }

    pub fn is_connected(&self) -> bool {
        let dist = self.bfs(NodeId(1), |_| true);
        dist.iter().all(|&d| d != UNREACHABLE)
    }

    /// Breadth-first hop distances from `start`, expanding only through nodes
    /// for which `can_relay` holds. Targets are always reachable as endpoints.
    pub fn bfs(&self, start: NodeId, can_relay: impl Fn(NodeId) -> bool) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.node_count];
        let mut queue = VecDeque::new();
        dist[start.index()] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            if u != start && !can_relay(u) {
                continue;
            }
            for &(v, _) in self.neighbors(u) {
                if dist[v.index()] == UNREACHABLE {
                    dist[v.index()] = dist[u.index()] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}
