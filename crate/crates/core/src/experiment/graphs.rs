//! Enumeration of connected simple graphs up to isomorphism.
//!
//! Graphs on `n ≤ 7` nodes are bit masks over the `n(n-1)/2` vertex pairs in
//! lexicographic order. Only labelings whose degrees are non-increasing in
//! the label are visited (every class has one), and the canonical code is
//! the largest mask over relabelings that keep the degree order.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{EdgeSpec, NodeId, RawTopology};

pub const MAX_NODES: usize = 7;

/// An unlabeled graph in canonical labeling, with 1-based node ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn to_topology(&self, gamma: f64) -> RawTopology {
        RawTopology {
            node_count: self.node_count,
            edges: self
                .edges
                .iter()
                .map(|&(u, v)| EdgeSpec { u: NodeId(u), v: NodeId(v), gamma })
                .collect(),
        }
    }
}

fn pair_list(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn adjacency(n: usize, pairs: &[(usize, usize)], mask: u32) -> Vec<u32> {
    let mut adj = vec![0u32; n];
    for (b, &(i, j)) in pairs.iter().enumerate() {
        if mask >> b & 1 == 1 {
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
    }
    adj
}

fn connected(n: usize, adj: &[u32]) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = 1u32;
    let mut frontier = 1u32;
    while frontier != 0 {
        let mut next = 0;
        for v in 0..n {
            if frontier >> v & 1 == 1 {
                next |= adj[v];
            }
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == (1u32 << n) - 1
}

/// Largest edge mask over degree-order-preserving relabelings.
fn canonical(n: usize, pairs: &[(usize, usize)], adj: &[u32], degrees: &[u32]) -> u32 {
    let mut best = 0u32;
    let mut perm = vec![usize::MAX; n]; // new label -> old vertex
    let mut used = vec![false; n];
    fn rec(
        pos: usize,
        n: usize,
        pairs: &[(usize, usize)],
        adj: &[u32],
        degrees: &[u32],
        perm: &mut [usize],
        used: &mut [bool],
        best: &mut u32,
    ) {
        if pos == n {
            let mut code = 0u32;
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if adj[perm[i]] >> perm[j] & 1 == 1 {
                    code |= 1 << b;
                }
            }
            *best = (*best).max(code);
            return;
        }
        for v in 0..n {
            if !used[v] && degrees[v] == degrees[pos] {
                used[v] = true;
                perm[pos] = v;
                rec(pos + 1, n, pairs, adj, degrees, perm, used, best);
                used[v] = false;
            }
        }
    }
    rec(0, n, pairs, adj, degrees, &mut perm, &mut used, &mut best);
    best
}

/// All connected graphs on `n` nodes, one per isomorphism class, ordered by
/// edge count and then canonical code.
pub fn enumerate_connected_graphs(n: usize) -> Result<Vec<Graph>> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::Unsupported(format!(
            "graph enumeration supports 1 <= n <= {MAX_NODES}, got {n}"
        )));
    }
    let pairs = pair_list(n);
    let mut codes = BTreeSet::new();
    for mask in 0u32..(1u32 << pairs.len()) {
        if (mask.count_ones() as usize) < n - 1 {
            continue;
        }
        let adj = adjacency(n, &pairs, mask);
        let degrees: Vec<u32> = adj.iter().map(|a| a.count_ones()).collect();
        if degrees.windows(2).any(|w| w[0] < w[1]) || !connected(n, &adj) {
            continue;
        }
        codes.insert(canonical(n, &pairs, &adj, &degrees));
    }
    let mut graphs: Vec<(u32, u32)> = codes.into_iter().map(|c| (c.count_ones(), c)).collect();
    graphs.sort();
    Ok(graphs
        .into_iter()
        .map(|(_, code)| Graph {
            node_count: n,
            edges: pairs
                .iter()
                .enumerate()
                .filter(|(b, _)| code >> b & 1 == 1)
                .map(|(_, &(i, j))| (i + 1, j + 1))
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let counts: Vec<usize> = (1..=4)
            .map(|n| enumerate_connected_graphs(n).unwrap().len())
            .collect();
        assert_eq!(counts, vec![1, 1, 2, 6]);
    }

    #[test]
    fn five_and_six_nodes() {
        assert_eq!(enumerate_connected_graphs(5).unwrap().len(), 21);
        assert_eq!(enumerate_connected_graphs(6).unwrap().len(), 112);
    }

    #[test]
    fn stable_order() {
        let g = enumerate_connected_graphs(4).unwrap();
        assert_eq!(g, enumerate_connected_graphs(4).unwrap());
        let edges: Vec<usize> = g.iter().map(|x| x.edges.len()).collect();
        assert_eq!(edges, vec![3, 3, 4, 4, 5, 6]);
    }

    #[test]
    fn three_nodes_are_path_and_triangle() {
        let g = enumerate_connected_graphs(3).unwrap();
        assert_eq!(g[0].edges.len(), 2);
        assert_eq!(g[1].edges.len(), 3);
    }

    #[test]
    fn rejects_large_n() {
        assert!(enumerate_connected_graphs(8).is_err());
        assert!(enumerate_connected_graphs(0).is_err());
    }
}
