//! Per-slot Bernoulli link states.

use rand::Rng;

use crate::topology::{EdgeId, NetworkTopology};

/// Realized `S_ij(t)` for every edge in one slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkStates(Vec<bool>);

impl LinkStates {
    pub fn all_on(edges: usize) -> Self {
        LinkStates(vec![true; edges])
    }

    pub fn from_vec(states: Vec<bool>) -> Self {
        LinkStates(states)
    }

    /// Draws each edge independently, on with probability `gamma`.
    pub fn sample<R: Rng + ?Sized>(topology: &NetworkTopology, rng: &mut R) -> Self {
        let mut states = LinkStates(Vec::with_capacity(topology.edges().len()));
        states.resample(topology, rng);
        states
    }

    /// In-place variant of [`LinkStates::sample`].
    pub fn resample<R: Rng + ?Sized>(&mut self, topology: &NetworkTopology, rng: &mut R) {
        self.0.clear();
        self.0
            .extend(topology.edges().iter().map(|e| rng.gen::<f64>() < e.gamma));
    }

    #[inline]
    pub fn is_on(&self, edge: EdgeId) -> bool {
        self.0[edge]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{EdgeSpec, NodeId, RawTopology};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_edges(g1: f64, g2: f64) -> NetworkTopology {
        NetworkTopology::validate(&RawTopology {
            node_count: 3,
            edges: vec![
                EdgeSpec { u: NodeId(1), v: NodeId(2), gamma: g1 },
                EdgeSpec { u: NodeId(2), v: NodeId(3), gamma: g2 },
            ],
        })
        .unwrap()
    }

    #[test]
    fn reliable_links_always_on() {
        let topo = two_edges(1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(LinkStates::sample(&topo, &mut rng).as_slice(), &[true, true]);
        }
    }

    #[test]
    fn unreliable_link_mostly_off() {
        let topo = two_edges(1e-3, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let on = (0..10_000)
            .filter(|_| LinkStates::sample(&topo, &mut rng).is_on(0))
            .count();
        assert!(on < 40, "{on}");
    }

    #[test]
    fn empirical_mean_matches_gamma() {
        // Bernoulli oracle: mean within 3 standard errors over 10^6 draws.
        let gamma = 0.37;
        let topo = two_edges(gamma, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mut states = LinkStates::all_on(2);
        let mut on = 0usize;
        for _ in 0..n {
            states.resample(&topo, &mut rng);
            on += states.is_on(0) as usize;
        }
        let mean = on as f64 / n as f64;
        let se = (gamma * (1.0 - gamma) / n as f64).sqrt();
        assert!((mean - gamma).abs() < 3.0 * se, "{mean}");
    }
}
