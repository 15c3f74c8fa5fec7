//! Stationary randomized scheduling on a relay line: the closed-form
//! destination age against simulation.
//!
//! ```text
//! cargo run --release --example line_closed_form
//! ```

use aoi_core::action::InterferenceSpec;
use aoi_core::flow::{DestinationSpec, FlowSpec};
use aoi_core::instance::Instance;
use aoi_core::policy::stationary::{flow_closed_form, frequencies_from_distribution, StationaryRandomized};
use aoi_core::sim::{run_simulation, SimulationConfig};
use aoi_core::topology::{EdgeSpec, NetworkTopology, NodeId, RawTopology};

fn main() -> aoi_core::Result<()> {
    // 1 - 2 - 3 - 4 with uneven links.
    let gammas = [0.9, 0.6, 0.75];
    let topology = NetworkTopology::validate(&RawTopology {
        node_count: 4,
        edges: gammas
            .iter()
            .enumerate()
            .map(|(i, &gamma)| EdgeSpec { u: NodeId(i + 1), v: NodeId(i + 2), gamma })
            .collect(),
    })?;
    let flow = FlowSpec {
        source: NodeId(1),
        commissioned: vec![NodeId(2), NodeId(3)],
        destinations: vec![DestinationSpec::linear(NodeId(4), 1.0)],
        path: Some((1..=4).map(NodeId).collect()),
    };
    let instance = Instance::new(topology, &[flow], InterferenceSpec::SingleTransmitter)?;

    // The action list also holds the backward relay 3 -> 2, which a
    // path-following schedule never uses. Spend more time on the weak link.
    let shares = [0.3, 0.4, 0.3];
    let x: Vec<f64> = instance
        .actions()
        .actions()
        .iter()
        .map(|a| {
            (0..3)
                .find(|&h| a.contains(NodeId(h + 1), NodeId(h + 2), 0))
                .map_or(0.0, |h| shares[h])
        })
        .collect();
    let freqs = frequencies_from_distribution(&x, instance.actions())?;
    let predicted = flow_closed_form(&instance, 0, &freqs)?;

    let mut policy = StationaryRandomized::new(x)?;
    let config = SimulationConfig::new(1_000_000, 42);
    let run = run_simulation(&config, &instance, &mut policy, 42)?;
    let simulated = run.metrics.pairs[0].avg_age;

    println!("closed form   {predicted:.4}");
    println!("simulated     {simulated:.4}");
    println!("relative gap  {:.3}%", 100.0 * (simulated - predicted).abs() / predicted);
    Ok(())
}
