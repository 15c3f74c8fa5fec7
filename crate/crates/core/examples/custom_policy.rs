//! Plugging a new scheduler into the simulator: serve the oldest
//! destination, ignoring weights and link quality.
//!
//! ```text
//! cargo run --release --example custom_policy
//! ```

use aoi_core::experiment::scenario::Scenario;
use aoi_core::policy::baselines::MaxWeight;
use aoi_core::sim::{run_simulation, Observation, Policy, SimulationConfig};
use rand::RngCore;

struct OldestFirst;

impl Policy for OldestFirst {
    fn name(&self) -> String {
        "oldest_first".into()
    }

    fn decide(&mut self, obs: &Observation<'_>, _rng: &mut dyn RngCore) -> usize {
        let inst = obs.instance;
        let age_of = |flow: usize| {
            let dest = inst.flows()[flow].destinations()[0].node;
            obs.ages.age(flow, dest)
        };
        let mut best = (inst.actions().idle_index(), 0);
        for (m, action) in inst.actions().actions().iter().enumerate() {
            let score: u64 = action.transmissions().iter().map(|t| age_of(t.flow)).sum();
            if score > best.1 {
                best = (m, score);
            }
        }
        best.0
    }
}

fn main() -> aoi_core::Result<()> {
    let instance = Scenario::BroadcastStar { n: 8 }.build(1)?;
    let config = SimulationConfig::new(100_000, 1);
    let ours = run_simulation(&config, &instance, &mut OldestFirst, 1)?;
    let mw = run_simulation(&config, &instance, &mut MaxWeight, 1)?;
    println!("oldest_first {:.3}", ours.metrics.total_cost);
    println!("max_weight   {:.3}", mw.metrics.total_cost);
    Ok(())
}
