//! Age-debt on the three-node relay line: without relay queues the relay's
//! freshness is invisible and the destination debt grows without bound.
//!
//! ```text
//! cargo run --release --example relay_debt
//! ```

use aoi_core::experiment::scenario::Scenario;
use aoi_core::policy::age_debt::{AgeDebt, IntermediateQueues, TieBreak};
use aoi_core::sim::{run_simulation, SimulationConfig};

fn main() -> aoi_core::Result<()> {
    let instance = Scenario::UnicastLineSingle { n: 3, gamma: 1.0 }.build(0)?;
    let horizon = 100_000;
    let config = SimulationConfig::new(horizon, 3);
    let variants = [
        ("no relay queues, ties to 2 -> 3", IntermediateQueues::Off, TieBreak::HighestIndex),
        ("relay queues", IntermediateQueues::Relays, TieBreak::LowestIndex),
        ("relay and source queues", IntermediateQueues::RelaysAndSource, TieBreak::LowestIndex),
    ];
    for alpha in [1.0, 2.5] {
        println!("target {alpha}");
        for (label, queues, tie) in variants {
            let mut policy = AgeDebt::fixed(vec![alpha])
                .with_intermediate(queues)
                .with_tie_break(tie);
            let run = run_simulation(&config, &instance, &mut policy, 3)?;
            println!(
                "  {label:<32} avg age {:>10.2}  Q(T)/T {:.3}",
                run.metrics.pairs[0].avg_age,
                run.policy_debt_rate(horizon).unwrap_or(0.0)
            );
        }
    }
    Ok(())
}
