//! Age-debt that learns its own targets: one gradient step per epoch from
//! the round-robin costs down towards what the network can sustain. The
//! step must be small next to the per-flow costs or the targets just
//! bounce between two values.
//!
//! ```text
//! cargo run --release --example gradient_targets
//! ```

use aoi_core::experiment::scenario::Scenario;
use aoi_core::policy::age_debt::{AgeDebt, GradientDescentParams, TargetMode};
use aoi_core::policy::baselines::{MaxWeight, RoundRobin};
use aoi_core::sim::{run_simulation, SimulationConfig};

fn main() -> aoi_core::Result<()> {
    let instance = Scenario::BroadcastStar { n: 6 }.build(5)?;
    let config = SimulationConfig::new(300_000, 5);
    let rr = run_simulation(&config, &instance, &mut RoundRobin::default(), 5)?;
    let initial: Vec<f64> = rr.metrics.pairs.iter().map(|p| p.avg_cost).collect();

    let mut params = GradientDescentParams::with_initial(initial);
    params.epochs = 60;
    params.eta = 0.05;
    let mut policy = AgeDebt::new(TargetMode::GradientDescent(params));
    let run = run_simulation(&config, &instance, &mut policy, 5)?;
    for e in policy.epoch_log().iter().step_by(10) {
        println!("epoch {:>2}  sum of targets {:.3}", e.epoch, e.targets.iter().sum::<f64>());
    }
    let mw = run_simulation(&config, &instance, &mut MaxWeight, 5)?;
    println!("round-robin {:.3}", rr.metrics.total_cost);
    println!("learned     {:.3}", run.metrics.total_cost);
    println!("max-weight  {:.3}", mw.metrics.total_cost);
    Ok(())
}
