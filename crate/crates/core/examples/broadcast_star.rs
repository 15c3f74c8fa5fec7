//! Every policy on weighted single-hop stars, with replications and
//! confidence intervals.
//!
//! ```text
//! cargo run --release --example broadcast_star
//! ```

use aoi_core::experiment::scenario::Scenario;
use aoi_core::policy::age_debt::{AgeDebt, FlowControlParams, TargetMode};
use aoi_core::policy::age_difference::AgeDifference;
use aoi_core::policy::baselines::{MaxWeight, RoundRobin};
use aoi_core::policy::stationary::{SolverParams, StationaryRandomized};
use aoi_core::sim::{run_replications, Policy, SimulationConfig};

fn main() -> aoi_core::Result<()> {
    let config = SimulationConfig::new(100_000, 2024).with_replications(4);
    for n in [5, 10, 15] {
        let instance = Scenario::BroadcastStar { n }.build(2024)?;
        let (sr, _) = StationaryRandomized::optimal(&instance, &SolverParams::default())?;
        let flow_control = AgeDebt::new(TargetMode::FlowControl(FlowControlParams { v: None, alpha_max: 10.0 }));
        let policies: Vec<(&str, Box<dyn Fn() -> Box<dyn Policy> + Sync>)> = vec![
            ("max_weight", Box::new(|| Box::new(MaxWeight))),
            ("age_difference", Box::new(|| Box::new(AgeDifference))),
            ("flow_control", Box::new(move || Box::new(flow_control.clone()))),
            ("stationary", Box::new(move || Box::new(sr.clone()))),
            ("round_robin", Box::new(|| Box::new(RoundRobin::default()))),
        ];
        println!("N = {n}");
        for (name, make) in &policies {
            let s = run_replications(&config, &instance, || Ok(make()))?;
            let (lo, hi) = s.weighted_age.ci95.unwrap_or((f64::NAN, f64::NAN));
            println!("  {name:<15} {:>8.3}  [{lo:.3}, {hi:.3}]", s.weighted_age.mean);
        }
    }
    Ok(())
}
