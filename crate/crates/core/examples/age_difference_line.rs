//! Age-difference scheduling against the best stationary randomized policy
//! on relay lines of growing length.
//!
//! ```text
//! cargo run --release --example age_difference_line
//! ```

use aoi_core::experiment::scenario::Scenario;
use aoi_core::policy::age_difference::AgeDifference;
use aoi_core::policy::stationary::{SolverParams, StationaryRandomized};
use aoi_core::sim::{run_simulation, SimulationConfig};

fn main() -> aoi_core::Result<()> {
    let config = SimulationConfig::new(200_000, 1);
    println!("  N  age_difference  stationary_randomized");
    for n in 3..=10 {
        let instance = Scenario::UnicastLineSingle { n, gamma: 1.0 }.build(0)?;
        let ad = run_simulation(&config, &instance, &mut AgeDifference, 1)?;
        let (mut sr, _) = StationaryRandomized::optimal(&instance, &SolverParams::default())?;
        let sr = run_simulation(&config, &instance, &mut sr, 1)?;
        println!("{n:>3}  {:>14.3}  {:>21.3}", ad.metrics.total_cost, sr.metrics.total_cost);
    }
    Ok(())
}
