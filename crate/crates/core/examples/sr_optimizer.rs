//! Optimal stationary randomized distributions by projected gradient, with
//! the exhaustive grid as a cross-check on a small instance.
//!
//! ```text
//! cargo run --release --example sr_optimizer
//! ```

use aoi_core::experiment::scenario::Scenario;
use aoi_core::policy::grid::grid_search_sr_oracle;
use aoi_core::policy::stationary::{optimize_distribution, reduce_to_single_hop, SolverParams, StationaryRandomized};

fn main() -> aoi_core::Result<()> {
    println!("line length  optimum   (N-1)^2  iterations  kkt");
    for n in 3..=8 {
        let instance = Scenario::UnicastLineSingle { n, gamma: 1.0 }.build(0)?;
        let (_, r) = StationaryRandomized::optimal(&instance, &SolverParams::default())?;
        println!(
            "{n:>11}  {:>8.4}  {:>7}  {:>10}  {:.1e}",
            r.objective,
            (n - 1) * (n - 1),
            r.iterations,
            r.kkt_residual
        );
    }

    // Three single-hop flows with uneven weights: few enough actions for
    // the grid.
    let instance = Scenario::BroadcastStar { n: 4 }.build(9)?;
    let problem = reduce_to_single_hop(&instance)?;
    let gradient = optimize_distribution(&problem, &SolverParams::default())?;
    let grid = grid_search_sr_oracle(&problem, 1e-3)?;
    println!("\nstar with 3 sources");
    println!("gradient  {:.6}  x = {:.3?}", gradient.objective, gradient.x);
    println!("grid      {:.6}  x = {:.3?}", grid.objective, grid.x);
    Ok(())
}
