//! Value iteration on a four-flow star with nonlinear costs, then age-debt
//! driven by the optimal per-flow costs.
//!
//! ```text
//! cargo run --release --example dp_targets
//! ```

use aoi_core::experiment::scenario::Scenario;
use aoi_core::policy::age_debt::AgeDebt;
use aoi_core::policy::baselines::MaxWeight;
use aoi_core::policy::dp::{value_iteration_oracle, DpParams};
use aoi_core::sim::{run_simulation, SimulationConfig};

fn main() -> aoi_core::Result<()> {
    let instance = Scenario::FunctionsStar { sources: 4, gamma: 1.0 }.build(0)?;
    let oracle = value_iteration_oracle(&instance, &DpParams::default(), 200_000, 1)?;
    println!(
        "optimal average cost {:.4} after {} iterations",
        oracle.solution.gain, oracle.solution.iterations
    );
    println!("per-flow costs {:.3?}", oracle.targets);

    let horizon = 100_000;
    let config = SimulationConfig::new(horizon, 2);
    let alpha: Vec<f64> = oracle.targets.iter().map(|a| a * 1.01).collect();
    let mut debt = AgeDebt::fixed(alpha.clone());
    let run = run_simulation(&config, &instance, &mut debt, 2)?;
    println!(
        "age-debt   {:.4}  Q(T)/T {:.4} (sum of targets {:.2})",
        run.metrics.total_cost,
        run.policy_debt_rate(horizon).unwrap_or(0.0),
        alpha.iter().sum::<f64>()
    );
    let mw = run_simulation(&config, &instance, &mut MaxWeight, 2)?;
    println!("max-weight {:.4}", mw.metrics.total_cost);
    Ok(())
}
