//! All-to-all broadcast on every connected five-node graph, written as a
//! sweep to a temporary results directory.
//!
//! ```text
//! cargo run --release --example graph_sweep
//! ```

use aoi_core::experiment::config::parse_config_str;
use aoi_core::experiment::graphs::enumerate_connected_graphs;
use aoi_core::experiment::sweep::run_sweep;

fn main() -> aoi_core::Result<()> {
    for n in 1..=6 {
        println!("{n} nodes: {} connected graphs", enumerate_connected_graphs(n)?.len());
    }
    let config = parse_config_str(
        r#"{
            "generators": [{"family": "connected_graphs", "n_values": [5]}],
            "policies": [
                {"name": "age_debt_flow_control", "alpha_max": 20},
                {"name": "round_robin"}
            ],
            "simulation": {"horizon": 10000, "replications": 1, "seed": 1}
        }"#,
    )?;
    let out = std::env::temp_dir().join("aoi_graph_sweep");
    let report = run_sweep(&config, &out)?;
    for c in report.cells.iter().filter(|c| c.policy == "age_debt_flow_control").take(5) {
        println!("{}  {:.1}", c.scenario_id, c.total_cost.mean);
    }
    println!("{} cells written to {}", report.cells.len(), out.display());
    Ok(())
}
