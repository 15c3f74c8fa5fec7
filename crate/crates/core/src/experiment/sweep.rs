//! Scenario × policy orchestration with incremental result files.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::config::{build_policy, BuildContext, ExperimentConfig, ResolvedScenario};
use crate::experiment::output::{
    create_dir, records_for, summary_rows, trajectory_rows, write_csv, write_json, CsvSink, FailureRow,
    ResultRecord, SummaryRow, SweepSummaryRow, TrajectoryRecord,
};
use crate::sim::{run_replications, MeanCi};

/// Replication means of one (scenario, policy) cell.
#[derive(Clone, Debug)]
pub struct CellResult {
    pub scenario_id: String,
    pub policy: String,
    pub total_cost: MeanCi,
    pub weighted_age: MeanCi,
    pub pair_cost: Vec<f64>,
    pub pair_age: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub cells: Vec<CellResult>,
    pub failures: Vec<FailureRow>,
    pub out_dir: PathBuf,
}

struct Sinks {
    records: CsvSink<ResultRecord>,
    summary: CsvSink<SummaryRow>,
    trajectories: Option<CsvSink<TrajectoryRecord>>,
}

impl Sinks {
    fn create(dir: &Path, trajectories: bool) -> Result<Self> {
        create_dir(dir)?;
        Ok(Sinks {
            records: CsvSink::create(dir.join("records.csv"))?,
            summary: CsvSink::create(dir.join("summary.csv"))?,
            trajectories: if trajectories {
                Some(CsvSink::create(dir.join("trajectories.csv"))?)
            } else {
                None
            },
        })
    }
}

/// Runs every policy on one scenario and appends its rows.
fn run_scenario(config: &ExperimentConfig, scenario: &ResolvedScenario, sinks: &mut Sinks) -> Result<Vec<CellResult>> {
    let ctx = BuildContext {
        instance: &scenario.instance,
        simulation: &config.simulation,
        dp: &config.dp,
        oracle_slots: config.oracle_slots,
        seed: scenario.seed,
    };
    // Build everything first so a scenario fails before writing any rows.
    let prototypes = config
        .policies
        .iter()
        .map(|spec| build_policy(spec, &ctx))
        .collect::<Result<Vec<_>>>()?;
    let mut summaries = Vec::with_capacity(prototypes.len());
    for proto in &prototypes {
        summaries.push(run_replications(&config.simulation, &scenario.instance, || {
            Ok(proto.instantiate())
        })?);
    }
    let mut cells = Vec::new();
    for (spec, summary) in config.policies.iter().zip(&summaries) {
        let name = spec.label();
        sinks.records.append(&records_for(
            &scenario.id,
            &name,
            &scenario.instance,
            summary,
            config.simulation.horizon,
        ))?;
        sinks
            .summary
            .append(&summary_rows(&scenario.id, &name, &scenario.instance, summary))?;
        if let Some(t) = sinks.trajectories.as_mut() {
            t.append(&trajectory_rows(&scenario.id, &name, summary))?;
        }
        cells.push(CellResult {
            scenario_id: scenario.id.clone(),
            policy: name,
            total_cost: summary.total_cost,
            weighted_age: summary.weighted_age,
            pair_cost: summary.pair_cost.iter().map(|c| c.mean).collect(),
            pair_age: summary.pair_age.iter().map(|c| c.mean).collect(),
        });
    }
    Ok(cells)
}

fn check_unique_ids(scenarios: &[ResolvedScenario]) -> Result<()> {
    let mut ids: Vec<&str> = scenarios.iter().map(|s| s.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Config {
            path: "scenarios".into(),
            message: format!("duplicate scenario id `{}`", w[0]),
        });
    }
    Ok(())
}

/// Runs all scenarios and policies, stopping at the first error.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<SweepReport> {
    config.validate()?;
    let entries = config.scenario_entries()?;
    let resolved = entries
        .iter()
        .enumerate()
        .map(|(i, e)| config.resolve_entry(i, e))
        .collect::<Result<Vec<_>>>()?;
    check_unique_ids(&resolved)?;
    let mut sinks = Sinks::create(out_dir, config.simulation.trajectory_stride.is_some())?;
    write_json(&out_dir.join("config.echo.json"), &config.echo(&resolved))?;
    let mut report = SweepReport {
        out_dir: out_dir.to_path_buf(),
        ..Default::default()
    };
    for scenario in &resolved {
        report.cells.extend(run_scenario(config, scenario, &mut sinks)?);
    }
    Ok(report)
}

/// Like [`run_experiment`], but a failing scenario is recorded in
/// `sweep_failures.csv` and skipped. Also writes `sweep_summary.csv`, one
/// row per cell, ordered by the `sort_by` policy's cost on each scenario.
pub fn run_sweep(config: &ExperimentConfig, out_dir: &Path) -> Result<SweepReport> {
    config.validate()?;
    let entries = config.scenario_entries()?;
    let mut resolved = Vec::new();
    let mut failures = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        match config.resolve_entry(i, e) {
            Ok(r) => resolved.push(r),
            Err(err) => failures.push(failure(e.id.clone().unwrap_or_else(|| format!("scenario_{i}")), &err)),
        }
    }
    check_unique_ids(&resolved)?;
    let mut sinks = Sinks::create(out_dir, config.simulation.trajectory_stride.is_some())?;
    write_json(&out_dir.join("config.echo.json"), &config.echo(&resolved))?;
    let mut cells = Vec::new();
    for scenario in &resolved {
        match run_scenario(config, scenario, &mut sinks) {
            Ok(c) => cells.extend(c),
            Err(err @ (Error::Io { .. } | Error::Csv { .. })) => return Err(err),
            Err(err) => failures.push(failure(scenario.id.clone(), &err)),
        }
    }
    let baseline = config
        .sort_by
        .clone()
        .unwrap_or_else(|| config.policies[0].label());
    write_csv(out_dir.join("sweep_summary.csv"), &sweep_summary(&cells, &baseline))?;
    write_csv(out_dir.join("sweep_failures.csv"), &failures)?;
    Ok(SweepReport {
        cells,
        failures,
        out_dir: out_dir.to_path_buf(),
    })
}

fn failure(scenario_id: String, err: &Error) -> FailureRow {
    FailureRow {
        scenario_id,
        kind: err.kind().to_string(),
        message: err.to_string(),
    }
}

/// Cells ranked by the baseline policy's total cost on their scenario
/// (ascending, ties by scenario id); within a scenario, config order.
pub fn sweep_summary(cells: &[CellResult], baseline: &str) -> Vec<SweepSummaryRow> {
    let baseline_of = |id: &str| {
        cells
            .iter()
            .find(|c| c.scenario_id == id && c.policy == baseline)
            .map_or(f64::INFINITY, |c| c.total_cost.mean)
    };
    let mut scenarios: Vec<(f64, &str)> = Vec::new();
    for c in cells {
        if !scenarios.iter().any(|(_, id)| *id == c.scenario_id) {
            scenarios.push((baseline_of(&c.scenario_id), &c.scenario_id));
        }
    }
    scenarios.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    scenarios
        .iter()
        .enumerate()
        .flat_map(|(rank, &(base, id))| {
            cells.iter().filter(move |c| c.scenario_id == id).map(move |c| SweepSummaryRow {
                rank: rank + 1,
                scenario_id: id.to_string(),
                policy: c.policy.clone(),
                weighted_total: c.total_cost.mean,
                ci95_low: c.total_cost.ci95.map(|x| x.0),
                ci95_high: c.total_cost.ci95.map(|x| x.1),
                weighted_age: c.weighted_age.mean,
                baseline_total: base,
            })
        })
        .collect()
}
