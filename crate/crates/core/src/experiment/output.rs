//! CSV and JSON result files.
//!
//! A results directory holds `records.csv` (one row per scenario, policy,
//! replication and pair), `summary.csv` (replication means per pair),
//! optional `trajectories.csv` and `config.echo.json`. Sweeps add
//! `sweep_summary.csv` and `sweep_failures.csv`.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::sim::ReplicationSummary;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub scenario_id: String,
    pub policy: String,
    pub replication: usize,
    pub seed: u64,
    pub pair_k: usize,
    pub pair_j: usize,
    pub avg_age: f64,
    pub avg_cost: f64,
    /// Weighted totals of the whole replication.
    pub weighted_age: f64,
    pub weighted_total: f64,
    /// `Σ Q(T)/T` of the policy's own destination queues.
    pub policy_debt_rate: Option<f64>,
    /// `Σ Q(T)/T` of the passive monitor queues.
    pub monitor_debt_rate: Option<f64>,
    pub wall_clock_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub policy: String,
    pub pair_k: usize,
    pub pair_j: usize,
    pub avg_age: f64,
    pub avg_cost: f64,
    pub weighted_total: f64,
    /// Interval on `weighted_total`; empty for a single replication.
    pub ci95_low: Option<f64>,
    pub ci95_high: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub scenario_id: String,
    pub policy: String,
    pub slot: u64,
    pub pair: usize,
    pub age: u64,
    pub cost: f64,
    pub debt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummaryRow {
    pub rank: usize,
    pub scenario_id: String,
    pub policy: String,
    pub weighted_total: f64,
    pub ci95_low: Option<f64>,
    pub ci95_high: Option<f64>,
    pub weighted_age: f64,
    /// Cost of the sorting policy on the same scenario.
    pub baseline_total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureRow {
    pub scenario_id: String,
    pub kind: String,
    pub message: String,
}

/// Rows for one (scenario, policy) cell.
pub fn records_for(
    scenario_id: &str,
    policy: &str,
    instance: &Instance,
    summary: &ReplicationSummary,
    horizon: u64,
) -> Vec<ResultRecord> {
    let mut out = Vec::new();
    for (r, run) in summary.runs.iter().enumerate() {
        for pm in &run.metrics.pairs {
            out.push(ResultRecord {
                scenario_id: scenario_id.to_string(),
                policy: policy.to_string(),
                replication: r,
                seed: run.seed,
                pair_k: instance.flows()[pm.pair.flow].source().0,
                pair_j: pm.node.0,
                avg_age: pm.avg_age,
                avg_cost: pm.avg_cost,
                weighted_age: run.metrics.weighted_age,
                weighted_total: run.metrics.total_cost,
                policy_debt_rate: run.policy_debt_rate(horizon),
                monitor_debt_rate: run.monitor_debt_rate(horizon),
                wall_clock_secs: run.wall_clock_secs,
            });
        }
    }
    out
}

pub fn summary_rows(
    scenario_id: &str,
    policy: &str,
    instance: &Instance,
    summary: &ReplicationSummary,
) -> Vec<SummaryRow> {
    let ci = summary.total_cost.ci95;
    instance
        .pairs()
        .iter()
        .enumerate()
        .map(|(i, &p)| SummaryRow {
            scenario_id: scenario_id.to_string(),
            policy: policy.to_string(),
            pair_k: instance.flows()[p.flow].source().0,
            pair_j: instance.pair_node(p).0,
            avg_age: summary.pair_age[i].mean,
            avg_cost: summary.pair_cost[i].mean,
            weighted_total: summary.total_cost.mean,
            ci95_low: ci.map(|c| c.0),
            ci95_high: ci.map(|c| c.1),
        })
        .collect()
}

pub fn trajectory_rows(scenario_id: &str, policy: &str, summary: &ReplicationSummary) -> Vec<TrajectoryRecord> {
    summary
        .runs
        .first()
        .map(|run| {
            run.trajectory
                .iter()
                .map(|t| TrajectoryRecord {
                    scenario_id: scenario_id.to_string(),
                    policy: policy.to_string(),
                    slot: t.slot,
                    pair: t.pair,
                    age: t.age,
                    cost: t.cost,
                    debt: t.debt,
                })
                .collect()
        })
        .unwrap_or_default()
}

/// Appends rows of one type to a CSV file, flushing after every batch.
/// The header is written on creation, so an unused file is header-only.
pub struct CsvSink<T> {
    path: PathBuf,
    writer: csv::Writer<File>,
    _row: std::marker::PhantomData<T>,
}

impl<T: Serialize + HeaderRow> CsvSink<T> {
    pub fn create(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        writer
            .write_record(T::HEADER)
            .map_err(|e| csv_error(&path, e))?;
        let mut sink = CsvSink {
            path,
            writer,
            _row: std::marker::PhantomData,
        };
        sink.flush()?;
        Ok(sink)
    }

    pub fn append(&mut self, rows: &[T]) -> Result<()> {
        for row in rows {
            self.writer.serialize(row).map_err(|e| csv_error(&self.path, e))?;
        }
        self.flush()
    }

    fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Column names, needed up front so empty files still get a header.
pub trait HeaderRow {
    const HEADER: &'static [&'static str];
}

impl HeaderRow for ResultRecord {
    const HEADER: &'static [&'static str] = &[
        "scenario_id",
        "policy",
        "replication",
        "seed",
        "pair_k",
        "pair_j",
        "avg_age",
        "avg_cost",
        "weighted_age",
        "weighted_total",
        "policy_debt_rate",
        "monitor_debt_rate",
        "wall_clock_secs",
    ];
}

impl HeaderRow for SummaryRow {
    const HEADER: &'static [&'static str] = &[
        "scenario_id",
        "policy",
        "pair_k",
        "pair_j",
        "avg_age",
        "avg_cost",
        "weighted_total",
        "ci95_low",
        "ci95_high",
    ];
}

impl HeaderRow for TrajectoryRecord {
    const HEADER: &'static [&'static str] =
        &["scenario_id", "policy", "slot", "pair", "age", "cost", "debt"];
}

impl HeaderRow for SweepSummaryRow {
    const HEADER: &'static [&'static str] = &[
        "rank",
        "scenario_id",
        "policy",
        "weighted_total",
        "ci95_low",
        "ci95_high",
        "weighted_age",
        "baseline_total",
    ];
}

impl HeaderRow for FailureRow {
    const HEADER: &'static [&'static str] = &["scenario_id", "kind", "message"];
}

/// Writes a whole CSV file at once.
pub fn write_csv<T: Serialize + HeaderRow>(path: impl Into<PathBuf>, rows: &[T]) -> Result<()> {
    CsvSink::create(path)?.append(rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("result types serialize");
    text.push('\n');
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
