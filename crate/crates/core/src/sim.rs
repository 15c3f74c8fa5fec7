//! Slotted simulation loop, policy interface and seeded replications.
//!
//! Each slot runs in a fixed order:
//!
//! ```text
//! observe -> decide -> apply link states -> evolve ages
//!         -> policy end-of-slot hook -> accumulate metrics
//! ```
//!
//! Link states and policy randomness come from two independent ChaCha
//! streams of the same per-replication seed, so a policy's random draws
//! never shift the channel realization.

use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::action::Action;
use crate::age::{AgeState, MetricsAccumulator, RunMetrics};
use crate::channel::LinkStates;
use crate::error::{Error, Result};
use crate::instance::Instance;

/// What a policy may see before choosing an action.
pub struct Observation<'a> {
    pub instance: &'a Instance,
    pub ages: &'a AgeState,
    /// Realized `S(t)`; `None` unless the channel is observable.
    pub link_states: Option<&'a LinkStates>,
    pub slot: u64,
}

/// Everything that happened in one slot, handed to the end-of-slot hook.
pub struct SlotOutcome<'a> {
    pub instance: &'a Instance,
    pub action_index: usize,
    pub action: &'a Action,
    pub before: &'a AgeState,
    pub after: &'a AgeState,
    pub link_states: &'a LinkStates,
}

/// Destination debt queues and targets exposed by debt-aware policies.
#[derive(Clone, Debug, PartialEq)]
pub struct DebtSnapshot {
    pub debts: Vec<f64>,
    pub targets: Vec<f64>,
}

pub trait Policy: Send {
    fn name(&self) -> String;

    /// Called once before the first slot of a run.
    fn reset(&mut self, _instance: &Instance) -> Result<()> {
        Ok(())
    }

    /// Index into the instance's action space.
    fn decide(&mut self, obs: &Observation<'_>, rng: &mut dyn RngCore) -> usize;

    fn end_of_slot(&mut self, _outcome: &SlotOutcome<'_>) {}

    fn debts(&self) -> Option<DebtSnapshot> {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    /// Defaults to 10% of the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Whether policies see `S(t)` before deciding.
    #[serde(default)]
    pub observe_channel: bool,
    /// Record every `n`-th slot of replication 0 as trajectory rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_stride: Option<u64>,
    /// Fixed targets for passive destination debt queues tracked alongside
    /// any policy (flow-major pair order).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitor_targets: Option<Vec<f64>>,
}

fn default_horizon() -> u64 {
    100_000
}

fn default_replications() -> usize {
    10
}

impl SimulationConfig {
    pub fn new(horizon: u64, seed: u64) -> Self {
        SimulationConfig {
            horizon,
            burn_in: None,
            replications: 1,
            seed,
            observe_channel: false,
            trajectory_stride: None,
            monitor_targets: None,
        }
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = Some(burn_in);
        self
    }

    pub fn with_replications(mut self, replications: usize) -> Self {
        self.replications = replications;
        self
    }

    pub fn effective_burn_in(&self) -> u64 {
        self.burn_in.unwrap_or(self.horizon / 10)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon <= self.effective_burn_in() {
            return Err(Error::Simulation(format!(
                "horizon {} must exceed burn-in {}",
                self.horizon,
                self.effective_burn_in()
            )));
        }
        if self.replications == 0 {
            return Err(Error::Simulation("replications must be >= 1".into()));
        }
        if self.trajectory_stride == Some(0) {
            return Err(Error::Simulation("trajectory_stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `r`: `mix64(base + (r + 1) * 0x9E3779B97F4A7C15)`
/// with wrapping arithmetic.
pub fn replication_seed(base: u64, replication: u64) -> u64 {
    mix64(base.wrapping_add(replication.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub slot: u64,
    pub pair: usize,
    pub age: u64,
    pub cost: f64,
    pub debt: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub seed: u64,
    pub metrics: RunMetrics,
    /// Final destination debts of the passive monitor, if configured.
    pub monitor_debts: Option<Vec<f64>>,
    /// Final debts and targets reported by the policy, if it keeps any.
    pub policy_debts: Option<DebtSnapshot>,
    pub trajectory: Vec<TrajectoryRow>,
    pub wall_clock_secs: f64,
}

impl RunResult {
    /// `Σ Q_j^k(T) / T` of the monitor queues.
    pub fn monitor_debt_rate(&self, horizon: u64) -> Option<f64> {
        self.monitor_debts
            .as_ref()
            .map(|q| q.iter().sum::<f64>() / horizon as f64)
    }

    /// `Σ Q_j^k(T) / T` of the policy's own destination queues.
    pub fn policy_debt_rate(&self, horizon: u64) -> Option<f64> {
        self.policy_debts
            .as_ref()
            .map(|d| d.debts.iter().sum::<f64>() / horizon as f64)
    }
}

/// One seeded run of `config.horizon` slots.
pub fn run_simulation(
    config: &SimulationConfig,
    instance: &Instance,
    policy: &mut dyn Policy,
    seed: u64,
) -> Result<RunResult> {
    run_inner(config, instance, policy, seed, config.trajectory_stride)
}

fn run_inner(
    config: &SimulationConfig,
    instance: &Instance,
    policy: &mut dyn Policy,
    seed: u64,
    trajectory_stride: Option<u64>,
) -> Result<RunResult> {
    config.validate()?;
    let started = Instant::now();
    let pairs = instance.pairs();
    if let Some(t) = &config.monitor_targets {
        if t.len() != pairs.len() {
            return Err(Error::Dimension {
                expected: pairs.len(),
                got: t.len(),
            });
        }
    }
    policy.reset(instance)?;

    let mut channel_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut policy_rng = ChaCha8Rng::seed_from_u64(seed);
    policy_rng.set_stream(1);

    let topo = instance.topology();
    let actions = instance.actions();
    let mut ages = AgeState::new(instance);
    let mut next = ages.clone();
    let mut links = LinkStates::all_on(topo.edges().len());
    let mut metrics = MetricsAccumulator::new(instance, config.effective_burn_in());
    let mut monitor = config
        .monitor_targets
        .as_ref()
        .map(|t| (t.clone(), vec![0.0; t.len()]));
    let mut trajectory = Vec::new();

    for slot in 0..config.horizon {
        links.resample(topo, &mut channel_rng);
        let obs = Observation {
            instance,
            ages: &ages,
            link_states: config.observe_channel.then_some(&links),
            slot,
        };
        let index = policy.decide(&obs, &mut policy_rng);
        let action = actions.get(index).ok_or_else(|| Error::PolicyAction {
            policy: policy.name(),
            index,
            len: actions.len(),
        })?;
        next.clone_from(&ages);
        next.evolve(instance.flows(), action, &links)?;
        policy.end_of_slot(&SlotOutcome {
            instance,
            action_index: index,
            action,
            before: &ages,
            after: &next,
            link_states: &links,
        });
        std::mem::swap(&mut ages, &mut next);
        metrics.record(instance, &ages);

        if let Some((targets, queues)) = monitor.as_mut() {
            for (i, &p) in pairs.iter().enumerate() {
                let d = &instance.flows()[p.flow].destinations()[p.dest];
                let b = d.cost.eval(ages.age(p.flow, d.node));
                queues[i] = crate::policy::age_debt::update_destination_debt(queues[i], b, targets[i]);
            }
        }

        if let Some(stride) = trajectory_stride {
            if ages.slot().is_multiple_of(stride) {
                let policy_debts = policy.debts();
                for (i, &p) in pairs.iter().enumerate() {
                    let d = &instance.flows()[p.flow].destinations()[p.dest];
                    let a = ages.age(p.flow, d.node);
                    let debt = policy_debts
                        .as_ref()
                        .map(|s| s.debts[i])
                        .or_else(|| monitor.as_ref().map(|(_, q)| q[i]));
                    trajectory.push(TrajectoryRow {
                        slot: ages.slot(),
                        pair: i,
                        age: a,
                        cost: d.cost.eval(a),
                        debt,
                    });
                }
            }
        }
    }

    Ok(RunResult {
        seed,
        metrics: metrics.finalize(instance)?,
        monitor_debts: monitor.map(|(_, q)| q),
        policy_debts: policy.debts(),
        trajectory,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    })
}

/// Sample mean with a two-sided 95% Student-t interval; `None` for a single
/// sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub ci95: Option<(f64, f64)>,
}

pub fn mean_ci(samples: &[f64]) -> MeanCi {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return MeanCi { mean, ci95: None };
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    let half = t * (var / n as f64).sqrt();
    MeanCi {
        mean,
        ci95: Some((mean - half, mean + half)),
    }
}

#[derive(Clone, Debug)]
pub struct ReplicationSummary {
    pub runs: Vec<RunResult>,
    pub total_cost: MeanCi,
    pub weighted_age: MeanCi,
    /// Per-pair average cost across replications.
    pub pair_cost: Vec<MeanCi>,
    pub pair_age: Vec<MeanCi>,
}

/// Runs `config.replications` independent replications, in parallel. Run `r`
/// uses [`replication_seed`]`(config.seed, r)`; trajectories are kept for
/// replication 0 only.
pub fn run_replications<F>(
    config: &SimulationConfig,
    instance: &Instance,
    make_policy: F,
) -> Result<ReplicationSummary>
where
    F: Fn() -> Result<Box<dyn Policy>> + Sync,
{
    config.validate()?;
    let runs = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let mut policy = make_policy()?;
            let stride = if r == 0 { config.trajectory_stride } else { None };
            run_inner(
                config,
                instance,
                policy.as_mut(),
                replication_seed(config.seed, r as u64),
                stride,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(runs))
}

pub fn summarize(runs: Vec<RunResult>) -> ReplicationSummary {
    let totals: Vec<f64> = runs.iter().map(|r| r.metrics.total_cost).collect();
    let weighted: Vec<f64> = runs.iter().map(|r| r.metrics.weighted_age).collect();
    let n_pairs = runs.first().map_or(0, |r| r.metrics.pairs.len());
    let pair_cost = (0..n_pairs)
        .map(|i| {
            let xs: Vec<f64> = runs.iter().map(|r| r.metrics.pairs[i].avg_cost).collect();
            mean_ci(&xs)
        })
        .collect();
    let pair_age = (0..n_pairs)
        .map(|i| {
            let xs: Vec<f64> = runs.iter().map(|r| r.metrics.pairs[i].avg_age).collect();
            mean_ci(&xs)
        })
        .collect();
    ReplicationSummary {
        total_cost: mean_ci(&totals),
        weighted_age: mean_ci(&weighted),
        pair_cost,
        pair_age,
        runs,
    }
}
