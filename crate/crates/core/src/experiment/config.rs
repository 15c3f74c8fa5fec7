//! JSON experiment configuration and policy construction.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::graphs::enumerate_connected_graphs;
use crate::experiment::scenario::Scenario;
use crate::instance::{Instance, InstanceSpec};
use crate::policy::age_debt::{
    AgeDebt, DecisionRule, FlowControlParams, GradientDescentParams, IntermediateQueues, TargetMode,
    TieBreak,
};
use crate::policy::age_difference::AgeDifference;
use crate::policy::baselines::{MaxWeight, RoundRobin};
use crate::policy::dp::{value_iteration_oracle, DpParams, DpSolution};
use crate::policy::stationary::{SolverParams, StationaryRandomized};
use crate::sim::{replication_seed, run_replications, Policy, SimulationConfig};

// Derived seed streams, offset far past any replication index.
const SCENARIO_SEED_OFFSET: u64 = 1_000_000;
const PILOT_SEED_OFFSET: u64 = 2_000_000;
const ORACLE_SEED_OFFSET: u64 = 3_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenarios: Vec<ScenarioEntry>,
    /// Families expanded into additional scenarios.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<GeneratorSpec>,
    pub policies: Vec<PolicySpec>,
    pub simulation: SimulationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Policy label whose total cost orders the sweep summary; defaults to
    /// the first policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort_by: Option<String>,
    #[serde(default)]
    pub dp: DpParams,
    /// Slots simulated to split the dynamic-programming optimum per pair.
    #[serde(default = "default_oracle_slots")]
    pub oracle_slots: u64,
}

fn default_oracle_slots() -> u64 {
    1_000_000
}

/// A scenario given either by generator or as an explicit instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Scenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSpec>,
    /// Seed for random scenario parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// `all_to_all_graph` on every connected graph with each node count.
    ConnectedGraphs {
        n_values: Vec<usize>,
        #[serde(default = "unit")]
        gamma: f64,
    },
}

fn unit() -> f64 {
    1.0
}

/// Where a policy's targets come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Values { values: Vec<f64> },
    /// A targets file written by `oracle-dp`.
    File { path: PathBuf },
    /// Per-pair average cost of a pilot policy on the same scenario,
    /// scaled by `1 + margin`.
    Pilot {
        policy: Box<PolicySpec>,
        #[serde(default)]
        margin: f64,
    },
    /// Per-pair costs of the dynamic-programming optimum, scaled by
    /// `1 + margin`.
    Dp {
        #[serde(default)]
        margin: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    StationaryRandomized {
        /// Action probabilities; optimized when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        distribution: Option<Vec<f64>>,
    },
    AgeDifference,
    AgeDebt {
        targets: TargetSpec,
        #[serde(default)]
        intermediate: IntermediateQueues,
        #[serde(default)]
        tie_break: TieBreak,
        #[serde(default)]
        rule: DecisionRule,
    },
    AgeDebtGradient {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epoch_len: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epochs: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        /// `α(1)`; defaults to the round-robin pilot's per-pair cost.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<TargetSpec>,
        #[serde(default)]
        intermediate: IntermediateQueues,
        #[serde(default)]
        tie_break: TieBreak,
    },
    AgeDebtFlowControl {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v: Option<f64>,
        /// Defaults to the largest per-pair cost of a round-robin pilot.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha_max: Option<f64>,
        #[serde(default)]
        intermediate: IntermediateQueues,
        #[serde(default)]
        tie_break: TieBreak,
    },
    MaxWeight,
    RoundRobin,
    DpOptimal,
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::StationaryRandomized { .. } => "stationary_randomized",
            PolicySpec::AgeDifference => "age_difference",
            PolicySpec::AgeDebt { .. } => "age_debt",
            PolicySpec::AgeDebtGradient { .. } => "age_debt_gradient",
            PolicySpec::AgeDebtFlowControl { .. } => "age_debt_flow_control",
            PolicySpec::MaxWeight => "max_weight",
            PolicySpec::RoundRobin => "round_robin",
            PolicySpec::DpOptimal => "dp_optimal",
        }
    }

    /// Name plus any non-default queue options, e.g.
    /// `age_debt[intermediate=off,tie_break=highest_index]`. Used in result
    /// files so variants of one policy stay distinguishable.
    pub fn label(&self) -> String {
        let mut opts = Vec::new();
        let (intermediate, tie_break, rule) = match self {
            PolicySpec::AgeDebt {
                intermediate,
                tie_break,
                rule,
                ..
            } => (*intermediate, *tie_break, *rule),
            PolicySpec::AgeDebtGradient {
                intermediate, tie_break, ..
            }
            | PolicySpec::AgeDebtFlowControl {
                intermediate, tie_break, ..
            } => (*intermediate, *tie_break, DecisionRule::default()),
            _ => return self.name().to_string(),
        };
        if intermediate != IntermediateQueues::default() {
            opts.push(format!("intermediate={}", snake(&intermediate)));
        }
        if tie_break != TieBreak::default() {
            opts.push(format!("tie_break={}", snake(&tie_break)));
        }
        if rule != DecisionRule::default() {
            opts.push(format!("rule={}", snake(&rule)));
        }
        if opts.is_empty() {
            self.name().to_string()
        } else {
            format!("{}[{}]", self.name(), opts.join(","))
        }
    }
}

fn snake<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Targets file produced by `oracle-dp`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetsFile {
    pub scenario_id: String,
    pub targets: Vec<f64>,
    pub optimal_cost: f64,
    pub gain_bounds: (f64, f64),
    pub simulated_total: f64,
    pub a_max: u64,
}

impl TargetsFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_json(&text, path)
    }
}

/// Reads and validates a config file; errors carry the JSON path of the
/// first problem.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config: ExperimentConfig = parse_json(&text, path)?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = parse_json(text, Path::new("<inline>"))?;
    config.validate()?;
    Ok(config)
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, file: &Path) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config {
            path: if path == "." {
                file.display().to_string()
            } else {
                path
            },
            message: e.into_inner().to_string(),
        }
    })
}

/// A scenario ready to simulate.
#[derive(Clone, Debug)]
pub struct ResolvedScenario {
    pub id: String,
    pub seed: u64,
    pub spec: InstanceSpec,
    pub instance: Instance,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.simulation.validate().map_err(|e| Error::Config {
            path: "simulation".into(),
            message: e.to_string(),
        })?;
        if self.policies.is_empty() {
            return Err(Error::Config {
                path: "policies".into(),
                message: "at least one policy is required".into(),
            });
        }
        if self.scenarios.is_empty() && self.generators.is_empty() {
            return Err(Error::Config {
                path: "scenarios".into(),
                message: "at least one scenario or generator is required".into(),
            });
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if s.generator.is_some() == s.instance.is_some() {
                return Err(Error::Config {
                    path: format!("scenarios[{i}]"),
                    message: "give exactly one of `generator` and `instance`".into(),
                });
            }
        }
        if let Some(name) = &self.sort_by {
            if !self.policies.iter().any(|p| p.label() == *name) {
                return Err(Error::Config {
                    path: "sort_by".into(),
                    message: format!("no policy named `{name}`"),
                });
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("results"))
    }

    /// Every scenario, generator families expanded, in config order.
    pub fn scenario_entries(&self) -> Result<Vec<ScenarioEntry>> {
        let mut out = self.scenarios.clone();
        for g in &self.generators {
            match g {
                GeneratorSpec::ConnectedGraphs { n_values, gamma } => {
                    for &n in n_values {
                        for (i, graph) in enumerate_connected_graphs(n)?.into_iter().enumerate() {
                            out.push(ScenarioEntry {
                                id: Some(format!("graph_n{n}_{:03}", i + 1)),
                                generator: Some(Scenario::AllToAllGraph {
                                    topology: graph.to_topology(*gamma),
                                }),
                                instance: None,
                                seed: None,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Builds scenario `index` of [`Self::scenario_entries`].
    pub fn resolve_entry(&self, index: usize, entry: &ScenarioEntry) -> Result<ResolvedScenario> {
        let seed = entry
            .seed
            .unwrap_or_else(|| replication_seed(self.simulation.seed, SCENARIO_SEED_OFFSET + index as u64));
        let id = entry.id.clone().unwrap_or_else(|| match &entry.generator {
            Some(g) => format!("{}_{index}", g.name()),
            None => format!("scenario_{index}"),
        });
        let spec = match (&entry.generator, &entry.instance) {
            (Some(g), None) => g.spec(seed)?,
            (None, Some(s)) => s.clone(),
            _ => {
                return Err(Error::Config {
                    path: format!("scenarios[{index}]"),
                    message: "give exactly one of `generator` and `instance`".into(),
                })
            }
        };
        let instance = Instance::from_spec(&spec)?;
        Ok(ResolvedScenario {
            id,
            seed,
            spec,
            instance,
        })
    }

    /// The config with every scenario written out explicitly.
    pub fn echo(&self, resolved: &[ResolvedScenario]) -> ExperimentConfig {
        ExperimentConfig {
            scenarios: resolved
                .iter()
                .map(|r| ScenarioEntry {
                    id: Some(r.id.clone()),
                    generator: None,
                    instance: Some(r.spec.clone()),
                    seed: Some(r.seed),
                })
                .collect(),
            generators: Vec::new(),
            ..self.clone()
        }
    }
}

/// A configured policy that can be instantiated once per replication.
#[derive(Clone, Debug)]
pub enum PolicyPrototype {
    Stationary(StationaryRandomized),
    AgeDifference,
    AgeDebt(AgeDebt),
    MaxWeight,
    RoundRobin,
    Dp(DpSolution),
}

impl PolicyPrototype {
    pub fn instantiate(&self) -> Box<dyn Policy> {
        match self {
            PolicyPrototype::Stationary(p) => Box::new(p.clone()),
            PolicyPrototype::AgeDifference => Box::new(AgeDifference),
            PolicyPrototype::AgeDebt(p) => Box::new(p.clone()),
            PolicyPrototype::MaxWeight => Box::new(MaxWeight),
            PolicyPrototype::RoundRobin => Box::new(RoundRobin::default()),
            PolicyPrototype::Dp(s) => Box::new(s.policy()),
        }
    }
}

/// Context shared by policy construction on one scenario.
pub struct BuildContext<'a> {
    pub instance: &'a Instance,
    pub simulation: &'a SimulationConfig,
    pub dp: &'a DpParams,
    pub oracle_slots: u64,
    pub seed: u64,
}

impl BuildContext<'_> {
    fn pilot_costs(&self, spec: &PolicySpec) -> Result<Vec<f64>> {
        let proto = build_policy(spec, self)?;
        let cfg = SimulationConfig {
            seed: replication_seed(self.simulation.seed, PILOT_SEED_OFFSET),
            trajectory_stride: None,
            monitor_targets: None,
            ..self.simulation.clone()
        };
        let summary = run_replications(&cfg, self.instance, || Ok(proto.instantiate()))?;
        Ok(summary.pair_cost.iter().map(|c| c.mean).collect())
    }

    fn dp_solution(&self) -> Result<(DpSolution, Vec<f64>)> {
        let r = value_iteration_oracle(self.instance, self.dp, self.oracle_slots, replication_seed(self.seed, ORACLE_SEED_OFFSET))?;
        Ok((r.solution, r.targets))
    }

    pub fn targets(&self, spec: &TargetSpec) -> Result<Vec<f64>> {
        let scale = |v: Vec<f64>, margin: f64| v.into_iter().map(|a| a * (1.0 + margin)).collect();
        match spec {
            TargetSpec::Values { values } => Ok(values.clone()),
            TargetSpec::File { path } => Ok(TargetsFile::read(path)?.targets),
            TargetSpec::Pilot { policy, margin } => Ok(scale(self.pilot_costs(policy)?, *margin)),
            TargetSpec::Dp { margin } => Ok(scale(self.dp_solution()?.1, *margin)),
        }
    }
}

pub fn build_policy(spec: &PolicySpec, ctx: &BuildContext<'_>) -> Result<PolicyPrototype> {
    Ok(match spec {
        PolicySpec::StationaryRandomized { distribution } => PolicyPrototype::Stationary(match distribution {
            Some(x) => StationaryRandomized::new(x.clone())?,
            None => StationaryRandomized::optimal(ctx.instance, &SolverParams::default())?.0,
        }),
        PolicySpec::AgeDifference => PolicyPrototype::AgeDifference,
        PolicySpec::AgeDebt {
            targets,
            intermediate,
            tie_break,
            rule,
        } => PolicyPrototype::AgeDebt(
            AgeDebt::fixed(ctx.targets(targets)?)
                .with_intermediate(*intermediate)
                .with_tie_break(*tie_break)
                .with_rule(*rule),
        ),
        PolicySpec::AgeDebtGradient {
            epoch_len,
            epochs,
            eta,
            epsilon,
            initial,
            intermediate,
            tie_break,
        } => {
            let initial = match initial {
                Some(t) => ctx.targets(t)?,
                None => ctx.pilot_costs(&PolicySpec::RoundRobin)?,
            };
            let mut p = GradientDescentParams::with_initial(initial);
            if let Some(v) = epoch_len {
                p.epoch_len = *v;
            }
            if let Some(v) = epochs {
                p.epochs = *v;
            }
            if let Some(v) = eta {
                p.eta = *v;
            }
            if let Some(v) = epsilon {
                p.epsilon = *v;
            }
            PolicyPrototype::AgeDebt(
                AgeDebt::new(TargetMode::GradientDescent(p))
                    .with_intermediate(*intermediate)
                    .with_tie_break(*tie_break),
            )
        }
        PolicySpec::AgeDebtFlowControl {
            v,
            alpha_max,
            intermediate,
            tie_break,
        } => {
            let alpha_max = match alpha_max {
                Some(a) => *a,
                None => ctx
                    .pilot_costs(&PolicySpec::RoundRobin)?
                    .into_iter()
                    .fold(1.0, f64::max),
            };
            PolicyPrototype::AgeDebt(
                AgeDebt::new(TargetMode::FlowControl(FlowControlParams { v: *v, alpha_max }))
                    .with_intermediate(*intermediate)
                    .with_tie_break(*tie_break),
            )
        }
        PolicySpec::MaxWeight => PolicyPrototype::MaxWeight,
        PolicySpec::RoundRobin => PolicyPrototype::RoundRobin,
        PolicySpec::DpOptimal => PolicyPrototype::Dp(ctx.dp_solution()?.0),
    })
}
