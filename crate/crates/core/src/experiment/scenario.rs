//! Named instance generators.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action::InterferenceSpec;
use crate::cost::{CostShape, DEFAULT_COST_CAP};
use crate::error::{Error, Result};
use crate::flow::{DestinationSpec, FlowSpec};
use crate::instance::{Instance, InstanceSpec};
use crate::topology::{EdgeSpec, NodeId, RawTopology};

pub const SCENARIO_NAMES: [&str; 5] = [
    "broadcast_star",
    "functions_star",
    "unicast_line_oddeven",
    "unicast_line_single",
    "all_to_all_graph",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    /// `n` nodes: sources `1..n-1` each send to hub `n` with weight `i/n`
    /// (cost `(i/n)·A`) over an edge with `γ ~ U[0.6, 1]` drawn from the seed.
    BroadcastStar { n: usize },
    /// `sources` single-hop flows into one hub, costs cycled through
    /// `15A, e^A, A³, A²`.
    FunctionsStar {
        #[serde(default = "four")]
        sources: usize,
        #[serde(default = "unit")]
        gamma: f64,
    },
    /// Line `1 - ... - n`, one flow `1 → n` relayed by every interior node;
    /// either all odd or all even nodes transmit in a slot.
    UnicastLineOddeven {
        n: usize,
        #[serde(default = "unit")]
        gamma: f64,
    },
    /// As above with one transmission per slot.
    UnicastLineSingle {
        n: usize,
        #[serde(default = "unit")]
        gamma: f64,
    },
    /// Every node broadcasts to all others, any node may relay, one
    /// transmission per slot.
    AllToAllGraph { topology: RawTopology },
}

fn four() -> usize {
    4
}

fn unit() -> f64 {
    1.0
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::BroadcastStar { .. } => SCENARIO_NAMES[0],
            Scenario::FunctionsStar { .. } => SCENARIO_NAMES[1],
            Scenario::UnicastLineOddeven { .. } => SCENARIO_NAMES[2],
            Scenario::UnicastLineSingle { .. } => SCENARIO_NAMES[3],
            Scenario::AllToAllGraph { .. } => SCENARIO_NAMES[4],
        }
    }

    /// Looks a generator up by name with JSON parameters.
    pub fn from_name(name: &str, params: serde_json::Value) -> Result<Self> {
        if !SCENARIO_NAMES.contains(&name) {
            return Err(Error::UnknownScenario(name.to_string()));
        }
        let mut obj = match params {
            serde_json::Value::Object(m) => m,
            serde_json::Value::Null => Default::default(),
            other => {
                return Err(Error::Config {
                    path: "params".into(),
                    message: format!("expected an object, got {other}"),
                })
            }
        };
        obj.insert("name".into(), name.into());
        serde_json::from_value(serde_json::Value::Object(obj)).map_err(|e| Error::Config {
            path: "params".into(),
            message: e.to_string(),
        })
    }

    /// Resolves the generator into an explicit instance description; random
    /// parameters are drawn from `seed`.
    pub fn spec(&self, seed: u64) -> Result<InstanceSpec> {
        match self {
            Scenario::BroadcastStar { n } => {
                require(*n >= 2, "broadcast_star needs n >= 2")?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let dist = Uniform::new_inclusive(0.6, 1.0);
                let gammas: Vec<f64> = (1..*n).map(|_| dist.sample(&mut rng)).collect();
                let weights: Vec<f64> = (1..*n).map(|i| i as f64 / *n as f64).collect();
                let costs = weights
                    .iter()
                    .map(|&w| CostShape::Linear { slope: w })
                    .collect();
                Ok(star_spec(&gammas, &weights, costs))
            }
            Scenario::FunctionsStar { sources, gamma } => {
                require(*sources >= 1, "functions_star needs at least one source")?;
                let palette = [
                    CostShape::Linear { slope: 15.0 },
                    CostShape::Exponential { rate: 1.0, scale: 1.0 },
                    CostShape::Power { exponent: 3.0, scale: 1.0 },
                    CostShape::Power { exponent: 2.0, scale: 1.0 },
                ];
                let costs = (0..*sources).map(|i| palette[i % palette.len()].clone()).collect();
                Ok(star_spec(&vec![*gamma; *sources], &vec![1.0; *sources], costs))
            }
            Scenario::UnicastLineOddeven { n, gamma } => {
                line_spec(*n, *gamma, InterferenceSpec::LineOddEven)
            }
            Scenario::UnicastLineSingle { n, gamma } => {
                line_spec(*n, *gamma, InterferenceSpec::SingleTransmitter)
            }
            Scenario::AllToAllGraph { topology } => {
                let n = topology.node_count;
                let flows = (1..=n)
                    .map(|k| {
                        let others: Vec<NodeId> = (1..=n).filter(|&v| v != k).map(NodeId).collect();
                        FlowSpec {
                            source: NodeId(k),
                            commissioned: others.clone(),
                            destinations: others
                                .into_iter()
                                .map(|v| DestinationSpec::linear(v, 1.0))
                                .collect(),
                            path: None,
                        }
                    })
                    .collect();
                Ok(InstanceSpec {
                    topology: topology.clone(),
                    flows,
                    interference: InterferenceSpec::SingleTransmitter,
                })
            }
        }
    }

    pub fn build(&self, seed: u64) -> Result<Instance> {
        Instance::from_spec(&self.spec(seed)?)
    }
}

fn require(ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config {
            path: "scenario".into(),
            message: message.into(),
        })
    }
}

fn star_spec(gammas: &[f64], weights: &[f64], costs: Vec<CostShape>) -> InstanceSpec {
    let hub = NodeId(gammas.len() + 1);
    InstanceSpec {
        topology: RawTopology {
            node_count: gammas.len() + 1,
            edges: gammas
                .iter()
                .enumerate()
                .map(|(i, &gamma)| EdgeSpec { u: NodeId(i + 1), v: hub, gamma })
                .collect(),
        },
        flows: weights
            .iter()
            .zip(costs)
            .enumerate()
            .map(|(i, (&weight, cost))| FlowSpec {
                source: NodeId(i + 1),
                commissioned: vec![],
                destinations: vec![DestinationSpec {
                    node: hub,
                    weight,
                    cost,
                    cost_cap: DEFAULT_COST_CAP,
                }],
                path: None,
            })
            .collect(),
        interference: InterferenceSpec::SingleTransmitter,
    }
}

fn line_spec(n: usize, gamma: f64, interference: InterferenceSpec) -> Result<InstanceSpec> {
    require(n >= 2, "line scenarios need n >= 2")?;
    Ok(InstanceSpec {
        topology: RawTopology {
            node_count: n,
            edges: (1..n)
                .map(|i| EdgeSpec { u: NodeId(i), v: NodeId(i + 1), gamma })
                .collect(),
        },
        flows: vec![FlowSpec {
            source: NodeId(1),
            commissioned: (2..n).map(NodeId).collect(),
            destinations: vec![DestinationSpec::linear(NodeId(n), 1.0)],
            path: Some((1..=n).map(NodeId).collect()),
        }],
        interference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadcast_star_weights_and_gammas() {
        let inst = Scenario::BroadcastStar { n: 4 }.build(3).unwrap();
        let w: Vec<f64> = inst.flows().iter().map(|f| f.destinations()[0].weight).collect();
        assert_eq!(w, vec![0.25, 0.5, 0.75]);
        for e in inst.topology().edges() {
            assert!((0.6..=1.0).contains(&e.gamma));
        }
        assert_eq!(inst.actions().len(), 4);
        // Same seed, same draw.
        assert_eq!(
            Scenario::BroadcastStar { n: 4 }.spec(3).unwrap(),
            Scenario::BroadcastStar { n: 4 }.spec(3).unwrap()
        );
    }

    #[test]
    fn functions_star_costs() {
        let inst = Scenario::FunctionsStar { sources: 4, gamma: 1.0 }.build(0).unwrap();
        let at2: Vec<f64> = inst.flows().iter().map(|f| f.destinations()[0].cost.eval(2)).collect();
        assert_eq!(at2[0], 30.0);
        assert!((at2[1] - 2f64.exp()).abs() < 1e-12);
        assert_eq!(&at2[2..], &[8.0, 4.0]);
    }

    #[test]
    fn line_single_is_the_three_node_example() {
        let inst = Scenario::UnicastLineSingle { n: 3, gamma: 1.0 }.build(0).unwrap();
        // idle, 1 -> 2, 2 -> 3; the source never receives.
        assert_eq!(inst.actions().len(), 3);
        let odd = Scenario::UnicastLineOddeven { n: 4, gamma: 1.0 }.build(0).unwrap();
        assert_eq!(odd.actions().len(), 3);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(
            Scenario::from_name("ring", serde_json::Value::Null),
            Err(Error::UnknownScenario(_))
        ));
        let s = Scenario::from_name("unicast_line_single", serde_json::json!({"n": 5})).unwrap();
        assert_eq!(s, Scenario::UnicastLineSingle { n: 5, gamma: 1.0 });
    }
}
