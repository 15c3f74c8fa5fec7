//! Average-cost optimal scheduling for small single-hop instances by
//! relative value iteration on the age chain truncated at `A_max`.
//!
//! State: one age per pair in `1..=A_max`; at the cap the age stays put.
//! Stage cost: `Σ g_p(A_p)`. Transmitting pair `p` resets its age to 1 with
//! probability `γ_p`; every other age grows by one.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::age::AgeState;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::sim::{run_simulation, Observation, Policy, SimulationConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpParams {
    #[serde(default = "default_a_max")]
    pub a_max: u64,
    /// Stop once the gain bounds are closer than this.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Aperiodicity damping `τ`: `h ← (1 − τ) h + τ T h`.
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_budget")]
    pub state_budget: u128,
}

fn default_a_max() -> u64 {
    30
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_damping() -> f64 {
    0.5
}
fn default_max_iterations() -> usize {
    100_000
}
fn default_budget() -> u128 {
    10_000_000
}

impl Default for DpParams {
    fn default() -> Self {
        DpParams {
            a_max: default_a_max(),
            tolerance: default_tolerance(),
            damping: default_damping(),
            max_iterations: default_max_iterations(),
            state_budget: default_budget(),
        }
    }
}

/// Truncated chain of a single-hop instance.
#[derive(Clone, Debug)]
pub struct DpInstance {
    a_max: u64,
    gammas: Vec<f64>,
    /// Action index transmitting each pair.
    pair_action: Vec<usize>,
    idle_action: usize,
    /// `g_p(a)` for `a = 1..=A_max`, per pair.
    cost_table: Vec<Vec<f64>>,
    states: usize,
}

impl DpInstance {
    pub fn new(instance: &Instance, params: &DpParams) -> Result<Self> {
        if !instance.is_single_hop() {
            return Err(Error::Unsupported("dynamic programming needs a single-hop instance".into()));
        }
        if params.a_max < 2 {
            return Err(Error::Simulation("a_max must be >= 2".into()));
        }
        let pairs = instance.pairs().len();
        let states = (params.a_max as u128).checked_pow(pairs as u32).unwrap_or(u128::MAX);
        if states > params.state_budget {
            return Err(Error::Budget {
                states,
                budget: params.state_budget,
            });
        }
        let mut pair_action = vec![usize::MAX; pairs];
        let mut gammas = vec![0.0; pairs];
        for (m, a) in instance.actions().actions().iter().enumerate() {
            match a.transmissions() {
                [] => {}
                [t] => {
                    if pair_action[t.flow] != usize::MAX {
                        return Err(Error::Unsupported(format!(
                            "flow {} is served by more than one action",
                            t.flow
                        )));
                    }
                    pair_action[t.flow] = m;
                    gammas[t.flow] = instance.topology().gamma(t.edge);
                }
                _ => {
                    return Err(Error::Unsupported(
                        "dynamic programming needs one transmission per action".into(),
                    ))
                }
            }
        }
        if let Some(p) = pair_action.iter().position(|&m| m == usize::MAX) {
            return Err(Error::Infeasible(format!("no action serves flow {p}")));
        }
        let cost_table = instance
            .flows()
            .iter()
            .map(|f| (1..=params.a_max).map(|a| f.destinations()[0].cost.eval(a)).collect())
            .collect();
        Ok(DpInstance {
            a_max: params.a_max,
            gammas,
            pair_action,
            idle_action: instance.actions().idle_index(),
            cost_table,
            states: states as usize,
        })
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    /// Mixed-radix index of capped ages (each in `1..=A_max`).
    pub fn state_index(&self, ages: &[u64]) -> usize {
        let mut idx = 0usize;
        for &a in ages.iter().rev() {
            idx = idx * self.a_max as usize + (a.clamp(1, self.a_max) - 1) as usize;
        }
        idx
    }
}

#[derive(Clone, Debug)]
pub struct DpSolution {
    /// Optimal average cost (midpoint of the final gain bounds).
    pub gain: f64,
    pub gain_bounds: (f64, f64),
    pub iterations: usize,
    /// Best pair per state; `u8::MAX` means idle.
    table: Vec<u8>,
    instance: DpInstance,
}

impl DpSolution {
    pub fn policy(&self) -> DpTablePolicy {
        DpTablePolicy {
            solution: self.clone(),
            buf: Vec::new(),
        }
    }

    /// Pair transmitted in the state with these ages, `None` for idle.
    pub fn choice(&self, ages: &[u64]) -> Option<usize> {
        match self.table[self.instance.state_index(ages)] {
            u8::MAX => None,
            p => Some(p as usize),
        }
    }
}

/// Relative value iteration with gain bounds
/// `min(Th − h) ≤ g* ≤ max(Th − h)`.
pub fn value_iteration(dp: &DpInstance, params: &DpParams) -> Result<DpSolution> {
    let pairs = dp.gammas.len();
    if pairs > u8::MAX as usize {
        return Err(Error::Unsupported("too many pairs".into()));
    }
    let n = dp.states;
    let a_max = dp.a_max as usize;
    let strides: Vec<usize> = (0..pairs).map(|p| a_max.pow(p as u32)).collect();

    // Successor under "every age grows" and the per-state stage cost.
    let mut grow = vec![0u32; n];
    let mut cost = vec![0.0f64; n];
    let mut digits = vec![0usize; pairs];
    for s in 0..n {
        let mut next = 0;
        let mut c = 0.0;
        for p in 0..pairs {
            let d = digits[p];
            c += dp.cost_table[p][d];
            next += (d + 1).min(a_max - 1) * strides[p];
        }
        grow[s] = next as u32;
        cost[s] = c;
        for d in digits.iter_mut() {
            *d += 1;
            if *d < a_max {
                break;
            }
            *d = 0;
        }
    }

    let mut h = vec![0.0f64; n];
    let mut th = vec![0.0f64; n];
    let mut table = vec![u8::MAX; n];
    let tau = params.damping;
    let mut bounds = (f64::NEG_INFINITY, f64::INFINITY);
    let mut iterations = 0;
    while iterations < params.max_iterations {
        iterations += 1;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in 0..n {
            let g = grow[s] as usize;
            let hg = h[g];
            let mut best = 0.0;
            let mut choice = u8::MAX;
            for p in 0..pairs {
                let d = (g / strides[p]) % a_max;
                let reset = g - d * strides[p];
                let v = dp.gammas[p] * (h[reset] - hg);
                if v < best {
                    best = v;
                    choice = p as u8;
                }
            }
            let t = cost[s] + hg + best;
            table[s] = choice;
            let diff = t - h[s];
            lo = lo.min(diff);
            hi = hi.max(diff);
            th[s] = t;
        }
        bounds = (lo, hi);
        if hi - lo < params.tolerance {
            break;
        }
        let reference = th[0];
        for s in 0..n {
            h[s] = (1.0 - tau) * h[s] + tau * (th[s] - reference);
        }
    }
    Ok(DpSolution {
        gain: 0.5 * (bounds.0 + bounds.1),
        gain_bounds: bounds,
        iterations,
        table,
        instance: dp.clone(),
    })
}

/// Plays the DP table against the simulator's ages.
#[derive(Clone, Debug)]
pub struct DpTablePolicy {
    solution: DpSolution,
    buf: Vec<u64>,
}

impl Policy for DpTablePolicy {
    fn name(&self) -> String {
        "dp_optimal".into()
    }

    fn reset(&mut self, instance: &Instance) -> Result<()> {
        if instance.pairs().len() != self.solution.instance.gammas.len() {
            return Err(Error::Dimension {
                expected: self.solution.instance.gammas.len(),
                got: instance.pairs().len(),
            });
        }
        Ok(())
    }

    fn decide(&mut self, obs: &Observation<'_>, _rng: &mut dyn RngCore) -> usize {
        pair_ages(obs.instance, obs.ages, &mut self.buf);
        let dp = &self.solution.instance;
        match self.solution.choice(&self.buf) {
            Some(p) => dp.pair_action[p],
            None => dp.idle_action,
        }
    }
}

fn pair_ages(instance: &Instance, ages: &AgeState, buf: &mut Vec<u64>) {
    buf.clear();
    buf.extend(instance.pairs().iter().map(|&p| ages.pair_age(instance, p)));
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub solution: DpSolution,
    /// Per-pair average cost of the extracted policy in simulation.
    pub targets: Vec<f64>,
    /// Simulated total average cost.
    pub simulated_total: f64,
}

/// Solves the chain, then simulates the table policy for `sim_slots` slots
/// to split the optimal cost into per-pair targets.
pub fn value_iteration_oracle(
    instance: &Instance,
    params: &DpParams,
    sim_slots: u64,
    seed: u64,
) -> Result<OracleResult> {
    let dp = DpInstance::new(instance, params)?;
    let solution = value_iteration(&dp, params)?;
    let mut policy = solution.policy();
    let run = run_simulation(&SimulationConfig::new(sim_slots, seed), instance, &mut policy, seed)?;
    Ok(OracleResult {
        targets: run.metrics.pairs.iter().map(|p| p.avg_cost).collect(),
        simulated_total: run.metrics.total_cost,
        solution,
    })
}
