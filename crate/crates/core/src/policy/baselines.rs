//! Comparison policies: single-hop max-weight and round-robin.

use rand::RngCore;

use crate::age::AgeState;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::sim::{Observation, Policy};

fn require_single_hop(instance: &Instance, policy: &str) -> Result<()> {
    if instance.is_single_hop() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("{policy} needs a single-hop instance")))
    }
}

/// Non-idle action maximizing `γ w A (A + 2)`, lowest index on ties.
pub fn max_weight_decide(instance: &Instance, ages: &AgeState) -> Result<usize> {
    require_single_hop(instance, "max_weight")?;
    let mut best: Option<(usize, f64)> = None;
    for (m, a) in instance.actions().actions().iter().enumerate() {
        if a.is_idle() {
            continue;
        }
        let score: f64 = a
            .transmissions()
            .iter()
            .map(|t| {
                let w = instance.flows()[t.flow].destinations()[0].weight;
                let age = ages.age(t.flow, t.to) as f64;
                instance.topology().gamma(t.edge) * w * age * (age + 2.0)
            })
            .sum();
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((m, score));
        }
    }
    best.map(|(m, _)| m)
        .ok_or_else(|| Error::Unsupported("no transmitting action".into()))
}

/// Cycles through the non-idle actions in index order, one per slot.
pub fn round_robin_decide(slot: u64, instance: &Instance) -> usize {
    let active: Vec<usize> = (0..instance.actions().len())
        .filter(|&m| !instance.actions().actions()[m].is_idle())
        .collect();
    if active.is_empty() {
        return instance.actions().idle_index();
    }
    active[(slot % active.len() as u64) as usize]
}

#[derive(Clone, Debug, Default)]
pub struct MaxWeight;

impl Policy for MaxWeight {
    fn name(&self) -> String {
        "max_weight".into()
    }

    fn reset(&mut self, instance: &Instance) -> Result<()> {
        require_single_hop(instance, "max_weight")
    }

    fn decide(&mut self, obs: &Observation<'_>, _rng: &mut dyn RngCore) -> usize {
        max_weight_decide(obs.instance, obs.ages).expect("checked at reset")
    }
}

#[derive(Clone, Debug, Default)]
pub struct RoundRobin {
    active: Vec<usize>,
}

impl Policy for RoundRobin {
    fn name(&self) -> String {
        "round_robin".into()
    }

    fn reset(&mut self, instance: &Instance) -> Result<()> {
        self.active = (0..instance.actions().len())
            .filter(|&m| !instance.actions().actions()[m].is_idle())
            .collect();
        if self.active.is_empty() {
            self.active.push(instance.actions().idle_index());
        }
        Ok(())
    }

    fn decide(&mut self, obs: &Observation<'_>, _rng: &mut dyn RngCore) -> usize {
        self.active[(obs.slot % self.active.len() as u64) as usize]
    }
}
