//! Age-debt scheduling: virtual queues that accumulate the excess of the
//! effective age over a target, one-slot expected Lyapunov drift
//! minimization, and two ways of adapting the targets online.
//!
//! Per slot the policy picks an action from the pre-slot state, then after
//! the links resolve and ages evolve it updates every debt queue and, for
//! the adaptive modes, the targets.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::flow::FlowKind;
use crate::instance::Instance;
use crate::sim::{DebtSnapshot, Observation, Policy, SlotOutcome};
use crate::age::AgeState;
use crate::channel::LinkStates;
use crate::topology::{EdgeId, NodeId, UNREACHABLE};

/// `[Q + B(t+1) − α]⁺`
#[inline]
pub fn update_destination_debt(q: f64, b_next: f64, alpha: f64) -> f64 {
    (q + b_next - alpha).max(0.0)
}

/// How an intermediate queue moves in one slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelayStep {
    /// The relay forwards the flow on some links; `hops` is the constrained
    /// minimum hop count to the destination ([`UNREACHABLE`] if none).
    /// Ages are the pre-transmission values.
    Forward { relay_age: u64, dest_age: u64, hops: u32 },
    /// The relay does not forward the flow; tracks the destination cost.
    Track { b_next: f64 },
}

/// Optimistic destination cost credited when forwarding:
/// `g(min(A_i, A_j) + h)`, saturating to the cost cap for `h = ∞`.
#[inline]
pub fn forward_cost(cost: &CostFunction, relay_age: u64, dest_age: u64, hops: u32) -> f64 {
    let h = if hops == UNREACHABLE { u64::MAX } else { hops as u64 };
    cost.eval(relay_age.min(dest_age).saturating_add(h))
}

pub fn update_intermediate_debt(q: f64, step: RelayStep, cost: &CostFunction, alpha: f64) -> f64 {
    let b = match step {
        RelayStep::Forward {
            relay_age,
            dest_age,
            hops,
        } => forward_cost(cost, relay_age, dest_age, hops),
        RelayStep::Track { b_next } => b_next,
    };
    update_destination_debt(q, b, alpha)
}

/// Which intermediate debt queues exist.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntermediateQueues {
    /// Destination queues only.
    Off,
    /// One queue per (commissioned non-destination relay, destination).
    Relays,
    /// As `Relays`, plus a queue at the source for every destination at
    /// least two hops away from it.
    #[default]
    RelaysAndSource,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    HighestIndex,
}

/// Relative tolerance under which two drifts count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RelayQueue {
    pub flow: usize,
    pub relay: NodeId,
    /// Index into `Instance::pairs`.
    pub pair: usize,
}

/// Static queue layout and per-action structure for one instance.
#[derive(Clone, Debug)]
pub struct DebtModel {
    pair_nodes: Vec<(usize, NodeId)>,
    costs: Vec<CostFunction>,
    relays: Vec<RelayQueue>,
    relays_by_pair: Vec<Vec<usize>>,
    actions: Vec<ActionShape>,
}

#[derive(Clone, Debug, Default)]
struct ActionShape {
    /// (pair, senders) for every destination pair this action delivers to.
    receives: Vec<(usize, Vec<(NodeId, EdgeId)>)>,
    /// Case-1 relay queues with their hop counts, sorted by queue index.
    forwards: Vec<(usize, u32)>,
}

impl DebtModel {
    pub fn new(instance: &Instance, mode: IntermediateQueues) -> Self {
        let pairs = instance.pairs();
        let flows = instance.flows();
        let topo = instance.topology();
        let mut pair_of = vec![vec![None; topo.node_count()]; flows.len()];
        let mut pair_nodes = Vec::with_capacity(pairs.len());
        let mut costs = Vec::with_capacity(pairs.len());
        for (p, pair) in pairs.iter().enumerate() {
            let d = &flows[pair.flow].destinations()[pair.dest];
            pair_of[pair.flow][d.node.index()] = Some(p);
            pair_nodes.push((pair.flow, d.node));
            costs.push(d.cost.clone());
        }

        let mut relays = Vec::new();
        if mode != IntermediateQueues::Off {
            for flow in flows.iter().filter(|f| f.kind() != FlowKind::Broadcast) {
                let source_dist = topo.bfs(flow.source(), |v| flow.can_transmit(v));
                let mut candidates: Vec<NodeId> = Vec::new();
                if mode == IntermediateQueues::RelaysAndSource {
                    candidates.push(flow.source());
                }
                candidates.extend(
                    flow.commissioned()
                        .iter()
                        .copied()
                        .filter(|&c| flow.destination_index(c).is_none()),
                );
                for relay in candidates {
                    for d in flow.destinations() {
                        if relay == flow.source() && source_dist[d.node.index()] < 2 {
                            continue;
                        }
                        relays.push(RelayQueue {
                            flow: flow.id(),
                            relay,
                            pair: pair_of[flow.id()][d.node.index()].expect("destination pair"),
                        });
                    }
                }
            }
        }
        let mut relays_by_pair = vec![Vec::new(); pairs.len()];
        for (r, q) in relays.iter().enumerate() {
            relays_by_pair[q.pair].push(r);
        }

        let actions = instance
            .actions()
            .actions()
            .iter()
            .map(|a| {
                let mut shape = ActionShape::default();
                for t in a.transmissions() {
                    if let Some(p) = pair_of[t.flow][t.to.index()] {
                        match shape.receives.iter_mut().find(|(q, _)| *q == p) {
                            Some((_, senders)) => senders.push((t.from, t.edge)),
                            None => shape.receives.push((p, vec![(t.from, t.edge)])),
                        }
                    }
                }
                for (r, q) in relays.iter().enumerate() {
                    let links: Vec<EdgeId> = a
                        .transmissions()
                        .iter()
                        .filter(|t| t.flow == q.flow && t.from == q.relay)
                        .map(|t| t.edge)
                        .collect();
                    if !links.is_empty() {
                        let hops =
                            instance.constrained_min_hops(q.flow, q.relay, pair_nodes[q.pair].1, &links);
                        shape.forwards.push((r, hops));
                    }
                }
                shape
            })
            .collect();

        DebtModel {
            pair_nodes,
            costs,
            relays,
            relays_by_pair,
            actions,
        }
    }

    pub fn relays(&self) -> &[RelayQueue] {
        &self.relays
    }

    pub fn pair_count(&self) -> usize {
        self.pair_nodes.len()
    }

    /// Minimum per-slot cost `g(1)` of every pair.
    pub fn min_costs(&self) -> Vec<f64> {
        self.costs.iter().map(|c| c.eval(1)).collect()
    }

    fn case1_hops(&self, action: usize, relay: usize) -> Option<u32> {
        let f = &self.actions[action].forwards;
        f.binary_search_by_key(&relay, |&(r, _)| r).ok().map(|i| f[i].1)
    }

    /// Distribution of the next cost of `pair` under the senders of an action:
    /// freshest successful sender wins.
    fn next_cost_outcomes(
        &self,
        instance: &Instance,
        ages: &AgeState,
        links: Option<&LinkStates>,
        pair: usize,
        senders: &[(NodeId, EdgeId)],
        out: &mut Vec<(f64, f64)>,
    ) {
        out.clear();
        let (flow, node) = self.pair_nodes[pair];
        let aj = ages.age(flow, node);
        let mut ordered: Vec<(u64, f64)> = senders
            .iter()
            .map(|&(from, edge)| {
                let p = match links {
                    Some(s) => s.is_on(edge) as u8 as f64,
                    None => instance.topology().gamma(edge),
                };
                (ages.age(flow, from), p)
            })
            .collect();
        ordered.sort_by_key(|&(a, _)| a);
        let mut remaining = 1.0;
        for (ai, p) in ordered {
            let prob = remaining * p;
            if prob > 0.0 {
                out.push((prob, self.costs[pair].eval(aj.min(ai) + 1)));
            }
            remaining *= 1.0 - p;
        }
        if remaining > 0.0 {
            out.push((remaining, self.costs[pair].eval(aj + 1)));
        }
    }
}

/// Destination and intermediate debt queues.
#[derive(Clone, Debug, PartialEq)]
pub struct DebtState {
    pub destination: Vec<f64>,
    pub relay: Vec<f64>,
}

impl DebtState {
    pub fn zeros(model: &DebtModel) -> Self {
        DebtState {
            destination: vec![0.0; model.pair_count()],
            relay: vec![0.0; model.relays.len()],
        }
    }

    /// `L = Σ Q²` over every queue.
    pub fn lyapunov(&self) -> f64 {
        self.destination.iter().chain(&self.relay).map(|q| q * q).sum()
    }

    /// Applies one slot: `before`/`after` are the ages around the slot and
    /// `action` the chosen action index.
    pub fn update(
        &mut self,
        model: &DebtModel,
        action: usize,
        before: &AgeState,
        after: &AgeState,
        alpha: &[f64],
    ) {
        let next: Vec<f64> = model
            .pair_nodes
            .iter()
            .zip(&model.costs)
            .map(|(&(flow, node), c)| c.eval(after.age(flow, node)))
            .collect();
        for (p, q) in self.destination.iter_mut().enumerate() {
            *q = update_destination_debt(*q, next[p], alpha[p]);
        }
        for (r, q) in self.relay.iter_mut().enumerate() {
            let rq = &model.relays[r];
            let (flow, node) = model.pair_nodes[rq.pair];
            let step = match model.case1_hops(action, r) {
                Some(hops) => RelayStep::Forward {
                    relay_age: before.age(flow, rq.relay),
                    dest_age: before.age(flow, node),
                    hops,
                },
                None => RelayStep::Track { b_next: next[rq.pair] },
            };
            *q = update_intermediate_debt(*q, step, &model.costs[rq.pair], alpha[rq.pair]);
        }
    }
}

#[inline]
fn sq_plus(q: f64, b: f64, alpha: f64) -> f64 {
    let v = update_destination_debt(q, b, alpha);
    v * v
}

/// Exact `E[L(t+1) − L(t)]` for every action. Link outcomes are Bernoulli(γ),
/// or the realized states when `links` is given.
pub fn expected_drifts(
    model: &DebtModel,
    instance: &Instance,
    ages: &AgeState,
    debts: &DebtState,
    alpha: &[f64],
    links: Option<&LinkStates>,
) -> Vec<f64> {
    // Idle next cost of every pair and the idle-action drift.
    let idle_cost: Vec<f64> = model
        .pair_nodes
        .iter()
        .zip(&model.costs)
        .map(|(&(flow, node), c)| c.eval(ages.age(flow, node) + 1))
        .collect();
    let mut base = -debts.lyapunov();
    for (p, &q) in debts.destination.iter().enumerate() {
        base += sq_plus(q, idle_cost[p], alpha[p]);
    }
    let idle_relay: Vec<f64> = debts
        .relay
        .iter()
        .zip(&model.relays)
        .map(|(&q, r)| sq_plus(q, idle_cost[r.pair], alpha[r.pair]))
        .collect();
    base += idle_relay.iter().sum::<f64>();

    let mut outcomes = Vec::new();
    model
        .actions
        .iter()
        .enumerate()
        .map(|(a, shape)| {
            let mut delta = 0.0;
            for (p, senders) in &shape.receives {
                let p = *p;
                model.next_cost_outcomes(instance, ages, links, p, senders, &mut outcomes);
                let expect = |q: f64| -> f64 {
                    outcomes.iter().map(|&(pr, b)| pr * sq_plus(q, b, alpha[p])).sum()
                };
                let qd = debts.destination[p];
                delta += expect(qd) - sq_plus(qd, idle_cost[p], alpha[p]);
                for &r in &model.relays_by_pair[p] {
                    if model.case1_hops(a, r).is_none() {
                        delta += expect(debts.relay[r]) - idle_relay[r];
                    }
                }
            }
            for &(r, hops) in &shape.forwards {
                let rq = &model.relays[r];
                let (flow, node) = model.pair_nodes[rq.pair];
                let b = forward_cost(
                    &model.costs[rq.pair],
                    ages.age(flow, rq.relay),
                    ages.age(flow, node),
                    hops,
                );
                delta += sq_plus(debts.relay[r], b, alpha[rq.pair]) - idle_relay[r];
            }
            base + delta
        })
        .collect()
}

/// Index of the smallest drift under `tie_break`.
pub fn debt_decide(drifts: &[f64], tie_break: TieBreak) -> usize {
    let mut best = 0;
    for (i, &d) in drifts.iter().enumerate().skip(1) {
        let tol = TIE_TOLERANCE * drifts[best].abs().max(1.0);
        let better = match tie_break {
            TieBreak::LowestIndex => d < drifts[best] - tol,
            TieBreak::HighestIndex => d <= drifts[best] + tol,
        };
        if better {
            best = i;
        }
    }
    best
}

/// Single-hop rule: the source maximizing `γ_i Q_i (g_i(A_i + 1) − g_i(1))`,
/// lowest action index on ties. Only non-idle actions are candidates.
pub fn single_hop_bound_decide(instance: &Instance, ages: &AgeState, debts: &[f64]) -> Result<usize> {
    if !instance.is_single_hop() {
        return Err(Error::Unsupported(
            "the single-hop bound rule needs a single-hop instance".into(),
        ));
    }
    let mut best: Option<(usize, f64)> = None;
    for (m, a) in instance.actions().actions().iter().enumerate() {
        let score: f64 = a
            .transmissions()
            .iter()
            .map(|t| {
                let p = t.flow; // single-hop: one pair per flow, flow-major
                let cost = &instance.flows()[t.flow].destinations()[0].cost;
                let age = ages.age(t.flow, t.to);
                instance.topology().gamma(t.edge) * debts[p] * (cost.eval(age + 1) - cost.eval(1))
            })
            .sum();
        if a.is_idle() {
            continue;
        }
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((m, score));
        }
    }
    best.map(|(m, _)| m)
        .ok_or_else(|| Error::Unsupported("no transmitting action".into()))
}

/// One gradient step on the targets after an epoch of `epoch_len` slots:
/// raise the targets of queues above `epsilon · epoch_len`, or lower all of
/// them when none are. Targets never drop below `floor`.
pub fn gradient_step(alpha: &mut [f64], queues: &[f64], epoch_len: u64, eta: f64, epsilon: f64, floor: &[f64]) {
    let threshold = epsilon * epoch_len as f64;
    if queues.iter().any(|&q| q > threshold) {
        for (a, &q) in alpha.iter_mut().zip(queues) {
            if q > threshold {
                *a += eta;
            }
        }
    } else {
        for (a, &f) in alpha.iter_mut().zip(floor) {
            *a = (*a - eta).max(f);
        }
    }
}

/// `α = α_max` where `Q > V`, else 1.
pub fn flow_control_targets(debts: &[f64], v: f64, alpha_max: f64) -> Vec<f64> {
    debts
        .iter()
        .map(|&q| if q > v { alpha_max } else { 1.0 })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientDescentParams {
    /// Epoch length `W` in slots.
    #[serde(default = "default_epoch_len")]
    pub epoch_len: u64,
    /// Number of adaptation epochs `E`; targets are frozen afterwards.
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// `α(1)`, flow-major pair order.
    pub initial: Vec<f64>,
}

fn default_epoch_len() -> u64 {
    2000
}
fn default_epochs() -> usize {
    50
}
fn default_eta() -> f64 {
    0.5
}
fn default_epsilon() -> f64 {
    0.01
}

impl GradientDescentParams {
    pub fn with_initial(initial: Vec<f64>) -> Self {
        GradientDescentParams {
            epoch_len: default_epoch_len(),
            epochs: default_epochs(),
            eta: default_eta(),
            epsilon: default_epsilon(),
            initial,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowControlParams {
    /// Debt threshold `V`; defaults to 50 per destination pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    pub alpha_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TargetMode {
    Fixed(Vec<f64>),
    GradientDescent(GradientDescentParams),
    FlowControl(FlowControlParams),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionRule {
    /// Exact expected-drift minimization over the action list.
    #[default]
    Drift,
    /// Upper-bound rule for single-hop instances.
    SingleHopBound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub targets: Vec<f64>,
    pub debts: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct AgeDebt {
    mode: TargetMode,
    intermediate: IntermediateQueues,
    tie_break: TieBreak,
    rule: DecisionRule,
    model: Option<DebtModel>,
    state: Option<DebtState>,
    alpha: Vec<f64>,
    floor: Vec<f64>,
    v: f64,
    slot_in_epoch: u64,
    epochs: Vec<EpochRecord>,
}

impl AgeDebt {
    pub fn new(mode: TargetMode) -> Self {
        AgeDebt {
            mode,
            intermediate: IntermediateQueues::default(),
            tie_break: TieBreak::default(),
            rule: DecisionRule::default(),
            model: None,
            state: None,
            alpha: Vec::new(),
            floor: Vec::new(),
            v: 0.0,
            slot_in_epoch: 0,
            epochs: Vec::new(),
        }
    }

    pub fn fixed(alpha: Vec<f64>) -> Self {
        Self::new(TargetMode::Fixed(alpha))
    }

    pub fn with_intermediate(mut self, mode: IntermediateQueues) -> Self {
        self.intermediate = mode;
        self
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn with_rule(mut self, rule: DecisionRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn targets(&self) -> &[f64] {
        &self.alpha
    }

    pub fn state(&self) -> Option<&DebtState> {
        self.state.as_ref()
    }

    pub fn model(&self) -> Option<&DebtModel> {
        self.model.as_ref()
    }

    /// Targets and debts at the end of each adaptation epoch.
    pub fn epoch_log(&self) -> &[EpochRecord] {
        &self.epochs
    }
}

impl Policy for AgeDebt {
    fn name(&self) -> String {
        match (&self.mode, self.rule) {
            (_, DecisionRule::SingleHopBound) => "age_debt_bound".into(),
            (TargetMode::Fixed(_), _) => "age_debt".into(),
            (TargetMode::GradientDescent(_), _) => "age_debt_gradient".into(),
            (TargetMode::FlowControl(_), _) => "age_debt_flow_control".into(),
        }
    }

    fn reset(&mut self, instance: &Instance) -> Result<()> {
        let model = DebtModel::new(instance, self.intermediate);
        let n = model.pair_count();
        let check = |v: &Vec<f64>| {
            if v.len() != n {
                Err(Error::Dimension {
                    expected: n,
                    got: v.len(),
                })
            } else {
                Ok(())
            }
        };
        self.alpha = match &self.mode {
            TargetMode::Fixed(a) => {
                check(a)?;
                a.clone()
            }
            TargetMode::GradientDescent(p) => {
                check(&p.initial)?;
                if p.epoch_len == 0 || p.epochs == 0 || !(p.eta >= 0.0) || !(p.epsilon > 0.0) {
                    return Err(Error::Simulation("invalid gradient descent parameters".into()));
                }
                p.initial.clone()
            }
            TargetMode::FlowControl(p) => {
                if !(p.alpha_max >= 1.0) {
                    return Err(Error::Simulation("alpha_max must be >= 1".into()));
                }
                self.v = p.v.unwrap_or(50.0 * n as f64);
                if !(self.v > 0.0) {
                    return Err(Error::Simulation("V must be positive".into()));
                }
                vec![1.0; n]
            }
        };
        if self.rule == DecisionRule::SingleHopBound && !instance.is_single_hop() {
            return Err(Error::Unsupported(
                "the single-hop bound rule needs a single-hop instance".into(),
            ));
        }
        self.floor = model.min_costs();
        self.state = Some(DebtState::zeros(&model));
        self.model = Some(model);
        self.slot_in_epoch = 0;
        self.epochs.clear();
        Ok(())
    }

    fn decide(&mut self, obs: &Observation<'_>, _rng: &mut dyn RngCore) -> usize {
        let model = self.model.as_ref().expect("reset before decide");
        let state = self.state.as_ref().expect("reset before decide");
        match self.rule {
            DecisionRule::Drift => {
                let drifts =
                    expected_drifts(model, obs.instance, obs.ages, state, &self.alpha, obs.link_states);
                debt_decide(&drifts, self.tie_break)
            }
            DecisionRule::SingleHopBound => {
                single_hop_bound_decide(obs.instance, obs.ages, &state.destination)
                    .expect("checked at reset")
            }
        }
    }

    fn end_of_slot(&mut self, outcome: &SlotOutcome<'_>) {
        let model = self.model.as_ref().expect("reset before end_of_slot");
        let state = self.state.as_mut().expect("reset before end_of_slot");
        state.update(model, outcome.action_index, outcome.before, outcome.after, &self.alpha);
        match &self.mode {
            TargetMode::Fixed(_) => {}
            TargetMode::FlowControl(p) => {
                self.alpha = flow_control_targets(&state.destination, self.v, p.alpha_max);
            }
            TargetMode::GradientDescent(p) => {
                if self.epochs.len() < p.epochs {
                    self.slot_in_epoch += 1;
                    if self.slot_in_epoch == p.epoch_len {
                        gradient_step(
                            &mut self.alpha,
                            &state.destination,
                            p.epoch_len,
                            p.eta,
                            p.epsilon,
                            &self.floor,
                        );
                        self.epochs.push(EpochRecord {
                            epoch: self.epochs.len() + 1,
                            targets: self.alpha.clone(),
                            debts: state.destination.clone(),
                        });
                        *state = DebtState::zeros(model);
                        self.slot_in_epoch = 0;
                    }
                }
            }
        }
    }

    fn debts(&self) -> Option<DebtSnapshot> {
        self.state.as_ref().map(|s| DebtSnapshot {
            debts: s.destination.clone(),
            targets: self.alpha.clone(),
        })
    }
}
