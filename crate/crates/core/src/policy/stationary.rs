//! Stationary randomized policies: per-slot i.i.d. sampling from a fixed
//! distribution `x` over the action space, the closed-form average age on
//! fixed paths, and the convex program for the best `x`.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::RngCore;

use crate::action::ActionSpace;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::sim::{Observation, Policy};
use crate::topology::NodeId;

/// A directed link used by one flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkFlow {
    pub from: NodeId,
    pub to: NodeId,
    pub flow: usize,
}

/// Link activation frequencies `f_ij^k = Σ_{m ∋ (i→j,k)} x_m`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinkFlowFrequencies(BTreeMap<LinkFlow, f64>);

impl LinkFlowFrequencies {
    /// Zero for links no action ever uses.
    pub fn get(&self, from: NodeId, to: NodeId, flow: usize) -> f64 {
        self.0
            .get(&LinkFlow { from, to, flow })
            .copied()
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LinkFlow, &f64)> {
        self.0.iter()
    }
}

pub fn frequencies_from_distribution(x: &[f64], actions: &ActionSpace) -> Result<LinkFlowFrequencies> {
    if x.len() != actions.len() {
        return Err(Error::Dimension {
            expected: actions.len(),
            got: x.len(),
        });
    }
    let mut f = BTreeMap::new();
    for (xm, a) in x.iter().zip(actions.actions()) {
        for t in a.transmissions() {
            *f.entry(LinkFlow {
                from: t.from,
                to: t.to,
                flow: t.flow,
            })
            .or_insert(0.0) += xm;
        }
    }
    Ok(LinkFlowFrequencies(f))
}

/// `Σ_e 1 / (γ_e f_e)` along a path; `f64::INFINITY` if some `f_e` is 0.
pub fn closed_form_flow_age(gammas: &[f64], freqs: &[f64]) -> f64 {
    gammas
        .iter()
        .zip(freqs)
        .map(|(&g, &f)| if f > 0.0 { 1.0 / (g * f) } else { f64::INFINITY })
        .sum()
}

/// The route of a unicast flow: its fixed path, or the direct edge for a
/// single-hop flow without relays.
pub fn flow_route(instance: &Instance, flow: usize) -> Result<Vec<NodeId>> {
    let f = &instance.flows()[flow];
    if let Some(p) = f.path() {
        return Ok(p.to_vec());
    }
    if f.destinations().len() == 1 && f.commissioned().is_empty() {
        let d = f.destinations()[0].node;
        if instance.topology().edge_between(f.source(), d).is_some() {
            return Ok(vec![f.source(), d]);
        }
    }
    Err(Error::Unsupported(format!(
        "flow {flow} needs a fixed unicast path for stationary randomized analysis"
    )))
}

/// Closed-form average destination age of `flow` under frequencies `f`.
pub fn flow_closed_form(instance: &Instance, flow: usize, f: &LinkFlowFrequencies) -> Result<f64> {
    let route = flow_route(instance, flow)?;
    let topo = instance.topology();
    let (gammas, freqs): (Vec<f64>, Vec<f64>) = route
        .windows(2)
        .map(|w| {
            let e = topo.edge_between(w[0], w[1]).expect("validated path");
            (topo.gamma(e), f.get(w[0], w[1], flow))
        })
        .unzip();
    Ok(closed_form_flow_age(&gammas, &freqs))
}

/// `Σ_k w^k Σ_{e ∈ p^k} 1 / (γ_e f_e^k)` over all flows.
pub fn weighted_objective(instance: &Instance, f: &LinkFlowFrequencies) -> Result<f64> {
    let mut total = 0.0;
    for flow in instance.flows() {
        let w = flow.destinations()[0].weight;
        total += w * flow_closed_form(instance, flow.id(), f)?;
    }
    Ok(total)
}

/// One `w / (γ f)` term of the single-hop age problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SrTerm {
    pub link: LinkFlow,
    pub weight: f64,
    pub gamma: f64,
}

/// `min_x Σ_t w_t / (γ_t (M x)_t)` over the simplex, where row `t` of `M`
/// is the indicator of the actions in `coverage[t]`.
#[derive(Clone, Debug)]
pub struct SingleHopProblem {
    terms: Vec<SrTerm>,
    coverage: Vec<Vec<usize>>,
    action_count: usize,
}

impl SingleHopProblem {
    pub fn new(terms: Vec<SrTerm>, coverage: Vec<Vec<usize>>, action_count: usize) -> Result<Self> {
        if terms.len() != coverage.len() {
            return Err(Error::Dimension {
                expected: terms.len(),
                got: coverage.len(),
            });
        }
        if action_count == 0 {
            return Err(Error::Infeasible("empty action set".into()));
        }
        for (t, c) in terms.iter().zip(&coverage) {
            if !(t.weight > 0.0) || !(t.gamma > 0.0 && t.gamma <= 1.0) {
                return Err(Error::Infeasible(format!("bad term {t:?}")));
            }
            if c.iter().any(|&m| m >= action_count) {
                return Err(Error::Dimension {
                    expected: action_count,
                    got: c.iter().copied().max().unwrap_or(0) + 1,
                });
            }
        }
        Ok(SingleHopProblem {
            terms,
            coverage,
            action_count,
        })
    }

    pub fn terms(&self) -> &[SrTerm] {
        &self.terms
    }

    pub fn coverage(&self) -> &[Vec<usize>] {
        &self.coverage
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    /// `(M x)_t` for every term.
    pub fn frequencies(&self, x: &[f64]) -> Vec<f64> {
        self.coverage
            .iter()
            .map(|c| c.iter().map(|&m| x[m]).sum())
            .collect()
    }

    /// Exact objective; infinite when a term has zero frequency.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .zip(self.frequencies(x))
            .map(|(t, f)| {
                if f > 0.0 {
                    t.weight / (t.gamma * f)
                } else {
                    f64::INFINITY
                }
            })
            .sum()
    }

    fn floored_objective(&self, x: &[f64], floor: f64) -> f64 {
        self.terms
            .iter()
            .zip(self.frequencies(x))
            .map(|(t, f)| t.weight / (t.gamma * f.max(floor)))
            .sum()
    }

    fn gradient(&self, x: &[f64], floor: f64) -> Vec<f64> {
        let mut g = vec![0.0; self.action_count];
        for ((t, c), f) in self.terms.iter().zip(&self.coverage).zip(self.frequencies(x)) {
            let d = -t.weight / (t.gamma * f.max(floor).powi(2));
            for &m in c {
                g[m] += d;
            }
        }
        g
    }
}

/// One term per (flow, path edge), keeping each flow's destination weight.
pub fn reduce_to_single_hop(instance: &Instance) -> Result<SingleHopProblem> {
    let topo = instance.topology();
    let actions = instance.actions();
    let mut terms = Vec::new();
    let mut coverage = Vec::new();
    for flow in instance.flows() {
        let route = flow_route(instance, flow.id())?;
        let w = flow.destinations()[0].weight;
        for hop in route.windows(2) {
            let link = LinkFlow {
                from: hop[0],
                to: hop[1],
                flow: flow.id(),
            };
            let edge = topo.edge_between(hop[0], hop[1]).expect("validated path");
            terms.push(SrTerm {
                link,
                weight: w,
                gamma: topo.gamma(edge),
            });
            coverage.push(
                actions
                    .actions()
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.contains(link.from, link.to, link.flow))
                    .map(|(m, _)| m)
                    .collect(),
            );
        }
    }
    SingleHopProblem::new(terms, coverage, actions.len())
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumulative += uj;
        let t = (cumulative - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&vi| (vi - theta).max(0.0)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    pub max_iterations: usize,
    /// Stop once an accepted step moves `x` by less than this (Euclidean).
    pub step_tolerance: f64,
    /// Frequencies are floored here inside the objective and gradient.
    pub frequency_floor: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            max_iterations: 200_000,
            step_tolerance: 1e-12,
            frequency_floor: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverResult {
    pub x: Vec<f64>,
    /// `(M x)` per term of the problem.
    pub frequencies: Vec<f64>,
    pub objective: f64,
    /// `‖x − P(x − ∇h(x))‖₂`
    pub kkt_residual: f64,
    pub iterations: usize,
}

/// Projected gradient descent with backtracking, started from the uniform
/// distribution.
pub fn optimize_distribution(problem: &SingleHopProblem, params: &SolverParams) -> Result<SolverResult> {
    if let Some(t) = problem.coverage.iter().position(Vec::is_empty) {
        let link = problem.terms[t].link;
        return Err(Error::Infeasible(format!(
            "no action transmits flow {} on {} -> {}",
            link.flow, link.from, link.to
        )));
    }
    let n = problem.action_count;
    let floor = params.frequency_floor;
    let mut x = vec![1.0 / n as f64; n];
    let mut h = problem.floored_objective(&x, floor);
    let mut step = 1.0;
    let mut iterations = 0;
    while iterations < params.max_iterations {
        iterations += 1;
        let g = problem.gradient(&x, floor);
        step *= 2.0;
        let (y, hy, moved) = loop {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let y = project_to_simplex(&trial);
            let hy = problem.floored_objective(&y, floor);
            let diff: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            let lin: f64 = g.iter().zip(&diff).map(|(a, b)| a * b).sum();
            let sq: f64 = diff.iter().map(|d| d * d).sum();
            if hy <= h + lin + sq / (2.0 * step) || step < 1e-300 {
                break (y, hy, sq.sqrt());
            }
            step *= 0.5;
        };
        x = y;
        h = hy;
        if moved < params.step_tolerance {
            break;
        }
    }
    let g = problem.gradient(&x, floor);
    let shifted: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - b).collect();
    let kkt_residual = x
        .iter()
        .zip(project_to_simplex(&shifted))
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(SolverResult {
        frequencies: problem.frequencies(&x),
        objective: problem.objective(&x),
        x,
        kkt_residual,
        iterations,
    })
}

/// Draws an action index with probability `x_m`.
pub fn sr_decide(sampler: &WeightedIndex<f64>, rng: &mut dyn RngCore) -> usize {
    sampler.sample(rng)
}

#[derive(Clone, Debug)]
pub struct StationaryRandomized {
    x: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl StationaryRandomized {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        let sum: f64 = x.iter().sum();
        if x.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Infeasible(format!(
                "distribution must be nonnegative and sum to 1 (sum {sum})"
            )));
        }
        let sampler = WeightedIndex::new(&x).map_err(|e| Error::Infeasible(e.to_string()))?;
        Ok(StationaryRandomized { x, sampler })
    }

    /// The policy with the distribution minimizing the weighted closed-form age.
    pub fn optimal(instance: &Instance, params: &SolverParams) -> Result<(Self, SolverResult)> {
        let problem = reduce_to_single_hop(instance)?;
        let sol = optimize_distribution(&problem, params)?;
        Ok((Self::new(sol.x.clone())?, sol))
    }

    pub fn distribution(&self) -> &[f64] {
        &self.x
    }
}

impl Policy for StationaryRandomized {
    fn name(&self) -> String {
        "stationary_randomized".into()
    }

    fn reset(&mut self, instance: &Instance) -> Result<()> {
        if self.x.len() != instance.actions().len() {
            return Err(Error::Dimension {
                expected: instance.actions().len(),
                got: self.x.len(),
            });
        }
        Ok(())
    }

    fn decide(&mut self, _obs: &Observation<'_>, rng: &mut dyn RngCore) -> usize {
        sr_decide(&self.sampler, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_link_problem(w: (f64, f64)) -> SingleHopProblem {
        let link = |flow| LinkFlow {
            from: NodeId(flow + 1),
            to: NodeId(3),
            flow,
        };
        SingleHopProblem::new(
            vec![
                SrTerm { link: link(0), weight: w.0, gamma: 1.0 },
                SrTerm { link: link(1), weight: w.1, gamma: 1.0 },
            ],
            vec![vec![1], vec![2]],
            3,
        )
        .unwrap()
    }

    #[test]
    fn projection_lands_on_simplex() {
        let p = project_to_simplex(&[0.9, 0.8, -3.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p[0] - 0.55).abs() < 1e-12 && (p[1] - 0.45).abs() < 1e-12);
        assert_eq!(p[2], 0.0);
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_flow_age(&[1.0], &[1.0]), 1.0);
        assert_eq!(closed_form_flow_age(&[1.0; 4], &[0.25; 4]), 16.0);
        assert!((closed_form_flow_age(&[0.8, 0.5], &[0.5, 0.4]) - 7.5).abs() < 1e-12);
        assert_eq!(closed_form_flow_age(&[1.0, 1.0], &[0.5, 0.0]), f64::INFINITY);
    }

    #[test]
    fn symmetric_two_flow_optimum() {
        let sol = optimize_distribution(&two_link_problem((1.0, 1.0)), &SolverParams::default()).unwrap();
        assert!((sol.objective - 4.0).abs() < 1e-6, "{sol:?}");
        assert!((sol.x[1] - 0.5).abs() < 1e-4);
        assert!(sol.x[0] < 1e-6);
        assert!(sol.kkt_residual < 1e-6);
    }

    #[test]
    fn weighted_two_flow_optimum() {
        let sol = optimize_distribution(&two_link_problem((4.0, 1.0)), &SolverParams::default()).unwrap();
        assert!((sol.objective - 9.0).abs() < 1e-6, "{sol:?}");
        assert!((sol.frequencies[0] - 2.0 / 3.0).abs() < 1e-4);
        // Stationarity: w1 / f1² = w2 / f2².
        let (f1, f2) = (sol.frequencies[0], sol.frequencies[1]);
        assert!((4.0 / (f1 * f1) - 1.0 / (f2 * f2)).abs() < 1e-3);
    }

    #[test]
    fn uncovered_term_is_infeasible() {
        let p = SingleHopProblem::new(
            vec![SrTerm {
                link: LinkFlow { from: NodeId(1), to: NodeId(2), flow: 0 },
                weight: 1.0,
                gamma: 1.0,
            }],
            vec![vec![]],
            1,
        )
        .unwrap();
        assert!(matches!(
            optimize_distribution(&p, &SolverParams::default()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn degenerate_distribution_always_picks_its_action() {
        use rand::SeedableRng;
        let p = StationaryRandomized::new(vec![0.0, 1.0, 0.0]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sr_decide(&p.sampler, &mut rng), 1);
        }
        assert!(StationaryRandomized::new(vec![0.5, 0.6]).is_err());
    }
}
