//! Exhaustive simplex grid search for small stationary randomized problems.

use crate::error::{Error, Result};
use crate::policy::stationary::SingleHopProblem;

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Largest number of free probabilities (action count minus one) accepted.
pub const MAX_FREE_PROBABILITIES: usize = 3;

/// Evaluates every point of the simplex grid with spacing `resolution` and
/// returns the best.
pub fn grid_search_sr_oracle(problem: &SingleHopProblem, resolution: f64) -> Result<GridResult> {
    let m = problem.action_count();
    if m - 1 > MAX_FREE_PROBABILITIES {
        return Err(Error::Unsupported(format!(
            "grid search supports at most {} free probabilities, got {}",
            MAX_FREE_PROBABILITIES,
            m - 1
        )));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::Simulation("resolution must lie in (0, 1]".into()));
    }
    let steps = (1.0 / resolution).round() as usize;
    let mut best = GridResult {
        x: vec![f64::NAN; m],
        objective: f64::INFINITY,
    };
    let mut counts = vec![0usize; m];
    let mut x = vec![0.0; m];
    search(problem, steps, 0, steps, &mut counts, &mut x, &mut best);
    if best.objective.is_infinite() {
        return Err(Error::Infeasible("every grid point leaves some term uncovered".into()));
    }
    Ok(best)
}

fn search(
    problem: &SingleHopProblem,
    steps: usize,
    pos: usize,
    remaining: usize,
    counts: &mut [usize],
    x: &mut [f64],
    best: &mut GridResult,
) {
    let m = counts.len();
    if pos == m - 1 {
        counts[pos] = remaining;
        for (xi, &c) in x.iter_mut().zip(counts.iter()) {
            *xi = c as f64 / steps as f64;
        }
        let v = problem.objective(x);
        if v < best.objective {
            best.objective = v;
            best.x.copy_from_slice(x);
        }
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        search(problem, steps, pos + 1, remaining - c, counts, x, best);
    }
}
