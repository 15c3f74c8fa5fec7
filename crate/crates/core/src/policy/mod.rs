//! Scheduling policies and the oracles used to check them.

pub mod age_debt;
pub mod age_difference;
pub mod baselines;
pub mod dp;
pub mod grid;
pub mod stationary;

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax_lowest(scores: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}
