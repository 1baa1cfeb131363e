use serde::Serialize;

use crate::error::{LcrError, Result};
use crate::rules::RuleVariant;
use crate::state_space::StateIndex;

use super::solve::first_step_distribution;
use super::TransitionSystem;

/// Upper bound on the horizon of a chip trajectory.
pub const MAX_TRAJECTORY_TURNS: usize = 100_000;

/// Expected chip holdings at the start of one turn (turn 1 is the opening position).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnChips {
    pub turn: usize,
    pub seats: Vec<f64>,
    pub center: f64,
}

impl TurnChips {
    pub fn total(&self) -> f64 {
        self.seats.iter().sum::<f64>() + self.center
    }
}

pub(crate) fn check_turns(turns: usize) -> Result<()> {
    if turns == 0 || turns > MAX_TRAJECTORY_TURNS {
        return Err(LcrError::InvalidParameter(format!(
            "turns must lie in 1..={MAX_TRAJECTORY_TURNS}, got {turns}"
        )));
    }
    Ok(())
}

fn expectation(system: &TransitionSystem, dist: &[f64], turn: usize) -> Result<TurnChips> {
    let n = system.n();
    let mut seats = vec![0.0; n];
    let mut center = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let s = system.space.unrank(StateIndex(i))?;
        for (acc, &c) in seats.iter_mut().zip(s.chips()) {
            *acc += p * f64::from(c);
        }
        center += p * f64::from(s.center());
    }
    Ok(TurnChips {
        turn,
        seats,
        center,
    })
}

fn step(system: &TransitionSystem, dist: &[f64]) -> Vec<f64> {
    let t = system.space.transient();
    let mut next = vec![0.0; dist.len()];
    next[t..].copy_from_slice(&dist[t..]);
    for (i, &p) in dist[..t].iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (k, q) in system.q.row(i) {
            next[k] += p * q;
        }
        for (k, q) in system.r.row(i) {
            next[t + k] += p * q;
        }
    }
    next
}

/// Propagates the state distribution turn by turn and reports the expected
/// chips per seat at the start of turns `1..=turns`. Finished games keep
/// their final holdings.
pub fn expected_chips_exact(
    system: &TransitionSystem,
    variant: RuleVariant,
    turns: usize,
) -> Result<Vec<TurnChips>> {
    check_turns(turns)?;
    let total = system.space.total();
    let mut dist = vec![0.0; total];
    dist[system.space.start().0] = 1.0;
    let mut rows = Vec::with_capacity(turns);
    rows.push(expectation(system, &dist, 1)?);
    for turn in 2..=turns {
        dist = if turn == 2 && variant.is_modified() {
            let mut first = vec![0.0; total];
            for (idx, p) in first_step_distribution(system, variant)? {
                first[idx.0] += p;
            }
            first
        } else {
            step(system, &dist)
        };
        rows.push(expectation(system, &dist, turn)?);
    }
    Ok(rows)
}
