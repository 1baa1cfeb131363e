//! Exact and Monte Carlo analysis of the dice game *Left, Center, Right*.
//!
//! - [`rules`]: game state, dice outcome distributions, one-turn transitions
//! - [`state_space`]: counting, ranking and unranking every game state
//! - [`solver`]: sparse transition system and absorption statistics
//! - [`monte_carlo`]: reproducible parallel simulation with error estimates
//!
//! ```
//! use lcr_core::solver::{build_transition_system, solve_absorption, BuildOptions};
//!
//! let system = build_transition_system(3, &BuildOptions::default()).unwrap();
//! let report = solve_absorption(&system, system.space().start()).unwrap();
//! assert!((report.expected_length - 18.9).abs() < 0.05);
//! ```

pub mod error;
pub mod monte_carlo;
pub mod rules;
pub mod solver;
pub mod sparse;
pub mod state_space;

pub use error::{LcrError, Result};
pub use monte_carlo::{run_simulation, SimConfig, SimReport};
pub use rules::{GameState, RuleVariant};
pub use solver::{ExactReport, TurnChips};
pub use state_space::{StateIndex, StateSpace};

/// Library version, as recorded in CLI output provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Anything that carries per-seat win probabilities.
pub trait WinProbabilities {
    fn win_probabilities(&self) -> &[f64];
}

impl WinProbabilities for [f64] {
    fn win_probabilities(&self) -> &[f64] {
        self
    }
}

/// Expected net result per seat when everyone antes `stake` and the winner
/// takes the whole pot: `stake * n * p - stake`.
pub fn expected_winnings<W: WinProbabilities + ?Sized>(report: &W, stake: f64) -> Result<Vec<f64>> {
    if !stake.is_finite() || stake <= 0.0 {
        return Err(LcrError::InvalidParameter(format!(
            "stake must be positive, got {stake}"
        )));
    }
    let probs = report.win_probabilities();
    let n = probs.len() as f64;
    Ok(probs.iter().map(|p| stake * n * p - stake).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winnings_examples() {
        let mut p = vec![0.125; 8];
        p[6] = 0.13;
        p[1] = 0.12;
        let w = expected_winnings(p.as_slice(), 30.0).unwrap();
        assert!((w[6] - 1.20).abs() < 1e-9);
        assert!((w[1] + 1.20).abs() < 1e-9);
        let fair = expected_winnings([0.25; 4].as_slice(), 10.0).unwrap();
        assert!(fair.iter().all(|x| x.abs() < 1e-12));
        assert!(expected_winnings(p.as_slice(), 0.0).is_err());
    }
}
