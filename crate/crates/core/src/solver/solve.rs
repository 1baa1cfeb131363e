//! Absorption statistics from the fundamental matrix `N = (I - Q)^-1`.
//!
//! `N` is never formed. Two projections suffice:
//!
//! * `w = N 1`, the expected steps to absorption from every transient state,
//!   from `(I - Q) w = 1`;
//! * `y = N^T pi`, the expected visit counts when the chain starts from the
//!   distribution `pi`, from `(I - Q)^T y = pi`.
//!
//! Because the pot never shrinks, `I - Q` is block triangular over center
//! levels. Each system is solved level by level: the `w` solve walks from
//! the fullest pot downwards, the `y` solve from the empty pot upwards. A
//! level is solved by dense LU when small and by Gauss-Seidel otherwise.

use serde::Serialize;

use crate::error::{LcrError, Result};
use crate::rules::{first_turn_successors, GameState, RuleVariant};
use crate::sparse::CsrMatrix;
use crate::state_space::{StateIndex, StateSpace};
use crate::WinProbabilities;

use super::TransitionSystem;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Largest acceptable infinity-norm residual of either solve.
    pub tolerance: f64,
    /// Gauss-Seidel stops when no entry moves by more than this (relative).
    pub sweep_tolerance: f64,
    pub max_sweeps: usize,
    /// Levels with at most this many states are solved directly.
    pub dense_block_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: 1e-10,
            sweep_tolerance: 1e-15,
            max_sweeps: 100_000,
            dense_block_limit: 400,
        }
    }
}

/// Exact game-length and win statistics from one starting point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactReport {
    pub n: usize,
    pub variant: RuleVariant,
    /// Expected transitions until the game ends, skips included.
    pub expected_length: f64,
    pub length_std_dev: f64,
    /// Indexed by 0-based seat.
    pub win_probability: Vec<f64>,
    pub solver_residual: f64,
}

impl WinProbabilities for ExactReport {
    fn win_probabilities(&self) -> &[f64] {
        &self.win_probability
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    /// Fullest pot first, turns descending within a level. For `Q`.
    Downward,
    /// Empty pot first, turns ascending within a level. For `Q^T`.
    Upward,
}

/// Dense LU with partial pivoting, solving in place. `a` is row-major `m x m`.
fn dense_solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i * m + col].abs().total_cmp(&a[j * m + col].abs()))
            .unwrap();
        if a[pivot * m + col].abs() < 1e-300 {
            return Err(LcrError::Solver("singular level block".into()));
        }
        if pivot != col {
            for k in 0..m {
                a.swap(pivot * m + k, col * m + k);
            }
            b.swap(pivot, col);
        }
        let d = a[col * m + col];
        for row in col + 1..m {
            let f = a[row * m + col] / d;
            if f != 0.0 {
                for k in col..m {
                    a[row * m + k] -= f * a[col * m + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    for row in (0..m).rev() {
        let mut acc = b[row];
        for k in row + 1..m {
            acc -= a[row * m + k] * b[k];
        }
        b[row] = acc / a[row * m + row];
    }
    Ok(b)
}

/// Solves `x - M x = rhs` where row `i` of `M` only references the level of
/// `i` and levels already visited in `direction`.
fn solve_leveled(
    space: &StateSpace,
    m: &CsrMatrix,
    rhs: &[f64],
    direction: Direction,
    options: &SolveOptions,
) -> Result<(Vec<f64>, f64)> {
    let n = space.n();
    let mut x = vec![0.0; rhs.len()];
    let levels: Vec<usize> = match direction {
        Direction::Downward => (0..space.levels()).rev().collect(),
        Direction::Upward => (0..space.levels()).collect(),
    };
    for level in levels {
        let range = space.level_range(level);
        let (lo, hi) = (range.start, range.end);
        let size = hi - lo;
        if size == 0 {
            continue;
        }
        // Contributions from finished levels.
        let mut local: Vec<f64> = range
            .clone()
            .map(|i| {
                rhs[i]
                    + m.row(i)
                        .filter(|&(k, _)| k < lo || k >= hi)
                        .map(|(k, v)| v * x[k])
                        .sum::<f64>()
            })
            .collect();

        if size <= options.dense_block_limit {
            let mut a = vec![0.0; size * size];
            for (r, i) in range.clone().enumerate() {
                a[r * size + r] += 1.0;
                for (k, v) in m.row(i).filter(|&(k, _)| k >= lo && k < hi) {
                    a[r * size + (k - lo)] -= v;
                }
            }
            local = dense_solve(a, local)?;
            x[lo..hi].copy_from_slice(&local);
            continue;
        }

        x[lo..hi].copy_from_slice(&local);
        let compositions = size / n;
        let turns: Vec<usize> = match direction {
            Direction::Downward => (0..n).rev().collect(),
            Direction::Upward => (0..n).collect(),
        };
        let mut converged = false;
        for _ in 0..options.max_sweeps {
            let mut delta = 0.0f64;
            let mut scale = 0.0f64;
            for &turn in &turns {
                for comp in 0..compositions {
                    let i = lo + comp * n + turn;
                    let mut acc = local[i - lo];
                    let mut diag = 0.0;
                    for (k, v) in m.row(i) {
                        if k == i {
                            diag += v;
                        } else if k >= lo && k < hi {
                            acc += v * x[k];
                        }
                    }
                    let next = acc / (1.0 - diag);
                    delta = delta.max((next - x[i]).abs());
                    scale = scale.max(next.abs());
                    x[i] = next;
                }
            }
            if !delta.is_finite() {
                return Err(LcrError::Solver(format!(
                    "Gauss-Seidel diverged on center level {level}"
                )));
            }
            if delta <= options.sweep_tolerance * scale.max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(LcrError::Solver(format!(
                "Gauss-Seidel did not converge on center level {level} within {} sweeps",
                options.max_sweeps
            )));
        }
    }

    let residual = (0..rhs.len())
        .map(|i| {
            let mx: f64 = m.row(i).map(|(k, v)| v * x[k]).sum();
            (x[i] - mx - rhs[i]).abs()
        })
        .fold(0.0, f64::max);
    if residual.is_nan() || residual > options.tolerance {
        return Err(LcrError::Residual {
            residual,
            tolerance: options.tolerance,
        });
    }
    Ok((x, residual))
}

/// Expected steps to absorption from every transient state, `w = N 1`.
pub fn expected_steps(
    system: &TransitionSystem,
    options: &SolveOptions,
) -> Result<(Vec<f64>, f64)> {
    let ones = vec![1.0; system.space.transient()];
    solve_leveled(
        &system.space,
        &system.q,
        &ones,
        Direction::Downward,
        options,
    )
}

/// Expected visit counts `y = N^T b` for a transient start distribution `b`.
pub fn expected_visits(
    system: &TransitionSystem,
    start: &[f64],
    options: &SolveOptions,
) -> Result<(Vec<f64>, f64)> {
    let qt = system.q.transpose();
    solve_leveled(&system.space, &qt, start, Direction::Upward, options)
}

/// Distribution over states after seat 1's opening roll.
pub fn first_step_distribution(
    system: &TransitionSystem,
    variant: RuleVariant,
) -> Result<Vec<(StateIndex, f64)>> {
    let start = GameState::initial(system.n())?;
    first_turn_successors(&start, variant)?
        .into_iter()
        .map(|(s, p)| {
            let p = *p.numer() as f64 / *p.denom() as f64;
            Ok((system.space.rank(&s)?, p))
        })
        .collect()
}

fn solve_from_distribution(
    system: &TransitionSystem,
    distribution: &[(StateIndex, f64)],
    steps_taken: f64,
    variant: RuleVariant,
    options: &SolveOptions,
) -> Result<ExactReport> {
    let n = system.n();
    let t = system.space.transient();
    let mut pi = vec![0.0; t];
    let mut wins = vec![0.0; n];
    for &(idx, p) in distribution {
        if idx.0 < t {
            pi[idx.0] += p;
        } else if idx.0 < system.space.total() {
            wins[system.absorbing_winner[idx.0 - t] as usize] += p;
        } else {
            return Err(LcrError::IndexOutOfRange {
                index: idx.0 as u64,
                total: system.space.total() as u64,
            });
        }
    }

    let (w, res_w) = expected_steps(system, options)?;
    let (y, res_y) = expected_visits(system, &pi, options)?;

    let pw: f64 = pi.iter().zip(&w).map(|(a, b)| a * b).sum();
    let yw: f64 = y.iter().zip(&w).map(|(a, b)| a * b).sum();
    // E[T^2] = 2 y.w - pi.w for the steps T remaining after the start distribution.
    let variance = (2.0 * yw - pw - pw * pw).max(0.0);

    for (i, &visits) in y.iter().enumerate() {
        if visits == 0.0 {
            continue;
        }
        for (j, p) in system.r.row(i) {
            wins[system.absorbing_winner[j] as usize] += visits * p;
        }
    }

    Ok(ExactReport {
        n,
        variant,
        expected_length: steps_taken + pw,
        length_std_dev: variance.sqrt(),
        win_probability: wins,
        solver_residual: res_w.max(res_y),
    })
}

/// Statistics of a standard game started from transient state `start`.
pub fn solve_absorption(system: &TransitionSystem, start: StateIndex) -> Result<ExactReport> {
    solve_absorption_with(system, start, &SolveOptions::default())
}

pub fn solve_absorption_with(
    system: &TransitionSystem,
    start: StateIndex,
    options: &SolveOptions,
) -> Result<ExactReport> {
    if !system.space.is_transient(start) {
        return Err(LcrError::NotTransient(start.0 as u64));
    }
    solve_from_distribution(system, &[(start, 1.0)], 0.0, RuleVariant::Standard, options)
}

/// Statistics of a game played under the modified start rule.
pub fn solve_modified_start(system: &TransitionSystem) -> Result<ExactReport> {
    solve_modified_start_with(system, &SolveOptions::default())
}

pub fn solve_modified_start_with(
    system: &TransitionSystem,
    options: &SolveOptions,
) -> Result<ExactReport> {
    let pi = first_step_distribution(system, RuleVariant::ModifiedStart)?;
    solve_from_distribution(system, &pi, 1.0, RuleVariant::ModifiedStart, options)
}

/// Statistics from the opening position under either rule.
pub fn solve_game(system: &TransitionSystem, variant: RuleVariant) -> Result<ExactReport> {
    match variant {
        RuleVariant::Standard => solve_absorption(system, system.space.start()),
        RuleVariant::ModifiedStart => solve_modified_start(system),
    }
}
