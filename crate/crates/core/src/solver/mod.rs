//! Exact analysis of the absorbing chain.

mod cache;
mod chips;
mod solve;
mod transition;

pub use cache::{load_system, read_system, save_system, write_system, CACHE_MAGIC, CACHE_VERSION};
pub(crate) use chips::check_turns;
pub use chips::{expected_chips_exact, TurnChips, MAX_TRAJECTORY_TURNS};
pub use solve::{
    expected_steps, expected_visits, first_step_distribution, solve_absorption,
    solve_absorption_with, solve_game, solve_modified_start, solve_modified_start_with,
    ExactReport, SolveOptions,
};
pub use transition::{
    build_transition_system, estimate_memory, BuildOptions, TransitionSystem, DEFAULT_EXACT_CAP,
    DEFAULT_MEMORY_BUDGET,
};
