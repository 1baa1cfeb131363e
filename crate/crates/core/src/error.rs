use thiserror::Error;

/// Errors produced by the analysis and simulation engines.
#[derive(Debug, Error)]
pub enum LcrError {
    #[error("a game needs at least two players, got {0}")]
    TooFewPlayers(usize),

    #[error("a roll uses between 0 and 3 dice, got {0}")]
    InvalidDiceCount(usize),

    #[error("invalid game state: {0}")]
    InvalidState(String),

    #[error("roll moves {needed} chips but the acting seat holds {held}")]
    InsufficientChips { needed: u32, held: u32 },

    #[error("state {0} is absorbing; the game is over")]
    AbsorbingState(String),

    #[error("state index {index} out of range for {total} states")]
    IndexOutOfRange { index: u64, total: u64 },

    #[error("state space for {0} players exceeds 64-bit indexing")]
    CapacityExceeded(usize),

    #[error("exact analysis is limited to {cap} players (requested {players}); raise the cap to override")]
    AboveExactCap { players: usize, cap: usize },

    #[error(
        "transition system for {players} players needs about {needed} bytes, budget is {budget}"
    )]
    MemoryBudget {
        players: usize,
        needed: u64,
        budget: u64,
    },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("solver residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("start index {0} is not a transient state")]
    NotTransient(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("game exceeded {0} transitions without ending")]
    TransitionCap(u64),

    #[error("cache format error: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = LcrError> = std::result::Result<T, E>;
