//! Reproducible parallel simulation of complete games.
//!
//! Games are grouped into chunks of `chunk_size`. Game `i` belongs to chunk
//! `i / chunk_size`, and chunk `k` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `k`. Every chunk
//! tallies into integer accumulators, so the merged report is bit-identical
//! for any worker count or scheduling order.

use std::sync::LazyLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LcrError, Result};
use crate::rules::{Faces, RuleVariant, CHIPS_PER_PLAYER, MAX_DICE};
use crate::solver::{check_turns, TurnChips};
use crate::WinProbabilities;

pub const DEFAULT_CHUNK_SIZE: u64 = 65_536;

/// A single game longer than this is treated as a defect.
pub const TRANSITION_CAP: u64 = 10_000_000;

/// Source of dice throws for the simulator.
pub trait DiceSource {
    /// Faces of one throw of `dice` dice (`dice <= 3`).
    fn roll(&mut self, dice: usize) -> Faces;
}

/// `FACES[k][x]` for the `6^k` equally likely face sequences of `k` dice.
/// Die digit 0 is LEFT, 1 CENTER, 2 RIGHT, 3 to 5 HOLD.
static FACES: LazyLock<[Vec<Faces>; MAX_DICE + 1]> = LazyLock::new(|| {
    std::array::from_fn(|k| {
        (0..6usize.pow(k as u32))
            .map(|mut x| {
                let mut f = Faces::HOLD;
                for _ in 0..k {
                    match x % 6 {
                        0 => f.left += 1,
                        1 => f.center += 1,
                        2 => f.right += 1,
                        _ => {}
                    }
                    x /= 6;
                }
                f
            })
            .collect()
    })
});

/// Dice backed by any random number generator: one uniform draw per throw.
#[derive(Debug, Clone)]
pub struct RngDice<R>(pub R);

impl<R: Rng> DiceSource for RngDice<R> {
    #[inline]
    fn roll(&mut self, dice: usize) -> Faces {
        let table = &FACES[dice];
        table[self.0.random_range(0..table.len())]
    }
}

/// Random stream for one chunk.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub games: u64,
    pub seed: u64,
    pub variant: RuleVariant,
    pub chunk_size: u64,
    /// Record mean chips at the start of turns `1..=T`.
    pub track_chips_turns: Option<usize>,
    /// Worker threads; `None` uses the ambient rayon pool. Never affects results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl SimConfig {
    pub fn new(n: usize, games: u64, seed: u64) -> Self {
        SimConfig {
            n,
            games,
            seed,
            variant: RuleVariant::Standard,
            chunk_size: DEFAULT_CHUNK_SIZE,
            track_chips_turns: None,
            workers: None,
        }
    }

    pub fn with_variant(mut self, variant: RuleVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(LcrError::TooFewPlayers(self.n));
        }
        if self.games == 0 {
            return Err(LcrError::InvalidParameter(
                "games must be at least 1".into(),
            ));
        }
        if self.chunk_size == 0 {
            return Err(LcrError::InvalidParameter(
                "chunk size must be at least 1".into(),
            ));
        }
        if let Some(turns) = self.track_chips_turns {
            check_turns(turns)?;
        }
        if self.workers == Some(0) {
            return Err(LcrError::InvalidParameter(
                "workers must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub n: usize,
    pub variant: RuleVariant,
    pub games: u64,
    pub mean_length: f64,
    /// Sample standard deviation of game length (`R - 1` denominator).
    pub length_sample_std: f64,
    /// Monte Carlo error of the mean, `sigma_hat / sqrt(R)`.
    pub length_mc_error: f64,
    pub wins: Vec<u64>,
    pub win_proportion: Vec<f64>,
    /// `sqrt((R w - w^2) / R^3)` per seat.
    pub win_proportion_se: Vec<f64>,
    pub chips_by_turn: Option<Vec<TurnChips>>,
}

impl WinProbabilities for SimReport {
    fn win_probabilities(&self) -> &[f64] {
        &self.win_proportion
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameResult {
    pub winner: usize,
    pub length: u64,
}

/// Outcome of one simulated game, optionally with the seat chips at the
/// start of each of the first turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameRecord {
    pub winner: usize,
    pub length: u64,
    pub chip_trace: Option<Vec<Vec<u32>>>,
}

/// Plays from the opening position. `observe(row, chips, center)` sees the
/// position at the start of turns `1..=rows` (row 0 is turn 1); rows after
/// the game ends repeat the final position. With `stop_at_horizon` play
/// halts once every observed row is filled and `None` is returned if the
/// game was still running.
fn play<D, F>(
    n: usize,
    variant: RuleVariant,
    dice: &mut D,
    rows: u64,
    stop_at_horizon: bool,
    mut observe: F,
) -> Result<Option<GameResult>>
where
    D: DiceSource,
    F: FnMut(u64, &[u32], u32),
{
    let mut chips = vec![CHIPS_PER_PLAYER; n];
    let mut center = 0u32;
    let mut holders = n;
    let mut turn = 0usize;
    let mut length = 0u64;
    loop {
        if length < rows {
            observe(length, &chips, center);
        }
        if holders == 1 {
            for row in length + 1..rows {
                observe(row, &chips, center);
            }
            let winner = chips.iter().position(|&c| c > 0).expect("one holder");
            return Ok(Some(GameResult { winner, length }));
        }
        if stop_at_horizon && length + 1 >= rows {
            return Ok(None);
        }
        let held = chips[turn];
        if held > 0 {
            let mut f = dice.roll(held.min(MAX_DICE as u32) as usize);
            if length == 0 && variant.is_modified() {
                f = f.without_left();
            }
            let moved = f.moved();
            if moved > 0 {
                chips[turn] -= moved;
                if chips[turn] == 0 {
                    holders -= 1;
                }
                center += f.center;
                let left = (turn + n - 1) % n;
                let right = (turn + 1) % n;
                for (seat, gain) in [(left, f.left), (right, f.right)] {
                    if gain > 0 {
                        if chips[seat] == 0 {
                            holders += 1;
                        }
                        chips[seat] += gain;
                    }
                }
            }
        }
        turn = (turn + 1) % n;
        length += 1;
        if length > TRANSITION_CAP {
            return Err(LcrError::TransitionCap(TRANSITION_CAP));
        }
    }
}

/// Plays one complete game. Length counts every transition, skips included.
pub fn simulate_game<D: DiceSource>(
    n: usize,
    variant: RuleVariant,
    dice: &mut D,
    trace_turns: Option<usize>,
) -> Result<GameRecord> {
    if n < 2 {
        return Err(LcrError::TooFewPlayers(n));
    }
    let rows = trace_turns.unwrap_or(0);
    let mut trace = Vec::with_capacity(rows);
    let result = play(n, variant, dice, rows as u64, false, |_, chips, _| {
        trace.push(chips.to_vec())
    })?
    .expect("full games always finish");
    Ok(GameRecord {
        winner: result.winner,
        length: result.length,
        chip_trace: trace_turns.map(|_| trace),
    })
}

#[derive(Debug, Clone)]
struct Tally {
    games: u64,
    length_sum: u128,
    length_sq_sum: u128,
    wins: Vec<u64>,
    /// `rows x (n + 1)` sums of seat chips and pot.
    chip_sums: Vec<u64>,
}

impl Tally {
    fn new(n: usize, rows: usize) -> Self {
        Tally {
            games: 0,
            length_sum: 0,
            length_sq_sum: 0,
            wins: vec![0; n],
            chip_sums: vec![0; rows * (n + 1)],
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.games += other.games;
        self.length_sum += other.length_sum;
        self.length_sq_sum += other.length_sq_sum;
        for (a, b) in self.wins.iter_mut().zip(&other.wins) {
            *a += b;
        }
        for (a, b) in self.chip_sums.iter_mut().zip(&other.chip_sums) {
            *a += b;
        }
    }
}

fn run_chunk<D: DiceSource>(
    config: &SimConfig,
    dice: &mut D,
    games: u64,
    rows: usize,
    stop_at_horizon: bool,
) -> Result<Tally> {
    let n = config.n;
    let mut tally = Tally::new(n, rows);
    for _ in 0..games {
        let sums = &mut tally.chip_sums;
        let outcome = play(
            n,
            config.variant,
            dice,
            rows as u64,
            stop_at_horizon,
            |row, chips, center| {
                let base = row as usize * (n + 1);
                for (acc, &c) in sums[base..base + n].iter_mut().zip(chips) {
                    *acc += u64::from(c);
                }
                sums[base + n] += u64::from(center);
            },
        )?;
        tally.games += 1;
        if let Some(r) = outcome {
            tally.length_sum += u128::from(r.length);
            tally.length_sq_sum += u128::from(r.length) * u128::from(r.length);
            tally.wins[r.winner] += 1;
        }
    }
    Ok(tally)
}

fn run_tally<D, F>(
    config: &SimConfig,
    make_dice: F,
    rows: usize,
    stop_at_horizon: bool,
) -> Result<Tally>
where
    D: DiceSource,
    F: Fn(u64) -> D + Sync,
{
    config.validate()?;
    let chunks = config.games.div_ceil(config.chunk_size);
    let work = || -> Result<Tally> {
        let tallies: Vec<Tally> = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let first = chunk * config.chunk_size;
                let games = config.chunk_size.min(config.games - first);
                run_chunk(config, &mut make_dice(chunk), games, rows, stop_at_horizon)
            })
            .collect::<Result<_>>()?;
        let mut total = Tally::new(config.n, rows);
        for t in &tallies {
            total.merge(t);
        }
        Ok(total)
    };
    match config.workers {
        None => work(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| LcrError::InvalidParameter(e.to_string()))?
            .install(work),
    }
}

fn chip_rows(tally: &Tally, n: usize, rows: usize) -> Vec<TurnChips> {
    let r = tally.games as f64;
    (0..rows)
        .map(|row| {
            let base = row * (n + 1);
            TurnChips {
                turn: row + 1,
                seats: tally.chip_sums[base..base + n]
                    .iter()
                    .map(|&s| s as f64 / r)
                    .collect(),
                center: tally.chip_sums[base + n] as f64 / r,
            }
        })
        .collect()
}

fn report_from(config: &SimConfig, tally: &Tally, rows: usize) -> SimReport {
    let r = tally.games;
    let rf = r as f64;
    let mean_length = tally.length_sum as f64 / rf;
    let length_sample_std = if r > 1 {
        let num = u128::from(r) * tally.length_sq_sum - tally.length_sum * tally.length_sum;
        (num as f64 / (rf * (rf - 1.0))).sqrt()
    } else {
        0.0
    };
    let win_proportion = tally.wins.iter().map(|&w| w as f64 / rf).collect();
    let win_proportion_se = tally
        .wins
        .iter()
        .map(|&w| {
            let num = u128::from(r) * u128::from(w) - u128::from(w) * u128::from(w);
            (num as f64 / (rf * rf * rf)).sqrt()
        })
        .collect();
    SimReport {
        n: config.n,
        variant: config.variant,
        games: r,
        mean_length,
        length_sample_std,
        length_mc_error: length_sample_std / rf.sqrt(),
        wins: tally.wins.clone(),
        win_proportion,
        win_proportion_se,
        chips_by_turn: config
            .track_chips_turns
            .map(|_| chip_rows(tally, config.n, rows)),
    }
}

/// Plays `config.games` games with dice from `make_dice(chunk_index)`.
pub fn run_simulation_with<D, F>(config: &SimConfig, make_dice: F) -> Result<SimReport>
where
    D: DiceSource,
    F: Fn(u64) -> D + Sync,
{
    let rows = config.track_chips_turns.unwrap_or(0);
    let tally = run_tally(config, make_dice, rows, false)?;
    Ok(report_from(config, &tally, rows))
}

/// Plays `config.games` games with the seeded chunk streams.
pub fn run_simulation(config: &SimConfig) -> Result<SimReport> {
    let seed = config.seed;
    run_simulation_with(config, |chunk| RngDice(chunk_rng(seed, chunk)))
}

/// Mean seat chips at the start of turns `1..=turns`. Games only run as far
/// as the horizon; games that end earlier contribute their final holdings.
pub fn chips_trajectory(config: &SimConfig, turns: usize) -> Result<Vec<TurnChips>> {
    check_turns(turns)?;
    let seed = config.seed;
    let tally = run_tally(config, |chunk| RngDice(chunk_rng(seed, chunk)), turns, true)?;
    Ok(chip_rows(&tally, config.n, turns))
}
