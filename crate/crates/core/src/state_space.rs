//! Enumeration and dense indexing of every game state for `n` players.
//!
//! A state is a composition of `3n` chips into `n` seat piles plus the
//! center pot, paired with a turn index. The all-in-center composition is
//! excluded, giving `n * (C(4n, n) - 1)` states.
//!
//! Index layout: transient states come first, absorbing states last. Inside
//! each class states are ordered by center count ascending, then by the
//! colexicographic combinadic rank of the seat composition, then by turn.
//! Since the pot never shrinks, every transition out of a transient state
//! lands on the same or a higher center level (or on an absorbing state).

use std::ops::Range;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{LcrError, Result};
use crate::rules::{total_chips, winner, GameState};

/// Position of a state in the enumeration for a fixed player count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StateIndex(pub usize);

/// Sizes of the state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StateSpaceMeta {
    pub n: usize,
    pub total: usize,
    pub transient: usize,
    pub absorbing: usize,
    pub start: StateIndex,
}

fn big_binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Exact number of states, `n * (C(4n, n) - 1)`.
pub fn count_states(n: usize) -> Result<BigUint> {
    if n < 2 {
        return Err(LcrError::TooFewPlayers(n));
    }
    let n64 = n as u64;
    Ok((big_binomial(4 * n64, n64) - 1u32) * n64)
}

fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    // Scale both down so the f64 conversions stay finite.
    let shift = num.bits().max(den.bits()).saturating_sub(900);
    let a = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let b = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    a / b
}

/// `count_states(n + 1) / count_states(n)`; tends to 256/27.
pub fn growth_ratio(n: usize) -> Result<f64> {
    let here = count_states(n)?;
    let next = count_states(n + 1)?;
    Ok(big_ratio(&next, &here))
}

/// Rank/unrank tables for one player count.
#[derive(Debug, Clone)]
pub struct StateSpace {
    n: usize,
    /// `binom[a * stride + b] = C(a, b)` for `a <= 4n`, `b <= n`.
    binom: Vec<u64>,
    stride: usize,
    /// First transient index of each center level; one extra trailing entry.
    level_start: Vec<usize>,
    meta: StateSpaceMeta,
}

impl StateSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(LcrError::TooFewPlayers(n));
        }
        let total_big = count_states(n)?;
        let total = total_big
            .to_u64()
            .and_then(|t| usize::try_from(t).ok())
            .ok_or(LcrError::CapacityExceeded(n))?;

        let rows = 4 * n + 1;
        let stride = n + 1;
        let mut binom = vec![0u64; rows * stride];
        for a in 0..rows {
            binom[a * stride] = 1;
            for b in 1..=a.min(n) {
                let above = binom[(a - 1) * stride + b - 1];
                let left = if b < a {
                    binom[(a - 1) * stride + b]
                } else {
                    0
                };
                binom[a * stride + b] = above
                    .checked_add(left)
                    .ok_or(LcrError::CapacityExceeded(n))?;
            }
        }

        let levels = total_chips(n) as usize;
        let mut level_start = Vec::with_capacity(levels + 1);
        let mut acc = 0usize;
        for center in 0..levels {
            level_start.push(acc);
            let held = levels - center;
            let compositions = binom[(held + n - 1) * stride + n - 1] as usize;
            acc += n * (compositions - n);
        }
        level_start.push(acc);
        let transient = acc;
        let absorbing = total - transient;
        debug_assert_eq!(absorbing, 3 * n * n * n);

        let mut space = StateSpace {
            n,
            binom,
            stride,
            level_start,
            meta: StateSpaceMeta {
                n,
                total,
                transient,
                absorbing,
                start: StateIndex(0),
            },
        };
        let start = space.rank(&GameState::initial(n)?)?;
        space.meta.start = start;
        Ok(space)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn meta(&self) -> StateSpaceMeta {
        self.meta
    }

    pub fn total(&self) -> usize {
        self.meta.total
    }

    pub fn transient(&self) -> usize {
        self.meta.transient
    }

    pub fn absorbing(&self) -> usize {
        self.meta.absorbing
    }

    pub fn start(&self) -> StateIndex {
        self.meta.start
    }

    pub fn is_transient(&self, index: StateIndex) -> bool {
        index.0 < self.meta.transient
    }

    /// Number of center levels, `3n`.
    pub fn levels(&self) -> usize {
        self.level_start.len() - 1
    }

    /// Transient indices whose pot holds `center` chips.
    pub fn level_range(&self, center: usize) -> Range<usize> {
        self.level_start[center]..self.level_start[center + 1]
    }

    /// Center level of a transient index.
    pub fn level_of(&self, index: usize) -> usize {
        debug_assert!(index < self.meta.transient);
        self.level_start.partition_point(|&s| s <= index) - 1
    }

    #[inline]
    fn c(&self, a: usize, b: usize) -> u64 {
        if b > a {
            0
        } else {
            self.binom[a * self.stride + b]
        }
    }

    /// Combinadic ranks of the single-pile compositions of `held` chips,
    /// ascending. Entry `i` is the composition with every chip on seat `n-1-i`.
    fn single_pile_ranks(&self, held: usize) -> impl Iterator<Item = u64> + '_ {
        let n = self.n;
        (0..n).map(move |i| {
            let seat = n - 1 - i;
            // bars 1..=seat sit at their lowest positions and contribute nothing
            (seat + 1..n).map(|b| self.c(held + b - 1, b)).sum()
        })
    }

    fn composition_rank(&self, chips: &[u32]) -> u64 {
        let mut rank = 0;
        let mut position = 0usize;
        for (bar, &c) in chips[..self.n - 1].iter().enumerate() {
            position += c as usize;
            rank += self.c(position + bar, bar + 1);
        }
        rank
    }

    fn composition_unrank(&self, mut rank: u64, held: usize) -> Vec<u32> {
        let n = self.n;
        let mut bars = vec![0usize; n - 1];
        let mut candidate = held + n - 2;
        for b in (1..n).rev() {
            while self.c(candidate, b) > rank {
                candidate -= 1;
            }
            bars[b - 1] = candidate;
            rank -= self.c(candidate, b);
            candidate = candidate.saturating_sub(1);
        }
        let mut chips = Vec::with_capacity(n);
        let mut previous: isize = -1;
        for &bar in &bars {
            chips.push((bar as isize - previous - 1) as u32);
            previous = bar as isize;
        }
        chips.push((held as isize + n as isize - 2 - previous) as u32);
        chips
    }

    /// Index of `state` in the enumeration.
    pub fn rank(&self, state: &GameState) -> Result<StateIndex> {
        let n = self.n;
        if state.players() != n {
            return Err(LcrError::InvalidState(format!(
                "state has {} seats, space is for {n}",
                state.players()
            )));
        }
        let center = state.center() as usize;
        let held = total_chips(n) as usize - center;
        let turn = state.turn();
        match winner(state) {
            Some(seat) => {
                let position = n - 1 - seat;
                Ok(StateIndex(
                    self.meta.transient + (center * n + position) * n + turn,
                ))
            }
            None => {
                let rank = self.composition_rank(state.chips());
                let skipped = self.single_pile_ranks(held).filter(|&s| s < rank).count() as u64;
                let local = (rank - skipped) as usize;
                Ok(StateIndex(self.level_start[center] + local * n + turn))
            }
        }
    }

    /// Inverse of [`StateSpace::rank`].
    pub fn unrank(&self, index: StateIndex) -> Result<GameState> {
        let n = self.n;
        let i = index.0;
        if i >= self.meta.total {
            return Err(LcrError::IndexOutOfRange {
                index: i as u64,
                total: self.meta.total as u64,
            });
        }
        let total = total_chips(n) as usize;
        if i >= self.meta.transient {
            let local = i - self.meta.transient;
            let turn = local % n;
            let position = (local / n) % n;
            let center = local / (n * n);
            let mut chips = vec![0u32; n];
            chips[n - 1 - position] = (total - center) as u32;
            return Ok(GameState::from_parts_unchecked(chips, center as u32, turn));
        }
        let center = self.level_of(i);
        let held = total - center;
        let local = i - self.level_start[center];
        let turn = local % n;
        let mut rank = (local / n) as u64;
        for s in self.single_pile_ranks(held) {
            if s <= rank {
                rank += 1;
            } else {
                break;
            }
        }
        let chips = self.composition_unrank(rank, held);
        Ok(GameState::from_parts_unchecked(chips, center as u32, turn))
    }

    /// Every state in index order.
    pub fn iter(&self) -> impl Iterator<Item = GameState> + '_ {
        (0..self.meta.total).map(move |i| self.unrank(StateIndex(i)).expect("index within range"))
    }
}

/// Every state for `n` players, in index order.
pub fn enumerate(n: usize) -> Result<impl Iterator<Item = GameState>> {
    let space = StateSpace::new(n)?;
    Ok((0..space.total()).map(move |i| space.unrank(StateIndex(i)).expect("index within range")))
}
