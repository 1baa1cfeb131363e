use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{LcrError, Result};
use crate::rules::{successors, winner};
use crate::sparse::CsrMatrix;
use crate::state_space::{StateIndex, StateSpace, StateSpaceMeta};

/// Largest player count solved exactly unless the caller raises the cap.
pub const DEFAULT_EXACT_CAP: usize = 6;

/// Default ceiling on the estimated memory of an assembled system.
pub const DEFAULT_MEMORY_BUDGET: u64 = 8 << 30;

const ROW_BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub max_players: usize,
    pub memory_budget: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_players: DEFAULT_EXACT_CAP,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// Rough upper bound on the bytes needed to build and solve a system.
pub fn estimate_memory(space: &StateSpace) -> u64 {
    let t = space.transient() as u64;
    let total = space.total() as u64;
    // Q, its transpose and R at up to 20 entries per row, plus solver vectors.
    t * 20 * 12 * 2 + total * 8 * 6
}

/// Transient/absorbing partition of the chain with sparse `Q` and `R` blocks.
///
/// Row `i` of `q` and `r` holds the one-step probabilities out of transient
/// state `i`; `r` columns are absorbing indices offset by the transient count.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    pub(crate) space: StateSpace,
    pub(crate) q: CsrMatrix,
    pub(crate) r: CsrMatrix,
    pub(crate) absorbing_winner: Vec<u16>,
}

impl TransitionSystem {
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn meta(&self) -> StateSpaceMeta {
        self.space.meta()
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn q(&self) -> &CsrMatrix {
        &self.q
    }

    pub fn r(&self) -> &CsrMatrix {
        &self.r
    }

    /// Winning seat (0-based) of each absorbing column.
    pub fn absorbing_winner(&self) -> &[u16] {
        &self.absorbing_winner
    }

    pub(crate) fn from_blocks(space: StateSpace, q: CsrMatrix, r: CsrMatrix) -> Result<Self> {
        let absorbing_winner = absorbing_winners(&space)?;
        Ok(TransitionSystem {
            space,
            q,
            r,
            absorbing_winner,
        })
    }

    /// Largest deviation of a `[Q | R]` row sum from 1.
    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.q.rows())
            .map(|i| (self.q.row_sum(i) + self.r.row_sum(i) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// One-step probability from transient `from` to any state `to`.
    pub fn probability(&self, from: StateIndex, to: StateIndex) -> f64 {
        let t = self.space.transient();
        let (matrix, col) = if to.0 < t {
            (&self.q, to.0)
        } else {
            (&self.r, to.0 - t)
        };
        matrix
            .row(from.0)
            .find(|&(c, _)| c == col)
            .map_or(0.0, |(_, v)| v)
    }
}

fn absorbing_winners(space: &StateSpace) -> Result<Vec<u16>> {
    let t = space.transient();
    (t..space.total())
        .map(|i| {
            let s = space.unrank(StateIndex(i))?;
            winner(&s)
                .map(|w| w as u16)
                .ok_or_else(|| LcrError::InvalidState(format!("{s} indexed as absorbing")))
        })
        .collect()
}

struct RowBlock {
    q_len: Vec<u32>,
    q_cols: Vec<u32>,
    q_vals: Vec<f64>,
    r_len: Vec<u32>,
    r_cols: Vec<u32>,
    r_vals: Vec<f64>,
}

fn assemble_block(space: &StateSpace, rows: std::ops::Range<usize>) -> Result<RowBlock> {
    let t = space.transient();
    let mut block = RowBlock {
        q_len: Vec::with_capacity(rows.len()),
        q_cols: Vec::new(),
        q_vals: Vec::new(),
        r_len: Vec::with_capacity(rows.len()),
        r_cols: Vec::new(),
        r_vals: Vec::new(),
    };
    let mut q_row = Vec::with_capacity(20);
    let mut r_row = Vec::with_capacity(20);
    for i in rows {
        let state = space.unrank(StateIndex(i))?;
        q_row.clear();
        r_row.clear();
        for (next, p) in successors(&state)? {
            let j = space.rank(&next)?.0;
            let p = p
                .to_f64()
                .ok_or_else(|| LcrError::InvalidState("probability not representable".into()))?;
            if j < t {
                q_row.push((j as u32, p));
            } else {
                r_row.push(((j - t) as u32, p));
            }
        }
        q_row.sort_unstable_by_key(|&(c, _)| c);
        r_row.sort_unstable_by_key(|&(c, _)| c);
        block.q_len.push(q_row.len() as u32);
        block.r_len.push(r_row.len() as u32);
        for &(c, v) in &q_row {
            block.q_cols.push(c);
            block.q_vals.push(v);
        }
        for &(c, v) in &r_row {
            block.r_cols.push(c);
            block.r_vals.push(v);
        }
    }
    Ok(block)
}

fn concat(
    rows: usize,
    cols: usize,
    blocks: &[RowBlock],
    pick: impl Fn(&RowBlock) -> (&[u32], &[u32], &[f64]),
) -> CsrMatrix {
    let nnz: usize = blocks.iter().map(|b| pick(b).2.len()).sum();
    let mut row_ptr = Vec::with_capacity(rows + 1);
    let mut col_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    row_ptr.push(0);
    for b in blocks {
        let (lens, c, v) = pick(b);
        for &len in lens {
            row_ptr.push(row_ptr.last().unwrap() + len as usize);
        }
        col_idx.extend_from_slice(c);
        values.extend_from_slice(v);
    }
    CsrMatrix::from_parts(rows, cols, row_ptr, col_idx, values)
}

/// Assembles `Q` and `R` for `n` players from the exact successor distributions.
pub fn build_transition_system(n: usize, options: &BuildOptions) -> Result<TransitionSystem> {
    if n < 2 {
        return Err(LcrError::TooFewPlayers(n));
    }
    if n > options.max_players {
        return Err(LcrError::AboveExactCap {
            players: n,
            cap: options.max_players,
        });
    }
    let space = StateSpace::new(n)?;
    let needed = estimate_memory(&space);
    if needed > options.memory_budget {
        return Err(LcrError::MemoryBudget {
            players: n,
            needed,
            budget: options.memory_budget,
        });
    }
    let t = space.transient();
    let blocks: Vec<RowBlock> = (0..t.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .map(|b| assemble_block(&space, b * ROW_BLOCK..((b + 1) * ROW_BLOCK).min(t)))
        .collect::<Result<_>>()?;
    let q = concat(t, t, &blocks, |b| (&b.q_len, &b.q_cols, &b.q_vals));
    let r = concat(t, space.absorbing(), &blocks, |b| {
        (&b.r_len, &b.r_cols, &b.r_vals)
    });
    drop(blocks);
    TransitionSystem::from_blocks(space, q, r)
}
