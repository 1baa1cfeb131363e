//! Game rules: the state tuple, dice outcome distributions and the
//! single-turn transition function.
//!
//! Seats are 0-based throughout the API. Displayed states use the
//! conventional 1-based tuple form `(c1,c2,...,cn;j)`.

use std::fmt;
use std::sync::LazyLock;

use num_rational::Ratio;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{LcrError, Result};

/// Chips each player starts with.
pub const CHIPS_PER_PLAYER: u32 = 3;

/// A player never throws more than this many dice.
pub const MAX_DICE: usize = 3;

/// Exact probability of a roll outcome or a transition.
pub type Probability = Ratio<u64>;

/// Which start rule is in force.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleVariant {
    #[default]
    Standard,
    /// Seat 1 treats every LEFT face as HOLD on the opening roll of the game.
    ModifiedStart,
}

impl RuleVariant {
    pub fn from_flag(modified_start: bool) -> Self {
        if modified_start {
            RuleVariant::ModifiedStart
        } else {
            RuleVariant::Standard
        }
    }

    pub fn is_modified(self) -> bool {
        self == RuleVariant::ModifiedStart
    }
}

impl fmt::Display for RuleVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleVariant::Standard => f.write_str("standard"),
            RuleVariant::ModifiedStart => f.write_str("modified_start"),
        }
    }
}

/// Chip counts for every seat, the center pot, and whose turn it is.
///
/// The pot is derived from the seat counts: `sum(chips) + center == 3n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GameState {
    chips: Vec<u32>,
    center: u32,
    turn: usize,
}

impl GameState {
    /// Builds a state from seat chip counts and the 0-based seat to act.
    pub fn new(chips: Vec<u32>, turn: usize) -> Result<Self> {
        let n = chips.len();
        if n < 2 {
            return Err(LcrError::TooFewPlayers(n));
        }
        if turn >= n {
            return Err(LcrError::InvalidState(format!(
                "turn {turn} out of range for {n} seats"
            )));
        }
        let total = total_chips(n);
        let held: u64 = chips.iter().map(|&c| u64::from(c)).sum();
        if held > u64::from(total) {
            return Err(LcrError::InvalidState(format!(
                "seats hold {held} chips, more than the {total} in play"
            )));
        }
        if held == 0 {
            return Err(LcrError::InvalidState(
                "every chip is in the center".to_string(),
            ));
        }
        let center = total - held as u32;
        Ok(GameState {
            chips,
            center,
            turn,
        })
    }

    /// The opening position `(3,...,3;1)`.
    pub fn initial(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(LcrError::TooFewPlayers(n));
        }
        Ok(GameState {
            chips: vec![CHIPS_PER_PLAYER; n],
            center: 0,
            turn: 0,
        })
    }

    /// Internal constructor for callers that have already established validity.
    pub(crate) fn from_parts_unchecked(chips: Vec<u32>, center: u32, turn: usize) -> Self {
        debug_assert_eq!(chips.iter().sum::<u32>() + center, total_chips(chips.len()));
        GameState {
            chips,
            center,
            turn,
        }
    }

    pub fn players(&self) -> usize {
        self.chips.len()
    }

    pub fn chips(&self) -> &[u32] {
        &self.chips
    }

    pub fn center(&self) -> u32 {
        self.center
    }

    /// 0-based seat of the player about to act.
    pub fn turn(&self) -> usize {
        self.turn
    }

    pub fn is_absorbing(&self) -> bool {
        winner(self).is_some()
    }

    fn left_of(&self, seat: usize) -> usize {
        (seat + self.players() - 1) % self.players()
    }

    fn right_of(&self, seat: usize) -> usize {
        (seat + 1) % self.players()
    }

    fn next_turn(&self) -> usize {
        self.right_of(self.turn)
    }
}

impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.chips.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ";{})", self.turn + 1)
    }
}

/// Total chips in play for `n` players.
pub fn total_chips(n: usize) -> u32 {
    CHIPS_PER_PLAYER * n as u32
}

/// Counts of LEFT, CENTER and RIGHT faces in one throw; the remaining dice show HOLD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Faces {
    pub left: u32,
    pub center: u32,
    pub right: u32,
}

impl Faces {
    pub const HOLD: Faces = Faces {
        left: 0,
        center: 0,
        right: 0,
    };

    pub fn new(left: u32, center: u32, right: u32) -> Self {
        Faces {
            left,
            center,
            right,
        }
    }

    /// Chips that leave the roller.
    pub fn moved(&self) -> u32 {
        self.left + self.center + self.right
    }

    /// The opening-roll fold of the modified start rule.
    pub fn without_left(self) -> Self {
        Faces { left: 0, ..self }
    }
}

/// A distinct face multiset together with its exact probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RollOutcome {
    pub faces: Faces,
    pub probability: Probability,
}

static DISTRIBUTIONS: LazyLock<[Vec<RollOutcome>; MAX_DICE + 1]> =
    LazyLock::new(|| std::array::from_fn(build_distribution));

fn factorial(k: u32) -> u64 {
    (1..=u64::from(k)).product()
}

fn build_distribution(dice: usize) -> Vec<RollOutcome> {
    let k = dice as u32;
    let mut out = Vec::new();
    for moved in 0..=k {
        for left in (0..=moved).rev() {
            for center in (0..=moved - left).rev() {
                let right = moved - left - center;
                let hold = k - moved;
                let arrangements = factorial(k)
                    / (factorial(left) * factorial(center) * factorial(right) * factorial(hold));
                let probability = Ratio::new(arrangements, 2u64.pow(hold) * 6u64.pow(moved));
                out.push(RollOutcome {
                    faces: Faces::new(left, center, right),
                    probability,
                });
            }
        }
    }
    out
}

/// Every distinct outcome of throwing `dice` dice, with exact probabilities.
///
/// Outcomes are ordered by number of chips moved, then by LEFT count
/// descending, then CENTER count descending.
pub fn roll_distribution(dice: usize) -> Result<&'static [RollOutcome]> {
    if dice > MAX_DICE {
        return Err(LcrError::InvalidDiceCount(dice));
    }
    Ok(&DISTRIBUTIONS[dice])
}

/// Number of dice the acting player throws.
pub fn dice_for(state: &GameState) -> usize {
    state.chips[state.turn].min(MAX_DICE as u32) as usize
}

/// Moves chips according to `faces` and passes the turn.
///
/// LEFT goes to the previous seat, RIGHT to the next seat. With two
/// players both land on the single opponent.
pub fn apply_roll(state: &GameState, faces: Faces) -> Result<GameState> {
    let actor = state.turn;
    let held = state.chips[actor];
    let needed = faces.moved();
    if needed > held {
        return Err(LcrError::InsufficientChips { needed, held });
    }
    let mut chips = state.chips.clone();
    chips[actor] -= needed;
    chips[state.left_of(actor)] += faces.left;
    chips[state.right_of(actor)] += faces.right;
    Ok(GameState {
        chips,
        center: state.center + faces.center,
        turn: state.next_turn(),
    })
}

fn merge_into(out: &mut Vec<(GameState, Probability)>, next: GameState, p: Probability) {
    match out.iter_mut().find(|(s, _)| *s == next) {
        Some((_, acc)) => *acc += p,
        None => out.push((next, p)),
    }
}

fn successors_with<F>(state: &GameState, fold: F) -> Result<Vec<(GameState, Probability)>>
where
    F: Fn(Faces) -> Faces,
{
    if state.is_absorbing() {
        return Err(LcrError::AbsorbingState(state.to_string()));
    }
    if state.chips[state.turn] == 0 {
        let skipped = GameState {
            chips: state.chips.clone(),
            center: state.center,
            turn: state.next_turn(),
        };
        return Ok(vec![(skipped, Probability::one())]);
    }
    let mut out = Vec::with_capacity(20);
    for outcome in roll_distribution(dice_for(state))? {
        let next = apply_roll(state, fold(outcome.faces))?;
        merge_into(&mut out, next, outcome.probability);
    }
    Ok(out)
}

/// All states reachable in one transition, duplicates merged.
pub fn successors(state: &GameState) -> Result<Vec<(GameState, Probability)>> {
    successors_with(state, |f| f)
}

/// Successors of the opening state under `variant`.
///
/// With the modified start rule every LEFT face becomes HOLD before the
/// chips move. Intended for seat 1's first roll; the fold is applied to
/// whatever state is passed.
pub fn first_turn_successors(
    state: &GameState,
    variant: RuleVariant,
) -> Result<Vec<(GameState, Probability)>> {
    match variant {
        RuleVariant::Standard => successors(state),
        RuleVariant::ModifiedStart => successors_with(state, Faces::without_left),
    }
}

/// The sole chip holder, if only one seat has chips.
pub fn winner(state: &GameState) -> Option<usize> {
    let mut holders = state.chips.iter().enumerate().filter(|(_, &c)| c > 0);
    match (holders.next(), holders.next()) {
        (Some((seat, _)), None) => Some(seat),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn st(chips: &[u32], seat1: usize) -> GameState {
        GameState::new(chips.to_vec(), seat1 - 1).unwrap()
    }

    fn p(num: u64, den: u64) -> Probability {
        Ratio::new(num, den)
    }

    fn prob_of(dice: usize, l: u32, c: u32, r: u32) -> Probability {
        roll_distribution(dice)
            .unwrap()
            .iter()
            .find(|o| o.faces == Faces::new(l, c, r))
            .unwrap()
            .probability
    }

    #[test]
    fn zero_dice_is_a_certain_hold() {
        let d = roll_distribution(0).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].faces, Faces::HOLD);
        assert_eq!(d[0].probability, Probability::one());
    }

    #[test]
    fn outcome_counts_and_normalisation() {
        for (k, count) in [1usize, 4, 10, 20].into_iter().enumerate() {
            let d = roll_distribution(k).unwrap();
            assert_eq!(d.len(), count);
            let total: Probability = d.iter().map(|o| o.probability).sum();
            assert_eq!(total, Probability::one());
            assert!(d.iter().all(|o| o.faces.moved() <= k as u32));
        }
    }

    #[test]
    fn three_dice_values() {
        assert_eq!(prob_of(3, 1, 1, 1), p(1, 36));
        assert_eq!(prob_of(3, 0, 0, 0), p(1, 8));
        assert_eq!(prob_of(3, 3, 0, 0), p(1, 216));
        assert_eq!(prob_of(3, 0, 0, 2), p(1, 24));
        assert_eq!(prob_of(3, 1, 1, 0), p(1, 12));
    }

    #[test]
    fn two_dice_values() {
        assert_eq!(prob_of(2, 0, 0, 0), p(1, 4));
        assert_eq!(prob_of(2, 1, 1, 0), p(1, 18));
        assert_eq!(prob_of(2, 0, 0, 2), p(1, 36));
    }

    #[test]
    fn expected_pass_is_a_sixth_per_die() {
        for k in 0..=3usize {
            let d = roll_distribution(k).unwrap();
            let e = |f: fn(&Faces) -> u32| -> Probability {
                d.iter()
                    .map(|o| o.probability * u64::from(f(&o.faces)))
                    .sum()
            };
            let expected = p(k as u64, 6);
            assert_eq!(e(|f| f.left), expected);
            assert_eq!(e(|f| f.center), expected);
            assert_eq!(e(|f| f.right), expected);
        }
    }

    #[test]
    fn rejects_four_dice() {
        assert!(matches!(
            roll_distribution(4),
            Err(LcrError::InvalidDiceCount(4))
        ));
    }

    #[test]
    fn dice_capped_at_three() {
        assert_eq!(dice_for(&st(&[5, 1, 0], 1)), 3);
        assert_eq!(dice_for(&st(&[5, 0, 1], 2)), 0);
        assert_eq!(dice_for(&st(&[5, 2, 1], 2)), 2);
    }

    #[test]
    fn apply_roll_moves_chips() {
        let s = st(&[2, 3, 1], 1);
        assert_eq!(
            apply_roll(&s, Faces::new(0, 0, 2)).unwrap(),
            st(&[0, 5, 1], 2)
        );
        assert_eq!(apply_roll(&s, Faces::HOLD).unwrap(), st(&[2, 3, 1], 2));
        let l = apply_roll(&s, Faces::new(1, 1, 0)).unwrap();
        assert_eq!(l, st(&[0, 3, 2], 2));
        assert_eq!(l.center(), 4);
    }

    #[test]
    fn two_player_left_and_right_reach_the_opponent() {
        let s = st(&[3, 3], 1);
        assert_eq!(apply_roll(&s, Faces::new(1, 0, 1)).unwrap(), st(&[1, 5], 2));
        // Exhaustive: every outcome hands l+r chips to seat 2 and c to the pot.
        for o in roll_distribution(3).unwrap() {
            let next = apply_roll(&s, o.faces).unwrap();
            let f = o.faces;
            assert_eq!(next.chips(), &[3 - f.moved(), 3 + f.left + f.right]);
            assert_eq!(next.center(), f.center);
            assert_eq!(next.turn(), 1);
        }
    }

    #[test]
    fn apply_roll_rejects_overdraw() {
        let s = st(&[1, 3, 1], 1);
        assert!(matches!(
            apply_roll(&s, Faces::new(1, 1, 0)),
            Err(LcrError::InsufficientChips { needed: 2, held: 1 })
        ));
    }

    #[test]
    fn ten_successors_from_worked_state() {
        let succ = successors(&st(&[2, 3, 1], 1)).unwrap();
        assert_eq!(succ.len(), 10);
        let rr = succ.iter().find(|(s, _)| *s == st(&[0, 5, 1], 2)).unwrap();
        assert_eq!(rr.1, p(1, 36));
    }

    #[test]
    fn zero_chip_player_is_skipped() {
        let succ = successors(&st(&[0, 2, 4], 1)).unwrap();
        assert_eq!(succ, vec![(st(&[0, 2, 4], 2), Probability::one())]);
    }

    #[test]
    fn one_die_successors() {
        let succ = successors(&st(&[1, 1, 1], 2)).unwrap();
        let mut probs: Vec<_> = succ.iter().map(|(_, q)| *q).collect();
        probs.sort();
        assert_eq!(probs, vec![p(1, 6), p(1, 6), p(1, 6), p(1, 2)]);
    }

    #[test]
    fn two_player_duplicates_are_merged() {
        let succ = successors(&st(&[3, 3], 1)).unwrap();
        // distinct (moved to opponent, to pot) pairs with moved <= 3
        assert_eq!(succ.len(), 10);
        let total: Probability = succ.iter().map(|(_, q)| *q).sum();
        assert_eq!(total, Probability::one());
        let one_each = succ.iter().find(|(s, _)| *s == st(&[1, 5], 2)).unwrap();
        // LR, LL or RR with a hold die: 3!/(1!1!1!)/72 + 2 * 3/72
        assert_eq!(one_each.1, p(1, 12) + p(1, 24) + p(1, 24));
    }

    #[test]
    fn successors_reject_absorbing() {
        assert!(matches!(
            successors(&st(&[0, 0, 5], 2)),
            Err(LcrError::AbsorbingState(_))
        ));
    }

    #[test]
    fn modified_start_folds_left_into_hold() {
        let s0 = GameState::initial(3).unwrap();
        let via_lcr = apply_roll(&s0, Faces::new(1, 1, 1).without_left()).unwrap();
        let via_cr = apply_roll(&s0, Faces::new(0, 1, 1)).unwrap();
        assert_eq!(via_lcr, via_cr);
        let succ = first_turn_successors(&s0, RuleVariant::ModifiedStart).unwrap();
        assert!(succ.iter().all(|(s, _)| s.chips()[2] == 3));
        let total: Probability = succ.iter().map(|(_, q)| *q).sum();
        assert_eq!(total, Probability::one());
        assert_eq!(
            first_turn_successors(&s0, RuleVariant::Standard).unwrap(),
            successors(&s0).unwrap()
        );
    }

    fn expected_after_first_roll(variant: RuleVariant) -> (Vec<Probability>, Probability) {
        let s0 = GameState::initial(6).unwrap();
        let succ = first_turn_successors(&s0, variant).unwrap();
        let mut seats = vec![Probability::zero(); 6];
        let mut center = Probability::zero();
        for (s, q) in &succ {
            for (acc, &c) in seats.iter_mut().zip(s.chips()) {
                *acc += *q * u64::from(c);
            }
            center += *q * u64::from(s.center());
        }
        (seats, center)
    }

    #[test]
    fn six_player_opening_expectations() {
        let half = |x: u64| p(x, 2);
        let (seats, center) = expected_after_first_roll(RuleVariant::ModifiedStart);
        assert_eq!(
            seats,
            vec![half(4), half(7), half(6), half(6), half(6), half(6)]
        );
        assert_eq!(center, half(1));
        let (seats, center) = expected_after_first_roll(RuleVariant::Standard);
        assert_eq!(
            seats,
            vec![half(3), half(7), half(6), half(6), half(6), half(7)]
        );
        assert_eq!(center, half(1));
    }

    #[test]
    fn winner_detection() {
        assert_eq!(winner(&st(&[0, 0, 5], 2)), Some(2));
        assert_eq!(winner(&st(&[3, 3, 3], 1)), None);
        assert_eq!(winner(&st(&[1, 0, 0, 0], 4)), Some(0));
    }

    #[test]
    fn state_validation() {
        assert!(matches!(
            GameState::new(vec![3], 0),
            Err(LcrError::TooFewPlayers(1))
        ));
        assert!(GameState::new(vec![0, 0, 0], 0).is_err());
        assert!(GameState::new(vec![9, 1, 0], 0).is_err());
        assert!(GameState::new(vec![1, 1, 0], 3).is_err());
        assert_eq!(st(&[2, 3, 1], 1).to_string(), "(2,3,1;1)");
    }
}
