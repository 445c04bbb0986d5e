//! Move selection for simulated players.

use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::rules::{GameOutcome, Move, Variant};

/// A completed game as one player saw it. `outcome` is from that player's
/// side (`FirstWins` means they won).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameView {
    pub my_move: Move,
    pub their_move: Move,
    pub outcome: GameOutcome,
}

pub trait Strategy {
    /// Must return a move of `variant`, and be deterministic given the
    /// history and the rng state.
    fn next_move(&mut self, variant: &Variant, history: &[GameView], rng: &mut dyn RngCore) -> Move;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuiltinStrategy {
    Constant(Move),
    UniformRandom,
    /// Plays move `k mod n` in the player's k-th game.
    Cycle,
    /// Counters the opponent's most frequent past move (lowest index on
    /// ties); opens with move 0.
    FrequencyCounter,
    /// Plays the listed moves in order, wrapping around.
    Sequence(Vec<Move>),
}

impl Strategy for BuiltinStrategy {
    fn next_move(&mut self, variant: &Variant, history: &[GameView], rng: &mut dyn RngCore) -> Move {
        let n = variant.n();
        match self {
            BuiltinStrategy::Constant(m) => Move(m.0 % n),
            BuiltinStrategy::UniformRandom => Move(rng.gen_range(0..n)),
            BuiltinStrategy::Cycle => Move((history.len() % n as usize) as u32),
            BuiltinStrategy::FrequencyCounter => {
                if history.is_empty() {
                    return Move(0);
                }
                let mut counts = alloc::vec![0usize; n as usize];
                for g in history {
                    counts[g.their_move.0 as usize] += 1;
                }
                let top = counts
                    .iter()
                    .enumerate()
                    .max_by(|(i, a), (j, b)| a.cmp(b).then(j.cmp(i)))
                    .map(|(i, _)| i as u32)
                    .unwrap_or(0);
                variant.counter(Move(top))
            }
            BuiltinStrategy::Sequence(moves) => {
                if moves.is_empty() {
                    return Move(0);
                }
                Move(moves[history.len() % moves.len()].0 % n)
            }
        }
    }
}
