//! RPS-n: move space, cyclic dominance, game outcomes and match points.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Games in an official match.
pub const DEFAULT_GAMES_PER_MATCH: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RulesError {
    #[error("variant size n = {0} is even; n must be odd")]
    EvenN(u32),
    #[error("variant size n = {0} is too small; n must be at least 3")]
    TooSmallN(u32),
    #[error("bad move names: {0}")]
    BadNames(String),
    #[error("move index {index} out of range for RPS-{n}")]
    MoveOutOfRange { index: u32, n: u32 },
    #[error("{wins_first} + {wins_second} wins exceed a {games_per_match}-game match")]
    TooManyWins {
        wins_first: u32,
        wins_second: u32,
        games_per_match: u32,
    },
}

/// A sign, identified by its position in the variant's cycle.
///
/// For standard RPS: rock = 0, paper = 1, scissors = 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Move(pub u32);

impl Move {
    pub const ROCK: Move = Move(0);
    pub const PAPER: Move = Move(1);
    pub const SCISSORS: Move = Move(2);

    pub fn index(self) -> u32 {
        self.0
    }
}

/// The game played: `n` signs (odd, at least 3) with display names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    n: u32,
    move_names: Vec<String>,
}

impl Variant {
    /// Validates `n` and the optional names. Without names, n = 3 gets
    /// rock/paper/scissors and any other n gets `move-0` .. `move-(n-1)`.
    pub fn new(n: u32, move_names: Option<Vec<String>>) -> Result<Self, RulesError> {
        if n < 3 {
            return Err(RulesError::TooSmallN(n));
        }
        if n.is_multiple_of(2) {
            return Err(RulesError::EvenN(n));
        }
        let move_names = match move_names {
            Some(names) => {
                if names.len() != n as usize {
                    return Err(RulesError::BadNames(format!(
                        "expected {n} names, got {}",
                        names.len()
                    )));
                }
                let distinct: BTreeSet<&str> = names.iter().map(String::as_str).collect();
                if distinct.len() != names.len() {
                    return Err(RulesError::BadNames("names must be distinct".into()));
                }
                if names.iter().any(|s| s.is_empty()) {
                    return Err(RulesError::BadNames("names must be non-empty".into()));
                }
                names
            }
            None if n == 3 => ["rock", "paper", "scissors"].map(String::from).to_vec(),
            None => (0..n).map(|i| format!("move-{i}")).collect(),
        };
        Ok(Self { n, move_names })
    }

    /// Standard rock-paper-scissors.
    pub fn standard() -> Self {
        Self::new(3, None).expect("n = 3 is valid")
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn move_names(&self) -> &[String] {
        &self.move_names
    }

    pub fn name(&self, mv: Move) -> &str {
        &self.move_names[mv.0 as usize]
    }

    /// Checked constructor for moves of this variant.
    pub fn move_at(&self, index: u32) -> Result<Move, RulesError> {
        if index < self.n {
            Ok(Move(index))
        } else {
            Err(RulesError::MoveOutOfRange { index, n: self.n })
        }
    }

    pub fn contains(&self, mv: Move) -> bool {
        mv.0 < self.n
    }

    pub fn moves(&self) -> impl Iterator<Item = Move> + '_ {
        (0..self.n).map(Move)
    }

    /// Looks a move up by display name.
    pub fn parse_move(&self, name: &str) -> Option<Move> {
        self.move_names
            .iter()
            .position(|m| m == name)
            .map(|i| Move(i as u32))
    }

    /// `i` beats `j` iff `(i - j) mod n` lies in `1..=(n-1)/2`.
    pub fn beats(&self, i: Move, j: Move) -> bool {
        debug_assert!(self.contains(i) && self.contains(j));
        let diff = (i.0 + self.n - j.0) % self.n;
        (1..=(self.n - 1) / 2).contains(&diff)
    }

    pub fn outcome(&self, a: Move, b: Move) -> GameOutcome {
        if a == b {
            GameOutcome::Draw
        } else if self.beats(a, b) {
            GameOutcome::FirstWins
        } else {
            GameOutcome::SecondWins
        }
    }

    /// The move that beats `mv` by the smallest step around the cycle.
    pub fn counter(&self, mv: Move) -> Move {
        Move((mv.0 + 1) % self.n)
    }
}

/// Result of one game; "first" and "second" follow argument order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameOutcome {
    FirstWins,
    SecondWins,
    Draw,
}

impl GameOutcome {
    /// The same result seen with the arguments swapped.
    pub fn flip(self) -> Self {
        match self {
            GameOutcome::FirstWins => GameOutcome::SecondWins,
            GameOutcome::SecondWins => GameOutcome::FirstWins,
            GameOutcome::Draw => GameOutcome::Draw,
        }
    }
}

impl fmt::Display for GameOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameOutcome::FirstWins => "FirstWins",
            GameOutcome::SecondWins => "SecondWins",
            GameOutcome::Draw => "Draw",
        })
    }
}

/// Points a match is worth to each side: own games won minus the opponent's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPoints {
    pub p_first: i64,
    pub p_second: i64,
}

/// Draws count for neither player.
pub fn match_points(
    wins_first: u32,
    wins_second: u32,
    games_per_match: u32,
) -> Result<MatchPoints, RulesError> {
    if u64::from(wins_first) + u64::from(wins_second) > u64::from(games_per_match) {
        return Err(RulesError::TooManyWins {
            wins_first,
            wins_second,
            games_per_match,
        });
    }
    let p_first = i64::from(wins_first) - i64::from(wins_second);
    Ok(MatchPoints {
        p_first,
        p_second: -p_first,
    })
}
