use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::commitment::CommitContext;
use crate::ids::{MatchId, PlayerId};
use crate::rules::{match_points, GameOutcome, MatchPoints, Move, Variant};

/// One decided game. `outcome` is committer-first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub index: u32,
    pub committer: PlayerId,
    pub committer_move: Move,
    pub responder_move: Move,
    pub outcome: GameOutcome,
}

impl GameRecord {
    /// The winner's id, or `None` for a draw.
    pub fn winner<'a>(&'a self, responder: &'a PlayerId) -> Option<&'a PlayerId> {
        match self.outcome {
            GameOutcome::FirstWins => Some(&self.committer),
            GameOutcome::SecondWins => Some(responder),
            GameOutcome::Draw => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NextGame {
    Game {
        context: CommitContext,
        committer: PlayerId,
        responder: PlayerId,
    },
    MatchComplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub wins_a: u32,
    pub wins_b: u32,
    pub draws: u32,
    /// `p_first` is A's.
    pub points: MatchPoints,
}

/// One party's view of a match: games run strictly one after another and
/// the committer role alternates, A committing the even-numbered games.
#[derive(Debug, Clone)]
pub struct MatchState {
    match_id: MatchId,
    player_a: PlayerId,
    player_b: PlayerId,
    variant: Variant,
    games_per_match: u32,
    completed: Vec<GameRecord>,
    in_flight: Option<u32>,
}

impl MatchState {
    pub fn new(
        match_id: MatchId,
        player_a: PlayerId,
        player_b: PlayerId,
        variant: Variant,
        games_per_match: u32,
    ) -> Self {
        assert!(player_a != player_b, "a match needs two distinct players");
        assert!(games_per_match > 0);
        MatchState {
            match_id,
            player_a,
            player_b,
            variant,
            games_per_match,
            completed: Vec::new(),
            in_flight: None,
        }
    }

    pub fn committer_for(&self, game_index: u32) -> &PlayerId {
        if game_index.is_multiple_of(2) {
            &self.player_a
        } else {
            &self.player_b
        }
    }

    pub fn responder_for(&self, game_index: u32) -> &PlayerId {
        if game_index.is_multiple_of(2) {
            &self.player_b
        } else {
            &self.player_a
        }
    }

    /// Opens the next game, or reports that the match is over.
    pub fn next_game(&mut self) -> Result<NextGame, ProtocolError> {
        if self.in_flight.is_some() {
            return Err(ProtocolError::SequencingViolation);
        }
        let k = self.completed.len() as u32;
        if k == self.games_per_match {
            return Ok(NextGame::MatchComplete);
        }
        self.in_flight = Some(k);
        let committer = self.committer_for(k).clone();
        Ok(NextGame::Game {
            context: CommitContext {
                match_id: self.match_id,
                game_index: k,
                committer_id: committer.clone(),
                variant_n: self.variant.n(),
            },
            committer,
            responder: self.responder_for(k).clone(),
        })
    }

    /// Closes the in-flight game.
    pub fn complete_game(&mut self, record: GameRecord) -> Result<(), ProtocolError> {
        match self.in_flight {
            Some(k) if k == record.index && record.committer == *self.committer_for(k) => {
                self.in_flight = None;
                self.completed.push(record);
                Ok(())
            }
            _ => Err(ProtocolError::SequencingViolation),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.completed.len() as u32 == self.games_per_match
    }

    pub fn tally(&self) -> Result<Tally, ProtocolError> {
        if !self.is_complete() {
            return Err(ProtocolError::MatchIncomplete);
        }
        let mut tally = Tally {
            wins_a: 0,
            wins_b: 0,
            draws: 0,
            points: MatchPoints {
                p_first: 0,
                p_second: 0,
            },
        };
        for g in &self.completed {
            match g.winner(self.responder_for(g.index)) {
                Some(w) if *w == self.player_a => tally.wins_a += 1,
                Some(_) => tally.wins_b += 1,
                None => tally.draws += 1,
            }
        }
        tally.points = match_points(tally.wins_a, tally.wins_b, self.games_per_match)
            .expect("wins bounded by completed games");
        Ok(tally)
    }

    pub fn match_id(&self) -> MatchId {
        self.match_id
    }

    pub fn players(&self) -> (&PlayerId, &PlayerId) {
        (&self.player_a, &self.player_b)
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn games_per_match(&self) -> u32 {
        self.games_per_match
    }

    pub fn completed(&self) -> &[GameRecord] {
        &self.completed
    }

    pub fn in_flight(&self) -> Option<u32> {
        self.in_flight
    }
}
