//! Federation registry and ranking updates.
//!
//! Rankings are kept in half-point units: every update adds an integer
//! number of half points, so the arithmetic is exact.
//!
//! With `Δ` the gap between the two old rankings and `f = ⌊Δ/5⌋ + ½`:
//!
//! - if the lower-ranked player wins or draws the match (or the rankings
//!   are equal), each player moves by `f · (P + 2)`;
//! - if the higher-ranked player wins, each player moves by `P / 2`,
//!
//! where `P` is that player's own match points.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{MatchId, PlayerId};
use crate::protocol::GameRecord;
use crate::rules::{match_points, GameOutcome, RulesError};

/// New players start at 100 points.
pub const INITIAL_RANKING_HALVES: i64 = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FederationError {
    #[error("player id {0} is already registered")]
    DuplicateId(PlayerId),
    #[error("unknown player {0}")]
    UnknownPlayer(PlayerId),
    #[error("match was aborted ({0}); rankings unchanged")]
    AbortedMatch(String),
    #[error("a player cannot play themself")]
    SamePlayer,
    #[error(transparent)]
    Rules(#[from] RulesError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerRecord {
    pub id: PlayerId,
    pub name: String,
    pub ranking_halves: i64,
    pub matches: u32,
}

impl PlayerRecord {
    pub fn ranking_display(&self) -> String {
        format_ranking(self.ranking_halves)
    }
}

/// One decimal place: `"127.0"`, `"-1.5"`.
pub fn format_ranking(halves: i64) -> String {
    let sign = if halves < 0 { "-" } else { "" };
    let abs = halves.unsigned_abs();
    format!("{sign}{}.{}", abs / 2, if abs % 2 == 1 { 5 } else { 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Lower-ranked player won or drew, or the rankings were equal.
    UpsetOrDraw,
    /// Higher-ranked player won.
    Expected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankingUpdate {
    pub player_id: PlayerId,
    pub r_old_halves: i64,
    pub r_new_halves: i64,
    pub p: i64,
    pub branch: Branch,
}

/// New rankings (in half points) for A and B, and the branch taken, given
/// old rankings and A's match points. B's points are `-p_a`.
pub fn ranking_change(r_a_halves: i64, r_b_halves: i64, p_a: i64) -> (i64, i64, Branch) {
    let p_b = -p_a;
    let branch = match r_a_halves.cmp(&r_b_halves) {
        core::cmp::Ordering::Equal => Branch::UpsetOrDraw,
        core::cmp::Ordering::Less if p_a >= 0 => Branch::UpsetOrDraw,
        core::cmp::Ordering::Greater if p_b >= 0 => Branch::UpsetOrDraw,
        _ => Branch::Expected,
    };
    match branch {
        Branch::UpsetOrDraw => {
            // ⌊Δ/5⌋ with Δ in points is ⌊Δ_halves/10⌋; f in halves is 2⌊·⌋ + 1.
            let f_halves = 2 * ((r_a_halves - r_b_halves).abs() / 10) + 1;
            (
                r_a_halves + f_halves * (p_a + 2),
                r_b_halves + f_halves * (p_b + 2),
                branch,
            )
        }
        Branch::Expected => (r_a_halves + p_a, r_b_halves + p_b, branch),
    }
}

pub fn update_rankings(
    a: (&PlayerId, i64),
    b: (&PlayerId, i64),
    p_a: i64,
) -> (RankingUpdate, RankingUpdate) {
    let (new_a, new_b, branch) = ranking_change(a.1, b.1, p_a);
    (
        RankingUpdate {
            player_id: a.0.clone(),
            r_old_halves: a.1,
            r_new_halves: new_a,
            p: p_a,
            branch,
        },
        RankingUpdate {
            player_id: b.0.clone(),
            r_old_halves: b.1,
            r_new_halves: new_b,
            p: -p_a,
            branch,
        },
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchStatus {
    MatchComplete,
    Aborted(String),
}

/// What a finished (or aborted) match reports to the federation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchReport {
    pub match_id: MatchId,
    pub player_a: PlayerId,
    pub player_b: PlayerId,
    pub games: Vec<GameRecord>,
    pub status: MatchStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchRecord {
    pub match_id: MatchId,
    pub player_a: PlayerId,
    pub player_b: PlayerId,
    pub games: Vec<GameRecord>,
    pub wins_a: u32,
    pub wins_b: u32,
    pub draws: u32,
    /// Empty for aborted matches.
    pub updates: Vec<RankingUpdate>,
    pub status: MatchStatus,
}

/// Players and match history. Single writer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Registry {
    pub players: Vec<PlayerRecord>,
    pub history: Vec<MatchRecord>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_player(
        &mut self,
        id: PlayerId,
        name: impl Into<String>,
    ) -> Result<&PlayerRecord, FederationError> {
        if self.player(&id).is_some() {
            return Err(FederationError::DuplicateId(id));
        }
        self.players.push(PlayerRecord {
            id,
            name: name.into(),
            ranking_halves: INITIAL_RANKING_HALVES,
            matches: 0,
        });
        Ok(self.players.last().unwrap())
    }

    pub fn player(&self, id: &PlayerId) -> Option<&PlayerRecord> {
        self.players.iter().find(|p| p.id == *id)
    }

    fn index_of(&self, id: &PlayerId) -> Result<usize, FederationError> {
        self.players
            .iter()
            .position(|p| p.id == *id)
            .ok_or_else(|| FederationError::UnknownPlayer(id.clone()))
    }

    /// Applies a completed match to both rankings and appends it to the
    /// history. An aborted match is appended without updates and reported as
    /// [`FederationError::AbortedMatch`].
    pub fn record_match(&mut self, report: MatchReport) -> Result<&MatchRecord, FederationError> {
        if report.player_a == report.player_b {
            return Err(FederationError::SamePlayer);
        }
        let ia = self.index_of(&report.player_a)?;
        let ib = self.index_of(&report.player_b)?;

        let (mut wins_a, mut wins_b, mut draws) = (0u32, 0u32, 0u32);
        for g in &report.games {
            let committer_is_a = g.committer == report.player_a;
            match (g.outcome, committer_is_a) {
                (GameOutcome::Draw, _) => draws += 1,
                (GameOutcome::FirstWins, true) | (GameOutcome::SecondWins, false) => wins_a += 1,
                _ => wins_b += 1,
            }
        }
        let mut record = MatchRecord {
            match_id: report.match_id,
            player_a: report.player_a,
            player_b: report.player_b,
            games: report.games,
            wins_a,
            wins_b,
            draws,
            updates: Vec::new(),
            status: report.status,
        };

        if let MatchStatus::Aborted(reason) = &record.status {
            let reason = reason.clone();
            self.history.push(record);
            return Err(FederationError::AbortedMatch(reason));
        }

        let points = match_points(wins_a, wins_b, record.games.len() as u32)?;
        let (ua, ub) = update_rankings(
            (&record.player_a, self.players[ia].ranking_halves),
            (&record.player_b, self.players[ib].ranking_halves),
            points.p_first,
        );
        for (i, u) in [(ia, &ua), (ib, &ub)] {
            self.players[i].ranking_halves = u.r_new_halves;
            self.players[i].matches += 1;
        }
        record.updates = alloc::vec![ua, ub];
        self.history.push(record);
        Ok(self.history.last().unwrap())
    }

    /// Players by ranking descending, ties by id ascending.
    pub fn standings(&self) -> Vec<&PlayerRecord> {
        let mut rows: Vec<&PlayerRecord> = self.players.iter().collect();
        rows.sort_by(|a, b| b.ranking_halves.cmp(&a.ranking_halves).then_with(|| a.id.cmp(&b.id)));
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Move;

    fn pts(h: i64) -> i64 {
        h * 2
    }

    #[test]
    fn worked_updates() {
        // A=100, B=120, A wins +4: f = 4.5
        assert_eq!(ranking_change(pts(100), pts(120), 4), (254, 222, Branch::UpsetOrDraw));
        // B wins +2: expected branch
        assert_eq!(ranking_change(pts(100), pts(120), -2), (198, 242, Branch::Expected));
        // equal ranks, draw
        assert_eq!(ranking_change(pts(100), pts(100), 0), (202, 202, Branch::UpsetOrDraw));
        // A=100, B=105, A wins 10-0: f = 1.5
        assert_eq!(ranking_change(pts(100), pts(105), 10), (236, 186, Branch::UpsetOrDraw));
    }

    #[test]
    fn lower_ranked_draw_takes_first_branch() {
        let (a, b, br) = ranking_change(pts(130), pts(100), 0);
        assert_eq!(br, Branch::UpsetOrDraw);
        // f = 6.5 → both gain 13 points
        assert_eq!((a, b), (pts(143), pts(113)));
    }

    #[test]
    fn half_point_gaps() {
        // Δ = 4.5 points → ⌊0.9⌋ = 0
        let (a, _, _) = ranking_change(209, 200, -1);
        assert_eq!(a, 209 + 1);
        // Δ = 5.0 points → f = 1.5
        let (_, b, _) = ranking_change(210, 200, -1);
        assert_eq!(b, 200 + 3 * 3);
    }

    #[test]
    fn display() {
        assert_eq!(format_ranking(200), "100.0");
        assert_eq!(format_ranking(203), "101.5");
        assert_eq!(format_ranking(-3), "-1.5");
        assert_eq!(format_ranking(0), "0.0");
        assert_eq!(format_ranking(-4), "-2.0");
    }

    #[test]
    fn registration() {
        let mut r = Registry::new();
        assert_eq!(r.register_player("alice".into(), "Alice").unwrap().ranking_halves, 200);
        assert_eq!(r.register_player("alice".into(), "Again"), Err(FederationError::DuplicateId("alice".into())));
        r.register_player("bob".into(), "Bob").unwrap();
        assert!(r.players.iter().all(|p| p.ranking_display() == "100.0"));
    }

    fn games(a_wins: u32, b_wins: u32, draws: u32) -> Vec<GameRecord> {
        // All games committed by "a" for simplicity of construction.
        let mut out = Vec::new();
        let mut push = |outcome| {
            let index = out.len() as u32;
            out.push(GameRecord {
                index,
                committer: "a".into(),
                committer_move: Move::ROCK,
                responder_move: Move::ROCK,
                outcome,
            })
        };
        (0..a_wins).for_each(|_| push(GameOutcome::FirstWins));
        (0..b_wins).for_each(|_| push(GameOutcome::SecondWins));
        (0..draws).for_each(|_| push(GameOutcome::Draw));
        out
    }

    fn report(status: MatchStatus, g: Vec<GameRecord>) -> MatchReport {
        MatchReport {
            match_id: MatchId([0; 16]),
            player_a: "a".into(),
            player_b: "b".into(),
            games: g,
            status,
        }
    }

    #[test]
    fn record_completed_match() {
        let mut r = Registry::new();
        r.register_player("a".into(), "A").unwrap();
        r.register_player("b".into(), "B").unwrap();
        r.players[1].ranking_halves = pts(120);
        let rec = r.record_match(report(MatchStatus::MatchComplete, games(7, 3, 0))).unwrap();
        assert_eq!((rec.wins_a, rec.wins_b, rec.draws), (7, 3, 0));
        assert_eq!(rec.updates[0].p, 4);
        assert_eq!(r.player(&"a".into()).unwrap().ranking_display(), "127.0");
        assert_eq!(r.player(&"b".into()).unwrap().ranking_display(), "111.0");
        assert_eq!(r.player(&"a".into()).unwrap().matches, 1);
        let order: Vec<&str> = r.standings().iter().map(|p| p.id.as_str()).collect();
        assert_eq!(order, ["a", "b"]);
    }

    #[test]
    fn aborted_match_is_logged_only() {
        let mut r = Registry::new();
        r.register_player("a".into(), "A").unwrap();
        r.register_player("b".into(), "B").unwrap();
        let before = r.players.clone();
        let err = r
            .record_match(report(MatchStatus::Aborted("SwapDetected".into()), games(1, 0, 0)))
            .unwrap_err();
        assert_eq!(err, FederationError::AbortedMatch("SwapDetected".into()));
        assert_eq!(r.players, before);
        assert_eq!(r.history.len(), 1);
        assert!(r.history[0].updates.is_empty());
    }

    #[test]
    fn unknown_player() {
        let mut r = Registry::new();
        r.register_player("a".into(), "A").unwrap();
        let err = r.record_match(report(MatchStatus::MatchComplete, games(1, 0, 0))).unwrap_err();
        assert_eq!(err, FederationError::UnknownPlayer("b".into()));
        assert!(r.history.is_empty());
    }

    #[test]
    fn standings_break_ties_by_id() {
        let mut r = Registry::new();
        for id in ["carol", "alice", "bob"] {
            r.register_player(id.into(), id).unwrap();
        }
        r.players[2].ranking_halves = 250;
        let order: Vec<&str> = r.standings().iter().map(|p| p.id.as_str()).collect();
        assert_eq!(order, ["bob", "alice", "carol"]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn branch_sums(ra in -400i64..800, rb in -400i64..800, p in -10i64..=10) {
                let (na, nb, branch) = ranking_change(ra, rb, p);
                let delta = (na - ra) + (nb - rb);
                match branch {
                    Branch::Expected => prop_assert_eq!(delta, 0),
                    Branch::UpsetOrDraw => {
                        let f_halves = 2 * ((ra - rb).abs() / 10) + 1;
                        prop_assert_eq!(delta, 4 * f_halves);
                    }
                }
            }

            #[test]
            fn swapping_players_swaps_updates(ra in -400i64..800, rb in -400i64..800, p in -10i64..=10) {
                let (na, nb, b1) = ranking_change(ra, rb, p);
                let (mb, ma, b2) = ranking_change(rb, ra, -p);
                prop_assert_eq!((na, nb, b1), (ma, mb, b2));
            }

            #[test]
            fn upset_gain_grows_with_gap(low in 0i64..400, gap_points in 0i64..100, p in 0i64..=10) {
                let gain = |gap: i64| {
                    let (na, _, branch) = ranking_change(low, low + 2 * gap, p);
                    assert_eq!(branch, Branch::UpsetOrDraw);
                    na - low
                };
                prop_assert_eq!(gain(gap_points + 5) - gain(gap_points), 2 * (p + 2));
                prop_assert!(gain(gap_points + 5) > gain(gap_points));
            }
        }
    }
}
