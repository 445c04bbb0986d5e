//! Seeded discrete-event postal network.
//!
//! Two parties run a whole match over a simulated post with whole-day
//! latencies. Every RNG draw, letter, check and decision goes into a
//! [`Trace`]. A run is a pure function of its [`SimConfig`].

mod adversary;
mod trace;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::commitment::KeyPair;
use crate::federation::{MatchReport, MatchStatus};
use crate::ids::{MatchId, PlayerId};
use crate::protocol::{
    CommitterState, Flow, FlowBody, FlowMessage, GameRecord, MatchState, NextGame, Peer,
    ProtocolError, ResponderPhase, ResponderState, Tally,
};
use crate::rules::{Move, Variant, DEFAULT_GAMES_PER_MATCH};
use crate::strategy::{BuiltinStrategy, GameView, Strategy};

pub use adversary::{
    guess_from_public_bytes, AdversaryError, AdversaryKind, AdversarySpec, Detection, Interception,
};
pub use trace::{Abort, Detail, EventKind, Role, TerminalStatus, Trace, TraceEvent};

use adversary::PostalAdversary;
use trace::Recorder;

pub const DEFAULT_TIMEOUT_DAYS: u64 = 30;

/// Uniform whole-day latency in `[min_days, max_days]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatencyModel {
    pub min_days: u64,
    pub max_days: u64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel {
            min_days: 2,
            max_days: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerSetup {
    pub id: PlayerId,
    pub strategy: BuiltinStrategy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub latency: LatencyModel,
    pub timeout_days: u64,
    pub adversary: Option<AdversarySpec>,
    pub variant: Variant,
    pub games_per_match: u32,
    /// Player A (commits game 0) and player B.
    pub players: [PlayerSetup; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimConfigError {
    #[error("latency bounds must satisfy 1 <= min <= max (got {min}..{max})")]
    BadLatency { min: u64, max: u64 },
    #[error("games_per_match must be positive")]
    ZeroGames,
    #[error("timeout_days must be positive")]
    ZeroTimeout,
    #[error("both players are {0}")]
    SamePlayer(PlayerId),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
}

impl SimConfig {
    /// Standard RPS, ten games, default latency and timeout, no adversary.
    pub fn new(seed: u64, players: [PlayerSetup; 2]) -> Self {
        SimConfig {
            seed,
            latency: LatencyModel::default(),
            timeout_days: DEFAULT_TIMEOUT_DAYS,
            adversary: None,
            variant: Variant::standard(),
            games_per_match: DEFAULT_GAMES_PER_MATCH,
            players,
        }
    }

    pub fn validate(&self) -> Result<(), SimConfigError> {
        let LatencyModel { min_days, max_days } = self.latency;
        if min_days < 1 || max_days < min_days {
            return Err(SimConfigError::BadLatency {
                min: min_days,
                max: max_days,
            });
        }
        if self.games_per_match == 0 {
            return Err(SimConfigError::ZeroGames);
        }
        if self.timeout_days == 0 {
            return Err(SimConfigError::ZeroTimeout);
        }
        if self.players[0].id == self.players[1].id {
            return Err(SimConfigError::SamePlayer(self.players[0].id.clone()));
        }
        if let Some(spec) = &self.adversary {
            spec.validate(self.games_per_match)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub match_id: MatchId,
    pub player_a: PlayerId,
    pub player_b: PlayerId,
    pub games: Vec<GameRecord>,
    pub tally: Tally,
}

/// The move a committer actually sealed; recorded by the harness, outside
/// the protocol, for checking decisions against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedMove {
    pub game: u32,
    pub committer: PlayerId,
    pub mv: Move,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeekGuess {
    pub game: u32,
    pub guess: Move,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutcome {
    pub trace: Trace,
    pub result: Option<MatchResult>,
    pub sealed: Vec<SealedMove>,
    pub peek: Option<PeekGuess>,
    /// Games closed by both parties (all of them on success).
    pub games: Vec<GameRecord>,
    pub match_id: MatchId,
}

impl SimOutcome {
    pub fn report(&self, config: &SimConfig) -> MatchReport {
        MatchReport {
            match_id: self.match_id,
            player_a: config.players[0].id.clone(),
            player_b: config.players[1].id.clone(),
            games: self.games.clone(),
            status: match &self.trace.status {
                TerminalStatus::MatchComplete => MatchStatus::MatchComplete,
                TerminalStatus::Aborted(a) => MatchStatus::Aborted(a.error.name().into()),
            },
        }
    }
}

/// Runs one match end to end. Protocol failures end the run and are reported
/// in [`Trace::status`]; only an invalid config is an `Err`.
pub fn run_simulation(config: &SimConfig) -> Result<SimOutcome, SimConfigError> {
    config.validate()?;
    Ok(Engine::new(config).run())
}

/// Counts the bytes handed out so each draw can be logged.
struct CountingRng {
    inner: ChaCha20Rng,
    drawn: u64,
}

impl RngCore for CountingRng {
    fn next_u32(&mut self) -> u32 {
        self.drawn += 4;
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.drawn += 8;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.drawn += dest.len() as u64;
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

enum Slot {
    Idle,
    Committer(CommitterState),
    Responder(ResponderState),
}

struct Party {
    id: PlayerId,
    keys: KeyPair,
    peer: Peer,
    strategy: BuiltinStrategy,
    state: MatchState,
    history: Vec<GameView>,
    slot: Slot,
    timer_gen: u64,
    /// (game, flow) currently awaited.
    awaiting: Option<(u32, Flow)>,
    done: bool,
}

enum Event {
    Deliver {
        to: usize,
        from: usize,
        msg: Box<FlowMessage>,
        send_seq: u64,
    },
    Timeout {
        party: usize,
        generation: u64,
    },
}

struct Engine<'c> {
    cfg: &'c SimConfig,
    rng: CountingRng,
    rec: Recorder,
    now: u64,
    queue: BTreeMap<(u64, u64), Event>,
    order: u64,
    parties: [Party; 2],
    adversary: Option<PostalAdversary>,
    last_delivery: [u64; 2],
    sealed: Vec<SealedMove>,
    peek: Option<PeekGuess>,
    match_id: MatchId,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl<'c> Engine<'c> {
    fn new(cfg: &'c SimConfig) -> Self {
        let mut rng = CountingRng {
            inner: ChaCha20Rng::seed_from_u64(cfg.seed),
            drawn: 0,
        };
        let mut rec = Recorder::default();
        let draw = |rng: &mut CountingRng, rec: &mut Recorder, actor: &str, purpose: &str| {
            rec.push(
                0,
                actor,
                EventKind::RngDraw,
                Detail::RngDraw {
                    purpose: purpose.into(),
                    bytes: core::mem::take(&mut rng.drawn),
                },
            );
        };

        let mut id = [0u8; 16];
        rng.fill_bytes(&mut id);
        let match_id = MatchId(id);
        draw(&mut rng, &mut rec, "post", "match_id");

        let mut keys = Vec::new();
        for p in &cfg.players {
            keys.push(KeyPair::generate(&mut rng));
            draw(&mut rng, &mut rec, p.id.as_str(), "keygen");
        }
        // Only a swapping adversary signs anything; others leave the stream alone.
        let adversary = cfg.adversary.map(|spec| {
            let keys = (spec.kind == AdversaryKind::Swap).then(|| {
                let keys = KeyPair::generate(&mut rng);
                draw(&mut rng, &mut rec, "adversary", "keygen");
                keys
            });
            PostalAdversary::new(spec, keys)
        });

        let [a, b] = &cfg.players;
        let make_party = |me: &PlayerSetup, keys: &KeyPair, other: &PlayerSetup, other_keys: &KeyPair| Party {
            id: me.id.clone(),
            keys: keys.clone(),
            peer: Peer {
                id: other.id.clone(),
                key: other_keys.public(),
            },
            strategy: me.strategy.clone(),
            state: MatchState::new(
                match_id,
                a.id.clone(),
                b.id.clone(),
                cfg.variant.clone(),
                cfg.games_per_match,
            ),
            history: Vec::new(),
            slot: Slot::Idle,
            timer_gen: 0,
            awaiting: None,
            done: false,
        };
        let parties = [
            make_party(a, &keys[0], b, &keys[1]),
            make_party(b, &keys[1], a, &keys[0]),
        ];

        Engine {
            cfg,
            rng,
            rec,
            now: 0,
            queue: BTreeMap::new(),
            order: 0,
            parties,
            adversary,
            last_delivery: [0; 2],
            sealed: Vec::new(),
            peek: None,
            match_id,
        }
    }

    fn run(mut self) -> SimOutcome {
        let status = match self.drive() {
            Ok(()) => TerminalStatus::MatchComplete,
            Err(abort) => TerminalStatus::Aborted(abort),
        };
        // A game counts once both sides have closed it.
        let games = {
            let (a, b) = (self.parties[0].state.completed(), self.parties[1].state.completed());
            if a.len() <= b.len() { a } else { b }.to_vec()
        };
        let result = match status {
            TerminalStatus::MatchComplete => {
                let a = &self.parties[0].state;
                debug_assert_eq!(a.completed(), self.parties[1].state.completed());
                Some(MatchResult {
                    match_id: self.match_id,
                    player_a: self.cfg.players[0].id.clone(),
                    player_b: self.cfg.players[1].id.clone(),
                    games: games.clone(),
                    tally: a.tally().expect("both parties finished"),
                })
            }
            TerminalStatus::Aborted(_) => None,
        };
        SimOutcome {
            trace: self.rec.finish(status),
            result,
            sealed: self.sealed,
            peek: self.peek,
            games,
            match_id: self.match_id,
        }
    }

    fn drive(&mut self) -> Result<(), Abort> {
        self.open_next_game(0)?;
        self.open_next_game(1)?;
        while !(self.parties[0].done && self.parties[1].done) {
            let Some(((tick, _), event)) = self.queue.pop_first() else {
                // Every waiting party holds a live timer, so this is unreachable
                // unless a party stopped waiting without finishing.
                return Err(self.fail(0, ProtocolError::Timeout));
            };
            self.now = tick;
            match event {
                Event::Deliver {
                    to,
                    from,
                    msg,
                    send_seq,
                } => self.deliver(to, from, *msg, send_seq)?,
                Event::Timeout { party, generation } => {
                    let p = &self.parties[party];
                    if p.timer_gen == generation && !p.done {
                        return Err(self.fail(party, ProtocolError::Timeout));
                    }
                }
            }
        }
        Ok(())
    }

    fn schedule(&mut self, tick: u64, event: Event) {
        self.queue.insert((tick, self.order), event);
        self.order += 1;
    }

    fn log_draw(&mut self, actor: &str, purpose: &str) {
        let bytes = core::mem::take(&mut self.rng.drawn);
        if bytes > 0 {
            self.rec.push(
                self.now,
                actor,
                EventKind::RngDraw,
                Detail::RngDraw {
                    purpose: purpose.into(),
                    bytes,
                },
            );
        }
    }

    fn await_flow(&mut self, p: usize, game: u32, flow: Flow) {
        let party = &mut self.parties[p];
        party.timer_gen += 1;
        party.awaiting = Some((game, flow));
        let generation = party.timer_gen;
        let deadline = self.now + self.cfg.timeout_days;
        self.schedule(deadline, Event::Timeout { party: p, generation });
    }

    fn role_of(&self, p: usize) -> Role {
        match &self.parties[p].slot {
            Slot::Committer(_) => Role::Committer,
            _ => Role::Responder,
        }
    }

    /// Logs the error and builds the abort record.
    fn fail(&mut self, p: usize, error: ProtocolError) -> Abort {
        let (game, flow) = self.parties[p].awaiting.map_or((0, 0), |(g, f)| (g, f.number()));
        let role = self.role_of(p);
        let id = self.parties[p].id.clone();
        self.rec.push(
            self.now,
            id.as_str(),
            EventKind::Error,
            Detail::Error {
                game,
                flow,
                role,
                error: error.name(),
            },
        );
        Abort {
            error,
            party: id,
            role,
            game,
            flow,
        }
    }

    fn pick_move(&mut self, p: usize) -> Move {
        let party = &mut self.parties[p];
        let mv = party
            .strategy
            .next_move(&self.cfg.variant, &party.history, &mut self.rng);
        let id = party.id.clone();
        self.log_draw(id.as_str(), "strategy");
        mv
    }

    fn open_next_game(&mut self, p: usize) -> Result<(), Abort> {
        let next = self.parties[p]
            .state
            .next_game()
            .map_err(|e| self.fail(p, e))?;
        let NextGame::Game {
            context, committer, ..
        } = next
        else {
            let party = &mut self.parties[p];
            party.done = true;
            party.slot = Slot::Idle;
            party.awaiting = None;
            party.timer_gen += 1;
            return Ok(());
        };
        let game = context.game_index;
        if committer == self.parties[p].id {
            let mv = self.pick_move(p);
            let party = &self.parties[p];
            let started = CommitterState::start(
                context,
                &self.cfg.variant,
                mv,
                &party.keys,
                party.peer.clone(),
                &mut self.rng,
            );
            let id = party.id.clone();
            self.log_draw(id.as_str(), "nonce");
            self.parties[p].awaiting = Some((game, Flow::Commit));
            let (state, flow1) = started.map_err(|e| self.fail(p, e))?;
            self.sealed.push(SealedMove {
                game,
                committer: id,
                mv,
            });
            self.parties[p].slot = Slot::Committer(state);
            self.send(p, flow1);
            self.await_flow(p, game, Flow::Respond);
        } else {
            let party = &self.parties[p];
            let state = ResponderState::new(
                context,
                &self.cfg.variant,
                party.id.clone(),
                party.peer.clone(),
            );
            self.parties[p].slot = Slot::Responder(state);
            self.await_flow(p, game, Flow::Commit);
        }
        Ok(())
    }

    fn send(&mut self, from: usize, msg: FlowMessage) {
        let to = 1 - from;
        let bytes = msg.encode();
        let game = msg.header.game_index;
        let flow = msg.flow();
        let sender = self.parties[from].id.clone();
        let send_seq = self.rec.push(
            self.now,
            sender.as_str(),
            EventKind::Send,
            Detail::Send {
                game,
                flow: flow.number(),
                to: self.parties[to].id.clone(),
                digest: sha256_hex(&bytes),
                message: hex::encode(&bytes),
            },
        );

        let LatencyModel { min_days, max_days } = self.cfg.latency;
        let latency = self.rng.gen_range(min_days..=max_days);
        self.log_draw("post", "latency");

        let mut delivered = Some(msg);
        if let Some(adv) = self.adversary.as_mut() {
            let m = delivered.take().unwrap();
            let hit = !adv.fired
                && adv.spec.kind != AdversaryKind::Equivocate
                && adv.spec.targets(&m);
            if hit {
                let committer = self.parties[0].state.committer_for(game).clone();
                let spec = adv.spec;
                let result = adv.intercept(m.clone(), &committer, self.cfg.variant.n(), &mut self.rng);
                adv.observe(&m);
                self.log_draw("adversary", spec.kind.name());
                let (effect, guess, out) = match result {
                    Interception::Dropped => ("dropped".into(), None, None),
                    Interception::Peeked { msg, guess } => {
                        self.peek = Some(PeekGuess { game, guess });
                        ("forwarded unchanged".into(), Some(guess.index()), Some(msg))
                    }
                    Interception::Forward { msg, effect } => (effect, None, Some(msg)),
                };
                self.rec.push(
                    self.now,
                    "post",
                    EventKind::Intercept,
                    Detail::Intercept {
                        attack: spec.kind.name(),
                        game,
                        flow: flow.number(),
                        effect,
                        guess,
                    },
                );
                delivered = out;
            } else {
                adv.observe(&m);
                delivered = Some(m);
            }
        }

        if let Some(msg) = delivered {
            let tick = (self.now + latency).max(self.last_delivery[to]);
            self.last_delivery[to] = tick;
            self.schedule(
                tick,
                Event::Deliver {
                    to,
                    from,
                    msg: Box::new(msg),
                    send_seq,
                },
            );
        }
    }

    fn deliver(&mut self, p: usize, from: usize, msg: FlowMessage, send_seq: u64) -> Result<(), Abort> {
        let bytes = msg.encode();
        let receiver = self.parties[p].id.clone();
        self.rec.push(
            self.now,
            receiver.as_str(),
            EventKind::Deliver,
            Detail::Deliver {
                game: msg.header.game_index,
                flow: msg.header.flow_number,
                from: self.parties[from].id.clone(),
                send_seq,
                digest: sha256_hex(&bytes),
            },
        );
        self.parties[p].timer_gen += 1;

        match core::mem::replace(&mut self.parties[p].slot, Slot::Idle) {
            Slot::Committer(state) => {
                self.parties[p].slot = Slot::Committer(state.clone());
                self.committer_on_flow2(p, state, &msg)
            }
            Slot::Responder(state) => {
                self.parties[p].slot = Slot::Responder(state.clone());
                if state.phase() == ResponderPhase::AwaitingFlow1 {
                    self.responder_on_flow1(p, state, &msg)
                } else {
                    self.responder_on_flow3(p, state, &msg)
                }
            }
            Slot::Idle => Err(self.fail(p, ProtocolError::OutOfOrderMessage)),
        }
    }

    fn verified(&mut self, p: usize, game: u32, flow: Flow, role: Role, checks: Vec<&'static str>) {
        let id = self.parties[p].id.clone();
        self.rec.push(
            self.now,
            id.as_str(),
            EventKind::Verify,
            Detail::Verify {
                game,
                flow: flow.number(),
                role,
                checks,
            },
        );
    }

    fn decided(&mut self, p: usize, role: Role, record: &GameRecord) {
        let id = self.parties[p].id.clone();
        self.rec.push(
            self.now,
            id.as_str(),
            EventKind::Decide,
            Detail::Decide {
                game: record.index,
                role,
                committer: record.committer.clone(),
                committer_move: record.committer_move,
                responder_move: record.responder_move,
                outcome: record.outcome,
            },
        );
    }

    fn finish_game(&mut self, p: usize, record: GameRecord) -> Result<(), Abort> {
        let party = &mut self.parties[p];
        let view = if record.committer == party.id {
            GameView {
                my_move: record.committer_move,
                their_move: record.responder_move,
                outcome: record.outcome,
            }
        } else {
            GameView {
                my_move: record.responder_move,
                their_move: record.committer_move,
                outcome: record.outcome.flip(),
            }
        };
        party.history.push(view);
        party.awaiting = None;
        party.state.complete_game(record).map_err(|e| self.fail(p, e))?;
        self.open_next_game(p)
    }

    fn committer_on_flow2(&mut self, p: usize, state: CommitterState, msg: &FlowMessage) -> Result<(), Abort> {
        let game = state.context().game_index;
        let (state, mut flow3, outcome) = state.on_flow2(msg).map_err(|e| self.fail(p, e))?;
        self.verified(
            p,
            game,
            Flow::Respond,
            Role::Committer,
            alloc::vec!["envelope_match", "committer_sig", "responder_sig"],
        );
        let record = GameRecord {
            index: game,
            committer: self.parties[p].id.clone(),
            committer_move: state.committed_move(),
            responder_move: state.responder_move().expect("set by flow 2"),
            outcome,
        };
        self.decided(p, Role::Committer, &record);

        let equivocate = self
            .adversary
            .as_ref()
            .map(|a| a.spec)
            .filter(|s| s.kind == AdversaryKind::Equivocate && s.game_index == game);
        if let Some(spec) = equivocate {
            let n = self.cfg.variant.n();
            if let FlowBody::Reveal { opening, .. } = &mut flow3.body {
                let honest = opening.mv;
                let fake = spec
                    .replacement_move
                    .filter(|m| *m != honest)
                    .unwrap_or(Move((honest.index() + 1) % n));
                opening.mv = fake;
                let id = self.parties[p].id.clone();
                self.rec.push(
                    self.now,
                    id.as_str(),
                    EventKind::Intercept,
                    Detail::Intercept {
                        attack: spec.kind.name(),
                        game,
                        flow: Flow::Reveal.number(),
                        effect: alloc::format!("opening rewritten from move {} to {}", honest.index(), fake.index()),
                        guess: None,
                    },
                );
            }
            if let Some(a) = self.adversary.as_mut() {
                a.fired = true;
            }
        }

        let state = state.finish().map_err(|e| self.fail(p, e))?;
        self.parties[p].slot = Slot::Committer(state);
        self.send(p, flow3);
        self.finish_game(p, record)
    }

    fn responder_on_flow1(&mut self, p: usize, state: ResponderState, msg: &FlowMessage) -> Result<(), Abort> {
        let game = state.context().game_index;
        let mv = self.pick_move(p);
        let keys = self.parties[p].keys.clone();
        let (state, flow2) = state.on_flow1(msg, mv, &keys).map_err(|e| self.fail(p, e))?;
        self.verified(p, game, Flow::Commit, Role::Responder, alloc::vec!["committer_sig"]);
        self.parties[p].slot = Slot::Responder(state);
        self.send(p, flow2);
        self.await_flow(p, game, Flow::Reveal);
        Ok(())
    }

    fn responder_on_flow3(&mut self, p: usize, state: ResponderState, msg: &FlowMessage) -> Result<(), Abort> {
        let game = state.context().game_index;
        let committer = state.context().committer_id.clone();
        let (state, outcome) = state.on_flow3(msg).map_err(|e| self.fail(p, e))?;
        self.verified(p, game, Flow::Reveal, Role::Responder, alloc::vec!["envelope_match", "opening"]);
        let record = GameRecord {
            index: game,
            committer,
            committer_move: state.committer_move().expect("opened"),
            responder_move: state.own_move().expect("fixed at flow 2"),
            outcome,
        };
        self.decided(p, Role::Responder, &record);
        self.parties[p].slot = Slot::Responder(state);
        self.finish_game(p, record)
    }
}
