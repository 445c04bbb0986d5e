//! Single-shot interceptors for the postal network.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::commitment::{commit, CommitContext, KeyPair, Nonce};
use crate::protocol::{Envelope, Flow, FlowMessage, ProtocolError};
use crate::rules::Move;
use crate::sim::Role;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdversaryKind {
    /// Replace the envelope with one the adversary sealed itself.
    Swap,
    /// Flip one bit of the sealed digest.
    Tamper,
    /// A dishonest committer opens to a different move.
    Equivocate,
    /// Substitute the envelope seen at the same flow of an earlier game.
    Replay,
    /// Lose the letter.
    Drop,
    /// Look at the envelope and guess the move; forward unchanged.
    Peek,
}

impl AdversaryKind {
    pub const ALL: [AdversaryKind; 6] = [
        AdversaryKind::Swap,
        AdversaryKind::Tamper,
        AdversaryKind::Equivocate,
        AdversaryKind::Replay,
        AdversaryKind::Drop,
        AdversaryKind::Peek,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AdversaryKind::Swap => "swap",
            AdversaryKind::Tamper => "tamper",
            AdversaryKind::Equivocate => "equivocate",
            AdversaryKind::Replay => "replay",
            AdversaryKind::Drop => "drop",
            AdversaryKind::Peek => "peek",
        }
    }
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdversaryKind {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AdversaryKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| AdversaryError::UnknownKind(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("unknown adversary kind {0:?}")]
    UnknownKind(String),
    #[error("{kind} cannot target flow {flow}")]
    BadFlow { kind: AdversaryKind, flow: u8 },
    #[error("{kind} cannot target game {game}")]
    BadGame { kind: AdversaryKind, game: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    pub game_index: u32,
    pub flow: Flow,
    /// Move substituted by [`AdversaryKind::Equivocate`]; defaults to the
    /// committed move plus one.
    pub replacement_move: Option<Move>,
}

/// Who should catch an attack, and with which error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Detection {
    pub error: ProtocolError,
    /// `None` when either party may be the first to notice.
    pub role: Option<Role>,
    pub flow: Flow,
}

impl AdversarySpec {
    pub fn new(kind: AdversaryKind, game_index: u32, flow: Flow) -> Self {
        AdversarySpec {
            kind,
            game_index,
            flow,
            replacement_move: None,
        }
    }

    /// The standard demonstration target for each kind.
    pub fn default_for(kind: AdversaryKind) -> Self {
        let (game, flow) = match kind {
            AdversaryKind::Swap => (0, Flow::Respond),
            AdversaryKind::Tamper => (0, Flow::Commit),
            AdversaryKind::Equivocate => (0, Flow::Reveal),
            AdversaryKind::Replay => (1, Flow::Reveal),
            AdversaryKind::Drop => (0, Flow::Respond),
            AdversaryKind::Peek => (0, Flow::Commit),
        };
        Self::new(kind, game, flow)
    }

    pub fn validate(&self, games_per_match: u32) -> Result<(), AdversaryError> {
        let kind = self.kind;
        if self.game_index >= games_per_match {
            return Err(AdversaryError::BadGame { kind, game: self.game_index });
        }
        let flow_ok = match kind {
            AdversaryKind::Equivocate => self.flow == Flow::Reveal,
            // The reveal carries the opening; peeking there is not a guess.
            AdversaryKind::Peek => self.flow != Flow::Reveal,
            _ => true,
        };
        if !flow_ok {
            return Err(AdversaryError::BadFlow { kind, flow: self.flow.number() });
        }
        if kind == AdversaryKind::Replay && self.game_index == 0 {
            return Err(AdversaryError::BadGame { kind, game: 0 });
        }
        Ok(())
    }

    /// The error the protocol must raise, or `None` for passive attacks.
    pub fn expected_detection(&self) -> Option<Detection> {
        use AdversaryKind::*;
        let (error, role, flow) = match (self.kind, self.flow) {
            (Peek, _) => return None,
            (Drop, flow) => (ProtocolError::Timeout, None, flow),
            (Equivocate, _) => (ProtocolError::BadOpening, Some(Role::Responder), Flow::Reveal),
            (Swap | Tamper | Replay, Flow::Commit) => {
                (ProtocolError::InvalidCommitterSignature, Some(Role::Responder), Flow::Commit)
            }
            (Swap | Tamper | Replay, Flow::Respond) => {
                (ProtocolError::SwapDetected, Some(Role::Committer), Flow::Respond)
            }
            (Swap | Tamper | Replay, Flow::Reveal) => {
                (ProtocolError::SwapDetected, Some(Role::Responder), Flow::Reveal)
            }
        };
        Some(Detection { error, role, flow })
    }

    pub fn targets(&self, msg: &FlowMessage) -> bool {
        msg.header.game_index == self.game_index && msg.flow() == self.flow
    }
}

/// What the post did with a letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interception {
    Forward { msg: FlowMessage, effect: String },
    Dropped,
    Peeked { msg: FlowMessage, guess: Move },
}

/// Guess the committed move from what is visible on the outside of the
/// envelope: the digest's first byte, reduced mod n.
pub fn guess_from_public_bytes(envelope: &Envelope, n: u32) -> Move {
    Move(u32::from(envelope.commitment.0[0]) % n)
}

/// In-transit adversary state: its own signing key and every envelope it
/// has seen, by (game, flow).
pub(crate) struct PostalAdversary {
    pub spec: AdversarySpec,
    keys: Option<KeyPair>,
    seen: Vec<(u32, Flow, Envelope)>,
    pub fired: bool,
}

impl PostalAdversary {
    pub fn new(spec: AdversarySpec, keys: Option<KeyPair>) -> Self {
        PostalAdversary {
            spec,
            keys,
            seen: Vec::new(),
            fired: false,
        }
    }

    pub fn observe(&mut self, msg: &FlowMessage) {
        self.seen
            .push((msg.header.game_index, msg.flow(), *msg.body.envelope()));
    }

    /// Applies the transit attack to a targeted letter. `committer` names the
    /// game's committer, which the adversary knows from match setup.
    pub fn intercept(
        &mut self,
        mut msg: FlowMessage,
        committer: &crate::ids::PlayerId,
        variant_n: u32,
        rng: &mut impl RngCore,
    ) -> Interception {
        self.fired = true;
        let flow = msg.flow();
        match self.spec.kind {
            AdversaryKind::Drop => Interception::Dropped,
            AdversaryKind::Peek => {
                let guess = guess_from_public_bytes(msg.body.envelope(), variant_n);
                Interception::Peeked { msg, guess }
            }
            AdversaryKind::Tamper => {
                let byte = rng.gen_range(0..32usize);
                let bit = rng.gen_range(0..8u32);
                msg.body.envelope_mut().commitment.0[byte] ^= 1 << bit;
                Interception::Forward {
                    msg,
                    effect: format!("flipped bit {bit} of digest byte {byte}"),
                }
            }
            AdversaryKind::Swap => {
                let ctx = CommitContext {
                    match_id: msg.header.match_id,
                    game_index: msg.header.game_index,
                    committer_id: committer.clone(),
                    variant_n,
                };
                let mv = Move(rng.gen_range(0..variant_n));
                let nonce = Nonce::generate(rng);
                let keys = self.keys.as_ref().expect("swap adversary has keys");
                let mut fake = Envelope::seal(&ctx, commit(&ctx, mv, &nonce), keys);
                if flow != Flow::Commit {
                    fake = fake.countersign(&ctx, keys);
                }
                *msg.body.envelope_mut() = fake;
                Interception::Forward {
                    msg,
                    effect: format!("replaced envelope with {}", fake.commitment.to_hex()),
                }
            }
            AdversaryKind::Replay => {
                let earlier = self
                    .seen
                    .iter()
                    .rev()
                    .find(|(g, f, _)| *g < msg.header.game_index && *f == flow)
                    .map(|(g, _, e)| (*g, *e));
                match earlier {
                    Some((game, env)) => {
                        *msg.body.envelope_mut() = env;
                        Interception::Forward {
                            msg,
                            effect: format!("replayed flow {flow} envelope of game {game}"),
                        }
                    }
                    None => Interception::Forward {
                        msg,
                        effect: "nothing to replay".into(),
                    },
                }
            }
            AdversaryKind::Equivocate => unreachable!("equivocation happens at the committer"),
        }
    }
}
