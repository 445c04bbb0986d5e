//! The three-flow protocol.
//!
//! 1. Committer → responder: sealed envelope signed across the flap.
//! 2. Responder → committer: the same envelope countersigned, plus the
//!    responder's move in the clear.
//! 3. Committer → responder: the doubly signed envelope plus its opening.
//!
//! Each party keeps the envelope it last sent verbatim and compares the
//! returned one byte-for-byte. Handlers are pure: they consume a state and a
//! message and return the next state and any message to mail.

mod committer;
mod envelope;
mod responder;
mod sequencer;

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::codec::{DecodeError, Decoder, Encoder};
use crate::commitment::{Commitment, Nonce, Opening, PublicKey, Signature};
use crate::ids::{MatchId, PlayerId};
use crate::rules::Move;

pub use committer::{CommitterPhase, CommitterState};
pub use envelope::Envelope;
pub use responder::{ResponderPhase, ResponderState};
pub use sequencer::{GameRecord, MatchState, NextGame, Tally};

/// Every protocol error is terminal for the game and the match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error)]
pub enum ProtocolError {
    #[error("committer signature does not verify")]
    InvalidCommitterSignature,
    #[error("responder countersignature does not verify")]
    InvalidResponderSignature,
    #[error("returned envelope differs from the one last held")]
    SwapDetected,
    #[error("opening does not match the commitment")]
    BadOpening,
    #[error("message arrived out of order")]
    OutOfOrderMessage,
    #[error("message body does not match its header")]
    MalformedMessage,
    #[error("move outside the variant")]
    InvalidMove,
    #[error("no message within the timeout")]
    Timeout,
    #[error("next game requested while a game is in flight")]
    SequencingViolation,
    #[error("match has not finished")]
    MatchIncomplete,
}

impl ProtocolError {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolError::InvalidCommitterSignature => "InvalidCommitterSignature",
            ProtocolError::InvalidResponderSignature => "InvalidResponderSignature",
            ProtocolError::SwapDetected => "SwapDetected",
            ProtocolError::BadOpening => "BadOpening",
            ProtocolError::OutOfOrderMessage => "OutOfOrderMessage",
            ProtocolError::MalformedMessage => "MalformedMessage",
            ProtocolError::InvalidMove => "InvalidMove",
            ProtocolError::Timeout => "Timeout",
            ProtocolError::SequencingViolation => "SequencingViolation",
            ProtocolError::MatchIncomplete => "MatchIncomplete",
        }
    }
}

/// Which of the three mailings a message is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flow {
    Commit = 1,
    Respond = 2,
    Reveal = 3,
}

impl Flow {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Flow> {
        match n {
            1 => Some(Flow::Commit),
            2 => Some(Flow::Respond),
            3 => Some(Flow::Reveal),
            _ => None,
        }
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowHeader {
    pub match_id: MatchId,
    pub game_index: u32,
    pub sender_id: PlayerId,
    /// Raw flow number as mailed; receivers reject anything but the expected one.
    pub flow_number: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowBody {
    Commit { envelope: Envelope },
    Respond { envelope: Envelope, responder_move: Move },
    Reveal { envelope: Envelope, opening: Opening },
}

impl FlowBody {
    pub fn flow(&self) -> Flow {
        match self {
            FlowBody::Commit { .. } => Flow::Commit,
            FlowBody::Respond { .. } => Flow::Respond,
            FlowBody::Reveal { .. } => Flow::Reveal,
        }
    }

    pub fn envelope(&self) -> &Envelope {
        match self {
            FlowBody::Commit { envelope }
            | FlowBody::Respond { envelope, .. }
            | FlowBody::Reveal { envelope, .. } => envelope,
        }
    }

    pub fn envelope_mut(&mut self) -> &mut Envelope {
        match self {
            FlowBody::Commit { envelope }
            | FlowBody::Respond { envelope, .. }
            | FlowBody::Reveal { envelope, .. } => envelope,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowMessage {
    pub header: FlowHeader,
    pub body: FlowBody,
}

const WIRE_TAG: &str = "postal-rps/flow/v1";

impl FlowMessage {
    pub fn flow(&self) -> Flow {
        self.body.flow()
    }

    /// Transport encoding, length-prefixed like the commitment payload:
    /// tag, match id, game index, sender, flow number, body kind, commitment,
    /// committer signature, responder signature (empty if absent), then the
    /// responder move (flow 2) or opening move and nonce (flow 3).
    pub fn encode(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.str(WIRE_TAG)
            .field(&self.header.match_id.0)
            .u32(self.header.game_index)
            .str(self.header.sender_id.as_str())
            .u8(self.header.flow_number)
            .u8(self.body.flow().number());
        let env = self.body.envelope();
        enc.field(&env.commitment.0).field(&env.committer_sig.0);
        match &env.responder_sig {
            Some(sig) => enc.field(&sig.0),
            None => enc.field(&[]),
        };
        match &self.body {
            FlowBody::Commit { .. } => {}
            FlowBody::Respond { responder_move, .. } => {
                enc.u32(responder_move.index());
            }
            FlowBody::Reveal { opening, .. } => {
                enc.u32(opening.mv.index()).field(&opening.nonce.0);
            }
        }
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(bytes);
        if dec.field()? != WIRE_TAG.as_bytes() {
            return Err(DecodeError::UnknownTag(0));
        }
        let header = FlowHeader {
            match_id: MatchId(dec.fixed()?),
            game_index: dec.u32()?,
            sender_id: PlayerId::new(dec.str()?),
            flow_number: dec.u8()?,
        };
        let kind = dec.u8()?;
        let commitment = Commitment(dec.fixed()?);
        let committer_sig = Signature(dec.fixed()?);
        let responder_sig = match dec.field()? {
            [] => None,
            raw => Some(Signature(raw.try_into().map_err(|_| DecodeError::BadLength {
                offset: 0,
                len: raw.len(),
                expected: 64,
            })?)),
        };
        let envelope = Envelope {
            commitment,
            committer_sig,
            responder_sig,
        };
        let body = match Flow::from_number(kind) {
            Some(Flow::Commit) => FlowBody::Commit { envelope },
            Some(Flow::Respond) => FlowBody::Respond {
                envelope,
                responder_move: Move(dec.u32()?),
            },
            Some(Flow::Reveal) => FlowBody::Reveal {
                envelope,
                opening: Opening {
                    mv: Move(dec.u32()?),
                    nonce: Nonce(dec.fixed()?),
                },
            },
            None => return Err(DecodeError::UnknownTag(kind)),
        };
        dec.finish()?;
        Ok(FlowMessage { header, body })
    }
}

/// The other party of a game, as known from match setup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Peer {
    pub id: PlayerId,
    pub key: PublicKey,
}

/// Shared header check for both state machines.
fn check_header(
    msg: &FlowMessage,
    match_id: &MatchId,
    game_index: u32,
    sender: &PlayerId,
    expected: Flow,
) -> Result<(), ProtocolError> {
    let h = &msg.header;
    if h.match_id != *match_id
        || h.game_index != game_index
        || h.sender_id != *sender
        || h.flow_number != expected.number()
    {
        return Err(ProtocolError::OutOfOrderMessage);
    }
    if msg.body.flow() != expected {
        return Err(ProtocolError::MalformedMessage);
    }
    Ok(())
}
