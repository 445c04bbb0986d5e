use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;

use crate::ids::PlayerId;
use crate::protocol::ProtocolError;
use crate::rules::{GameOutcome, Move};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EventKind {
    Send,
    Deliver,
    Verify,
    Decide,
    Error,
    RngDraw,
    Intercept,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Committer,
    Responder,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Committer => "committer",
            Role::Responder => "responder",
        })
    }
}

/// Event payload. Digests and signatures are lowercase hex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Detail {
    RngDraw {
        purpose: String,
        bytes: u64,
    },
    Send {
        game: u32,
        flow: u8,
        to: PlayerId,
        digest: String,
        message: String,
    },
    Deliver {
        game: u32,
        flow: u8,
        from: PlayerId,
        send_seq: u64,
        digest: String,
    },
    Verify {
        game: u32,
        flow: u8,
        role: Role,
        checks: Vec<&'static str>,
    },
    Decide {
        game: u32,
        role: Role,
        committer: PlayerId,
        committer_move: Move,
        responder_move: Move,
        outcome: GameOutcome,
    },
    Error {
        game: u32,
        flow: u8,
        role: Role,
        error: &'static str,
    },
    Intercept {
        attack: &'static str,
        game: u32,
        flow: u8,
        effect: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        guess: Option<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub tick: u64,
    pub seq: u64,
    pub actor: String,
    pub kind: EventKind,
    pub detail: Detail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abort {
    pub error: ProtocolError,
    pub party: PlayerId,
    pub role: Role,
    pub game: u32,
    pub flow: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerminalStatus {
    MatchComplete,
    Aborted(Abort),
}

impl fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminalStatus::MatchComplete => f.write_str("MatchComplete"),
            TerminalStatus::Aborted(a) => write!(f, "Aborted({})", a.error.name()),
        }
    }
}

/// Events ordered by `(tick, seq)`, with `seq` dense from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub status: TerminalStatus,
}

impl Trace {
    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

#[derive(Debug, Default)]
pub(crate) struct Recorder {
    events: Vec<TraceEvent>,
}

impl Recorder {
    pub fn push(&mut self, tick: u64, actor: &str, kind: EventKind, detail: Detail) -> u64 {
        let seq = self.events.len() as u64;
        self.events.push(TraceEvent {
            tick,
            seq,
            actor: actor.into(),
            kind,
            detail,
        });
        seq
    }

    pub fn finish(self, status: TerminalStatus) -> Trace {
        Trace {
            events: self.events,
            status,
        }
    }
}
