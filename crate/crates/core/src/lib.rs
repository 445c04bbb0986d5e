//! Simultaneous moves between players who can only exchange letters.
//!
//! One player seals a move in a hash commitment and signs across the flap,
//! the other countersigns and answers in the clear, and the sealed envelope
//! comes back for opening. Each side re-checks the envelope it last held, so
//! neither can swap the envelope and the committer cannot change its contents.
//!
//! The crate is `no_std` (with `alloc`) and contains no IO:
//!
//! - [`rules`]: RPS-n moves and balanced cyclic dominance.
//! - [`commitment`]: context-bound commitments and flap signatures.
//! - [`protocol`]: committer/responder state machines, wire format and the
//!   match sequencer.
//! - [`sim`]: a seeded discrete-event postal network with adversaries and a
//!   trace recorder.
//! - [`federation`]: player registry and the two-branch ranking update.
#![no_std]

extern crate alloc;

pub mod codec;
pub mod commitment;
pub mod federation;
pub mod ids;
pub mod protocol;
pub mod rules;
pub mod sim;
pub mod strategy;

pub use ids::{MatchId, PlayerId};
pub use commitment::{CommitContext, Commitment, KeyPair, Nonce, Opening, PublicKey, Signature};
pub use federation::{Branch, PlayerRecord, RankingUpdate, Registry};
pub use protocol::{Envelope, FlowMessage, MatchState, ProtocolError};
pub use rules::{GameOutcome, MatchPoints, Move, Variant};
pub use sim::{run_simulation, AdversaryKind, AdversarySpec, SimConfig, Trace, TraceEvent};
