use rand::RngCore;

use super::{check_header, Envelope, Flow, FlowBody, FlowHeader, FlowMessage, Peer, ProtocolError};
use crate::commitment::{commit, CommitContext, KeyPair, Nonce, Opening, PublicKey};
use crate::rules::{GameOutcome, Move, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CommitterPhase {
    Init,
    Committed,
    OutcomeKnown,
    Done,
}

/// The party that seals its move first.
#[derive(Debug, Clone)]
pub struct CommitterState {
    phase: CommitterPhase,
    context: CommitContext,
    variant: Variant,
    own_key: PublicKey,
    responder: Peer,
    mv: Move,
    nonce: Nonce,
    sent: Envelope,
    responder_move: Option<Move>,
    outcome: Option<GameOutcome>,
}

impl CommitterState {
    /// Draws the nonce, seals `mv` and produces flow 1.
    ///
    /// The returned envelope is stored verbatim for the flow-2 comparison.
    pub fn start(
        context: CommitContext,
        variant: &Variant,
        mv: Move,
        keys: &KeyPair,
        responder: Peer,
        rng: &mut impl RngCore,
    ) -> Result<(Self, FlowMessage), ProtocolError> {
        assert_eq!(context.variant_n, variant.n(), "context built for another variant");
        if !variant.contains(mv) {
            return Err(ProtocolError::InvalidMove);
        }
        let nonce = Nonce::generate(rng);
        let envelope = Envelope::seal(&context, commit(&context, mv, &nonce), keys);
        let msg = FlowMessage {
            header: FlowHeader {
                match_id: context.match_id,
                game_index: context.game_index,
                sender_id: context.committer_id.clone(),
                flow_number: Flow::Commit.number(),
            },
            body: FlowBody::Commit { envelope },
        };
        let state = CommitterState {
            phase: CommitterPhase::Committed,
            context,
            variant: variant.clone(),
            own_key: keys.public(),
            responder,
            mv,
            nonce,
            sent: envelope,
            responder_move: None,
            outcome: None,
        };
        Ok((state, msg))
    }

    /// Checks the returned envelope is the one mailed, verifies the
    /// countersignature, decides the game and produces flow 3.
    pub fn on_flow2(
        mut self,
        msg: &FlowMessage,
    ) -> Result<(Self, FlowMessage, GameOutcome), ProtocolError> {
        if self.phase != CommitterPhase::Committed {
            return Err(ProtocolError::OutOfOrderMessage);
        }
        check_header(
            msg,
            &self.context.match_id,
            self.context.game_index,
            &self.responder.id,
            Flow::Respond,
        )?;
        let FlowBody::Respond {
            envelope,
            responder_move,
        } = &msg.body
        else {
            return Err(ProtocolError::MalformedMessage);
        };
        if envelope.sealed_bytes() != self.sent.sealed_bytes()
            || !envelope.committer_sig_valid(&self.context, &self.own_key)
        {
            return Err(ProtocolError::SwapDetected);
        }
        if !envelope.responder_sig_valid(&self.context, &self.responder.key) {
            return Err(ProtocolError::InvalidResponderSignature);
        }
        if !self.variant.contains(*responder_move) {
            return Err(ProtocolError::InvalidMove);
        }
        let outcome = self.variant.outcome(self.mv, *responder_move);
        let reveal = FlowMessage {
            header: FlowHeader {
                match_id: self.context.match_id,
                game_index: self.context.game_index,
                sender_id: self.context.committer_id.clone(),
                flow_number: Flow::Reveal.number(),
            },
            body: FlowBody::Reveal {
                envelope: *envelope,
                opening: Opening {
                    mv: self.mv,
                    nonce: self.nonce,
                },
            },
        };
        self.phase = CommitterPhase::OutcomeKnown;
        self.responder_move = Some(*responder_move);
        self.outcome = Some(outcome);
        Ok((self, reveal, outcome))
    }

    /// Flow 3 is in the post; nothing further is expected for this game.
    pub fn finish(mut self) -> Result<Self, ProtocolError> {
        if self.phase != CommitterPhase::OutcomeKnown {
            return Err(ProtocolError::OutOfOrderMessage);
        }
        self.phase = CommitterPhase::Done;
        Ok(self)
    }

    pub fn phase(&self) -> CommitterPhase {
        self.phase
    }

    pub fn context(&self) -> &CommitContext {
        &self.context
    }

    pub fn committed_move(&self) -> Move {
        self.mv
    }

    pub fn sent_envelope(&self) -> &Envelope {
        &self.sent
    }

    pub fn responder_move(&self) -> Option<Move> {
        self.responder_move
    }

    pub fn outcome(&self) -> Option<GameOutcome> {
        self.outcome
    }
}
