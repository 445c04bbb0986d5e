use super::{check_header, Envelope, Flow, FlowBody, FlowHeader, FlowMessage, Peer, ProtocolError};
use crate::commitment::{verify_opening, CommitContext, KeyPair};
use crate::ids::PlayerId;
use crate::rules::{GameOutcome, Move, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResponderPhase {
    AwaitingFlow1,
    Responded,
    Complete,
}

/// The party that answers in the clear.
#[derive(Debug, Clone)]
pub struct ResponderState {
    phase: ResponderPhase,
    context: CommitContext,
    variant: Variant,
    own_id: PlayerId,
    committer: Peer,
    stored: Option<Envelope>,
    own_move: Option<Move>,
    committer_move: Option<Move>,
    outcome: Option<GameOutcome>,
}

impl ResponderState {
    pub fn new(context: CommitContext, variant: &Variant, own_id: PlayerId, committer: Peer) -> Self {
        assert_eq!(context.variant_n, variant.n(), "context built for another variant");
        assert_eq!(context.committer_id, committer.id, "committer does not match context");
        ResponderState {
            phase: ResponderPhase::AwaitingFlow1,
            context,
            variant: variant.clone(),
            own_id,
            committer,
            stored: None,
            own_move: None,
            committer_move: None,
            outcome: None,
        }
    }

    /// Verifies the committer's flap signature, countersigns, and answers
    /// with `own_move` in the clear. The move is fixed from here on.
    pub fn on_flow1(
        mut self,
        msg: &FlowMessage,
        own_move: Move,
        keys: &KeyPair,
    ) -> Result<(Self, FlowMessage), ProtocolError> {
        if self.phase != ResponderPhase::AwaitingFlow1 {
            return Err(ProtocolError::OutOfOrderMessage);
        }
        check_header(
            msg,
            &self.context.match_id,
            self.context.game_index,
            &self.committer.id,
            Flow::Commit,
        )?;
        let envelope = msg.body.envelope();
        if envelope.responder_sig.is_some() {
            return Err(ProtocolError::MalformedMessage);
        }
        if !envelope.committer_sig_valid(&self.context, &self.committer.key) {
            return Err(ProtocolError::InvalidCommitterSignature);
        }
        if !self.variant.contains(own_move) {
            return Err(ProtocolError::InvalidMove);
        }
        let countersigned = envelope.countersign(&self.context, keys);
        let reply = FlowMessage {
            header: FlowHeader {
                match_id: self.context.match_id,
                game_index: self.context.game_index,
                sender_id: self.own_id.clone(),
                flow_number: Flow::Respond.number(),
            },
            body: FlowBody::Respond {
                envelope: countersigned,
                responder_move: own_move,
            },
        };
        self.phase = ResponderPhase::Responded;
        self.stored = Some(countersigned);
        self.own_move = Some(own_move);
        Ok((self, reply))
    }

    /// Checks the envelope is the one countersigned, opens it and decides.
    /// The outcome is committer-first.
    pub fn on_flow3(mut self, msg: &FlowMessage) -> Result<(Self, GameOutcome), ProtocolError> {
        if self.phase != ResponderPhase::Responded {
            return Err(ProtocolError::OutOfOrderMessage);
        }
        check_header(
            msg,
            &self.context.match_id,
            self.context.game_index,
            &self.committer.id,
            Flow::Reveal,
        )?;
        let FlowBody::Reveal { envelope, opening } = &msg.body else {
            return Err(ProtocolError::MalformedMessage);
        };
        let stored = self.stored.as_ref().expect("stored at flow 2");
        if envelope.to_bytes() != stored.to_bytes() {
            return Err(ProtocolError::SwapDetected);
        }
        if !verify_opening(&self.context, &envelope.commitment, opening) {
            return Err(ProtocolError::BadOpening);
        }
        if !self.variant.contains(opening.mv) {
            return Err(ProtocolError::InvalidMove);
        }
        let own = self.own_move.expect("fixed at flow 2");
        let outcome = self.variant.outcome(opening.mv, own);
        self.phase = ResponderPhase::Complete;
        self.committer_move = Some(opening.mv);
        self.outcome = Some(outcome);
        Ok((self, outcome))
    }

    pub fn phase(&self) -> ResponderPhase {
        self.phase
    }

    pub fn context(&self) -> &CommitContext {
        &self.context
    }

    pub fn own_move(&self) -> Option<Move> {
        self.own_move
    }

    pub fn committer_move(&self) -> Option<Move> {
        self.committer_move
    }

    pub fn stored_envelope(&self) -> Option<&Envelope> {
        self.stored.as_ref()
    }

    pub fn outcome(&self) -> Option<GameOutcome> {
        self.outcome
    }
}
