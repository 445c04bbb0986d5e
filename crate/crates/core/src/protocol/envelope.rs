use alloc::vec::Vec;

use crate::codec::Encoder;
use crate::commitment::{verify_sig, CommitContext, Commitment, KeyPair, PublicKey, Signature};

/// A commitment with its flap signatures.
///
/// The committer signs the digest together with the game context; the
/// responder signs that material plus the committer's signature, i.e. below
/// it. Neither signature ever covers the move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Envelope {
    pub commitment: Commitment,
    pub committer_sig: Signature,
    pub responder_sig: Option<Signature>,
}

fn flap_material(tag: &str, ctx: &CommitContext, commitment: &Commitment) -> Encoder {
    let mut enc = Encoder::new();
    enc.str(tag)
        .field(&ctx.match_id.0)
        .u32(ctx.game_index)
        .str(ctx.committer_id.as_str())
        .u32(ctx.variant_n)
        .field(&commitment.0);
    enc
}

pub(crate) fn committer_material(ctx: &CommitContext, commitment: &Commitment) -> Vec<u8> {
    flap_material("postal-rps/flap/committer", ctx, commitment).finish()
}

pub(crate) fn responder_material(
    ctx: &CommitContext,
    commitment: &Commitment,
    committer_sig: &Signature,
) -> Vec<u8> {
    flap_material("postal-rps/flap/responder", ctx, commitment)
        .field(&committer_sig.0)
        .finish()
}

impl Envelope {
    /// Seals `commitment` under the committer's flap signature.
    pub fn seal(ctx: &CommitContext, commitment: Commitment, keys: &KeyPair) -> Self {
        Envelope {
            commitment,
            committer_sig: keys.sign(&committer_material(ctx, &commitment)),
            responder_sig: None,
        }
    }

    /// Adds the responder's signature below the committer's.
    pub fn countersign(mut self, ctx: &CommitContext, keys: &KeyPair) -> Self {
        let material = responder_material(ctx, &self.commitment, &self.committer_sig);
        self.responder_sig = Some(keys.sign(&material));
        self
    }

    pub fn committer_sig_valid(&self, ctx: &CommitContext, committer: &PublicKey) -> bool {
        verify_sig(committer, &committer_material(ctx, &self.commitment), &self.committer_sig)
    }

    pub fn responder_sig_valid(&self, ctx: &CommitContext, responder: &PublicKey) -> bool {
        match &self.responder_sig {
            Some(sig) => verify_sig(
                responder,
                &responder_material(ctx, &self.commitment, &self.committer_sig),
                sig,
            ),
            None => false,
        }
    }

    /// Digest, committer signature and responder signature (empty when absent).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.field(&self.commitment.0).field(&self.committer_sig.0);
        match &self.responder_sig {
            Some(sig) => enc.field(&sig.0),
            None => enc.field(&[]),
        };
        enc.finish()
    }

    /// The bytes the committer put in the post: digest plus its own signature.
    pub fn sealed_bytes(&self) -> Vec<u8> {
        Envelope {
            responder_sig: None,
            ..*self
        }
        .to_bytes()
    }
}
