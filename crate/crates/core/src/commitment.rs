//! The digital sealed envelope.
//!
//! A [`Commitment`] is a SHA-256 digest over the canonical encoding of the
//! game context, the move and a fresh 128-bit nonce: opaque until opened
//! (hiding) and openable to a single move (binding). Flap signatures are
//! Ed25519 and never cover the plaintext move.

use alloc::string::String;
use alloc::vec::Vec;

use ed25519_dalek::{Signer, SigningKey, VerifyingKey};
use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::codec::Encoder;
use crate::ids::{MatchId, PlayerId};
use crate::rules::Move;

/// Everything a commitment is bound to besides the move itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CommitContext {
    pub match_id: MatchId,
    pub game_index: u32,
    pub committer_id: PlayerId,
    pub variant_n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Nonce(pub [u8; 16]);

impl Nonce {
    /// Draws 16 bytes from `rng`.
    pub fn generate(rng: &mut impl RngCore) -> Self {
        let mut bytes = [0u8; 16];
        rng.fill_bytes(&mut bytes);
        Nonce(bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Commitment(pub [u8; 32]);

impl Commitment {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Opening {
    pub mv: Move,
    pub nonce: Nonce,
}

/// Fields in order: match id, game index, committer id, variant size, move,
/// nonce; each behind a 4-byte big-endian length.
pub fn canonical_encode(context: &CommitContext, mv: Move, nonce: &Nonce) -> Vec<u8> {
    Encoder::new()
        .field(&context.match_id.0)
        .u32(context.game_index)
        .str(context.committer_id.as_str())
        .u32(context.variant_n)
        .u32(mv.index())
        .field(&nonce.0)
        .finish()
}

pub fn commit(context: &CommitContext, mv: Move, nonce: &Nonce) -> Commitment {
    Commitment(Sha256::digest(canonical_encode(context, mv, nonce)).into())
}

pub fn verify_opening(context: &CommitContext, commitment: &Commitment, opening: &Opening) -> bool {
    commit(context, opening.mv, &opening.nonce) == *commitment
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature(pub [u8; 64]);

impl Signature {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PublicKey(pub [u8; 32]);

impl PublicKey {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

/// A player's signing key. Public halves are exchanged at match setup and
/// assumed authentic.
#[derive(Clone)]
pub struct KeyPair {
    signing: SigningKey,
}

impl core::fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("KeyPair")
            .field("public", &self.public())
            .finish_non_exhaustive()
    }
}

impl KeyPair {
    pub fn generate(rng: &mut impl RngCore) -> Self {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        Self::from_seed(seed)
    }

    pub fn from_seed(seed: [u8; 32]) -> Self {
        Self {
            signing: SigningKey::from_bytes(&seed),
        }
    }

    pub fn public(&self) -> PublicKey {
        PublicKey(self.signing.verifying_key().to_bytes())
    }

    pub fn sign(&self, msg: &[u8]) -> Signature {
        Signature(self.signing.sign(msg).to_bytes())
    }
}

pub fn verify_sig(public: &PublicKey, msg: &[u8], sig: &Signature) -> bool {
    let Ok(key) = VerifyingKey::from_bytes(&public.0) else {
        return false;
    };
    let sig = ed25519_dalek::Signature::from_bytes(&sig.0);
    key.verify_strict(msg, &sig).is_ok()
}
