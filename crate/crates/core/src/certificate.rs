//! Notary certificates binding a commitment root to a criterion schema and a
//! pseudonymous subject for a validity window.
//!
//! The signature covers `SHA-256(preimage)` where
//!
//! ```text
//! preimage = "WTCERT1" || version || root_hash || schema_id || subject_id
//!            || valid_from (u64 BE) || valid_to (u64 BE) || algorithm_id
//! ```
//!
//! The `WTC1` file is the preimage followed by the signature length (u16 BE)
//! and the signature bytes.

use ed25519_dalek::{Signature, Signer, Verifier};
pub use ed25519_dalek::{SigningKey, VerifyingKey};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::hash::{sha256, Digest};

pub const CERT_MAGIC: &[u8; 7] = b"WTCERT1";
pub const CERT_VERSION: u8 = 1;
pub const ALG_ED25519: u8 = 0x01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Validity {
    pub from: u64,
    pub to: u64,
}

impl Validity {
    pub fn new(from: u64, to: u64) -> Result<Self> {
        if from > to {
            return Err(Error::InvalidWindow { from, to });
        }
        Ok(Self { from, to })
    }

    pub fn contains(&self, now: u64) -> bool {
        self.from <= now && now <= self.to
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub version: u8,
    pub root_hash: Digest,
    pub schema_id: Digest,
    pub subject_id: [u8; 32],
    pub valid_from: u64,
    pub valid_to: u64,
    pub algorithm_id: u8,
    pub signature: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Expired,
    BadSignature,
    UnsupportedAlgorithm,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Expired => "expired",
            Verdict::BadSignature => "bad_signature",
            Verdict::UnsupportedAlgorithm => "unsupported_algorithm",
        }
    }
}

/// Signs `(root, schema_id, subject_id, validity)` with the notary's key.
pub fn issue(
    root: Digest,
    schema_id: Digest,
    subject_id: [u8; 32],
    validity: Validity,
    signing_key: &SigningKey,
) -> Result<Certificate> {
    let validity = Validity::new(validity.from, validity.to)?;
    let mut cert = Certificate {
        version: CERT_VERSION,
        root_hash: root,
        schema_id,
        subject_id,
        valid_from: validity.from,
        valid_to: validity.to,
        algorithm_id: ALG_ED25519,
        signature: Vec::new(),
    };
    let digest = sha256(&cert.preimage());
    cert.signature = signing_key.sign(digest.as_bytes()).to_bytes().to_vec();
    Ok(cert)
}

/// Buyer-side check. Algorithm support is checked first, then the
/// signature, then the validity window.
pub fn check(cert: &Certificate, notary: &VerifyingKey, now: u64) -> Verdict {
    if cert.algorithm_id != ALG_ED25519 {
        return Verdict::UnsupportedAlgorithm;
    }
    let Ok(sig) = Signature::from_slice(&cert.signature) else {
        return Verdict::BadSignature;
    };
    let digest = sha256(&cert.preimage());
    if notary.verify(digest.as_bytes(), &sig).is_err() {
        return Verdict::BadSignature;
    }
    if !(cert.valid_from <= now && now <= cert.valid_to) {
        return Verdict::Expired;
    }
    Verdict::Valid
}

impl Certificate {
    pub fn preimage(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(CERT_MAGIC);
        w.u8(self.version);
        w.bytes(self.root_hash.as_bytes());
        w.bytes(self.schema_id.as_bytes());
        w.bytes(&self.subject_id);
        w.u64(self.valid_from);
        w.u64(self.valid_to);
        w.u8(self.algorithm_id);
        w.finish()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = self.preimage();
        out.extend_from_slice(&(self.signature.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.signature);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(CERT_MAGIC)?;
        let version = r.u8()?;
        let root_hash = r.digest()?;
        let schema_id = r.digest()?;
        let subject_id = r.array32()?;
        let valid_from = r.u64()?;
        let valid_to = r.u64()?;
        let algorithm_id = r.u8()?;
        let sig_len = r.u16()? as usize;
        let signature = r.take(sig_len)?.to_vec();
        r.finish()?;
        Ok(Certificate {
            version,
            root_hash,
            schema_id,
            subject_id,
            valid_from,
            valid_to,
            algorithm_id,
            signature,
        })
    }
}

pub fn signing_key_from_hex(s: &str) -> Result<SigningKey> {
    let bytes = hex::decode(s.trim()).map_err(|e| Error::Decode(format!("notary key hex: {e}")))?;
    let arr: [u8; 32] = bytes
        .as_slice()
        .try_into()
        .map_err(|_| Error::Decode("notary key must be 32 bytes".into()))?;
    Ok(SigningKey::from_bytes(&arr))
}

pub fn verifying_key_from_hex(s: &str) -> Result<VerifyingKey> {
    let bytes = hex::decode(s.trim()).map_err(|e| Error::Decode(format!("public key hex: {e}")))?;
    let arr: [u8; 32] = bytes
        .as_slice()
        .try_into()
        .map_err(|_| Error::Decode("public key must be 32 bytes".into()))?;
    VerifyingKey::from_bytes(&arr).map_err(|e| Error::Decode(format!("public key: {e}")))
}
