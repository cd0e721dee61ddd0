//! Single-path openings and their verification.
//!
//! An opening for input `X` reveals, for every level `i`, the key on `X`'s
//! side (`L_i` when `X_i = 0`, `R_i` otherwise) and the Aux value of the node
//! the path passes through, plus the leaf payload. The verifier rebuilds the
//! path hashes from the leaf upwards and compares against the root.

use crate::codec::{Reader, Writer};
use crate::commitment::{CommitmentTree, SeedKeys};
use crate::error::{Error, Result};
use crate::hash::{Digest, Hasher, Sha256Hasher};
use crate::obdd::{check_payload, InputWord};

pub const WITNESS_MAGIC: &[u8; 4] = b"WTW1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    revealed_keys: Vec<[u8; 32]>,
    aux_values: Vec<Digest>,
    payload: Vec<u8>,
}

/// Why a witness did not verify.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    /// The rebuilt root differs from the commitment. Deliberately carries no
    /// detail about where the path diverged.
    #[error("witness rejected")]
    Rejected,
    #[error(transparent)]
    Structural(#[from] Error),
}

impl Witness {
    pub fn new(
        revealed_keys: Vec<[u8; 32]>,
        aux_values: Vec<Digest>,
        payload: Vec<u8>,
    ) -> Result<Self> {
        if revealed_keys.len() != aux_values.len() {
            return Err(Error::Malformed("key and aux counts differ".into()));
        }
        if revealed_keys.len() > u16::MAX as usize {
            return Err(Error::TooManyLevels(revealed_keys.len()));
        }
        check_payload(&payload)?;
        Ok(Self {
            revealed_keys,
            aux_values,
            payload,
        })
    }

    pub fn n(&self) -> usize {
        self.revealed_keys.len()
    }

    pub fn revealed_keys(&self) -> &[[u8; 32]] {
        &self.revealed_keys
    }

    pub fn aux_values(&self) -> &[Digest] {
        &self.aux_values
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Encoded length: `8 + 64 n + |payload|`.
    pub fn encoded_len(&self) -> usize {
        8 + 64 * self.n() + self.payload.len()
    }

    /// `WTW1 || n (u16) || keys || aux values || payload len (u16) || payload`.
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(WITNESS_MAGIC);
        w.u16(self.n() as u16);
        for k in &self.revealed_keys {
            w.bytes(k);
        }
        for a in &self.aux_values {
            w.bytes(a.as_bytes());
        }
        w.u16(self.payload.len() as u16);
        w.bytes(&self.payload);
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(WITNESS_MAGIC)?;
        let n = r.u16()? as usize;
        let revealed_keys = (0..n).map(|_| r.array32()).collect::<Result<Vec<_>>>()?;
        let aux_values = (0..n).map(|_| r.digest()).collect::<Result<Vec<_>>>()?;
        let len = r.u16()? as usize;
        if len != r.remaining() {
            return Err(Error::Decode(format!(
                "payload length {len} does not match {} remaining bytes",
                r.remaining()
            )));
        }
        let payload = r.take(len)?.to_vec();
        Witness::new(revealed_keys, aux_values, payload)
    }
}

/// Opens `tree` at `x`.
pub fn open(tree: &CommitmentTree, keys: &SeedKeys, x: &InputWord) -> Result<Witness> {
    let q = tree.diagram();
    if keys.n() != q.n() {
        return Err(Error::LevelMismatch {
            expected: q.n(),
            actual: keys.n(),
        });
    }
    let path = q.path(x)?;
    let n = q.n();
    let revealed_keys = (0..n).map(|i| *keys.side(i, x.bit(i))).collect();
    let aux_values = (0..n).map(|i| *tree.node_aux(i, path[i])).collect();
    let payload = q.leaves()[path[n] as usize].clone();
    Witness::new(revealed_keys, aux_values, payload)
}

/// Verifies `w` for input `x` against `root`, returning the committed payload.
pub fn verify(root: &Digest, x: &InputWord, w: &Witness) -> Result<Vec<u8>, VerifyError> {
    verify_with(&Sha256Hasher, root, x, w)
}

/// As [`verify`]; performs exactly `2n + 1` hash invocations on well-formed
/// input.
pub fn verify_with<H: Hasher>(
    hasher: &H,
    root: &Digest,
    x: &InputWord,
    w: &Witness,
) -> Result<Vec<u8>, VerifyError> {
    let n = w.n();
    if x.len() != n {
        return Err(Error::InputLength {
            expected: n,
            actual: x.len(),
        }
        .into());
    }
    let mut h = hasher.hash(&[&w.payload]);
    for i in (0..n).rev() {
        let half = hasher.hash(&[h.as_bytes(), &w.revealed_keys[i]]);
        let sibling = half.xor(&w.aux_values[i]);
        h = if x.bit(i) {
            hasher.hash(&[sibling.as_bytes(), half.as_bytes()])
        } else {
            hasher.hash(&[half.as_bytes(), sibling.as_bytes()])
        };
    }
    if h == *root {
        Ok(w.payload.clone())
    } else {
        Err(VerifyError::Rejected)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commitment::{commit, derive_keys, Seed};
    use crate::obdd::{Qrobdd, TRUE};

    #[test]
    fn zero_level_witness() {
        let q = Qrobdd::constant(0, TRUE).unwrap();
        let keys = derive_keys(&Seed::new([1; 32]), 0);
        let tree = commit(&q, &keys).unwrap();
        let w = open(&tree, &keys, &InputWord::empty()).unwrap();
        assert_eq!(w.n(), 0);
        assert_eq!(w.payload(), TRUE);
        assert_eq!(
            verify(&tree.root_hash(), &InputWord::empty(), &w).unwrap(),
            TRUE
        );
        assert_eq!(w.encode().len(), 9);
    }

    #[test]
    fn encoded_size_for_eight_levels() {
        let w = Witness::new(vec![[1; 32]; 8], vec![Digest([2; 32]); 8], vec![1]).unwrap();
        assert_eq!(w.encode().len(), 521);
        assert_eq!(w.encoded_len(), 521);
        assert_eq!(Witness::decode(&w.encode()).unwrap(), w);
    }

    #[test]
    fn decode_errors() {
        let w = Witness::new(vec![[1; 32]; 2], vec![Digest([2; 32]); 2], vec![1, 2]).unwrap();
        let bytes = w.encode();
        let mut magic = bytes.clone();
        magic[3] = b'2';
        assert!(Witness::decode(&magic).is_err());
        assert!(Witness::decode(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(Witness::decode(&long).is_err());
        // Declared payload length of zero.
        let mut empty = bytes[..bytes.len() - 4].to_vec();
        empty.extend_from_slice(&[0, 0]);
        assert!(Witness::decode(&empty).is_err());
    }

    #[test]
    fn wrong_input_length_is_structural() {
        let w = Witness::new(vec![[1; 32]; 2], vec![Digest([2; 32]); 2], vec![1]).unwrap();
        let x = InputWord::from_u64(0, 3).unwrap();
        assert!(matches!(
            verify(&Digest([0; 32]), &x, &w),
            Err(VerifyError::Structural(_))
        ));
    }
}
