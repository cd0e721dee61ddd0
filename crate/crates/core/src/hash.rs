//! The hash primitive behind commitments, plus an instrumented wrapper for
//! counting invocations.

use std::cell::Cell;
use std::fmt;

use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};

/// A 32-byte hash output.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const LEN: usize = 32;

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn xor(&self, other: &Digest) -> Digest {
        let mut out = [0u8; 32];
        for (o, (a, b)) in out.iter_mut().zip(self.0.iter().zip(other.0.iter())) {
            *o = a ^ b;
        }
        Digest(out)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::Decode(format!("hex: {e}")))?;
        Self::from_slice(&bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| Error::Decode(format!("expected 32 bytes, got {}", bytes.len())))?;
        Ok(Digest(arr))
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl From<[u8; 32]> for Digest {
    fn from(b: [u8; 32]) -> Self {
        Digest(b)
    }
}

/// Hashes the concatenation of `parts`.
pub trait Hasher {
    fn hash(&self, parts: &[&[u8]]) -> Digest;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sha256Hasher;

impl Hasher for Sha256Hasher {
    fn hash(&self, parts: &[&[u8]]) -> Digest {
        let mut h = Sha256::new();
        for p in parts {
            h.update(p);
        }
        Digest(h.finalize().into())
    }
}

/// Wraps a hasher and counts calls.
#[derive(Debug, Default)]
pub struct CountingHasher<H = Sha256Hasher> {
    inner: H,
    calls: Cell<u64>,
}

impl<H: Hasher> CountingHasher<H> {
    pub fn new(inner: H) -> Self {
        Self {
            inner,
            calls: Cell::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.get()
    }

    pub fn reset(&self) {
        self.calls.set(0);
    }
}

impl<H: Hasher> Hasher for CountingHasher<H> {
    fn hash(&self, parts: &[&[u8]]) -> Digest {
        self.calls.set(self.calls.get() + 1);
        self.inner.hash(parts)
    }
}

pub fn sha256(data: &[u8]) -> Digest {
    Sha256Hasher.hash(&[data])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        // FIPS 180-2 "abc".
        assert_eq!(
            sha256(b"abc").to_hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn parts_are_concatenated() {
        assert_eq!(Sha256Hasher.hash(&[b"a", b"bc"]), sha256(b"abc"));
    }

    #[test]
    fn counting() {
        let h = CountingHasher::new(Sha256Hasher);
        h.hash(&[b"x"]);
        h.hash(&[b"y"]);
        assert_eq!(h.calls(), 2);
        h.reset();
        assert_eq!(h.calls(), 0);
    }

    #[test]
    fn hex_roundtrip_and_length_check() {
        let d = sha256(b"abc");
        assert_eq!(Digest::from_hex(&d.to_hex()).unwrap(), d);
        assert!(Digest::from_hex("abcd").is_err());
    }
}
