//! Per-level blinding keys and the commitment tree over a diagram.
//!
//! For a leaf, `H = SHA-256(payload)`. For an internal node at level `i` with
//! child hashes `c_L`, `c_R`:
//!
//! ```text
//! half_L = SHA-256(c_L || L_i)
//! half_R = SHA-256(c_R || R_i)
//! H      = SHA-256(half_L || half_R)
//! Aux    = half_L XOR half_R
//! ```
//!
//! Hashes are computed once per DAG node, so the cost is linear in the reduced
//! diagram while the root equals that of the fully expanded tree.

use std::fmt;

use hmac::{Hmac, Mac};
use rand::RngCore;
use sha2::Sha256;
use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::hash::{Digest, Hasher, Sha256Hasher};
use crate::obdd::{check_payload, Qrobdd};

const LEFT_TAG: &[u8; 3] = b"WTL";
const RIGHT_TAG: &[u8; 3] = b"WTR";

pub const TREE_MAGIC: &[u8; 9] = b"WTC-TREE1";

/// A 32-byte secret from which all level keys are derived.
#[derive(Clone, PartialEq, Eq, Zeroize, ZeroizeOnDrop)]
pub struct Seed([u8; 32]);

impl Seed {
    pub fn new(bytes: [u8; 32]) -> Self {
        Seed(bytes)
    }

    /// Fresh seed from the operating system RNG.
    pub fn generate() -> Self {
        let mut b = [0u8; 32];
        rand::rngs::OsRng.fill_bytes(&mut b);
        Seed(b)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let mut bytes =
            hex::decode(s.trim()).map_err(|e| Error::Decode(format!("seed hex: {e}")))?;
        let arr: Result<[u8; 32]> = bytes
            .as_slice()
            .try_into()
            .map_err(|_| Error::Decode(format!("seed must be 32 bytes, got {}", bytes.len())));
        bytes.zeroize();
        Ok(Seed(arr?))
    }

    pub fn expose(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Seed(<redacted>)")
    }
}

/// One blinding key.
#[derive(Clone, Copy, PartialEq, Eq, Zeroize)]
pub struct LevelKey(pub [u8; 32]);

impl fmt::Debug for LevelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LevelKey(<redacted>)")
    }
}

/// The `n` key pairs `(L_i, R_i)` derived from one seed.
#[derive(Clone, PartialEq, Eq, Zeroize, ZeroizeOnDrop)]
pub struct SeedKeys {
    pairs: Vec<(LevelKey, LevelKey)>,
}

impl fmt::Debug for SeedKeys {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SeedKeys {{ n: {}, .. }}", self.pairs.len())
    }
}

fn tagged_key(seed: &Seed, tag: &[u8; 3], level: u32) -> LevelKey {
    let mut mac = <Hmac<Sha256> as Mac>::new_from_slice(seed.expose())
        .expect("HMAC accepts keys of any length");
    mac.update(tag);
    mac.update(&level.to_be_bytes());
    LevelKey(mac.finalize().into_bytes().into())
}

/// `L_i = HMAC-SHA-256(seed, "WTL" || i_be32)`, `R_i = HMAC-SHA-256(seed, "WTR" || i_be32)`.
pub fn derive_keys(seed: &Seed, n: usize) -> SeedKeys {
    let pairs = (0..n as u32)
        .map(|i| {
            let l = tagged_key(seed, LEFT_TAG, i);
            let r = tagged_key(seed, RIGHT_TAG, i);
            assert!(l != r, "HMAC produced equal keys for level {i}");
            (l, r)
        })
        .collect();
    SeedKeys { pairs }
}

impl SeedKeys {
    /// Builds key material directly, bypassing derivation. Meant for tests
    /// and for full-function disclosure, where the pairs themselves are shared.
    pub fn from_pairs(pairs: Vec<([u8; 32], [u8; 32])>) -> Self {
        SeedKeys {
            pairs: pairs
                .into_iter()
                .map(|(l, r)| (LevelKey(l), LevelKey(r)))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn left(&self, i: usize) -> &[u8; 32] {
        &self.pairs[i].0 .0
    }

    pub fn right(&self, i: usize) -> &[u8; 32] {
        &self.pairs[i].1 .0
    }

    /// `R_i` when `bit` is set, `L_i` otherwise.
    pub fn side(&self, i: usize, bit: bool) -> &[u8; 32] {
        if bit {
            self.right(i)
        } else {
            self.left(i)
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&[u8; 32], &[u8; 32])> {
        self.pairs.iter().map(|(l, r)| (&l.0, &r.0))
    }
}

pub fn hash_leaf<H: Hasher>(hasher: &H, payload: &[u8]) -> Digest {
    hasher.hash(&[payload])
}

/// Hash and Aux of an internal node.
pub fn hash_internal(c_l: &Digest, c_r: &Digest, l: &[u8; 32], r: &[u8; 32]) -> (Digest, Digest) {
    hash_internal_with(&Sha256Hasher, c_l, c_r, l, r)
}

pub fn hash_internal_with<H: Hasher>(
    hasher: &H,
    c_l: &Digest,
    c_r: &Digest,
    l: &[u8; 32],
    r: &[u8; 32],
) -> (Digest, Digest) {
    let half_l = hasher.hash(&[c_l.as_bytes(), l]);
    let half_r = hasher.hash(&[c_r.as_bytes(), r]);
    let node = hasher.hash(&[half_l.as_bytes(), half_r.as_bytes()]);
    (node, half_l.xor(&half_r))
}

/// Hashes and Aux values for every node of a diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitmentTree {
    diagram: Qrobdd,
    node_hash: Vec<Vec<Digest>>,
    node_aux: Vec<Vec<Digest>>,
    leaf_hash: Vec<Digest>,
}

pub fn commit(q: &Qrobdd, keys: &SeedKeys) -> Result<CommitmentTree> {
    commit_with(&Sha256Hasher, q, keys)
}

/// Bottom-up commitment. Performs exactly `leaves + 3 * internal_nodes` hash
/// invocations.
pub fn commit_with<H: Hasher>(hasher: &H, q: &Qrobdd, keys: &SeedKeys) -> Result<CommitmentTree> {
    let n = q.n();
    if keys.n() != n {
        return Err(Error::LevelMismatch {
            expected: n,
            actual: keys.n(),
        });
    }
    for p in q.leaves() {
        check_payload(p)?;
    }
    let leaf_hash: Vec<Digest> = q.leaves().iter().map(|p| hash_leaf(hasher, p)).collect();
    let mut node_hash = vec![Vec::new(); n];
    let mut node_aux = vec![Vec::new(); n];
    for i in (0..n).rev() {
        let below: &[Digest] = if i + 1 < n {
            &node_hash[i + 1]
        } else {
            &leaf_hash
        };
        let (l, r) = (keys.left(i), keys.right(i));
        let (hashes, auxes): (Vec<_>, Vec<_>) = q
            .level(i)
            .iter()
            .map(|node| {
                hash_internal_with(
                    hasher,
                    &below[node.lo as usize],
                    &below[node.hi as usize],
                    l,
                    r,
                )
            })
            .unzip();
        node_hash[i] = hashes;
        node_aux[i] = auxes;
    }
    Ok(CommitmentTree {
        diagram: q.clone(),
        node_hash,
        node_aux,
        leaf_hash,
    })
}

/// Checks a root against a fully disclosed function and key set.
pub fn verify_full(root: &Digest, q: &Qrobdd, keys: &SeedKeys) -> bool {
    match commit(q, keys) {
        Ok(tree) => tree.root_hash() == *root,
        Err(_) => false,
    }
}

impl CommitmentTree {
    pub fn diagram(&self) -> &Qrobdd {
        &self.diagram
    }

    pub fn root_hash(&self) -> Digest {
        let root = self.diagram.root() as usize;
        if self.diagram.n() == 0 {
            self.leaf_hash[root]
        } else {
            self.node_hash[0][root]
        }
    }

    pub fn node_hash(&self, level: usize, index: u32) -> &Digest {
        &self.node_hash[level][index as usize]
    }

    pub fn node_aux(&self, level: usize, index: u32) -> &Digest {
        &self.node_aux[level][index as usize]
    }

    pub fn leaf_hash(&self, index: u32) -> &Digest {
        &self.leaf_hash[index as usize]
    }

    /// `WTC-TREE1` encoding: magic, n (u16), root hash, then for each level a
    /// u32 node count followed by `(hash, aux)` pairs in node-table order,
    /// then a u16 leaf count and the leaf hashes in leaf-table order.
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(TREE_MAGIC);
        w.u16(self.diagram.n() as u16);
        w.bytes(self.root_hash().as_bytes());
        for (hashes, auxes) in self.node_hash.iter().zip(&self.node_aux) {
            w.u32(hashes.len() as u32);
            for (h, a) in hashes.iter().zip(auxes) {
                w.bytes(h.as_bytes());
                w.bytes(a.as_bytes());
            }
        }
        w.u16(self.leaf_hash.len() as u16);
        for h in &self.leaf_hash {
            w.bytes(h.as_bytes());
        }
        w.finish()
    }

    /// Decodes a `WTC-TREE1` file against the diagram it was computed over.
    /// Table shapes and the stored root must agree with `diagram`.
    pub fn decode(bytes: &[u8], diagram: Qrobdd) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(TREE_MAGIC)?;
        let n = r.u16()? as usize;
        if n != diagram.n() {
            return Err(Error::LevelMismatch {
                expected: diagram.n(),
                actual: n,
            });
        }
        let root = r.digest()?;
        let mut node_hash = Vec::with_capacity(n);
        let mut node_aux = Vec::with_capacity(n);
        for i in 0..n {
            let count = r.u32()? as usize;
            if count != diagram.level(i).len() {
                return Err(Error::Decode(format!(
                    "level {i} node count does not match diagram"
                )));
            }
            let mut hashes = Vec::with_capacity(count);
            let mut auxes = Vec::with_capacity(count);
            for _ in 0..count {
                hashes.push(r.digest()?);
                auxes.push(r.digest()?);
            }
            node_hash.push(hashes);
            node_aux.push(auxes);
        }
        let leaf_count = r.u16()? as usize;
        if leaf_count != diagram.leaves().len() {
            return Err(Error::Decode("leaf count does not match diagram".into()));
        }
        let leaf_hash = (0..leaf_count)
            .map(|_| r.digest())
            .collect::<Result<Vec<_>>>()?;
        r.finish()?;
        let tree = CommitmentTree {
            diagram,
            node_hash,
            node_aux,
            leaf_hash,
        };
        if tree.root_hash() != root {
            return Err(Error::Decode(
                "stored root does not match root node hash".into(),
            ));
        }
        Ok(tree)
    }
}
