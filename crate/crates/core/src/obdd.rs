//! Quasi-reduced ordered binary decision diagrams.
//!
//! Every root-to-leaf path visits every level exactly once: an edge out of
//! level `i` always lands on level `i + 1`, and edges out of the last level
//! land on the leaf table. Redundant tests (`lo == hi`) are kept, because the
//! commitment layer consumes one key pair per level on every path.
//!
//! Level `i` consumes bit `i` of the input, MSB-first (see [`InputWord`]).

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Upper bound on the number of levels a diagram may have.
pub const MAX_LEVELS: usize = 4096;

/// Leaf payloads are 1..=63 bytes long. Internal hash preimages are always
/// exactly 64 bytes, so the length alone keeps the two apart.
pub const MAX_PAYLOAD_LEN: usize = 63;

/// Largest level count accepted by [`Qrobdd::truth_table`] and the
/// full-tree constructors.
pub const MAX_TABLE_LEVELS: usize = 20;

pub const FALSE: &[u8] = &[0x00];
pub const TRUE: &[u8] = &[0x01];

pub(crate) fn check_payload(payload: &[u8]) -> Result<()> {
    if payload.is_empty() || payload.len() > MAX_PAYLOAD_LEN {
        return Err(Error::PayloadLength(payload.len()));
    }
    Ok(())
}

/// An internal node. Children index into the next level's table, or into the
/// leaf table when the node sits on the last level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub lo: u32,
    pub hi: u32,
}

impl Node {
    pub fn new(lo: u32, hi: u32) -> Self {
        Self { lo, hi }
    }

    #[inline]
    pub fn child(&self, bit: bool) -> u32 {
        if bit {
            self.hi
        } else {
            self.lo
        }
    }
}

/// Binary boolean connectives accepted by [`Qrobdd::apply`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
    Xor,
}

impl BoolOp {
    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            BoolOp::And => a && b,
            BoolOp::Or => a || b,
            BoolOp::Xor => a ^ b,
        }
    }
}

/// A fixed-length input, packed MSB-first: bit `i` lives in byte `i / 8` at
/// position `7 - i % 8`. Trailing pad bits are always zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InputWord {
    bytes: Vec<u8>,
    len: usize,
}

impl InputWord {
    /// Wraps a packed byte string holding `len` meaningful bits.
    pub fn from_bytes(bytes: Vec<u8>, len: usize) -> Result<Self> {
        let expected = len.div_ceil(8);
        if bytes.len() != expected {
            return Err(Error::InputLength {
                expected: len,
                actual: bytes.len() * 8,
            });
        }
        if !len.is_multiple_of(8) {
            let pad_mask = 0xffu8 >> (len % 8);
            if bytes[expected - 1] & pad_mask != 0 {
                return Err(Error::NonZeroPadding);
            }
        }
        Ok(Self { bytes, len })
    }

    /// The low `len` bits of `value`, most significant first. `len <= 64`.
    pub fn from_u64(value: u64, len: usize) -> Result<Self> {
        if len > 64 || (len < 64 && value >> len != 0) {
            return Err(Error::ValueTooWide { value, width: len });
        }
        Ok(Self::from_bits(
            (0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1),
        ))
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut w = InputWord::empty();
        for b in bits {
            w.push(b);
        }
        w
    }

    pub fn empty() -> Self {
        Self {
            bytes: Vec::new(),
            len: 0,
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, MSB-first.
    pub fn push_uint(&mut self, value: u64, width: usize) -> Result<()> {
        if width > 64 || (width < 64 && value >> width != 0) {
            return Err(Error::ValueTooWide { value, width });
        }
        for j in (0..width).rev() {
            self.push((value >> j) & 1 == 1);
        }
        Ok(())
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for {}-bit input",
            self.len
        );
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Flips bit `i` in place.
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.bytes[i / 8] ^= 0x80 >> (i % 8);
    }
}

/// A quasi-reduced ordered binary decision diagram.
///
/// Values are immutable once built; all constructors validate the structural
/// invariants (edge ranges, reachability, leaf distinctness, payload length).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qrobdd {
    levels: Vec<Vec<Node>>,
    leaves: Vec<Vec<u8>>,
    root: u32,
}

impl Qrobdd {
    /// Assembles a diagram from raw tables, checking every invariant.
    pub fn from_parts(levels: Vec<Vec<Node>>, leaves: Vec<Vec<u8>>, root: u32) -> Result<Self> {
        if levels.len() > MAX_LEVELS {
            return Err(Error::TooManyLevels(levels.len()));
        }
        if leaves.is_empty() {
            return Err(Error::Malformed("diagram has no leaves".into()));
        }
        for p in &leaves {
            check_payload(p)?;
        }
        {
            let mut seen = std::collections::HashSet::with_capacity(leaves.len());
            if !leaves.iter().all(|p| seen.insert(p.as_slice())) {
                return Err(Error::Malformed("duplicate leaf payload".into()));
            }
        }

        let n = levels.len();
        let width_below = |i: usize| {
            if i + 1 < n {
                levels[i + 1].len()
            } else {
                leaves.len()
            }
        };
        let top_width = if n == 0 {
            leaves.len()
        } else {
            levels[0].len()
        };
        if root as usize >= top_width {
            return Err(Error::Malformed(format!("root index {root} out of range")));
        }
        for (i, level) in levels.iter().enumerate() {
            let bound = width_below(i);
            for (j, node) in level.iter().enumerate() {
                if node.lo as usize >= bound || node.hi as usize >= bound {
                    return Err(Error::Malformed(format!(
                        "node {j} at level {i} points past the next level"
                    )));
                }
            }
        }

        // Reachability, top-down.
        let mut reached = vec![false; top_width];
        reached[root as usize] = true;
        for (i, level) in levels.iter().enumerate() {
            if reached.len() != level.len() || reached.iter().any(|r| !r) {
                return Err(Error::Malformed(format!("unreachable node at level {i}")));
            }
            let mut next = vec![false; width_below(i)];
            for node in level {
                next[node.lo as usize] = true;
                next[node.hi as usize] = true;
            }
            reached = next;
        }
        if reached.iter().any(|r| !r) {
            return Err(Error::Malformed("unreachable leaf".into()));
        }

        Ok(Self {
            levels,
            leaves,
            root,
        })
    }

    /// The constant function over `n` levels.
    pub fn constant(n: usize, payload: &[u8]) -> Result<Self> {
        build_layered(n, (), |_, _, _| (), |_| payload.to_vec())
    }

    /// The complete, unmerged decision tree for a truth table: level `i` holds
    /// `2^i` nodes, one per input prefix. Leaves are still shared by payload.
    pub fn full_tree(n: usize, table: &[Vec<u8>]) -> Result<Self> {
        if n > MAX_TABLE_LEVELS {
            return Err(Error::TableTooLarge(n));
        }
        if table.len() != 1usize << n {
            return Err(Error::Malformed(format!(
                "truth table has {} entries, expected {}",
                table.len(),
                1usize << n
            )));
        }
        let mut leaves: Vec<Vec<u8>> = Vec::new();
        let mut leaf_index: HashMap<&[u8], u32> = HashMap::new();
        let mut leaf_of = Vec::with_capacity(table.len());
        for p in table {
            check_payload(p)?;
            let idx = *leaf_index.entry(p.as_slice()).or_insert_with(|| {
                leaves.push(p.clone());
                (leaves.len() - 1) as u32
            });
            leaf_of.push(idx);
        }
        if n == 0 {
            return Self::from_parts(Vec::new(), leaves, 0);
        }
        let mut levels = Vec::with_capacity(n);
        for i in 0..n {
            let width = 1u32 << i;
            let level = (0..width)
                .map(|j| {
                    if i + 1 < n {
                        Node::new(2 * j, 2 * j + 1)
                    } else {
                        Node::new(leaf_of[2 * j as usize], leaf_of[2 * j as usize + 1])
                    }
                })
                .collect();
            levels.push(level);
        }
        Self::from_parts(levels, leaves, 0)
    }

    /// This function's complete decision tree; see [`Qrobdd::full_tree`].
    pub fn expand(&self) -> Result<Self> {
        Self::full_tree(self.n(), &self.truth_table()?)
    }

    /// Number of levels, i.e. the input bit-length.
    pub fn n(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<Node>] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> &[Node] {
        &self.levels[i]
    }

    pub fn leaves(&self) -> &[Vec<u8>] {
        &self.leaves
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Total internal nodes across all levels.
    pub fn internal_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_boolean(&self) -> bool {
        self.leaves.iter().all(|p| p == FALSE || p == TRUE)
    }

    /// Node indices visited by `x`, one per level, followed by the leaf index.
    pub fn path(&self, x: &InputWord) -> Result<Vec<u32>> {
        self.check_input(x)?;
        let mut path = Vec::with_capacity(self.n() + 1);
        let mut cur = self.root;
        path.push(cur);
        for (i, level) in self.levels.iter().enumerate() {
            cur = level[cur as usize].child(x.bit(i));
            path.push(cur);
        }
        Ok(path)
    }

    pub fn evaluate(&self, x: &InputWord) -> Result<&[u8]> {
        self.check_input(x)?;
        let mut cur = self.root;
        for (i, level) in self.levels.iter().enumerate() {
            cur = level[cur as usize].child(x.bit(i));
        }
        Ok(&self.leaves[cur as usize])
    }

    /// Evaluation on the `n`-bit MSB-first encoding of `k`. Requires `n <= 64`.
    pub fn evaluate_u64(&self, k: u64) -> Result<&[u8]> {
        self.evaluate(&InputWord::from_u64(k, self.n())?)
    }

    /// Payloads for inputs `0 .. 2^n`, in order.
    pub fn truth_table(&self) -> Result<Vec<Vec<u8>>> {
        let n = self.n();
        if n > MAX_TABLE_LEVELS {
            return Err(Error::TableTooLarge(n));
        }
        // Breadth-first expansion keeps this linear in the table size.
        let mut frontier = vec![self.root];
        for level in &self.levels {
            frontier = frontier
                .iter()
                .flat_map(|&j| {
                    let node = level[j as usize];
                    [node.lo, node.hi]
                })
                .collect();
        }
        Ok(frontier
            .into_iter()
            .map(|l| self.leaves[l as usize].clone())
            .collect())
    }

    /// Merges every pair of same-level nodes that compute the same
    /// subfunction and drops anything unreachable. The result is canonical:
    /// nodes are numbered in breadth-first order from the root (lo before hi),
    /// so two reduced diagrams of the same function are equal.
    pub fn reduce(&self) -> Qrobdd {
        let n = self.n();

        // Bottom-up class assignment. `class_below[j]` is the class of entry j
        // in the table underneath the level being processed.
        let mut class_below: Vec<u32> = (0..self.leaves.len() as u32).collect();
        let mut classes: Vec<Vec<Node>> = vec![Vec::new(); n];
        let mut class_maps: Vec<Vec<u32>> = vec![Vec::new(); n];
        for i in (0..n).rev() {
            let mut unique: HashMap<Node, u32> = HashMap::new();
            let mut map = Vec::with_capacity(self.levels[i].len());
            for node in &self.levels[i] {
                let key = Node::new(class_below[node.lo as usize], class_below[node.hi as usize]);
                let next_id = unique.len() as u32;
                let id = *unique.entry(key).or_insert_with(|| {
                    classes[i].push(key);
                    next_id
                });
                map.push(id);
            }
            class_maps[i] = map.clone();
            class_below = map;
        }

        // Top-down renumbering in breadth-first order.
        let root_class = if n == 0 {
            self.root
        } else {
            class_maps[0][self.root as usize]
        };
        let mut frontier = vec![root_class];
        let mut levels = Vec::with_capacity(n);
        for level_classes in &classes {
            let mut renumber: HashMap<u32, u32> = HashMap::new();
            let mut next_frontier = Vec::new();
            let mut level = Vec::with_capacity(frontier.len());
            for &c in &frontier {
                let node = level_classes[c as usize];
                let mut id_of = |child: u32| {
                    *renumber.entry(child).or_insert_with(|| {
                        next_frontier.push(child);
                        (next_frontier.len() - 1) as u32
                    })
                };
                let lo = id_of(node.lo);
                let hi = id_of(node.hi);
                level.push(Node::new(lo, hi));
            }
            levels.push(level);
            frontier = next_frontier;
        }
        let leaves = frontier
            .iter()
            .map(|&l| self.leaves[l as usize].clone())
            .collect();
        Qrobdd {
            levels,
            leaves,
            root: 0,
        }
    }

    /// Combines two boolean diagrams over the same inputs. The result is
    /// reduced.
    pub fn apply(&self, other: &Qrobdd, op: BoolOp) -> Result<Qrobdd> {
        if self.n() != other.n() {
            return Err(Error::LevelMismatch {
                expected: self.n(),
                actual: other.n(),
            });
        }
        if !self.is_boolean() || !other.is_boolean() {
            return Err(Error::NonBoolean);
        }
        let n = self.n();
        let q = build_layered(
            n,
            (self.root, other.root),
            |i, &(a, b), bit| {
                (
                    self.levels[i][a as usize].child(bit),
                    other.levels[i][b as usize].child(bit),
                )
            },
            |&(a, b)| {
                let x = self.leaves[a as usize] == TRUE;
                let y = other.leaves[b as usize] == TRUE;
                if op.eval(x, y) { TRUE } else { FALSE }.to_vec()
            },
        )?;
        Ok(q.reduce())
    }

    /// Swaps the 0x00 and 0x01 payloads. Structure is unchanged.
    pub fn negate(&self) -> Result<Qrobdd> {
        if !self.is_boolean() {
            return Err(Error::NonBoolean);
        }
        let leaves = self
            .leaves
            .iter()
            .map(|p| if p == TRUE { FALSE } else { TRUE }.to_vec())
            .collect();
        Ok(Qrobdd {
            levels: self.levels.clone(),
            leaves,
            root: self.root,
        })
    }

    fn check_input(&self, x: &InputWord) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::InputLength {
                expected: self.n(),
                actual: x.len(),
            });
        }
        Ok(())
    }
}

/// Forward layered construction.
///
/// Starting from `initial`, each level's states are expanded by `step(level,
/// state, bit)`; states that compare equal at the same level share one node.
/// After `n` levels each surviving state is mapped to its leaf payload by
/// `finalize`. Equality of states is the only merging performed here, so
/// callers should canonicalize states (or call [`Qrobdd::reduce`] afterwards).
pub fn build_layered<S, F, G>(n: usize, initial: S, mut step: F, mut finalize: G) -> Result<Qrobdd>
where
    S: Clone + Eq + Hash,
    F: FnMut(usize, &S, bool) -> S,
    G: FnMut(&S) -> Vec<u8>,
{
    if n > MAX_LEVELS {
        return Err(Error::TooManyLevels(n));
    }
    let mut states = vec![initial];
    let mut levels = Vec::with_capacity(n);
    for i in 0..n {
        let mut index: HashMap<S, u32> = HashMap::new();
        let mut next: Vec<S> = Vec::new();
        let mut level = Vec::with_capacity(states.len());
        for s in &states {
            let mut intern = |t: S| {
                *index.entry(t.clone()).or_insert_with(|| {
                    next.push(t);
                    (next.len() - 1) as u32
                })
            };
            let lo = intern(step(i, s, false));
            let hi = intern(step(i, s, true));
            level.push(Node::new(lo, hi));
        }
        levels.push(level);
        states = next;
    }

    // Distinct final states may finalize to the same payload; remap.
    let mut leaves: Vec<Vec<u8>> = Vec::new();
    let mut leaf_index: HashMap<Vec<u8>, u32> = HashMap::new();
    let mut remap = Vec::with_capacity(states.len());
    for s in &states {
        let payload = finalize(s);
        check_payload(&payload)?;
        let idx = *leaf_index.entry(payload.clone()).or_insert_with(|| {
            leaves.push(payload);
            (leaves.len() - 1) as u32
        });
        remap.push(idx);
    }
    if let Some(last) = levels.last_mut() {
        for node in last.iter_mut() {
            node.lo = remap[node.lo as usize];
            node.hi = remap[node.hi as usize];
        }
    }
    Qrobdd::from_parts(levels, leaves, 0)
}
