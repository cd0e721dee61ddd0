//! Big-endian byte helpers and the `WTD1` diagram file format.
//!
//! `WTD1` layout: magic `WTD1`, n (u16), then for each level a u32 node count
//! followed by `(lo: u32, hi: u32)` pairs, a u16 leaf count, the leaves as
//! `(len: u8, payload)`, and finally the root index (u32).

use crate::error::{Error, Result};
use crate::hash::Digest;
use crate::obdd::{Node, Qrobdd};

pub const DIAGRAM_MAGIC: &[u8; 4] = b"WTD1";

#[derive(Default)]
pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u16(&mut self, v: u16) {
        self.bytes(&v.to_be_bytes());
    }

    pub fn u32(&mut self, v: u32) {
        self.bytes(&v.to_be_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.bytes(&v.to_be_bytes());
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Decode("truncated input".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn magic(&mut self, magic: &[u8]) -> Result<()> {
        if self.take(magic.len())? != magic {
            return Err(Error::Decode("bad magic".into()));
        }
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn array32(&mut self) -> Result<[u8; 32]> {
        Ok(self.take(32)?.try_into().unwrap())
    }

    pub fn digest(&mut self) -> Result<Digest> {
        Ok(Digest(self.array32()?))
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn finish(self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::Decode(format!(
                "{} trailing bytes",
                self.remaining()
            )));
        }
        Ok(())
    }
}

impl Qrobdd {
    pub fn encode(&self) -> Result<Vec<u8>> {
        if self.leaves().len() > u16::MAX as usize {
            return Err(Error::Malformed("too many leaves for WTD1".into()));
        }
        let mut w = Writer::new();
        w.bytes(DIAGRAM_MAGIC);
        w.u16(self.n() as u16);
        for level in self.levels() {
            w.u32(level.len() as u32);
            for node in level {
                w.u32(node.lo);
                w.u32(node.hi);
            }
        }
        w.u16(self.leaves().len() as u16);
        for p in self.leaves() {
            w.u8(p.len() as u8);
            w.bytes(p);
        }
        w.u32(self.root());
        Ok(w.finish())
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(DIAGRAM_MAGIC)?;
        let n = r.u16()? as usize;
        let mut levels = Vec::with_capacity(n.min(4096));
        for _ in 0..n {
            let count = r.u32()? as usize;
            // Each node is 8 bytes; refuse counts the input cannot hold.
            if count > r.remaining() / 8 {
                return Err(Error::Decode("truncated input".into()));
            }
            let mut level = Vec::with_capacity(count);
            for _ in 0..count {
                level.push(Node::new(r.u32()?, r.u32()?));
            }
            levels.push(level);
        }
        let leaf_count = r.u16()? as usize;
        let mut leaves = Vec::with_capacity(leaf_count);
        for _ in 0..leaf_count {
            let len = r.u8()? as usize;
            leaves.push(r.take(len)?.to_vec());
        }
        let root = r.u32()?;
        r.finish()?;
        Qrobdd::from_parts(levels, leaves, root)
    }
}
