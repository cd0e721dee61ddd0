//! "Any requested identifier is in the seller's set" predicates.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::hash::sha256;
use crate::obdd::{build_layered, Qrobdd, FALSE, TRUE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum SlotState {
    Matched,
    /// Bits of the current slot read so far, while they still prefix a member.
    Live(u64),
    /// Current slot can no longer match.
    Dead,
}

/// `X` is `slots` identifiers of `bits` bits each; true iff any slot holds a
/// member of `attr_set`. The all-zero slot means "empty" and never matches.
pub fn compile_any_slot_in_set(
    attr_set: &BTreeSet<u64>,
    slots: usize,
    bits: usize,
) -> Result<Qrobdd> {
    if attr_set.is_empty() {
        return Err(Error::InvalidPredicate("identifier set is empty".into()));
    }
    if attr_set.contains(&0) {
        return Err(Error::InvalidPredicate(
            "0 is reserved for empty slots".into(),
        ));
    }
    if bits == 0 || bits > 64 {
        return Err(Error::InvalidPredicate(format!(
            "slot width {bits} outside 1..=64"
        )));
    }
    if let Some(&too_big) = attr_set.iter().find(|&&id| bits < 64 && id >> bits != 0) {
        return Err(Error::ValueTooWide {
            value: too_big,
            width: bits,
        });
    }

    let prefixes_member = |prefix: u64, len: usize| -> bool {
        let shift = (bits - len) as u32;
        let lo = (prefix as u128) << shift;
        let hi = ((prefix as u128 + 1) << shift) - 1;
        attr_set.range(lo as u64..=hi as u64).next().is_some()
    };

    let q = build_layered(
        slots * bits,
        SlotState::Live(0),
        |i, &s, bit| {
            let pos = i % bits;
            let next = match s {
                SlotState::Matched => return SlotState::Matched,
                SlotState::Dead => SlotState::Dead,
                SlotState::Live(p) => {
                    let p = (p << 1) | bit as u64;
                    if prefixes_member(p, pos + 1) {
                        SlotState::Live(p)
                    } else {
                        SlotState::Dead
                    }
                }
            };
            if pos + 1 == bits {
                match next {
                    SlotState::Live(id) if attr_set.contains(&id) => SlotState::Matched,
                    _ => SlotState::Live(0),
                }
            } else {
                next
            }
        },
        |&s| if s == SlotState::Matched { TRUE } else { FALSE }.to_vec(),
    )?;
    Ok(q.reduce())
}

/// Maps a domain name to a nonzero `bits`-bit identifier: the leading bits of
/// SHA-256 of the lowercased name. A zero result is bumped to 1.
pub fn site_id(domain: &str, bits: usize) -> u64 {
    assert!((1..=64).contains(&bits), "identifier width must be 1..=64");
    let d = sha256(domain.trim().to_ascii_lowercase().as_bytes());
    let head = u64::from_be_bytes(d.0[..8].try_into().unwrap());
    let id = head >> (64 - bits);
    if id == 0 {
        1
    } else {
        id
    }
}
