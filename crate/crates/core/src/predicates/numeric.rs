//! Integer range and threshold predicates.
//!
//! The seller's attribute is fixed inside the diagram; the buyer's bounds are
//! the input, MSB-first, so each comparison needs only a handful of states per
//! level.

use crate::error::{Error, Result};
use crate::obdd::{build_layered, Qrobdd, FALSE, TRUE};

pub(crate) fn check_width(value: u64, width: usize) -> Result<()> {
    if width > 64 {
        return Err(Error::InvalidPredicate(format!(
            "bit width {width} exceeds 64"
        )));
    }
    if width < 64 && value >> width != 0 {
        return Err(Error::ValueTooWide { value, width });
    }
    Ok(())
}

#[inline]
fn attr_bit(attr: u64, width: usize, j: usize) -> bool {
    (attr >> (width - 1 - j)) & 1 == 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum RangeState {
    /// Reading `min`; prefix equal to the attribute's so far.
    MinEqual,
    /// Reading `min`; already strictly below the attribute.
    MinBelow,
    /// Reading `max`; prefix equal to the attribute's so far.
    MaxEqual,
    /// Reading `max`; already strictly above the attribute.
    MaxAbove,
    Dead,
}

/// `X = min || max` (each `width` bits); true iff `min <= attr <= max`.
pub fn compile_range_membership(attr: u64, width: usize) -> Result<Qrobdd> {
    check_width(attr, width)?;
    let initial = if width == 0 {
        RangeState::MaxEqual
    } else {
        RangeState::MinEqual
    };
    let q = build_layered(
        2 * width,
        initial,
        |i, &s, bit| {
            use RangeState::*;
            if i < width {
                let a = attr_bit(attr, width, i);
                let next = match s {
                    MinEqual if bit == a => MinEqual,
                    MinEqual if !bit => MinBelow,
                    MinEqual => Dead,
                    other => other,
                };
                // Once `min` is fully read, only "min <= attr" matters.
                if i == width - 1 && next != Dead {
                    MaxEqual
                } else {
                    next
                }
            } else {
                let a = attr_bit(attr, width, i - width);
                match s {
                    MaxEqual if bit == a => MaxEqual,
                    MaxEqual if bit => MaxAbove,
                    MaxEqual => Dead,
                    other => other,
                }
            }
        },
        |&s| if s == RangeState::Dead { FALSE } else { TRUE }.to_vec(),
    )?;
    Ok(q.reduce())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum ThresholdState {
    Equal,
    Below,
    Above,
}

/// `X = min` (`width` bits); true iff `attr >= min`.
pub fn compile_at_least(attr: u64, width: usize) -> Result<Qrobdd> {
    check_width(attr, width)?;
    let q = build_layered(
        width,
        ThresholdState::Equal,
        |i, &s, bit| {
            let a = attr_bit(attr, width, i);
            match s {
                ThresholdState::Equal if bit == a => ThresholdState::Equal,
                ThresholdState::Equal if bit => ThresholdState::Above,
                ThresholdState::Equal => ThresholdState::Below,
                other => other,
            }
        },
        |&s| {
            if s == ThresholdState::Above {
                FALSE
            } else {
                TRUE
            }
            .to_vec()
        },
    )?;
    Ok(q.reduce())
}
