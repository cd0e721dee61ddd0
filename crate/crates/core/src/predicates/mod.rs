//! Compilers from seller attributes to diagrams over a buyer's criterion.
//!
//! The diagram's input is always the buyer's criterion `X`; the seller's
//! attribute is baked into the structure. A [`CriterionSchema`] fixes the
//! bit layout of `X` so that both sides encode it identically.

mod automata;
mod numeric;
mod sets;
mod spatial;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::codec::Writer;
use crate::error::{Error, Result};
use crate::hash::{sha256, Digest};
use crate::obdd::{check_payload, InputWord, Qrobdd};

pub use automata::{compile_dfa, wildcard_set_to_dfa, Dfa, WildcardPattern};
pub use numeric::{compile_at_least, compile_range_membership};
pub use sets::{compile_any_slot_in_set, site_id};
pub use spatial::{
    cells_criterion, compile_point_in_cells, morton, polygon_to_cells, slot_bits, Cell, CellCover,
    DEPTH_BITS, MAX_COORD_BITS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldEncoding {
    UnsignedInt,
    IdSlot,
    CellSlot,
}

impl FieldEncoding {
    fn code(self) -> u8 {
        match self {
            FieldEncoding::UnsignedInt => 0,
            FieldEncoding::IdSlot => 1,
            FieldEncoding::CellSlot => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Field {
    pub name: String,
    pub offset: usize,
    pub width: usize,
    pub encoding: FieldEncoding,
}

/// Bit layout of a criterion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionSchema {
    name: String,
    n: usize,
    fields: Vec<Field>,
    schema_id: Digest,
}

#[derive(Serialize, Deserialize)]
struct SchemaJson {
    name: String,
    n: usize,
    fields: Vec<Field>,
    schema_id: String,
}

impl CriterionSchema {
    /// Lays `(name, width, encoding)` fields out contiguously from bit 0.
    pub fn new(name: &str, fields: &[(&str, usize, FieldEncoding)]) -> Result<Self> {
        let mut offset = 0;
        let fields: Vec<Field> = fields
            .iter()
            .map(|&(fname, width, encoding)| {
                let f = Field {
                    name: fname.to_string(),
                    offset,
                    width,
                    encoding,
                };
                offset += width;
                f
            })
            .collect();
        Self::from_fields(name.to_string(), offset, fields)
    }

    fn from_fields(name: String, n: usize, fields: Vec<Field>) -> Result<Self> {
        let mut cursor = 0;
        let mut names = BTreeSet::new();
        for f in &fields {
            if f.offset != cursor {
                return Err(Error::InvalidSchema(format!(
                    "field {:?} starts at bit {} but the previous field ends at {cursor}",
                    f.name, f.offset
                )));
            }
            if !names.insert(f.name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate field {:?}",
                    f.name
                )));
            }
            cursor += f.width;
        }
        if cursor != n {
            return Err(Error::InvalidSchema(format!(
                "fields cover {cursor} bits, n is {n}"
            )));
        }
        let schema_id = sha256(&canonical_bytes(&name, n, &fields));
        Ok(Self {
            name,
            n,
            fields,
            schema_id,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn schema_id(&self) -> Digest {
        self.schema_id
    }

    pub fn to_json(&self) -> String {
        let j = SchemaJson {
            name: self.name.clone(),
            n: self.n,
            fields: self.fields.clone(),
            schema_id: self.schema_id.to_hex(),
        };
        serde_json::to_string_pretty(&j).expect("schema serializes")
    }

    /// Parses a schema document and checks that its `schema_id` matches the
    /// recomputed digest.
    pub fn from_json(s: &str) -> Result<Self> {
        let j: SchemaJson =
            serde_json::from_str(s).map_err(|e| Error::InvalidSchema(e.to_string()))?;
        let schema = Self::from_fields(j.name, j.n, j.fields)?;
        if schema.schema_id.to_hex() != j.schema_id.to_ascii_lowercase() {
            return Err(Error::InvalidSchema(
                "schema_id does not match fields".into(),
            ));
        }
        Ok(schema)
    }

    /// Packs named field values into a criterion.
    ///
    /// Values are JSON numbers, or strings of exactly `width` binary digits.
    /// For id slots a string is a domain name mapped through [`site_id`].
    /// Missing slot fields default to zero (empty); missing unsigned-int
    /// fields are an error.
    pub fn pack(&self, values: &Value) -> Result<InputWord> {
        let obj = values
            .as_object()
            .ok_or_else(|| Error::InvalidSchema("criterion values must be a JSON object".into()))?;
        if let Some(unknown) = obj
            .keys()
            .find(|k| !self.fields.iter().any(|f| &f.name == *k))
        {
            return Err(Error::InvalidSchema(format!("unknown field {unknown:?}")));
        }
        let mut x = InputWord::empty();
        for f in &self.fields {
            match obj.get(&f.name) {
                None if f.encoding == FieldEncoding::UnsignedInt => {
                    return Err(Error::InvalidSchema(format!("missing field {:?}", f.name)))
                }
                None => (0..f.width).for_each(|_| x.push(false)),
                Some(Value::Number(num)) => {
                    let v = num.as_u64().ok_or_else(|| {
                        Error::InvalidSchema(format!(
                            "field {:?} is not an unsigned integer",
                            f.name
                        ))
                    })?;
                    x.push_uint(v, f.width)?;
                }
                Some(Value::String(s)) if f.encoding == FieldEncoding::IdSlot => {
                    if f.width == 0 || f.width > 64 {
                        return Err(Error::InvalidSchema(format!(
                            "bad id width in {:?}",
                            f.name
                        )));
                    }
                    x.push_uint(site_id(s, f.width), f.width)?;
                }
                Some(Value::String(s)) => {
                    if s.len() != f.width || !s.chars().all(|c| c == '0' || c == '1') {
                        return Err(Error::InvalidSchema(format!(
                            "field {:?} needs {} binary digits",
                            f.name, f.width
                        )));
                    }
                    s.chars().for_each(|c| x.push(c == '1'));
                }
                Some(_) => {
                    return Err(Error::InvalidSchema(format!(
                        "unsupported value for {:?}",
                        f.name
                    )))
                }
            }
        }
        Ok(x)
    }
}

fn canonical_bytes(name: &str, n: usize, fields: &[Field]) -> Vec<u8> {
    let mut w = Writer::new();
    w.bytes(b"WTSCHEMA1");
    w.u16(name.len() as u16);
    w.bytes(name.as_bytes());
    w.u32(n as u32);
    w.u16(fields.len() as u16);
    for f in fields {
        w.u16(f.name.len() as u16);
        w.bytes(f.name.as_bytes());
        w.u32(f.offset as u32);
        w.u32(f.width as u32);
        w.u8(f.encoding.code());
    }
    w.finish()
}

/// A predicate description as ingested from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum PredicateSpec {
    #[serde(rename = "ageInRange")]
    AgeInRange { width: usize, age: u64 },
    #[serde(rename = "bankBalanceAtLeast")]
    BankBalanceAtLeast { width: usize, balance: u64 },
    #[serde(rename = "visitedAnySite")]
    VisitedAnySite {
        slots: usize,
        id_bits: usize,
        sites: Vec<String>,
    },
    #[serde(rename = "houseInPoly")]
    HouseInPoly {
        slots: usize,
        coord_bits: usize,
        lat: u64,
        lon: u64,
    },
    #[serde(rename = "dfa")]
    Dfa {
        n: usize,
        initial: u32,
        transitions: Vec<[u32; 2]>,
        /// Hex payload per state.
        accept: Vec<String>,
    },
    #[serde(rename = "wildcardSet")]
    WildcardSet { n: usize, patterns: Vec<String> },
}

impl PredicateSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidPredicate(e.to_string()))
    }

    /// The criterion layout this predicate expects.
    pub fn schema(&self) -> Result<CriterionSchema> {
        use FieldEncoding::*;
        match self {
            PredicateSpec::AgeInRange { width, .. } => CriterionSchema::new(
                "ageInRange",
                &[
                    ("minAge", *width, UnsignedInt),
                    ("maxAge", *width, UnsignedInt),
                ],
            ),
            PredicateSpec::BankBalanceAtLeast { width, .. } => {
                CriterionSchema::new("bankBalanceAtLeast", &[("minBalance", *width, UnsignedInt)])
            }
            PredicateSpec::VisitedAnySite { slots, id_bits, .. } => {
                let names: Vec<String> = (0..*slots).map(|k| format!("site{k}")).collect();
                let fields: Vec<_> = names
                    .iter()
                    .map(|s| (s.as_str(), *id_bits, IdSlot))
                    .collect();
                CriterionSchema::new("visitedAnySite", &fields)
            }
            PredicateSpec::HouseInPoly {
                slots, coord_bits, ..
            } => {
                let names: Vec<(String, String)> = (0..*slots)
                    .map(|k| (format!("cell{k}.depth"), format!("cell{k}.prefix")))
                    .collect();
                let fields: Vec<_> = names
                    .iter()
                    .flat_map(|(d, p)| {
                        [
                            (d.as_str(), DEPTH_BITS, CellSlot),
                            (p.as_str(), 2 * coord_bits, CellSlot),
                        ]
                    })
                    .collect();
                CriterionSchema::new("houseInPoly", &fields)
            }
            PredicateSpec::Dfa { n, .. } => {
                CriterionSchema::new("dfa", &[("input", *n, UnsignedInt)])
            }
            PredicateSpec::WildcardSet { n, .. } => {
                CriterionSchema::new("wildcardSet", &[("input", *n, UnsignedInt)])
            }
        }
    }

    /// Compiles the reduced diagram and its schema.
    pub fn compile(&self) -> Result<(Qrobdd, CriterionSchema)> {
        let q = match self {
            PredicateSpec::AgeInRange { width, age } => compile_range_membership(*age, *width)?,
            PredicateSpec::BankBalanceAtLeast { width, balance } => {
                compile_at_least(*balance, *width)?
            }
            PredicateSpec::VisitedAnySite {
                slots,
                id_bits,
                sites,
            } => {
                if *id_bits == 0 || *id_bits > 64 {
                    return Err(Error::InvalidPredicate(format!(
                        "id_bits {id_bits} outside 1..=64"
                    )));
                }
                let ids: BTreeSet<u64> = sites.iter().map(|s| site_id(s, *id_bits)).collect();
                compile_any_slot_in_set(&ids, *slots, *id_bits)?
            }
            PredicateSpec::HouseInPoly {
                slots,
                coord_bits,
                lat,
                lon,
            } => compile_point_in_cells(*lat, *lon, *slots, *coord_bits)?,
            PredicateSpec::Dfa {
                n,
                initial,
                transitions,
                accept,
            } => {
                let accept = accept
                    .iter()
                    .map(|h| {
                        let p = hex::decode(h)
                            .map_err(|e| Error::InvalidPredicate(format!("accept payload: {e}")))?;
                        check_payload(&p)?;
                        Ok(p)
                    })
                    .collect::<Result<Vec<_>>>()?;
                compile_dfa(&Dfa::new(transitions.clone(), *initial, accept)?, *n)?
            }
            PredicateSpec::WildcardSet { n, patterns } => {
                let ps = patterns
                    .iter()
                    .map(|p| WildcardPattern::parse(p))
                    .collect::<Result<Vec<_>>>()?;
                compile_dfa(&wildcard_set_to_dfa(&ps, *n)?, *n)?
            }
        };
        let schema = self.schema()?;
        debug_assert_eq!(schema.n(), q.n());
        Ok((q, schema))
    }
}
