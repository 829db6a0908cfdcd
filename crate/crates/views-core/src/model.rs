//! Value encoding and record layout for a Views database.
//!
//! Every cell in the memory fabric holds one 64-bit word. A [`Ref`] is the
//! decoded view of such a word and is always exactly one of four variants:
//!
//! | variant      | raw word                                  |
//! |--------------|-------------------------------------------|
//! | `NULL`       | `0x0000_0000_0000_0000`                   |
//! | `EOC`        | `0xFFFF_FFFF_FFFF_FFFF`                   |
//! | `Addr(a)`    | `a + 1` (top bit clear, never 0)          |
//! | `Literal(i)` | `(1 << 63) | i` (top bit set, never all-ones) |
//!
//! The `+1` bias on addresses keeps `Addr(0)` distinct from `NULL`, so an
//! all-zero row always reads as unallocated. Decoding is total: every 64-bit
//! word maps to exactly one variant.

use crate::error::{Error, Result};

/// Raw words reserved for the two sentinels.
pub const NULL_WORD: u64 = 0;
pub const EOC_WORD: u64 = u64::MAX;

const LITERAL_TAG: u64 = 1 << 63;
/// Largest encodable address payload (`flat + 1` must keep the top bit clear).
pub const MAX_ADDR_PAYLOAD: u64 = (1 << 63) - 2;
/// Largest encodable literal index (`TAG | i` must not collide with `EOC`).
pub const MAX_LITERAL_PAYLOAD: u64 = (1 << 63) - 2;

/// Flat address of one linknode row in the fabric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Addr(pub u64);

impl Addr {
    pub fn flat(self) -> u64 {
        self.0
    }

    /// Split into `(supercluster, row)` under the given geometry.
    pub fn split(self, geometry: Geometry) -> (u64, u64) {
        (
            self.0 / geometry.rows_per_supercluster,
            self.0 % geometry.rows_per_supercluster,
        )
    }

    /// Inverse of [`Addr::split`].
    pub fn join(supercluster: u64, row: u64, geometry: Geometry) -> Addr {
        Addr(supercluster * geometry.rows_per_supercluster + row)
    }
}

impl std::fmt::Display for Addr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "0x{:x}", self.0)
    }
}

/// One stored 64-bit word, interpreted as a pointer value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ref(u64);

/// Decoded form of a [`Ref`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefKind {
    Null,
    Eoc,
    Addr(Addr),
    Literal(u64),
}

impl Ref {
    pub const NULL: Ref = Ref(NULL_WORD);
    pub const EOC: Ref = Ref(EOC_WORD);

    /// Encode an address. Fails when the flat index exceeds the encodable range.
    pub fn addr(a: Addr) -> Result<Ref> {
        if a.0 > MAX_ADDR_PAYLOAD {
            return Err(Error::EncodingOutOfRange {
                kind: "Addr",
                payload: a.0,
            });
        }
        Ok(Ref(a.0 + 1))
    }

    /// Encode a literal-table index.
    pub fn literal(index: u64) -> Result<Ref> {
        if index > MAX_LITERAL_PAYLOAD {
            return Err(Error::EncodingOutOfRange {
                kind: "Literal",
                payload: index,
            });
        }
        Ok(Ref(LITERAL_TAG | index))
    }

    /// Reinterpret a raw stored word. Total: every word is some variant.
    pub fn from_raw(word: u64) -> Ref {
        Ref(word)
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn kind(self) -> RefKind {
        match self.0 {
            NULL_WORD => RefKind::Null,
            EOC_WORD => RefKind::Eoc,
            w if w & LITERAL_TAG != 0 => RefKind::Literal(w & !LITERAL_TAG),
            w => RefKind::Addr(Addr(w - 1)),
        }
    }

    pub fn is_null(self) -> bool {
        self.0 == NULL_WORD
    }

    pub fn is_eoc(self) -> bool {
        self.0 == EOC_WORD
    }

    pub fn as_addr(self) -> Option<Addr> {
        match self.kind() {
            RefKind::Addr(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_literal(self) -> Option<u64> {
        match self.kind() {
            RefKind::Literal(i) => Some(i),
            _ => None,
        }
    }
}

impl std::fmt::Display for Ref {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind() {
            RefKind::Null => write!(f, "NULL"),
            RefKind::Eoc => write!(f, "EOC"),
            RefKind::Addr(a) => write!(f, "{a}"),
            RefKind::Literal(i) => write!(f, "lit#{i}"),
        }
    }
}

/// Identifier of one memory array within a supercluster.
///
/// Discriminants fix the canonical serialization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum ArrayId {
    N1 = 0,
    N2 = 1,
    C1 = 2,
    C2 = 3,
    S1 = 4,
    S2 = 5,
    M1 = 6,
    M2 = 7,
}

impl ArrayId {
    pub const ALL: [ArrayId; 8] = [
        ArrayId::N1,
        ArrayId::N2,
        ArrayId::C1,
        ArrayId::C2,
        ArrayId::S1,
        ArrayId::S2,
        ArrayId::M1,
        ArrayId::M2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArrayId::N1 => "N1",
            ArrayId::N2 => "N2",
            ArrayId::C1 => "C1",
            ArrayId::C2 => "C2",
            ArrayId::S1 => "S1",
            ArrayId::S2 => "S2",
            ArrayId::M1 => "M1",
            ArrayId::M2 => "M2",
        }
    }

    pub fn parse(s: &str) -> Option<ArrayId> {
        let up = s.to_ascii_uppercase();
        ArrayId::ALL.iter().copied().find(|a| a.name() == up)
    }
}

impl std::fmt::Display for ArrayId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Linknode field, with its fixed array assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldId {
    Head,
    Next,
    PrimId1,
    PrimId2,
    Prop1,
    Prop2,
}

impl FieldId {
    pub fn array(self) -> ArrayId {
        match self {
            FieldId::Head => ArrayId::N1,
            FieldId::Next => ArrayId::N2,
            FieldId::PrimId1 => ArrayId::C1,
            FieldId::PrimId2 => ArrayId::C2,
            FieldId::Prop1 => ArrayId::S1,
            FieldId::Prop2 => ArrayId::S2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldId::Head => "head",
            FieldId::Next => "next",
            FieldId::PrimId1 => "primID1",
            FieldId::PrimId2 => "primID2",
            FieldId::Prop1 => "prop1",
            FieldId::Prop2 => "prop2",
        }
    }
}

impl std::fmt::Display for FieldId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which of the two prop/misc sides of a linknode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Edge,
    Dest,
}

impl Side {
    pub fn prop_field(self) -> FieldId {
        match self {
            Side::Edge => FieldId::Prop1,
            Side::Dest => FieldId::Prop2,
        }
    }

    pub fn prop_array(self) -> ArrayId {
        self.prop_field().array()
    }

    pub fn misc_array(self) -> ArrayId {
        match self {
            Side::Edge => ArrayId::M1,
            Side::Dest => ArrayId::M2,
        }
    }
}

/// Which arrays a database keeps per supercluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AllocationScheme {
    /// All eight arrays: content, navigator, subordinate, miscellaneous.
    Cnsm,
    /// The compact four-array variant: content and navigator only.
    Normalised,
}

impl AllocationScheme {
    pub fn arrays(self) -> &'static [ArrayId] {
        match self {
            AllocationScheme::Cnsm => &ArrayId::ALL,
            AllocationScheme::Normalised => &ArrayId::ALL[..4],
        }
    }

    pub fn array_count(self) -> usize {
        self.arrays().len()
    }

    pub fn has(self, array: ArrayId) -> bool {
        (array as usize) < self.array_count()
    }

    pub fn name(self) -> &'static str {
        match self {
            AllocationScheme::Cnsm => "CNSM",
            AllocationScheme::Normalised => "Normalised",
        }
    }
}

impl std::fmt::Display for AllocationScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Fixed fabric shape: how many superclusters and rows each holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Geometry {
    pub superclusters: u64,
    pub rows_per_supercluster: u64,
}

impl Geometry {
    /// The reference shape: 8 superclusters of 64 rows (512 linknodes).
    pub const DEFAULT: Geometry = Geometry {
        superclusters: 8,
        rows_per_supercluster: 64,
    };

    pub fn capacity(self) -> u64 {
        self.superclusters * self.rows_per_supercluster
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry::DEFAULT
    }
}

/// One decoded row across the per-supercluster arrays.
///
/// Under the Normalised scheme the prop refs read as `NULL` and the misc
/// words as zero, since those arrays do not exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Linknode {
    pub head: Ref,
    pub next: Ref,
    pub prim_id1: Ref,
    pub prim_id2: Ref,
    pub prop1: Ref,
    pub prop2: Ref,
    pub misc1: u64,
    pub misc2: u64,
}

/// Interned external strings, addressed by dense literal index.
///
/// Entries are immutable once created and deduplicated by content.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LiteralTable {
    entries: Vec<String>,
    by_content: std::collections::BTreeMap<String, u64>,
}

impl LiteralTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index of `s`, interning it if unseen.
    pub fn intern(&mut self, s: &str) -> u64 {
        if let Some(&ix) = self.by_content.get(s) {
            return ix;
        }
        let ix = self.entries.len() as u64;
        self.entries.push(s.to_owned());
        self.by_content.insert(s.to_owned(), ix);
        ix
    }

    pub fn get(&self, index: u64) -> Option<&str> {
        self.entries.get(index as usize).map(String::as_str)
    }

    pub fn lookup(&self, s: &str) -> Option<u64> {
        self.by_content.get(s).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &str)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, s)| (i as u64, s.as_str()))
    }
}
