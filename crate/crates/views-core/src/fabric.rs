//! The supercluster memory fabric and its instruction set.
//!
//! A fabric is a bank of fixed-width 64-bit arrays grouped into
//! superclusters. Seven operations run against it:
//!
//! * [`MemoryFabric::prog`] — write one cell
//! * [`MemoryFabric::aar`] — address-addressable read of one cell
//! * [`MemoryFabric::car`] — content-addressable search on one array
//! * [`MemoryFabric::car2`] — content-addressable search on a two-array conjunction
//! * [`MemoryFabric::carnext`] — step a match cursor to the next hit
//! * [`MemoryFabric::head`] — ascend N1 links to the chain's self-rooted headnode
//! * [`MemoryFabric::tail`] — walk N2 from the headnode to the row before EOC
//!
//! Searches return a [`MatchCursor`] holding a snapshot of the matching
//! addresses in ascending flat order, merged across superclusters. Any
//! `prog` invalidates outstanding cursors; draining one afterwards reports
//! a stale-cursor error instead of mixing pre- and post-write results.
//!
//! Matching is bit-exact on the full word, sentinels included: searching
//! for `NULL` finds unallocated cells and searching for `EOC` finds chain
//! ends. Reads of any kind never change the fabric image.

use crate::error::{Error, Result};
use crate::model::{Addr, AllocationScheme, ArrayId, Geometry, NULL_WORD};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bank {
    /// One vector per present array, indexed by `ArrayId as usize`.
    arrays: Vec<Vec<u64>>,
}

/// Fixed-geometry array banks addressable by `(array, row)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryFabric {
    scheme: AllocationScheme,
    geometry: Geometry,
    banks: Vec<Bank>,
    version: u64,
}

/// The cue(s) a cursor was created from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CursorQuery {
    One(ArrayId, u64),
    Two((ArrayId, u64), (ArrayId, u64)),
}

/// Snapshot cursor over the matches of a `car`/`car2` search.
#[derive(Debug, Clone)]
pub struct MatchCursor {
    query: CursorQuery,
    matches: Vec<Addr>,
    pos: usize,
    version: u64,
}

impl MatchCursor {
    pub fn query(&self) -> CursorQuery {
        self.query
    }

    /// Matches remaining to be yielded.
    pub fn remaining(&self) -> usize {
        self.matches.len() - self.pos
    }

    /// The last yielded address, if any.
    pub fn position(&self) -> Option<Addr> {
        self.pos.checked_sub(1).map(|i| self.matches[i])
    }
}

impl MemoryFabric {
    pub fn new(scheme: AllocationScheme, geometry: Geometry) -> Self {
        let rows = geometry.rows_per_supercluster as usize;
        let banks = (0..geometry.superclusters)
            .map(|_| Bank {
                arrays: vec![vec![NULL_WORD; rows]; scheme.array_count()],
            })
            .collect();
        MemoryFabric {
            scheme,
            geometry,
            banks,
            version: 0,
        }
    }

    pub fn scheme(&self) -> AllocationScheme {
        self.scheme
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn capacity(&self) -> u64 {
        self.geometry.capacity()
    }

    fn check_array(&self, array: ArrayId) -> Result<()> {
        if self.scheme.has(array) {
            Ok(())
        } else {
            Err(Error::ArrayAbsent {
                array,
                scheme: self.scheme,
            })
        }
    }

    fn check_addr(&self, a: Addr) -> Result<()> {
        if a.flat() < self.capacity() {
            Ok(())
        } else {
            Err(Error::AddressOutOfRange {
                addr: a,
                capacity: self.capacity(),
            })
        }
    }

    fn cell(&self, a: Addr, array: ArrayId) -> &u64 {
        let (sc, row) = a.split(self.geometry);
        &self.banks[sc as usize].arrays[array as usize][row as usize]
    }

    /// Set one pointer cell. Bumps the write version, so cursors created
    /// before this call become stale.
    pub fn prog(&mut self, a: Addr, array: ArrayId, value: u64) -> Result<()> {
        self.check_array(array)?;
        self.check_addr(a)?;
        let (sc, row) = a.split(self.geometry);
        self.banks[sc as usize].arrays[array as usize][row as usize] = value;
        self.version += 1;
        Ok(())
    }

    /// Read the word stored at `(a, array)`. Unwritten cells read as zero.
    pub fn aar(&self, a: Addr, array: ArrayId) -> Result<u64> {
        self.check_array(array)?;
        self.check_addr(a)?;
        Ok(*self.cell(a, array))
    }

    /// Search one array for a cue word. The cursor yields every flat
    /// address holding exactly `value`, in ascending order across all
    /// superclusters.
    pub fn car(&self, array: ArrayId, value: u64) -> Result<MatchCursor> {
        self.check_array(array)?;
        let matches = (0..self.capacity())
            .map(Addr)
            .filter(|&a| *self.cell(a, array) == value)
            .collect();
        Ok(MatchCursor {
            query: CursorQuery::One(array, value),
            matches,
            pos: 0,
            version: self.version,
        })
    }

    /// Search for a conjunction of two cues on two distinct arrays.
    pub fn car2(
        &self,
        array_a: ArrayId,
        value_a: u64,
        array_b: ArrayId,
        value_b: u64,
    ) -> Result<MatchCursor> {
        if array_a == array_b {
            return Err(Error::SameArrayQuery { array: array_a });
        }
        self.check_array(array_a)?;
        self.check_array(array_b)?;
        let matches = (0..self.capacity())
            .map(Addr)
            .filter(|&a| *self.cell(a, array_a) == value_a && *self.cell(a, array_b) == value_b)
            .collect();
        Ok(MatchCursor {
            query: CursorQuery::Two((array_a, value_a), (array_b, value_b)),
            matches,
            pos: 0,
            version: self.version,
        })
    }

    /// Yield the next match, or `None` once the cursor is exhausted.
    pub fn carnext(&self, cursor: &mut MatchCursor) -> Result<Option<Addr>> {
        if cursor.version != self.version {
            return Err(Error::StaleCursor);
        }
        let hit = cursor.matches.get(cursor.pos).copied();
        if hit.is_some() {
            cursor.pos += 1;
        }
        Ok(hit)
    }

    /// Drain a cursor into the remaining match list.
    pub fn drain(&self, cursor: &mut MatchCursor) -> Result<Vec<Addr>> {
        let mut out = Vec::with_capacity(cursor.remaining());
        while let Some(a) = self.carnext(cursor)? {
            out.push(a);
        }
        Ok(out)
    }

    /// Ascend N1 links from `a` until a self-rooted row is found.
    ///
    /// Chain members point straight at their headnode; subordinate-chain
    /// members point at the linknode that emitted them, so the walk
    /// recurses upward until the true chain root.
    pub fn head(&self, a: Addr) -> Result<Addr> {
        self.check_addr(a)?;
        let mut cur = a;
        for _ in 0..=self.capacity() {
            let word = *self.cell(cur, ArrayId::N1);
            if word == NULL_WORD {
                return Err(Error::NotAllocated(cur));
            }
            let up =
                crate::model::Ref::from_raw(word)
                    .as_addr()
                    .ok_or(Error::CorruptStructure {
                        at: cur,
                        reason: "head field is not an address",
                    })?;
            self.check_addr(up).map_err(|_| Error::CorruptStructure {
                at: cur,
                reason: "head field addresses a row outside capacity",
            })?;
            if up == cur {
                return Ok(cur);
            }
            cur = up;
        }
        Err(Error::CorruptStructure {
            at: a,
            reason: "head walk exceeded capacity (cycle)",
        })
    }

    /// Last linknode of the chain owning `a`: walk N2 from `head(a)` until
    /// the row whose next is EOC.
    pub fn tail(&self, a: Addr) -> Result<Addr> {
        let mut cur = self.head(a)?;
        for _ in 0..=self.capacity() {
            let next = crate::model::Ref::from_raw(*self.cell(cur, ArrayId::N2));
            if next.is_eoc() {
                return Ok(cur);
            }
            let n = next.as_addr().ok_or(Error::CorruptStructure {
                at: cur,
                reason: "next field is neither an address nor EOC",
            })?;
            self.check_addr(n).map_err(|_| Error::CorruptStructure {
                at: cur,
                reason: "next field addresses a row outside capacity",
            })?;
            cur = n;
        }
        Err(Error::CorruptStructure {
            at: a,
            reason: "next walk exceeded capacity (cycle)",
        })
    }
}

/// Human-readable instruction trace, one operation per line.
///
/// Line format is fixed as `OP arg=value … -> result` with arguments in
/// call order:
///
/// ```text
/// PROG addr=0x1 array=C1 value=0x2a -> ok
/// AAR addr=0x1 array=C1 -> 0x2a
/// CAR array=N1 value=0x3 -> 2 matches
/// CAR2 arrayA=C1 valueA=0x3 arrayB=C2 valueB=0x5 -> 1 match
/// CARNEXT -> 0x7
/// CARNEXT -> exhausted
/// HEAD addr=0xe -> 0x0
/// TAIL addr=0x0 -> 0x2
/// ```
#[derive(Debug, Clone, Default)]
pub struct TraceLog {
    lines: Vec<String>,
}

impl TraceLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn prog(&mut self, a: Addr, array: ArrayId, value: u64) {
        self.lines.push(format!(
            "PROG addr={a} array={array} value=0x{value:x} -> ok"
        ));
    }

    pub fn aar(&mut self, a: Addr, array: ArrayId, result: u64) {
        self.lines
            .push(format!("AAR addr={a} array={array} -> 0x{result:x}"));
    }

    pub fn car(&mut self, array: ArrayId, value: u64, matches: usize) {
        let unit = if matches == 1 { "match" } else { "matches" };
        self.lines.push(format!(
            "CAR array={array} value=0x{value:x} -> {matches} {unit}"
        ));
    }

    pub fn car2(&mut self, aa: ArrayId, va: u64, ab: ArrayId, vb: u64, matches: usize) {
        let unit = if matches == 1 { "match" } else { "matches" };
        self.lines.push(format!(
            "CAR2 arrayA={aa} valueA=0x{va:x} arrayB={ab} valueB=0x{vb:x} -> {matches} {unit}"
        ));
    }

    pub fn carnext(&mut self, hit: Option<Addr>) {
        match hit {
            Some(a) => self.lines.push(format!("CARNEXT -> {a}")),
            None => self.lines.push("CARNEXT -> exhausted".to_owned()),
        }
    }

    pub fn head(&mut self, a: Addr, result: Addr) {
        self.lines.push(format!("HEAD addr={a} -> {result}"));
    }

    pub fn tail(&mut self, a: Addr, result: Addr) {
        self.lines.push(format!("TAIL addr={a} -> {result}"));
    }
}
