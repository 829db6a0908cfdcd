//! The `.vimg` binary supercluster image.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "VIEWSDB1"
//! 8       4     scheme kind: 0 = CNSM, 1 = Normalised (u32)
//! 12      4     supercluster count (u32)
//! 16      4     rows per supercluster (u32)
//! 20      4     literal-table entry count (u32)
//! 24      ...   payload: per supercluster, each present array in the
//!               fixed order N1 N2 C1 C2 S1 S2 M1 M2, row-major u64 words
//! ...     ...   literal table: per entry a u32 byte length then that
//!               many bytes of UTF-8
//! ```
//!
//! Loading is bit-exact: every cell word, allocated or not, comes back
//! unchanged, and the free list is re-derived from the convention that a
//! free row has a zero N1 word.

use std::path::Path;

use crate::db::ViewsDb;
use crate::error::{Error, Result};
use crate::fabric::MemoryFabric;
use crate::model::{Addr, AllocationScheme, Geometry, LiteralTable};

const MAGIC: &[u8; 8] = b"VIEWSDB1";

pub fn image_to_bytes(db: &ViewsDb) -> Vec<u8> {
    let geometry = db.geometry();
    let scheme = db.scheme();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    let kind: u32 = match scheme {
        AllocationScheme::Cnsm => 0,
        AllocationScheme::Normalised => 1,
    };
    out.extend_from_slice(&kind.to_le_bytes());
    out.extend_from_slice(&(geometry.superclusters as u32).to_le_bytes());
    out.extend_from_slice(&(geometry.rows_per_supercluster as u32).to_le_bytes());
    out.extend_from_slice(&(db.literals().len() as u32).to_le_bytes());

    for sc in 0..geometry.superclusters {
        for &array in scheme.arrays() {
            for row in 0..geometry.rows_per_supercluster {
                let a = Addr::join(sc, row, geometry);
                let word = db.fabric().aar(a, array).expect("in-range cell");
                out.extend_from_slice(&word.to_le_bytes());
            }
        }
    }

    for (_, entry) in db.literals().iter() {
        out.extend_from_slice(&(entry.len() as u32).to_le_bytes());
        out.extend_from_slice(entry.as_bytes());
    }
    out
}

pub fn load_image_bytes(bytes: &[u8]) -> Result<ViewsDb> {
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < 24 {
        return Err(Error::ImageSize {
            expected: 24,
            got: bytes.len(),
        });
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let scheme = match u32_at(8) {
        0 => AllocationScheme::Cnsm,
        1 => AllocationScheme::Normalised,
        k => return Err(Error::ImageFormat(format!("unknown scheme kind {k}"))),
    };
    let geometry = Geometry {
        superclusters: u32_at(12) as u64,
        rows_per_supercluster: u32_at(16) as u64,
    };
    let literal_count = u32_at(20) as usize;

    let payload_end = (geometry.capacity() as usize)
        .checked_mul(scheme.array_count())
        .and_then(|words| words.checked_mul(8))
        .and_then(|len| len.checked_add(24))
        .ok_or_else(|| Error::ImageFormat("geometry overflows".to_owned()))?;
    if bytes.len() < payload_end {
        return Err(Error::ImageSize {
            expected: payload_end,
            got: bytes.len(),
        });
    }

    let mut fabric = MemoryFabric::new(scheme, geometry);
    let mut off = 24;
    for sc in 0..geometry.superclusters {
        for &array in scheme.arrays() {
            for row in 0..geometry.rows_per_supercluster {
                let word = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
                off += 8;
                if word != 0 {
                    let a = Addr::join(sc, row, geometry);
                    fabric.prog(a, array, word)?;
                }
            }
        }
    }

    let mut literals = LiteralTable::new();
    for i in 0..literal_count {
        if bytes.len() < off + 4 {
            return Err(Error::ImageSize {
                expected: off + 4,
                got: bytes.len(),
            });
        }
        let len = u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
        off += 4;
        if bytes.len() < off + len {
            return Err(Error::ImageSize {
                expected: off + len,
                got: bytes.len(),
            });
        }
        let s = std::str::from_utf8(&bytes[off..off + len])
            .map_err(|e| Error::ImageFormat(format!("literal {i} is not UTF-8: {e}")))?;
        let ix = literals.intern(s);
        if ix != i as u64 {
            return Err(Error::ImageFormat(format!("duplicate literal entry {i:?}")));
        }
        off += len;
    }
    if off != bytes.len() {
        return Err(Error::ImageSize {
            expected: off,
            got: bytes.len(),
        });
    }

    ViewsDb::from_parts(fabric, literals)
}

pub fn save_image(db: &ViewsDb, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, image_to_bytes(db))?;
    Ok(())
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ViewsDb> {
    let bytes = std::fs::read(path)?;
    load_image_bytes(&bytes)
}
