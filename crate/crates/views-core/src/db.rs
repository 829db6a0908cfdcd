//! The database object: a memory fabric plus the bookkeeping the arrays
//! themselves do not carry — the literal table and the row free list.
//!
//! Unallocated rows are all-zeros in every array; the free list mirrors
//! that convention (a row is free exactly while its N1 word is zero, since
//! every allocated row stores a non-NULL head). Allocation always takes
//! the lowest free flat address, which makes construction reproducible.
//!
//! A `ViewsDb` is plain data: share it immutably between threads for
//! concurrent readers, or hand out a single `&mut` for writing.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::fabric::MemoryFabric;
use crate::model::{Addr, AllocationScheme, ArrayId, Geometry, Linknode, LiteralTable, Ref};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewsDb {
    fabric: MemoryFabric,
    literals: LiteralTable,
    free: BTreeSet<u64>,
}

impl ViewsDb {
    pub fn new(scheme: AllocationScheme) -> Self {
        Self::with_geometry(scheme, Geometry::DEFAULT)
    }

    pub fn with_geometry(scheme: AllocationScheme, geometry: Geometry) -> Self {
        ViewsDb {
            fabric: MemoryFabric::new(scheme, geometry),
            literals: LiteralTable::new(),
            free: (0..geometry.capacity()).collect(),
        }
    }

    /// Rebuild a database around an existing fabric image. Rows whose N1
    /// word is zero are taken as free; everything else is allocated.
    pub fn from_parts(fabric: MemoryFabric, literals: LiteralTable) -> Result<Self> {
        let free = (0..fabric.capacity())
            .filter(|&flat| fabric.aar(Addr(flat), ArrayId::N1).unwrap_or(0) == 0)
            .collect();
        Ok(ViewsDb {
            fabric,
            literals,
            free,
        })
    }

    pub fn scheme(&self) -> AllocationScheme {
        self.fabric.scheme()
    }

    pub fn geometry(&self) -> Geometry {
        self.fabric.geometry()
    }

    pub fn capacity(&self) -> u64 {
        self.fabric.capacity()
    }

    pub fn fabric(&self) -> &MemoryFabric {
        &self.fabric
    }

    /// Raw fabric access. ISA writes made through this bypass the
    /// structural rules the builder enforces.
    pub fn fabric_mut(&mut self) -> &mut MemoryFabric {
        &mut self.fabric
    }

    pub fn literals(&self) -> &LiteralTable {
        &self.literals
    }

    pub fn literals_mut(&mut self) -> &mut LiteralTable {
        &mut self.literals
    }

    pub fn allocated_rows(&self) -> u64 {
        self.capacity() - self.free.len() as u64
    }

    pub fn free_rows(&self) -> u64 {
        self.free.len() as u64
    }

    pub fn is_allocated(&self, a: Addr) -> bool {
        a.flat() < self.capacity() && !self.free.contains(&a.flat())
    }

    /// Claim the lowest free row.
    pub(crate) fn allocate(&mut self) -> Result<Addr> {
        match self.free.pop_first() {
            Some(flat) => {
                // a free row should be all-zeros already, but raw writes
                // or a hand-edited image can leave residue behind
                let a = Addr(flat);
                for &array in self.scheme().arrays() {
                    if self.fabric.aar(a, array)? != 0 {
                        self.fabric.prog(a, array, 0)?;
                    }
                }
                Ok(a)
            }
            None => Err(Error::OutOfMemory {
                required: 1,
                capacity: self.capacity(),
            }),
        }
    }

    pub(crate) fn require_allocated(&self, a: Addr) -> Result<()> {
        if a.flat() >= self.capacity() {
            return Err(Error::AddressOutOfRange {
                addr: a,
                capacity: self.capacity(),
            });
        }
        if !self.is_allocated(a) {
            return Err(Error::NotAllocated(a));
        }
        Ok(())
    }

    /// Iterate allocated rows in ascending flat order.
    pub fn allocated_iter(&self) -> impl Iterator<Item = Addr> + '_ {
        (0..self.capacity())
            .map(Addr)
            .filter(move |a| !self.free.contains(&a.flat()))
    }

    pub(crate) fn read(&self, a: Addr, array: ArrayId) -> u64 {
        self.fabric.aar(a, array).unwrap_or(0)
    }

    /// Decoded view of one cell; absent arrays read as NULL.
    pub fn read_ref(&self, a: Addr, array: ArrayId) -> Ref {
        Ref::from_raw(self.read(a, array))
    }

    /// Decode a full row. Under the Normalised scheme the prop refs read
    /// as NULL and the misc words as zero.
    pub fn linknode(&self, a: Addr) -> Result<Linknode> {
        self.require_allocated(a)?;
        Ok(Linknode {
            head: self.read_ref(a, ArrayId::N1),
            next: self.read_ref(a, ArrayId::N2),
            prim_id1: self.read_ref(a, ArrayId::C1),
            prim_id2: self.read_ref(a, ArrayId::C2),
            prop1: self.read_ref(a, ArrayId::S1),
            prop2: self.read_ref(a, ArrayId::S2),
            misc1: self.read(a, ArrayId::M1),
            misc2: self.read(a, ArrayId::M2),
        })
    }

    /// True iff the row is its chain's root: head points to itself and
    /// both primIDs are NULL.
    pub fn is_headnode(&self, a: Addr) -> Result<bool> {
        self.require_allocated(a)?;
        let head = self.read_ref(a, ArrayId::N1);
        Ok(head == Ref::addr(a)? // self-reference
            && self.read_ref(a, ArrayId::C1).is_null()
            && self.read_ref(a, ArrayId::C2).is_null())
    }

    /// Headnodes in ascending address order.
    pub fn headnodes(&self) -> Vec<Addr> {
        self.allocated_iter()
            .filter(|&a| self.is_headnode(a).unwrap_or(false))
            .collect()
    }
}
