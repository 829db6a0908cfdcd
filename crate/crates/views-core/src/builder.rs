//! High-level database construction: headnodes, chain appends,
//! subordinate chains, and rewiring.
//!
//! New linknodes always append at the tail of their chain, so traversal
//! order equals insertion order. Rows are claimed lowest-free-first.

use crate::db::ViewsDb;
use crate::error::{Error, Result};
use crate::model::{Addr, ArrayId, FieldId, Ref, RefKind, Side};

impl ViewsDb {
    /// Create a fresh chain root: head points to itself, primIDs NULL,
    /// next EOC.
    pub fn create_headnode(&mut self) -> Result<Addr> {
        let a = self.allocate()?;
        let fabric = self.fabric_mut();
        fabric.prog(a, ArrayId::N1, Ref::addr(a)?.raw())?;
        fabric.prog(a, ArrayId::N2, Ref::EOC.raw())?;
        Ok(a)
    }

    /// Append a linknode `[edge, dest]` at the tail of `h`'s chain.
    pub fn add_link(&mut self, h: Addr, edge: Ref, dest: Ref) -> Result<Addr> {
        if !self.is_headnode(h)? {
            return Err(Error::NotHeadnode(h));
        }
        self.validate_prim("edge", edge)?;
        self.validate_prim("dest", dest)?;
        let old_tail = self.fabric().tail(h)?;
        let a = self.allocate()?;
        let fabric = self.fabric_mut();
        fabric.prog(a, ArrayId::N1, Ref::addr(h)?.raw())?;
        fabric.prog(a, ArrayId::N2, Ref::EOC.raw())?;
        fabric.prog(a, ArrayId::C1, edge.raw())?;
        fabric.prog(a, ArrayId::C2, dest.raw())?;
        fabric.prog(old_tail, ArrayId::N2, Ref::addr(a)?.raw())?;
        Ok(a)
    }

    /// Hang a subordinate row off one prop side of `parent`.
    ///
    /// When the side is still NULL the new row becomes the sub-chain root
    /// and the prop is rewired to it; otherwise the row is appended at the
    /// sub-chain tail. Sub-chain members carry the emitting linknode as
    /// their head, so upward head walks pass through the parent.
    pub fn add_subordinate(
        &mut self,
        parent: Addr,
        side: Side,
        edge: Ref,
        dest: Ref,
    ) -> Result<Addr> {
        let prop_array = side.prop_array();
        if !self.scheme().has(prop_array) {
            return Err(Error::ArrayAbsent {
                array: prop_array,
                scheme: self.scheme(),
            });
        }
        self.require_allocated(parent)?;
        self.validate_prim("edge", edge)?;
        self.validate_prim("dest", dest)?;

        let cur_prop = self.read_ref(parent, prop_array);
        let a = self.allocate()?;
        let parent_ref = Ref::addr(parent)?;
        let fabric = self.fabric_mut();
        fabric.prog(a, ArrayId::N1, parent_ref.raw())?;
        fabric.prog(a, ArrayId::N2, Ref::EOC.raw())?;
        fabric.prog(a, ArrayId::C1, edge.raw())?;
        fabric.prog(a, ArrayId::C2, dest.raw())?;

        match cur_prop.kind() {
            RefKind::Null => {
                self.fabric_mut()
                    .prog(parent, prop_array, Ref::addr(a)?.raw())?;
            }
            RefKind::Addr(root) => {
                let t = self.sub_chain_tail(root)?;
                self.fabric_mut()
                    .prog(t, ArrayId::N2, Ref::addr(a)?.raw())?;
            }
            _ => {
                return Err(Error::CorruptStructure {
                    at: parent,
                    reason: "prop field is neither NULL nor an address",
                })
            }
        }
        Ok(a)
    }

    /// Overwrite a single pointer field, enforcing its target rules:
    /// head takes an allocated address; next an allocated address or EOC;
    /// primIDs NULL, a literal or a headnode; props NULL or an allocated
    /// address. Chain structure is the caller's responsibility.
    pub fn rewire(&mut self, a: Addr, field: FieldId, value: Ref) -> Result<()> {
        self.require_allocated(a)?;
        let array = field.array();
        if !self.scheme().has(array) {
            return Err(Error::ArrayAbsent {
                array,
                scheme: self.scheme(),
            });
        }
        match field {
            FieldId::Head => match value.kind() {
                RefKind::Addr(t) if self.is_allocated(t) => {}
                _ => return Err(bad_target(field, value)),
            },
            FieldId::Next => match value.kind() {
                RefKind::Eoc => {}
                RefKind::Addr(t) if self.is_allocated(t) => {}
                _ => return Err(bad_target(field, value)),
            },
            FieldId::PrimId1 | FieldId::PrimId2 => {
                self.validate_prim(field.name(), value)
                    .map_err(|_| bad_target(field, value))?;
            }
            FieldId::Prop1 | FieldId::Prop2 => match value.kind() {
                RefKind::Null => {}
                RefKind::Addr(t) if self.is_allocated(t) => {}
                _ => return Err(bad_target(field, value)),
            },
        }
        self.fabric_mut().prog(a, array, value.raw())
    }

    /// Number of rows on `h`'s chain, the headnode included.
    pub fn chain_length(&self, h: Addr) -> Result<u64> {
        if !self.is_headnode(h)? {
            return Err(Error::NotHeadnode(h));
        }
        Ok(self.chain_rows(h)?.len() as u64)
    }

    /// Rows of the chain rooted at `root`, in next order.
    pub(crate) fn chain_rows(&self, root: Addr) -> Result<Vec<Addr>> {
        let mut rows = Vec::new();
        let mut cur = root;
        loop {
            if rows.len() as u64 > self.capacity() {
                return Err(Error::CorruptStructure {
                    at: root,
                    reason: "next walk exceeded capacity (cycle)",
                });
            }
            rows.push(cur);
            match self.read_ref(cur, ArrayId::N2).kind() {
                RefKind::Eoc => return Ok(rows),
                RefKind::Addr(t) if t.flat() < self.capacity() => cur = t,
                _ => {
                    return Err(Error::CorruptStructure {
                        at: cur,
                        reason: "next field is neither an address nor EOC",
                    })
                }
            }
        }
    }

    fn sub_chain_tail(&self, root: Addr) -> Result<Addr> {
        let rows = self.chain_rows(root)?;
        Ok(*rows.last().expect("chain_rows yields at least the root"))
    }

    /// A primID must be NULL, an in-table literal, or the address of a
    /// headnode.
    fn validate_prim(&self, what: &'static str, value: Ref) -> Result<()> {
        match value.kind() {
            RefKind::Null => Ok(()),
            RefKind::Literal(i) if (i as usize) < self.literals().len() => Ok(()),
            RefKind::Literal(i) => Err(Error::BadTarget {
                field: what,
                detail: format!("literal index {i} is outside the literal table"),
            }),
            RefKind::Addr(t) => {
                if self.is_headnode(t).unwrap_or(false) {
                    Ok(())
                } else {
                    Err(Error::BadTarget {
                        field: what,
                        detail: format!("{t} is not a headnode"),
                    })
                }
            }
            RefKind::Eoc => Err(Error::BadTarget {
                field: what,
                detail: "EOC is not a primID value".to_owned(),
            }),
        }
    }
}

fn bad_target(field: FieldId, value: Ref) -> Error {
    Error::BadTarget {
        field: field.name(),
        detail: format!("{value} violates the target rules"),
    }
}
