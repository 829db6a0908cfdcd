//! Structural invariant checker.
//!
//! Violations are data, not errors: the checker never fails, it reports.
//! The rules it enforces over every allocated row:
//!
//! * repeated head lookups terminate at a true headnode within capacity;
//! * every chain segment (a headnode's chain, or a subordinate chain hung
//!   off a prop) reaches EOC without revisiting a row, and all its members
//!   carry the segment's head value;
//! * primIDs are NULL, a literal-table entry, or the address of a headnode;
//! * props are NULL or the address of an allocated row;
//! * every allocated row is reachable from some headnode through next and
//!   prop links (rewiring that strands rows is reported as orphaning).

use std::collections::BTreeSet;

use crate::db::ViewsDb;
use crate::model::{Addr, ArrayId, FieldId, Ref, RefKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// N1 of an allocated row is not an in-range address.
    BadHeadField { at: Addr, word: u64 },
    /// Head walk stepped onto an unallocated row.
    HeadTargetUnallocated { at: Addr, target: Addr },
    /// Head walk exceeded capacity without reaching a self-rooted row.
    HeadWalkCycle { at: Addr },
    /// Head walk terminated on a self-rooted row whose primIDs are not NULL.
    HeadRootNotHeadnode { at: Addr, root: Addr },
    /// N2 of an allocated row is neither an in-range address nor EOC.
    BadNextField { at: Addr, word: u64 },
    /// next points at an unallocated row.
    NextTargetUnallocated { at: Addr, target: Addr },
    /// next-walk from a segment root revisited a row; names the cycle.
    NextCycle { root: Addr, rows: Vec<Addr> },
    /// A segment member carries a head value other than the segment's.
    ForeignHead { at: Addr, expected: Ref, found: Ref },
    /// A primID is EOC, an out-of-table literal, or a non-headnode address.
    BadPrimId {
        at: Addr,
        field: FieldId,
        value: Ref,
    },
    /// A prop is neither NULL nor the address of an allocated row.
    BadProp {
        at: Addr,
        field: FieldId,
        value: Ref,
    },
    /// Allocated row unreachable from any headnode.
    Orphan { at: Addr },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::BadHeadField { at, word } => {
                write!(f, "{at}: head field 0x{word:x} is not an address")
            }
            Violation::HeadTargetUnallocated { at, target } => {
                write!(f, "{at}: head points at unallocated row {target}")
            }
            Violation::HeadWalkCycle { at } => {
                write!(f, "{at}: head walk does not terminate (cycle)")
            }
            Violation::HeadRootNotHeadnode { at, root } => {
                write!(f, "{at}: head walk ends at {root}, which is not a headnode")
            }
            Violation::BadNextField { at, word } => {
                write!(
                    f,
                    "{at}: next field 0x{word:x} is neither an address nor EOC"
                )
            }
            Violation::NextTargetUnallocated { at, target } => {
                write!(f, "{at}: next points at unallocated row {target}")
            }
            Violation::NextCycle { root, rows } => {
                write!(f, "chain of {root}: next cycle through")?;
                for r in rows {
                    write!(f, " {r}")?;
                }
                Ok(())
            }
            Violation::ForeignHead {
                at,
                expected,
                found,
            } => {
                write!(f, "{at}: head is {found}, chain expects {expected}")
            }
            Violation::BadPrimId { at, field, value } => {
                write!(
                    f,
                    "{at}: {field} = {value} does not name a headnode or literal"
                )
            }
            Violation::BadProp { at, field, value } => {
                write!(f, "{at}: {field} = {value} is not an allocated row")
            }
            Violation::Orphan { at } => {
                write!(f, "{at}: allocated but unreachable from any headnode")
            }
        }
    }
}

/// Run every structural rule; an empty report means the database is sound.
pub fn check_invariants(db: &ViewsDb) -> Vec<Violation> {
    let mut out = Vec::new();
    check_fields(db, &mut out);
    check_head_walks(db, &mut out);
    check_segments(db, &mut out);
    check_reachability(db, &mut out);
    out
}

fn check_fields(db: &ViewsDb, out: &mut Vec<Violation>) {
    for a in db.allocated_iter() {
        let head = db.read_ref(a, ArrayId::N1);
        match head.kind() {
            RefKind::Addr(t) if t.flat() < db.capacity() => {}
            _ => out.push(Violation::BadHeadField {
                at: a,
                word: head.raw(),
            }),
        }

        let next = db.read_ref(a, ArrayId::N2);
        match next.kind() {
            RefKind::Eoc => {}
            RefKind::Addr(t) if t.flat() < db.capacity() => {
                if !db.is_allocated(t) {
                    out.push(Violation::NextTargetUnallocated { at: a, target: t });
                }
            }
            _ => out.push(Violation::BadNextField {
                at: a,
                word: next.raw(),
            }),
        }

        for field in [FieldId::PrimId1, FieldId::PrimId2] {
            let v = db.read_ref(a, field.array());
            match v.kind() {
                RefKind::Null => {}
                RefKind::Literal(i) if (i as usize) < db.literals().len() => {}
                RefKind::Addr(t) if db.is_headnode(t).unwrap_or(false) => {}
                _ => out.push(Violation::BadPrimId {
                    at: a,
                    field,
                    value: v,
                }),
            }
        }

        if db.scheme().has(ArrayId::S1) {
            for field in [FieldId::Prop1, FieldId::Prop2] {
                let v = db.read_ref(a, field.array());
                match v.kind() {
                    RefKind::Null => {}
                    RefKind::Addr(t) if db.is_allocated(t) => {}
                    _ => out.push(Violation::BadProp {
                        at: a,
                        field,
                        value: v,
                    }),
                }
            }
        }
    }
}

fn check_head_walks(db: &ViewsDb, out: &mut Vec<Violation>) {
    for start in db.allocated_iter() {
        let mut cur = start;
        let mut steps = 0u64;
        loop {
            if steps > db.capacity() {
                out.push(Violation::HeadWalkCycle { at: start });
                break;
            }
            steps += 1;
            let up = match db.read_ref(cur, ArrayId::N1).as_addr() {
                Some(t) if t.flat() < db.capacity() => t,
                // field-level check already reported this row
                _ => break,
            };
            if up == cur {
                if !db.is_headnode(cur).unwrap_or(false) {
                    out.push(Violation::HeadRootNotHeadnode {
                        at: start,
                        root: cur,
                    });
                }
                break;
            }
            if !db.is_allocated(up) {
                out.push(Violation::HeadTargetUnallocated {
                    at: cur,
                    target: up,
                });
                break;
            }
            cur = up;
        }
    }
}

/// Walk every chain segment: each headnode's main chain and each
/// subordinate chain rooted at a prop target.
fn check_segments(db: &ViewsDb, out: &mut Vec<Violation>) {
    // (segment root, head value its members must carry)
    let mut segments: Vec<(Addr, Ref)> = Vec::new();
    for a in db.allocated_iter() {
        if db.is_headnode(a).unwrap_or(false) {
            segments.push((a, Ref::addr(a).expect("in-capacity addr encodes")));
        }
        if db.scheme().has(ArrayId::S1) {
            for array in [ArrayId::S1, ArrayId::S2] {
                if let Some(root) = db.read_ref(a, array).as_addr() {
                    if db.is_allocated(root) {
                        segments.push((root, Ref::addr(a).expect("in-capacity addr encodes")));
                    }
                }
            }
        }
    }

    for (root, expected) in segments {
        let mut seen: Vec<Addr> = Vec::new();
        let mut cur = root;
        loop {
            if let Some(pos) = seen.iter().position(|&s| s == cur) {
                out.push(Violation::NextCycle {
                    root,
                    rows: seen[pos..].to_vec(),
                });
                break;
            }
            seen.push(cur);
            let found = db.read_ref(cur, ArrayId::N1);
            if found != expected {
                out.push(Violation::ForeignHead {
                    at: cur,
                    expected,
                    found,
                });
            }
            match db.read_ref(cur, ArrayId::N2).kind() {
                RefKind::Eoc => break,
                RefKind::Addr(t) if db.is_allocated(t) => cur = t,
                // bad next already reported per-field
                _ => break,
            }
        }
    }
}

fn check_reachability(db: &ViewsDb, out: &mut Vec<Violation>) {
    let mut reached: BTreeSet<u64> = BTreeSet::new();
    let mut frontier: Vec<Addr> = db.headnodes();
    for h in &frontier {
        reached.insert(h.flat());
    }
    while let Some(a) = frontier.pop() {
        let push = |t: Option<Addr>, frontier: &mut Vec<Addr>, reached: &mut BTreeSet<u64>| {
            if let Some(t) = t {
                if db.is_allocated(t) && reached.insert(t.flat()) {
                    frontier.push(t);
                }
            }
        };
        push(
            db.read_ref(a, ArrayId::N2).as_addr(),
            &mut frontier,
            &mut reached,
        );
        if db.scheme().has(ArrayId::S1) {
            push(
                db.read_ref(a, ArrayId::S1).as_addr(),
                &mut frontier,
                &mut reached,
            );
            push(
                db.read_ref(a, ArrayId::S2).as_addr(),
                &mut frontier,
                &mut reached,
            );
        }
    }
    for a in db.allocated_iter() {
        if !reached.contains(&a.flat()) {
            out.push(Violation::Orphan { at: a });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AllocationScheme;

    #[test]
    fn empty_database_is_clean() {
        let db = ViewsDb::new(AllocationScheme::Cnsm);
        assert!(check_invariants(&db).is_empty());
    }

    #[test]
    fn two_cycle_yields_exactly_one_cycle_violation_naming_both_rows() {
        let mut db = ViewsDb::new(AllocationScheme::Cnsm);
        let h = db.create_headnode().unwrap();
        let a = db.add_link(h, Ref::NULL, Ref::NULL).unwrap();
        let b = db.add_link(h, Ref::NULL, Ref::NULL).unwrap();
        // b.next back to a
        db.fabric_mut()
            .prog(b, ArrayId::N2, Ref::addr(a).unwrap().raw())
            .unwrap();
        let report = check_invariants(&db);
        let cycles: Vec<_> = report
            .iter()
            .filter(|v| matches!(v, Violation::NextCycle { .. }))
            .collect();
        assert_eq!(cycles.len(), 1);
        match cycles[0] {
            Violation::NextCycle { rows, .. } => {
                assert_eq!(rows, &vec![a, b]);
            }
            _ => unreachable!(),
        }
    }
}
