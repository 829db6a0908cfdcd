//! Canonical `.views` serializer.
//!
//! Layout: every headnode as a `head` statement in ascending address
//! order, then `univ` statements for headnodes with non-default
//! universals, then each chain's links in chain order with subordinate
//! blocks nested. Literals are always written inline as strings; `lit`
//! declarations never appear in canonical output. Parsing a canonical
//! document reproduces it byte for byte, because the parser assigns
//! addresses lowest-free-first in statement order.

use std::collections::{BTreeMap, BTreeSet};

use crate::db::ViewsDb;
use crate::error::{Error, Result};
use crate::model::{Addr, ArrayId, Ref, RefKind, Side};
use crate::slipnet::{HeadUniversals, LinkUniversals};

use super::SymbolTable;

pub fn serialize(db: &ViewsDb, symbols: &SymbolTable) -> Result<String> {
    let violations = crate::check::check_invariants(db);
    if !violations.is_empty() {
        return Err(Error::InvariantViolations {
            count: violations.len(),
        });
    }

    let heads = db.headnodes();
    let names = assign_names(&heads, symbols);
    let mut out = String::new();

    for h in &heads {
        out.push_str("head ");
        out.push_str(&names[h]);
        out.push('\n');
    }

    if db.scheme().has(ArrayId::M1) {
        for h in &heads {
            let word = db.fabric().aar(*h, ArrayId::M1)?;
            if word == 0 {
                continue;
            }
            let u = HeadUniversals::unpack(word);
            out.push_str("univ ");
            out.push_str(&names[h]);
            out.push_str(" [");
            let mut first = true;
            if u.conceptual_depth != 0.0 {
                push_attr(&mut out, &mut first, "depth", u.conceptual_depth);
            }
            if u.activ != 0.0 {
                push_attr(&mut out, &mut first, "activ", u.activ);
            }
            if u.activ_lock {
                push_attr(&mut out, &mut first, "alock", 1.0);
            }
            out.push_str("]\n");
        }
    }

    for h in &heads {
        let rows = db.chain_rows(*h)?;
        for &row in rows.iter().skip(1) {
            let prefix = format!("link {}:", names[h]);
            write_row(db, &names, &mut out, &prefix, row, 0)?;
        }
    }

    Ok(out)
}

/// Symbol-table names where present; `n<flat>` (made collision-free)
/// otherwise.
fn assign_names(heads: &[Addr], symbols: &SymbolTable) -> BTreeMap<Addr, String> {
    let mut taken: BTreeSet<String> = symbols.iter().map(|(n, _)| n.to_owned()).collect();
    let mut names = BTreeMap::new();
    for &h in heads {
        let name = match symbols.name_of(h) {
            Some(n) => n.to_owned(),
            None => {
                let mut candidate = format!("n{}", h.flat());
                while taken.contains(&candidate) {
                    candidate.push('x');
                }
                taken.insert(candidate.clone());
                candidate
            }
        };
        names.insert(h, name);
    }
    names
}

/// One link or sub statement: `<prefix> <ref>, <ref> [attrs] { subs }`.
fn write_row(
    db: &ViewsDb,
    names: &BTreeMap<Addr, String>,
    out: &mut String,
    prefix: &str,
    row: Addr,
    indent: usize,
) -> Result<()> {
    for _ in 0..indent {
        out.push_str("  ");
    }
    out.push_str(prefix);
    out.push(' ');
    render_ref(db, names, out, db.read_ref(row, ArrayId::C1))?;
    out.push_str(", ");
    render_ref(db, names, out, db.read_ref(row, ArrayId::C2))?;
    render_link_attrs(db, out, row)?;

    let sub1 = prop_root(db, row, Side::Edge)?;
    let sub2 = prop_root(db, row, Side::Dest)?;
    if sub1.is_some() || sub2.is_some() {
        out.push_str(" {\n");
        for (keyword, root) in [("prop1:", sub1), ("prop2:", sub2)] {
            let Some(root) = root else { continue };
            for sub in db.chain_rows(root)? {
                write_row(db, names, out, keyword, sub, indent + 1)?;
            }
        }
        for _ in 0..indent {
            out.push_str("  ");
        }
        out.push('}');
    }
    out.push('\n');
    Ok(())
}

fn prop_root(db: &ViewsDb, row: Addr, side: Side) -> Result<Option<Addr>> {
    if !db.scheme().has(side.prop_array()) {
        return Ok(None);
    }
    match db.read_ref(row, side.prop_array()).kind() {
        RefKind::Null => Ok(None),
        RefKind::Addr(a) => Ok(Some(a)),
        _ => Err(Error::CorruptStructure {
            at: row,
            reason: "prop field is neither NULL nor an address",
        }),
    }
}

fn render_link_attrs(db: &ViewsDb, out: &mut String, row: Addr) -> Result<()> {
    if !db.scheme().has(ArrayId::M1) {
        return Ok(());
    }
    let edge = LinkUniversals::unpack(db.fabric().aar(row, ArrayId::M1)?);
    let dest = LinkUniversals::unpack(db.fabric().aar(row, ArrayId::M2)?);
    if edge == LinkUniversals::default() && dest == LinkUniversals::default() {
        return Ok(());
    }
    out.push_str(" [");
    let mut first = true;
    if edge.conductance != 0.0 {
        push_attr(out, &mut first, "cond1", edge.conductance);
    }
    if edge.slip_lock {
        push_attr(out, &mut first, "slip1", 1.0);
    }
    if dest.conductance != 0.0 {
        push_attr(out, &mut first, "cond2", dest.conductance);
    }
    if dest.slip_lock {
        push_attr(out, &mut first, "slip2", 1.0);
    }
    out.push(']');
    Ok(())
}

fn push_attr(out: &mut String, first: &mut bool, key: &str, value: f64) {
    if !*first {
        out.push(' ');
    }
    *first = false;
    out.push_str(key);
    out.push('=');
    out.push_str(&format!("{value}"));
}

fn render_ref(
    db: &ViewsDb,
    names: &BTreeMap<Addr, String>,
    out: &mut String,
    r: Ref,
) -> Result<()> {
    match r.kind() {
        RefKind::Null => out.push('_'),
        RefKind::Addr(a) => match names.get(&a) {
            Some(name) => out.push_str(name),
            None => {
                return Err(Error::CorruptStructure {
                    at: a,
                    reason: "primID target is not a headnode",
                })
            }
        },
        RefKind::Literal(i) => {
            let s = db.literals().get(i).ok_or(Error::CorruptStructure {
                at: Addr(0),
                reason: "literal index outside the literal table",
            })?;
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    '\r' => out.push_str("\\r"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        RefKind::Eoc => {
            return Err(Error::CorruptStructure {
                at: Addr(0),
                reason: "EOC stored as a primID",
            })
        }
    }
    Ok(())
}
