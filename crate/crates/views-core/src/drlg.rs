//! Directed recursively-labelled graphs: the exchange form a Views
//! database is built from and exported back to.
//!
//! A graph is a set of named vertices plus a list of labelled edges.
//! Label and destination of an edge may name a vertex or an external
//! literal, and both sides may carry attachments — (label, value) pairs
//! that may themselves be attached to, nesting finitely. Attachments map
//! to subordinate chains; everything else maps to headnodes and chain
//! linknodes.

use std::collections::{BTreeMap, BTreeSet};

use crate::db::ViewsDb;
use crate::error::{Error, Result};
use crate::model::{Addr, ArrayId, Ref, RefKind, Side};

/// What an edge endpoint or attachment side names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub enum DrlgRef {
    Vertex(String),
    Literal(String),
    #[default]
    Null,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DrlgAttachment {
    pub label: DrlgRef,
    pub value: DrlgRef,
    pub on_label: Vec<DrlgAttachment>,
    pub on_value: Vec<DrlgAttachment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrlgEdge {
    pub source: String,
    pub label: DrlgRef,
    pub dest: DrlgRef,
    pub on_label: Vec<DrlgAttachment>,
    pub on_dest: Vec<DrlgAttachment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Drlg {
    pub vertices: BTreeSet<String>,
    pub edges: Vec<DrlgEdge>,
}

impl Drlg {
    pub fn new() -> Self {
        Self::default()
    }

    /// The vertex set including every vertex only mentioned by an edge
    /// endpoint or attachment (labels become vertices on first use).
    pub fn implied_vertices(&self) -> BTreeSet<String> {
        let mut all = self.vertices.clone();
        let mut add = |r: &DrlgRef, all: &mut BTreeSet<String>| {
            if let DrlgRef::Vertex(name) = r {
                all.insert(name.clone());
            }
        };
        fn walk_atts(
            atts: &[DrlgAttachment],
            all: &mut BTreeSet<String>,
            add: &mut impl FnMut(&DrlgRef, &mut BTreeSet<String>),
        ) {
            for att in atts {
                add(&att.label, all);
                add(&att.value, all);
                walk_atts(&att.on_label, all, add);
                walk_atts(&att.on_value, all, add);
            }
        }
        for e in &self.edges {
            all.insert(e.source.clone());
            add(&e.label, &mut all);
            add(&e.dest, &mut all);
            walk_atts(&e.on_label, &mut all, &mut add);
            walk_atts(&e.on_dest, &mut all, &mut add);
        }
        all
    }

    /// Same graph with the implied vertices made explicit.
    pub fn normalized(&self) -> Drlg {
        Drlg {
            vertices: self.implied_vertices(),
            edges: self.edges.clone(),
        }
    }

    /// Rows a database needs to hold this graph: one headnode per implied
    /// vertex, one linknode per edge, one row per attachment.
    pub fn required_rows(&self) -> u64 {
        fn count_atts(atts: &[DrlgAttachment]) -> u64 {
            atts.iter()
                .map(|a| 1 + count_atts(&a.on_label) + count_atts(&a.on_value))
                .sum()
        }
        let att_rows: u64 = self
            .edges
            .iter()
            .map(|e| count_atts(&e.on_label) + count_atts(&e.on_dest))
            .sum();
        self.implied_vertices().len() as u64 + self.edges.len() as u64 + att_rows
    }

    /// Out-degree of a vertex (top-level edges only).
    pub fn degree(&self, vertex: &str) -> u64 {
        self.edges.iter().filter(|e| e.source == vertex).count() as u64
    }
}

impl ViewsDb {
    /// Build the graph into this database: one headnode per vertex
    /// (declared set first, in name order; mentioned-only vertices on
    /// first use), one chain linknode per edge in list order, one
    /// subordinate row per attachment. Returns the vertex-to-address map.
    pub fn import_drlg(&mut self, g: &Drlg) -> Result<BTreeMap<String, Addr>> {
        let required = g.required_rows();
        if required > self.free_rows() {
            return Err(Error::OutOfMemory {
                required,
                capacity: self.capacity(),
            });
        }

        let mut map: BTreeMap<String, Addr> = BTreeMap::new();
        for name in &g.vertices {
            let h = self.create_headnode()?;
            map.insert(name.clone(), h);
        }

        for edge in &g.edges {
            let src = self.vertex_addr(&mut map, &edge.source)?;
            let label = self.resolve_drlg_ref(&mut map, &edge.label)?;
            let dest = self.resolve_drlg_ref(&mut map, &edge.dest)?;
            let row = self.add_link(src, label, dest)?;
            self.import_attachments(&mut map, row, Side::Edge, &edge.on_label)?;
            self.import_attachments(&mut map, row, Side::Dest, &edge.on_dest)?;
        }
        Ok(map)
    }

    fn import_attachments(
        &mut self,
        map: &mut BTreeMap<String, Addr>,
        parent: Addr,
        side: Side,
        atts: &[DrlgAttachment],
    ) -> Result<()> {
        for att in atts {
            let label = self.resolve_drlg_ref(map, &att.label)?;
            let value = self.resolve_drlg_ref(map, &att.value)?;
            let row = self.add_subordinate(parent, side, label, value)?;
            self.import_attachments(map, row, Side::Edge, &att.on_label)?;
            self.import_attachments(map, row, Side::Dest, &att.on_value)?;
        }
        Ok(())
    }

    fn vertex_addr(&mut self, map: &mut BTreeMap<String, Addr>, name: &str) -> Result<Addr> {
        if let Some(&a) = map.get(name) {
            return Ok(a);
        }
        let h = self.create_headnode()?;
        map.insert(name.to_owned(), h);
        Ok(h)
    }

    fn resolve_drlg_ref(&mut self, map: &mut BTreeMap<String, Addr>, r: &DrlgRef) -> Result<Ref> {
        match r {
            DrlgRef::Null => Ok(Ref::NULL),
            DrlgRef::Literal(s) => {
                let ix = self.literals_mut().intern(s);
                Ref::literal(ix)
            }
            DrlgRef::Vertex(name) => {
                let a = self.vertex_addr(map, name)?;
                Ref::addr(a)
            }
        }
    }

    /// Read the whole database back as a graph. Vertices are named after
    /// their headnode's rank in ascending address order (zero-padded so
    /// name order equals address order); literals come back as literal
    /// leaves. With that naming, export-then-import is idempotent. Fails
    /// when the invariant checker reports anything.
    pub fn export_drlg(&self) -> Result<Drlg> {
        let violations = crate::check::check_invariants(self);
        if !violations.is_empty() {
            return Err(Error::InvariantViolations {
                count: violations.len(),
            });
        }
        let names: BTreeMap<Addr, String> = self
            .headnodes()
            .into_iter()
            .enumerate()
            .map(|(rank, h)| (h, format!("v{rank:06}")))
            .collect();
        let mut g = Drlg::new();
        for (&h, name) in &names {
            g.vertices.insert(name.clone());
            let rows = self.chain_rows(h)?;
            for &row in rows.iter().skip(1) {
                g.edges.push(DrlgEdge {
                    source: name.clone(),
                    label: self.export_ref(&names, self.read_ref(row, ArrayId::C1))?,
                    dest: self.export_ref(&names, self.read_ref(row, ArrayId::C2))?,
                    on_label: self.export_attachments(&names, row, Side::Edge)?,
                    on_dest: self.export_attachments(&names, row, Side::Dest)?,
                });
            }
        }
        Ok(g)
    }

    fn export_attachments(
        &self,
        names: &BTreeMap<Addr, String>,
        row: Addr,
        side: Side,
    ) -> Result<Vec<DrlgAttachment>> {
        if !self.scheme().has(side.prop_array()) {
            return Ok(Vec::new());
        }
        let root = match self.read_ref(row, side.prop_array()).kind() {
            RefKind::Null => return Ok(Vec::new()),
            RefKind::Addr(a) => a,
            _ => {
                return Err(Error::CorruptStructure {
                    at: row,
                    reason: "prop field is neither NULL nor an address",
                })
            }
        };
        let mut out = Vec::new();
        for sub in self.chain_rows(root)? {
            out.push(DrlgAttachment {
                label: self.export_ref(names, self.read_ref(sub, ArrayId::C1))?,
                value: self.export_ref(names, self.read_ref(sub, ArrayId::C2))?,
                on_label: self.export_attachments(names, sub, Side::Edge)?,
                on_value: self.export_attachments(names, sub, Side::Dest)?,
            });
        }
        Ok(out)
    }

    fn export_ref(&self, names: &BTreeMap<Addr, String>, r: Ref) -> Result<DrlgRef> {
        match r.kind() {
            RefKind::Null => Ok(DrlgRef::Null),
            RefKind::Addr(a) => match names.get(&a) {
                Some(name) => Ok(DrlgRef::Vertex(name.clone())),
                None => Err(Error::CorruptStructure {
                    at: a,
                    reason: "primID target is not a headnode",
                }),
            },
            RefKind::Literal(i) => match self.literals().get(i) {
                Some(s) => Ok(DrlgRef::Literal(s.to_owned())),
                None => Err(Error::CorruptStructure {
                    at: Addr(0),
                    reason: "literal index outside the literal table",
                }),
            },
            RefKind::Eoc => Err(Error::CorruptStructure {
                at: Addr(0),
                reason: "EOC stored as a primID",
            }),
        }
    }
}
