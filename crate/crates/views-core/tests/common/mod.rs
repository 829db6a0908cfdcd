#![allow(dead_code)]

//! Shared helpers for the integration suites: a seeded random graph
//! generator and an exhaustive labelled-graph isomorphism check used as
//! the round-trip oracle.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use rand::Rng;
use views_core::drlg::{Drlg, DrlgAttachment, DrlgEdge, DrlgRef};

// ---------------------------------------------------------------------------
// Random DRLG generation
// ---------------------------------------------------------------------------

const LITERAL_POOL: &[&str] = &[
    "red", "blue", "heavy", "fast", "north", "cold", "old", "rare", "flat", "deep",
];

pub struct DrlgParams {
    pub max_vertices: usize,
    pub max_degree: usize,
    pub max_nesting: usize,
}

impl Default for DrlgParams {
    fn default() -> Self {
        DrlgParams {
            max_vertices: 30,
            max_degree: 8,
            max_nesting: 4,
        }
    }
}

pub fn random_drlg(rng: &mut impl Rng, params: &DrlgParams) -> Drlg {
    let n = rng.random_range(1..=params.max_vertices);
    let names: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
    let mut g = Drlg::new();
    for name in &names {
        g.vertices.insert(name.clone());
    }
    for name in &names {
        let degree = rng.random_range(0..=params.max_degree);
        for _ in 0..degree {
            let edge = DrlgEdge {
                source: name.clone(),
                label: random_ref(rng, &names),
                dest: random_ref(rng, &names),
                on_label: random_attachments(rng, &names, params.max_nesting - 1, 0.25),
                on_dest: random_attachments(rng, &names, params.max_nesting - 1, 0.25),
            };
            g.edges.push(edge);
        }
    }
    g
}

fn random_ref(rng: &mut impl Rng, names: &[String]) -> DrlgRef {
    match rng.random_range(0..20) {
        0 => DrlgRef::Null,
        1..=9 => DrlgRef::Literal(LITERAL_POOL[rng.random_range(0..LITERAL_POOL.len())].into()),
        _ => DrlgRef::Vertex(names[rng.random_range(0..names.len())].clone()),
    }
}

fn random_attachments(
    rng: &mut impl Rng,
    names: &[String],
    depth_left: usize,
    p: f64,
) -> Vec<DrlgAttachment> {
    if depth_left == 0 || !rng.random_bool(p) {
        return Vec::new();
    }
    let count = rng.random_range(1..=2);
    (0..count)
        .map(|_| DrlgAttachment {
            label: random_ref(rng, names),
            value: random_ref(rng, names),
            on_label: random_attachments(rng, names, depth_left - 1, p / 2.0),
            on_value: random_attachments(rng, names, depth_left - 1, p / 2.0),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Isomorphism oracle
// ---------------------------------------------------------------------------
//
// Two graphs are taken as isomorphic when a vertex bijection maps one onto
// the other preserving, per source vertex, the ordered list of its edges
// (labels, destinations and nested attachments). Ordered comparison is the
// right notion here: chains preserve insertion order, so a faithful round
// trip must keep per-source edge order too.
//
// The search runs colour refinement first, then backtracks over
// colour-compatible candidates with forced propagation through referenced
// vertices. A final full check validates the complete mapping.

#[derive(Clone)]
struct Normal {
    vertices: Vec<String>,
    index: BTreeMap<String, usize>,
    // per vertex, its edges in list order
    edges: Vec<Vec<DrlgEdge>>,
}

fn normalize(g: &Drlg) -> Normal {
    let norm = g.normalized();
    let vertices: Vec<String> = norm.vertices.iter().cloned().collect();
    let index: BTreeMap<String, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    let mut edges: Vec<Vec<DrlgEdge>> = vec![Vec::new(); vertices.len()];
    for e in &norm.edges {
        edges[index[&e.source]].push(e.clone());
    }
    Normal {
        vertices,
        index,
        edges,
    }
}

fn hash_of(x: impl Hash) -> u64 {
    let mut h = DefaultHasher::new();
    x.hash(&mut h);
    h.finish()
}

/// Structure of a ref with vertex identity blanked out.
fn ref_shape(r: &DrlgRef) -> u64 {
    match r {
        DrlgRef::Null => hash_of(("null",)),
        DrlgRef::Literal(s) => hash_of(("lit", s)),
        DrlgRef::Vertex(_) => hash_of(("vtx",)),
    }
}

fn att_shape(atts: &[DrlgAttachment]) -> u64 {
    let items: Vec<(u64, u64, u64, u64)> = atts
        .iter()
        .map(|a| {
            (
                ref_shape(&a.label),
                ref_shape(&a.value),
                att_shape(&a.on_label),
                att_shape(&a.on_value),
            )
        })
        .collect();
    hash_of(items)
}

fn refine_colors(n: &Normal, rounds: usize) -> Vec<u64> {
    let ix = |r: &DrlgRef| -> Option<usize> {
        match r {
            DrlgRef::Vertex(v) => Some(n.index[v]),
            _ => None,
        }
    };
    let mut colors: Vec<u64> = n
        .vertices
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let shape: Vec<(u64, u64, u64, u64)> = n.edges[i]
                .iter()
                .map(|e| {
                    (
                        ref_shape(&e.label),
                        ref_shape(&e.dest),
                        att_shape(&e.on_label),
                        att_shape(&e.on_dest),
                    )
                })
                .collect();
            hash_of(("init", shape))
        })
        .collect();

    for _ in 0..rounds {
        let mut incoming: Vec<Vec<(u64, u64)>> = vec![Vec::new(); n.vertices.len()];
        for (src, list) in n.edges.iter().enumerate() {
            for (pos, e) in list.iter().enumerate() {
                if let Some(t) = ix(&e.label) {
                    incoming[t].push((hash_of(("as-label", pos, colors[src])), 0));
                }
                if let Some(t) = ix(&e.dest) {
                    incoming[t].push((hash_of(("as-dest", pos, colors[src])), 1));
                }
            }
        }
        let next: Vec<u64> = (0..n.vertices.len())
            .map(|i| {
                let out: Vec<u64> = n.edges[i]
                    .iter()
                    .map(|e| {
                        hash_of((
                            e.label.clone().map_vertex(|v| colors[n.index[&v]]),
                            e.dest.clone().map_vertex(|v| colors[n.index[&v]]),
                        ))
                    })
                    .collect();
                let mut inc = incoming[i].clone();
                inc.sort_unstable();
                hash_of((colors[i], out, inc))
            })
            .collect();
        if next == colors {
            break;
        }
        colors = next;
    }
    colors
}

/// Replace a vertex name by a numeric colour for hashing.
trait MapVertex {
    fn map_vertex(self, f: impl Fn(String) -> u64) -> (u8, u64, String);
}

impl MapVertex for DrlgRef {
    fn map_vertex(self, f: impl Fn(String) -> u64) -> (u8, u64, String) {
        match self {
            DrlgRef::Null => (0, 0, String::new()),
            DrlgRef::Literal(s) => (1, 0, s),
            DrlgRef::Vertex(v) => (2, f(v), String::new()),
        }
    }
}

struct Search<'a> {
    a: &'a Normal,
    b: &'a Normal,
    colors_a: Vec<u64>,
    colors_b: Vec<u64>,
    forward: Vec<Option<usize>>,
    backward: Vec<Option<usize>>,
}

impl Search<'_> {
    /// Try to pin `x -> y` and everything that choice forces.
    /// On failure the caller rolls back via the returned trail.
    fn assign(&mut self, x: usize, y: usize, trail: &mut Vec<usize>) -> bool {
        match (self.forward[x], self.backward[y]) {
            (Some(fx), _) => return fx == y,
            (None, Some(_)) => return false,
            (None, None) => {}
        }
        if self.colors_a[x] != self.colors_b[y] {
            return false;
        }
        self.forward[x] = Some(y);
        self.backward[y] = Some(x);
        trail.push(x);

        let ea = &self.a.edges[x];
        let eb = &self.b.edges[y];
        if ea.len() != eb.len() {
            return false;
        }
        for (p, q) in ea.iter().zip(eb) {
            if !self.match_ref(&p.label, &q.label, trail)
                || !self.match_ref(&p.dest, &q.dest, trail)
                || !self.match_atts(&p.on_label, &q.on_label, trail)
                || !self.match_atts(&p.on_dest, &q.on_dest, trail)
            {
                return false;
            }
        }
        true
    }

    fn match_ref(&mut self, p: &DrlgRef, q: &DrlgRef, trail: &mut Vec<usize>) -> bool {
        match (p, q) {
            (DrlgRef::Null, DrlgRef::Null) => true,
            (DrlgRef::Literal(s), DrlgRef::Literal(t)) => s == t,
            (DrlgRef::Vertex(v), DrlgRef::Vertex(w)) => {
                let x = self.a.index[v];
                let y = self.b.index[w];
                self.assign(x, y, trail)
            }
            _ => false,
        }
    }

    fn match_atts(
        &mut self,
        ps: &[DrlgAttachment],
        qs: &[DrlgAttachment],
        trail: &mut Vec<usize>,
    ) -> bool {
        if ps.len() != qs.len() {
            return false;
        }
        for (p, q) in ps.iter().zip(qs) {
            if !self.match_ref(&p.label, &q.label, trail)
                || !self.match_ref(&p.value, &q.value, trail)
                || !self.match_atts(&p.on_label, &q.on_label, trail)
                || !self.match_atts(&p.on_value, &q.on_value, trail)
            {
                return false;
            }
        }
        true
    }

    fn rollback(&mut self, trail: &mut Vec<usize>, to: usize) {
        while trail.len() > to {
            let x = trail.pop().unwrap();
            let y = self.forward[x].take().unwrap();
            self.backward[y] = None;
        }
    }

    fn solve(&mut self, order: &[usize]) -> bool {
        let Some(&x) = order.iter().find(|&&x| self.forward[x].is_none()) else {
            return true;
        };
        let candidates: Vec<usize> = (0..self.b.vertices.len())
            .filter(|&y| self.backward[y].is_none() && self.colors_b[y] == self.colors_a[x])
            .collect();
        for y in candidates {
            let mut trail = Vec::new();
            if self.assign(x, y, &mut trail) && self.solve(order) {
                return true;
            }
            self.rollback(&mut trail, 0);
        }
        false
    }
}

pub fn isomorphic(a: &Drlg, b: &Drlg) -> bool {
    let na = normalize(a);
    let nb = normalize(b);
    if na.vertices.len() != nb.vertices.len() {
        return false;
    }
    let total_a: usize = na.edges.iter().map(Vec::len).sum();
    let total_b: usize = nb.edges.iter().map(Vec::len).sum();
    if total_a != total_b {
        return false;
    }
    let rounds = 2 + na.vertices.len().ilog2() as usize;
    let colors_a = refine_colors(&na, rounds);
    let colors_b = refine_colors(&nb, rounds);

    let mut hist_a: BTreeMap<u64, usize> = BTreeMap::new();
    let mut hist_b: BTreeMap<u64, usize> = BTreeMap::new();
    for &c in &colors_a {
        *hist_a.entry(c).or_default() += 1;
    }
    for &c in &colors_b {
        *hist_b.entry(c).or_default() += 1;
    }
    if hist_a != hist_b {
        return false;
    }

    // search rarest colour classes first
    let mut order: Vec<usize> = (0..na.vertices.len()).collect();
    order.sort_by_key(|&i| (hist_a[&colors_a[i]], colors_a[i], i));

    let mut search = Search {
        forward: vec![None; na.vertices.len()],
        backward: vec![None; nb.vertices.len()],
        a: &na,
        b: &nb,
        colors_a,
        colors_b,
    };
    search.solve(&order)
}

#[allow(dead_code)]
pub fn vertex_set(g: &Drlg) -> BTreeSet<String> {
    g.implied_vertices()
}

// ---------------------------------------------------------------------------
// Random slipnets
// ---------------------------------------------------------------------------

use views_core::slipnet::{ConceptSpec, HeadUniversals, LinkUniversals, SliplinkSpec, SlipnetSpec};

pub fn random_slipnet_spec(rng: &mut impl Rng, concepts: usize, links: usize) -> SlipnetSpec {
    let grid = |raw: u64| raw as f64 / 32768.0;
    let concept_specs: Vec<ConceptSpec> = (0..concepts)
        .map(|i| ConceptSpec {
            name: format!("c{i}"),
            universals: HeadUniversals {
                conceptual_depth: grid(rng.random_range(0..=32768)),
                activ: rng.random_range(0..=200) as f64,
                activ_lock: rng.random_bool(0.2),
            },
        })
        .collect();
    fn pick(rng: &mut impl Rng, n: usize) -> String {
        format!("c{}", rng.random_range(0..n))
    }
    let links = (0..links)
        .map(|_| SliplinkSpec {
            source: pick(rng, concepts),
            label: if rng.random_bool(0.8) {
                Some(pick(rng, concepts))
            } else {
                None
            },
            dest: pick(rng, concepts),
            edge_side: LinkUniversals {
                conductance: grid(rng.random_range(0..=32768)),
                slip_lock: rng.random_bool(0.3),
            },
            dest_side: LinkUniversals {
                conductance: grid(rng.random_range(0..=32768)),
                slip_lock: rng.random_bool(0.3),
            },
        })
        .collect();
    SlipnetSpec {
        concepts: concept_specs,
        links,
    }
}
