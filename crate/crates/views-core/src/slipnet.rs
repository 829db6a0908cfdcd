//! Slipnet layer: concept-activation bookkeeping packed into the M arrays,
//! synchronous activation propagation, and slippage-candidate scanning.
//!
//! # Word layouts
//!
//! Scalars use binary fixed point. Unit-interval values (conceptual depth,
//! conductance) are Q1.15 — sixteen bits, step 2⁻¹⁵, with both 0 and 1
//! exactly representable. Activation is Q16.16 in 32 bits, clamped to
//! [0, 32767]. Packing and unpacking round-trip bit-exactly on the grid.
//!
//! Headnode M1 word:
//!
//! ```text
//! bits  0..32   activ             Q16.16
//! bits 32..48   conceptual depth  Q1.15
//! bit  48       activ lock
//! bits 49..64   reserved, zero
//! ```
//!
//! Linknode M1 (edge side) and M2 (destination side) words:
//!
//! ```text
//! bits  0..16   conductance       Q1.15
//! bit  16       slip lock
//! bits 17..64   reserved, zero
//! ```
//!
//! # Propagation
//!
//! One step on linknode `a` targets the edge headnode `E = primID1(a)`:
//!
//! ```text
//! if !E.activ_lock:
//!     E.activ' = E.activ * E.conceptual_depth
//!              + activ(head(a)) * conductance(a, edge side)
//! ```
//!
//! [`propagate_all`] evaluates every linknode against a frozen snapshot of
//! the activations, combines multiple updates per target by applying the
//! decay once and summing the contribution terms in ascending source-row
//! order, then writes all results at once. The outcome is therefore
//! independent of enumeration order, bit for bit.
//!
//! Slippage only ever touches runtime state, never the arrays: when an
//! edge headnode's activation exceeds the threshold and the destination
//! side is not slip-locked, the destination concept is recorded as a
//! slippage candidate of the chain's source concept.

use std::collections::BTreeMap;

use crate::db::ViewsDb;
use crate::error::{Error, Result};
use crate::model::{Addr, AllocationScheme, ArrayId, Geometry, Ref, Side};

/// Hard ceiling on activation values.
pub const ACTIV_MAX: f64 = 32767.0;

const Q15_ONE: f64 = 32768.0;
const Q16_ONE: f64 = 65536.0;

const ACTIV_MASK: u64 = 0xFFFF_FFFF;
const DEPTH_SHIFT: u32 = 32;
const DEPTH_MASK: u64 = 0xFFFF << DEPTH_SHIFT;
const ALOCK_BIT: u64 = 1 << 48;
const COND_MASK: u64 = 0xFFFF;
const SLOCK_BIT: u64 = 1 << 16;

fn q15_encode(value: f64, what: &'static str) -> Result<u64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::BadUniversal { field: what, value });
    }
    Ok((value * Q15_ONE).round() as u64)
}

fn q15_decode(raw: u64) -> f64 {
    raw as f64 / Q15_ONE
}

fn q16_encode(value: f64, what: &'static str) -> Result<u64> {
    if !(0.0..=ACTIV_MAX).contains(&value) {
        return Err(Error::BadUniversal { field: what, value });
    }
    Ok((value * Q16_ONE).round() as u64)
}

fn q16_decode(raw: u64) -> f64 {
    raw as f64 / Q16_ONE
}

/// Project a value onto the Q16.16 activation grid, clamped to range.
pub fn quantize_activ(value: f64) -> f64 {
    q16_decode((value.clamp(0.0, ACTIV_MAX) * Q16_ONE).round() as u64)
}

/// Per-headnode universals, stored in the headnode's M1 word.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HeadUniversals {
    pub conceptual_depth: f64,
    pub activ: f64,
    pub activ_lock: bool,
}

impl HeadUniversals {
    pub fn pack(&self) -> Result<u64> {
        let activ = q16_encode(self.activ, "activ")?;
        let depth = q15_encode(self.conceptual_depth, "conceptual depth")?;
        let lock = if self.activ_lock { ALOCK_BIT } else { 0 };
        Ok(activ | (depth << DEPTH_SHIFT) | lock)
    }

    pub fn unpack(word: u64) -> HeadUniversals {
        HeadUniversals {
            activ: q16_decode(word & ACTIV_MASK),
            conceptual_depth: q15_decode((word & DEPTH_MASK) >> DEPTH_SHIFT),
            activ_lock: word & ALOCK_BIT != 0,
        }
    }
}

/// Per-side universals of a linknode, stored in M1 (edge) or M2 (dest).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkUniversals {
    pub conductance: f64,
    pub slip_lock: bool,
}

impl LinkUniversals {
    pub fn pack(&self) -> Result<u64> {
        let cond = q15_encode(self.conductance, "conductance")?;
        let lock = if self.slip_lock { SLOCK_BIT } else { 0 };
        Ok(cond | lock)
    }

    pub fn unpack(word: u64) -> LinkUniversals {
        LinkUniversals {
            conductance: q15_decode(word & COND_MASK),
            slip_lock: word & SLOCK_BIT != 0,
        }
    }
}

/// Runtime slippage bookkeeping. Candidate lists live here, outside the
/// arrays; the arrays only hold the packed universals.
#[derive(Debug, Clone, PartialEq)]
pub struct SlipnetState {
    pub threshold: f64,
    slipping_from: BTreeMap<Addr, Vec<Addr>>,
}

impl SlipnetState {
    pub fn new(threshold: f64) -> Self {
        SlipnetState {
            threshold,
            slipping_from: BTreeMap::new(),
        }
    }

    /// Concepts the given concept may slip to, in discovery order.
    pub fn slipping_from(&self, head: Addr) -> &[Addr] {
        self.slipping_from.get(&head).map_or(&[], Vec::as_slice)
    }

    pub fn all_candidates(&self) -> &BTreeMap<Addr, Vec<Addr>> {
        &self.slipping_from
    }

    fn record(&mut self, owner: Addr, candidate: Addr) -> bool {
        let list = self.slipping_from.entry(owner).or_default();
        if list.contains(&candidate) {
            false
        } else {
            list.push(candidate);
            true
        }
    }
}

/// An activation update computed but not yet applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingUpdate {
    pub target: Addr,
    pub new_activ: f64,
}

fn require_m_arrays(db: &ViewsDb) -> Result<()> {
    if db.scheme().has(ArrayId::M1) {
        Ok(())
    } else {
        Err(Error::ArrayAbsent {
            array: ArrayId::M1,
            scheme: db.scheme(),
        })
    }
}

pub fn head_universals(db: &ViewsDb, h: Addr) -> Result<HeadUniversals> {
    require_m_arrays(db)?;
    db.require_allocated(h)?;
    Ok(HeadUniversals::unpack(db.fabric().aar(h, ArrayId::M1)?))
}

pub fn set_head_universals(db: &mut ViewsDb, h: Addr, u: &HeadUniversals) -> Result<()> {
    require_m_arrays(db)?;
    db.require_allocated(h)?;
    let word = u.pack()?;
    db.fabric_mut().prog(h, ArrayId::M1, word)
}

pub fn link_universals(db: &ViewsDb, a: Addr, side: Side) -> Result<LinkUniversals> {
    require_m_arrays(db)?;
    db.require_allocated(a)?;
    Ok(LinkUniversals::unpack(
        db.fabric().aar(a, side.misc_array())?,
    ))
}

pub fn set_link_universals(
    db: &mut ViewsDb,
    a: Addr,
    side: Side,
    u: &LinkUniversals,
) -> Result<()> {
    require_m_arrays(db)?;
    db.require_allocated(a)?;
    let word = u.pack()?;
    db.fabric_mut().prog(a, side.misc_array(), word)
}

/// Evaluate one propagation step for linknode `a` without applying it.
///
/// Returns `None` when there is nothing to do: primID1 is NULL or a
/// literal, or the edge headnode is activation-locked.
pub fn propagate_step(db: &ViewsDb, a: Addr) -> Result<Option<PendingUpdate>> {
    require_m_arrays(db)?;
    db.require_allocated(a)?;
    let Some(edge_head) = db.linknode(a)?.prim_id1.as_addr() else {
        return Ok(None);
    };
    let target = head_universals(db, edge_head)?;
    if target.activ_lock {
        return Ok(None);
    }
    let root = db.fabric().head(a)?;
    let root_activ = head_universals(db, root)?.activ;
    let conductance = link_universals(db, a, Side::Edge)?.conductance;
    let new_activ =
        quantize_activ(target.activ * target.conceptual_depth + root_activ * conductance);
    Ok(Some(PendingUpdate {
        target: edge_head,
        new_activ,
    }))
}

/// Apply one pending update to the target's activation field.
pub fn apply_update(db: &mut ViewsDb, update: &PendingUpdate) -> Result<()> {
    let mut u = head_universals(db, update.target)?;
    u.activ = quantize_activ(update.new_activ);
    set_head_universals(db, update.target, &u)
}

/// One synchronous propagation sweep over every allocated linknode, in
/// ascending address order. Returns how many headnodes changed.
pub fn propagate_all(db: &mut ViewsDb) -> Result<usize> {
    let order: Vec<Addr> = db.allocated_iter().collect();
    propagate_all_ordered(db, &order)
}

/// As [`propagate_all`], but evaluating the rows in the given order. The
/// order must enumerate each row at most once; the result is bit-identical
/// for every permutation of the same row set.
pub fn propagate_all_ordered(db: &mut ViewsDb, order: &[Addr]) -> Result<usize> {
    require_m_arrays(db)?;

    struct Target {
        base: HeadUniversals,
        contribs: BTreeMap<Addr, f64>,
    }

    // snapshot phase: pure reads against the unmodified fabric
    let mut targets: BTreeMap<Addr, Target> = BTreeMap::new();
    for &a in order {
        db.require_allocated(a)?;
        let Some(edge_head) = db.linknode(a)?.prim_id1.as_addr() else {
            continue;
        };
        let base = head_universals(db, edge_head)?;
        if base.activ_lock {
            continue;
        }
        let root = db.fabric().head(a)?;
        let root_activ = head_universals(db, root)?.activ;
        let conductance = link_universals(db, a, Side::Edge)?.conductance;
        targets
            .entry(edge_head)
            .or_insert_with(|| Target {
                base,
                contribs: BTreeMap::new(),
            })
            .contribs
            .insert(a, root_activ * conductance);
    }

    // apply phase: decay once per target, contributions summed in
    // ascending source order
    let mut changed = 0;
    for (addr, target) in targets {
        let mut sum = target.base.activ * target.base.conceptual_depth;
        for contrib in target.contribs.values() {
            sum += contrib;
        }
        let mut u = target.base;
        u.activ = quantize_activ(sum);
        if u.activ != target.base.activ {
            changed += 1;
        }
        set_head_universals(db, addr, &u)?;
    }
    Ok(changed)
}

/// Scan every linknode for slippage: an edge headnode hotter than the
/// threshold, with the destination side not slip-locked, makes the
/// destination concept a candidate of the chain's source concept.
/// Returns only the candidates newly recorded by this scan.
pub fn slippage_scan(db: &ViewsDb, state: &mut SlipnetState) -> Result<BTreeMap<Addr, Vec<Addr>>> {
    require_m_arrays(db)?;
    let mut additions: BTreeMap<Addr, Vec<Addr>> = BTreeMap::new();
    for a in db.allocated_iter() {
        let node = db.linknode(a)?;
        let Some(edge_head) = node.prim_id1.as_addr() else {
            continue;
        };
        if head_universals(db, edge_head)?.activ <= state.threshold {
            continue;
        }
        if link_universals(db, a, Side::Dest)?.slip_lock {
            continue;
        }
        let Some(dest) = node.prim_id2.as_addr() else {
            continue;
        };
        let candidate = db.fabric().head(dest)?;
        let owner = db.fabric().head(a)?;
        if state.record(owner, candidate) {
            additions.entry(owner).or_default().push(candidate);
        }
    }
    Ok(additions)
}

/// One concept of a slipnet description.
#[derive(Debug, Clone, Default)]
pub struct ConceptSpec {
    pub name: String,
    pub universals: HeadUniversals,
}

/// One labelled relation. A `None` label gets a fresh anonymous label
/// headnode of its own; a named label shares one headnode per name.
#[derive(Debug, Clone, Default)]
pub struct SliplinkSpec {
    pub source: String,
    pub label: Option<String>,
    pub dest: String,
    pub edge_side: LinkUniversals,
    pub dest_side: LinkUniversals,
}

#[derive(Debug, Clone, Default)]
pub struct SlipnetSpec {
    pub concepts: Vec<ConceptSpec>,
    pub links: Vec<SliplinkSpec>,
}

impl SlipnetSpec {
    /// Rows the net occupies: one headnode per concept, one linknode per
    /// sliplink, one headnode per distinct non-concept label, one per
    /// unlabelled link.
    pub fn required_rows(&self) -> u64 {
        let concept_names: std::collections::BTreeSet<&str> =
            self.concepts.iter().map(|c| c.name.as_str()).collect();
        let extra_labels: std::collections::BTreeSet<&str> = self
            .links
            .iter()
            .filter_map(|l| l.label.as_deref())
            .filter(|name| !concept_names.contains(name))
            .collect();
        let anonymous = self.links.iter().filter(|l| l.label.is_none()).count();
        (self.concepts.len() + self.links.len() + extra_labels.len() + anonymous) as u64
    }
}

/// A built slipnet: the database, its runtime state, and the name map of
/// every named headnode (concepts and shared labels).
#[derive(Debug, Clone)]
pub struct BuiltSlipnet {
    pub db: ViewsDb,
    pub state: SlipnetState,
    pub concepts: BTreeMap<String, Addr>,
}

pub fn build_slipnet(spec: &SlipnetSpec, threshold: f64) -> Result<BuiltSlipnet> {
    build_slipnet_with(spec, threshold, Geometry::DEFAULT)
}

pub fn build_slipnet_with(
    spec: &SlipnetSpec,
    threshold: f64,
    geometry: Geometry,
) -> Result<BuiltSlipnet> {
    let required = spec.required_rows();
    if required > geometry.capacity() {
        return Err(Error::OutOfMemory {
            required,
            capacity: geometry.capacity(),
        });
    }
    let mut db = ViewsDb::with_geometry(AllocationScheme::Cnsm, geometry);
    let mut concepts: BTreeMap<String, Addr> = BTreeMap::new();

    for c in &spec.concepts {
        if concepts.contains_key(&c.name) {
            return Err(Error::InvalidSpec(format!(
                "duplicate concept name {:?}",
                c.name
            )));
        }
        let h = db.create_headnode()?;
        set_head_universals(&mut db, h, &c.universals)?;
        concepts.insert(c.name.clone(), h);
    }

    for link in &spec.links {
        let src = *concepts
            .get(&link.source)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown source {:?}", link.source)))?;
        let dest = *concepts
            .get(&link.dest)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown destination {:?}", link.dest)))?;
        let label = match &link.label {
            Some(name) => match concepts.get(name) {
                Some(&a) => a,
                None => {
                    let a = db.create_headnode()?;
                    concepts.insert(name.clone(), a);
                    a
                }
            },
            None => db.create_headnode()?,
        };
        let row = db.add_link(src, Ref::addr(label)?, Ref::addr(dest)?)?;
        set_link_universals(&mut db, row, Side::Edge, &link.edge_side)?;
        set_link_universals(&mut db, row, Side::Dest, &link.dest_side)?;
    }

    Ok(BuiltSlipnet {
        db,
        state: SlipnetState::new(threshold),
        concepts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeroed_universals_pack_to_the_zero_word() {
        assert_eq!(HeadUniversals::default().pack().unwrap(), 0);
        assert_eq!(LinkUniversals::default().pack().unwrap(), 0);
    }

    #[test]
    fn unit_scalars_are_exact_on_the_grid() {
        for v in [0.0, 0.25, 0.5, 1.0] {
            let u = HeadUniversals {
                conceptual_depth: v,
                ..Default::default()
            };
            assert_eq!(
                HeadUniversals::unpack(u.pack().unwrap()).conceptual_depth,
                v
            );
        }
        for a in [0.0, 1.0, 30.0, 100.0, 32767.0] {
            let u = HeadUniversals {
                activ: a,
                ..Default::default()
            };
            assert_eq!(HeadUniversals::unpack(u.pack().unwrap()).activ, a);
        }
    }

    /// Ten thousand random grid points survive pack/unpack bit-exactly.
    #[test]
    fn universals_round_trip_across_the_grid() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let head = HeadUniversals {
                activ: rng.random_range(0..=32767u64 * 65536) as f64 / 65536.0,
                conceptual_depth: rng.random_range(0..=32768u64) as f64 / 32768.0,
                activ_lock: rng.random_bool(0.5),
            };
            assert_eq!(HeadUniversals::unpack(head.pack().unwrap()), head);
            let link = LinkUniversals {
                conductance: rng.random_range(0..=32768u64) as f64 / 32768.0,
                slip_lock: rng.random_bool(0.5),
            };
            assert_eq!(LinkUniversals::unpack(link.pack().unwrap()), link);
        }
    }

    #[test]
    fn threshold_comparison_holds_after_a_round_trip() {
        let u = HeadUniversals {
            conceptual_depth: 1.0,
            activ: 100.0,
            activ_lock: false,
        };
        assert!(HeadUniversals::unpack(u.pack().unwrap()).activ > 80.0);
    }

    #[test]
    fn out_of_range_universals_are_rejected() {
        assert!(HeadUniversals {
            conceptual_depth: 1.5,
            ..Default::default()
        }
        .pack()
        .is_err());
        assert!(HeadUniversals {
            activ: 40000.0,
            ..Default::default()
        }
        .pack()
        .is_err());
        assert!(LinkUniversals {
            conductance: -0.1,
            slip_lock: false,
        }
        .pack()
        .is_err());
    }

    /// Three concepts, one relation: source --label--> dest.
    fn tiny_net(
        source_u: HeadUniversals,
        label_u: HeadUniversals,
        edge_side: LinkUniversals,
        dest_side: LinkUniversals,
    ) -> BuiltSlipnet {
        let spec = SlipnetSpec {
            concepts: vec![
                ConceptSpec {
                    name: "source".into(),
                    universals: source_u,
                },
                ConceptSpec {
                    name: "label".into(),
                    universals: label_u,
                },
                ConceptSpec {
                    name: "dest".into(),
                    universals: HeadUniversals {
                        conceptual_depth: 1.0,
                        activ: 30.0,
                        activ_lock: true,
                    },
                },
            ],
            links: vec![SliplinkSpec {
                source: "source".into(),
                label: Some("label".into()),
                dest: "dest".into(),
                edge_side,
                dest_side,
            }],
        };
        build_slipnet(&spec, 80.0).unwrap()
    }

    #[test]
    fn propagate_step_evaluates_the_update_formula() {
        let net = tiny_net(
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 60.0,
                activ_lock: false,
            },
            HeadUniversals {
                conceptual_depth: 0.9,
                activ: 70.0,
                activ_lock: false,
            },
            LinkUniversals {
                conductance: 0.5,
                slip_lock: false,
            },
            LinkUniversals::default(),
        );
        let link = net.db.allocated_iter().last().unwrap();
        let update = propagate_step(&net.db, link).unwrap().unwrap();
        assert_eq!(update.target, net.concepts["label"]);
        // independent evaluation on the quantized grid
        let depth_q = (0.9f64 * 32768.0).round() / 32768.0;
        let expected = ((70.0 * depth_q + 60.0 * 0.5) * 65536.0).round() / 65536.0;
        assert_eq!(update.new_activ, expected);
        assert!((update.new_activ - 93.0).abs() <= 1.0 / 1024.0);

        // the single-step apply route and the full sweep agree
        let mut via_step = net.db.clone();
        apply_update(&mut via_step, &update).unwrap();
        let mut via_sweep = net.db.clone();
        propagate_all(&mut via_sweep).unwrap();
        assert_eq!(via_step.fabric(), via_sweep.fabric());
    }

    #[test]
    fn activ_locked_target_gets_no_update() {
        let net = tiny_net(
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 60.0,
                activ_lock: false,
            },
            HeadUniversals {
                conceptual_depth: 0.9,
                activ: 30.0,
                activ_lock: true,
            },
            LinkUniversals {
                conductance: 0.5,
                slip_lock: false,
            },
            LinkUniversals::default(),
        );
        let link = net.db.allocated_iter().last().unwrap();
        assert_eq!(propagate_step(&net.db, link).unwrap(), None);
        let mut db = net.db.clone();
        let before = db.fabric().aar(net.concepts["label"], ArrayId::M1).unwrap();
        propagate_all(&mut db).unwrap();
        assert_eq!(
            db.fabric().aar(net.concepts["label"], ArrayId::M1).unwrap(),
            before
        );
    }

    #[test]
    fn zero_conductance_and_unit_depth_is_a_fixpoint() {
        let net = tiny_net(
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 60.0,
                activ_lock: false,
            },
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 70.0,
                activ_lock: false,
            },
            LinkUniversals::default(),
            LinkUniversals::default(),
        );
        let mut db = net.db.clone();
        let before = db.fabric().clone();
        let changed = propagate_all(&mut db).unwrap();
        assert_eq!(changed, 0);
        for a in db.allocated_iter() {
            for &arr in db.scheme().arrays() {
                assert_eq!(
                    db.fabric().aar(a, arr).unwrap(),
                    before.aar(a, arr).unwrap()
                );
            }
        }
    }

    #[test]
    fn propagation_saturates_at_the_ceiling() {
        let net = tiny_net(
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 32767.0,
                activ_lock: false,
            },
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 32767.0,
                activ_lock: false,
            },
            LinkUniversals {
                conductance: 1.0,
                slip_lock: false,
            },
            LinkUniversals::default(),
        );
        let mut db = net.db.clone();
        propagate_all(&mut db).unwrap();
        let u = head_universals(&db, net.concepts["label"]).unwrap();
        assert_eq!(u.activ, ACTIV_MAX);
    }

    #[test]
    fn slippage_records_the_destination_once() {
        let net = tiny_net(
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 90.0,
                activ_lock: false,
            },
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 100.0,
                activ_lock: false,
            },
            LinkUniversals {
                conductance: 0.5,
                slip_lock: true,
            },
            LinkUniversals {
                conductance: 0.5,
                slip_lock: false,
            },
        );
        let mut state = net.state.clone();
        let additions = slippage_scan(&net.db, &mut state).unwrap();
        let source = net.concepts["source"];
        let dest = net.concepts["dest"];
        assert_eq!(additions.get(&source), Some(&vec![dest]));
        assert_eq!(state.slipping_from(source), &[dest]);
        // a second scan adds nothing new
        let again = slippage_scan(&net.db, &mut state).unwrap();
        assert!(again.is_empty());
        assert_eq!(state.slipping_from(source), &[dest]);
    }

    #[test]
    fn slippage_respects_threshold_and_lock() {
        // threshold at the ceiling: never slips
        let net = tiny_net(
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 90.0,
                activ_lock: false,
            },
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 100.0,
                activ_lock: false,
            },
            LinkUniversals::default(),
            LinkUniversals::default(),
        );
        let mut state = SlipnetState::new(ACTIV_MAX);
        assert!(slippage_scan(&net.db, &mut state).unwrap().is_empty());

        // destination-side slip lock: never slips either
        let locked = tiny_net(
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 90.0,
                activ_lock: false,
            },
            HeadUniversals {
                conceptual_depth: 1.0,
                activ: 100.0,
                activ_lock: false,
            },
            LinkUniversals::default(),
            LinkUniversals {
                conductance: 0.0,
                slip_lock: true,
            },
        );
        let mut state = locked.state.clone();
        assert!(slippage_scan(&locked.db, &mut state).unwrap().is_empty());
    }

    #[test]
    fn slipnet_ops_reject_the_normalised_scheme() {
        let mut db = ViewsDb::new(AllocationScheme::Normalised);
        let h = db.create_headnode().unwrap();
        assert!(matches!(
            head_universals(&db, h),
            Err(Error::ArrayAbsent { .. })
        ));
        assert!(matches!(
            propagate_all(&mut db),
            Err(Error::ArrayAbsent { .. })
        ));
    }

    #[test]
    fn unlabelled_links_get_their_own_anonymous_labels() {
        let spec = SlipnetSpec {
            concepts: vec![
                ConceptSpec {
                    name: "a".into(),
                    ..Default::default()
                },
                ConceptSpec {
                    name: "b".into(),
                    ..Default::default()
                },
            ],
            links: vec![
                SliplinkSpec {
                    source: "a".into(),
                    label: None,
                    dest: "b".into(),
                    ..Default::default()
                },
                SliplinkSpec {
                    source: "b".into(),
                    label: None,
                    dest: "a".into(),
                    ..Default::default()
                },
            ],
        };
        assert_eq!(spec.required_rows(), 6);
        let net = build_slipnet(&spec, 80.0).unwrap();
        assert_eq!(net.db.allocated_rows(), 6);
        // the two anonymous labels are distinct headnodes
        let t1 = net.db.fabric().tail(net.concepts["a"]).unwrap();
        let t2 = net.db.fabric().tail(net.concepts["b"]).unwrap();
        let l1 = net.db.linknode(t1).unwrap();
        let l2 = net.db.linknode(t2).unwrap();
        assert_ne!(l1.prim_id1, l2.prim_id1);
    }

    #[test]
    fn build_reports_exact_shortfall() {
        let mut spec = SlipnetSpec::default();
        for i in 0..20 {
            spec.concepts.push(ConceptSpec {
                name: format!("c{i}"),
                ..Default::default()
            });
        }
        let tiny = Geometry {
            superclusters: 1,
            rows_per_supercluster: 16,
        };
        match build_slipnet_with(&spec, 80.0, tiny) {
            Err(Error::OutOfMemory { required, capacity }) => {
                assert_eq!(required, 20);
                assert_eq!(capacity, 16);
            }
            other => panic!("expected out-of-memory, got {other:?}"),
        }
    }

    #[test]
    fn slipnet_ops_never_touch_the_structural_arrays() {
        let net = tiny_net(
            HeadUniversals {
                conceptual_depth: 0.5,
                activ: 500.0,
                activ_lock: false,
            },
            HeadUniversals {
                conceptual_depth: 0.5,
                activ: 400.0,
                activ_lock: false,
            },
            LinkUniversals {
                conductance: 0.7,
                slip_lock: false,
            },
            LinkUniversals {
                conductance: 0.3,
                slip_lock: false,
            },
        );
        let mut db = net.db.clone();
        let before = db.fabric().clone();
        let mut state = net.state.clone();
        propagate_all(&mut db).unwrap();
        slippage_scan(&db, &mut state).unwrap();
        for a in (0..db.capacity()).map(Addr) {
            for arr in [
                ArrayId::N1,
                ArrayId::N2,
                ArrayId::C1,
                ArrayId::C2,
                ArrayId::S1,
                ArrayId::S2,
            ] {
                assert_eq!(
                    db.fabric().aar(a, arr).unwrap(),
                    before.aar(a, arr).unwrap()
                );
            }
        }
    }
}
