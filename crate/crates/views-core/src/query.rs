//! Query idioms over the instruction set: chain reading, two-cue
//! intersection, attribute lookup, and the two-stage syllogistic search.
//!
//! Everything here is read-only and built from CAR2/AAR/HEAD alone, the
//! way a host program would drive the hardware. Results are returned in
//! ascending address order; where a pairing can match on either content
//! array, the C1 assignment is tried before the C2 assignment and the
//! lowest-address hit wins.

use crate::db::ViewsDb;
use crate::error::{Error, Result};
use crate::model::{Addr, ArrayId, Ref};

/// Fully decoded traversal of one chain, headnode first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainView {
    pub head: Addr,
    pub members: Vec<ChainMember>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainMember {
    pub addr: Addr,
    pub prim_id1: Ref,
    pub prim_id2: Ref,
    pub prop1: Ref,
    pub prop2: Ref,
}

/// One hit of a two-cue search: the matching linknode and the headnode of
/// the chain that owns it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CueHit {
    pub link: Addr,
    pub owner: Addr,
}

/// Where a syllogistic search found its pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyllogismStage {
    /// The pairing sits in the subject's own chain.
    Direct,
    /// The pairing was found one hop away, in the chain of a value the
    /// subject relates to through the `via` attribute.
    ViaHop { via_value: Addr },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyllogismHit {
    pub link: Addr,
    pub stage: SyllogismStage,
}

impl ViewsDb {
    /// Full ordered traversal of the chain rooted at `h`.
    pub fn read_chain(&self, h: Addr) -> Result<ChainView> {
        if !self.is_headnode(h)? {
            return Err(Error::NotHeadnode(h));
        }
        let members = self
            .chain_rows(h)?
            .into_iter()
            .map(|addr| ChainMember {
                addr,
                prim_id1: self.read_ref(addr, ArrayId::C1),
                prim_id2: self.read_ref(addr, ArrayId::C2),
                prop1: if self.scheme().has(ArrayId::S1) {
                    self.read_ref(addr, ArrayId::S1)
                } else {
                    Ref::NULL
                },
                prop2: if self.scheme().has(ArrayId::S2) {
                    self.read_ref(addr, ArrayId::S2)
                } else {
                    Ref::NULL
                },
            })
            .collect();
        Ok(ChainView { head: h, members })
    }

    /// Decoded members of one subordinate chain of `parent`, in next
    /// order; empty when the side is unused.
    ///
    /// Chain reads never descend into subordinate chains on their own;
    /// this is the explicit way down.
    pub fn sub_chain(&self, parent: Addr, side: crate::model::Side) -> Result<Vec<ChainMember>> {
        self.require_allocated(parent)?;
        if !self.scheme().has(side.prop_array()) {
            return Ok(Vec::new());
        }
        let Some(root) = self.read_ref(parent, side.prop_array()).as_addr() else {
            return Ok(Vec::new());
        };
        Ok(self
            .chain_rows(root)?
            .into_iter()
            .map(|addr| ChainMember {
                addr,
                prim_id1: self.read_ref(addr, ArrayId::C1),
                prim_id2: self.read_ref(addr, ArrayId::C2),
                prop1: self.read_ref(addr, ArrayId::S1),
                prop2: self.read_ref(addr, ArrayId::S2),
            })
            .collect())
    }

    /// Find every linknode where the two cued concepts meet, regardless of
    /// which content array holds which cue, and resolve each hit's owner.
    pub fn two_cue(&self, cue_a: Ref, cue_b: Ref) -> Result<Vec<CueHit>> {
        let f = self.fabric();
        let mut ab = f.car2(ArrayId::C1, cue_a.raw(), ArrayId::C2, cue_b.raw())?;
        let mut ba = f.car2(ArrayId::C1, cue_b.raw(), ArrayId::C2, cue_a.raw())?;
        let mut links = f.drain(&mut ab)?;
        links.extend(f.drain(&mut ba)?);
        links.sort();
        links.dedup();
        links
            .into_iter()
            .map(|link| {
                Ok(CueHit {
                    link,
                    owner: f.head(link)?,
                })
            })
            .collect()
    }

    /// Chain members of `subject` where either primID equals `attribute`,
    /// paired with the other primID.
    pub fn attribute_of(&self, subject: Addr, attribute: Ref) -> Result<Vec<(Addr, Ref)>> {
        let f = self.fabric();
        let subj = Ref::addr(subject)?.raw();
        let mut pairs: Vec<(Addr, u8, Ref)> = Vec::new();
        let mut on_c1 = f.car2(ArrayId::N1, subj, ArrayId::C1, attribute.raw())?;
        for link in f.drain(&mut on_c1)? {
            pairs.push((link, 0, Ref::from_raw(f.aar(link, ArrayId::C2)?)));
        }
        let mut on_c2 = f.car2(ArrayId::N1, subj, ArrayId::C2, attribute.raw())?;
        for link in f.drain(&mut on_c2)? {
            pairs.push((link, 1, Ref::from_raw(f.aar(link, ArrayId::C1)?)));
        }
        pairs.sort_by_key(|&(link, which, _)| (link, which));
        let mut out: Vec<(Addr, Ref)> = Vec::new();
        for (link, _, value) in pairs {
            if out.last() != Some(&(link, value)) {
                out.push((link, value));
            }
        }
        Ok(out)
    }

    /// Two-stage search for an `(attribute, target)` pairing: first in the
    /// subject's own chain, then one hop away through each value the
    /// subject holds under the `via` attribute.
    pub fn syllogism_search(
        &self,
        subject: Addr,
        attribute: Ref,
        target: Ref,
        via: Ref,
    ) -> Result<Option<SyllogismHit>> {
        if let Some(link) = self.find_pairing(subject, attribute, target)? {
            return Ok(Some(SyllogismHit {
                link,
                stage: SyllogismStage::Direct,
            }));
        }
        for (_, value) in self.attribute_of(subject, via)? {
            let Some(v) = value.as_addr() else { continue };
            if let Some(link) = self.find_pairing(v, attribute, target)? {
                return Ok(Some(SyllogismHit {
                    link,
                    stage: SyllogismStage::ViaHop { via_value: v },
                }));
            }
        }
        Ok(None)
    }

    /// Lowest-address chain member of `owner` holding the pairing, with
    /// the (C1=attribute) assignment taking precedence.
    fn find_pairing(&self, owner: Addr, attribute: Ref, target: Ref) -> Result<Option<Addr>> {
        let f = self.fabric();
        let own = Ref::addr(owner)?.raw();
        for (attr_array, other_array) in [(ArrayId::C1, ArrayId::C2), (ArrayId::C2, ArrayId::C1)] {
            let mut cur = f.car2(ArrayId::N1, own, attr_array, attribute.raw())?;
            while let Some(link) = f.carnext(&mut cur)? {
                if f.aar(link, other_array)? == target.raw() {
                    return Ok(Some(link));
                }
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AllocationScheme;

    /// A condensed film database: the two-Oscars fact lives in one chain,
    /// the protagonist fact in another.
    struct Film {
        db: ViewsDb,
        tom: Addr,
        film: Addr,
        won: Addr,
        oscars: Addr,
        protagonist: Addr,
        sully: Addr,
        won_link: Addr,
        prot_link: Addr,
    }

    fn film_db() -> Film {
        let mut db = ViewsDb::new(AllocationScheme::Cnsm);
        let tom = db.create_headnode().unwrap();
        let film = db.create_headnode().unwrap();
        let act_in = db.create_headnode().unwrap();
        let won = db.create_headnode().unwrap();
        let oscars = db.create_headnode().unwrap();
        let protagonist = db.create_headnode().unwrap();
        let sully = db.create_headnode().unwrap();
        let r = |a: Addr| Ref::addr(a).unwrap();
        db.add_link(tom, r(act_in), r(film)).unwrap();
        let won_link = db.add_link(tom, r(won), r(oscars)).unwrap();
        let prot_link = db.add_link(film, r(protagonist), r(sully)).unwrap();
        Film {
            db,
            tom,
            film,
            won,
            oscars,
            protagonist,
            sully,
            won_link,
            prot_link,
        }
    }

    #[test]
    fn read_chain_returns_members_in_order() {
        let f = film_db();
        let view = f.db.read_chain(f.tom).unwrap();
        assert_eq!(view.head, f.tom);
        assert_eq!(view.members.len(), 3);
        assert_eq!(view.members[0].addr, f.tom);
        assert_eq!(view.members[2].addr, f.won_link);
        assert_eq!(view.members[2].prim_id1, Ref::addr(f.won).unwrap());
    }

    #[test]
    fn read_chain_of_lone_headnode_has_one_member() {
        let mut db = ViewsDb::new(AllocationScheme::Cnsm);
        let h = db.create_headnode().unwrap();
        let view = db.read_chain(h).unwrap();
        assert_eq!(view.members.len(), 1);
    }

    #[test]
    fn read_chain_rejects_non_headnodes() {
        let f = film_db();
        assert!(matches!(
            f.db.read_chain(f.won_link),
            Err(Error::NotHeadnode(_))
        ));
    }

    #[test]
    fn two_cue_finds_the_meeting_linknode_and_owner() {
        let f = film_db();
        let hits =
            f.db.two_cue(Ref::addr(f.won).unwrap(), Ref::addr(f.oscars).unwrap())
                .unwrap();
        assert_eq!(
            hits,
            vec![CueHit {
                link: f.won_link,
                owner: f.tom
            }]
        );
    }

    #[test]
    fn two_cue_reaches_facts_in_third_chains() {
        let f = film_db();
        // the answer lives in the film's chain, not in either cue's own chain
        let hits =
            f.db.two_cue(
                Ref::addr(f.sully).unwrap(),
                Ref::addr(f.protagonist).unwrap(),
            )
            .unwrap();
        assert_eq!(
            hits,
            vec![CueHit {
                link: f.prot_link,
                owner: f.film
            }]
        );
    }

    #[test]
    fn two_cue_is_symmetric_and_empty_on_disjoint_cues() {
        let f = film_db();
        let a = Ref::addr(f.won).unwrap();
        let b = Ref::addr(f.oscars).unwrap();
        assert_eq!(f.db.two_cue(a, b).unwrap(), f.db.two_cue(b, a).unwrap());
        assert!(f
            .db
            .two_cue(Ref::addr(f.won).unwrap(), Ref::addr(f.sully).unwrap())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn attribute_of_returns_the_other_primid() {
        let f = film_db();
        let got =
            f.db.attribute_of(f.film, Ref::addr(f.protagonist).unwrap())
                .unwrap();
        assert_eq!(got, vec![(f.prot_link, Ref::addr(f.sully).unwrap())]);
        // absent attribute
        assert!(f
            .db
            .attribute_of(f.film, Ref::addr(f.won).unwrap())
            .unwrap()
            .is_empty());
    }

    /// attribute_of agrees with a plain scan over the decoded chain.
    #[test]
    fn attribute_of_matches_chain_scan_oracle() {
        let f = film_db();
        for (subject, attr) in [
            (f.tom, Ref::addr(f.won).unwrap()),
            (f.film, Ref::addr(f.protagonist).unwrap()),
            (f.tom, Ref::addr(f.sully).unwrap()),
        ] {
            let mut oracle = Vec::new();
            for m in &f.db.read_chain(subject).unwrap().members {
                if m.prim_id1 == attr {
                    oracle.push((m.addr, m.prim_id2));
                }
                if m.prim_id2 == attr && !(m.prim_id1 == attr && m.prim_id1 == m.prim_id2) {
                    oracle.push((m.addr, m.prim_id1));
                }
            }
            oracle.sort();
            oracle.dedup();
            let mut got = f.db.attribute_of(subject, attr).unwrap();
            got.sort();
            assert_eq!(got, oracle);
        }
    }

    struct Taxonomy {
        db: ViewsDb,
        this: Addr,
        family: Addr,
        felidae: Addr,
        species: Addr,
        family_link: Addr,
    }

    fn taxonomy_db() -> Taxonomy {
        let mut db = ViewsDb::new(AllocationScheme::Cnsm);
        let this = db.create_headnode().unwrap();
        let species = db.create_headnode().unwrap();
        let cat = db.create_headnode().unwrap();
        let family = db.create_headnode().unwrap();
        let felidae = db.create_headnode().unwrap();
        let r = |a: Addr| Ref::addr(a).unwrap();
        db.add_link(this, r(species), r(cat)).unwrap();
        let family_link = db.add_link(cat, r(family), r(felidae)).unwrap();
        Taxonomy {
            db,
            this,
            family,
            felidae,
            species,
            family_link,
        }
    }

    #[test]
    fn syllogism_finds_the_pairing_one_hop_away() {
        let t = taxonomy_db();
        let hit =
            t.db.syllogism_search(
                t.this,
                Ref::addr(t.family).unwrap(),
                Ref::addr(t.felidae).unwrap(),
                Ref::addr(t.species).unwrap(),
            )
            .unwrap()
            .expect("pairing exists via the species hop");
        assert_eq!(hit.link, t.family_link);
        assert!(matches!(hit.stage, SyllogismStage::ViaHop { .. }));
    }

    #[test]
    fn syllogism_short_circuits_on_a_direct_pairing() {
        let mut t = taxonomy_db();
        let direct =
            t.db.add_link(
                t.this,
                Ref::addr(t.family).unwrap(),
                Ref::addr(t.felidae).unwrap(),
            )
            .unwrap();
        let hit =
            t.db.syllogism_search(
                t.this,
                Ref::addr(t.family).unwrap(),
                Ref::addr(t.felidae).unwrap(),
                Ref::addr(t.species).unwrap(),
            )
            .unwrap()
            .unwrap();
        assert_eq!(hit.link, direct);
        assert_eq!(hit.stage, SyllogismStage::Direct);
    }

    #[test]
    fn syllogism_returns_none_when_target_is_absent() {
        let mut t = taxonomy_db();
        let canidae = t.db.create_headnode().unwrap();
        let got =
            t.db.syllogism_search(
                t.this,
                Ref::addr(t.family).unwrap(),
                Ref::addr(canidae).unwrap(),
                Ref::addr(t.species).unwrap(),
            )
            .unwrap();
        assert_eq!(got, None);
    }

    #[test]
    fn sub_chain_descends_only_when_asked() {
        use crate::model::Side;
        let mut f = film_db();
        let as_head = f.db.create_headnode().unwrap();
        let act_in_link = f.db.read_chain(f.tom).unwrap().members[1].addr;
        let s0 =
            f.db.add_subordinate(
                act_in_link,
                Side::Edge,
                Ref::addr(as_head).unwrap(),
                Ref::addr(f.sully).unwrap(),
            )
            .unwrap();
        // the main chain view does not change shape
        assert_eq!(f.db.read_chain(f.tom).unwrap().members.len(), 3);
        // the explicit descent returns the sub row
        let subs = f.db.sub_chain(act_in_link, Side::Edge).unwrap();
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].addr, s0);
        assert_eq!(subs[0].prim_id2, Ref::addr(f.sully).unwrap());
        assert!(f.db.sub_chain(act_in_link, Side::Dest).unwrap().is_empty());
    }

    /// The four-array allocation supports the whole query surface; prop
    /// fields simply read as NULL.
    #[test]
    fn queries_work_under_the_normalised_scheme() {
        let mut db = ViewsDb::new(AllocationScheme::Normalised);
        let cat = db.create_headnode().unwrap();
        let family = db.create_headnode().unwrap();
        let felidae = db.create_headnode().unwrap();
        let link = db
            .add_link(cat, Ref::addr(family).unwrap(), Ref::addr(felidae).unwrap())
            .unwrap();
        let view = db.read_chain(cat).unwrap();
        assert_eq!(view.members.len(), 2);
        assert!(view.members[1].prop1.is_null());
        let hits = db
            .two_cue(Ref::addr(family).unwrap(), Ref::addr(felidae).unwrap())
            .unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].link, link);
        assert!(db
            .sub_chain(link, crate::model::Side::Edge)
            .unwrap()
            .is_empty());
        assert!(crate::check::check_invariants(&db).is_empty());
        // and the graph exports without attachments
        assert_eq!(db.export_drlg().unwrap().edges.len(), 1);
    }

    #[test]
    fn queries_leave_the_fabric_untouched() {
        let t = taxonomy_db();
        let before = t.db.fabric().clone();
        let _ = t.db.read_chain(t.this).unwrap();
        let _ =
            t.db.two_cue(Ref::addr(t.family).unwrap(), Ref::addr(t.felidae).unwrap())
                .unwrap();
        let _ =
            t.db.attribute_of(t.this, Ref::addr(t.species).unwrap())
                .unwrap();
        let _ =
            t.db.syllogism_search(
                t.this,
                Ref::addr(t.family).unwrap(),
                Ref::addr(t.felidae).unwrap(),
                Ref::addr(t.species).unwrap(),
            )
            .unwrap();
        assert_eq!(t.db.fabric(), &before);
    }
}
