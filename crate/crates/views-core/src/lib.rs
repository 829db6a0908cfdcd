//! Storage engine and functional simulator for the *Views* graph-database
//! model: fixed-width memory arrays grouped into superclusters, a small
//! content-addressable instruction set over them, graph construction and
//! querying on top, and a slipnet activation layer for cognitive-modelling
//! experiments.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] — word encoding, addresses, array ids, allocation schemes;
//! * [`fabric`] — the array banks and the PROG/AAR/CAR/CAR2/CARNEXT/HEAD/TAIL
//!   operations;
//! * [`db`] / [`check`] — the database object and its structural invariant
//!   checker;
//! * [`builder`] / [`drlg`] — chain construction and import/export of
//!   directed recursively-labelled graphs;
//! * [`query`] — chain reading, two-cue intersection and syllogistic search;
//! * [`slipnet`] — activation universals, synchronous propagation and
//!   slippage scanning;
//! * [`textio`] — the `.views` text format and the `.vimg` binary image.

pub mod builder;
pub mod check;
pub mod db;
pub mod drlg;
pub mod error;
pub mod fabric;
pub mod fixtures;
pub mod model;
pub mod query;
pub mod slipnet;
pub mod textio;

pub use check::{check_invariants, Violation};
pub use db::ViewsDb;
pub use error::{Error, Result};
pub use fabric::{CursorQuery, MatchCursor, MemoryFabric, TraceLog};
pub use model::{
    Addr, AllocationScheme, ArrayId, FieldId, Geometry, Linknode, LiteralTable, Ref, RefKind, Side,
};
