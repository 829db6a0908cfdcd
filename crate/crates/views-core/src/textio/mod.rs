//! On-disk formats: the human-authorable `.views` text format and the
//! bit-exact `.vimg` binary supercluster image.
//!
//! Names exist only at the text layer. The parser builds a name-to-address
//! symbol table while constructing the database; the arrays themselves
//! store nothing but words, and the binary image keeps no names at all.

mod image;
mod parse;
mod serialize;

pub use image::{image_to_bytes, load_image, load_image_bytes, save_image};
pub use parse::{parse, parse_document, Pos, ViewsTextDocument};
pub use serialize::serialize;

use std::collections::BTreeMap;

use crate::model::Addr;

/// Head names assigned by a parsed document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    by_name: BTreeMap<String, Addr>,
    by_addr: BTreeMap<Addr, String>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, addr: Addr) {
        let name = name.into();
        self.by_name.insert(name.clone(), addr);
        self.by_addr.insert(addr, name);
    }

    pub fn head(&self, name: &str) -> Option<Addr> {
        self.by_name.get(name).copied()
    }

    pub fn name_of(&self, addr: Addr) -> Option<&str> {
        self.by_addr.get(&addr).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Addr)> {
        self.by_name.iter().map(|(n, &a)| (n.as_str(), a))
    }
}
