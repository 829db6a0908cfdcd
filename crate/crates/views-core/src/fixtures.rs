//! Bundled example databases in `.views` text form.
//!
//! `TOM_HANKS` is the film database of five interlinked chains with a
//! subordinate "as Sully" row and the grounded `"Sully"` title string.
//! `FELIDAE` holds the naughty-black-cat object plus the Black and Cat
//! chains used by the two-stage syllogistic search. `SLIPNET_FIG9` is the
//! three-concept slipnet whose single sliplink says "First is the
//! opposite of Last".

pub const TOM_HANKS: &str = include_str!("../fixtures/tom_hanks.views");
pub const FELIDAE: &str = include_str!("../fixtures/felidae.views");
pub const SLIPNET_FIG9: &str = include_str!("../fixtures/slipnet_fig9.views");

/// All bundled fixtures as `(file name, content)` pairs.
pub const ALL: &[(&str, &str)] = &[
    ("tom_hanks.views", TOM_HANKS),
    ("felidae.views", FELIDAE),
    ("slipnet_fig9.views", SLIPNET_FIG9),
];
