//! The banking example models, embedded at compile time.
//!
//! `ma`/`mb` are partial networks: undrawn transitions are undefined.
//! `ma_total`/`mb_total` pad every undrawn move into error states
//! `s_herr` (High and Env moves) and `s_lerr` (Low moves).

use crate::lang::{parse_model, ModelDocument};

pub const MA: &str = include_str!("../fixtures/ma.tn");
pub const MB: &str = include_str!("../fixtures/mb.tn");
pub const MA_TOTAL: &str = include_str!("../fixtures/ma_total.tn");
pub const MB_TOTAL: &str = include_str!("../fixtures/mb_total.tn");

fn load(text: &str) -> ModelDocument {
    parse_model(text).expect("bundled fixture parses")
}

pub fn ma() -> ModelDocument {
    load(MA)
}

pub fn mb() -> ModelDocument {
    load(MB)
}

pub fn ma_total() -> ModelDocument {
    load(MA_TOTAL)
}

pub fn mb_total() -> ModelDocument {
    load(MB_TOTAL)
}
