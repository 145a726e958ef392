//! The `.tn` model language.
//!
//! ```text
//! network <Name>
//! agents { <name> : high|low  ... }
//! actions { <name> ... }
//! observations { <name> ... }
//! state <name> { <agent> = <obs> ... }
//! init <state>
//! <src> -> <dst> on <agent>.<action>
//! goal <Name> safety avoid { <state> ... }
//! goal <Name> reachability reach { <state> ... }
//! ```
//!
//! `#` starts a line comment. Items after the header may appear in any order.
//! Observation labels may also be class tokens such as `{a+b}`.

mod lexer;
mod parser;
mod serialize;

use std::collections::BTreeMap;

use crate::goal::GoalSpec;
use crate::model::{TransitionNetwork, ValidationReport};

pub use parser::parse_model;
pub use serialize::{serialize_model, serialize_network};

/// A parsed `.tn` file: one network and its named goals.
#[derive(Clone, Debug)]
pub struct ModelDocument {
    pub network: TransitionNetwork,
    pub goals: BTreeMap<String, GoalSpec>,
    /// Structural violations found by validation; parsing still succeeds.
    pub warnings: ValidationReport,
}

impl ModelDocument {
    pub fn new(network: TransitionNetwork, goals: BTreeMap<String, GoalSpec>) -> Self {
        let warnings = network.validate();
        Self {
            network,
            goals,
            warnings,
        }
    }

    pub fn goal(&self, name: &str) -> Option<&GoalSpec> {
        self.goals.get(name)
    }
}

impl PartialEq for ModelDocument {
    fn eq(&self, other: &Self) -> bool {
        let named = |d: &ModelDocument| -> BTreeMap<String, (crate::goal::GoalKind, Vec<String>)> {
            d.goals
                .iter()
                .map(|(k, g)| {
                    let mut v: Vec<String> = g
                        .states
                        .iter()
                        .map(|&s| d.network.state_name(s).to_owned())
                        .collect();
                    v.sort();
                    (k.clone(), (g.kind, v))
                })
                .collect()
        };
        self.network == other.network && named(self) == named(other)
    }
}

impl Eq for ModelDocument {}
