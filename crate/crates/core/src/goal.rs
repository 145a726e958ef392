use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::ModelError;
use crate::model::{StateId, TransitionNetwork};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GoalKind {
    /// Never visit the state set.
    Safety,
    /// Eventually visit the state set.
    Reachability,
}

impl fmt::Display for GoalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoalKind::Safety => f.write_str("safety"),
            GoalKind::Reachability => f.write_str("reachability"),
        }
    }
}

/// A safety (avoid-set) or reachability (target-set) objective.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Goal {
    pub kind: GoalKind,
    pub states: BTreeSet<StateId>,
}

/// Goals as declared in a model document.
pub type GoalSpec = Goal;

impl Goal {
    pub fn safety(avoid: impl IntoIterator<Item = StateId>) -> Self {
        Self {
            kind: GoalKind::Safety,
            states: avoid.into_iter().collect(),
        }
    }

    pub fn reachability(target: impl IntoIterator<Item = StateId>) -> Self {
        Self {
            kind: GoalKind::Reachability,
            states: target.into_iter().collect(),
        }
    }

    /// Resolves state names against `net`.
    pub fn by_names<'a>(
        net: &TransitionNetwork,
        kind: GoalKind,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, ModelError> {
        let states = names
            .into_iter()
            .map(|n| net.state_id(n))
            .collect::<Result<_, _>>()?;
        Ok(Self { kind, states })
    }

    /// The complementary objective over the same state set.
    pub fn negate(&self) -> Self {
        let kind = match self.kind {
            GoalKind::Safety => GoalKind::Reachability,
            GoalKind::Reachability => GoalKind::Safety,
        };
        Self {
            kind,
            states: self.states.clone(),
        }
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.states.contains(&s)
    }

    pub fn state_names<'a>(&self, net: &'a TransitionNetwork) -> Vec<&'a str> {
        let mut names: Vec<&str> = self.states.iter().map(|&s| net.state_name(s)).collect();
        names.sort_by(|a, b| crate::model::natural_cmp(a, b));
        names
    }

    /// Same goal on another network, matching states by name.
    pub fn transfer(&self, from: &TransitionNetwork, to: &TransitionNetwork) -> Result<Self, ModelError> {
        Self::by_names(to, self.kind, self.states.iter().map(|&s| from.state_name(s)))
    }
}
