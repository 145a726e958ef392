//! The Low attacker's imperfect-information game.
//!
//! The attacker sees only its stuttering-reduced observation history, so its
//! knowledge is a set of states sharing its current observation. The
//! [`BeliefArena`] materializes those knowledge sets; the solvers look for a
//! belief-positional strategy that surely achieves a goal, either against a
//! fully adversarial scheduler ([`Semantics::Strict`]) or against a scheduler
//! that must not starve a continuously enabled agent ([`Semantics::Fair`]).

mod arena;
pub mod dot;
mod fair;
mod strict;
mod verify;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::GameError;
use crate::goal::{Goal, GoalKind};
use crate::model::{ActionId, AgentId, ObsId, StateId, TransitionNetwork};

pub use arena::{BeliefArena, Choice, Node, NodeId};
pub use dot::{arena_to_dot, product_to_dot};
pub use fair::solve_fair;
pub use strict::solve_strict;
pub use verify::{
    verify_set_strategy, verify_strategy, Counterexample, SetStrategy, VerificationResult,
};

/// Default cap on fair-strategy enumeration steps.
pub const DEFAULT_BUDGET: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    /// The scheduler may interleave any defined moves and defer any agent forever.
    Strict,
    /// Every agent that stays enabled from some point on eventually acts.
    Fair,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Semantics::Strict => f.write_str("strict"),
            Semantics::Fair => f.write_str("fair"),
        }
    }
}

/// What the attacker does while its observation stays the same.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Act(ActionId),
    /// Submit an action not available here, i.e. refrain from acting.
    Idle,
}

impl Move {
    pub fn name(self, net: &TransitionNetwork) -> Option<&str> {
        match self {
            Move::Act(a) => Some(net.action_name(a)),
            Move::Idle => None,
        }
    }

    pub fn display(self, net: &TransitionNetwork) -> String {
        self.name(net).unwrap_or("idle").to_owned()
    }
}

/// A belief node: the current observation and the set of states consistent
/// with the history, saturated under unobservable moves of other agents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BeliefKey {
    pub label: ObsId,
    pub belief: Vec<StateId>,
}

impl BeliefKey {
    pub fn new(label: ObsId, belief: impl IntoIterator<Item = StateId>) -> Self {
        let set: BTreeSet<StateId> = belief.into_iter().collect();
        Self {
            label,
            belief: set.into_iter().collect(),
        }
    }

    pub fn describe(&self, net: &TransitionNetwork) -> String {
        let states: Vec<&str> = self.belief.iter().map(|&s| net.state_name(s)).collect();
        format!("{} {{{}}}", net.obs_name(self.label), states.join(" "))
    }
}

/// A deterministic belief-positional attacker strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub attacker: AgentId,
    /// States after which the game is already decided (reachability targets).
    pub settled: BTreeSet<StateId>,
    pub moves: BTreeMap<BeliefKey, Move>,
    /// One reduced observation history leading to each node.
    pub histories: BTreeMap<BeliefKey, Vec<ObsId>>,
}

impl Strategy {
    /// The move chosen at the node whose label is `label`, if unique.
    pub fn move_for_label(&self, net: &TransitionNetwork, label: &str) -> Option<Move> {
        let o = net.obs_id(label).ok()?;
        let mut it = self.moves.iter().filter(|(k, _)| k.label == o).map(|(_, &m)| m);
        let first = it.next()?;
        it.all(|m| m == first).then_some(first)
    }

    pub fn to_json(&self, net: &TransitionNetwork) -> Value {
        let entries: Vec<Value> = self
            .moves
            .iter()
            .map(|(key, mv)| {
                let history: Vec<&str> = self
                    .histories
                    .get(key)
                    .map(|h| h.iter().map(|&o| net.obs_name(o)).collect())
                    .unwrap_or_default();
                json!({
                    "history": history,
                    "observation": net.obs_name(key.label),
                    "belief": key.belief.iter().map(|&s| net.state_name(s)).collect::<Vec<_>>(),
                    "action": mv.name(net),
                })
            })
            .collect();
        json!({
            "attacker": net.agent_name(self.attacker),
            "entries": entries,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostics {
    /// A node from which the attacker cannot win.
    LosingNode(BeliefKey),
    /// The initial state already decides the game against the attacker.
    InitialViolation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub winning: bool,
    pub strategy: Option<Strategy>,
    pub semantics: Semantics,
    pub diagnostics: Option<Diagnostics>,
    /// Strategy candidates examined (fair reachability only).
    pub candidates: u64,
}

/// The Low agent named `name`, or the only Low agent when `name` is `None`.
pub fn resolve_attacker(net: &TransitionNetwork, name: Option<&str>) -> Result<AgentId, GameError> {
    match name {
        Some(n) => {
            let u = net.agent_id(n)?;
            if net.is_low(u) {
                Ok(u)
            } else {
                Err(GameError::NotLow(n.to_owned()))
            }
        }
        None => {
            let low = net.low();
            if low.len() == 1 {
                Ok(*low.iter().next().expect("one low agent"))
            } else {
                Err(GameError::AmbiguousAttacker(low.len()))
            }
        }
    }
}

/// States whose visit already decides the game for the attacker.
pub(crate) fn settled_for(goal: &Goal) -> BTreeSet<StateId> {
    match goal.kind {
        GoalKind::Reachability => goal.states.clone(),
        GoalKind::Safety => BTreeSet::new(),
    }
}

/// Builds the arena for `goal` and solves it under `semantics`.
pub fn solve(
    net: &TransitionNetwork,
    attacker: AgentId,
    goal: &Goal,
    semantics: Semantics,
    budget: u64,
) -> Result<SolveResult, GameError> {
    let arena = BeliefArena::for_goal(net, attacker, goal)?;
    match semantics {
        Semantics::Strict => solve_strict(&arena, goal),
        Semantics::Fair => solve_fair(&arena, goal, budget),
    }
}

/// Reconstructs the attacker strategy from a per-node choice assignment,
/// keeping only nodes reachable under it.
pub(crate) fn extract_strategy(arena: &BeliefArena, choice: &[Option<usize>]) -> Strategy {
    let mut moves = BTreeMap::new();
    let mut histories = BTreeMap::new();
    let mut seen = vec![false; arena.len()];
    let mut stack: Vec<NodeId> = arena.initial().into_iter().collect();
    for &n in &stack {
        seen[n] = true;
    }
    while let Some(n) = stack.pop() {
        let node = arena.node(n);
        let c = choice[n].expect("strategy covers reachable nodes");
        let ch = &node.choices[c];
        moves.insert(node.key.clone(), ch.mv);
        histories.insert(node.key.clone(), node.history.clone());
        for &(_, m) in &ch.successors {
            if !seen[m] {
                seen[m] = true;
                stack.push(m);
            }
        }
    }
    Strategy {
        attacker: arena.attacker(),
        settled: arena.settled().clone(),
        moves,
        histories,
    }
}

/// Checks a goal's state set against its network.
pub(crate) fn check_goal(net: &TransitionNetwork, goal: &Goal) -> Result<(), GameError> {
    if let Some(s) = goal.states.iter().find(|s| s.index() >= net.num_states()) {
        return Err(crate::error::ModelError::StateOutOfRange(s.0).into());
    }
    if goal.kind == GoalKind::Reachability && goal.states.is_empty() {
        return Err(GameError::EmptyTarget);
    }
    Ok(())
}
