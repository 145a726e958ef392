use super::{extract_strategy, BeliefArena, Diagnostics, Semantics, SolveResult};
use crate::error::GameError;
use crate::goal::{Goal, GoalKind};

/// Sure winning against an unrestricted scheduler.
///
/// Reachability is an attractor: a node wins with a choice whose closure has
/// no deadlock and no unobservable cycle and whose successors all win
/// already. Safety is a greatest fixpoint over choices whose closure avoids
/// the bad set.
pub fn solve_strict(arena: &BeliefArena, goal: &Goal) -> Result<SolveResult, GameError> {
    super::check_goal(arena.net(), goal)?;
    if arena.settled() != &super::settled_for(goal) {
        let rebuilt = BeliefArena::for_goal(arena.net(), arena.attacker(), goal)?;
        return solve_strict(&rebuilt, goal);
    }
    let choice = match goal.kind {
        GoalKind::Reachability => attractor(arena),
        GoalKind::Safety => safe_region(arena, goal),
    };
    Ok(finish(arena, choice, Semantics::Strict))
}

pub(super) fn finish(
    arena: &BeliefArena,
    choice: Vec<Option<usize>>,
    semantics: Semantics,
) -> SolveResult {
    let Some(init) = arena.initial() else {
        // Only reachability settles states, so the attacker has already won.
        return SolveResult {
            winning: true,
            strategy: Some(extract_strategy(arena, &choice)),
            semantics,
            diagnostics: None,
            candidates: 0,
        };
    };
    let winning = choice[init].is_some();
    SolveResult {
        winning,
        strategy: winning.then(|| extract_strategy(arena, &choice)),
        semantics,
        diagnostics: (!winning).then(|| Diagnostics::LosingNode(arena.node(init).key.clone())),
        candidates: 0,
    }
}

fn attractor(arena: &BeliefArena) -> Vec<Option<usize>> {
    let mut win: Vec<Option<usize>> = vec![None; arena.len()];
    loop {
        let mut changed = false;
        for (n, node) in arena.nodes() {
            if win[n].is_some() {
                continue;
            }
            let found = node.choices.iter().position(|c| {
                c.deadlocks.is_empty()
                    && !c.stutter_cycle
                    && c.successors.iter().all(|&(_, m)| win[m].is_some())
            });
            if found.is_some() {
                win[n] = found;
                changed = true;
            }
        }
        if !changed {
            return win;
        }
    }
}

pub(super) fn safe_region(arena: &BeliefArena, goal: &Goal) -> Vec<Option<usize>> {
    let bad = |c: &super::Choice| c.closure.iter().any(|s| goal.contains(*s));
    let mut good = vec![true; arena.len()];
    loop {
        let mut changed = false;
        for (n, node) in arena.nodes() {
            if good[n]
                && !node
                    .choices
                    .iter()
                    .any(|c| !bad(c) && c.successors.iter().all(|&(_, m)| good[m]))
            {
                good[n] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    arena
        .nodes()
        .map(|(n, node)| {
            if !good[n] {
                return None;
            }
            node.choices
                .iter()
                .position(|c| !bad(c) && c.successors.iter().all(|&(_, m)| good[m]))
        })
        .collect()
}
