use std::collections::{HashMap, VecDeque};

use super::strict::{finish, safe_region};
use super::{BeliefArena, Move, NodeId, Semantics, SolveResult};
use crate::error::GameError;
use crate::goal::{Goal, GoalKind};
use crate::model::{AgentId, StateId};

/// Sure winning over fair infinite paths and maximal finite paths.
///
/// Safety coincides with the strict case: any finite prefix extends to a fair
/// or maximal path, so a single bad prefix already loses. Reachability
/// enumerates belief-positional strategies depth-first (nodes in discovery
/// order, choices in arena order) and model-checks the product of concrete
/// states and belief nodes; partial assignments are pruned as soon as their
/// product already contains a deadlock or a fair cycle.
pub fn solve_fair(arena: &BeliefArena, goal: &Goal, budget: u64) -> Result<SolveResult, GameError> {
    super::check_goal(arena.net(), goal)?;
    if arena.settled() != &super::settled_for(goal) {
        let rebuilt = BeliefArena::for_goal(arena.net(), arena.attacker(), goal)?;
        return solve_fair(&rebuilt, goal, budget);
    }
    if goal.kind == GoalKind::Safety {
        return Ok(finish(arena, safe_region(arena, goal), Semantics::Fair));
    }
    let mut search = Search {
        arena,
        budget,
        candidates: 0,
    };
    let mut assign = vec![None; arena.len()];
    let won = search.run(&mut assign)?;
    let mut result = finish(
        arena,
        if won { assign } else { vec![None; arena.len()] },
        Semantics::Fair,
    );
    result.candidates = search.candidates;
    Ok(result)
}

struct Search<'a> {
    arena: &'a BeliefArena,
    budget: u64,
    candidates: u64,
}

enum Check {
    Lose,
    Win,
    Open(NodeId),
}

impl Search<'_> {
    fn run(&mut self, assign: &mut Vec<Option<usize>>) -> Result<bool, GameError> {
        self.candidates += 1;
        if self.candidates > self.budget {
            return Err(GameError::Budget(self.budget));
        }
        match product_check(self.arena, assign) {
            Check::Lose => Ok(false),
            Check::Win => Ok(true),
            Check::Open(n) => {
                for c in 0..self.arena.node(n).choices.len() {
                    assign[n] = Some(c);
                    if self.run(assign)? {
                        return Ok(true);
                    }
                }
                assign[n] = None;
                Ok(false)
            }
        }
    }
}

/// Explores the product from the initial state through assigned nodes only.
fn product_check(arena: &BeliefArena, assign: &[Option<usize>]) -> Check {
    let Some(init) = arena.initial() else {
        return Check::Win;
    };
    let net = arena.net();
    let attacker = arena.attacker();

    let mut index: HashMap<(StateId, NodeId), usize> = HashMap::new();
    let mut states: Vec<(StateId, NodeId)> = Vec::new();
    let mut adj: Vec<Vec<(usize, AgentId)>> = Vec::new();
    let mut enabled: Vec<Vec<AgentId>> = Vec::new();
    let mut open: Option<NodeId> = None;
    let mut queue = VecDeque::new();

    let start = (net.initial(), init);
    index.insert(start, 0);
    states.push(start);
    adj.push(Vec::new());
    enabled.push(Vec::new());
    queue.push_back(0);

    while let Some(i) = queue.pop_front() {
        let (s, n) = states[i];
        let Some(c) = assign[n] else {
            open.get_or_insert(n);
            continue;
        };
        let choice = &arena.node(n).choices[c];
        let label = arena.node(n).key.label;
        let mut en = Vec::new();
        let mut edges = Vec::new();
        for u in net.agents() {
            let mut acted = false;
            for a in net.available(s, u) {
                if u == attacker && choice.mv != Move::Act(a) {
                    continue;
                }
                acted = true;
                let t = net.step(s, u, a).expect("available");
                if arena.is_settled(t) {
                    continue;
                }
                let o = net.obs(t, attacker);
                let m = if o == label {
                    n
                } else {
                    arena.successor(n, c, o).expect("observable outcome has a node")
                };
                let next = *index.entry((t, m)).or_insert_with(|| {
                    states.push((t, m));
                    adj.push(Vec::new());
                    enabled.push(Vec::new());
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                edges.push((next, u));
            }
            if acted {
                en.push(u);
            }
        }
        if en.is_empty() {
            return Check::Lose;
        }
        adj[i] = edges;
        enabled[i] = en;
    }

    if has_fair_scc(&adj, &enabled, net.num_agents()) {
        return Check::Lose;
    }
    match open {
        Some(n) => Check::Open(n),
        None => Check::Win,
    }
}

/// A strongly connected component with an internal edge is fair when every
/// agent enabled at all of its states moves along one of its edges.
fn has_fair_scc(adj: &[Vec<(usize, AgentId)>], enabled: &[Vec<AgentId>], agents: usize) -> bool {
    for comp in tarjan(adj) {
        let mut member = vec![false; adj.len()];
        for &v in &comp {
            member[v] = true;
        }
        let mut acts = vec![false; agents];
        let mut internal = false;
        for &v in &comp {
            for &(w, u) in &adj[v] {
                if member[w] {
                    internal = true;
                    acts[u.index()] = true;
                }
            }
        }
        if !internal {
            continue;
        }
        let mut always = vec![true; agents];
        for &v in &comp {
            let mut here = vec![false; agents];
            for u in &enabled[v] {
                here[u.index()] = true;
            }
            for (a, h) in always.iter_mut().zip(here) {
                *a &= h;
            }
        }
        if always.iter().zip(&acts).all(|(&en, &acted)| !en || acted) {
            return true;
        }
    }
    false
}

fn tarjan(adj: &[Vec<(usize, AgentId)>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&(v, i)) = call.last() {
            if i < adj[v].len() {
                call.last_mut().expect("nonempty").1 += 1;
                let w = adj[v][i].0;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("on stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}
