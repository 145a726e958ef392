//! Independent checker for attacker strategies.
//!
//! Knowledge tracking, the trimmed product and the path analysis are rebuilt
//! here from the network alone; nothing is shared with the solvers beyond
//! the key type. Strategies may be set-valued: the attacker then submits
//! every action of the set.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::{BeliefKey, Move, Semantics, Strategy};
use crate::error::GameError;
use crate::goal::{Goal, GoalKind};
use crate::model::{
    ActionSequence, AgentId, ObsId, PersonalizedAction, StateId, TransitionNetwork,
};

/// A set-valued belief-positional strategy.
pub type SetStrategy = BTreeMap<BeliefKey, BTreeSet<Move>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Counterexample {
    /// Executing `path` from the initial state enters a forbidden state.
    Unsafe { path: ActionSequence },
    /// Executing `path` ends where no move is possible, short of the target.
    Deadlock { path: ActionSequence },
    /// `prefix` followed by `cycle` forever never reaches the target.
    Lasso {
        prefix: ActionSequence,
        cycle: ActionSequence,
    },
}

impl Counterexample {
    /// Replays the path through `exec` and checks its shape.
    pub fn replays(&self, net: &TransitionNetwork, goal: &Goal) -> bool {
        let s0 = net.initial();
        let states_along = |start: StateId, seq: &[PersonalizedAction]| -> Option<Vec<StateId>> {
            let mut out = vec![start];
            let mut cur = start;
            for pa in seq {
                cur = net.step(cur, pa.agent, pa.action)?;
                out.push(cur);
            }
            Some(out)
        };
        match self {
            Counterexample::Unsafe { path } => states_along(s0, path)
                .is_some_and(|p| goal.kind == GoalKind::Safety && goal.contains(*p.last().expect("nonempty"))),
            Counterexample::Deadlock { path } => states_along(s0, path).is_some_and(|p| {
                goal.kind == GoalKind::Reachability && p.iter().all(|s| !goal.contains(*s))
            }),
            Counterexample::Lasso { prefix, cycle } => {
                let Some(p) = states_along(s0, prefix) else {
                    return false;
                };
                let c = *p.last().expect("nonempty");
                let Some(q) = states_along(c, cycle) else {
                    return false;
                };
                goal.kind == GoalKind::Reachability
                    && !cycle.is_empty()
                    && q.last() == Some(&c)
                    && p.iter().chain(&q).all(|s| !goal.contains(*s))
            }
        }
    }

    pub fn describe(&self, net: &TransitionNetwork) -> String {
        let show = |seq: &ActionSequence| {
            seq.iter()
                .map(|pa| format!("{}.{}", net.agent_name(pa.agent), net.action_name(pa.action)))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            Counterexample::Unsafe { path } => format!("unsafe path: [{}]", show(path)),
            Counterexample::Deadlock { path } => format!("deadlock after: [{}]", show(path)),
            Counterexample::Lasso { prefix, cycle } => {
                format!("lasso: [{}] then forever [{}]", show(prefix), show(cycle))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationResult {
    pub ok: bool,
    pub counterexample: Option<Counterexample>,
    /// Size of the trimmed product that was checked.
    pub product_states: usize,
}

pub fn verify_strategy(
    net: &TransitionNetwork,
    strategy: &Strategy,
    goal: &Goal,
    semantics: Semantics,
) -> Result<VerificationResult, GameError> {
    let set: SetStrategy = strategy
        .moves
        .iter()
        .map(|(k, &m)| (k.clone(), BTreeSet::from([m])))
        .collect();
    verify_set_strategy(net, strategy.attacker, &set, goal, semantics)
}

struct Tracker<'a> {
    net: &'a TransitionNetwork,
    attacker: AgentId,
    target: &'a BTreeSet<StateId>,
    strategy: &'a SetStrategy,
    keys: Vec<BeliefKey>,
    key_index: HashMap<BeliefKey, usize>,
    info: Vec<KeyInfo>,
}

impl Tracker<'_> {
    fn allowed(&self, moves: &BTreeSet<Move>, u: AgentId, a: crate::model::ActionId) -> bool {
        u != self.attacker || moves.contains(&Move::Act(a))
    }

    fn absorb(&self, label: ObsId, seeds: BTreeSet<StateId>, moves: Option<&BTreeSet<Move>>) -> BTreeSet<StateId> {
        let mut out = seeds;
        let mut queue: VecDeque<StateId> = out.iter().copied().collect();
        while let Some(s) = queue.pop_front() {
            for u in self.net.agents() {
                for a in self.net.actions() {
                    let Some(t) = self.net.step(s, u, a) else { continue };
                    let ok = if u == self.attacker {
                        moves.is_some_and(|m| m.contains(&Move::Act(a)))
                    } else {
                        true
                    };
                    if ok
                        && !self.target.contains(&t)
                        && self.net.obs(t, self.attacker) == label
                        && out.insert(t)
                    {
                        queue.push_back(t);
                    }
                }
            }
        }
        out
    }

    fn key_for(&mut self, label: ObsId, entry: BTreeSet<StateId>) -> Result<usize, GameError> {
        let belief = self.absorb(label, entry, None);
        let key = BeliefKey {
            label,
            belief: belief.into_iter().collect(),
        };
        if let Some(&i) = self.key_index.get(&key) {
            return Ok(i);
        }
        let moves = self
            .strategy
            .get(&key)
            .cloned()
            .filter(|m| !m.is_empty())
            .ok_or_else(|| GameError::MissingMove(key.describe(self.net)))?;
        let closure = self.absorb(label, key.belief.iter().copied().collect(), Some(&moves));
        let mut groups: BTreeMap<ObsId, BTreeSet<StateId>> = BTreeMap::new();
        for &s in &closure {
            for u in self.net.agents() {
                for a in self.net.actions() {
                    let Some(t) = self.net.step(s, u, a) else { continue };
                    let o = self.net.obs(t, self.attacker);
                    if self.allowed(&moves, u, a) && !self.target.contains(&t) && o != label {
                        groups.entry(o).or_default().insert(t);
                    }
                }
            }
        }
        let i = self.keys.len();
        self.keys.push(key.clone());
        self.key_index.insert(key, i);
        self.info.push(KeyInfo {
            moves,
            groups,
            next: HashMap::new(),
        });
        Ok(i)
    }

    /// The key reached from key `k` on observing `o`, built on first use.
    fn next_key(&mut self, k: usize, o: ObsId) -> Result<usize, GameError> {
        if let Some(&j) = self.info[k].next.get(&o) {
            return Ok(j);
        }
        let entry = self.info[k].groups[&o].clone();
        let j = self.key_for(o, entry)?;
        self.info[k].next.insert(o, j);
        Ok(j)
    }
}

struct KeyInfo {
    moves: BTreeSet<Move>,
    /// Observable outcomes of the closure, grouped by new label.
    groups: BTreeMap<ObsId, BTreeSet<StateId>>,
    next: HashMap<ObsId, usize>,
}

/// Checks that every path of the strategy-trimmed system that the semantics
/// considers satisfies `goal`.
pub fn verify_set_strategy(
    net: &TransitionNetwork,
    attacker: AgentId,
    strategy: &SetStrategy,
    goal: &Goal,
    semantics: Semantics,
) -> Result<VerificationResult, GameError> {
    if attacker.index() >= net.num_agents() {
        return Err(crate::error::ModelError::AgentOutOfRange(attacker.0).into());
    }
    if !net.is_low(attacker) {
        return Err(GameError::NotLow(net.agent_name(attacker).to_owned()));
    }
    let empty = BTreeSet::new();
    let target = match goal.kind {
        GoalKind::Reachability => &goal.states,
        GoalKind::Safety => &empty,
    };
    let s0 = net.initial();
    let ok = |n| VerificationResult {
        ok: true,
        counterexample: None,
        product_states: n,
    };
    let fail = |n, c| VerificationResult {
        ok: false,
        counterexample: Some(c),
        product_states: n,
    };
    match goal.kind {
        GoalKind::Reachability if goal.contains(s0) => return Ok(ok(0)),
        GoalKind::Safety if goal.contains(s0) => {
            return Ok(fail(0, Counterexample::Unsafe { path: Vec::new() }))
        }
        _ => {}
    }

    let mut tracker = Tracker {
        net,
        attacker,
        target,
        strategy,
        keys: Vec::new(),
        key_index: HashMap::new(),
        info: Vec::new(),
    };
    let k0 = tracker.key_for(net.obs(s0, attacker), BTreeSet::from([s0]))?;

    // Product exploration with parent pointers.
    let mut ids: HashMap<(StateId, usize), usize> = HashMap::from([((s0, k0), 0)]);
    let mut nodes: Vec<(StateId, usize)> = vec![(s0, k0)];
    let mut parent: Vec<Option<(usize, PersonalizedAction)>> = vec![None];
    let mut succ: Vec<Vec<(usize, PersonalizedAction)>> = vec![Vec::new()];
    let mut enabled: Vec<BTreeSet<AgentId>> = vec![BTreeSet::new()];
    let mut queue = VecDeque::from([0usize]);

    let path_to = |parent: &[Option<(usize, PersonalizedAction)>], mut v: usize| {
        let mut seq = Vec::new();
        while let Some((p, pa)) = parent[v] {
            seq.push(pa);
            v = p;
        }
        seq.reverse();
        seq
    };

    while let Some(v) = queue.pop_front() {
        let (s, k) = nodes[v];
        let label = tracker.keys[k].label;
        for u in net.agents() {
            for a in net.actions() {
                let Some(t) = net.step(s, u, a) else { continue };
                if !tracker.allowed(&tracker.info[k].moves, u, a) {
                    continue;
                }
                enabled[v].insert(u);
                let pa = PersonalizedAction::new(u, a);
                if goal.kind == GoalKind::Safety && goal.contains(t) {
                    let mut path = path_to(&parent, v);
                    path.push(pa);
                    return Ok(fail(nodes.len(), Counterexample::Unsafe { path }));
                }
                if target.contains(&t) {
                    continue;
                }
                let o = net.obs(t, attacker);
                let k2 = if o == label { k } else { tracker.next_key(k, o)? };
                let w = match ids.get(&(t, k2)) {
                    Some(&w) => w,
                    None => {
                        let w = nodes.len();
                        ids.insert((t, k2), w);
                        nodes.push((t, k2));
                        parent.push(Some((v, pa)));
                        succ.push(Vec::new());
                        enabled.push(BTreeSet::new());
                        queue.push_back(w);
                        w
                    }
                };
                succ[v].push((w, pa));
            }
        }
        if goal.kind == GoalKind::Reachability && enabled[v].is_empty() {
            return Ok(fail(
                nodes.len(),
                Counterexample::Deadlock {
                    path: path_to(&parent, v),
                },
            ));
        }
    }

    if goal.kind == GoalKind::Safety {
        return Ok(ok(nodes.len()));
    }

    for comp in kosaraju(&succ) {
        let member: BTreeSet<usize> = comp.iter().copied().collect();
        let edges: Vec<(usize, usize, PersonalizedAction)> = comp
            .iter()
            .flat_map(|&v| {
                succ[v]
                    .iter()
                    .filter(|(w, _)| member.contains(w))
                    .map(move |&(w, pa)| (v, w, pa))
            })
            .collect();
        if edges.is_empty() {
            continue;
        }
        if semantics == Semantics::Fair {
            let fair = net.agents().all(|u| {
                !comp.iter().all(|&v| enabled[v].contains(&u))
                    || edges.iter().any(|(_, _, pa)| pa.agent == u)
            });
            if !fair {
                continue;
            }
        }
        let start = edges[0].0;
        let cycle = covering_walk(&succ, &member, start, &edges);
        return Ok(fail(
            nodes.len(),
            Counterexample::Lasso {
                prefix: path_to(&parent, start),
                cycle,
            },
        ));
    }
    Ok(ok(nodes.len()))
}

/// A closed walk from `start` that takes every edge in `edges`.
fn covering_walk(
    succ: &[Vec<(usize, PersonalizedAction)>],
    member: &BTreeSet<usize>,
    start: usize,
    edges: &[(usize, usize, PersonalizedAction)],
) -> ActionSequence {
    let route = |from: usize, to: usize| -> ActionSequence {
        if from == to {
            return Vec::new();
        }
        let mut prev: HashMap<usize, (usize, PersonalizedAction)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for &(w, pa) in &succ[v] {
                if member.contains(&w) && w != from && !prev.contains_key(&w) {
                    prev.insert(w, (v, pa));
                    if w == to {
                        let mut seq = Vec::new();
                        let mut x = to;
                        while x != from {
                            let (p, pa) = prev[&x];
                            seq.push(pa);
                            x = p;
                        }
                        seq.reverse();
                        return seq;
                    }
                    queue.push_back(w);
                }
            }
        }
        unreachable!("strongly connected")
    };
    let mut walk = Vec::new();
    let mut at = start;
    for &(v, w, pa) in edges {
        walk.extend(route(at, v));
        walk.push(pa);
        at = w;
    }
    walk.extend(route(at, start));
    walk
}

fn kosaraju(succ: &[Vec<(usize, PersonalizedAction)>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (v, i) = *top;
            if i < succ[v].len() {
                top.1 += 1;
                let w = succ[v][i].0;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut pred = vec![Vec::new(); n];
    for (v, out) in succ.iter().enumerate() {
        for &(w, _) in out {
            pred[w].push(v);
        }
    }
    let mut comp_of = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for &root in order.iter().rev() {
        if comp_of[root] != usize::MAX {
            continue;
        }
        let c = comps.len();
        let mut comp = vec![root];
        comp_of[root] = c;
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            for &p in &pred[v] {
                if comp_of[p] == usize::MAX {
                    comp_of[p] = c;
                    comp.push(p);
                }
            }
            i += 1;
        }
        comps.push(comp);
    }
    comps
}
