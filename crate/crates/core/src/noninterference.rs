//! Noninterference: the R* relation, unwinding conditions, and two deciders.
//!
//! The exact decider checks output consistency on R*. The bounded decider
//! explores action sequences directly; it is exponential in principle but,
//! since the verdict only depends on the pair `(exec α, exec Purge_H α)`,
//! the search deduplicates those pairs.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::model::{
    purge, ActionId, ActionSequence, AgentId, ObsId, PersonalizedAction, StateId,
    TransitionNetwork,
};
use crate::partition::{StatePartition, UnionFind};

/// The least equivalence on reachable states that relates every state to its
/// High successors and is closed under Low actions defined on both sides.
/// Unreachable states stay in singleton blocks.
pub fn compute_rstar(net: &TransitionNetwork) -> StatePartition {
    let n = net.num_states();
    let reachable = net.reachable();
    let mut uf = UnionFind::new(n);

    // Congruence closure: each class keeps one successor per (low agent, action).
    let mut sig: Vec<HashMap<(AgentId, ActionId), StateId>> = vec![HashMap::new(); n];
    let mut work: Vec<(StateId, StateId)> = Vec::new();
    for s in net.states().filter(|s| reachable[s.index()]) {
        for &l in net.low() {
            for a in net.available(s, l) {
                sig[s.index()].insert((l, a), net.step(s, l, a).expect("available"));
            }
        }
        for &h in net.high() {
            for a in net.available(s, h) {
                work.push((s, net.step(s, h, a).expect("available")));
            }
        }
    }

    while let Some((x, y)) = work.pop() {
        let Some((root, absorbed)) = uf.union(x.index(), y.index()) else {
            continue;
        };
        let moved = std::mem::take(&mut sig[absorbed]);
        for (key, t) in moved {
            match sig[root].get(&key) {
                Some(&t0) => work.push((t0, t)),
                None => {
                    sig[root].insert(key, t);
                }
            }
        }
    }
    StatePartition::from_union_find(&mut uf)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OcWitness {
    pub first: StateId,
    pub second: StateId,
    pub agent: AgentId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScCounterexample {
    pub first: StateId,
    pub second: StateId,
    pub agent: AgentId,
    pub action: ActionId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LrCounterexample {
    pub state: StateId,
    pub agent: AgentId,
    pub action: ActionId,
}

/// Outcome of the three unwinding conditions on reachable states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnwindingReport {
    /// Output consistency: related states look the same to every Low agent.
    pub oc: bool,
    /// Step consistency under Low actions defined on both sides.
    pub sc: bool,
    /// Local respect: High moves stay within a block.
    pub lr: bool,
    pub oc_witnesses: Vec<OcWitness>,
    pub sc_counterexamples: Vec<ScCounterexample>,
    pub lr_counterexamples: Vec<LrCounterexample>,
}

impl UnwindingReport {
    pub fn is_unwinding(&self) -> bool {
        self.oc && self.sc && self.lr
    }
}

pub fn check_unwinding(net: &TransitionNetwork, part: &StatePartition) -> UnwindingReport {
    assert_eq!(part.len(), net.num_states(), "partition does not match the network");
    let reachable = net.reachable();
    let mut oc_witnesses = Vec::new();
    let mut sc_counterexamples = Vec::new();
    let mut lr_counterexamples = Vec::new();

    for block in part.blocks() {
        let block: Vec<StateId> = block.into_iter().filter(|s| reachable[s.index()]).collect();
        for &l in net.low() {
            // One representative per label, then every pair of distinct labels.
            let mut reps: Vec<(ObsId, StateId)> = Vec::new();
            for &s in &block {
                let o = net.obs(s, l);
                if !reps.iter().any(|&(r, _)| r == o) {
                    reps.push((o, s));
                }
            }
            for i in 0..reps.len() {
                for j in i + 1..reps.len() {
                    oc_witnesses.push(OcWitness {
                        first: reps[i].1,
                        second: reps[j].1,
                        agent: l,
                    });
                }
            }
            for (i, &s1) in block.iter().enumerate() {
                for &s2 in &block[i + 1..] {
                    for a in net.actions() {
                        if let (Some(t1), Some(t2)) = (net.step(s1, l, a), net.step(s2, l, a)) {
                            if !part.same(t1, t2) {
                                sc_counterexamples.push(ScCounterexample {
                                    first: s1,
                                    second: s2,
                                    agent: l,
                                    action: a,
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    for s in net.states().filter(|s| reachable[s.index()]) {
        for &h in net.high() {
            for a in net.available(s, h) {
                if !part.same(s, net.step(s, h, a).expect("available")) {
                    lr_counterexamples.push(LrCounterexample {
                        state: s,
                        agent: h,
                        action: a,
                    });
                }
            }
        }
    }

    UnwindingReport {
        oc: oc_witnesses.is_empty(),
        sc: sc_counterexamples.is_empty(),
        lr: lr_counterexamples.is_empty(),
        oc_witnesses,
        sc_counterexamples,
        lr_counterexamples,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NiMethod {
    Exact,
    Bounded { depth: usize },
}

/// A sequence whose purged version looks different to `agent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceWitness {
    pub alpha: ActionSequence,
    pub agent: AgentId,
    /// `[exec α]_agent`.
    pub observed: ObsId,
    /// `[exec Purge_H α]_agent`; `None` when the purged sequence is undefined.
    pub purged: Option<ObsId>,
}

impl SequenceWitness {
    /// Re-evaluates the witness from scratch.
    pub fn replays(&self, net: &TransitionNetwork) -> bool {
        let Ok(Some(full)) = net.exec(net.initial(), &self.alpha) else {
            return false;
        };
        let purged = net
            .exec(net.initial(), &purge(&self.alpha, net.high()))
            .ok()
            .flatten()
            .map(|t| net.obs(t, self.agent));
        net.is_low(self.agent)
            && net.obs(full, self.agent) == self.observed
            && purged == self.purged
            && purged != Some(self.observed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NiWitness {
    /// Two R*-related states that a Low agent tells apart.
    StatePair(OcWitness),
    Sequence(SequenceWitness),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiVerdict {
    pub holds: bool,
    pub witness: Option<NiWitness>,
    pub method: NiMethod,
}

impl NiVerdict {
    /// True when the witness (if any) reproduces its inequality.
    pub fn witness_replays(&self, net: &TransitionNetwork) -> bool {
        match &self.witness {
            None => self.holds,
            Some(NiWitness::Sequence(w)) => !self.holds && w.replays(net),
            Some(NiWitness::StatePair(w)) => {
                let rstar = compute_rstar(net);
                !self.holds
                    && rstar.same(w.first, w.second)
                    && net.obs(w.first, w.agent) != net.obs(w.second, w.agent)
            }
        }
    }
}

/// NI holds iff R* is output consistent.
pub fn check_ni_exact(net: &TransitionNetwork) -> NiVerdict {
    let report = check_unwinding(net, &compute_rstar(net));
    NiVerdict {
        holds: report.oc,
        witness: report.oc_witnesses.into_iter().next().map(NiWitness::StatePair),
        method: NiMethod::Exact,
    }
}

/// Checks the purge definition on all sequences of length at most `depth`.
pub fn check_ni_bounded(net: &TransitionNetwork, depth: usize) -> NiVerdict {
    type Pair = (StateId, Option<StateId>);
    let start: Pair = (net.initial(), Some(net.initial()));
    let mut parent: HashMap<Pair, (Pair, PersonalizedAction)> = HashMap::new();
    let mut seen: HashSet<Pair> = HashSet::from([start]);
    let mut frontier = vec![start];

    let violation = |(x, y): Pair| -> Option<(AgentId, ObsId, Option<ObsId>)> {
        net.low().iter().find_map(|&l| {
            let seen = net.obs(x, l);
            let purged = y.map(|y| net.obs(y, l));
            (purged != Some(seen)).then_some((l, seen, purged))
        })
    };
    let rebuild = |mut p: Pair, parent: &HashMap<Pair, (Pair, PersonalizedAction)>| {
        let mut alpha = Vec::new();
        while let Some(&(prev, pa)) = parent.get(&p) {
            alpha.push(pa);
            p = prev;
        }
        alpha.reverse();
        alpha
    };

    for _ in 0..depth {
        let mut next = Vec::new();
        for &(x, y) in &frontier {
            for (u, a, x2) in net.moves(x) {
                let y2 = if net.is_high(u) {
                    y
                } else {
                    y.and_then(|y| net.step(y, u, a))
                };
                let p = (x2, y2);
                if !seen.insert(p) {
                    continue;
                }
                parent.insert(p, ((x, y), PersonalizedAction::new(u, a)));
                if let Some((agent, observed, purged)) = violation(p) {
                    return NiVerdict {
                        holds: false,
                        witness: Some(NiWitness::Sequence(SequenceWitness {
                            alpha: rebuild(p, &parent),
                            agent,
                            observed,
                            purged,
                        })),
                        method: NiMethod::Bounded { depth },
                    };
                }
                next.push(p);
            }
        }
        frontier = next;
    }
    NiVerdict {
        holds: true,
        witness: None,
        method: NiMethod::Bounded { depth },
    }
}

/// Every executable sequence of length at most `depth` that violates the
/// purge condition, in depth-first lexicographic order of (agent, action) ids.
/// Exponential; intended for small depths.
pub fn enumerate_violations(net: &TransitionNetwork, depth: usize) -> Vec<SequenceWitness> {
    fn go(
        net: &TransitionNetwork,
        alpha: &mut ActionSequence,
        at: StateId,
        depth: usize,
        out: &mut Vec<SequenceWitness>,
    ) {
        let purged = net.exec_unchecked(net.initial(), &purge(alpha, net.high()));
        for &l in net.low() {
            let observed = net.obs(at, l);
            let p = purged.map(|t| net.obs(t, l));
            if p != Some(observed) {
                out.push(SequenceWitness {
                    alpha: alpha.clone(),
                    agent: l,
                    observed,
                    purged: p,
                });
            }
        }
        if alpha.len() == depth {
            return;
        }
        for (u, a, t) in net.moves(at) {
            alpha.push(PersonalizedAction::new(u, a));
            go(net, alpha, t, depth, out);
            alpha.pop();
        }
    }
    let mut out = Vec::new();
    go(net, &mut Vec::new(), net.initial(), depth, &mut out);
    out
}

/// Default bound for the sequence oracle: `2·|S|`, capped at 12.
pub fn default_depth(net: &TransitionNetwork) -> usize {
    (2 * net.num_states()).min(12)
}
