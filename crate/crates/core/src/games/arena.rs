use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::{settled_for, BeliefKey, Move};
use crate::error::GameError;
use crate::goal::Goal;
use crate::model::{natural_cmp, AgentId, ObsId, StateId, TransitionNetwork};

pub type NodeId = usize;

/// One attacker move at a node and everything it induces.
#[derive(Clone, Debug)]
pub struct Choice {
    pub mv: Move,
    /// The belief saturated under unobservable moves, including the
    /// attacker's own stuttering; settled states excluded.
    pub closure: Vec<StateId>,
    /// Observable outcomes: new label and the node it leads to.
    pub successors: Vec<(ObsId, NodeId)>,
    /// Closure states where nobody can move.
    pub deadlocks: Vec<StateId>,
    /// Whether the unobservable moves inside the closure form a cycle.
    pub stutter_cycle: bool,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub key: BeliefKey,
    pub choices: Vec<Choice>,
    /// A shortest reduced observation history reaching this node.
    pub history: Vec<ObsId>,
}

/// Knowledge-subset game graph for one attacker.
///
/// Histories that visit a settled state are dropped from beliefs: for a
/// reachability goal they are already won. A node is only created for a
/// nonempty belief.
#[derive(Clone, Debug)]
pub struct BeliefArena {
    net: TransitionNetwork,
    attacker: AgentId,
    settled: BTreeSet<StateId>,
    is_settled: Vec<bool>,
    nodes: Vec<Node>,
    index: HashMap<BeliefKey, NodeId>,
    initial: Option<NodeId>,
}

impl BeliefArena {
    /// Arena without settled states.
    pub fn new(net: &TransitionNetwork, attacker: AgentId) -> Result<Self, GameError> {
        Self::with_settled(net, attacker, BTreeSet::new())
    }

    /// Arena for `goal`: reachability targets are settled.
    pub fn for_goal(net: &TransitionNetwork, attacker: AgentId, goal: &Goal) -> Result<Self, GameError> {
        super::check_goal(net, goal)?;
        Self::with_settled(net, attacker, settled_for(goal))
    }

    pub fn with_settled(
        net: &TransitionNetwork,
        attacker: AgentId,
        settled: BTreeSet<StateId>,
    ) -> Result<Self, GameError> {
        if attacker.index() >= net.num_agents() {
            return Err(crate::error::ModelError::AgentOutOfRange(attacker.0).into());
        }
        if !net.is_low(attacker) {
            return Err(GameError::NotLow(net.agent_name(attacker).to_owned()));
        }
        let mut is_settled = vec![false; net.num_states()];
        for &s in &settled {
            is_settled[s.index()] = true;
        }
        let mut arena = Self {
            net: net.clone(),
            attacker,
            settled,
            is_settled,
            nodes: Vec::new(),
            index: HashMap::new(),
            initial: None,
        };
        arena.build();
        Ok(arena)
    }

    fn build(&mut self) {
        let s0 = self.net.initial();
        if self.is_settled[s0.index()] {
            return;
        }
        let label = self.net.obs(s0, self.attacker);
        let key = BeliefKey::new(label, self.saturate(label, [s0], None));
        let mut queue = VecDeque::new();
        self.initial = Some(self.intern(key, vec![label], &mut queue));
        while let Some(n) = queue.pop_front() {
            let key = self.nodes[n].key.clone();
            let history = self.nodes[n].history.clone();
            let choices = self
                .moves_for(&key.belief)
                .into_iter()
                .map(|mv| self.choice(&key, mv, &history, &mut queue))
                .collect();
            self.nodes[n].choices = choices;
        }
    }

    fn intern(&mut self, key: BeliefKey, history: Vec<ObsId>, queue: &mut VecDeque<NodeId>) -> NodeId {
        if let Some(&n) = self.index.get(&key) {
            return n;
        }
        let n = self.nodes.len();
        self.index.insert(key.clone(), n);
        self.nodes.push(Node {
            key,
            choices: Vec::new(),
            history,
        });
        queue.push_back(n);
        n
    }

    /// Actions the attacker may pick, by name, then `Idle` when some action
    /// is unavailable throughout the belief.
    fn moves_for(&self, belief: &[StateId]) -> Vec<Move> {
        let mut avail = BTreeSet::new();
        for &s in belief {
            avail.extend(self.net.available(s, self.attacker));
        }
        let mut moves: Vec<_> = avail.iter().copied().collect();
        moves.sort_by(|&a, &b| natural_cmp(self.net.action_name(a), self.net.action_name(b)));
        let mut out: Vec<Move> = moves.into_iter().map(Move::Act).collect();
        if avail.len() < self.net.num_actions() || avail.is_empty() {
            out.push(Move::Idle);
        }
        out
    }

    /// Closes `start` under unobservable, unsettled moves of other agents and,
    /// if given, the attacker's own `mv`.
    fn saturate(
        &self,
        label: ObsId,
        start: impl IntoIterator<Item = StateId>,
        mv: Option<Move>,
    ) -> BTreeSet<StateId> {
        let mut set: BTreeSet<StateId> = start.into_iter().collect();
        let mut stack: Vec<StateId> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for (u, a, t) in self.net.moves(s) {
                if self.is_settled[t.index()] || self.net.obs(t, self.attacker) != label {
                    continue;
                }
                if u == self.attacker && mv != Some(Move::Act(a)) {
                    continue;
                }
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
        set
    }

    fn choice(
        &mut self,
        key: &BeliefKey,
        mv: Move,
        history: &[ObsId],
        queue: &mut VecDeque<NodeId>,
    ) -> Choice {
        let closure = self.saturate(key.label, key.belief.iter().copied(), Some(mv));
        let closure: Vec<StateId> = closure.into_iter().collect();
        let pos: HashMap<StateId, usize> = closure.iter().enumerate().map(|(i, &s)| (s, i)).collect();

        let mut internal: Vec<Vec<usize>> = vec![Vec::new(); closure.len()];
        let mut groups: BTreeMap<ObsId, BTreeSet<StateId>> = BTreeMap::new();
        let mut deadlocks = Vec::new();
        for (i, &s) in closure.iter().enumerate() {
            let mut any = false;
            for (u, a, t) in self.net.moves(s) {
                if u == self.attacker && mv != Move::Act(a) {
                    continue;
                }
                any = true;
                if self.is_settled[t.index()] {
                    continue;
                }
                let o = self.net.obs(t, self.attacker);
                if o == key.label {
                    internal[i].push(pos[&t]);
                } else {
                    groups.entry(o).or_default().insert(t);
                }
            }
            if !any {
                deadlocks.push(s);
            }
        }

        let mut labels: Vec<ObsId> = groups.keys().copied().collect();
        labels.sort_by(|&a, &b| natural_cmp(self.net.obs_name(a), self.net.obs_name(b)));
        let successors = labels
            .into_iter()
            .map(|o| {
                let entry = groups[&o].iter().copied();
                let next = BeliefKey::new(o, self.saturate(o, entry, None));
                let mut h = history.to_vec();
                h.push(o);
                (o, self.intern(next, h, queue))
            })
            .collect();

        Choice {
            mv,
            closure,
            successors,
            deadlocks,
            stutter_cycle: has_cycle(&internal),
        }
    }

    pub fn net(&self) -> &TransitionNetwork {
        &self.net
    }

    pub fn attacker(&self) -> AgentId {
        self.attacker
    }

    pub fn settled(&self) -> &BTreeSet<StateId> {
        &self.settled
    }

    pub fn is_settled(&self, s: StateId) -> bool {
        self.is_settled[s.index()]
    }

    /// `None` when the initial state is settled.
    pub fn initial(&self) -> Option<NodeId> {
        self.initial
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = (NodeId, &Node)> {
        self.nodes.iter().enumerate()
    }

    pub fn lookup(&self, key: &BeliefKey) -> Option<NodeId> {
        self.index.get(key).copied()
    }

    /// Nodes carrying the observation named `label`.
    pub fn nodes_with_label(&self, label: &str) -> Vec<NodeId> {
        let Ok(o) = self.net.obs_id(label) else {
            return Vec::new();
        };
        self.nodes()
            .filter(|(_, n)| n.key.label == o)
            .map(|(i, _)| i)
            .collect()
    }

    /// The successor of `node` under choice `choice` on observing `label`.
    pub fn successor(&self, node: NodeId, choice: usize, label: ObsId) -> Option<NodeId> {
        self.nodes[node].choices[choice]
            .successors
            .iter()
            .find(|(o, _)| *o == label)
            .map(|&(_, m)| m)
    }

    /// Index of `mv` among the node's choices.
    pub fn choice_index(&self, node: NodeId, mv: Move) -> Option<usize> {
        self.nodes[node].choices.iter().position(|c| c.mv == mv)
    }
}

/// Iterative three-colour DFS.
fn has_cycle(adj: &[Vec<usize>]) -> bool {
    let mut colour = vec![0u8; adj.len()];
    for root in 0..adj.len() {
        if colour[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour[root] = 1;
        while let Some(top) = stack.last_mut() {
            let (v, i) = *top;
            if i < adj[v].len() {
                top.1 += 1;
                let w = adj[v][i];
                match colour[w] {
                    0 => {
                        colour[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            } else {
                colour[v] = 2;
                stack.pop();
            }
        }
    }
    false
}
