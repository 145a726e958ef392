//! Multi-agent asynchronous transition networks.
//!
//! A [`TransitionNetwork`] holds states, agents split into High and Low
//! roles, actions, observation labels, a per-agent observation function and
//! a deterministic, possibly partial, transition function. All identifiers
//! are interned into dense typed indices; names are kept for display and
//! serialization.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::ModelError;

macro_rules! define_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            #[inline]
            fn from(i: usize) -> Self {
                Self(i as u32)
            }
        }

        impl From<$name> for usize {
            #[inline]
            fn from(id: $name) -> usize {
                id.0 as usize
            }
        }
    };
}

define_id!(
    /// Index of a state in its network.
    StateId
);
define_id!(
    /// Index of an agent in its network.
    AgentId
);
define_id!(
    /// Index of an action in its network.
    ActionId
);
define_id!(
    /// Index of an observation label in its network.
    ObsId
);

/// Clearance of an agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    High,
    Low,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::High => f.write_str("high"),
            Role::Low => f.write_str("low"),
        }
    }
}

/// A `(user, action)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PersonalizedAction {
    pub agent: AgentId,
    pub action: ActionId,
}

impl PersonalizedAction {
    pub fn new(agent: AgentId, action: ActionId) -> Self {
        Self { agent, action }
    }
}

/// A finite string of personalized actions.
pub type ActionSequence = Vec<PersonalizedAction>;

/// The system model.
#[derive(Clone, Debug)]
pub struct TransitionNetwork {
    name: String,
    states: Vec<String>,
    agents: Vec<String>,
    actions: Vec<String>,
    observations: Vec<String>,
    high: BTreeSet<AgentId>,
    low: BTreeSet<AgentId>,
    initial: StateId,
    /// `obs[state][agent]`
    obs: Vec<Vec<ObsId>>,
    /// `delta[state][agent][action]`
    delta: Vec<Vec<Vec<Option<StateId>>>>,
    state_index: HashMap<String, StateId>,
    agent_index: HashMap<String, AgentId>,
    action_index: HashMap<String, ActionId>,
    obs_index: HashMap<String, ObsId>,
}

impl TransitionNetwork {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_observations(&self) -> usize {
        self.observations.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = StateId> + Clone {
        (0..self.states.len()).map(StateId::from)
    }

    pub fn agents(&self) -> impl ExactSizeIterator<Item = AgentId> + Clone {
        (0..self.agents.len()).map(AgentId::from)
    }

    pub fn actions(&self) -> impl ExactSizeIterator<Item = ActionId> + Clone {
        (0..self.actions.len()).map(ActionId::from)
    }

    pub fn observations(&self) -> impl ExactSizeIterator<Item = ObsId> + Clone {
        (0..self.observations.len()).map(ObsId::from)
    }

    pub fn high(&self) -> &BTreeSet<AgentId> {
        &self.high
    }

    pub fn low(&self) -> &BTreeSet<AgentId> {
        &self.low
    }

    pub fn is_high(&self, u: AgentId) -> bool {
        self.high.contains(&u)
    }

    pub fn is_low(&self, u: AgentId) -> bool {
        self.low.contains(&u)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.index()]
    }

    pub fn agent_name(&self, u: AgentId) -> &str {
        &self.agents[u.index()]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.index()]
    }

    pub fn obs_name(&self, o: ObsId) -> &str {
        &self.observations[o.index()]
    }

    pub fn state_id(&self, name: &str) -> Result<StateId, ModelError> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownState(name.to_owned()))
    }

    pub fn agent_id(&self, name: &str) -> Result<AgentId, ModelError> {
        self.agent_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownAgent(name.to_owned()))
    }

    pub fn action_id(&self, name: &str) -> Result<ActionId, ModelError> {
        self.action_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownAction(name.to_owned()))
    }

    pub fn obs_id(&self, name: &str) -> Result<ObsId, ModelError> {
        self.obs_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownObservation(name.to_owned()))
    }

    /// Resolves `(agent, action)` name pairs into a sequence.
    pub fn sequence(&self, items: &[(&str, &str)]) -> Result<ActionSequence, ModelError> {
        items
            .iter()
            .map(|(u, a)| Ok(PersonalizedAction::new(self.agent_id(u)?, self.action_id(a)?)))
            .collect()
    }

    /// `[s]_u`
    #[inline]
    pub fn obs(&self, s: StateId, u: AgentId) -> ObsId {
        self.obs[s.index()][u.index()]
    }

    /// `do(s, u, a)`; `None` when undefined.
    #[inline]
    pub fn step(&self, s: StateId, u: AgentId, a: ActionId) -> Option<StateId> {
        self.delta[s.index()][u.index()][a.index()]
    }

    /// All defined transitions as `(source, agent, action, target)`, in id order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, AgentId, ActionId, StateId)> + '_ {
        self.states().flat_map(move |s| {
            self.agents().flat_map(move |u| {
                self.actions()
                    .filter_map(move |a| self.step(s, u, a).map(|t| (s, u, a, t)))
            })
        })
    }

    /// Defined moves out of `s` as `(agent, action, target)`.
    pub fn moves(&self, s: StateId) -> impl Iterator<Item = (AgentId, ActionId, StateId)> + '_ {
        self.agents().flat_map(move |u| {
            self.actions()
                .filter_map(move |a| self.step(s, u, a).map(|t| (u, a, t)))
        })
    }

    pub fn is_total(&self) -> bool {
        self.delta
            .iter()
            .all(|per_agent| per_agent.iter().all(|row| row.iter().all(Option::is_some)))
    }

    fn check_state(&self, s: StateId) -> Result<(), ModelError> {
        if s.index() < self.states.len() {
            Ok(())
        } else {
            Err(ModelError::StateOutOfRange(s.0))
        }
    }

    fn check_agent(&self, u: AgentId) -> Result<(), ModelError> {
        if u.index() < self.agents.len() {
            Ok(())
        } else {
            Err(ModelError::AgentOutOfRange(u.0))
        }
    }

    fn check_action(&self, a: ActionId) -> Result<(), ModelError> {
        if a.index() < self.actions.len() {
            Ok(())
        } else {
            Err(ModelError::ActionOutOfRange(a.0))
        }
    }

    /// `act(s, u)`, the actions with a defined transition at `(s, u)`.
    pub fn available_actions(
        &self,
        s: StateId,
        u: AgentId,
    ) -> Result<BTreeSet<ActionId>, ModelError> {
        self.check_state(s)?;
        self.check_agent(u)?;
        Ok(self.available(s, u).collect())
    }

    pub(crate) fn available(&self, s: StateId, u: AgentId) -> impl Iterator<Item = ActionId> + '_ {
        self.delta[s.index()][u.index()]
            .iter()
            .enumerate()
            .filter_map(|(a, t)| t.map(|_| ActionId::from(a)))
    }

    pub(crate) fn has_moves(&self, s: StateId, u: AgentId) -> bool {
        self.delta[s.index()][u.index()].iter().any(Option::is_some)
    }

    /// Folds `alpha` from `s`; `Ok(None)` as soon as a step is undefined.
    pub fn exec(&self, s: StateId, alpha: &[PersonalizedAction]) -> Result<Option<StateId>, ModelError> {
        self.check_state(s)?;
        for pa in alpha {
            self.check_agent(pa.agent)?;
            self.check_action(pa.action)?;
        }
        Ok(self.exec_unchecked(s, alpha))
    }

    pub(crate) fn exec_unchecked(&self, s: StateId, alpha: &[PersonalizedAction]) -> Option<StateId> {
        alpha
            .iter()
            .try_fold(s, |cur, pa| self.step(cur, pa.agent, pa.action))
    }

    /// States reachable from the initial state through any defined transition.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial.index()] = true;
        while let Some(s) = queue.pop_front() {
            for (_, _, t) in self.moves(s) {
                if !seen[t.index()] {
                    seen[t.index()] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// The `U`-total extension: undefined entries of agents in `U` become self-loops.
    pub fn totalize(&self, agents: &BTreeSet<AgentId>) -> Result<TransitionNetwork, ModelError> {
        for &u in agents {
            self.check_agent(u)?;
        }
        let mut out = self.clone();
        for (s, per_agent) in out.delta.iter_mut().enumerate() {
            for &u in agents {
                for t in per_agent[u.index()].iter_mut() {
                    t.get_or_insert(StateId::from(s));
                }
            }
        }
        Ok(out)
    }

    /// `total_L(M)`.
    pub fn totalize_low(&self) -> TransitionNetwork {
        self.totalize(&self.low.clone())
            .expect("low agents belong to the network")
    }

    /// Stuttering-reduced observations of `u` along `path`.
    pub fn reduced_obs(&self, path: &[StateId], u: AgentId) -> Vec<ObsId> {
        let mut out: Vec<ObsId> = Vec::with_capacity(path.len());
        for &s in path {
            let o = self.obs(s, u);
            if out.last() != Some(&o) {
                out.push(o);
            }
        }
        out
    }

    /// Checks every structural invariant and lists all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        let overlap: Vec<AgentId> = self.high.intersection(&self.low).copied().collect();
        if !overlap.is_empty() {
            violations.push(Violation::RoleOverlap { agents: overlap });
        }
        for u in self.agents() {
            if !self.high.contains(&u) && !self.low.contains(&u) {
                violations.push(Violation::RoleMissing { agent: u });
            }
        }

        for u in self.agents() {
            let mut first_by_label: BTreeMap<ObsId, (StateId, Vec<ActionId>)> = BTreeMap::new();
            for s in self.states() {
                let acts: Vec<ActionId> = self.available(s, u).collect();
                match first_by_label.get(&self.obs(s, u)) {
                    None => {
                        first_by_label.insert(self.obs(s, u), (s, acts));
                    }
                    Some((first, first_acts)) => {
                        if *first_acts != acts {
                            violations.push(Violation::AvailabilityAwareness {
                                agent: u,
                                observation: self.obs(s, u),
                                first: *first,
                                second: s,
                            });
                        }
                    }
                }
            }
        }

        ValidationReport { violations }
    }

    /// Name-based canonical view, used for structural equality.
    fn canonical(&self) -> CanonicalNet<'_> {
        CanonicalNet {
            name: &self.name,
            states: self.states.iter().map(String::as_str).collect(),
            agents: self
                .agents()
                .map(|u| {
                    (
                        self.agent_name(u),
                        (self.high.contains(&u), self.low.contains(&u)),
                    )
                })
                .collect(),
            actions: self.actions.iter().map(String::as_str).collect(),
            observations: self.observations.iter().map(String::as_str).collect(),
            initial: self.state_name(self.initial),
            obs: self
                .states()
                .flat_map(|s| {
                    self.agents().map(move |u| {
                        (
                            (self.state_name(s), self.agent_name(u)),
                            self.obs_name(self.obs(s, u)),
                        )
                    })
                })
                .collect(),
            transitions: self
                .transitions()
                .map(|(s, u, a, t)| {
                    (
                        (self.state_name(s), self.agent_name(u), self.action_name(a)),
                        self.state_name(t),
                    )
                })
                .collect(),
        }
    }

    /// Returns a copy with a different name.
    pub fn renamed(&self, name: impl Into<String>) -> TransitionNetwork {
        let mut out = self.clone();
        out.name = name.into();
        out
    }

    /// Replaces the observation alphabet and relabels every `(state, agent)`.
    pub(crate) fn with_observations(
        &self,
        labels: Vec<String>,
        relabel: impl Fn(ObsId) -> ObsId,
    ) -> TransitionNetwork {
        let obs_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), ObsId::from(i)))
            .collect();
        TransitionNetwork {
            obs: self
                .obs
                .iter()
                .map(|row| row.iter().map(|&o| relabel(o)).collect())
                .collect(),
            observations: labels,
            obs_index,
            ..self.clone()
        }
    }
}

#[derive(PartialEq, Eq)]
struct CanonicalNet<'a> {
    name: &'a str,
    states: BTreeSet<&'a str>,
    agents: BTreeMap<&'a str, (bool, bool)>,
    actions: BTreeSet<&'a str>,
    observations: BTreeSet<&'a str>,
    initial: &'a str,
    obs: BTreeMap<(&'a str, &'a str), &'a str>,
    transitions: BTreeMap<(&'a str, &'a str, &'a str), &'a str>,
}

/// Structural equality: same named components, independent of index order.
impl PartialEq for TransitionNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for TransitionNetwork {}

/// `Purge_U(alpha)`: drops every item owned by an agent in `agents`.
pub fn purge(alpha: &[PersonalizedAction], agents: &BTreeSet<AgentId>) -> ActionSequence {
    alpha
        .iter()
        .filter(|pa| !agents.contains(&pa.agent))
        .copied()
        .collect()
}

/// One broken invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    RoleOverlap {
        agents: Vec<AgentId>,
    },
    RoleMissing {
        agent: AgentId,
    },
    /// `first` and `second` share the agent's observation but offer it
    /// different actions.
    AvailabilityAwareness {
        agent: AgentId,
        observation: ObsId,
        first: StateId,
        second: StateId,
    },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::RoleOverlap { .. } => "role-overlap",
            Violation::RoleMissing { .. } => "role-missing",
            Violation::AvailabilityAwareness { .. } => "availability-awareness",
        }
    }

    pub fn describe(&self, net: &TransitionNetwork) -> String {
        match self {
            Violation::RoleOverlap { agents } => format!(
                "agents declared both high and low: {}",
                agents
                    .iter()
                    .map(|&u| net.agent_name(u))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            Violation::RoleMissing { agent } => {
                format!("agent {} has no role", net.agent_name(*agent))
            }
            Violation::AvailabilityAwareness {
                agent,
                observation,
                first,
                second,
            } => format!(
                "agent {} observes {} in states {} and {} but has different available actions",
                net.agent_name(*agent),
                net.obs_name(*observation),
                net.state_name(*first),
                net.state_name(*second)
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

/// Incremental construction of a [`TransitionNetwork`] from names.
///
/// Referential integrity and determinism are enforced by [`build`](Self::build);
/// role partition and availability-awareness are left to
/// [`TransitionNetwork::validate`].
#[derive(Clone, Debug, Default)]
pub struct NetworkBuilder {
    name: String,
    states: Vec<String>,
    agents: Vec<(String, Role)>,
    actions: Vec<String>,
    observations: Vec<String>,
    initial: Option<String>,
    obs: Vec<(String, String, String)>,
    transitions: Vec<(String, String, String, String)>,
}

impl NetworkBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn state(mut self, name: impl Into<String>) -> Self {
        self.states.push(name.into());
        self
    }

    pub fn states<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.states.extend(names.into_iter().map(Into::into));
        self
    }

    /// Declaring the same agent with both roles is representable and is
    /// reported by validation.
    pub fn agent(mut self, name: impl Into<String>, role: Role) -> Self {
        self.agents.push((name.into(), role));
        self
    }

    pub fn action(mut self, name: impl Into<String>) -> Self {
        self.actions.push(name.into());
        self
    }

    pub fn actions<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.actions.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn observation(mut self, name: impl Into<String>) -> Self {
        self.observations.push(name.into());
        self
    }

    pub fn observations<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.observations.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn initial(mut self, state: impl Into<String>) -> Self {
        self.initial = Some(state.into());
        self
    }

    pub fn obs(
        mut self,
        state: impl Into<String>,
        agent: impl Into<String>,
        label: impl Into<String>,
    ) -> Self {
        self.obs.push((state.into(), agent.into(), label.into()));
        self
    }

    pub fn transition(
        mut self,
        src: impl Into<String>,
        agent: impl Into<String>,
        action: impl Into<String>,
        dst: impl Into<String>,
    ) -> Self {
        self.transitions
            .push((src.into(), agent.into(), action.into(), dst.into()));
        self
    }

    pub fn build(self) -> Result<TransitionNetwork, ModelError> {
        fn intern<I: From<usize> + Copy>(
            kind: &'static str,
            names: impl IntoIterator<Item = String>,
        ) -> Result<(Vec<String>, HashMap<String, I>), ModelError> {
            let mut list = Vec::new();
            let mut index = HashMap::new();
            for name in names {
                if index.contains_key(&name) {
                    return Err(ModelError::Duplicate { kind, name });
                }
                index.insert(name.clone(), I::from(list.len()));
                list.push(name);
            }
            Ok((list, index))
        }

        let (states, state_index) = intern::<StateId>("state", self.states)?;
        let (actions, action_index) = intern::<ActionId>("action", self.actions)?;
        let (observations, obs_index) = intern::<ObsId>("observation", self.observations)?;

        let mut agents = Vec::new();
        let mut agent_index: HashMap<String, AgentId> = HashMap::new();
        let mut high = BTreeSet::new();
        let mut low = BTreeSet::new();
        for (name, role) in self.agents {
            let id = *agent_index.entry(name.clone()).or_insert_with(|| {
                agents.push(name);
                AgentId::from(agents.len() - 1)
            });
            match role {
                Role::High => high.insert(id),
                Role::Low => low.insert(id),
            };
        }

        let lookup_state = |n: &str| {
            state_index
                .get(n)
                .copied()
                .ok_or_else(|| ModelError::UnknownState(n.to_owned()))
        };
        let lookup_agent = |n: &str| {
            agent_index
                .get(n)
                .copied()
                .ok_or_else(|| ModelError::UnknownAgent(n.to_owned()))
        };
        let lookup_action = |n: &str| {
            action_index
                .get(n)
                .copied()
                .ok_or_else(|| ModelError::UnknownAction(n.to_owned()))
        };

        let initial_name = self.initial.ok_or(ModelError::MissingInitial)?;
        let initial = lookup_state(&initial_name)?;

        let mut obs: Vec<Vec<Option<ObsId>>> = vec![vec![None; agents.len()]; states.len()];
        for (s, u, o) in &self.obs {
            let s = lookup_state(s)?;
            let u = lookup_agent(u)?;
            let o = obs_index
                .get(o)
                .copied()
                .ok_or_else(|| ModelError::UnknownObservation(o.clone()))?;
            if obs[s.index()][u.index()].replace(o).is_some() {
                return Err(ModelError::DuplicateObservation {
                    state: states[s.index()].clone(),
                    agent: agents[u.index()].clone(),
                });
            }
        }
        let obs = obs
            .into_iter()
            .enumerate()
            .map(|(s, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(u, o)| {
                        o.ok_or_else(|| ModelError::MissingObservation {
                            state: states[s].clone(),
                            agent: agents[u].clone(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut delta = vec![vec![vec![None; actions.len()]; agents.len()]; states.len()];
        for (src, u, a, dst) in &self.transitions {
            let s = lookup_state(src)?;
            let u = lookup_agent(u)?;
            let a = lookup_action(a)?;
            let t = lookup_state(dst)?;
            let slot = &mut delta[s.index()][u.index()][a.index()];
            if slot.is_some() {
                return Err(ModelError::DuplicateTransition {
                    state: states[s.index()].clone(),
                    agent: agents[u.index()].clone(),
                    action: actions[a.index()].clone(),
                });
            }
            *slot = Some(t);
        }

        Ok(TransitionNetwork {
            name: self.name,
            states,
            agents,
            actions,
            observations,
            high,
            low,
            initial,
            obs,
            delta,
            state_index,
            agent_index,
            action_index,
            obs_index,
        })
    }
}

/// Ordering that compares embedded digit runs numerically, so `s2 < s10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a.as_bytes(), b.as_bytes());
    loop {
        match (x.first(), y.first()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(c), Some(d)) if c.is_ascii_digit() && d.is_ascii_digit() => {
                let lx = x.iter().take_while(|c| c.is_ascii_digit()).count();
                let ly = y.iter().take_while(|c| c.is_ascii_digit()).count();
                let (nx, ny) = (trim_zeros(&x[..lx]), trim_zeros(&y[..ly]));
                let ord = nx.len().cmp(&ny.len()).then_with(|| nx.cmp(ny));
                if ord != Ordering::Equal {
                    return ord;
                }
                x = &x[lx..];
                y = &y[ly..];
            }
            (Some(c), Some(d)) => {
                if c != d {
                    return c.cmp(d);
                }
                x = &x[1..];
                y = &y[1..];
            }
        }
    }
}

fn trim_zeros(digits: &[u8]) -> &[u8] {
    let nz = digits.iter().take_while(|&&c| c == b'0').count();
    &digits[nz.min(digits.len().saturating_sub(1))..]
}
