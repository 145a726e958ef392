//! Random availability-aware networks and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use effsec_core::noninterference::compute_rstar;
use effsec_core::{Goal, NetworkBuilder, ObservationPartition, Role, TransitionNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
pub struct NetParams {
    pub max_states: usize,
    pub max_high: usize,
    pub max_low: usize,
    pub max_actions: usize,
    /// Size of the label pool shared by all agents.
    pub max_labels: usize,
    /// Probability that an action is available for a given (agent, label).
    pub density: f64,
    /// Make every transition defined.
    pub total: bool,
    /// Give the first High agent a move in every state.
    pub high_always_enabled: bool,
}

impl Default for NetParams {
    fn default() -> Self {
        Self {
            max_states: 6,
            max_high: 2,
            max_low: 2,
            max_actions: 3,
            max_labels: 4,
            density: 0.5,
            total: false,
            high_always_enabled: false,
        }
    }
}

impl NetParams {
    pub fn small() -> Self {
        Self::default()
    }

    pub fn with_states(mut self, n: usize) -> Self {
        self.max_states = n;
        self
    }

    pub fn single_low(mut self) -> Self {
        self.max_low = 1;
        self
    }

    pub fn total(mut self) -> Self {
        self.total = true;
        self
    }

    pub fn high_enabled(mut self) -> Self {
        self.high_always_enabled = true;
        self
    }

    pub fn labels(mut self, n: usize) -> Self {
        self.max_labels = n;
        self
    }
}

/// A random network that satisfies availability-awareness by construction:
/// each agent's action set is chosen per observation label, not per state.
pub fn random_net(seed: u64, p: NetParams) -> TransitionNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=p.max_states);
    let nh = rng.gen_range(1..=p.max_high);
    let nl = rng.gen_range(1..=p.max_low);
    let na = rng.gen_range(1..=p.max_actions);
    let nlab = rng.gen_range(1..=p.max_labels);

    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let agents: Vec<(String, Role)> = (0..nh)
        .map(|i| (format!("H{i}"), Role::High))
        .chain((0..nl).map(|i| (format!("L{i}"), Role::Low)))
        .collect();
    let actions: Vec<String> = (0..na).map(|i| format!("a{i}")).collect();
    let labels: Vec<String> = (0..nlab).map(|i| format!("o{i}")).collect();

    let mut b = NetworkBuilder::new(format!("R{seed}"))
        .states(states.clone())
        .actions(actions.clone())
        .observations(labels.clone())
        .initial("s0");
    for (u, r) in &agents {
        b = b.agent(u.clone(), *r);
    }
    for (k, (u, _)) in agents.iter().enumerate() {
        let obs: Vec<usize> = (0..n).map(|_| rng.gen_range(0..nlab)).collect();
        let mut avail: Vec<Vec<usize>> = (0..nlab)
            .map(|_| {
                (0..na)
                    .filter(|_| p.total || rng.gen_bool(p.density))
                    .collect()
            })
            .collect();
        if p.high_always_enabled && k == 0 {
            for set in avail.iter_mut() {
                if set.is_empty() {
                    set.push(rng.gen_range(0..na));
                }
            }
        }
        for s in 0..n {
            b = b.obs(states[s].clone(), u.clone(), labels[obs[s]].clone());
            for &a in &avail[obs[s]] {
                let t = rng.gen_range(0..n);
                b = b.transition(states[s].clone(), u.clone(), actions[a].clone(), states[t].clone());
            }
        }
    }
    b.build().expect("generated network is well-formed")
}

pub fn random_goal(seed: u64, net: &TransitionNetwork, reachability: bool) -> Goal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut states: BTreeSet<_> = net.states().filter(|_| rng.gen_bool(0.3)).collect();
    if states.is_empty() {
        states.insert(effsec_core::StateId::from(rng.gen_range(0..net.num_states())));
    }
    if reachability {
        Goal::reachability(states)
    } else {
        Goal::safety(states)
    }
}

/// All set partitions of `0..n`, as block index vectors.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max {
            cur.push(b);
            go(i + 1, n, cur, max.max(b + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Every observation partition whose application is noninterferent, found
/// by exhaustive search on the network the idealization works on.
pub fn ni_inducing_partitions(net: &TransitionNetwork) -> Vec<ObservationPartition> {
    use effsec_core::idealize::apply_unification;
    use effsec_core::noninterference::check_ni_exact;
    let base = if net.is_total() {
        net.clone()
    } else {
        net.totalize_low()
    };
    all_partitions(base.num_observations())
        .into_iter()
        .map(|l| ObservationPartition::from_block_indices(&l))
        .filter(|p| check_ni_exact(&apply_unification(&base, p).unwrap()).holds)
        .collect()
}

/// R* by iterating F literally on a relation matrix: seed with High steps,
/// close under equivalence, add Low-successor pairs, repeat until stable.
/// Unreachable states stay unrelated.
pub fn naive_rstar(net: &TransitionNetwork) -> Vec<Vec<bool>> {
    let n = net.num_states();
    let reach = net.reachable();
    let mut r = vec![vec![false; n]; n];
    for s in net.states() {
        r[s.index()][s.index()] = true;
        if !reach[s.index()] {
            continue;
        }
        for (u, _, t) in net.moves(s) {
            if net.is_high(u) {
                r[s.index()][t.index()] = true;
                r[t.index()][s.index()] = true;
            }
        }
    }
    loop {
        let before = r.clone();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if r[i][k] && r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
        for s1 in net.states() {
            for s2 in net.states() {
                if !r[s1.index()][s2.index()] || !reach[s1.index()] || !reach[s2.index()] {
                    continue;
                }
                for &l in net.low() {
                    for a in net.actions() {
                        if let (Some(t1), Some(t2)) = (net.step(s1, l, a), net.step(s2, l, a)) {
                            r[t1.index()][t2.index()] = true;
                            r[t2.index()][t1.index()] = true;
                        }
                    }
                }
            }
        }
        if r == before {
            return r;
        }
    }
}

pub fn agrees_with_naive(net: &TransitionNetwork) -> bool {
    let fast = compute_rstar(net);
    let slow = naive_rstar(net);
    net.states()
        .all(|a| net.states().all(|b| fast.same(a, b) == slow[a.index()][b.index()]))
}
