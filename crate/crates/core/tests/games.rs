mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{random_goal, random_net, NetParams};
use effsec_core::effsec::effective_security;
use effsec_core::fixtures;
use effsec_core::games::{
    solve, solve_fair, solve_strict, verify_set_strategy, verify_strategy, BeliefArena, BeliefKey,
    Counterexample, Move, Semantics, SetStrategy, Strategy, DEFAULT_BUDGET,
};
use effsec_core::idealize::idealize;
use effsec_core::{AgentId, GameError, Goal, NetworkBuilder, Role, StateId, TransitionNetwork};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn states(net: &TransitionNetwork, names: &[&str]) -> BTreeSet<StateId> {
    names.iter().map(|n| net.state_id(n).unwrap()).collect()
}

fn range(net: &TransitionNetwork, lo: usize, hi: usize) -> BTreeSet<StateId> {
    (lo..=hi).map(|i| net.state_id(&format!("s{i}")).unwrap()).collect()
}

fn low(net: &TransitionNetwork) -> AgentId {
    net.agent_id("L").unwrap()
}

fn reach_access(net: &TransitionNetwork) -> Goal {
    Goal::reachability(states(net, &["s15", "s16"]))
}

/// Solves and, on a win, checks the strategy with the independent verifier.
fn solve_checked(net: &TransitionNetwork, att: AgentId, goal: &Goal, sem: Semantics) -> bool {
    let r = solve(net, att, goal, sem, DEFAULT_BUDGET).unwrap();
    assert_eq!(r.winning, r.strategy.is_some());
    if let Some(s) = &r.strategy {
        let v = verify_strategy(net, s, goal, sem).unwrap();
        assert!(v.ok, "{}: unverified winner {:?}", net.name(), v.counterexample);
    }
    r.winning
}

fn one_state(with_target: bool) -> (TransitionNetwork, Goal) {
    let net = NetworkBuilder::new("One")
        .state("s0")
        .agent("H", Role::High)
        .agent("L", Role::Low)
        .action("a")
        .observation("o")
        .initial("s0")
        .obs("s0", "H", "o")
        .obs("s0", "L", "o")
        .transition("s0", "L", "a", "s0")
        .transition("s0", "H", "a", "s0")
        .build()
        .unwrap();
    let goal = if with_target {
        Goal::reachability([StateId(0)])
    } else {
        Goal::safety([StateId(0)])
    };
    (net, goal)
}

#[test]
fn mb_arena_beliefs() {
    let net = fixtures::mb().network;
    let arena = BeliefArena::new(&net, low(&net)).unwrap();
    let init = arena.node(arena.initial().unwrap());
    assert_eq!(net.obs_name(init.key.label), "init");
    assert_eq!(init.key.belief.iter().copied().collect::<BTreeSet<_>>(), range(&net, 0, 2));

    let beliefs = |label: &str| -> Vec<BTreeSet<StateId>> {
        arena
            .nodes_with_label(label)
            .into_iter()
            .map(|n| arena.node(n).key.belief.iter().copied().collect())
            .collect()
    };
    assert!(beliefs("noObs").contains(&range(&net, 3, 10)));
    assert!(beliefs("MNameA").contains(&states(&net, &["s11", "s12"])));
    for b in beliefs("MNameA") {
        assert!(b.is_subset(&states(&net, &["s11", "s12"])));
    }
}

#[test]
fn single_state_arena() {
    let (net, _) = one_state(false);
    let arena = BeliefArena::new(&net, low(&net)).unwrap();
    assert_eq!(arena.len(), 1);
    assert!(arena.node(0).choices.iter().all(|c| c.successors.is_empty()));
    assert!(arena.node(0).choices.iter().any(|c| c.stutter_cycle));
}

#[test]
fn high_attacker_is_rejected() {
    let net = fixtures::mb().network;
    let h = net.agent_id("H").unwrap();
    assert!(matches!(BeliefArena::new(&net, h), Err(GameError::NotLow(_))));
}

#[test]
fn mb_fair_attack() {
    let net = fixtures::mb().network;
    let goal = reach_access(&net);
    let r = solve(&net, low(&net), &goal, Semantics::Fair, DEFAULT_BUDGET).unwrap();
    assert!(r.winning);
    let s = r.strategy.unwrap();
    let pick = |label: &str| s.move_for_label(&net, label).map(|m| m.display(&net));
    assert_eq!(pick("noObs").as_deref(), Some("chkWeb"));
    assert_eq!(pick("MNameA").as_deref(), Some("auth_A"));
    assert_eq!(pick("MNameB").as_deref(), Some("auth_B"));
    assert!(verify_strategy(&net, &s, &goal, Semantics::Fair).unwrap().ok);
    // Under adversarial scheduling the same strategy can be stalled.
    let strict = verify_strategy(&net, &s, &goal, Semantics::Strict).unwrap();
    assert!(!strict.ok);
    assert!(strict.counterexample.unwrap().replays(&net, &goal));
}

#[test]
fn swapped_authentication_loops_at_mnameb() {
    let net = fixtures::mb().network;
    let goal = reach_access(&net);
    let won = solve(&net, low(&net), &goal, Semantics::Fair, DEFAULT_BUDGET).unwrap();
    let mut s = won.strategy.unwrap();
    let a = Move::Act(net.action_id("auth_A").unwrap());
    let b = Move::Act(net.action_id("auth_B").unwrap());
    for mv in s.moves.values_mut() {
        *mv = if *mv == a { b } else if *mv == b { a } else { *mv };
    }
    let v = verify_strategy(&net, &s, &goal, Semantics::Fair).unwrap();
    assert!(!v.ok);
    let cx = v.counterexample.unwrap();
    assert!(cx.replays(&net, &goal));
    let Counterexample::Lasso { prefix, cycle } = &cx else {
        panic!("expected a lasso, got {}", cx.describe(&net));
    };
    let entry = net.exec(net.initial(), prefix).unwrap().unwrap();
    let mut at = entry;
    for pa in cycle {
        assert_eq!(net.obs_name(net.obs(at, low(&net))), "MNameB", "{}", cx.describe(&net));
        at = net.step(at, pa.agent, pa.action).unwrap();
    }
    assert_eq!(at, entry);
}

#[test]
fn fixture_verdicts() {
    let ma = fixtures::ma().network;
    let mb = fixtures::mb().network;
    let ima = idealize(&ma).network;
    let imb = idealize(&mb).network;
    for net in [&ma, &mb, &ima, &imb] {
        let goal = reach_access(net);
        assert!(!solve_checked(net, low(net), &goal, Semantics::Strict), "{} strict", net.name());
    }
    assert!(solve_checked(&mb, low(&mb), &reach_access(&mb), Semantics::Fair));
    for net in [&ma, &ima, &imb] {
        assert!(!solve_checked(net, low(net), &reach_access(net), Semantics::Fair), "{} fair", net.name());
    }
}

#[test]
fn trivial_targets_are_won() {
    let net = fixtures::ma().network;
    let everything = Goal::reachability(net.states());
    for sem in [Semantics::Strict, Semantics::Fair] {
        assert!(solve_checked(&net, low(&net), &everything, sem));
    }
    let (one, goal) = one_state(true);
    for sem in [Semantics::Strict, Semantics::Fair] {
        assert!(solve_checked(&one, low(&one), &goal, sem));
        let s = solve(&one, low(&one), &goal, sem, DEFAULT_BUDGET).unwrap().strategy.unwrap();
        assert!(verify_strategy(&one, &s, &goal, sem).unwrap().ok);
    }
}

#[test]
fn safety_at_initial_state_is_lost() {
    let (net, goal) = one_state(false);
    for sem in [Semantics::Strict, Semantics::Fair] {
        assert!(!solve_checked(&net, low(&net), &goal, sem));
    }
}

#[test]
fn solvers_reject_empty_targets() {
    let net = fixtures::ma().network;
    let arena = BeliefArena::new(&net, low(&net)).unwrap();
    let empty = Goal::reachability([]);
    assert!(matches!(solve_strict(&arena, &empty), Err(GameError::EmptyTarget)));
    assert!(matches!(solve_fair(&arena, &empty, 10), Err(GameError::EmptyTarget)));
}

#[test]
fn verifier_reports_missing_moves() {
    let net = fixtures::mb().network;
    let goal = reach_access(&net);
    let s = Strategy {
        attacker: low(&net),
        settled: goal.states.clone(),
        moves: BTreeMap::new(),
        histories: BTreeMap::new(),
    };
    assert!(matches!(
        verify_strategy(&net, &s, &goal, Semantics::Fair),
        Err(GameError::MissingMove(_))
    ));
}

#[test]
fn strategy_json_lists_histories() {
    let net = fixtures::mb().network;
    let s = solve(&net, low(&net), &reach_access(&net), Semantics::Fair, DEFAULT_BUDGET)
        .unwrap()
        .strategy
        .unwrap();
    let j = s.to_json(&net);
    assert_eq!(j["attacker"], "L");
    let entries = j["entries"].as_array().unwrap();
    assert!(entries.iter().any(|e| e["observation"] == "noObs" && e["action"] == "chkWeb"));
    assert!(entries.iter().all(|e| e["history"][0] == "init"));
}

/// Least superset of `start` closed under unobservable moves that are
/// allowed by `mv`, skipping settled states; written independently of the arena.
fn bfs_closure(
    net: &TransitionNetwork,
    att: AgentId,
    settled: &BTreeSet<StateId>,
    start: &[StateId],
    mv: Option<Move>,
) -> BTreeSet<StateId> {
    let label = net.obs(start[0], att);
    let mut seen: BTreeSet<StateId> = start.iter().copied().collect();
    let mut queue: std::collections::VecDeque<StateId> = start.iter().copied().collect();
    while let Some(s) = queue.pop_front() {
        for (u, a, t) in net.transitions().filter(|&(x, ..)| x == s).map(|(_, u, a, t)| (u, a, t)) {
            let allowed = u != att || mv == Some(Move::Act(a));
            if allowed && !settled.contains(&t) && net.obs(t, att) == label && seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    seen
}

fn check_arena(arena: &BeliefArena) {
    let net = arena.net();
    let att = arena.attacker();
    let settled = arena.settled().clone();
    for (_, node) in arena.nodes() {
        let b = &node.key.belief;
        assert!(b.iter().all(|&s| net.obs(s, att) == node.key.label));
        let sat = bfs_closure(net, att, &settled, b, None);
        assert_eq!(sat, b.iter().copied().collect::<BTreeSet<_>>());
        for c in &node.choices {
            let closure = bfs_closure(net, att, &settled, b, Some(c.mv));
            assert_eq!(closure, c.closure.iter().copied().collect::<BTreeSet<_>>());
            let mut images: BTreeMap<_, BTreeSet<StateId>> = BTreeMap::new();
            for &s in &closure {
                for (u, a, t) in net.moves(s) {
                    let allowed = u != att || c.mv == Move::Act(a);
                    if allowed && !settled.contains(&t) && net.obs(t, att) != node.key.label {
                        images.entry(net.obs(t, att)).or_default().insert(t);
                    }
                }
            }
            assert_eq!(images.len(), c.successors.len());
            for &(o, m) in &c.successors {
                let entry: Vec<StateId> = images[&o].iter().copied().collect();
                let expect = bfs_closure(net, att, &settled, &entry, None);
                let next = &arena.node(m).key;
                assert_eq!(next.label, o);
                assert_eq!(next.belief.iter().copied().collect::<BTreeSet<_>>(), expect);
            }
        }
    }
}

#[test]
fn mb_arena_matches_bfs_closures() {
    let net = fixtures::mb().network;
    check_arena(&BeliefArena::new(&net, low(&net)).unwrap());
    check_arena(&BeliefArena::for_goal(&net, low(&net), &reach_access(&net)).unwrap());
}

fn first_low(net: &TransitionNetwork) -> AgentId {
    *net.low().iter().next().unwrap()
}

/// Every set-valued (or singleton-valued) strategy over the arena's nodes.
fn enumerate_strategies(arena: &BeliefArena, singletons: bool) -> Vec<SetStrategy> {
    let options: Vec<(BeliefKey, Vec<BTreeSet<Move>>)> = arena
        .nodes()
        .map(|(_, n)| {
            let moves: Vec<Move> = n.choices.iter().map(|c| c.mv).collect();
            let subsets = (1u32..(1 << moves.len()))
                .filter(|m| !singletons || m.count_ones() == 1)
                .map(|m| (0..moves.len()).filter(|i| m & (1 << i) != 0).map(|i| moves[i]).collect())
                .collect();
            (n.key.clone(), subsets)
        })
        .collect();
    let mut out = vec![SetStrategy::new()];
    for (key, subsets) in options {
        out = out
            .into_iter()
            .flat_map(|s| {
                subsets
                    .iter()
                    .map(|sub| {
                        let mut s = s.clone();
                        s.insert(key.clone(), sub.clone());
                        s
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    out
}

fn strategy_count(arena: &BeliefArena, singletons: bool) -> usize {
    arena
        .nodes()
        .map(|(_, n)| if singletons { n.choices.len() } else { (1usize << n.choices.len()) - 1 })
        .product()
}

#[test]
fn enumeration_oracles_on_small_nets() {
    let mut tested = 0;
    for seed in 0u64.. {
        if tested >= 40 || seed > 5000 {
            break;
        }
        let net = random_net(seed, NetParams::small().with_states(5).single_low());
        let att = first_low(&net);
        let goal = random_goal(seed, &net, seed % 2 == 0);
        let arena = BeliefArena::for_goal(&net, att, &goal).unwrap();
        if arena.len() > 4 || strategy_count(&arena, false) > 400 {
            continue;
        }
        tested += 1;
        for sem in [Semantics::Strict, Semantics::Fair] {
            let det = solve_checked(&net, att, &goal, sem);
            let wins = |s: &SetStrategy| verify_set_strategy(&net, att, s, &goal, sem).unwrap().ok;
            let det_oracle = enumerate_strategies(&arena, true).iter().any(wins);
            assert_eq!(det, det_oracle, "seed {seed} {sem}");
            let set_oracle = enumerate_strategies(&arena, false).iter().any(wins);
            assert_eq!(det, set_oracle, "seed {seed} {sem}: set-valued winner without a deterministic one");
        }
    }
    assert!(tested >= 40, "only {tested} small arenas");
}

/// Random execution consistent with a random positional attacker strategy,
/// tracked through the arena.
fn simulate(net: &TransitionNetwork, arena: &BeliefArena, rng: &mut ChaCha8Rng, steps: usize) {
    let att = arena.attacker();
    let choice: Vec<usize> = arena
        .nodes()
        .map(|(_, n)| rng.gen_range(0..n.choices.len()))
        .collect();
    let mut node = arena.initial().unwrap();
    let mut path = vec![net.initial()];
    let mut labels = vec![arena.node(node).key.label];
    let mut s = net.initial();
    for _ in 0..steps {
        let mv = arena.node(node).choices[choice[node]].mv;
        let options: Vec<(AgentId, effsec_core::ActionId, StateId)> = net
            .moves(s)
            .filter(|&(u, a, _)| u != att || mv == Move::Act(a))
            .collect();
        if options.is_empty() {
            break;
        }
        let (_, _, t) = options[rng.gen_range(0..options.len())];
        if net.obs(t, att) != net.obs(s, att) {
            node = arena
                .successor(node, choice[node], net.obs(t, att))
                .expect("observable step has an arena edge");
            labels.push(net.obs(t, att));
            assert!(arena.node(node).key.belief.contains(&t));
        }
        s = t;
        path.push(t);
        assert!(arena.node(node).choices[choice[node]].closure.contains(&s));
    }
    assert_eq!(net.reduced_obs(&path, att), labels);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn strict_wins_are_fair_wins(seed in any::<u64>(), reach in any::<bool>()) {
        let net = random_net(seed, NetParams::small());
        let att = first_low(&net);
        let goal = random_goal(seed, &net, reach);
        let strict = solve_checked(&net, att, &goal, Semantics::Strict);
        let fair = solve_checked(&net, att, &goal, Semantics::Fair);
        prop_assert!(!strict || fair, "seed {}", seed);
    }

    #[test]
    fn arena_is_a_sound_abstraction(seed in any::<u64>()) {
        let net = random_net(seed, NetParams::small());
        let arena = BeliefArena::new(&net, first_low(&net)).unwrap();
        check_arena(&arena);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            simulate(&net, &arena, &mut rng, 12);
        }
    }

    #[test]
    fn safety_and_reachability_are_dual(seed in any::<u64>()) {
        let net = random_net(seed, NetParams::small());
        let att = first_low(&net);
        let x = random_goal(seed, &net, false).states;
        for sem in [Semantics::Strict, Semantics::Fair] {
            let avoid = Goal::safety(x.clone());
            let reach = Goal::reachability(x.clone());
            let attacker_avoids = solve_checked(&net, att, &avoid, sem);
            let es = effective_security(&net, att, &reach, sem, DEFAULT_BUDGET).unwrap();
            prop_assert_eq!(attacker_avoids, !es.effectively_secure);
            let attacker_reaches = solve_checked(&net, att, &reach, sem);
            let es = effective_security(&net, att, &avoid, sem, DEFAULT_BUDGET).unwrap();
            prop_assert_eq!(attacker_reaches, !es.effectively_secure);
        }
    }

    #[test]
    fn counterexamples_replay(seed in any::<u64>(), reach in any::<bool>()) {
        let net = random_net(seed, NetParams::small());
        let att = first_low(&net);
        let goal = random_goal(seed, &net, reach);
        let arena = BeliefArena::for_goal(&net, att, &goal).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let moves: SetStrategy = arena
            .nodes()
            .map(|(_, n)| {
                let c = &n.choices[rng.gen_range(0..n.choices.len())];
                (n.key.clone(), BTreeSet::from([c.mv]))
            })
            .collect();
        for sem in [Semantics::Strict, Semantics::Fair] {
            let v = verify_set_strategy(&net, att, &moves, &goal, sem).unwrap();
            prop_assert_eq!(v.ok, v.counterexample.is_none());
            if let Some(cx) = v.counterexample {
                prop_assert!(cx.replays(&net, &goal), "seed {}: {}", seed, cx.describe(&net));
            }
        }
    }
}
