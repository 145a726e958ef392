mod common;

use common::{agrees_with_naive, all_partitions, random_net, NetParams};
use effsec_core::fixtures;
use effsec_core::idealize::idealize;
use effsec_core::noninterference::{
    check_ni_bounded, check_ni_exact, check_unwinding, compute_rstar, default_depth,
    enumerate_violations, NiMethod, NiWitness,
};
use effsec_core::{NetworkBuilder, Role, StatePartition, TransitionNetwork};
use proptest::prelude::*;

fn chain(edges: &[(&str, &str, &str, &str)], n: usize) -> TransitionNetwork {
    let mut b = NetworkBuilder::new("C")
        .agent("H", Role::High)
        .agent("L", Role::Low)
        .actions(["a", "b"])
        .initial("s0");
    for i in 0..n {
        b = b
            .state(format!("s{i}"))
            .observation(format!("o{i}"))
            .obs(format!("s{i}"), "H", "o0")
            .obs(format!("s{i}"), "L", format!("o{i}"));
    }
    for &(s, u, a, t) in edges {
        b = b.transition(s, u, a, t);
    }
    b.build().unwrap()
}

#[test]
fn high_edge_joins_two_states() {
    let net = chain(&[("s0", "H", "a", "s1")], 2);
    assert_eq!(compute_rstar(&net).num_blocks(), 1);
}

#[test]
fn no_high_moves_gives_identity() {
    let net = chain(&[("s0", "L", "a", "s1"), ("s1", "L", "b", "s0")], 2);
    assert!(compute_rstar(&net).is_identity());
    assert!(check_ni_exact(&net).holds);
}

#[test]
fn rstar_on_totalized_mb() {
    let net = fixtures::mb().network.totalize_low();
    let r = compute_rstar(&net);
    let s = |x: &str| net.state_id(x).unwrap();
    assert!(r.same(s("s3"), s("s7")));
    assert!(r.same(s("s3"), s("s11")));
    assert!(agrees_with_naive(&net));
}

#[test]
fn rstar_matches_naive_on_fixtures() {
    for doc in [fixtures::ma(), fixtures::mb(), fixtures::ma_total(), fixtures::mb_total()] {
        assert!(agrees_with_naive(&doc.network), "{}", doc.network.name());
    }
}

#[test]
fn unwinding_on_mb() {
    let net = fixtures::mb().network;
    let report = check_unwinding(&net, &compute_rstar(&net));
    assert!(report.sc && report.lr);
    assert!(!report.oc);
    let l = net.agent_id("L").unwrap();
    assert!(report.oc_witnesses.iter().any(|w| {
        let pair = [net.obs_name(net.obs(w.first, l)), net.obs_name(net.obs(w.second, l))];
        w.agent == l && pair.contains(&"noObs") && pair.contains(&"MNameA")
    }));
}

#[test]
fn identity_breaks_local_respect() {
    let net = chain(&[("s0", "H", "a", "s1")], 2);
    let report = check_unwinding(&net, &StatePartition::identity(2));
    assert!(!report.lr);
    let w = &report.lr_counterexamples[0];
    assert_eq!(
        (net.state_name(w.state), net.agent_name(w.agent), net.action_name(w.action)),
        ("s0", "H", "a")
    );
}

#[test]
fn ideal_mb_is_an_unwinding() {
    let ideal = idealize(&fixtures::mb().network).network;
    assert!(check_unwinding(&ideal, &compute_rstar(&ideal)).is_unwinding());
}

#[test]
fn exact_verdicts_on_fixtures() {
    for doc in [fixtures::ma(), fixtures::mb(), fixtures::ma_total(), fixtures::mb_total()] {
        let v = check_ni_exact(&doc.network);
        assert!(!v.holds, "{}", doc.network.name());
        assert_eq!(v.method, NiMethod::Exact);
        assert!(matches!(v.witness, Some(NiWitness::StatePair(_))));
        assert!(v.witness_replays(&doc.network));
        assert!(check_ni_exact(&idealize(&doc.network).network).holds);
    }
}

#[test]
fn high_without_actions_is_secure() {
    let net = chain(&[("s0", "L", "a", "s1"), ("s1", "L", "a", "s0")], 2);
    let v = check_ni_exact(&net);
    assert!(v.holds && v.witness.is_none());
}

#[test]
fn witness_sequence_on_total_ma() {
    let net = fixtures::ma_total().network;
    let alpha = net
        .sequence(&[("Env", "MnameA"), ("Env", "GnameD"), ("H", "publish"), ("L", "chkWeb")])
        .unwrap();
    let l = net.agent_id("L").unwrap();
    let all = enumerate_violations(&net, 4);
    let w = all.iter().find(|w| w.alpha == alpha && w.agent == l).expect("sequence reported");
    assert_eq!(net.obs_name(w.observed), "GNameD");
    assert_eq!(w.purged.map(|o| net.obs_name(o)), Some("noObs"));
    assert!(all.iter().all(|w| w.replays(&net)));

    let v = check_ni_bounded(&net, 4);
    assert!(!v.holds);
    assert!(v.witness_replays(&net));
}

#[test]
fn bounded_on_mb_finds_a_name_leak() {
    let net = fixtures::mb_total().network;
    let v = check_ni_bounded(&net, 4);
    assert!(!v.holds && v.witness_replays(&net));
    let alpha = net
        .sequence(&[("Env", "MnameA"), ("Env", "GnameD"), ("H", "publish"), ("L", "chkWeb")])
        .unwrap();
    let w = enumerate_violations(&net, 4).into_iter().find(|w| w.alpha == alpha).unwrap();
    assert_eq!(net.obs_name(w.observed), "MNameA");

    let partial = fixtures::mb().network;
    let v = check_ni_bounded(&partial, 4);
    assert!(!v.holds && v.witness_replays(&partial));
}

#[test]
fn depth_zero_holds() {
    for doc in [fixtures::ma(), fixtures::mb()] {
        assert!(check_ni_bounded(&doc.network, 0).holds);
        assert!(enumerate_violations(&doc.network, 0).is_empty());
    }
}

#[test]
fn default_depth_is_capped() {
    assert_eq!(default_depth(&fixtures::ma().network), 12);
    assert_eq!(default_depth(&chain(&[], 3)), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_agrees_with_bounded(seed in any::<u64>()) {
        let net = random_net(seed, NetParams::small());
        let exact = check_ni_exact(&net);
        let bounded = check_ni_bounded(&net, 2 * net.num_states());
        prop_assert_eq!(exact.holds, bounded.holds, "seed {}", seed);
        prop_assert!(exact.witness_replays(&net));
        prop_assert!(bounded.witness_replays(&net));
    }

    #[test]
    fn rstar_is_least_fixpoint(seed in any::<u64>()) {
        let net = random_net(seed, NetParams::small());
        prop_assert!(agrees_with_naive(&net), "seed {}", seed);
        let report = check_unwinding(&net, &compute_rstar(&net));
        prop_assert!(report.sc && report.lr);
    }

    #[test]
    fn bounded_is_monotone_in_depth(seed in any::<u64>(), d in 0usize..6) {
        let net = random_net(seed, NetParams::small());
        if !check_ni_bounded(&net, d).holds {
            prop_assert!(!check_ni_bounded(&net, d + 1).holds);
        }
        let literal = enumerate_violations(&net, d.min(4));
        prop_assert_eq!(literal.is_empty(), check_ni_bounded(&net, d.min(4)).holds);
        prop_assert!(literal.iter().all(|w| w.replays(&net)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rstar_refines_every_unwinding(seed in any::<u64>()) {
        let net = random_net(seed, NetParams::small().with_states(5));
        let rstar = compute_rstar(&net);
        for p in all_partitions(net.num_states()) {
            let p = StatePartition::from_block_indices(&p);
            if check_unwinding(&net, &p).is_unwinding() {
                prop_assert!(rstar.refines(&p));
            }
        }
    }
}
