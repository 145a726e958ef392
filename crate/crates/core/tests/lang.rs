mod common;

use std::collections::BTreeMap;

use common::{random_goal, random_net, NetParams};
use effsec_core::idealize::idealize;
use effsec_core::{fixtures, parse_model, serialize_model, GoalKind, ModelDocument, NetworkBuilder, Role};
use proptest::prelude::*;

fn round_trip(doc: &ModelDocument) -> ModelDocument {
    let text = serialize_model(doc);
    parse_model(&text).unwrap_or_else(|e| panic!("reparse failed: {e}\n{text}"))
}

#[test]
fn mb_fixture_shape() {
    let doc = fixtures::mb();
    let net = &doc.network;
    assert_eq!(net.num_states(), 17);
    for i in 0..17 {
        assert!(net.state_id(&format!("s{i}")).is_ok());
    }
    assert_eq!(net.num_agents(), 3);
    let g = doc.goal("Gsys").expect("goal Gsys");
    assert_eq!(g.kind, GoalKind::Safety);
    assert_eq!(g.state_names(net), ["s15", "s16"]);
}

#[test]
fn empty_input_expects_network() {
    let err = parse_model("").unwrap_err();
    assert!(err.to_string().contains("expected 'network'"), "{err}");
    assert_eq!(err.expected, ["'network'"]);
    let err = parse_model("  # only a comment\n").unwrap_err();
    assert!(err.to_string().contains("expected 'network'"), "{err}");
}

const TINY: &str = "network T
agents { H : high L : low }
actions { a }
observations { o }
states_placeholder
init s0
";

fn tiny_with(body: &str) -> String {
    TINY.replace(
        "states_placeholder",
        &format!("state s0 {{ H = o L = o }}\nstate s1 {{ H = o L = o }}\nstate s2 {{ H = o L = o }}\n{body}"),
    )
}

#[test]
fn duplicate_transition_key_is_rejected() {
    let err = parse_model(&tiny_with("s0 -> s1 on H.a\ns0 -> s2 on H.a\n")).unwrap_err();
    assert!(err.to_string().contains("(s0, H, a)"), "{err}");
    assert_eq!(err.line, 9);
}

#[test]
fn undeclared_references_are_rejected() {
    for body in ["s0 -> s9 on H.a", "s0 -> s1 on X.a", "s0 -> s1 on H.zz", "goal G safety avoid { s7 }"] {
        let err = parse_model(&tiny_with(body)).unwrap_err();
        assert!(err.to_string().contains("undeclared") || err.to_string().contains("unknown"), "{body}: {err}");
    }
    let err = parse_model(&TINY.replace("states_placeholder", "state s0 { H = o L = nope }")).unwrap_err();
    assert!(err.line > 0 && err.column > 0);
}

#[test]
fn syntax_errors_carry_positions() {
    let err = parse_model("network N\nagents { H : middle }\n").unwrap_err();
    assert_eq!(err.line, 2);
    assert!(!err.expected.is_empty());
}

#[test]
fn fixtures_round_trip() {
    for doc in [fixtures::ma(), fixtures::mb(), fixtures::ma_total(), fixtures::mb_total()] {
        assert_eq!(round_trip(&doc), doc);
        // Canonical text is a fixpoint.
        let once = serialize_model(&doc);
        assert_eq!(serialize_model(&parse_model(&once).unwrap()), once);
    }
}

#[test]
fn idealized_model_round_trips() {
    let doc = fixtures::mb();
    let ideal = idealize(&doc.network).network;
    let text = serialize_model(&ModelDocument::new(ideal.clone(), doc.goals.clone()));
    assert!(text.contains("{MNameA+MNameB+"), "{text}");
    let back = parse_model(&text).unwrap();
    assert_eq!(back.network, ideal);
}

#[test]
fn single_state_round_trips() {
    let net = NetworkBuilder::new("One")
        .state("s0")
        .agent("H", Role::High)
        .agent("L", Role::Low)
        .observation("o")
        .initial("s0")
        .obs("s0", "H", "o")
        .obs("s0", "L", "o")
        .build()
        .unwrap();
    let doc = ModelDocument::new(net, BTreeMap::new());
    assert_eq!(round_trip(&doc), doc);
}

#[test]
fn parsing_is_deterministic() {
    assert_eq!(parse_model(fixtures::MB).unwrap(), parse_model(fixtures::MB).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_documents_round_trip(seed in any::<u64>()) {
        let net = random_net(seed, NetParams::small());
        let mut goals = BTreeMap::new();
        goals.insert("Safe".to_owned(), random_goal(seed, &net, false));
        goals.insert("Reach".to_owned(), random_goal(seed.wrapping_add(1), &net, true));
        let doc = ModelDocument::new(net, goals);
        prop_assert_eq!(round_trip(&doc), doc);
    }

    #[test]
    fn parser_never_panics_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_model(&text);
    }

    #[test]
    fn parser_never_panics_on_mutations(pos in 0usize..2000, len in 0usize..20, insert in "[a-z{}+:=.>#\\- \n]{0,8}") {
        let src = fixtures::MB;
        let start = pos.min(src.len());
        let end = (start + len).min(src.len());
        if src.is_char_boundary(start) && src.is_char_boundary(end) {
            let text = format!("{}{}{}", &src[..start], insert, &src[end..]);
            if let Err(e) = parse_model(&text) {
                prop_assert!(e.line >= 1 && e.column >= 1);
            }
        }
    }
}
