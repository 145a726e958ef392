use std::collections::BTreeMap;
use std::fmt::Write;

use super::ModelDocument;
use crate::goal::{GoalKind, GoalSpec};
use crate::model::{natural_cmp, TransitionNetwork};

fn sorted<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
    let mut v: Vec<&str> = names.into_iter().collect();
    v.sort_by(|a, b| natural_cmp(a, b));
    v
}

/// Canonical text for a network without goals.
pub fn serialize_network(net: &TransitionNetwork) -> String {
    write_doc(net, &BTreeMap::new())
}

/// Canonical text: every section sorted in natural order.
pub fn serialize_model(doc: &ModelDocument) -> String {
    write_doc(&doc.network, &doc.goals)
}

fn write_doc(net: &TransitionNetwork, goals: &BTreeMap<String, GoalSpec>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "network {}", net.name());

    let mut agents: Vec<_> = net.agents().collect();
    agents.sort_by(|&a, &b| natural_cmp(net.agent_name(a), net.agent_name(b)));
    out.push_str("agents {\n");
    for &u in &agents {
        if net.is_high(u) {
            let _ = writeln!(out, "  {} : high", net.agent_name(u));
        }
        if net.is_low(u) {
            let _ = writeln!(out, "  {} : low", net.agent_name(u));
        }
    }
    out.push_str("}\n");

    let list = |out: &mut String, kw: &str, names: Vec<&str>| {
        let _ = write!(out, "{kw} {{");
        for n in names {
            let _ = write!(out, " {n}");
        }
        out.push_str(" }\n");
    };
    list(&mut out, "actions", sorted(net.actions().map(|a| net.action_name(a))));
    list(
        &mut out,
        "observations",
        sorted(net.observations().map(|o| net.obs_name(o))),
    );

    let mut states: Vec<_> = net.states().collect();
    states.sort_by(|&a, &b| natural_cmp(net.state_name(a), net.state_name(b)));
    out.push('\n');
    for &s in &states {
        let _ = write!(out, "state {} {{", net.state_name(s));
        for &u in &agents {
            let _ = write!(out, " {} = {}", net.agent_name(u), net.obs_name(net.obs(s, u)));
        }
        out.push_str(" }\n");
    }
    let _ = writeln!(out, "init {}", net.state_name(net.initial()));

    let mut transitions: Vec<(&str, &str, &str, &str)> = net
        .transitions()
        .map(|(s, u, a, t)| {
            (
                net.state_name(s),
                net.agent_name(u),
                net.action_name(a),
                net.state_name(t),
            )
        })
        .collect();
    transitions.sort_by(|x, y| {
        natural_cmp(x.0, y.0)
            .then_with(|| natural_cmp(x.1, y.1))
            .then_with(|| natural_cmp(x.2, y.2))
    });
    if !transitions.is_empty() {
        out.push('\n');
    }
    for (s, u, a, t) in transitions {
        let _ = writeln!(out, "{s} -> {t} on {u}.{a}");
    }

    if !goals.is_empty() {
        out.push('\n');
    }
    for (name, goal) in goals {
        let kw = match goal.kind {
            GoalKind::Safety => "safety avoid",
            GoalKind::Reachability => "reachability reach",
        };
        let _ = write!(out, "goal {name} {kw} {{");
        for s in goal.state_names(net) {
            let _ = write!(out, " {s}");
        }
        out.push_str(" }\n");
    }
    out
}
