//! Graphviz export of arenas and strategy-trimmed products.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write;

use super::{BeliefArena, Strategy};
use crate::model::StateId;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Every node with every choice; edges are labelled `move / observation`.
pub fn arena_to_dot(arena: &BeliefArena) -> String {
    let net = arena.net();
    let mut out = String::from("digraph arena {\n  rankdir=LR;\n  node [shape=box];\n");
    if arena.initial().is_none() {
        out.push_str("  won [label=\"initial state settled\"];\n");
    }
    for (n, node) in arena.nodes() {
        let shape = if Some(n) == arena.initial() { ", peripheries=2" } else { "" };
        let _ = writeln!(
            out,
            "  n{n} [label=\"{}\"{shape}];",
            escape(&node.key.describe(net))
        );
        for choice in &node.choices {
            for &(o, m) in &choice.successors {
                let _ = writeln!(
                    out,
                    "  n{n} -> n{m} [label=\"{} / {}\"];",
                    escape(&choice.mv.display(net)),
                    escape(net.obs_name(o))
                );
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Concrete states paired with belief nodes, restricted to `strategy`.
/// Moves into settled states go to a single `settled` sink.
pub fn product_to_dot(arena: &BeliefArena, strategy: &Strategy) -> String {
    let net = arena.net();
    let mut out = String::from("digraph product {\n  node [shape=ellipse];\n");
    let Some(init) = arena.initial() else {
        out.push_str("}\n");
        return out;
    };
    let mut ids: HashMap<(StateId, usize), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    ids.insert((net.initial(), init), 0);
    queue.push_back((net.initial(), init));
    let mut settled_used = false;
    let mut lines = Vec::new();
    while let Some((s, n)) = queue.pop_front() {
        let v = ids[&(s, n)];
        let node = arena.node(n);
        let _ = writeln!(
            out,
            "  p{v} [label=\"{} | {}\"];",
            escape(net.state_name(s)),
            escape(net.obs_name(node.key.label))
        );
        let Some(mv) = strategy.moves.get(&node.key).copied() else {
            continue;
        };
        let Some(c) = arena.choice_index(n, mv) else {
            continue;
        };
        for (u, a, t) in net.moves(s) {
            if u == arena.attacker() && mv != super::Move::Act(a) {
                continue;
            }
            let label = format!("{}.{}", net.agent_name(u), net.action_name(a));
            if arena.is_settled(t) {
                settled_used = true;
                lines.push(format!("  p{v} -> settled [label=\"{}\"];", escape(&label)));
                continue;
            }
            let o = net.obs(t, arena.attacker());
            let m = if o == node.key.label {
                n
            } else {
                arena.successor(n, c, o).expect("observable outcome has a node")
            };
            let next = ids.len();
            let w = *ids.entry((t, m)).or_insert_with(|| {
                queue.push_back((t, m));
                next
            });
            lines.push(format!("  p{v} -> p{w} [label=\"{}\"];", escape(&label)));
        }
    }
    if settled_used {
        out.push_str("  settled [shape=doublecircle];\n");
    }
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out.push_str("}\n");
    out
}
