//! JSON renderings of analysis results.
//!
//! Every document has a `timingsMs` field; everything else is deterministic.

use serde_json::{json, Map, Value};

use crate::effsec::{ComparisonVerdict, EsVerdict, InfoSecReport, Relation};
use crate::goal::Goal;
use crate::idealize::{block_names, IdealizationResult};
use crate::lang::serialize_network;
use crate::model::{natural_cmp, TransitionNetwork};

pub fn goal_json(net: &TransitionNetwork, name: &str, goal: &Goal) -> Value {
    json!({
        "name": name,
        "kind": goal.kind,
        "states": goal.state_names(net),
    })
}

pub fn es_json(net: &TransitionNetwork, es: &EsVerdict) -> Value {
    let mut m = Map::new();
    m.insert("effectivelySecure".into(), json!(es.effectively_secure));
    m.insert("attacker".into(), json!(net.agent_name(es.attacker)));
    m.insert("semantics".into(), json!(es.semantics));
    if let Some((sem, secure)) = es.secondary {
        m.insert(format!("{sem}Secure"), json!(secure));
    }
    Value::Object(m)
}

pub fn relation_json(r: &Relation) -> Value {
    serde_json::to_value(r).expect("plain struct")
}

pub fn unification_json(ideal: &IdealizationResult) -> Value {
    let names = block_names(&ideal.base, &ideal.unification);
    let blocks: Vec<Value> = ideal
        .unification
        .blocks()
        .zip(names)
        .map(|(b, name)| {
            let mut members: Vec<&str> = b.iter().map(|&o| ideal.base.obs_name(o)).collect();
            members.sort_by(|a, b| natural_cmp(a, b));
            json!({ "name": name, "members": members })
        })
        .collect();
    json!({
        "provenance": ideal.provenance,
        "blocks": blocks,
    })
}

fn strategy_json(net: &TransitionNetwork, es: &EsVerdict) -> Value {
    es.attack_strategy
        .as_ref()
        .map_or(Value::Null, |s| s.to_json(net))
}

fn timings_json(timings: &[(&str, f64)]) -> Value {
    Value::Object(
        timings
            .iter()
            .map(|(k, v)| ((*k).to_owned(), json!(v)))
            .collect(),
    )
}

/// The effective information security report.
pub fn info_sec_json(
    net: &TransitionNetwork,
    goal_name: &str,
    report: &InfoSecReport,
    timings: &[(&str, f64)],
) -> Value {
    let ideal = &report.idealization.network;
    json!({
        "model": net.name(),
        "idealizedModel": serialize_network(ideal),
        "unification": unification_json(&report.idealization),
        "goal": goal_json(net, goal_name, &report.es.goal),
        "semantics": report.es.semantics,
        "es": es_json(net, &report.es),
        "esIdeal": es_json(ideal, &report.es_ideal),
        "relation": relation_json(&Relation::from_verdicts(
            report.es.effectively_secure,
            report.es_ideal.effectively_secure,
        )),
        "verdict": { "effectivelyInformationSecure": report.secure },
        "strategies": {
            "model": strategy_json(net, &report.es),
            "idealizedModel": strategy_json(ideal, &report.es_ideal),
        },
        "timingsMs": timings_json(timings),
    })
}

/// Two models compared under one goal name.
pub fn comparison_json(
    net_a: &TransitionNetwork,
    net_b: &TransitionNetwork,
    goal_name: &str,
    verdict: &ComparisonVerdict,
    timings: &[(&str, f64)],
) -> Value {
    json!({
        "model": net_a.name(),
        "otherModel": net_b.name(),
        "goal": goal_json(net_a, goal_name, &verdict.a.goal),
        "semantics": verdict.a.semantics,
        "es": es_json(net_a, &verdict.a),
        "esOther": es_json(net_b, &verdict.b),
        "relation": relation_json(&verdict.relation),
        "verdict": { "equivalent": verdict.relation.equivalent },
        "strategies": {
            "model": strategy_json(net_a, &verdict.a),
            "otherModel": strategy_json(net_b, &verdict.b),
        },
        "timingsMs": timings_json(timings),
    })
}

/// Removes `timingsMs` at any depth, for comparing runs.
pub fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("timingsMs");
            m.values_mut().for_each(strip_timings);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}
