//! Effective security: can the attacker enforce the complement of the goal?

use crate::error::GameError;
use crate::games::{solve, Semantics, Strategy};
use crate::goal::{Goal, GoalKind};
use crate::idealize::{idealize, IdealizationResult};
use crate::model::{AgentId, TransitionNetwork};

/// Safety `avoid X` becomes reachability of `X` and vice versa.
pub fn negate_goal(goal: &Goal) -> Goal {
    goal.negate()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EsVerdict {
    pub effectively_secure: bool,
    /// A strategy enforcing the negated goal, present iff insecure.
    pub attack_strategy: Option<Strategy>,
    pub attacker: AgentId,
    pub goal: Goal,
    pub semantics: Semantics,
    /// The same question under the other semantics, when it was asked.
    pub secondary: Option<(Semantics, bool)>,
}

/// `ES(M, L, Γ)`: the attacker has no surely winning strategy for `¬Γ`.
pub fn effective_security(
    net: &TransitionNetwork,
    attacker: AgentId,
    goal: &Goal,
    semantics: Semantics,
    budget: u64,
) -> Result<EsVerdict, GameError> {
    let result = solve(net, attacker, &negate_goal(goal), semantics, budget)?;
    Ok(EsVerdict {
        effectively_secure: !result.winning,
        attack_strategy: result.strategy,
        attacker,
        goal: goal.clone(),
        semantics,
        secondary: None,
    })
}

/// Like [`effective_security`], also recording the verdict under the other
/// semantics.
pub fn effective_security_both(
    net: &TransitionNetwork,
    attacker: AgentId,
    goal: &Goal,
    primary: Semantics,
    budget: u64,
) -> Result<EsVerdict, GameError> {
    let other = match primary {
        Semantics::Fair => Semantics::Strict,
        Semantics::Strict => Semantics::Fair,
    };
    let mut verdict = effective_security(net, attacker, goal, primary, budget)?;
    let second = effective_security(net, attacker, goal, other, budget)?;
    verdict.secondary = Some((other, second.effectively_secure));
    Ok(verdict)
}

/// The relations between two models, derived from their verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Relation {
    /// `A ≺ B`: B is secure and A is not.
    pub strictly_less: bool,
    /// `B ≺ A`.
    pub strictly_greater: bool,
    /// `A ⪯ B`: if A is secure, so is B.
    pub at_least_as: bool,
    /// `B ⪯ A`.
    pub at_most_as: bool,
    /// `A ≃ B`.
    pub equivalent: bool,
}

impl Relation {
    pub fn from_verdicts(es_a: bool, es_b: bool) -> Self {
        Self {
            strictly_less: es_b && !es_a,
            strictly_greater: es_a && !es_b,
            at_least_as: !es_a || es_b,
            at_most_as: !es_b || es_a,
            equivalent: es_a == es_b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonVerdict {
    pub relation: Relation,
    pub a: EsVerdict,
    pub b: EsVerdict,
}

/// Compares two models for the same attacker (by name) and their own goals.
pub fn compare(
    net_a: &TransitionNetwork,
    goal_a: &Goal,
    net_b: &TransitionNetwork,
    goal_b: &Goal,
    attacker: &str,
    semantics: Semantics,
    budget: u64,
) -> Result<ComparisonVerdict, GameError> {
    let att_a = crate::games::resolve_attacker(net_a, Some(attacker))?;
    let att_b = crate::games::resolve_attacker(net_b, Some(attacker))?;
    let a = effective_security(net_a, att_a, goal_a, semantics, budget)?;
    let b = effective_security(net_b, att_b, goal_b, semantics, budget)?;
    Ok(ComparisonVerdict {
        relation: Relation::from_verdicts(a.effectively_secure, b.effectively_secure),
        a,
        b,
    })
}

#[derive(Clone, Debug)]
pub struct InfoSecReport {
    /// `M ≃ Ideal(M)`.
    pub secure: bool,
    pub es: EsVerdict,
    pub es_ideal: EsVerdict,
    pub idealization: IdealizationResult,
}

/// Effective information security: the model is as secure as its idealization.
pub fn effective_info_security(
    net: &TransitionNetwork,
    attacker: AgentId,
    goal: &Goal,
    semantics: Semantics,
    budget: u64,
) -> Result<InfoSecReport, GameError> {
    let idealization = idealize(net);
    // Idealization keeps state ids, so the goal carries over unchanged.
    let es = effective_security_both(net, attacker, goal, semantics, budget)?;
    let es_ideal = effective_security_both(&idealization.network, attacker, goal, semantics, budget)?;
    Ok(InfoSecReport {
        secure: es.effectively_secure == es_ideal.effectively_secure,
        es,
        es_ideal,
        idealization,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominanceReport {
    pub total: bool,
    /// Every state offers some non-Low agent a move.
    pub non_low_always_enabled: bool,
    pub safety_goal: bool,
    /// Whether one of the sufficient conditions for `M ⪯ Ideal(M)` holds.
    pub hypotheses_hold: bool,
    /// `M ⪯ Ideal(M)` as evaluated.
    pub dominated: bool,
    pub es: bool,
    pub es_ideal: bool,
}

pub fn non_low_always_enabled(net: &TransitionNetwork) -> bool {
    net.states()
        .all(|s| net.agents().any(|u| !net.is_low(u) && net.has_moves(s, u)))
}

pub fn check_ideal_dominance(
    net: &TransitionNetwork,
    attacker: AgentId,
    goal: &Goal,
    semantics: Semantics,
    budget: u64,
) -> Result<DominanceReport, GameError> {
    let total = net.is_total();
    let enabled = non_low_always_enabled(net);
    let safety_goal = goal.kind == GoalKind::Safety;
    let ideal = idealize(net);
    let es = effective_security(net, attacker, goal, semantics, budget)?.effectively_secure;
    let es_ideal =
        effective_security(&ideal.network, attacker, goal, semantics, budget)?.effectively_secure;
    Ok(DominanceReport {
        total,
        non_low_always_enabled: enabled,
        safety_goal,
        hypotheses_hold: total || enabled || safety_goal,
        dominated: !es || es_ideal,
        es,
        es_ideal,
    })
}
