//! Observation unification and the noninterferent idealized model.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::IdealizeError;
use crate::model::{natural_cmp, AgentId, ObsId, StateId, TransitionNetwork, Violation};
use crate::noninterference::{check_ni_exact, compute_rstar};
use crate::partition::{ObservationPartition, UnionFind};

/// U*: the equivalence closure of Low observation pairs on R*-related states.
pub fn compute_ustar(net: &TransitionNetwork) -> ObservationPartition {
    let rstar = compute_rstar(net);
    let mut uf = UnionFind::new(net.num_observations());
    for block in rstar.blocks() {
        for &l in net.low() {
            let first = net.obs(block[0], l);
            for &s in &block[1..] {
                uf.union(first.index(), net.obs(s, l).index());
            }
        }
    }
    ObservationPartition::from_union_find(&mut uf)
}

/// The pairs `(o1, o2)` for which there are `s1 R* t1`, `s2 R* t2` and a Low
/// `l` with `obs(s1,l)=o1`, `obs(s2,l)=o2`, `obs(t1,l)=obs(t2,l)`, plus the
/// diagonal. This relation need not be transitive; [`compute_ustar`] is its
/// equivalence closure.
pub fn ustar_literal_pairs(net: &TransitionNetwork) -> BTreeSet<(ObsId, ObsId)> {
    let rstar = compute_rstar(net);
    let mut pairs: BTreeSet<(ObsId, ObsId)> = net.observations().map(|o| (o, o)).collect();
    for &l in net.low() {
        // Labels seen by `l` in each R* block.
        let labels: Vec<BTreeSet<ObsId>> = rstar
            .blocks()
            .map(|b| b.iter().map(|&s| net.obs(s, l)).collect())
            .collect();
        // s1 R* t1 and s2 R* t2 with a shared label at t1/t2: o1 comes from the
        // block of t1, o2 from the block of t2, and those blocks share a label.
        for (i, bi) in labels.iter().enumerate() {
            for bj in &labels[i..] {
                if bi.is_disjoint(bj) {
                    continue;
                }
                for &o1 in bi {
                    for &o2 in bj {
                        pairs.insert((o1, o2));
                        pairs.insert((o2, o1));
                    }
                }
            }
        }
    }
    pairs
}

/// All pairs related by a partition, including the diagonal.
pub fn partition_pairs(part: &ObservationPartition) -> BTreeSet<(ObsId, ObsId)> {
    part.blocks()
        .flat_map(|b| {
            b.iter()
                .flat_map(|&x| b.iter().map(move |&y| (x, y)))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn atoms(label: &str, out: &mut BTreeSet<String>) {
    let Some(inner) = label.strip_prefix('{').and_then(|l| l.strip_suffix('}')) else {
        out.insert(label.to_owned());
        return;
    };
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in inner.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth = depth.saturating_sub(1),
            '+' if depth == 0 => {
                atoms(&inner[start..i], out);
                start = i + 1;
            }
            _ => {}
        }
    }
    atoms(&inner[start..], out);
}

fn join(mut parts: Vec<String>) -> String {
    parts.sort_by(|a, b| natural_cmp(a, b));
    parts.dedup();
    format!("{{{}}}", parts.join("+"))
}

/// Deterministic block names: `{a+b+c}` over sorted member labels. Members
/// that are themselves class labels are flattened, so repeated idealization
/// keeps names stable; if flattening makes two names collide, nested member
/// names are used instead.
pub fn block_names(net: &TransitionNetwork, part: &ObservationPartition) -> Vec<String> {
    let flat: Vec<String> = part
        .blocks()
        .map(|b| {
            let mut set = BTreeSet::new();
            for &o in &b {
                atoms(net.obs_name(o), &mut set);
            }
            join(set.into_iter().collect())
        })
        .collect();
    let distinct: BTreeSet<&String> = flat.iter().collect();
    if distinct.len() == flat.len() {
        return flat;
    }
    part.blocks()
        .map(|b| join(b.iter().map(|&o| net.obs_name(o).to_owned()).collect()))
        .collect()
}

/// Replaces every agent's observation by its block under `unification`.
pub fn apply_unification(
    net: &TransitionNetwork,
    unification: &ObservationPartition,
) -> Result<TransitionNetwork, IdealizeError> {
    if unification.len() != net.num_observations() {
        return Err(crate::error::PartitionError::WrongSize {
            expected: net.num_observations(),
            found: unification.len(),
        }
        .into());
    }
    let names = block_names(net, unification);
    Ok(net.with_observations(names, |o| ObsId::from(unification.block_index(o))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Total,
    Ptn,
}

#[derive(Clone, Debug)]
pub struct IdealizationResult {
    pub network: TransitionNetwork,
    /// The network the unification was computed on: the input if total,
    /// otherwise its Low-total extension.
    pub base: TransitionNetwork,
    /// U* over the observation labels of `base`.
    pub unification: ObservationPartition,
    pub provenance: Provenance,
    /// High availability-awareness violations introduced by the unification.
    pub warnings: Vec<Violation>,
}

impl IdealizationResult {
    /// Non-singleton blocks as sorted label names.
    pub fn merged_blocks(&self) -> Vec<Vec<String>> {
        self.unification
            .blocks()
            .filter(|b| b.len() > 1)
            .map(|b| {
                let mut v: Vec<String> =
                    b.iter().map(|&o| self.base.obs_name(o).to_owned()).collect();
                v.sort_by(|a, b| natural_cmp(a, b));
                v
            })
            .collect()
    }

    /// The block holding `label`, as label names.
    pub fn block_containing(&self, label: &str) -> Option<BTreeSet<String>> {
        let o = self.base.obs_id(label).ok()?;
        Some(
            self.unification
                .block_of(o)
                .map(|x| self.base.obs_name(x).to_owned())
                .collect(),
        )
    }
}

/// The unique minimal unification making the model noninterferent, applied
/// to the model (after Low-totalization for partial networks).
pub fn idealize(net: &TransitionNetwork) -> IdealizationResult {
    let (base, provenance) = if net.is_total() {
        (net.clone(), Provenance::Total)
    } else {
        (net.totalize_low(), Provenance::Ptn)
    };
    let unification = compute_ustar(&base);
    let network = apply_unification(&base, &unification).expect("U* covers the observations");

    let before: BTreeSet<(AgentId, StateId, StateId)> = high_awareness(&base)
        .into_iter()
        .filter_map(|v| match v {
            Violation::AvailabilityAwareness {
                agent, first, second, ..
            } => Some((agent, first, second)),
            _ => None,
        })
        .collect();
    let warnings = high_awareness(&network)
        .into_iter()
        .filter(|v| match v {
            Violation::AvailabilityAwareness {
                agent, first, second, ..
            } => !before.contains(&(*agent, *first, *second)),
            _ => false,
        })
        .collect();

    IdealizationResult {
        network,
        base,
        unification,
        provenance,
        warnings,
    }
}

fn high_awareness(net: &TransitionNetwork) -> Vec<Violation> {
    net.validate()
        .violations
        .into_iter()
        .filter(|v| matches!(v, Violation::AvailabilityAwareness { agent, .. } if net.is_high(*agent)))
        .collect()
}

/// Result of searching the strict refinements of a unification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalityReport {
    /// No strict refinement makes the model noninterferent.
    pub minimal: bool,
    /// The finest noninterference-inducing strict refinement, if any.
    pub witness: Option<ObservationPartition>,
    /// Number of refinements examined.
    pub checked: u64,
}

/// Default cap on the number of refinements [`check_minimality`] examines.
pub const DEFAULT_REFINEMENT_BUDGET: u64 = 1_000_000;

fn bell(n: usize) -> u64 {
    // Bell triangle.
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().expect("nonempty")];
        for &x in &row {
            let v = next.last().expect("nonempty").saturating_add(x);
            next.push(v);
        }
        row = next;
    }
    row[0]
}

/// All set partitions of `items` as restricted-growth block labels.
pub(crate) fn set_partitions(n: usize) -> Vec<Vec<usize>> {
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

/// Checks that no strict refinement of `unification` yields a noninterferent
/// model. For partial networks the check runs on the Low-total extension,
/// matching [`idealize`].
pub fn check_minimality(
    net: &TransitionNetwork,
    unification: &ObservationPartition,
    budget: u64,
) -> Result<MinimalityReport, IdealizeError> {
    let base = if net.is_total() {
        net.clone()
    } else {
        net.totalize_low()
    };
    if unification.len() != base.num_observations() {
        return Err(crate::error::PartitionError::WrongSize {
            expected: base.num_observations(),
            found: unification.len(),
        }
        .into());
    }
    let blocks: Vec<Vec<ObsId>> = unification.blocks().collect();
    let total = blocks
        .iter()
        .fold(1u64, |acc, b| acc.saturating_mul(bell(b.len())))
        - 1;
    if total > budget {
        return Err(IdealizeError::Budget(budget));
    }

    let splits: Vec<Vec<Vec<usize>>> = blocks.iter().map(|b| set_partitions(b.len())).collect();
    let mut choice = vec![0usize; blocks.len()];
    let mut best: Option<ObservationPartition> = None;
    let mut checked = 0u64;
    loop {
        // Odometer over per-block splits; the all-zero choice is `unification` itself.
        let mut i = 0;
        while i < choice.len() {
            choice[i] += 1;
            if choice[i] < splits[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == choice.len() {
            break;
        }
        let mut label = vec![0usize; base.num_observations()];
        let mut offset = 0;
        for (b, block) in blocks.iter().enumerate() {
            let rgs = &splits[b][choice[b]];
            for (k, &o) in block.iter().enumerate() {
                label[o.index()] = offset + rgs[k];
            }
            offset += rgs.iter().max().map_or(0, |m| m + 1);
        }
        let candidate = ObservationPartition::from_block_indices(&label);
        checked += 1;
        let applied = apply_unification(&base, &candidate)?;
        if check_ni_exact(&applied).holds
            && best
                .as_ref()
                .is_none_or(|b| candidate.num_blocks() > b.num_blocks())
        {
            best = Some(candidate);
        }
    }
    Ok(MinimalityReport {
        minimal: best.is_none(),
        witness: best,
        checked,
    })
}
