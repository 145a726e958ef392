//! `effsec`: noninterference, idealization and effective security analysis
//! of `.tn` transition networks.
//!
//! Exit codes: 0 the property holds (or the model is secure), 1 it does
//! not, 2 usage or input error, 3 resource budget exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use effsec_core::effsec::{compare, effective_info_security};
use effsec_core::games::{
    arena_to_dot, product_to_dot, resolve_attacker, solve, verify_strategy, BeliefArena,
    Diagnostics, Semantics, Strategy, DEFAULT_BUDGET,
};
use effsec_core::idealize::{block_names, check_minimality, idealize, DEFAULT_REFINEMENT_BUDGET};
use effsec_core::noninterference::{
    check_ni_bounded, check_ni_exact, check_unwinding, compute_rstar, default_depth, NiMethod,
    NiVerdict, NiWitness,
};
use effsec_core::report::{comparison_json, goal_json, info_sec_json, unification_json};
use effsec_core::{
    parse_model, serialize_model, GameError, Goal, IdealizeError, ModelDocument, TransitionNetwork,
};

#[derive(Parser)]
#[command(name = "effsec", version, about = "Effective information security for transition networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check well-formedness (roles, availability-awareness).
    Validate {
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decide noninterference; `--depth` adds the bounded sequence check.
    Ni {
        model: PathBuf,
        /// Bound for the sequence check; without a value, 2·|S| capped at 12.
        #[arg(long, num_args = 0..=1, value_name = "K")]
        depth: Option<Option<usize>>,
        #[arg(long)]
        json: bool,
    },
    /// Print the R* partition and its unwinding conditions.
    Rstar {
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Build the noninterferent idealized model.
    Idealize {
        model: PathBuf,
        /// Write the idealized model here instead of standard output.
        #[arg(short = 'o', value_name = "PATH")]
        output: Option<PathBuf>,
        /// Also confirm that no finer unification works.
        #[arg(long)]
        check_minimality: bool,
        /// Cap on refinements examined by `--check-minimality`.
        #[arg(long, default_value_t = DEFAULT_REFINEMENT_BUDGET)]
        budget: u64,
        #[arg(long)]
        json: bool,
    },
    /// Solve the attacker's game for a goal taken as the attacker's objective.
    Solve {
        model: PathBuf,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Effective information security: compare the model with its idealization.
    Effsec {
        model: PathBuf,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Compare the effective security of two models under a shared goal name.
    Compare {
        model: PathBuf,
        other: PathBuf,
        #[command(flatten)]
        game: GameArgs,
    },
}

#[derive(Args)]
struct GameArgs {
    /// Goal name; defaults to the only goal in the model.
    #[arg(long)]
    goal: Option<String>,
    /// Low agent playing the attacker; defaults to the only Low agent.
    #[arg(long)]
    attacker: Option<String>,
    #[arg(long, value_enum, default_value_t = SemanticsArg::Fair)]
    semantics: SemanticsArg,
    /// Cap on strategy candidates examined by the fair solver.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    json: bool,
    /// Write a Graphviz rendering of the arena (or the strategy product).
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsArg {
    Strict,
    Fair,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Strict => Semantics::Strict,
            SemanticsArg::Fair => Semantics::Fair,
        }
    }
}

enum Failure {
    Input(String),
    Budget(String),
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Budget(_) => Failure::Budget(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<IdealizeError> for Failure {
    fn from(e: IdealizeError) -> Self {
        match e {
            IdealizeError::Budget(_) => Failure::Budget(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { model, json } => validate(&model, json),
        Command::Ni { model, depth, json } => ni(&model, depth, json),
        Command::Rstar { model, json } => rstar(&model, json),
        Command::Idealize {
            model,
            output,
            check_minimality,
            budget,
            json,
        } => idealize_cmd(&model, output.as_deref(), check_minimality, budget, json),
        Command::Solve { model, game } => solve_cmd(&model, &game),
        Command::Effsec { model, game } => effsec_cmd(&model, &game),
        Command::Compare { model, other, game } => compare_cmd(&model, &other, &game),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load(path: &Path) -> Result<ModelDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))
}

fn warn_invalid(doc: &ModelDocument) {
    for v in &doc.warnings.violations {
        eprintln!("warning: {}", v.describe(&doc.network));
    }
}

fn emit(v: &Value) {
    use std::io::Write;
    // A closed pipe is not worth a panic.
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn validate(path: &Path, json: bool) -> Outcome {
    let doc = load(path)?;
    let net = &doc.network;
    let violations: Vec<Value> = doc
        .warnings
        .violations
        .iter()
        .map(|v| json!({ "kind": v.kind(), "description": v.describe(net) }))
        .collect();
    if json {
        emit(&json!({
            "model": net.name(),
            "valid": violations.is_empty(),
            "violations": violations,
        }));
    } else if violations.is_empty() {
        println!(
            "{}: well-formed ({} states, {} agents, {} actions, {} observations)",
            net.name(),
            net.num_states(),
            net.num_agents(),
            net.num_actions(),
            net.num_observations()
        );
    } else {
        println!("{}: {} violation(s)", net.name(), violations.len());
        for v in &doc.warnings.violations {
            println!("  {}: {}", v.kind(), v.describe(net));
        }
    }
    Ok(doc.warnings.is_empty())
}

fn names(net: &TransitionNetwork, seq: &[effsec_core::PersonalizedAction]) -> Vec<String> {
    seq.iter()
        .map(|pa| format!("{}.{}", net.agent_name(pa.agent), net.action_name(pa.action)))
        .collect()
}

fn witness_json(net: &TransitionNetwork, v: &NiVerdict) -> Value {
    match &v.witness {
        None => Value::Null,
        Some(NiWitness::StatePair(w)) => json!({
            "kind": "statePair",
            "first": net.state_name(w.first),
            "second": net.state_name(w.second),
            "agent": net.agent_name(w.agent),
            "observations": [
                net.obs_name(net.obs(w.first, w.agent)),
                net.obs_name(net.obs(w.second, w.agent)),
            ],
        }),
        Some(NiWitness::Sequence(w)) => json!({
            "kind": "sequence",
            "sequence": names(net, &w.alpha),
            "agent": net.agent_name(w.agent),
            "observed": net.obs_name(w.observed),
            "purged": w.purged.map(|o| net.obs_name(o)),
        }),
    }
}

fn witness_text(net: &TransitionNetwork, v: &NiVerdict) -> String {
    match &v.witness {
        None => String::new(),
        Some(NiWitness::StatePair(w)) => format!(
            "{} ~ {} are R*-related but {} sees {} vs {}",
            net.state_name(w.first),
            net.state_name(w.second),
            net.agent_name(w.agent),
            net.obs_name(net.obs(w.first, w.agent)),
            net.obs_name(net.obs(w.second, w.agent))
        ),
        Some(NiWitness::Sequence(w)) => format!(
            "after <{}> {} sees {}, after its purge {}",
            names(net, &w.alpha).join(", "),
            net.agent_name(w.agent),
            net.obs_name(w.observed),
            w.purged.map_or("undefined", |o| net.obs_name(o))
        ),
    }
}

fn ni(path: &Path, depth: Option<Option<usize>>, json: bool) -> Outcome {
    let doc = load(path)?;
    warn_invalid(&doc);
    let net = &doc.network;
    let exact = check_ni_exact(net);
    let bounded = depth.map(|d| check_ni_bounded(net, d.unwrap_or_else(|| default_depth(net))));
    let agree = bounded.as_ref().map(|b| b.holds == exact.holds);
    if agree == Some(false) {
        eprintln!("warning: exact and bounded checks disagree");
    }
    if json {
        let mut out = json!({
            "model": net.name(),
            "holds": exact.holds,
            "method": exact.method,
            "witness": witness_json(net, &exact),
        });
        if let Some(b) = &bounded {
            out["bounded"] = json!({
                "method": b.method,
                "holds": b.holds,
                "witness": witness_json(net, b),
            });
            out["agree"] = json!(agree);
        }
        emit(&out);
    } else {
        let verdict = |h: bool| if h { "holds" } else { "violated" };
        println!("{}: noninterference {}", net.name(), verdict(exact.holds));
        if !exact.holds {
            println!("  witness: {}", witness_text(net, &exact));
        }
        if let Some(b) = &bounded {
            let depth = match b.method {
                NiMethod::Bounded { depth } => depth,
                NiMethod::Exact => 0,
            };
            println!("  bounded check (depth {depth}): {}", verdict(b.holds));
            if !b.holds {
                println!("  witness: {}", witness_text(net, b));
            }
        }
    }
    Ok(exact.holds && bounded.is_none_or(|b| b.holds))
}

fn rstar(path: &Path, json: bool) -> Outcome {
    let doc = load(path)?;
    warn_invalid(&doc);
    let net = &doc.network;
    let part = compute_rstar(net);
    let report = check_unwinding(net, &part);
    let blocks: Vec<Vec<&str>> = part
        .blocks()
        .map(|b| b.into_iter().map(|s| net.state_name(s)).collect())
        .collect();
    if json {
        emit(&json!({
            "model": net.name(),
            "blocks": blocks,
            "unwinding": { "oc": report.oc, "sc": report.sc, "lr": report.lr },
        }));
    } else {
        println!("{}: R* has {} block(s)", net.name(), blocks.len());
        for b in &blocks {
            println!("  {{{}}}", b.join(" "));
        }
        println!("  OC {}  SC {}  LR {}", report.oc, report.sc, report.lr);
    }
    Ok(report.is_unwinding())
}

fn idealize_cmd(
    path: &Path,
    output: Option<&Path>,
    minimality: bool,
    budget: u64,
    json: bool,
) -> Outcome {
    let doc = load(path)?;
    warn_invalid(&doc);
    let net = &doc.network;
    let ideal = idealize(net);
    for w in &ideal.warnings {
        eprintln!("warning: unification breaks availability-awareness: {}", w.describe(&ideal.network));
    }
    let text = serialize_model(&ModelDocument::new(ideal.network.clone(), doc.goals.clone()));
    let report = if minimality {
        Some(check_minimality(net, &ideal.unification, budget)?)
    } else {
        None
    };
    if let Some(p) = output {
        write_file(p, &text)?;
    }
    if json {
        let mut out = json!({
            "model": net.name(),
            "unification": unification_json(&ideal),
            "idealizedModel": text,
            "noninterferent": check_ni_exact(&ideal.network).holds,
            "warnings": ideal.warnings.iter().map(|w| w.describe(&ideal.network)).collect::<Vec<_>>(),
        });
        if let Some(r) = &report {
            out["minimality"] = json!({
                "minimal": r.minimal,
                "checked": r.checked,
                "witness": r.witness.as_ref().map(|w| block_names(&ideal.base, w)),
            });
        }
        emit(&out);
    } else {
        if output.is_none() {
            print!("{text}");
        }
        for block in ideal.merged_blocks() {
            eprintln!("unified: {}", block.join(" "));
        }
        if let Some(r) = &report {
            eprintln!("minimal: {} ({} refinements checked)", r.minimal, r.checked);
        }
    }
    Ok(report.is_none_or(|r| r.minimal))
}

fn resolve_goal<'a>(doc: &'a ModelDocument, name: Option<&str>) -> Result<(String, &'a Goal), Failure> {
    match name {
        Some(n) => doc
            .goal(n)
            .map(|g| (n.to_owned(), g))
            .ok_or_else(|| Failure::Input(format!("{}: no goal named {n}", doc.network.name()))),
        None if doc.goals.len() == 1 => {
            let (n, g) = doc.goals.iter().next().expect("one goal");
            Ok((n.clone(), g))
        }
        None => Err(Failure::Input(format!(
            "{} declares {} goals; pick one with --goal",
            doc.network.name(),
            doc.goals.len()
        ))),
    }
}

fn strategy_text(net: &TransitionNetwork, s: &Strategy) {
    for (key, mv) in &s.moves {
        println!("    {} -> {}", key.describe(net), mv.display(net));
    }
}

fn write_dot(path: Option<&Path>, net: &TransitionNetwork, att: effsec_core::AgentId, goal: &Goal, strategy: Option<&Strategy>) -> Result<(), Failure> {
    let Some(path) = path else {
        return Ok(());
    };
    let arena = BeliefArena::for_goal(net, att, goal)?;
    let dot = match strategy {
        Some(s) => product_to_dot(&arena, s),
        None => arena_to_dot(&arena),
    };
    write_file(path, &dot)
}

fn solve_cmd(path: &Path, game: &GameArgs) -> Outcome {
    let doc = load(path)?;
    warn_invalid(&doc);
    let net = &doc.network;
    let (goal_name, goal) = resolve_goal(&doc, game.goal.as_deref())?;
    let att = resolve_attacker(net, game.attacker.as_deref())?;
    let sem = Semantics::from(game.semantics);
    let result = solve(net, att, goal, sem, game.budget)?;
    let verified = match &result.strategy {
        Some(s) => Some(verify_strategy(net, s, goal, sem)?.ok),
        None => None,
    };
    write_dot(game.dot.as_deref(), net, att, goal, result.strategy.as_ref())?;
    let diagnostics = match &result.diagnostics {
        Some(Diagnostics::LosingNode(k)) => json!({ "losingNode": k.describe(net) }),
        Some(Diagnostics::InitialViolation) => json!({ "initialViolation": true }),
        None => Value::Null,
    };
    if game.json {
        emit(&json!({
            "model": net.name(),
            "goal": goal_json(net, &goal_name, goal),
            "attacker": net.agent_name(att),
            "semantics": sem,
            "winning": result.winning,
            "verified": verified,
            "strategy": result.strategy.as_ref().map_or(Value::Null, |s| s.to_json(net)),
            "diagnostics": diagnostics,
            "candidates": result.candidates,
        }));
    } else {
        println!(
            "{}: {} {} goal {} under {sem} semantics",
            net.name(),
            net.agent_name(att),
            if result.winning { "wins" } else { "cannot win" },
            goal_name
        );
        if let Some(s) = &result.strategy {
            println!("  strategy (verified: {}):", verified == Some(true));
            strategy_text(net, s);
        }
        if let Some(Diagnostics::LosingNode(k)) = &result.diagnostics {
            println!("  losing at {}", k.describe(net));
        }
    }
    Ok(result.winning)
}

fn ms(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

fn effsec_cmd(path: &Path, game: &GameArgs) -> Outcome {
    let doc = load(path)?;
    warn_invalid(&doc);
    let net = &doc.network;
    let (goal_name, goal) = resolve_goal(&doc, game.goal.as_deref())?;
    let att = resolve_attacker(net, game.attacker.as_deref())?;
    let sem = Semantics::from(game.semantics);
    let start = Instant::now();
    let report = effective_info_security(net, att, goal, sem, game.budget)?;
    let total = ms(start);
    write_dot(
        game.dot.as_deref(),
        net,
        att,
        &goal.negate(),
        report.es.attack_strategy.as_ref(),
    )?;
    if game.json {
        emit(&info_sec_json(net, &goal_name, &report, &[("total", total)]));
    } else {
        let other = |v: &effsec_core::effsec::EsVerdict| {
            v.secondary
                .map(|(s, b)| format!(" ({s}: {b})"))
                .unwrap_or_default()
        };
        println!(
            "{}: goal {}, attacker {}, {sem} semantics",
            net.name(),
            goal_name,
            net.agent_name(att)
        );
        println!("  ES(model) = {}{}", report.es.effectively_secure, other(&report.es));
        println!("  ES(ideal) = {}{}", report.es_ideal.effectively_secure, other(&report.es_ideal));
        for block in report.idealization.merged_blocks() {
            println!("  unified: {}", block.join(" "));
        }
        if let Some(s) = &report.es.attack_strategy {
            println!("  attack on the model:");
            strategy_text(net, s);
        }
        if let Some(s) = &report.es_ideal.attack_strategy {
            println!("  attack on the idealized model:");
            strategy_text(&report.idealization.network, s);
        }
        println!(
            "  effectively information-secure: {}",
            if report.secure { "yes" } else { "no" }
        );
    }
    Ok(report.secure)
}

fn compare_cmd(path_a: &Path, path_b: &Path, game: &GameArgs) -> Outcome {
    let a = load(path_a)?;
    let b = load(path_b)?;
    warn_invalid(&a);
    warn_invalid(&b);
    let (goal_name, goal_a) = resolve_goal(&a, game.goal.as_deref())?;
    let (_, goal_b) = resolve_goal(&b, Some(&goal_name))?;
    let attacker = match &game.attacker {
        Some(n) => n.clone(),
        None => a.network.agent_name(resolve_attacker(&a.network, None)?).to_owned(),
    };
    let sem = Semantics::from(game.semantics);
    let start = Instant::now();
    let verdict = compare(&a.network, goal_a, &b.network, goal_b, &attacker, sem, game.budget)?;
    let total = ms(start);
    if game.json {
        emit(&comparison_json(&a.network, &b.network, &goal_name, &verdict, &[("total", total)]));
    } else {
        let (na, nb) = (a.network.name(), b.network.name());
        println!("goal {goal_name}, attacker {attacker}, {sem} semantics");
        println!("  ES({na}) = {}", verdict.a.effectively_secure);
        println!("  ES({nb}) = {}", verdict.b.effectively_secure);
        let r = &verdict.relation;
        let rel = if r.equivalent {
            "≃"
        } else if r.strictly_less {
            "≺"
        } else {
            "≻"
        };
        println!("  {na} {rel} {nb}");
    }
    Ok(verdict.relation.equivalent)
}
