use std::collections::{BTreeMap, HashMap, HashSet};

use super::lexer::{tokenize, Pos, Tok, Token};
use super::ModelDocument;
use crate::error::ParseError;
use crate::goal::{Goal, GoalKind};
use crate::model::{NetworkBuilder, Role};

type Name = (String, Pos);

#[derive(Default)]
struct Raw {
    name: String,
    name_pos: Option<Pos>,
    agents: Vec<(Name, Role)>,
    actions: Vec<Name>,
    observations: Vec<Name>,
    states: Vec<(Name, Vec<(Name, Name)>)>,
    init: Option<Name>,
    transitions: Vec<(Name, Name, Name, Name)>,
    goals: Vec<(Name, GoalKind, Vec<Name>)>,
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

const ITEM_KEYWORDS: [&str; 6] = ["agents", "actions", "observations", "state", "init", "goal"];

fn quoted(s: &str) -> String {
    format!("'{s}'")
}

fn err_at(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        column: pos.column,
        message: message.into(),
        expected: Vec::new(),
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        let list = expected.join(", ");
        let message = if expected.len() == 1 {
            format!("expected {list}, found {}", t.tok.describe())
        } else {
            format!("expected one of {list}, found {}", t.tok.describe())
        };
        ParseError {
            line: t.pos.line,
            column: t.pos.column,
            message,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok, shown: &str) -> Result<Pos, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&[shown]))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => Ok(self.bump().pos),
            _ => Err(self.unexpected(&[&quoted(kw)])),
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.bump().pos))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    /// Identifiers and class labels are both accepted as observation names.
    fn label(&mut self) -> Result<Name, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) | Tok::Class(s) => {
                let s = s.clone();
                Ok((s, self.bump().pos))
            }
            _ => Err(self.unexpected(&["identifier", "class label"])),
        }
    }

    /// Parses `{ item* }`; `{x}` lexed as a class is read as a one-element list.
    fn list<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
        wrap_single: impl FnOnce(Name) -> T,
    ) -> Result<Vec<T>, ParseError> {
        if let Tok::Class(s) = &self.peek().tok {
            let inner = &s[1..s.len() - 1];
            if !inner.is_empty() && inner.chars().all(super::lexer::is_ident_char) {
                let inner = inner.to_owned();
                let pos = self.bump().pos;
                let shifted = Pos {
                    line: pos.line,
                    column: pos.column + 1,
                };
                return Ok(vec![wrap_single((inner, shifted))]);
            }
        }
        self.expect(Tok::LBrace, "'{'")?;
        let mut out = Vec::new();
        while self.peek().tok != Tok::RBrace {
            if self.peek().tok == Tok::Eof {
                return Err(self.unexpected(&["'}'"]));
            }
            out.push(item(self)?);
        }
        self.bump();
        Ok(out)
    }

    fn role(&mut self) -> Result<Role, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == "high" => {
                self.bump();
                Ok(Role::High)
            }
            Tok::Ident(s) if s == "low" => {
                self.bump();
                Ok(Role::Low)
            }
            _ => Err(self.unexpected(&["'high'", "'low'"])),
        }
    }

    fn document(&mut self) -> Result<Raw, ParseError> {
        let mut raw = Raw::default();
        self.keyword("network")?;
        let (name, pos) = self.ident()?;
        raw.name = name;
        raw.name_pos = Some(pos);

        loop {
            let tok = self.peek().tok.clone();
            let is_item_kw = matches!(&tok, Tok::Ident(s) if ITEM_KEYWORDS.contains(&s.as_str()))
                && *self.peek2() != Tok::Arrow;
            match tok {
                Tok::Eof => break,
                Tok::Ident(kw) if is_item_kw => {
                    self.bump();
                    match kw.as_str() {
                        "agents" => {
                            let items = self.list(
                                |p| {
                                    let name = p.ident()?;
                                    p.expect(Tok::Colon, "':'")?;
                                    Ok(Some((name, p.role()?)))
                                },
                                |_| None,
                            )?;
                            for item in items {
                                match item {
                                    Some(a) => raw.agents.push(a),
                                    None => return Err(self.unexpected_after_class()),
                                }
                            }
                        }
                        "actions" => raw.actions.extend(self.list(|p| p.ident(), |n| n)?),
                        "observations" => {
                            raw.observations.extend(self.list(|p| p.label(), |n| n)?)
                        }
                        "state" => {
                            let name = self.ident()?;
                            let entries = self.list(
                                |p| {
                                    let agent = p.ident()?;
                                    p.expect(Tok::Eq, "'='")?;
                                    Ok(Some((agent, p.label()?)))
                                },
                                |_| None,
                            )?;
                            let entries = entries
                                .into_iter()
                                .map(|e| e.ok_or_else(|| self.unexpected_after_class()))
                                .collect::<Result<Vec<_>, _>>()?;
                            raw.states.push((name, entries));
                        }
                        "init" => {
                            let s = self.ident()?;
                            if raw.init.is_some() {
                                return Err(err_at(s.1, "duplicate 'init' declaration"));
                            }
                            raw.init = Some(s);
                        }
                        "goal" => {
                            let name = self.ident()?;
                            let kind = match &self.peek().tok {
                                Tok::Ident(s) if s == "safety" => {
                                    self.bump();
                                    self.keyword("avoid")?;
                                    GoalKind::Safety
                                }
                                Tok::Ident(s) if s == "reachability" => {
                                    self.bump();
                                    self.keyword("reach")?;
                                    GoalKind::Reachability
                                }
                                _ => return Err(self.unexpected(&["'safety'", "'reachability'"])),
                            };
                            let list_pos = self.peek().pos;
                            let states = self.list(|p| p.ident(), |n| n)?;
                            if kind == GoalKind::Reachability && states.is_empty() {
                                return Err(err_at(list_pos, "reachability goal needs a nonempty target"));
                            }
                            raw.goals.push((name, kind, states));
                        }
                        _ => unreachable!(),
                    }
                }
                Tok::Ident(_) => {
                    let src = self.ident()?;
                    if self.peek().tok != Tok::Arrow {
                        let mut expected: Vec<String> =
                            ITEM_KEYWORDS.iter().map(|k| quoted(k)).collect();
                        expected.push("'->'".into());
                        let refs: Vec<&str> = expected.iter().map(String::as_str).collect();
                        return Err(self.unexpected(&refs));
                    }
                    self.bump();
                    let dst = self.ident()?;
                    self.keyword("on")?;
                    let agent = self.ident()?;
                    self.expect(Tok::Dot, "'.'")?;
                    let action = self.ident()?;
                    raw.transitions.push((src, dst, agent, action));
                }
                _ => {
                    let mut expected: Vec<String> = ITEM_KEYWORDS.iter().map(|k| quoted(k)).collect();
                    expected.push("state name".into());
                    expected.push("end of input".into());
                    let refs: Vec<&str> = expected.iter().map(String::as_str).collect();
                    return Err(self.unexpected(&refs));
                }
            }
        }
        Ok(raw)
    }

    fn unexpected_after_class(&self) -> ParseError {
        let t = &self.toks[self.at.saturating_sub(1)];
        ParseError {
            line: t.pos.line,
            column: t.pos.column,
            message: "expected '{' followed by entries".into(),
            expected: vec!["'{'".into()],
        }
    }
}

fn declare(
    kind: &str,
    names: impl IntoIterator<Item = Name>,
) -> Result<HashSet<String>, ParseError> {
    let mut seen = HashSet::new();
    for (n, pos) in names {
        if !seen.insert(n.clone()) {
            return Err(err_at(pos, format!("duplicate {kind} '{n}'")));
        }
    }
    Ok(seen)
}

fn resolve(kind: &str, declared: &HashSet<String>, (n, pos): &Name) -> Result<(), ParseError> {
    if declared.contains(n) {
        Ok(())
    } else {
        Err(err_at(*pos, format!("undeclared {kind} '{n}'")))
    }
}

pub fn parse_model(text: &str) -> Result<ModelDocument, ParseError> {
    let mut parser = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let raw = parser.document()?;
    let end = parser.peek().pos;

    let states = declare("state", raw.states.iter().map(|(n, _)| n.clone()))?;
    let actions = declare("action", raw.actions.iter().cloned())?;
    let observations = declare("observation", raw.observations.iter().cloned())?;

    let mut agent_roles: HashMap<String, Vec<Role>> = HashMap::new();
    for ((n, pos), role) in &raw.agents {
        let roles = agent_roles.entry(n.clone()).or_default();
        if roles.contains(role) {
            return Err(err_at(*pos, format!("duplicate agent '{n}'")));
        }
        roles.push(*role);
    }
    let agents: HashSet<String> = agent_roles.keys().cloned().collect();
    let mut agent_order: Vec<&str> = Vec::new();
    for ((n, _), _) in &raw.agents {
        if !agent_order.contains(&n.as_str()) {
            agent_order.push(n);
        }
    }

    for (state, entries) in &raw.states {
        let mut seen = HashSet::new();
        for (agent, label) in entries {
            resolve("agent", &agents, agent)?;
            resolve("observation", &observations, label)?;
            if !seen.insert(agent.0.as_str()) {
                return Err(err_at(
                    agent.1,
                    format!("duplicate observation for agent '{}' in state '{}'", agent.0, state.0),
                ));
            }
        }
        for a in &agent_order {
            if !seen.contains(a) {
                return Err(err_at(
                    state.1,
                    format!("state '{}' has no observation for agent '{a}'", state.0),
                ));
            }
        }
    }

    let init = raw
        .init
        .as_ref()
        .ok_or_else(|| err_at(end, "missing 'init' declaration"))?;
    resolve("state", &states, init)?;

    let mut keys = HashSet::new();
    for (src, dst, agent, action) in &raw.transitions {
        resolve("state", &states, src)?;
        resolve("state", &states, dst)?;
        resolve("agent", &agents, agent)?;
        resolve("action", &actions, action)?;
        if !keys.insert((src.0.as_str(), agent.0.as_str(), action.0.as_str())) {
            return Err(err_at(
                src.1,
                format!(
                    "duplicate transition key ({}, {}, {})",
                    src.0, agent.0, action.0
                ),
            ));
        }
    }

    let mut goal_names = HashSet::new();
    for ((name, pos), _, list) in &raw.goals {
        if !goal_names.insert(name.as_str()) {
            return Err(err_at(*pos, format!("duplicate goal '{name}'")));
        }
        declare("goal state", list.iter().cloned())?;
        for s in list {
            resolve("state", &states, s)?;
        }
    }

    let mut b = NetworkBuilder::new(raw.name.clone());
    for ((n, _), role) in &raw.agents {
        b = b.agent(n.clone(), *role);
    }
    b = b
        .actions(raw.actions.iter().map(|(n, _)| n.clone()))
        .observations(raw.observations.iter().map(|(n, _)| n.clone()))
        .initial(init.0.clone());
    for ((s, _), entries) in &raw.states {
        b = b.state(s.clone());
        for ((a, _), (o, _)) in entries {
            b = b.obs(s.clone(), a.clone(), o.clone());
        }
    }
    for ((src, _), (dst, _), (agent, _), (action, _)) in &raw.transitions {
        b = b.transition(src.clone(), agent.clone(), action.clone(), dst.clone());
    }
    let pos = raw.name_pos.unwrap_or(end);
    let network = b.build().map_err(|e| err_at(pos, e.to_string()))?;

    let mut goals = BTreeMap::new();
    for ((name, pos), kind, list) in &raw.goals {
        let goal = Goal::by_names(&network, *kind, list.iter().map(|(n, _)| n.as_str()))
            .map_err(|e| err_at(*pos, e.to_string()))?;
        goals.insert(name.clone(), goal);
    }

    Ok(ModelDocument::new(network, goals))
}
