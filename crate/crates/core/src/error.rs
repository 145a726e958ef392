use thiserror::Error;

/// Errors from constructing or querying a [`TransitionNetwork`](crate::TransitionNetwork).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown state '{0}'")]
    UnknownState(String),
    #[error("unknown agent '{0}'")]
    UnknownAgent(String),
    #[error("unknown action '{0}'")]
    UnknownAction(String),
    #[error("unknown observation '{0}'")]
    UnknownObservation(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(u32),
    #[error("agent index {0} out of range")]
    AgentOutOfRange(u32),
    #[error("action index {0} out of range")]
    ActionOutOfRange(u32),
    #[error("duplicate {kind} '{name}'")]
    Duplicate { kind: &'static str, name: String },
    #[error("no initial state")]
    MissingInitial,
    #[error("state '{state}' has no observation for agent '{agent}'")]
    MissingObservation { state: String, agent: String },
    #[error("state '{state}' has two observations for agent '{agent}'")]
    DuplicateObservation { state: String, agent: String },
    #[error("duplicate transition key ({state}, {agent}, {action})")]
    DuplicateTransition {
        state: String,
        agent: String,
        action: String,
    },
}

/// A positioned syntax or semantic error in `.tn` text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// Tokens that would have been accepted; empty for semantic errors.
    pub expected: Vec<String>,
}

/// Errors raised by partition operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("partition covers {found} elements, expected {expected}")]
    WrongSize { expected: usize, found: usize },
    #[error("element {0} appears in more than one block")]
    Overlap(usize),
    #[error("element {0} is not covered")]
    Uncovered(usize),
    #[error("empty block")]
    EmptyBlock,
}

/// Errors from the game solvers and the analyses built on them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("agent '{0}' is not a low agent")]
    NotLow(String),
    #[error("no attacker given and the network has {0} low agents")]
    AmbiguousAttacker(usize),
    #[error("strategy enumeration exceeded the budget of {0} candidates")]
    Budget(u64),
    #[error("strategy has no move for belief node {0}")]
    MissingMove(String),
    #[error("strategy was built for attacker '{0}'")]
    AttackerMismatch(String),
    #[error("goal '{0}' is not defined")]
    UnknownGoal(String),
    #[error("reachability goal has an empty target")]
    EmptyTarget,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from the idealization module.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdealizeError {
    #[error("unification does not partition the observation set: {0}")]
    NotAPartition(#[from] PartitionError),
    #[error("refinement enumeration exceeded the budget of {0} partitions")]
    Budget(u64),
}
