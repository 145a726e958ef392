//! Effective information security for multi-agent transition networks.
//!
//! The pipeline: check noninterference ([`noninterference`]), build the
//! noninterferent idealized model by unifying observations ([`idealize`]),
//! solve the Low attacker's imperfect-information game ([`games`]), and
//! compare the attacker's power in the model and its idealization
//! ([`effsec`]).

pub mod effsec;
pub mod error;
pub mod fixtures;
pub mod games;
pub mod goal;
pub mod idealize;
pub mod lang;
pub mod model;
pub mod noninterference;
pub mod partition;
pub mod report;

pub use error::{GameError, IdealizeError, ModelError, ParseError, PartitionError};
pub use goal::{Goal, GoalKind, GoalSpec};
pub use lang::{parse_model, serialize_model, ModelDocument};
pub use model::{
    purge, ActionId, ActionSequence, AgentId, NetworkBuilder, ObsId, PersonalizedAction, Role,
    StateId, TransitionNetwork, ValidationReport, Violation,
};
pub use partition::{ObservationPartition, StatePartition, UnionFind};
