//! The agent roles and the orchestrator.
//!
//! Five roles take part in handling a task: task awareness (task text to
//! transmission requirements), the observer (environment samples to a state
//! summary, no model call), system configuration (requirements and state to
//! a numbered plan), API invoking (parameter binding, see [`crate::binding`])
//! and reporting. [`Session`] drives them over an event stream.

pub mod grammar;
pub mod roles;
pub mod session;
pub mod types;

pub use grammar::GrammarError;
pub use roles::{observe, plan, report, should_replan, task_awareness, AgentError, ReplanThresholds};
pub use session::{PlanTrace, Session, SessionConfig, SessionError};
pub use types::*;
