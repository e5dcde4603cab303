//! Language-model agents that orchestrate a simulated RAN physical layer.
//!
//! The pipeline: a task is turned into transmission requirements, a planner
//! breaks it into steps, each step is matched to a tool-library API by
//! embedding similarity, the API's parameters are bound from the task,
//! earlier outputs and defaults, and the call runs against a deterministic
//! simulator.

// Negated float comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod binding;
pub mod cli;
pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod llm;
pub mod registry;
pub mod retrieval;
pub mod scenario;
pub mod sim;
pub mod util;
pub mod value;
