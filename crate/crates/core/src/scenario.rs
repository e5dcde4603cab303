//! Scenario files: seed, initial environment, dynamics, toy-model constants
//! and the event stream.
//!
//! ```json
//! {
//!   "name": "demo",
//!   "seed": 7,
//!   "initial_env": {"snr_db": 30, "pa_temperature_c": 45},
//!   "dynamics": {"ramps": [{"start_s": 0, "end_s": 50, "rate_c_per_s": 1}]},
//!   "events": [
//!     {"at": 10, "kind": "env_update", "payload": {}},
//!     {"at": 50, "kind": "new_task", "payload": {"id": "t1", "description": "start an AR video session"}}
//!   ]
//! }
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::UeTask;
use crate::sim::{Dynamics, Mobility, SimEnvironment, SimError, ToyModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialEnv {
    pub snr_db: f64,
    pub pa_temperature_c: f64,
    #[serde(default = "default_nominal")]
    pub temp_nominal_c: f64,
    #[serde(default = "default_ue_count")]
    pub ue_count: u32,
    #[serde(default = "default_mobility")]
    pub mobility: Mobility,
    #[serde(default)]
    pub compensation_active: bool,
}

fn default_nominal() -> f64 {
    45.0
}

fn default_ue_count() -> u32 {
    1
}

fn default_mobility() -> Mobility {
    Mobility::Static
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvUpdate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ue_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mobility: Option<Mobility>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskPayload {
    pub id: String,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    NewTask(TaskPayload),
    EnvUpdate(EnvUpdate),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub at: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl Event {
    pub fn task(&self) -> Option<UeTask> {
        match &self.kind {
            EventKind::NewTask(t) => Some(UeTask { id: t.id.clone(), description: t.description.clone(), arrival_time: self.at }),
            EventKind::EnvUpdate(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub seed: u64,
    pub initial_env: InitialEnv,
    #[serde(default)]
    pub dynamics: Dynamics,
    #[serde(default)]
    pub model: ToyModel,
    pub events: Vec<Event>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("scenario parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.initial_environment().validate()?;
        self.dynamics.validate()?;
        self.model.validate()?;
        let mut prev = 0.0;
        let mut ids = BTreeSet::new();
        for (i, e) in self.events.iter().enumerate() {
            if !(e.at >= prev) || !e.at.is_finite() {
                return Err(ScenarioError::Invalid(format!("event {i} at {} is before the previous event", e.at)));
            }
            prev = e.at;
            if let EventKind::NewTask(t) = &e.kind {
                if t.description.trim().is_empty() {
                    return Err(ScenarioError::Invalid(format!("task `{}` has an empty description", t.id)));
                }
                if !ids.insert(t.id.as_str()) {
                    return Err(ScenarioError::Invalid(format!("duplicate task id `{}`", t.id)));
                }
            }
        }
        Ok(())
    }

    pub fn initial_environment(&self) -> SimEnvironment {
        let i = &self.initial_env;
        SimEnvironment {
            snr_db: i.snr_db,
            pa_temperature_c: i.pa_temperature_c,
            temp_nominal_c: i.temp_nominal_c,
            ue_count: i.ue_count,
            mobility: i.mobility,
            compensation_active: i.compensation_active,
            seed: self.seed,
            clock: 0.0,
            tick: 0,
        }
    }
}
