use std::borrow::Cow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::roles::{self, observe, should_replan, AgentError, ReplanThresholds};
use super::types::*;
use crate::binding::{resolve_parameters, resolve_values, Binding, BindingResolution, ExecutionContext, DEFAULT_BIND_TAU};
use crate::embedding::{Embedder, VectorStore};
use crate::llm::LlmBackend;
use crate::registry::{Category, Registry};
use crate::retrieval::{retrieve_api_with, RetrievalError, DEFAULT_K_REPORT, DEFAULT_TAU};
use crate::scenario::{Event, EventKind, Scenario};
use crate::sim::{EnvSample, SimError, Simulator};
use crate::util::fmt_sig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub tau: f64,
    pub bind_tau: f64,
    pub k_report: usize,
    pub thresholds: ReplanThresholds,
    /// Ask the reporter agent for a prose summary.
    pub prose_summary: bool,
    /// Restricts the configuration agent's API database to these categories.
    pub planner_categories: Option<Vec<Category>>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            tau: DEFAULT_TAU,
            bind_tau: DEFAULT_BIND_TAU,
            k_report: DEFAULT_K_REPORT,
            thresholds: ReplanThresholds::default(),
            prose_summary: true,
            planner_categories: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session misconfigured: {0}")]
    Misconfigured(String),
    #[error("event at {at} arrives before simulation time {clock}")]
    EventOutOfOrder { at: f64, clock: f64 },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

/// Everything the session did for one plan, kept for the run artifact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanTrace {
    pub plan: Plan,
    pub resolutions: Vec<BindingResolution>,
}

struct ActiveTask {
    task: UeTask,
    requirements: TransmissionRequirements,
    planned_state: EnvironmentState,
}

/// One orchestration run over an event stream. Events are processed
/// sequentially; at most one task is active at a time.
pub struct Session<'a> {
    registry: &'a Registry,
    store: Cow<'a, VectorStore>,
    embedder: &'a dyn Embedder,
    backend: &'a dyn LlmBackend,
    sim: Simulator,
    config: SessionConfig,
    active: Option<ActiveTask>,
    pending: Vec<EnvSample>,
    last_state: Option<EnvironmentState>,
    reports: Vec<ExecutionReport>,
    traces: Vec<PlanTrace>,
}

impl<'a> Session<'a> {
    pub fn new(
        registry: &'a Registry,
        store: &'a VectorStore,
        embedder: &'a dyn Embedder,
        backend: &'a dyn LlmBackend,
        sim: Simulator,
        config: SessionConfig,
    ) -> Result<Self, SessionError> {
        if store.fingerprint() != embedder.fingerprint() {
            return Err(SessionError::Misconfigured(format!(
                "store built with `{}`, embedder is `{}`",
                store.fingerprint(),
                embedder.fingerprint()
            )));
        }
        if let Some(id) = store.api_ids().find(|id| !registry.contains(id)) {
            return Err(SessionError::Misconfigured(format!("store entry `{id}` is not in the registry")));
        }
        if !(-1.0..=1.0).contains(&config.tau) || !(0.0..=1.0).contains(&config.bind_tau) || config.k_report == 0 {
            return Err(SessionError::Misconfigured("tau, bind_tau or k_report out of range".into()));
        }
        let store = match &config.planner_categories {
            Some(cats) => Cow::Owned(store.filtered(|id| registry.get(id).is_ok_and(|d| cats.contains(&d.category)))),
            None => Cow::Borrowed(store),
        };
        if store.is_empty() {
            return Err(SessionError::Misconfigured("API database is empty".into()));
        }
        Ok(Session {
            registry,
            store,
            embedder,
            backend,
            sim,
            config,
            active: None,
            pending: Vec::new(),
            last_state: None,
            reports: Vec::new(),
            traces: Vec::new(),
        })
    }

    /// Builds the simulator from a scenario.
    pub fn for_scenario(
        registry: &'a Registry,
        store: &'a VectorStore,
        embedder: &'a dyn Embedder,
        backend: &'a dyn LlmBackend,
        scenario: &Scenario,
        config: SessionConfig,
    ) -> Result<Self, SessionError> {
        let sim = Simulator::new(registry, scenario.initial_environment(), scenario.model, scenario.dynamics.clone())?;
        Self::new(registry, store, embedder, backend, sim, config)
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn reports(&self) -> &[ExecutionReport] {
        &self.reports
    }

    pub fn traces(&self) -> &[PlanTrace] {
        &self.traces
    }

    pub fn last_state(&self) -> Option<&EnvironmentState> {
        self.last_state.as_ref()
    }

    /// Runs every event in order and returns the reports produced.
    pub fn run(&mut self, events: &[Event]) -> Result<Vec<ExecutionReport>, SessionError> {
        let mut out = Vec::new();
        for e in events {
            if let Some(r) = self.orchestrate(e)? {
                out.push(r);
            }
        }
        Ok(out)
    }

    /// Handles one event. New tasks always produce a report; environment
    /// updates produce one only when they trigger a replan.
    pub fn orchestrate(&mut self, event: &Event) -> Result<Option<ExecutionReport>, SessionError> {
        let clock = self.sim.env().clock;
        if event.at < clock {
            return Err(SessionError::EventOutOfOrder { at: event.at, clock });
        }
        if event.at > clock {
            let samples = self.sim.step_environment(event.at - clock)?;
            self.pending.extend(samples);
        }
        if let EventKind::EnvUpdate(update) = &event.kind {
            self.sim.set_population(update.ue_count, update.mobility);
        }
        let now = self.sim.sample_now();
        if self.pending.last() != Some(&now) {
            self.pending.push(now);
        }
        let state = observe(&std::mem::take(&mut self.pending))?;
        self.last_state = Some(state.clone());

        let report = match &event.kind {
            EventKind::NewTask(_) => {
                let task = event.task().expect("new_task event");
                Some(self.start_task(task, state, event.at))
            }
            EventKind::EnvUpdate(_) => match &self.active {
                Some(active) if should_replan(&active.planned_state, &state, &self.config.thresholds) => {
                    let task_id = active.task.id.clone();
                    let requirements = active.requirements.clone();
                    if let Some(a) = self.active.as_mut() {
                        a.planned_state = state.clone();
                    }
                    Some(self.plan_and_execute(&task_id, &requirements, &state, "replan", event.at))
                }
                _ => None,
            },
        };
        if let Some(r) = &report {
            self.reports.push(r.clone());
        }
        Ok(report)
    }

    fn failed(&self, task_id: &str, trigger: &str, at: f64, failure: String) -> ExecutionReport {
        let m = self.sim.metrics();
        ExecutionReport {
            task_id: task_id.to_owned(),
            trigger: trigger.to_owned(),
            at,
            plan_length: 0,
            step_outcomes: Vec::new(),
            metrics_before: m,
            metrics_after: m,
            verdict: Verdict::Failed,
            failure: Some(failure),
            summary: None,
            summary_error: None,
        }
    }

    fn start_task(&mut self, task: UeTask, state: EnvironmentState, at: f64) -> ExecutionReport {
        let requirements = match roles::task_awareness(self.backend, &task) {
            Ok(r) => r,
            Err(e) => {
                self.active = None;
                return self.failed(&task.id, "new_task", at, e.to_string());
            }
        };
        let task_id = task.id.clone();
        self.active = Some(ActiveTask { task, requirements: requirements.clone(), planned_state: state.clone() });
        self.plan_and_execute(&task_id, &requirements, &state, "new_task", at)
    }

    fn plan_and_execute(
        &mut self,
        task_id: &str,
        requirements: &TransmissionRequirements,
        state: &EnvironmentState,
        trigger: &str,
        at: f64,
    ) -> ExecutionReport {
        let metrics_before = self.sim.metrics();
        let mut plan = match roles::plan(self.backend, task_id, requirements, state) {
            Ok(p) => p,
            Err(e) => return self.failed(task_id, trigger, at, e.to_string()),
        };
        let mut ctx = ExecutionContext::new();
        let mut outcomes = Vec::new();
        let mut resolutions = Vec::new();
        for step in plan.steps.iter_mut() {
            let (status, api_id, detail) = self.execute_step(step, requirements, &mut ctx, &mut resolutions);
            let ok = status == StepStatus::Ok;
            outcomes.push(StepOutcome { index: step.index, api_id, status, detail });
            if !ok {
                break;
            }
        }
        let backend = self.config.prose_summary.then_some(self.backend);
        let mut report =
            roles::report(backend, task_id, plan.steps.len(), outcomes, metrics_before, self.sim.metrics());
        report.trigger = trigger.to_owned();
        report.at = at;
        self.traces.push(PlanTrace { plan, resolutions });
        report
    }

    fn execute_step(
        &mut self,
        step: &mut PlanStep,
        requirements: &TransmissionRequirements,
        ctx: &mut ExecutionContext,
        resolutions: &mut Vec<BindingResolution>,
    ) -> (StepStatus, Option<String>, String) {
        let retrieved = retrieve_api_with(&self.store, self.embedder, &step.text, self.config.tau, self.config.k_report);
        let result = match retrieved {
            Ok(r) => r,
            Err(RetrievalError::NoMatch { best, tau, .. }) => {
                let detail = format!(
                    "no API for `{}`: best {} scored {} < tau {}",
                    step.text,
                    best.api_id,
                    fmt_sig(best.score, 6),
                    tau
                );
                return (StepStatus::NoMatch, None, detail);
            }
            Err(e) => return (StepStatus::ExecError, None, e.to_string()),
        };
        let api_id = result.chosen_api.clone();
        step.resolve(result);
        let descriptor = self.registry.get(&api_id).expect("store ids are registry ids");

        let resolution = match resolve_parameters(
            Some(self.backend),
            descriptor,
            ctx,
            Some(requirements),
            self.config.bind_tau,
            self.embedder,
        ) {
            Ok(r) => r,
            Err(e) => return (StepStatus::BindingFailed, Some(api_id), e.to_string()),
        };
        let values = match resolve_values(&resolution, ctx, Some(requirements)) {
            Ok(v) => v,
            Err(e) => return (StepStatus::BindingFailed, Some(api_id), e.to_string()),
        };
        let bindings: Vec<String> = resolution
            .assignments
            .iter()
            .map(|a| {
                let target = match &a.binding {
                    Binding::Variable(n) => n.clone(),
                    Binding::Requirement(k) => k.clone(),
                    Binding::Default(v) => format!("default {v}"),
                };
                let method = serde_json::to_value(a.method).expect("method");
                format!("{}<-{} ({} {})", a.param_name, target, method.as_str().unwrap_or(""), fmt_sig(a.confidence, 3))
            })
            .collect();
        resolutions.push(resolution);

        let outputs = match self.sim.execute_api(&api_id, &values) {
            Ok(o) => o,
            Err(e) => return (StepStatus::ExecError, Some(api_id), e.to_string()),
        };
        if let Err(e) = ctx.record_outputs(descriptor, &outputs, step.index) {
            return (StepStatus::ExecError, Some(api_id), e.to_string());
        }
        let outputs: Vec<String> = outputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let detail = format!("bind [{}]; out [{}]", bindings.join(", "), outputs.join(", "));
        (StepStatus::Ok, Some(api_id), detail)
    }
}
