use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::grammar::{parse_plan, parse_requirements, render_requirements, GrammarError};
use super::types::*;
use crate::llm::{BackendError, LlmBackend, PromptRequest};
use crate::sim::{EnvSample, Metrics};
use crate::util::fmt_sig;

pub const TASK_AWARENESS_PROMPT: &str = include_str!("../../prompts/task_awareness.txt");
pub const PLANNER_PROMPT: &str = include_str!("../../prompts/planner.txt");
pub const REPORTER_PROMPT: &str = include_str!("../../prompts/reporter.txt");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("{role} backend error: {source}")]
    Backend { role: &'static str, source: BackendError },
    #[error("{role} completion rejected after reprompt: {error}")]
    Parse { role: &'static str, error: GrammarError },
    #[error("completion contains no plan steps")]
    EmptyPlan,
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("no environment samples to observe")]
    EmptySamples,
    #[error("environment samples are not in time order")]
    UnorderedSamples,
}

impl AgentError {
    pub fn backend(&self) -> Option<&BackendError> {
        match self {
            AgentError::Backend { source, .. } => Some(source),
            _ => None,
        }
    }
}

enum AskError {
    Backend(BackendError),
    Grammar(GrammarError),
}

/// Sends `request`; on a grammar violation sends it once more with the error
/// appended as a `FORMAT ERROR` segment.
fn ask<T>(
    backend: &dyn LlmBackend,
    request: PromptRequest,
    parse: impl Fn(&str) -> Result<T, GrammarError>,
) -> Result<T, AskError> {
    let first = backend.complete(&request).map_err(AskError::Backend)?;
    match parse(&first.text) {
        Ok(v) => Ok(v),
        Err(err) => {
            let retry = request.with_segment("FORMAT ERROR", format!("{err}. Answer again using the required format."));
            let second = backend.complete(&retry).map_err(AskError::Backend)?;
            parse(&second.text).map_err(AskError::Grammar)
        }
    }
}

fn classify(role: &'static str, err: AskError) -> AgentError {
    match err {
        AskError::Backend(source) => AgentError::Backend { role, source },
        AskError::Grammar(GrammarError::EmptyPlan) => AgentError::EmptyPlan,
        AskError::Grammar(error) => AgentError::Parse { role, error },
    }
}

pub fn task_awareness_request(task: &UeTask) -> PromptRequest {
    PromptRequest::new(TASK_AWARENESS_PROMPT.trim_end(), "REQUIREMENTS:").with_segment("TASK", task.description.as_str())
}

/// Translates an upper-layer task into transmission requirements.
pub fn task_awareness(backend: &dyn LlmBackend, task: &UeTask) -> Result<TransmissionRequirements, AgentError> {
    if task.description.trim().is_empty() {
        return Err(AgentError::InvalidTask(format!("task `{}` has an empty description", task.id)));
    }
    ask(backend, task_awareness_request(task), parse_requirements)
        .map_err(|e| classify("task_awareness", e))
}

/// Aggregates raw samples: mean SNR, peak temperature, the rest from the last sample.
pub fn observe(samples: &[EnvSample]) -> Result<EnvironmentState, AgentError> {
    let last = samples.last().ok_or(AgentError::EmptySamples)?;
    if samples.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
        return Err(AgentError::UnorderedSamples);
    }
    let snr = samples.iter().map(|s| s.snr_db).sum::<f64>() / samples.len() as f64;
    let temp = samples.iter().map(|s| s.pa_temperature_c).fold(f64::NEG_INFINITY, f64::max);
    Ok(EnvironmentState {
        snr_db: snr,
        pa_temperature_c: temp,
        ue_count: last.ue_count,
        mobility: last.mobility,
        timestamp: last.timestamp,
    })
}

pub fn plan_request(requirements: &TransmissionRequirements, state: &EnvironmentState) -> PromptRequest {
    PromptRequest::new(PLANNER_PROMPT.trim_end(), "PLAN:")
        .with_segment("REQUIREMENTS", render_requirements(requirements))
        .with_segment("ENVIRONMENT", state.summary())
}

/// Asks the configuration agent for a plan. Steps come back unresolved.
pub fn plan(
    backend: &dyn LlmBackend,
    task_id: &str,
    requirements: &TransmissionRequirements,
    state: &EnvironmentState,
) -> Result<Plan, AgentError> {
    let parsed = ask(backend, plan_request(requirements, state), parse_plan)
        .map_err(|e| classify("planner", e))?;
    Ok(Plan {
        task_id: task_id.to_owned(),
        rationale: parsed.rationale,
        steps: parsed
            .steps
            .into_iter()
            .enumerate()
            .map(|(i, text)| PlanStep { index: i + 1, text, resolved_api: None, retrieval: None })
            .collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplanThresholds {
    pub snr_db: f64,
    pub temperature_c: f64,
}

impl Default for ReplanThresholds {
    fn default() -> Self {
        ReplanThresholds { snr_db: 3.0, temperature_c: 10.0 }
    }
}

/// Environment-change trigger. New tasks always plan and do not go through here.
pub fn should_replan(prev: &EnvironmentState, curr: &EnvironmentState, t: &ReplanThresholds) -> bool {
    (curr.snr_db - prev.snr_db).abs() >= t.snr_db
        || (curr.pa_temperature_c - prev.pa_temperature_c).abs() >= t.temperature_c
        || curr.mobility != prev.mobility
}

pub fn outcomes_text(outcomes: &[StepOutcome], before: &Metrics, after: &Metrics) -> String {
    let mut out = String::new();
    for o in outcomes {
        let status = serde_json::to_value(o.status).expect("status").as_str().unwrap_or_default().to_owned();
        let _ = writeln!(
            out,
            "{}. {} {}: {}",
            o.index,
            o.api_id.as_deref().unwrap_or("-"),
            status,
            o.detail
        );
    }
    let _ = write!(
        out,
        "throughput_mbps {} -> {}; penalty_db {} -> {}",
        fmt_sig(before.throughput_mbps, 6),
        fmt_sig(after.throughput_mbps, 6),
        fmt_sig(before.distortion_penalty_db, 6),
        fmt_sig(after.distortion_penalty_db, 6)
    );
    out
}

/// Assembles the structured report; a backend, when given, adds a prose
/// summary whose failure is recorded instead of raised.
pub fn report(
    backend: Option<&dyn LlmBackend>,
    task_id: &str,
    plan_length: usize,
    outcomes: Vec<StepOutcome>,
    metrics_before: Metrics,
    metrics_after: Metrics,
) -> ExecutionReport {
    let verdict = Verdict::from_outcomes(&outcomes);
    let mut report = ExecutionReport {
        task_id: task_id.to_owned(),
        trigger: "new_task".into(),
        at: 0.0,
        plan_length,
        step_outcomes: outcomes,
        metrics_before,
        metrics_after,
        verdict,
        failure: None,
        summary: None,
        summary_error: None,
    };
    if let Some(backend) = backend {
        let request = PromptRequest::new(REPORTER_PROMPT.trim_end(), "SUMMARY:").with_segment(
            "OUTCOMES",
            outcomes_text(&report.step_outcomes, &report.metrics_before, &report.metrics_after),
        );
        match backend.complete(&request) {
            Ok(c) => report.summary = Some(c.text),
            Err(e) => report.summary_error = Some(e.to_string()),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{ScriptedBackend, ScriptedRule};
    use crate::sim::Mobility;

    fn sample(t: f64, snr: f64, temp: f64) -> EnvSample {
        EnvSample { timestamp: t, snr_db: snr, pa_temperature_c: temp, ue_count: 2, mobility: Mobility::Pedestrian }
    }

    fn state(snr: f64, temp: f64, mobility: Mobility) -> EnvironmentState {
        EnvironmentState { snr_db: snr, pa_temperature_c: temp, ue_count: 1, mobility, timestamp: 0.0 }
    }

    fn task(desc: &str) -> UeTask {
        UeTask { id: "t1".into(), description: desc.into(), arrival_time: 0.0 }
    }

    #[test]
    fn observe_aggregates() {
        assert_eq!(observe(&[]), Err(AgentError::EmptySamples));
        let one = observe(&[sample(1.0, 12.0, 50.0)]).unwrap();
        assert_eq!((one.snr_db, one.pa_temperature_c, one.timestamp), (12.0, 50.0, 1.0));
        let two = observe(&[sample(1.0, 10.0, 40.0), sample(2.0, 20.0, 85.0), sample(3.0, 15.0, 60.0)]).unwrap();
        assert_eq!(two.snr_db, 15.0);
        assert_eq!(two.pa_temperature_c, 85.0);
        assert_eq!(two.timestamp, 3.0);
        assert_eq!(observe(&[sample(2.0, 1.0, 1.0), sample(1.0, 1.0, 1.0)]), Err(AgentError::UnorderedSamples));
    }

    #[test]
    fn replan_thresholds() {
        let t = ReplanThresholds::default();
        let base = state(20.0, 50.0, Mobility::Static);
        assert!(!should_replan(&base, &base, &t));
        assert!(should_replan(&base, &state(25.0, 50.0, Mobility::Static), &t));
        assert!(!should_replan(&base, &state(20.0, 59.9, Mobility::Static), &t));
        assert!(should_replan(&base, &state(20.0, 60.0, Mobility::Static), &t));
        assert!(should_replan(&base, &state(20.0, 50.0, Mobility::Vehicular), &t));
    }

    #[test]
    fn task_awareness_parses_and_reprompts() {
        let good = ScriptedBackend::new(vec![ScriptedRule::contains(
            "AR video session",
            "THROUGHPUT_MBPS=50\nLATENCY_MS=20\nRELIABILITY=0.999\nMODALITY=data",
        )]);
        let r = task_awareness(&good, &task("start an AR video session")).unwrap();
        assert_eq!((r.throughput_target, r.latency_budget, r.reliability_target), (50.0, 20.0, 0.999));
        assert_eq!(r, task_awareness(&good, &task("start an AR video session")).unwrap());

        // The fixture fixes itself once it sees the format hint.
        let healing = ScriptedBackend::new(vec![
            ScriptedRule::contains("[FORMAT ERROR]", "THROUGHPUT_MBPS=5\nLATENCY_MS=2\nRELIABILITY=0.9\nMODALITY=joint"),
            ScriptedRule::contains("[TASK]", "THROUGHPUT_MBPS=5\nRELIABILITY=0.9\nMODALITY=joint"),
        ]);
        assert_eq!(task_awareness(&healing, &task("x")).unwrap().modality, Modality::Joint);

        let broken = ScriptedBackend::new(vec![ScriptedRule::contains(
            "[TASK]",
            "THROUGHPUT_MBPS=50\nRELIABILITY=0.999\nMODALITY=data",
        )]);
        assert_eq!(
            task_awareness(&broken, &task("x")),
            Err(AgentError::Parse { role: "task_awareness", error: GrammarError::MissingKey("LATENCY_MS") })
        );

        let empty = ScriptedBackend::new(vec![]);
        assert!(matches!(
            task_awareness(&empty, &task("x")),
            Err(AgentError::Backend { source: BackendError::NoRuleMatched { .. }, .. })
        ));
    }

    #[test]
    fn planning() {
        let req = parse_requirements("THROUGHPUT_MBPS=1\nLATENCY_MS=1\nRELIABILITY=1\nMODALITY=data").unwrap();
        let st = state(20.0, 50.0, Mobility::Static);
        let b = ScriptedBackend::new(vec![ScriptedRule::contains("PLAN:", "RATIONALE: why\n1. a\n2. b")]);
        let p = plan(&b, "t", &req, &st).unwrap();
        assert_eq!(p.rationale, "why");
        assert_eq!(p.steps.iter().map(|s| s.index).collect::<Vec<_>>(), vec![1, 2]);
        let none = ScriptedBackend::new(vec![ScriptedRule::contains("PLAN:", "no steps required")]);
        assert_eq!(plan(&none, "t", &req, &st), Err(AgentError::EmptyPlan));
        let gap = ScriptedBackend::new(vec![ScriptedRule::contains("PLAN:", "1. a\n2. b\n4. c")]);
        assert!(matches!(plan(&gap, "t", &req, &st), Err(AgentError::Parse { .. })));
    }

    #[test]
    fn report_verdicts() {
        let m = Metrics { throughput_mbps: 1.0, effective_snr_db: 0.0, distortion_penalty_db: 0.0 };
        let o = |status| StepOutcome { index: 1, api_id: None, status, detail: String::new() };
        assert_eq!(report(None, "t", 1, vec![o(StepStatus::Ok)], m, m).verdict, Verdict::Success);
        assert_eq!(report(None, "t", 2, vec![o(StepStatus::Ok), o(StepStatus::ExecError)], m, m).verdict, Verdict::Partial);
        assert_eq!(report(None, "t", 1, vec![o(StepStatus::ExecError)], m, m).verdict, Verdict::Failed);
        let silent = ScriptedBackend::new(vec![]);
        let r = report(Some(&silent), "t", 1, vec![o(StepStatus::Ok)], m, m);
        assert!(r.summary.is_none() && r.summary_error.is_some());
    }
}
