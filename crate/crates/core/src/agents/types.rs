use serde::{Deserialize, Serialize};

use crate::retrieval::RetrievalResult;
use crate::sim::{EnvSample, Metrics, Mobility};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UeTask {
    pub id: String,
    pub description: String,
    pub arrival_time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Data,
    Sensing,
    Joint,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Data => "data",
            Modality::Sensing => "sensing",
            Modality::Joint => "joint",
        }
    }

    pub fn parse(s: &str) -> Option<Modality> {
        match s.trim().to_ascii_lowercase().as_str() {
            "data" => Some(Modality::Data),
            "sensing" => Some(Modality::Sensing),
            "joint" => Some(Modality::Joint),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmissionRequirements {
    pub throughput_target: f64,
    pub latency_budget: f64,
    pub reliability_target: f64,
    pub modality: Modality,
    pub notes: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentState {
    pub snr_db: f64,
    pub pa_temperature_c: f64,
    pub ue_count: u32,
    pub mobility: Mobility,
    pub timestamp: f64,
}

impl EnvironmentState {
    /// Single-line summary used in agent prompts.
    pub fn summary(&self) -> String {
        format!(
            "t={}s snr_db={} pa_temperature_c={} ue_count={} mobility={}",
            crate::util::fmt_sig(self.timestamp, 6),
            crate::util::fmt_sig(self.snr_db, 4),
            crate::util::fmt_sig(self.pa_temperature_c, 4),
            self.ue_count,
            self.mobility.as_str()
        )
    }
}

impl From<&EnvSample> for EnvironmentState {
    fn from(s: &EnvSample) -> Self {
        EnvironmentState {
            snr_db: s.snr_db,
            pa_temperature_c: s.pa_temperature_c,
            ue_count: s.ue_count,
            mobility: s.mobility,
            timestamp: s.timestamp,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanStep {
    pub index: usize,
    pub text: String,
    pub resolved_api: Option<String>,
    pub retrieval: Option<RetrievalResult>,
}

impl PlanStep {
    pub fn resolve(&mut self, result: RetrievalResult) {
        self.resolved_api = Some(result.chosen_api.clone());
        self.retrieval = Some(result);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plan {
    pub task_id: String,
    pub rationale: String,
    pub steps: Vec<PlanStep>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Ok,
    BindingFailed,
    NoMatch,
    ExecError,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepOutcome {
    pub index: usize,
    /// Absent when retrieval found no API for the step.
    pub api_id: Option<String>,
    pub status: StepStatus,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Success,
    Partial,
    Failed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Success => "success",
            Verdict::Partial => "partial",
            Verdict::Failed => "failed",
        }
    }

    pub fn from_outcomes(outcomes: &[StepOutcome]) -> Verdict {
        let ok = outcomes.iter().filter(|o| o.status == StepStatus::Ok).count();
        if !outcomes.is_empty() && ok == outcomes.len() {
            Verdict::Success
        } else if ok > 0 {
            Verdict::Partial
        } else {
            Verdict::Failed
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExecutionReport {
    pub task_id: String,
    /// Why the report was produced: `new_task` or `replan`.
    pub trigger: String,
    pub at: f64,
    pub plan_length: usize,
    pub step_outcomes: Vec<StepOutcome>,
    pub metrics_before: Metrics,
    pub metrics_after: Metrics,
    pub verdict: Verdict,
    /// Set when the task never reached execution (requirements or plan failed).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary_error: Option<String>,
}
