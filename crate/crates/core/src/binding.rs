//! Parameter binding for API calls.
//!
//! Values come from three places: the task (through the transmission
//! requirements or task variables), outputs of APIs already executed in the
//! plan, and declared defaults. Each parameter is resolved by the first rule
//! that succeeds:
//!
//! 1. a context variable with exactly the parameter's name and kind;
//! 2. the invoker agent naming a variable (closed vocabulary, one prompt per parameter);
//! 3. the best GCS match between parameter and variable descriptions, if `>= bind_tau`;
//! 4. a requirement field aliased to the parameter name;
//! 5. the declared default.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::agents::TransmissionRequirements;
use crate::embedding::{gcs, Embedder, EmbeddingError};
use crate::llm::{LlmBackend, PromptRequest};
use crate::registry::{ApiDescriptor, ParameterSpec};
use crate::value::{TypedValue, ValueKind};

pub const DEFAULT_BIND_TAU: f64 = 0.5;
pub const INVOKER_PROMPT: &str = include_str!("../prompts/invoker.txt");

const CONFIDENCE_SEMANTIC: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Task,
    ApiOutput,
    Default,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Variable {
    pub value: TypedValue,
    pub description: String,
    pub provenance: Provenance,
    pub producer: Option<String>,
    pub step_index: usize,
}

/// A variable replaced by a later output of the same name.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowEvent {
    pub name: String,
    pub previous_producer: Option<String>,
    pub previous_step: usize,
    pub producer: String,
    pub step_index: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExecutionContext {
    variables: BTreeMap<String, Variable>,
    shadowed: Vec<ShadowEvent>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BindingError {
    #[error("API `{api_id}`: required parameter `{param}` unresolved (candidates considered: {})", candidates.join(", "))]
    UnresolvedRequiredParameter { api_id: String, param: String, candidates: Vec<String> },
    #[error("`{name}`: expected {expected} value, found {found}")]
    KindMismatch { name: String, expected: ValueKind, found: ValueKind },
    #[error("API `{api_id}` did not produce declared output `{name}`")]
    MissingOutput { api_id: String, name: String },
    #[error("API `{api_id}` produced undeclared output `{name}`")]
    UnexpectedOutput { api_id: String, name: String },
    #[error("step {step_index} recorded after step {last}")]
    StepOrder { step_index: usize, last: usize },
    #[error("variable `{0}` referenced by a binding is not in the context")]
    UnknownVariable(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

impl ExecutionContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Variable> {
        self.variables.get(name)
    }

    pub fn variables(&self) -> impl Iterator<Item = (&str, &Variable)> {
        self.variables.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn shadow_log(&self) -> &[ShadowEvent] {
        &self.shadowed
    }

    fn last_step(&self) -> Option<usize> {
        self.variables
            .values()
            .filter(|v| v.provenance == Provenance::ApiOutput)
            .map(|v| v.step_index)
            .max()
    }

    /// Adds a value taken from the task description (step 0).
    pub fn insert_task_variable(&mut self, name: impl Into<String>, description: impl Into<String>, value: TypedValue) {
        self.variables.insert(
            name.into(),
            Variable { value, description: description.into(), provenance: Provenance::Task, producer: None, step_index: 0 },
        );
    }

    /// Stores each output under its declared name. Outputs must match the
    /// descriptor exactly; an existing name is shadowed and the event logged.
    pub fn record_outputs(
        &mut self,
        descriptor: &ApiDescriptor,
        outputs: &BTreeMap<String, TypedValue>,
        step_index: usize,
    ) -> Result<(), BindingError> {
        for spec in &descriptor.outputs {
            let value = outputs.get(&spec.name).ok_or_else(|| BindingError::MissingOutput {
                api_id: descriptor.id.clone(),
                name: spec.name.clone(),
            })?;
            if value.kind() != spec.value_kind {
                return Err(BindingError::KindMismatch {
                    name: spec.name.clone(),
                    expected: spec.value_kind,
                    found: value.kind(),
                });
            }
        }
        if let Some(extra) = outputs.keys().find(|k| descriptor.output(k).is_none()) {
            return Err(BindingError::UnexpectedOutput { api_id: descriptor.id.clone(), name: extra.clone() });
        }
        if descriptor.outputs.is_empty() {
            return Ok(());
        }
        if let Some(last) = self.last_step() {
            if step_index <= last {
                return Err(BindingError::StepOrder { step_index, last });
            }
        }
        for spec in &descriptor.outputs {
            let var = Variable {
                value: outputs[&spec.name].clone(),
                description: spec.description.clone(),
                provenance: Provenance::ApiOutput,
                producer: Some(descriptor.id.clone()),
                step_index,
            };
            if let Some(prev) = self.variables.insert(spec.name.clone(), var) {
                self.shadowed.push(ShadowEvent {
                    name: spec.name.clone(),
                    previous_producer: prev.producer,
                    previous_step: prev.step_index,
                    producer: descriptor.id.clone(),
                    step_index,
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BindMethod {
    ExactName,
    Semantic,
    Fallback,
    Requirement,
    Default,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    Variable(String),
    Requirement(String),
    Default(TypedValue),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assignment {
    pub param_name: String,
    pub source: Provenance,
    pub binding: Binding,
    pub confidence: f64,
    pub method: BindMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BindingResolution {
    pub api_id: String,
    pub assignments: Vec<Assignment>,
}

impl BindingResolution {
    pub fn get(&self, param: &str) -> Option<&Assignment> {
        self.assignments.iter().find(|a| a.param_name == param)
    }
}

/// Requirement fields and the parameter names that alias them.
pub const REQUIREMENT_ALIASES: &[(&str, &[&str])] = &[
    ("THROUGHPUT_MBPS", &["throughput_mbps", "throughput_target", "target_throughput_mbps"]),
    ("LATENCY_MS", &["latency_ms", "latency_budget", "latency_budget_ms"]),
    ("RELIABILITY", &["reliability", "reliability_target"]),
    ("MODALITY", &["modality"]),
    ("NOTES", &["notes", "task_notes"]),
];

/// The requirement field a parameter name aliases, with its value.
pub fn requirement_field(param: &str, req: &TransmissionRequirements) -> Option<(&'static str, TypedValue)> {
    let lower = param.to_ascii_lowercase();
    let (key, _) = REQUIREMENT_ALIASES
        .iter()
        .find(|(key, names)| key.eq_ignore_ascii_case(&lower) || names.contains(&lower.as_str()))?;
    Some((key, requirement_value(key, req)?))
}

fn requirement_value(key: &str, req: &TransmissionRequirements) -> Option<TypedValue> {
    Some(match key {
        "THROUGHPUT_MBPS" => TypedValue::scalar(req.throughput_target),
        "LATENCY_MS" => TypedValue::scalar(req.latency_budget),
        "RELIABILITY" => TypedValue::scalar(req.reliability_target),
        "MODALITY" => TypedValue::enumeration(req.modality.as_str()),
        "NOTES" => TypedValue::text(req.notes.clone()),
        _ => return None,
    })
}

/// Knobs for [`resolve_parameters`].
pub struct Binder<'a> {
    pub backend: Option<&'a dyn LlmBackend>,
    pub embedder: &'a dyn Embedder,
    pub bind_tau: f64,
}

impl<'a> Binder<'a> {
    pub fn new(backend: Option<&'a dyn LlmBackend>, embedder: &'a dyn Embedder) -> Self {
        Binder { backend, embedder, bind_tau: DEFAULT_BIND_TAU }
    }

    pub fn with_bind_tau(mut self, bind_tau: f64) -> Self {
        self.bind_tau = bind_tau;
        self
    }

    pub fn resolve(
        &self,
        descriptor: &ApiDescriptor,
        context: &ExecutionContext,
        requirements: Option<&TransmissionRequirements>,
    ) -> Result<BindingResolution, BindingError> {
        resolve_parameters(self.backend, descriptor, context, requirements, self.bind_tau, self.embedder)
    }
}

/// Resolves every parameter of `descriptor`. Optional parameters nothing
/// matches are left out; an unresolved required parameter is an error.
pub fn resolve_parameters(
    backend: Option<&dyn LlmBackend>,
    descriptor: &ApiDescriptor,
    context: &ExecutionContext,
    requirements: Option<&TransmissionRequirements>,
    bind_tau: f64,
    embedder: &dyn Embedder,
) -> Result<BindingResolution, BindingError> {
    let mut assignments = Vec::new();
    for param in &descriptor.parameters {
        let mut candidates = Vec::new();
        if let Some(a) = resolve_one(backend, descriptor, param, context, requirements, bind_tau, embedder, &mut candidates)? {
            debug_assert!(binding_kind(&a.binding, context, requirements) == Some(param.value_kind));
            assignments.push(a);
        } else if param.required {
            return Err(BindingError::UnresolvedRequiredParameter {
                api_id: descriptor.id.clone(),
                param: param.name.clone(),
                candidates,
            });
        }
    }
    Ok(BindingResolution { api_id: descriptor.id.clone(), assignments })
}

#[allow(clippy::too_many_arguments)]
fn resolve_one(
    backend: Option<&dyn LlmBackend>,
    descriptor: &ApiDescriptor,
    param: &ParameterSpec,
    context: &ExecutionContext,
    requirements: Option<&TransmissionRequirements>,
    bind_tau: f64,
    embedder: &dyn Embedder,
    candidates: &mut Vec<String>,
) -> Result<Option<Assignment>, BindingError> {
    let variable = |name: &str, method, confidence| {
        let var = &context.variables[name];
        Assignment {
            param_name: param.name.clone(),
            source: var.provenance,
            binding: Binding::Variable(name.to_owned()),
            confidence,
            method,
        }
    };

    if let Some(v) = context.get(&param.name) {
        if v.value.kind() == param.value_kind {
            return Ok(Some(variable(&param.name, BindMethod::ExactName, 1.0)));
        }
    }

    let compatible: Vec<(&str, &Variable)> =
        context.variables().filter(|(_, v)| v.value.kind() == param.value_kind).collect();
    candidates.extend(compatible.iter().map(|(n, _)| n.to_string()));

    if let (Some(backend), false) = (backend, compatible.is_empty()) {
        let request = invoker_request(descriptor, param, &compatible);
        if let Ok(completion) = backend.complete(&request) {
            if let Some(name) = parse_invoker_answer(&completion.text, &compatible) {
                return Ok(Some(variable(name, BindMethod::Semantic, CONFIDENCE_SEMANTIC)));
            }
        }
    }

    if !compatible.is_empty() {
        let query = embedder.embed(&format!("{} {}", param.name, param.description))?;
        let mut best: Option<(&str, f64)> = None;
        for (name, var) in &compatible {
            let v = embedder.embed(&format!("{} {}", name, var.description))?;
            let score = gcs(&query, &v)?;
            // Ties keep the first name in ascending order.
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((name, score));
            }
        }
        if let Some((name, score)) = best {
            if score >= bind_tau {
                return Ok(Some(variable(name, BindMethod::Fallback, score.clamp(0.0, 1.0))));
            }
            candidates.push(format!("best GCS {name}={score:.3} < {bind_tau}"));
        }
    }

    if let Some(req) = requirements {
        if let Some((key, value)) = requirement_field(&param.name, req) {
            if value.kind() == param.value_kind {
                return Ok(Some(Assignment {
                    param_name: param.name.clone(),
                    source: Provenance::Task,
                    binding: Binding::Requirement(key.to_owned()),
                    confidence: 1.0,
                    method: BindMethod::Requirement,
                }));
            }
            candidates.push(format!("requirement {key} (kind mismatch)"));
        }
    }

    if let Some(default) = &param.default {
        return Ok(Some(Assignment {
            param_name: param.name.clone(),
            source: Provenance::Default,
            binding: Binding::Default(default.clone()),
            confidence: 1.0,
            method: BindMethod::Default,
        }));
    }
    Ok(None)
}

fn binding_kind(b: &Binding, ctx: &ExecutionContext, req: Option<&TransmissionRequirements>) -> Option<ValueKind> {
    match b {
        Binding::Variable(n) => ctx.get(n).map(|v| v.value.kind()),
        Binding::Requirement(k) => req.and_then(|r| requirement_value(k, r)).map(|v| v.kind()),
        Binding::Default(v) => Some(v.kind()),
    }
}

/// Invoker prompt for one parameter: the API block as context, then the
/// variable listing and the parameter question.
pub fn invoker_request(descriptor: &ApiDescriptor, param: &ParameterSpec, variables: &[(&str, &Variable)]) -> PromptRequest {
    let mut user = String::from("AVAILABLE VARIABLES:\n");
    for (name, var) in variables {
        let _ = writeln!(user, "{name} - {} ({})", var.description, var.value.kind());
    }
    let _ = write!(
        user,
        "\nPARAMETER: {} - {} ({})\nANSWER WITH: <variable name> or NONE",
        param.name, param.description, param.value_kind
    );
    PromptRequest::new(INVOKER_PROMPT.trim_end(), user).with_segment("API", descriptor.render_instruction())
}

/// Accepts a listed variable name (surrounding quotes, backticks and a
/// trailing period tolerated); anything else counts as NONE.
fn parse_invoker_answer<'v>(text: &str, variables: &[(&'v str, &Variable)]) -> Option<&'v str> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty())?;
    let answer = first.trim_matches(|c: char| c == '`' || c == '"' || c == '\'' || c == '.');
    if answer.eq_ignore_ascii_case("none") {
        return None;
    }
    variables.iter().map(|(n, _)| *n).find(|n| *n == answer)
}

/// Looks up the concrete value of every assignment.
pub fn resolve_values(
    resolution: &BindingResolution,
    context: &ExecutionContext,
    requirements: Option<&TransmissionRequirements>,
) -> Result<BTreeMap<String, TypedValue>, BindingError> {
    resolution
        .assignments
        .iter()
        .map(|a| {
            let value = match &a.binding {
                Binding::Variable(name) => context
                    .get(name)
                    .map(|v| v.value.clone())
                    .ok_or_else(|| BindingError::UnknownVariable(name.clone()))?,
                Binding::Requirement(key) => requirements
                    .and_then(|r| requirement_value(key, r))
                    .ok_or_else(|| BindingError::UnknownVariable(key.clone()))?,
                Binding::Default(v) => v.clone(),
            };
            Ok((a.param_name.clone(), value))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::Modality;
    use crate::embedding::HashingEmbedder;
    use crate::llm::{ScriptedBackend, ScriptedRule};
    use crate::registry::{Category, Registry};

    fn api(params: Vec<ParameterSpec>) -> ApiDescriptor {
        ApiDescriptor {
            id: "probe".into(),
            name: "Probe".into(),
            category: Category::Perception,
            instruction: "Probe something.".into(),
            parameters: params,
            outputs: vec![],
        }
    }

    fn param(name: &str, kind: ValueKind, required: bool, default: Option<TypedValue>) -> ParameterSpec {
        ParameterSpec {
            name: name.into(),
            description: format!("the {name}"),
            value_kind: kind,
            required,
            default,
            units: None,
        }
    }

    fn reqs() -> TransmissionRequirements {
        TransmissionRequirements {
            throughput_target: 50.0,
            latency_budget: 20.0,
            reliability_target: 0.999,
            modality: Modality::Data,
            notes: "n".into(),
        }
    }

    #[test]
    fn exact_name_beats_backend() {
        let reg = Registry::shipped();
        let producer = reg.get("estimate_noise_variance").unwrap();
        let mut ctx = ExecutionContext::new();
        let mut outputs = BTreeMap::new();
        outputs.insert("noise_variance".to_string(), TypedValue::scalar(0.1));
        ctx.record_outputs(producer, &outputs, 1).unwrap();

        // A backend that would fail every request: never consulted.
        let backend = ScriptedBackend::new(vec![]);
        let emb = HashingEmbedder::default();
        let d = api(vec![param("noise_variance", ValueKind::Scalar, true, None)]);
        let r = resolve_parameters(Some(&backend), &d, &ctx, None, 0.5, &emb).unwrap();
        let a = &r.assignments[0];
        assert_eq!(a.method, BindMethod::ExactName);
        assert_eq!(a.confidence, 1.0);
        assert_eq!(a.source, Provenance::ApiOutput);
    }

    #[test]
    fn unresolved_required() {
        let emb = HashingEmbedder::default();
        let d = api(vec![param("gain", ValueKind::Scalar, true, None)]);
        let err = resolve_parameters(None, &d, &ExecutionContext::new(), None, 0.5, &emb).unwrap_err();
        assert!(matches!(err, BindingError::UnresolvedRequiredParameter { ref param, .. } if param == "gain"));
    }

    #[test]
    fn requirement_alias_then_default() {
        let emb = HashingEmbedder::default();
        let d = api(
            vec![
                param("reliability", ValueKind::Scalar, true, None),
                param("gain", ValueKind::Scalar, false, Some(TypedValue::scalar(0.5))),
                param("unused", ValueKind::Text, false, None),
            ],
        );
        let r = resolve_parameters(None, &d, &ExecutionContext::new(), Some(&reqs()), 0.5, &emb).unwrap();
        assert_eq!(r.assignments.len(), 2);
        assert_eq!(r.assignments[0].binding, Binding::Requirement("RELIABILITY".into()));
        assert_eq!(r.assignments[1].source, Provenance::Default);
        let values = resolve_values(&r, &ExecutionContext::new(), Some(&reqs())).unwrap();
        assert_eq!(values["reliability"], TypedValue::scalar(0.999));
        assert_eq!(values["gain"], TypedValue::scalar(0.5));
    }

    #[test]
    fn out_of_vocabulary_answer_is_none() {
        let reg = Registry::shipped();
        let mut ctx = ExecutionContext::new();
        let mut outputs = BTreeMap::new();
        outputs.insert("CSI_matrix".to_string(), TypedValue::matrix(1, 1, vec![1.0]).unwrap());
        ctx.record_outputs(reg.get("estimate_csi").unwrap(), &outputs, 1).unwrap();
        let backend = ScriptedBackend::new(vec![ScriptedRule::contains("PARAMETER:", "channel_guess")]);
        let emb = HashingEmbedder::default();
        let d = reg.get("enable_deeprx").unwrap();
        let r = resolve_parameters(Some(&backend), d, &ctx, None, 0.5, &emb).unwrap();
        assert_eq!(r.assignments[0].method, BindMethod::Fallback);
        assert!(r.assignments[0].confidence >= 0.5);
    }

    #[test]
    fn record_outputs_errors() {
        let reg = Registry::shipped();
        let d = reg.get("estimate_csi").unwrap();
        let mut ctx = ExecutionContext::new();
        assert!(matches!(ctx.record_outputs(d, &BTreeMap::new(), 1), Err(BindingError::MissingOutput { .. })));
        let mut wrong = BTreeMap::new();
        wrong.insert("CSI_matrix".to_string(), TypedValue::scalar(1.0));
        assert!(matches!(ctx.record_outputs(d, &wrong, 1), Err(BindingError::KindMismatch { .. })));
        let mut extra = BTreeMap::new();
        extra.insert("CSI_matrix".to_string(), TypedValue::matrix(1, 1, vec![1.0]).unwrap());
        extra.insert("bogus".to_string(), TypedValue::scalar(1.0));
        assert!(matches!(ctx.record_outputs(d, &extra, 1), Err(BindingError::UnexpectedOutput { .. })));
        extra.remove("bogus");
        ctx.record_outputs(d, &extra, 2).unwrap();
        assert!(matches!(ctx.record_outputs(d, &extra, 2), Err(BindingError::StepOrder { .. })));
    }

    #[test]
    fn prompt_layout() {
        let reg = Registry::shipped();
        let d = reg.get("enable_deeprx").unwrap();
        let mut ctx = ExecutionContext::new();
        ctx.insert_task_variable("h", "a channel", TypedValue::matrix(1, 1, vec![1.0]).unwrap());
        let vars: Vec<_> = ctx.variables().collect();
        let text = crate::llm::render_request(&invoker_request(d, &d.parameters[0], &vars));
        let api = text.find("[API]").unwrap();
        let listing = text.find("AVAILABLE VARIABLES:\nh - a channel (matrix)\n").unwrap();
        let question = text.find("PARAMETER: estimated_channel").unwrap();
        assert!(api < listing && listing < question);
        assert!(text.ends_with("ANSWER WITH: <variable name> or NONE"));
    }
}
