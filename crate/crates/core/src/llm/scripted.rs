use std::path::Path;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{render_request, BackendError, Completion, LlmBackend, PromptRequest, DEFAULT_CONTEXT_LIMIT};
use crate::util::digest_hex;

#[derive(Clone, Debug)]
pub enum Matcher {
    /// Literal substring of the rendered request.
    Contains(String),
    /// Regular expression over the rendered request.
    Pattern(Regex),
}

impl Matcher {
    pub fn is_match(&self, rendered: &str) -> bool {
        match self {
            Matcher::Contains(s) => rendered.contains(s.as_str()),
            Matcher::Pattern(re) => re.is_match(rendered),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScriptedRule {
    pub matcher: Matcher,
    pub response: String,
}

impl ScriptedRule {
    pub fn contains(needle: impl Into<String>, response: impl Into<String>) -> Self {
        ScriptedRule { matcher: Matcher::Contains(needle.into()), response: response.into() }
    }

    pub fn pattern(pattern: &str, response: impl Into<String>) -> Result<Self, BackendError> {
        let re = Regex::new(pattern).map_err(|e| BackendError::Config(format!("bad rule pattern: {e}")))?;
        Ok(ScriptedRule { matcher: Matcher::Pattern(re), response: response.into() })
    }
}

/// One rule as written in a rules file: exactly one of `contains` / `pattern`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pattern: Option<String>,
    response: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RulesFile {
    rules: Vec<RuleRecord>,
}

/// Answers with the response of the first rule matching the rendered request.
/// A request matching no rule is an error, never an improvised answer.
#[derive(Clone, Debug)]
pub struct ScriptedBackend {
    id: String,
    rules: Vec<ScriptedRule>,
    context_limit: usize,
}

impl ScriptedBackend {
    pub fn new(rules: Vec<ScriptedRule>) -> Self {
        ScriptedBackend { id: "scripted".into(), rules, context_limit: DEFAULT_CONTEXT_LIMIT }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_context_limit(mut self, limit: usize) -> Self {
        self.context_limit = limit;
        self
    }

    pub fn rules(&self) -> &[ScriptedRule] {
        &self.rules
    }

    pub fn push(&mut self, rule: ScriptedRule) {
        self.rules.push(rule);
    }

    pub fn from_json_str(text: &str) -> Result<Self, BackendError> {
        let file: RulesFile =
            serde_json::from_str(text).map_err(|e| BackendError::Config(format!("rules file: {e}")))?;
        let rules = file
            .rules
            .into_iter()
            .enumerate()
            .map(|(i, r)| match (r.contains, r.pattern) {
                (Some(c), None) => Ok(ScriptedRule::contains(c, r.response)),
                (None, Some(p)) => ScriptedRule::pattern(&p, r.response),
                _ => Err(BackendError::Config(format!(
                    "rule {i}: exactly one of `contains` or `pattern` is required"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ScriptedBackend::new(rules))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Serializes rules back to the rules-file format.
    pub fn to_json(&self) -> String {
        let rules = self
            .rules
            .iter()
            .map(|r| match &r.matcher {
                Matcher::Contains(c) => RuleRecord { contains: Some(c.clone()), pattern: None, response: r.response.clone() },
                Matcher::Pattern(p) => RuleRecord {
                    contains: None,
                    pattern: Some(p.as_str().to_owned()),
                    response: r.response.clone(),
                },
            })
            .collect();
        serde_json::to_string_pretty(&RulesFile { rules }).expect("rules serialize")
    }
}

impl LlmBackend for ScriptedBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &PromptRequest) -> Result<Completion, BackendError> {
        request.validate()?;
        request.check_context(self.context_limit)?;
        let rendered = render_request(request);
        let rule = self
            .rules
            .iter()
            .find(|r| r.matcher.is_match(&rendered))
            .ok_or_else(|| BackendError::NoRuleMatched { digest: digest_hex(&rendered) })?;
        Ok(Completion {
            text: rule.response.clone(),
            backend_id: self.id.clone(),
            latency: Duration::ZERO,
            refused: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLAN: &str = "1. estimate channel\n2. assess distortion\n3. enable receiver\n4. verify throughput";

    #[test]
    fn first_matching_rule_wins() {
        let backend = ScriptedBackend::new(vec![
            ScriptedRule::contains("decompose: video call", PLAN),
            ScriptedRule::contains("decompose", "other"),
        ]);
        let req = PromptRequest::new("planner", "decompose: video call");
        let a = backend.complete(&req).unwrap();
        assert_eq!(a.text, PLAN);
        assert_eq!(backend.complete(&req).unwrap(), a);
    }

    #[test]
    fn unmatched_request_names_digest() {
        let backend = ScriptedBackend::new(vec![ScriptedRule::contains("x", "y")]);
        let req = PromptRequest::new("planner", "something else");
        let expected = digest_hex(&render_request(&req));
        assert_eq!(backend.complete(&req), Err(BackendError::NoRuleMatched { digest: expected }));
    }

    #[test]
    fn rules_file_round_trip() {
        let json = r#"{"rules":[{"contains":"a","response":"1"},{"pattern":"^R\\b","response":"2"}]}"#;
        let backend = ScriptedBackend::from_json_str(json).unwrap();
        assert_eq!(backend.complete(&PromptRequest::new("R", "zzz")).unwrap().text, "2");
        let again = ScriptedBackend::from_json_str(&backend.to_json()).unwrap();
        assert_eq!(again.rules().len(), 2);
    }

    #[test]
    fn rules_file_errors() {
        assert!(ScriptedBackend::from_json_str(r#"{"rules":[{"response":"1"}]}"#).is_err());
        assert!(ScriptedBackend::from_json_str(r#"{"rules":[{"pattern":"(","response":"1"}]}"#).is_err());
    }

    #[test]
    fn overflow_checked_before_matching() {
        let backend = ScriptedBackend::new(vec![ScriptedRule::contains("", "ok")]).with_context_limit(2);
        assert!(matches!(
            backend.complete(&PromptRequest::new("role", "long question")),
            Err(BackendError::ContextOverflow { .. })
        ));
    }
}
