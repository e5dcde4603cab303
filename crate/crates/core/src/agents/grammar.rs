//! Parsers for agent completions.
//!
//! Requirements come as `KEY=VALUE` lines:
//!
//! ```text
//! THROUGHPUT_MBPS=50
//! LATENCY_MS=20
//! RELIABILITY=0.999
//! MODALITY=data
//! NOTES=AR session, handset heating up
//! ```
//!
//! Plans come as numbered lines, optionally after a rationale block:
//!
//! ```text
//! RATIONALE: the amplifier runs hot, so distortion must be compensated.
//! 1. estimate the channel
//! 2. enable the neural receiver
//! ```

use thiserror::Error;

use super::types::{Modality, TransmissionRequirements};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrammarError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing required key {0}")]
    MissingKey(&'static str),
    #[error("duplicate key {0}")]
    DuplicateKey(String),
    #[error("{key}: {message}")]
    InvalidValue { key: &'static str, message: String },
    #[error("plan steps are numbered {found:?}, expected 1..={expected}")]
    NonContiguous { found: Vec<usize>, expected: usize },
    #[error("completion contains no plan steps")]
    EmptyPlan,
}

pub const REQUIREMENT_KEYS: [&str; 5] = ["THROUGHPUT_MBPS", "LATENCY_MS", "RELIABILITY", "MODALITY", "NOTES"];

pub fn parse_requirements(text: &str) -> Result<TransmissionRequirements, GrammarError> {
    let mut values: [Option<String>; 5] = Default::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| GrammarError::Line {
            line: i + 1,
            message: format!("expected KEY=VALUE, got `{line}`"),
        })?;
        let key = key.trim();
        let slot = REQUIREMENT_KEYS.iter().position(|k| *k == key).ok_or_else(|| GrammarError::Line {
            line: i + 1,
            message: format!("unknown key `{key}`"),
        })?;
        if values[slot].is_some() {
            return Err(GrammarError::DuplicateKey(key.to_owned()));
        }
        values[slot] = Some(value.trim().to_owned());
    }

    let number = |slot: usize| -> Result<f64, GrammarError> {
        let key = REQUIREMENT_KEYS[slot];
        let raw = values[slot].as_deref().ok_or(GrammarError::MissingKey(key))?;
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| GrammarError::InvalidValue { key, message: format!("`{raw}` is not a number") })
    };
    let throughput_target = number(0)?;
    let latency_budget = number(1)?;
    let reliability_target = number(2)?;
    let modality_raw = values[3].as_deref().ok_or(GrammarError::MissingKey("MODALITY"))?;
    let modality = Modality::parse(modality_raw).ok_or_else(|| GrammarError::InvalidValue {
        key: "MODALITY",
        message: format!("`{modality_raw}` is not one of data, sensing, joint"),
    })?;

    if throughput_target <= 0.0 {
        return Err(GrammarError::InvalidValue { key: "THROUGHPUT_MBPS", message: "must be positive".into() });
    }
    if latency_budget <= 0.0 {
        return Err(GrammarError::InvalidValue { key: "LATENCY_MS", message: "must be positive".into() });
    }
    if !(reliability_target > 0.0 && reliability_target <= 1.0) {
        return Err(GrammarError::InvalidValue { key: "RELIABILITY", message: "must be in (0, 1]".into() });
    }
    Ok(TransmissionRequirements {
        throughput_target,
        latency_budget,
        reliability_target,
        modality,
        notes: values[4].take().unwrap_or_default(),
    })
}

/// Serializes requirements back into the grammar (used in planner prompts).
pub fn render_requirements(r: &TransmissionRequirements) -> String {
    format!(
        "THROUGHPUT_MBPS={}\nLATENCY_MS={}\nRELIABILITY={}\nMODALITY={}\nNOTES={}",
        r.throughput_target,
        r.latency_budget,
        r.reliability_target,
        r.modality.as_str(),
        r.notes
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedPlan {
    pub rationale: String,
    pub steps: Vec<String>,
}

fn step_line(line: &str) -> Option<(usize, &str)> {
    let digits = line.find(|c: char| !c.is_ascii_digit())?;
    if digits == 0 {
        return None;
    }
    let rest = line[digits..].strip_prefix('.')?;
    let n = line[..digits].parse().ok()?;
    Some((n, rest.trim()))
}

/// Lines before the first step form the rationale (a leading `RATIONALE:`
/// marker is stripped); after the first step only step lines and blank lines
/// are allowed.
pub fn parse_plan(text: &str) -> Result<ParsedPlan, GrammarError> {
    let mut rationale = Vec::new();
    let mut steps: Vec<(usize, String)> = Vec::new();
    let mut digit_line = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with(|c: char| c.is_ascii_digit()) {
            digit_line = true;
        }
        match step_line(line) {
            Some((n, step)) => {
                if step.is_empty() {
                    return Err(GrammarError::Line { line: i + 1, message: format!("step {n} has no text") });
                }
                steps.push((n, step.to_owned()));
            }
            None if steps.is_empty() => rationale.push(line),
            None if line.is_empty() => {}
            None => {
                return Err(GrammarError::Line { line: i + 1, message: format!("expected `N. <step>`, got `{line}`") })
            }
        }
    }
    if steps.is_empty() {
        if digit_line {
            return Err(GrammarError::Line { line: 0, message: "no line of the form `N. <step>`".into() });
        }
        return Err(GrammarError::EmptyPlan);
    }
    let numbers: Vec<usize> = steps.iter().map(|(n, _)| *n).collect();
    if numbers.iter().enumerate().any(|(i, n)| *n != i + 1) {
        return Err(GrammarError::NonContiguous { expected: numbers.len(), found: numbers });
    }
    let mut rationale = rationale.join("\n").trim().to_owned();
    if let Some(rest) = rationale.strip_prefix("RATIONALE:") {
        rationale = rest.trim().to_owned();
    }
    Ok(ParsedPlan { rationale, steps: steps.into_iter().map(|(_, s)| s).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const AR: &str = "THROUGHPUT_MBPS=50\nLATENCY_MS=20\nRELIABILITY=0.999\nMODALITY=data\nNOTES=AR video";

    #[test]
    fn requirements_round_trip() {
        let r = parse_requirements(AR).unwrap();
        assert_eq!(r.throughput_target, 50.0);
        assert_eq!(r.latency_budget, 20.0);
        assert_eq!(r.reliability_target, 0.999);
        assert_eq!(r.modality, Modality::Data);
        assert_eq!(parse_requirements(&render_requirements(&r)).unwrap(), r);
    }

    #[test]
    fn requirement_errors() {
        assert_eq!(
            parse_requirements("THROUGHPUT_MBPS=50\nRELIABILITY=0.9\nMODALITY=data"),
            Err(GrammarError::MissingKey("LATENCY_MS"))
        );
        assert!(parse_requirements(&format!("{AR}\nJITTER=3")).is_err());
        assert!(parse_requirements(&format!("{AR}\nLATENCY_MS=3")).is_err());
        assert!(parse_requirements(&AR.replace("0.999", "1.5")).is_err());
        assert!(parse_requirements(&AR.replace("data", "video")).is_err());
        assert!(parse_requirements("I think 50 Mbps").is_err());
        let no_notes = parse_requirements("THROUGHPUT_MBPS=1\nLATENCY_MS=1\nRELIABILITY=1\nMODALITY=joint").unwrap();
        assert_eq!(no_notes.notes, "");
    }

    #[test]
    fn plans() {
        let p = parse_plan("RATIONALE: hot amplifier\nneeds care\n1. a\n2. b\n\n3. c").unwrap();
        assert_eq!(p.rationale, "hot amplifier\nneeds care");
        assert_eq!(p.steps, vec!["a", "b", "c"]);
        assert_eq!(parse_plan("no steps required"), Err(GrammarError::EmptyPlan));
        assert!(matches!(parse_plan("1. a\n2. b\n4. c"), Err(GrammarError::NonContiguous { .. })));
        assert!(matches!(parse_plan("1) a"), Err(GrammarError::Line { .. })));
        assert!(matches!(parse_plan("1. a\ntrailing prose"), Err(GrammarError::Line { .. })));
    }
}
