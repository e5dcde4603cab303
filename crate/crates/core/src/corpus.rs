//! Query-to-decomposition corpus generated from the tool library.
//!
//! A template pairs a query skeleton (`{slot}` placeholders filled from
//! shared slot lists) with a sequence of API categories. Record `i` draws
//! from its own random stream `(seed, i)`, so generation can be split across
//! threads without changing the output.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::{Category, Registry};

pub const SHIPPED_TEMPLATES: &str = include_str!("../data/templates.json");
pub const SHIPPED_SYNONYMS: &str = include_str!("../data/synonyms.json");

/// At most this many words of a step are replaced by synonyms.
pub const MAX_SUBSTITUTIONS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    DirectTask,
    Requirement,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub query: String,
    pub steps: Vec<String>,
    pub api_ids: Vec<String>,
    pub style: Style,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Template {
    pub id: String,
    pub style: Style,
    pub query: String,
    pub pattern: Vec<Category>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSet {
    pub slots: BTreeMap<String, Vec<String>>,
    pub templates: Vec<Template>,
}

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("template file: {0}")]
    Parse(String),
    #[error("template set is empty")]
    NoTemplates,
    #[error("template `{template}` uses unknown or empty slot `{slot}`")]
    UnknownSlot { template: String, slot: String },
    #[error("template `{template}` needs {needed} `{category}` APIs, the library has {available}")]
    TemplateUnsatisfiable { template: String, category: String, needed: usize, available: usize },
    #[error("record count must be at least 1")]
    ZeroRecords,
    #[error("synonym table: {0}")]
    Synonyms(String),
    #[error("io: {0}")]
    Io(String),
}

fn placeholders(skeleton: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = skeleton;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}') else { break };
        out.push(&rest[open + 1..open + close]);
        rest = &rest[open + close + 1..];
    }
    out
}

impl TemplateSet {
    pub fn from_json_str(text: &str) -> Result<Self, CorpusError> {
        let set: TemplateSet = serde_json::from_str(text).map_err(|e| CorpusError::Parse(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn shipped() -> Self {
        Self::from_json_str(SHIPPED_TEMPLATES).expect("shipped templates are valid")
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.templates.is_empty() {
            return Err(CorpusError::NoTemplates);
        }
        for t in &self.templates {
            if t.pattern.is_empty() {
                return Err(CorpusError::Parse(format!("template `{}` has an empty pattern", t.id)));
            }
            for slot in placeholders(&t.query) {
                if self.slots.get(slot).map_or(true, Vec::is_empty) {
                    return Err(CorpusError::UnknownSlot { template: t.id.clone(), slot: slot.to_owned() });
                }
            }
        }
        Ok(())
    }

    fn fill(&self, skeleton: &str, rng: &mut ChaCha8Rng) -> String {
        let mut out = String::with_capacity(skeleton.len() + 32);
        let mut rest = skeleton;
        while let Some(open) = rest.find('{') {
            let Some(close) = rest[open..].find('}') else { break };
            out.push_str(&rest[..open]);
            let values = &self.slots[&rest[open + 1..open + close]];
            out.push_str(&values[rng.random_range(0..values.len())]);
            rest = &rest[open + close + 1..];
        }
        out.push_str(rest);
        out
    }
}

/// Seeded synonym substitution over whitespace-separated words.
#[derive(Clone, Debug)]
pub struct Paraphraser {
    synonyms: BTreeMap<String, Vec<String>>,
    max_substitutions: usize,
}

impl Paraphraser {
    pub fn new(synonyms: BTreeMap<String, Vec<String>>, max_substitutions: usize) -> Result<Self, CorpusError> {
        if let Some((w, _)) = synonyms.iter().find(|(_, v)| v.is_empty()) {
            return Err(CorpusError::Synonyms(format!("`{w}` has no synonyms")));
        }
        Ok(Paraphraser { synonyms, max_substitutions })
    }

    pub fn from_json_str(text: &str, max_substitutions: usize) -> Result<Self, CorpusError> {
        let table = serde_json::from_str(text).map_err(|e| CorpusError::Synonyms(e.to_string()))?;
        Self::new(table, max_substitutions)
    }

    pub fn shipped() -> Self {
        Self::from_json_str(SHIPPED_SYNONYMS, MAX_SUBSTITUTIONS).expect("shipped synonyms are valid")
    }

    fn core(word: &str) -> String {
        word.chars().filter(char::is_ascii_alphabetic).collect::<String>().to_ascii_lowercase()
    }

    /// Replaces up to `max_substitutions` words that have synonyms. Returns
    /// the new text and the number of replacements made.
    pub fn paraphrase(&self, text: &str, rng: &mut impl Rng) -> (String, usize) {
        let mut words: Vec<String> = text.split_whitespace().map(str::to_owned).collect();
        let candidates: Vec<usize> =
            (0..words.len()).filter(|&i| self.synonyms.contains_key(&Self::core(&words[i]))).collect();
        let amount = candidates.len().min(self.max_substitutions);
        let picks = sample(rng, candidates.len(), amount).into_vec();
        for p in &picks {
            let i = candidates[*p];
            let core = Self::core(&words[i]);
            let options = &self.synonyms[&core];
            let replacement = &options[rng.random_range(0..options.len())];
            words[i] = words[i].to_ascii_lowercase().replacen(&core, replacement, 1);
        }
        (words.join(" "), amount)
    }
}

fn record_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Generates `n` records. Record `i` uses template `i mod T`, so every
/// template appears once `n >= T`.
pub fn generate_corpus(
    registry: &Registry,
    templates: &TemplateSet,
    paraphraser: &Paraphraser,
    n: usize,
    seed: u64,
) -> Result<Vec<CorpusRecord>, CorpusError> {
    generate_with(registry, templates, paraphraser, n, seed, false)
}

/// As [`generate_corpus`], spread over the rayon pool when `parallel`.
pub fn generate_with(
    registry: &Registry,
    templates: &TemplateSet,
    paraphraser: &Paraphraser,
    n: usize,
    seed: u64,
    parallel: bool,
) -> Result<Vec<CorpusRecord>, CorpusError> {
    if n == 0 {
        return Err(CorpusError::ZeroRecords);
    }
    templates.validate()?;
    let mut pools: BTreeMap<Category, Vec<(&str, &str)>> = BTreeMap::new();
    for d in registry.iter() {
        pools.entry(d.category).or_default().push((d.id.as_str(), d.instruction.as_str()));
    }
    for t in &templates.templates {
        let mut needed: BTreeMap<Category, usize> = BTreeMap::new();
        for c in &t.pattern {
            *needed.entry(*c).or_default() += 1;
        }
        for (c, k) in needed {
            let available = pools.get(&c).map_or(0, Vec::len);
            if available < k {
                return Err(CorpusError::TemplateUnsatisfiable {
                    template: t.id.clone(),
                    category: c.as_str().to_owned(),
                    needed: k,
                    available,
                });
            }
        }
    }

    let make = |i: usize| -> CorpusRecord {
        let mut rng = record_rng(seed, i);
        let t = &templates.templates[i % templates.templates.len()];
        let query = templates.fill(&t.query, &mut rng);
        let mut used: BTreeSet<&str> = BTreeSet::new();
        let mut steps = Vec::with_capacity(t.pattern.len());
        let mut api_ids = Vec::with_capacity(t.pattern.len());
        for c in &t.pattern {
            let pool = &pools[c];
            let (id, instruction) = loop {
                let pick = pool[rng.random_range(0..pool.len())];
                if used.insert(pick.0) {
                    break pick;
                }
            };
            steps.push(paraphraser.paraphrase(instruction, &mut rng).0);
            api_ids.push(id.to_owned());
        }
        CorpusRecord { query, steps, api_ids, style: t.style }
    };
    Ok(if parallel { (0..n).into_par_iter().map(make).collect() } else { (0..n).map(make).collect() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecordCheck {
    pub index: usize,
    pub passed: bool,
    pub reasons: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n_records: usize,
    pub n_passed: usize,
    /// 1.0 for an empty record list.
    pub pass_rate: f64,
    pub records: Vec<RecordCheck>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &RecordCheck> {
        self.records.iter().filter(|r| !r.passed)
    }
}

/// Checks records against the registry without using any generator code.
pub fn validate_corpus(registry: &Registry, records: &[CorpusRecord]) -> ValidationReport {
    let checks: Vec<RecordCheck> = records
        .iter()
        .enumerate()
        .map(|(index, r)| {
            let mut reasons = Vec::new();
            if r.query.trim().is_empty() {
                reasons.push("empty query".to_owned());
            }
            if r.steps.is_empty() {
                reasons.push("no steps".to_owned());
            }
            if r.steps.len() != r.api_ids.len() {
                reasons.push(format!("{} steps but {} api ids", r.steps.len(), r.api_ids.len()));
            }
            for (i, s) in r.steps.iter().enumerate() {
                if s.trim().is_empty() {
                    reasons.push(format!("step {} is empty", i + 1));
                }
            }
            for id in &r.api_ids {
                if !registry.contains(id) {
                    reasons.push(format!("unknown api id `{id}`"));
                }
            }
            RecordCheck { index, passed: reasons.is_empty(), reasons }
        })
        .collect();
    let n_passed = checks.iter().filter(|c| c.passed).count();
    ValidationReport {
        n_records: checks.len(),
        n_passed,
        pass_rate: if checks.is_empty() { 1.0 } else { n_passed as f64 / checks.len() as f64 },
        records: checks,
    }
}

pub fn write_jsonl(records: &[CorpusRecord], out: &mut impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_jsonl(records: &[CorpusRecord]) -> String {
    let mut buf = Vec::new();
    write_jsonl(records, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn read_jsonl(text: &str) -> Result<Vec<CorpusRecord>, CorpusError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| CorpusError::Parse(format!("line {}: {e}", i + 1))))
        .collect()
}

pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Vec<CorpusRecord>, CorpusError> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| CorpusError::Io(e.to_string()))?;
    read_jsonl(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_template() {
        let set = TemplateSet::from_json_str(
            r#"{"slots": {"x": ["a"]}, "templates": [{"id": "one", "style": "direct_task", "query": "do {x}", "pattern": ["reporting"]}]}"#,
        )
        .unwrap();
        let c = generate_corpus(&Registry::shipped(), &set, &Paraphraser::shipped(), 1, 0).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].steps.len(), 1);
        assert_eq!(c[0].query, "do a");
    }

    #[test]
    fn unsatisfiable_and_bad_slots() {
        let reg = Registry::shipped().filter_categories(&[Category::Perception]);
        let set = TemplateSet::shipped();
        assert!(matches!(
            generate_corpus(&reg, &set, &Paraphraser::shipped(), 5, 0),
            Err(CorpusError::TemplateUnsatisfiable { .. })
        ));
        let bad = r#"{"slots": {}, "templates": [{"id": "t", "style": "mixed", "query": "do {y}", "pattern": ["reporting"]}]}"#;
        assert!(matches!(TemplateSet::from_json_str(bad), Err(CorpusError::UnknownSlot { .. })));
    }

    #[test]
    fn paraphrase_bounds() {
        let p = Paraphraser::shipped();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (text, n) = p.paraphrase("Estimate and measure and report the channel", &mut rng);
        assert_eq!(n, 2);
        assert_ne!(text, "Estimate and measure and report the channel");
        let (same, zero) = p.paraphrase("zzz qqq", &mut rng);
        assert_eq!((same.as_str(), zero), ("zzz qqq", 0));
    }

    #[test]
    fn ghost_and_empty() {
        let reg = Registry::shipped();
        let ghost = CorpusRecord {
            query: "q".into(),
            steps: vec!["s".into()],
            api_ids: vec!["ghost".into()],
            style: Style::Mixed,
        };
        let r = validate_corpus(&reg, &[ghost]);
        assert_eq!(r.n_passed, 0);
        assert!(r.records[0].reasons[0].contains("ghost"));
        let empty = validate_corpus(&reg, &[]);
        assert_eq!((empty.n_records, empty.pass_rate), (0, 1.0));
    }

    #[test]
    fn jsonl_round_trip() {
        let c = generate_corpus(&Registry::shipped(), &TemplateSet::shipped(), &Paraphraser::shipped(), 20, 3).unwrap();
        assert_eq!(read_jsonl(&to_jsonl(&c)).unwrap(), c);
    }
}
