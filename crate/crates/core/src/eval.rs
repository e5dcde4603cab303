//! Retrieval and decomposition evaluations.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::agents::{self, AgentError, EnvironmentState, TransmissionRequirements, UeTask};
use crate::corpus::{CorpusRecord, Paraphraser};
use crate::embedding::{Embedder, VectorStore};
use crate::llm::{BackendError, LlmBackend, ScriptedBackend, ScriptedRule};
use crate::registry::Registry;
use crate::retrieval::{retrieve_api, similarity_matrix, RetrievalError, SimilarityMatrix};
use crate::sim::Mobility;
use crate::util::{csv_field, fmt_sig};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no evaluation cases")]
    NoCases,
    #[error("case {index}: truth api `{api}` is not in the store")]
    UnknownTruth { index: usize, api: String },
    #[error("setup error on query `{query}`: {source}")]
    Setup { query: String, source: BackendError },
    #[error("need {needed} distinct queries, corpus has {available}")]
    NotEnoughQueries { needed: usize, available: usize },
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

/// Comment lines opening every exported table.
pub fn export_header(seed: u64, library_version: &str, embedder_fingerprint: &str) -> String {
    format!("# seed={seed}\n# library_version={library_version}\n# embedder={embedder_fingerprint}\n")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetrievalEvalCase {
    pub step_text: String,
    pub truth_api: String,
}

/// `n` paraphrased instructions of distinct APIs drawn from `registry`, at
/// most `MAX_SUBSTITUTIONS` words replaced each.
pub fn paraphrase_suite(
    registry: &Registry,
    paraphraser: &Paraphraser,
    n: usize,
    seed: u64,
) -> Vec<RetrievalEvalCase> {
    let descriptors: Vec<_> = registry.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, descriptors.len(), n.min(descriptors.len())).into_vec();
    picks
        .into_iter()
        .map(|i| {
            let d = descriptors[i];
            RetrievalEvalCase { step_text: paraphraser.paraphrase(&d.instruction, &mut rng).0, truth_api: d.id.clone() }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseResult {
    pub step: String,
    pub chosen: String,
    pub truth: String,
    pub score: f64,
    pub margin: f64,
    /// Truth score minus the best score of any other API.
    pub truth_margin: f64,
    pub correct: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalSummary {
    pub n_cases: usize,
    pub top1_accuracy: f64,
    pub mean_margin: f64,
    pub per_case: Vec<CaseResult>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetrievalEval {
    pub summary: EvalSummary,
    pub matrix: SimilarityMatrix,
}

/// Runs retrieval with `tau = -1` on every case and builds the full matrix.
pub fn eval_retrieval(
    store: &VectorStore,
    embedder: &dyn Embedder,
    cases: &[RetrievalEvalCase],
    parallel: bool,
) -> Result<RetrievalEval, EvalError> {
    if cases.is_empty() {
        return Err(EvalError::NoCases);
    }
    let ids: Vec<&str> = store.api_ids().collect();
    for (index, c) in cases.iter().enumerate() {
        if ids.binary_search(&c.truth_api.as_str()).is_err() {
            return Err(EvalError::UnknownTruth { index, api: c.truth_api.clone() });
        }
    }
    let steps: Vec<&str> = cases.iter().map(|c| c.step_text.as_str()).collect();
    let matrix = similarity_matrix(store, embedder, &steps)?;

    let one = |(i, c): (usize, &RetrievalEvalCase)| -> Result<CaseResult, EvalError> {
        let r = retrieve_api(store, embedder, &c.step_text, -1.0)?;
        let row = &matrix.rows[i];
        let t = ids.binary_search(&c.truth_api.as_str()).expect("checked above");
        let others = row.iter().enumerate().filter(|(j, _)| *j != t).map(|(_, s)| *s).fold(f64::NEG_INFINITY, f64::max);
        Ok(CaseResult {
            step: c.step_text.clone(),
            correct: r.chosen_api == c.truth_api,
            chosen: r.chosen_api,
            truth: c.truth_api.clone(),
            score: r.score,
            margin: r.margin,
            truth_margin: if others.is_finite() { row[t] - others } else { 0.0 },
        })
    };
    let per_case = if parallel {
        cases.par_iter().enumerate().map(one).collect::<Result<Vec<_>, _>>()?
    } else {
        cases.iter().enumerate().map(one).collect::<Result<Vec<_>, _>>()?
    };
    let n = per_case.len();
    let correct = per_case.iter().filter(|c| c.correct).count();
    let summary = EvalSummary {
        n_cases: n,
        top1_accuracy: correct as f64 / n as f64,
        mean_margin: per_case.iter().map(|c| c.margin).sum::<f64>() / n as f64,
        per_case,
    };
    Ok(RetrievalEval { summary, matrix })
}

impl EvalSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("case,truth,chosen,correct,score,margin,truth_margin,step\n");
        for (i, c) in self.per_case.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                i + 1,
                c.truth,
                c.chosen,
                c.correct,
                fmt_sig(c.score, 6),
                fmt_sig(c.margin, 6),
                fmt_sig(c.truth_margin, 6),
                csv_field(&c.step)
            );
        }
        let _ = writeln!(
            out,
            "# n_cases={} top1_accuracy={} mean_margin={}",
            self.n_cases,
            fmt_sig(self.top1_accuracy, 6),
            fmt_sig(self.mean_margin, 6)
        );
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionCase {
    pub query: String,
    pub truth: Vec<String>,
}

/// Validation queries with the scripted plans that answer them.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionSuite {
    pub cases: Vec<DecompositionCase>,
    /// Fixture plan (step texts) per case.
    pub plans: Vec<Vec<String>>,
}

pub const FIXTURE_REQUIREMENTS: &str = "THROUGHPUT_MBPS=50\nLATENCY_MS=20\nRELIABILITY=0.999\nMODALITY=data";

impl DecompositionSuite {
    /// The first `n` records with distinct queries.
    pub fn from_corpus(records: &[CorpusRecord], n: usize) -> Result<Self, EvalError> {
        let mut seen = BTreeSet::new();
        let mut cases = Vec::with_capacity(n);
        let mut plans = Vec::with_capacity(n);
        for r in records {
            if cases.len() == n {
                break;
            }
            if r.query.contains('\n') || !seen.insert(r.query.as_str()) {
                continue;
            }
            cases.push(DecompositionCase { query: r.query.clone(), truth: r.api_ids.clone() });
            plans.push(r.steps.clone());
        }
        if cases.len() < n {
            return Err(EvalError::NotEnoughQueries { needed: n, available: cases.len() });
        }
        Ok(DecompositionSuite { cases, plans })
    }

    /// Two rules per query: the task-awareness answer carries the query in
    /// NOTES, and the planner rule keys on that NOTES line.
    pub fn backend(&self) -> ScriptedBackend {
        let mut rules = Vec::with_capacity(2 * self.cases.len());
        for (c, plan) in self.cases.iter().zip(&self.plans) {
            rules.push(ScriptedRule::contains(
                format!("[TASK]\n{}\n\n", c.query),
                format!("{FIXTURE_REQUIREMENTS}\nNOTES={}", c.query),
            ));
            let steps: Vec<String> = plan.iter().enumerate().map(|(i, s)| format!("{}. {s}", i + 1)).collect();
            rules.push(ScriptedRule::contains(format!("NOTES={}\n", c.query), steps.join("\n")));
        }
        ScriptedBackend::new(rules)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryResult {
    pub query: String,
    pub truth: Vec<String>,
    pub predicted: Vec<String>,
    pub correct: bool,
    /// Fraction of predicted steps matching the truth at the same position.
    pub step_precision: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl QueryResult {
    pub fn diff(&self) -> String {
        format!(
            "{}: expected [{}] got [{}]{}",
            self.query,
            self.truth.join(", "),
            self.predicted.join(", "),
            self.error.as_ref().map(|e| format!(" ({e})")).unwrap_or_default()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionEval {
    pub n_queries: usize,
    pub n_correct: usize,
    pub correction_rate: f64,
    pub mean_step_precision: f64,
    pub per_query: Vec<QueryResult>,
}

impl DecompositionEval {
    pub fn diffs(&self) -> Vec<String> {
        self.per_query.iter().filter(|q| !q.correct).map(QueryResult::diff).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("query_index,correct,step_precision,n_truth,n_predicted,query\n");
        for (i, q) in self.per_query.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                i + 1,
                q.correct,
                fmt_sig(q.step_precision, 6),
                q.truth.len(),
                q.predicted.len(),
                csv_field(&q.query)
            );
        }
        let _ = writeln!(
            out,
            "# n_queries={} correction_rate={} mean_step_precision={}",
            self.n_queries,
            fmt_sig(self.correction_rate, 6),
            fmt_sig(self.mean_step_precision, 6)
        );
        out
    }
}

/// Environment shown to the planner during decomposition evaluation.
pub fn reference_state() -> EnvironmentState {
    EnvironmentState { snr_db: 20.0, pa_temperature_c: 45.0, ue_count: 1, mobility: Mobility::Static, timestamp: 0.0 }
}

const NO_MATCH: &str = "<no_match>";

fn decompose(
    backend: &dyn LlmBackend,
    store: &VectorStore,
    embedder: &dyn Embedder,
    tau: f64,
    index: usize,
    case: &DecompositionCase,
) -> Result<QueryResult, EvalError> {
    let setup = |e: AgentError| match e {
        AgentError::Backend { source: source @ BackendError::NoRuleMatched { .. }, .. } => {
            Err(EvalError::Setup { query: case.query.clone(), source })
        }
        other => Ok(other.to_string()),
    };
    let task = UeTask { id: format!("q{}", index + 1), description: case.query.clone(), arrival_time: 0.0 };
    let mut predicted = Vec::new();
    let mut error = None;
    let requirements: Option<TransmissionRequirements> = match agents::task_awareness(backend, &task) {
        Ok(r) => Some(r),
        Err(e) => {
            error = Some(setup(e)?);
            None
        }
    };
    if let Some(req) = requirements {
        match agents::plan(backend, &task.id, &req, &reference_state()) {
            Ok(plan) => {
                for step in &plan.steps {
                    match retrieve_api(store, embedder, &step.text, tau) {
                        Ok(r) => predicted.push(r.chosen_api),
                        Err(RetrievalError::NoMatch { .. }) => predicted.push(NO_MATCH.to_owned()),
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            Err(e) => error = Some(setup(e)?),
        }
    }
    let hits = predicted.iter().zip(&case.truth).filter(|(p, t)| p == t).count();
    Ok(QueryResult {
        query: case.query.clone(),
        truth: case.truth.clone(),
        correct: error.is_none() && predicted == case.truth,
        step_precision: if predicted.is_empty() { 0.0 } else { hits as f64 / predicted.len() as f64 },
        predicted,
        error,
    })
}

/// A query counts as correct only when its retrieved API sequence equals the
/// truth exactly. A request no rule answers is a setup error, not a miss.
pub fn eval_decomposition(
    backend: &dyn LlmBackend,
    store: &VectorStore,
    embedder: &dyn Embedder,
    cases: &[DecompositionCase],
    tau: f64,
    parallel: bool,
) -> Result<DecompositionEval, EvalError> {
    if cases.is_empty() {
        return Err(EvalError::NoCases);
    }
    let run = |(i, c): (usize, &DecompositionCase)| decompose(backend, store, embedder, tau, i, c);
    let per_query = if parallel {
        cases.par_iter().enumerate().map(run).collect::<Result<Vec<_>, _>>()?
    } else {
        cases.iter().enumerate().map(run).collect::<Result<Vec<_>, _>>()?
    };
    let n = per_query.len();
    let n_correct = per_query.iter().filter(|q| q.correct).count();
    Ok(DecompositionEval {
        n_queries: n,
        n_correct,
        correction_rate: n_correct as f64 / n as f64,
        mean_step_precision: per_query.iter().map(|q| q.step_precision).sum::<f64>() / n as f64,
        per_query,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, TemplateSet};
    use crate::embedding::{build_index, HashingEmbedder};

    #[test]
    fn identity_cases_score_one() {
        let reg = Registry::shipped().first_n(50);
        let emb = HashingEmbedder::default();
        let store = build_index(&reg, &emb).unwrap();
        let cases: Vec<_> = reg
            .iter()
            .take(10)
            .map(|d| RetrievalEvalCase { step_text: d.render_instruction(), truth_api: d.id.clone() })
            .collect();
        let e = eval_retrieval(&store, &emb, &cases, false).unwrap();
        assert_eq!(e.summary.top1_accuracy, 1.0);
        assert!(e.summary.per_case.iter().all(|c| (c.score - 1.0).abs() < 1e-9 && c.margin >= 0.0));
        assert_eq!((e.matrix.n_rows(), e.matrix.n_cols()), (10, 50));
        assert!(matches!(eval_retrieval(&store, &emb, &[], false), Err(EvalError::NoCases)));
    }

    #[test]
    fn accuracy_ignores_case_and_store_order() {
        let reg = Registry::shipped().first_n(50);
        let emb = HashingEmbedder::default();
        let store = build_index(&reg, &emb).unwrap();
        let mut reversed: Vec<_> = store.entries().to_vec();
        reversed.reverse();
        let store2 = VectorStore::from_entries(store.dimension(), store.fingerprint(), reversed).unwrap();
        let cases = paraphrase_suite(&reg, &Paraphraser::shipped(), 35, 9);
        let mut shuffled = cases.clone();
        shuffled.rotate_left(11);
        let a = eval_retrieval(&store, &emb, &cases, false).unwrap().summary;
        let b = eval_retrieval(&store2, &emb, &shuffled, true).unwrap().summary;
        assert_eq!(a.top1_accuracy, b.top1_accuracy);
        assert!((a.mean_margin - b.mean_margin).abs() < 1e-12);
        assert!(a.mean_margin >= 0.0);
    }

    #[test]
    fn small_decomposition_suite() {
        let reg = Registry::shipped();
        let emb = HashingEmbedder::default();
        let store = build_index(&reg, &emb).unwrap();
        let corpus = generate_corpus(&reg, &TemplateSet::shipped(), &Paraphraser::shipped(), 40, 5).unwrap();
        let suite = DecompositionSuite::from_corpus(&corpus, 10).unwrap();
        let backend = suite.backend();
        let e = eval_decomposition(&backend, &store, &emb, &suite.cases, 0.35, false).unwrap();
        assert_eq!(e.correction_rate, 1.0, "{:?}", e.diffs());

        let missing = ScriptedBackend::new(vec![]);
        assert!(matches!(
            eval_decomposition(&missing, &store, &emb, &suite.cases, 0.35, false),
            Err(EvalError::Setup { .. })
        ));
    }
}
