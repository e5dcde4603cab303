//! Maps plan steps to the single most similar API, with a rejection threshold
//! for steps that fall outside the tool library.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::embedding::{Embedder, EmbeddingError, Scored, VectorStore};
use crate::util::{csv_row, fmt_sig};

/// Default minimum similarity for accepting a retrieval.
pub const DEFAULT_TAU: f64 = 0.35;
/// Number of ranked alternatives kept for diagnostics.
pub const DEFAULT_K_REPORT: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetrievalResult {
    pub step_text: String,
    pub chosen_api: String,
    pub score: f64,
    /// Ranked candidates, `chosen_api` first.
    pub alternatives: Vec<Scored>,
    /// Score minus runner-up score; 0 when the store has a single entry.
    pub margin: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum RetrievalError {
    #[error("no API matches step {step_text:?}: best candidate `{}` scored {:.4} < tau {tau}", best.api_id, best.score)]
    NoMatch { step_text: String, best: Scored, tau: f64 },
    #[error("embedder fingerprint `{embedder}` does not match store fingerprint `{store}`")]
    FingerprintMismatch { store: String, embedder: String },
    #[error("threshold {0} outside [-1, 1]")]
    InvalidThreshold(f64),
    #[error("vector store is empty")]
    EmptyStore,
    #[error("no steps given")]
    NoSteps,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

fn check_fingerprint(store: &VectorStore, embedder: &dyn Embedder) -> Result<(), RetrievalError> {
    let fp = embedder.fingerprint();
    if fp != store.fingerprint() {
        return Err(RetrievalError::FingerprintMismatch {
            store: store.fingerprint().to_owned(),
            embedder: fp,
        });
    }
    Ok(())
}

/// Retrieves the best API for `step_text`, keeping [`DEFAULT_K_REPORT`] alternatives.
pub fn retrieve_api(
    store: &VectorStore,
    embedder: &dyn Embedder,
    step_text: &str,
    tau: f64,
) -> Result<RetrievalResult, RetrievalError> {
    retrieve_api_with(store, embedder, step_text, tau, DEFAULT_K_REPORT)
}

pub fn retrieve_api_with(
    store: &VectorStore,
    embedder: &dyn Embedder,
    step_text: &str,
    tau: f64,
    k_report: usize,
) -> Result<RetrievalResult, RetrievalError> {
    if !(-1.0..=1.0).contains(&tau) {
        return Err(RetrievalError::InvalidThreshold(tau));
    }
    if store.is_empty() {
        return Err(RetrievalError::EmptyStore);
    }
    check_fingerprint(store, embedder)?;
    let query = embedder.embed(step_text)?;
    let mut ranked = store.nearest(&query, k_report.max(2))?;
    let best = ranked[0].clone();
    if best.score < tau {
        return Err(RetrievalError::NoMatch { step_text: step_text.to_owned(), best, tau });
    }
    let margin = ranked.get(1).map_or(0.0, |r| best.score - r.score);
    ranked.truncate(k_report.max(1));
    Ok(RetrievalResult {
        step_text: step_text.to_owned(),
        chosen_api: best.api_id,
        score: best.score,
        alternatives: ranked,
        margin,
    })
}

/// Step-by-API similarity matrix; columns follow store order (ascending api id).
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    pub api_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.api_ids.len()
    }

    /// Column index of the highest score in `row`, ties to the lower index.
    pub fn row_argmax(&self, row: usize) -> usize {
        let r = &self.rows[row];
        let mut best = 0;
        for (j, v) in r.iter().enumerate().skip(1) {
            if *v > r[best] {
                best = j;
            }
        }
        best
    }

    /// Comma-separated table: header `step,<api ids…>`, one row per step
    /// (1-based index) with 6 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step");
        for id in &self.api_ids {
            let _ = write!(out, ",{id}");
        }
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&csv_row(&(i + 1).to_string(), row, 6));
            out.push('\n');
        }
        out
    }
}

/// Similarity of every step against every stored API.
pub fn similarity_matrix(
    store: &VectorStore,
    embedder: &dyn Embedder,
    steps: &[impl AsRef<str>],
) -> Result<SimilarityMatrix, RetrievalError> {
    if steps.is_empty() {
        return Err(RetrievalError::NoSteps);
    }
    check_fingerprint(store, embedder)?;
    let rows = steps
        .iter()
        .map(|s| {
            let q = embedder.embed(s.as_ref())?;
            Ok(store.scores(&q)?)
        })
        .collect::<Result<Vec<_>, RetrievalError>>()?;
    Ok(SimilarityMatrix {
        api_ids: store.api_ids().map(str::to_owned).collect(),
        rows,
    })
}

impl std::fmt::Display for RetrievalResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (score {}, margin {})",
            self.chosen_api,
            fmt_sig(self.score, 4),
            fmt_sig(self.margin, 4)
        )
    }
}
