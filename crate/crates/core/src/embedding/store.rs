use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use super::{cosine_with_norms, norm, Embedder, EmbeddingError, EmbeddingVector};
use crate::registry::Registry;

const HEADER: &str = "# vector-store v1";

#[derive(Clone, Debug, PartialEq)]
pub struct StoreEntry {
    pub api_id: String,
    pub vector: EmbeddingVector,
}

/// An api id with its similarity score.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scored {
    pub api_id: String,
    pub score: f64,
}

/// Exact nearest-neighbour store. Entries are kept in ascending api id order
/// with their norms cached.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorStore {
    entries: Vec<StoreEntry>,
    norms: Vec<f64>,
    dimension: usize,
    fingerprint: String,
}

/// Embeds the rendered instruction of every descriptor.
pub fn build_index(registry: &Registry, embedder: &dyn Embedder) -> Result<VectorStore, EmbeddingError> {
    if registry.is_empty() {
        return Err(EmbeddingError::EmptyRegistry);
    }
    let entries = registry
        .iter()
        .map(|d| {
            Ok(StoreEntry {
                api_id: d.id.clone(),
                vector: embedder.embed(&d.render_instruction())?,
            })
        })
        .collect::<Result<Vec<_>, EmbeddingError>>()?;
    VectorStore::from_entries(embedder.dimension(), embedder.fingerprint(), entries)
}

// Descending score, then ascending id. Scores are finite; 0.0 and -0.0 tie.
fn rank_order(a: &(f64, &str), b: &(f64, &str)) -> Ordering {
    b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then_with(|| a.1.cmp(b.1))
}

impl VectorStore {
    pub fn from_entries(
        dimension: usize,
        fingerprint: impl Into<String>,
        mut entries: Vec<StoreEntry>,
    ) -> Result<Self, EmbeddingError> {
        if dimension == 0 {
            return Err(EmbeddingError::InvalidConfig("store dimension must be positive".into()));
        }
        entries.sort_by(|a, b| a.api_id.cmp(&b.api_id));
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !seen.insert(e.api_id.as_str()) {
                return Err(EmbeddingError::DuplicateEntry(e.api_id.clone()));
            }
            if e.vector.dimension() != dimension {
                return Err(EmbeddingError::DimensionMismatch {
                    expected: dimension,
                    found: e.vector.dimension(),
                });
            }
        }
        let norms = entries.iter().map(|e| norm(e.vector.components())).collect();
        Ok(VectorStore {
            entries,
            norms,
            dimension,
            fingerprint: fingerprint.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn entries(&self) -> &[StoreEntry] {
        &self.entries
    }

    pub fn api_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|e| e.api_id.as_str())
    }

    /// The entries whose api id satisfies `keep`, norms and fingerprint preserved.
    pub fn filtered(&self, keep: impl Fn(&str) -> bool) -> VectorStore {
        let (entries, norms) = self
            .entries
            .iter()
            .zip(&self.norms)
            .filter(|(e, _)| keep(&e.api_id))
            .map(|(e, n)| (e.clone(), *n))
            .unzip();
        VectorStore { entries, norms, dimension: self.dimension, fingerprint: self.fingerprint.clone() }
    }

    /// Similarity of `query` against every entry, in store order.
    pub fn scores(&self, query: &EmbeddingVector) -> Result<Vec<f64>, EmbeddingError> {
        if query.dimension() != self.dimension {
            return Err(EmbeddingError::DimensionMismatch {
                expected: self.dimension,
                found: query.dimension(),
            });
        }
        let nq = query.norm();
        if nq == 0.0 {
            return Err(EmbeddingError::ZeroVector);
        }
        self.entries
            .iter()
            .zip(&self.norms)
            .map(|(e, &ne)| {
                if ne == 0.0 {
                    Err(EmbeddingError::ZeroVector)
                } else {
                    Ok(cosine_with_norms(e.vector.components(), ne, query.components(), nq))
                }
            })
            .collect()
    }

    /// Exact top-`k` entries by similarity, descending, ties broken by
    /// ascending api id. Returns `min(k, len)` results.
    pub fn nearest(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<Scored>, EmbeddingError> {
        if k == 0 {
            return Err(EmbeddingError::ZeroK);
        }
        let scores = self.scores(query)?;
        let mut ranked: Vec<(f64, &str)> = scores
            .into_iter()
            .zip(self.entries.iter().map(|e| e.api_id.as_str()))
            .collect();
        let k = k.min(ranked.len());
        if k < ranked.len() {
            ranked.select_nth_unstable_by(k - 1, rank_order);
            ranked.truncate(k);
        }
        ranked.sort_unstable_by(rank_order);
        Ok(ranked
            .into_iter()
            .map(|(score, id)| Scored { api_id: id.to_owned(), score })
            .collect())
    }

    /// Text serialization: a header, the fingerprint and dimension, then one
    /// line per entry with components at 9 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "fingerprint: {}", self.fingerprint);
        let _ = writeln!(out, "dimension: {}", self.dimension);
        let _ = writeln!(out, "entries: {}", self.entries.len());
        for e in &self.entries {
            out.push_str(&e.api_id);
            for x in e.vector.components() {
                if *x == 0.0 {
                    out.push_str(" 0");
                } else {
                    let _ = write!(out, " {x:.8e}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, EmbeddingError> {
        let err = |line: usize, message: &str| EmbeddingError::Parse { line, message: message.to_owned() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| lines.next().ok_or_else(|| err(0, &format!("missing {what}")));
        let (n, header) = next("header")?;
        if header.trim() != HEADER {
            return Err(err(n, "unrecognized header"));
        }
        let field = |(n, line): (usize, &str), key: &str| -> Result<String, EmbeddingError> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(':'))
                .map(|r| r.trim().to_owned())
                .ok_or_else(|| err(n, &format!("expected `{key}:`")))
        };
        let fingerprint = field(next("fingerprint")?, "fingerprint")?;
        let dim_line = next("dimension")?;
        let dimension: usize = field(dim_line, "dimension")?
            .parse()
            .map_err(|_| err(dim_line.0, "bad dimension"))?;
        let count_line = next("entries")?;
        let count: usize = field(count_line, "entries")?
            .parse()
            .map_err(|_| err(count_line.0, "bad entry count"))?;
        let mut entries = Vec::with_capacity(count);
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_ascii_whitespace();
            let api_id = parts.next().ok_or_else(|| err(n, "missing api id"))?.to_owned();
            let components = parts
                .map(|p| p.parse::<f64>().map_err(|_| err(n, &format!("bad number `{p}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            if components.len() != dimension {
                return Err(err(n, "component count does not match dimension"));
            }
            let vector = EmbeddingVector::new(components).map_err(|e| err(n, &e.to_string()))?;
            entries.push(StoreEntry { api_id, vector });
        }
        if entries.len() != count {
            return Err(err(0, "entry count does not match header"));
        }
        VectorStore::from_entries(dimension, fingerprint, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{EmbedderConfig, HashingEmbedder};
    use crate::registry::{ApiDescriptor, Category};

    fn entry(id: &str, c: &[f64]) -> StoreEntry {
        StoreEntry { api_id: id.into(), vector: EmbeddingVector::new(c.to_vec()).unwrap() }
    }

    fn descriptor(id: &str, instruction: &str) -> ApiDescriptor {
        ApiDescriptor {
            id: id.into(),
            name: id.into(),
            category: Category::Perception,
            instruction: instruction.into(),
            parameters: vec![],
            outputs: vec![],
        }
    }

    #[test]
    fn nearest_orders_and_breaks_ties() {
        let store = VectorStore::from_entries(
            2,
            "t",
            vec![entry("c", &[1.0, 0.0]), entry("a", &[1.0, 0.0]), entry("b", &[0.0, 1.0])],
        )
        .unwrap();
        let q = EmbeddingVector::new(vec![2.0, 0.0]).unwrap();
        let top = store.nearest(&q, 3).unwrap();
        let ids: Vec<_> = top.iter().map(|s| s.api_id.as_str()).collect();
        assert_eq!(ids, ["a", "c", "b"]);
        assert_eq!(top[0].score, 1.0);
        assert_eq!(store.nearest(&q, 10).unwrap().len(), 3);
        assert_eq!(store.nearest(&q, 1).unwrap()[0].api_id, "a");
        assert_eq!(store.nearest(&q, 0), Err(EmbeddingError::ZeroK));
    }

    #[test]
    fn nearest_rejects_bad_queries() {
        let store = VectorStore::from_entries(2, "t", vec![entry("a", &[1.0, 0.0])]).unwrap();
        assert!(matches!(
            store.nearest(&EmbeddingVector::new(vec![1.0; 3]).unwrap(), 1),
            Err(EmbeddingError::DimensionMismatch { .. })
        ));
        assert_eq!(
            store.nearest(&EmbeddingVector::new(vec![0.0, 0.0]).unwrap(), 1),
            Err(EmbeddingError::ZeroVector)
        );
    }

    #[test]
    fn duplicate_entries_rejected() {
        let r = VectorStore::from_entries(2, "t", vec![entry("a", &[1.0, 0.0]), entry("a", &[0.0, 1.0])]);
        assert_eq!(r, Err(EmbeddingError::DuplicateEntry("a".into())));
    }

    #[test]
    fn build_index_singleton_and_order() {
        let e = HashingEmbedder::new(EmbedderConfig::default()).unwrap();
        let d = descriptor("only", "estimate the channel");
        let r = Registry::from_descriptors("t", vec![d.clone()]).unwrap();
        let store = build_index(&r, &e).unwrap();
        assert_eq!(store.len(), 1);
        assert_eq!(store.entries()[0].vector, e.embed(&d.render_instruction()).unwrap());

        let a = descriptor("a", "set transmit power");
        let b = descriptor("b", "measure interference");
        let r1 = Registry::from_descriptors("t", vec![a.clone(), b.clone()]).unwrap();
        let r2 = Registry::from_descriptors("t", vec![b, a]).unwrap();
        assert_eq!(build_index(&r1, &e).unwrap(), build_index(&r2, &e).unwrap());

        assert_eq!(build_index(&Registry::empty("t"), &e), Err(EmbeddingError::EmptyRegistry));
    }

    #[test]
    fn text_round_trip_is_stable() {
        let e = HashingEmbedder::new(EmbedderConfig { dimension: 64, ..EmbedderConfig::default() }).unwrap();
        let r = Registry::shipped().first_n(5);
        let store = build_index(&r, &e).unwrap();
        let text = store.to_text();
        let back = VectorStore::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.fingerprint(), store.fingerprint());
        for (x, y) in back.entries().iter().zip(store.entries()) {
            for (a, b) in x.vector.components().iter().zip(y.vector.components()) {
                assert!((a - b).abs() <= 1e-8 * b.abs());
            }
        }
    }

    #[test]
    fn from_text_errors() {
        assert!(matches!(VectorStore::from_text("nope"), Err(EmbeddingError::Parse { line: 1, .. })));
        let bad = format!("{HEADER}\nfingerprint: x\ndimension: 2\nentries: 1\na 1.0\n");
        assert!(matches!(VectorStore::from_text(&bad), Err(EmbeddingError::Parse { line: 5, .. })));
    }
}
