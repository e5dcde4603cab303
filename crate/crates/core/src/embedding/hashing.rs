use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Embedder, EmbeddingError, EmbeddingVector};
use crate::util::fnv1a64;

/// Name and version of the n-gram hashing scheme, recorded in fingerprints.
pub const HASH_SCHEME: &str = "hashed-ngram/v1/fnv1a64";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedderConfig {
    pub dimension: usize,
    pub ngram_orders: BTreeSet<usize>,
    pub casefold: bool,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig {
            dimension: 1024,
            ngram_orders: [1, 2].into_iter().collect(),
            casefold: true,
        }
    }
}

impl EmbedderConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        if self.dimension < 64 {
            return Err(EmbeddingError::InvalidConfig(format!(
                "dimension {} is below the minimum of 64",
                self.dimension
            )));
        }
        if self.ngram_orders.is_empty() {
            return Err(EmbeddingError::InvalidConfig("ngram_orders is empty".into()));
        }
        if let Some(bad) = self.ngram_orders.iter().find(|n| !(1..=3).contains(*n)) {
            return Err(EmbeddingError::InvalidConfig(format!(
                "n-gram order {bad} outside [1, 3]"
            )));
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> String {
        let orders: Vec<String> = self.ngram_orders.iter().map(|n| n.to_string()).collect();
        format!(
            "{HASH_SCHEME};dim={};orders={};casefold={}",
            self.dimension,
            orders.join(","),
            self.casefold
        )
    }
}

/// Deterministic bag-of-n-grams embedder.
///
/// Text is split on non-alphanumeric characters, optionally lowercased, and
/// every word n-gram of the configured orders is hashed to a bucket. Bucket
/// counts are scaled sublinearly (`1 + ln count`) and the vector is
/// L2-normalized.
#[derive(Clone, Debug, Default)]
pub struct HashingEmbedder {
    config: EmbedderConfig,
}

impl HashingEmbedder {
    pub fn new(config: EmbedderConfig) -> Result<Self, EmbeddingError> {
        config.validate()?;
        Ok(HashingEmbedder { config })
    }

    pub fn config(&self) -> &EmbedderConfig {
        &self.config
    }

    fn tokens(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(|t| if self.config.casefold { t.to_lowercase() } else { t.to_owned() })
            .collect()
    }
}

impl Embedder for HashingEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
        if text.trim().is_empty() {
            return Err(EmbeddingError::EmptyText);
        }
        let tokens = self.tokens(text);
        if tokens.is_empty() {
            return Err(EmbeddingError::EmptyText);
        }
        let dim = self.config.dimension;
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for &order in &self.config.ngram_orders {
            for gram in tokens.windows(order) {
                let bucket = (fnv1a64(gram.join(" ").as_bytes()) % dim as u64) as usize;
                *counts.entry(bucket).or_default() += 1;
            }
        }
        let mut components = vec![0.0; dim];
        for (bucket, count) in counts {
            components[bucket] = 1.0 + f64::from(count).ln();
        }
        // Only unigrams are guaranteed to exist; with e.g. orders {3} a short
        // text can produce no grams at all.
        let n = super::norm(&components);
        if n == 0.0 {
            return Err(EmbeddingError::EmptyText);
        }
        components.iter_mut().for_each(|x| *x /= n);
        EmbeddingVector::new(components)
    }

    fn fingerprint(&self) -> String {
        self.config.fingerprint()
    }

    fn dimension(&self) -> usize {
        self.config.dimension
    }
}

/// Embeds `text` with a hashing embedder built from `config`.
pub fn embed_text(config: &EmbedderConfig, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
    HashingEmbedder::new(config.clone())?.embed(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::dot;

    #[test]
    fn deterministic_and_unit_norm() {
        let c = EmbedderConfig::default();
        let a = embed_text(&c, "estimate channel").unwrap();
        let b = embed_text(&c, "estimate channel").unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn shared_ngrams_rank_higher() {
        let c = EmbedderConfig::default();
        let base = embed_text(&c, "estimate the channel matrix").unwrap();
        let near = embed_text(&c, "estimate channel matrix").unwrap();
        let far = embed_text(&c, "increase transmit power").unwrap();
        let (s_near, s_far) = (dot(base.components(), near.components()), dot(base.components(), far.components()));
        assert!(s_near > s_far, "{s_near} vs {s_far}");
    }

    #[test]
    fn casefold_and_punctuation() {
        let c = EmbedderConfig::default();
        assert_eq!(
            embed_text(&c, "Estimate, CHANNEL!").unwrap(),
            embed_text(&c, "estimate channel").unwrap()
        );
        let strict = EmbedderConfig { casefold: false, ..EmbedderConfig::default() };
        assert_ne!(
            embed_text(&strict, "Estimate").unwrap(),
            embed_text(&strict, "estimate").unwrap()
        );
    }

    #[test]
    fn empty_text() {
        let c = EmbedderConfig::default();
        assert_eq!(embed_text(&c, "   "), Err(EmbeddingError::EmptyText));
        assert_eq!(embed_text(&c, "--!!"), Err(EmbeddingError::EmptyText));
    }

    #[test]
    fn config_validation() {
        let small = EmbedderConfig { dimension: 32, ..EmbedderConfig::default() };
        assert!(matches!(small.validate(), Err(EmbeddingError::InvalidConfig(_))));
        let bad = EmbedderConfig { ngram_orders: [4].into_iter().collect(), ..EmbedderConfig::default() };
        assert!(bad.validate().is_err());
        let none = EmbedderConfig { ngram_orders: BTreeSet::new(), ..EmbedderConfig::default() };
        assert!(none.validate().is_err());
    }

    #[test]
    fn fingerprint_records_config() {
        let c = EmbedderConfig::default();
        assert_eq!(c.fingerprint(), "hashed-ngram/v1/fnv1a64;dim=1024;orders=1,2;casefold=true");
    }
}
