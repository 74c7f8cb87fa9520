//! Topic-word models: LDA baselines and their aspect-weighted successors.

mod io;
mod lda;
mod split;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aspect::{rank_order, AspectKeywords};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub use io::{read_model, write_model, ModelHeader};
pub use lda::{fit_lda, fit_lda_on_ids, LdaParams};
pub use split::{allocate_subtopics, split_topics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Rows are probability distributions.
    Initial,
    /// Rows are nonnegative weights with no sum constraint.
    AspectWeighted,
}

/// Where a reweighted model came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub parent: String,
    pub aspect_label: String,
}

/// A K x V topic-word weight matrix bound to a vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    id: String,
    kind: ModelKind,
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
    vocabulary: Arc<Vocabulary>,
    lineage: Option<Lineage>,
}

/// D x K document-topic proportions; rows sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTopicAssignment {
    pub doc_topic: Vec<Vec<f64>>,
}

impl DocTopicAssignment {
    /// Index of the dominant topic per document (lowest index on ties).
    pub fn argmax(&self) -> Vec<usize> {
        self.doc_topic
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                        if v > best.1 {
                            (i, v)
                        } else {
                            best
                        }
                    })
                    .0
            })
            .collect()
    }
}

/// "T01", "T02", ... zero-padded to at least two digits.
pub fn default_labels(k: usize) -> Vec<String> {
    let width = k.to_string().len().max(2);
    (1..=k).map(|i| format!("T{i:0width$}")).collect()
}

const ROW_SUM_TOL: f64 = 1e-9;

impl TopicModel {
    pub fn new(
        id: impl Into<String>,
        kind: ModelKind,
        rows: Vec<Vec<f64>>,
        labels: Vec<String>,
        vocabulary: Arc<Vocabulary>,
        lineage: Option<Lineage>,
    ) -> Result<Self> {
        let k = rows.len();
        let v = vocabulary.len();
        if k == 0 || v == 0 {
            return Err(Error::Shape(format!(
                "topic model needs K >= 1 and V >= 1 (got {k}x{v})"
            )));
        }
        if labels.len() != k {
            return Err(Error::Shape(format!(
                "{} labels for {k} topics",
                labels.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Shape(format!("duplicate topic label {l:?}")));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != v {
                return Err(Error::Shape(format!(
                    "row {i} has {} columns, vocabulary has {v}",
                    row.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has a negative or non-finite weight"
                )));
            }
            if kind == ModelKind::Initial {
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "initial row {i} sums to {s}, expected 1"
                    )));
                }
            }
        }
        Ok(TopicModel {
            id: id.into(),
            kind,
            rows,
            labels,
            vocabulary,
            lineage,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, topic: usize) -> &[f64] {
        &self.rows[topic]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocabulary
    }

    pub fn lineage(&self) -> Option<&Lineage> {
        self.lineage.as_ref()
    }

    pub fn num_topics(&self) -> usize {
        self.rows.len()
    }

    pub fn num_terms(&self) -> usize {
        self.vocabulary.len()
    }

    /// Replace the id; used when a caller needs a stable name such as "CTP2".
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// `n` highest-weight terms of a topic, weight descending, ties by term.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<(String, f64)> {
        let mut all: Vec<(String, f64)> = self.rows[topic]
            .iter()
            .enumerate()
            .map(|(w, &x)| (self.vocabulary.term(w).to_string(), x))
            .collect();
        all.sort_by(rank_order);
        all.truncate(n);
        all
    }

    /// Aspect weight for each vocabulary column (None outside the aspect).
    fn aspect_columns(&self, aspect: &AspectKeywords) -> Vec<Option<f64>> {
        let mut cols = vec![None; self.num_terms()];
        for (term, w) in aspect.entries() {
            if let Some(i) = self.vocabulary.index_of(term) {
                cols[i] = Some(*w);
            }
        }
        cols
    }

    /// Per-topic dot product with the aspect, restricted to shared terms.
    pub fn topic_relevance_scores(&self, aspect: &AspectKeywords) -> Vec<f64> {
        let cols = self.aspect_columns(aspect);
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&cols)
                    .filter_map(|(x, a)| a.map(|a| x * a))
                    .sum()
            })
            .collect()
    }

    /// Multiply each topic row by the aspect weights on shared terms, scale the
    /// remaining terms by `retain_factor`, then max-normalize.
    pub fn apply_aspect(
        &self,
        aspect: &AspectKeywords,
        options: &ApplyAspectOptions,
    ) -> Result<TopicModel> {
        if !options.retain_factor.is_finite() || options.retain_factor < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "retain_factor must be finite and >= 0, got {}",
                options.retain_factor
            )));
        }
        let cols = self.aspect_columns(aspect);
        let mut overlap = 0.0;
        let mut raw: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&cols)
                    .map(|(x, a)| match a {
                        Some(a) => {
                            overlap += x * a;
                            x * a
                        }
                        None => options.retain_factor * x,
                    })
                    .collect()
            })
            .collect();
        if overlap <= 0.0 {
            return Err(Error::AspectDisjoint);
        }
        match options.scope {
            NormalizationScope::Global => {
                let max = raw.iter().flatten().copied().fold(0.0, f64::max);
                for x in raw.iter_mut().flatten() {
                    *x /= max;
                }
            }
            NormalizationScope::PerTopic => {
                for row in &mut raw {
                    let max = row.iter().copied().fold(0.0, f64::max);
                    if max > 0.0 {
                        for x in row.iter_mut() {
                            *x /= max;
                        }
                    }
                }
            }
        }
        let lineage = Lineage {
            parent: self.id.clone(),
            aspect_label: aspect.label.clone(),
        };
        let id = content_id("atm", &raw, &self.labels);
        TopicModel::new(
            id,
            ModelKind::AspectWeighted,
            raw,
            self.labels.clone(),
            self.vocabulary.clone(),
            Some(lineage),
        )
    }

    /// Rows as term -> weight maps, skipping zeros.
    pub fn sparse_rows(&self) -> Vec<HashMap<&str, f64>> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(w, &x)| (self.vocabulary.term(w), x))
                    .collect()
            })
            .collect()
    }
}

/// Free-function form of [`TopicModel::apply_aspect`].
pub fn apply_aspect(
    model: &TopicModel,
    aspect: &AspectKeywords,
    options: &ApplyAspectOptions,
) -> Result<TopicModel> {
    model.apply_aspect(aspect, options)
}

/// Free-function form of [`TopicModel::topic_relevance_scores`].
pub fn topic_relevance_scores(model: &TopicModel, aspect: &AspectKeywords) -> Vec<f64> {
    model.topic_relevance_scores(aspect)
}

/// Free-function form of [`TopicModel::top_words`].
pub fn top_words(model: &TopicModel, topic: usize, n: usize) -> Vec<(String, f64)> {
    model.top_words(topic, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationScope {
    /// Divide by the largest cell of the whole model.
    #[default]
    Global,
    /// Divide each row by its own maximum.
    PerTopic,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ApplyAspectOptions {
    /// Multiplier for terms outside the aspect; 0 keeps only the intersection.
    pub retain_factor: f64,
    pub scope: NormalizationScope,
}

/// Deterministic id from matrix contents.
pub(crate) fn content_id(prefix: &str, rows: &[Vec<f64>], labels: &[String]) -> String {
    let mut h = Sha256::new();
    for l in labels {
        h.update(l.as_bytes());
        h.update([0u8]);
    }
    for row in rows {
        for x in row {
            h.update(x.to_bits().to_le_bytes());
        }
    }
    format!("{prefix}-{}", hex::encode(&h.finalize()[..6]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(terms: &[&str]) -> Arc<Vocabulary> {
        Arc::new(Vocabulary::from_terms(terms.iter().copied()))
    }

    fn model(rows: Vec<Vec<f64>>, terms: &[&str]) -> TopicModel {
        let k = rows.len();
        TopicModel::new(
            "m",
            ModelKind::Initial,
            rows,
            default_labels(k),
            vocab(terms),
            None,
        )
        .unwrap()
    }

    fn aspect(entries: &[(&str, f64)]) -> AspectKeywords {
        AspectKeywords::new(
            "a",
            entries.iter().map(|(t, w)| (t.to_string(), *w)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn labels_are_padded() {
        assert_eq!(default_labels(3), ["T01", "T02", "T03"]);
        assert_eq!(default_labels(39)[38], "T39");
        assert_eq!(default_labels(120)[0], "T001");
    }

    #[test]
    fn initial_rows_must_sum_to_one() {
        let err = TopicModel::new(
            "m",
            ModelKind::Initial,
            vec![vec![0.5, 0.4]],
            default_labels(1),
            vocab(&["a", "b"]),
            None,
        );
        assert!(err.is_err());
    }

    #[test]
    fn hand_multiplication() {
        let m = model(vec![vec![0.5, 0.3, 0.2]], &["a", "b", "c"]);
        let out = m
            .apply_aspect(
                &aspect(&[("a", 0.4), ("c", 0.1)]),
                &ApplyAspectOptions::default(),
            )
            .unwrap();
        // raw {a: 0.20, b: 0, c: 0.02}, divided by 0.20
        let expected = [1.0, 0.0, 0.1];
        for (x, e) in out.row(0).iter().zip(expected) {
            assert!((x - e).abs() < 1e-15, "{x} vs {e}");
        }
        assert_eq!(out.kind(), ModelKind::AspectWeighted);
        let lin = out.lineage().unwrap();
        assert_eq!(lin.parent, "m");
        assert_eq!(lin.aspect_label, "a");
    }

    #[test]
    fn uniform_aspect_preserves_ranking() {
        let m = model(
            vec![vec![0.1, 0.6, 0.3], vec![0.5, 0.2, 0.3]],
            &["a", "b", "c"],
        );
        let a = aspect(&[("a", 0.7), ("b", 0.7), ("c", 0.7)]);
        let out = m.apply_aspect(&a, &ApplyAspectOptions::default()).unwrap();
        for t in 0..2 {
            let before: Vec<_> = m.top_words(t, 3).into_iter().map(|x| x.0).collect();
            let after: Vec<_> = out.top_words(t, 3).into_iter().map(|x| x.0).collect();
            assert_eq!(before, after);
        }
        let again = out
            .apply_aspect(&a, &ApplyAspectOptions::default())
            .unwrap();
        for t in 0..2 {
            assert_eq!(again.top_words(t, 1)[0].0, m.top_words(t, 1)[0].0);
        }
    }

    #[test]
    fn disjoint_aspect_is_error() {
        let m = model(vec![vec![1.0, 0.0]], &["a", "b"]);
        assert!(matches!(
            m.apply_aspect(&aspect(&[("z", 1.0)]), &ApplyAspectOptions::default()),
            Err(Error::AspectDisjoint)
        ));
        assert!(matches!(
            m.apply_aspect(&aspect(&[("b", 1.0)]), &ApplyAspectOptions::default()),
            Err(Error::AspectDisjoint)
        ));
    }

    #[test]
    fn retain_factor_keeps_other_terms() {
        let m = model(vec![vec![0.5, 0.5]], &["a", "b"]);
        let opts = ApplyAspectOptions {
            retain_factor: 0.05,
            ..Default::default()
        };
        let out = m.apply_aspect(&aspect(&[("a", 0.5)]), &opts).unwrap();
        assert_eq!(out.row(0)[0], 1.0);
        assert!((out.row(0)[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn per_topic_scope() {
        let m = model(vec![vec![0.5, 0.5], vec![0.9, 0.1]], &["a", "b"]);
        let opts = ApplyAspectOptions {
            scope: NormalizationScope::PerTopic,
            ..Default::default()
        };
        let out = m
            .apply_aspect(&aspect(&[("a", 0.5), ("b", 0.25)]), &opts)
            .unwrap();
        assert_eq!(out.row(0)[0], 1.0);
        assert_eq!(out.row(1)[0], 1.0);
    }

    #[test]
    fn relevance_scores() {
        let m = model(vec![vec![1.0, 0.0], vec![0.0, 1.0]], &["a", "b"]);
        assert_eq!(m.topic_relevance_scores(&aspect(&[("a", 0.5)])), [0.5, 0.0]);
    }

    #[test]
    fn top_words_edges() {
        let m = model(vec![vec![0.0, 1.0, 0.0]], &["a", "b", "c"]);
        assert_eq!(m.top_words(0, 1), [("b".to_string(), 1.0)]);
        assert!(m.top_words(0, 0).is_empty());
        let all = m.top_words(0, 10);
        assert_eq!(all.len(), 3);
        assert_eq!(all[1].0, "a");
    }

    #[test]
    fn argmax_ties_lowest_index() {
        let a = DocTopicAssignment {
            doc_topic: vec![vec![0.5, 0.5], vec![0.2, 0.8]],
        };
        assert_eq!(a.argmax(), [0, 1]);
    }
}
