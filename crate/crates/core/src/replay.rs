//! Replays of previously published runs: a baseline model, its Q-table, the
//! aspects applied and the modified rewards each iteration received.
//!
//! A replay drives a normal [`SessionState`] with [`Validation::Published`]
//! inputs, so the Q trajectory can be checked against the published numbers
//! without the original documents.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agent::{PublishedRewards, QTable};
use crate::aspect::AspectKeywords;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::session::{SessionConfig, SessionState, Validation};
use crate::topics::{ModelKind, TopicModel};

/// A dense matrix over an explicit term list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseModel {
    pub labels: Vec<String>,
    pub terms: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Expected {
    /// Published Q-values after each iteration.
    pub q_after: Vec<BTreeMap<String, f64>>,
    /// Published Q change over the last iteration.
    pub deltas: BTreeMap<String, f64>,
    /// Published provisional Q-values, for reference only.
    #[serde(default)]
    pub approx_q: Vec<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayFixture {
    #[serde(default)]
    pub description: String,
    pub initial_model: DenseModel,
    pub initial_q: BTreeMap<String, f64>,
    pub aspects: Vec<AspectKeywords>,
    pub iterations: Vec<PublishedRewards>,
    #[serde(default)]
    pub expected: Expected,
    /// Published top-keyword weights per model, `model -> topic -> term -> weight`.
    #[serde(default)]
    pub published_models: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>,
}

impl ReplayFixture {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let fx: ReplayFixture = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })?;
        if fx.aspects.len() != fx.iterations.len() {
            return Err(Error::Corrupt {
                path: path.to_path_buf(),
                message: format!(
                    "{} aspects for {} iterations",
                    fx.aspects.len(),
                    fx.iterations.len()
                ),
            });
        }
        Ok(fx)
    }

    pub fn vocabulary(&self) -> Arc<Vocabulary> {
        Arc::new(Vocabulary::from_terms(
            self.initial_model.terms.iter().cloned(),
        ))
    }

    /// The baseline model; columns are reordered to the sorted vocabulary.
    pub fn initial_model(&self) -> Result<TopicModel> {
        let vocab = self.vocabulary();
        let m = &self.initial_model;
        let rows = m
            .rows
            .iter()
            .map(|r| {
                if r.len() != m.terms.len() {
                    return Err(Error::Shape(format!(
                        "row of {} values for {} terms",
                        r.len(),
                        m.terms.len()
                    )));
                }
                let mut out = vec![0.0; vocab.len()];
                for (t, &w) in m.terms.iter().zip(r) {
                    out[vocab
                        .index_of(t)
                        .expect("vocabulary built from these terms")] = w;
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        TopicModel::new(
            "CTP1",
            ModelKind::Initial,
            rows,
            m.labels.clone(),
            vocab,
            None,
        )
    }

    pub fn initial_qtable(&self) -> Result<QTable> {
        QTable::from_values(self.initial_q.iter().map(|(l, &v)| (l.clone(), v)))
    }

    pub fn validations(&self) -> Vec<Validation> {
        self.iterations
            .iter()
            .cloned()
            .map(Validation::Published)
            .collect()
    }

    pub fn session(&self, id: &str, config: SessionConfig) -> Result<SessionState> {
        SessionState::from_model(
            id,
            "reference-run",
            self.initial_model()?,
            self.initial_qtable()?,
            config,
        )
    }

    /// A published keyword table as a sparse aspect-weighted model over its own terms.
    pub fn published_model(&self, name: &str) -> Result<TopicModel> {
        let topics = self
            .published_models
            .get(name)
            .ok_or_else(|| Error::NotFound(format!("published model {name}")))?;
        let vocab = Arc::new(Vocabulary::from_terms(
            topics.values().flat_map(|t| t.keys().cloned()),
        ));
        let labels: Vec<String> = topics.keys().cloned().collect();
        let rows = topics
            .values()
            .map(|t| {
                let mut row = vec![0.0; vocab.len()];
                for (term, &w) in t {
                    row[vocab.index_of(term).expect("term collected above")] = w;
                }
                row
            })
            .collect();
        TopicModel::new(name, ModelKind::AspectWeighted, rows, labels, vocab, None)
    }
}
