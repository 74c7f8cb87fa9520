//! Tabular Q-learning over topics.
//!
//! One iteration of the agent:
//!
//! 1. score every topic with the approximate reward, a weighted sum of the
//!    comparison bundle's magnitude, similarity, entropy change and ADNS;
//! 2. fold those rewards into provisional Q-values and pick the top topics;
//! 3. validate against fresh documents: a base reward from document-topic
//!    cosine similarities plus an entropy bonus gives the modified reward;
//! 4. apply the Q-update with that reward and a shared max-future value.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::metrics::{cosine_similarity, magnitude, MetricsBundle};
use crate::topics::TopicModel;

/// Which entropy quantity enters the approximate reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyTerm {
    /// new - old
    #[default]
    Delta,
    /// Entropy of the new model's topic.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardCoefficients {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    /// Use 1 - similarity in place of similarity.
    pub use_divergence: bool,
    pub entropy_term: EntropyTerm,
}

impl Default for RewardCoefficients {
    fn default() -> Self {
        RewardCoefficients {
            lambda1: 0.75,
            lambda2: 0.15,
            lambda3: 0.05,
            lambda4: 0.05,
            use_divergence: false,
            entropy_term: EntropyTerm::Delta,
        }
    }
}

impl RewardCoefficients {
    pub fn validate(&self) -> Result<()> {
        if [self.lambda1, self.lambda2, self.lambda3, self.lambda4]
            .iter()
            .all(|x| x.is_finite())
        {
            Ok(())
        } else {
            Err(Error::NonFinite("reward coefficients"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseRewardMode {
    /// Fraction of documents whose similarity exceeds the threshold.
    #[default]
    IndicatorMean,
    /// Mean similarity of the documents above the threshold (0 if none).
    ThresholdedMean,
    /// Mean of the `top_k_docs` highest similarities.
    TopKMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFutureMode {
    /// One value per iteration: the best base reward over all topics.
    #[default]
    Shared,
    /// Per topic: the topic's best single-document similarity.
    PerTopic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdatePolicy {
    /// Update only the topics chosen this iteration.
    #[default]
    Selected,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub lambda_entropy: f64,
    pub sim_threshold: f64,
    pub top_n: usize,
    pub base_reward_mode: BaseRewardMode,
    pub top_k_docs: usize,
    pub max_future: MaxFutureMode,
    pub update_policy: UpdatePolicy,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            alpha: 0.1,
            gamma: 0.9,
            lambda_entropy: 0.5,
            sim_threshold: 0.3,
            top_n: 5,
            base_reward_mode: BaseRewardMode::IndicatorMean,
            top_k_docs: 5,
            max_future: MaxFutureMode::Shared,
            update_policy: UpdatePolicy::Selected,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        check_rates(self.alpha, self.gamma)?;
        if !(self.lambda_entropy.is_finite() && self.lambda_entropy >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda_entropy must be >= 0, got {}",
                self.lambda_entropy
            )));
        }
        if !(0.0..=1.0).contains(&self.sim_threshold) {
            return Err(Error::InvalidParameter(format!(
                "sim_threshold must lie in [0, 1], got {}",
                self.sim_threshold
            )));
        }
        if self.top_n == 0 {
            return Err(Error::InvalidParameter("top_n must be >= 1".into()));
        }
        if self.top_k_docs == 0 {
            return Err(Error::InvalidParameter("top_k_docs must be >= 1".into()));
        }
        Ok(())
    }
}

fn check_rates(alpha: f64, gamma: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in [0, 1), got {gamma}"
        )));
    }
    Ok(())
}

/// Weighted sum of the bundle's per-topic fields.
pub fn approximate_reward(
    bundle: &MetricsBundle,
    topic: usize,
    coeffs: &RewardCoefficients,
) -> f64 {
    let sim = bundle.corresponding_similarity[topic];
    let similarity = if coeffs.use_divergence {
        1.0 - sim
    } else {
        sim
    };
    let entropy = match coeffs.entropy_term {
        EntropyTerm::Delta => bundle.entropy_delta[topic],
        EntropyTerm::Absolute => bundle.entropy_new[topic],
    };
    coeffs.lambda1 * bundle.magnitude[topic]
        + coeffs.lambda2 * similarity
        + coeffs.lambda3 * entropy
        + coeffs.lambda4 * bundle.adns[topic]
}

/// `(1 - alpha) q + alpha (reward + gamma max_future_q)` with range checks.
pub fn q_update(
    q_current: f64,
    reward: f64,
    max_future_q: f64,
    alpha: f64,
    gamma: f64,
) -> Result<f64> {
    if ![q_current, reward, max_future_q, alpha, gamma]
        .iter()
        .all(|x| x.is_finite())
    {
        return Err(Error::NonFinite("q_update input"));
    }
    check_rates(alpha, gamma)?;
    Ok(q_update_unchecked(
        q_current,
        reward,
        max_future_q,
        alpha,
        gamma,
    ))
}

/// The update formula without input validation.
pub fn q_update_unchecked(
    q_current: f64,
    reward: f64,
    max_future_q: f64,
    alpha: f64,
    gamma: f64,
) -> f64 {
    (1.0 - alpha) * q_current + alpha * (reward + gamma * max_future_q)
}

/// `base + lambda * entropy`.
pub fn modified_reward(base: f64, entropy_new_topic: f64, lambda_entropy: f64) -> f64 {
    base + lambda_entropy * entropy_new_topic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QHistoryEntry {
    pub iteration: usize,
    pub label: String,
    pub reward: f64,
    pub max_future_q: f64,
    pub q_before: f64,
    pub q_after: f64,
}

/// Q-values keyed by topic label, plus an append-only update log.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub q: BTreeMap<String, f64>,
    pub history: Vec<QHistoryEntry>,
}

impl QTable {
    pub fn from_values<I, S>(values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut q = BTreeMap::new();
        for (label, v) in values {
            if !v.is_finite() {
                return Err(Error::NonFinite("Q-value"));
            }
            q.insert(label.into(), v);
        }
        Ok(QTable {
            q,
            history: Vec::new(),
        })
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.q.get(label).copied()
    }

    /// Apply one update and log it.
    pub fn update(
        &mut self,
        iteration: usize,
        label: &str,
        reward: f64,
        max_future_q: f64,
        alpha: f64,
        gamma: f64,
    ) -> Result<f64> {
        let before = self
            .get(label)
            .ok_or_else(|| Error::NotFound(format!("topic {label} is not in the Q-table")))?;
        let after = q_update(before, reward, max_future_q, alpha, gamma)?;
        self.q.insert(label.to_string(), after);
        self.history.push(QHistoryEntry {
            iteration,
            label: label.to_string(),
            reward,
            max_future_q,
            q_before: before,
            q_after: after,
        });
        Ok(after)
    }
}

/// Q-values start at each topic's row norm.
pub fn init_qtable(model: &TopicModel) -> QTable {
    QTable {
        q: model
            .labels()
            .iter()
            .zip(model.rows())
            .map(|(l, r)| (l.clone(), magnitude(r)))
            .collect(),
        history: Vec::new(),
    }
}

/// Labels by value descending, ties by label, truncated to `top_n`.
pub fn rank_labels(values: &BTreeMap<String, f64>, top_n: usize) -> Vec<String> {
    let mut all: Vec<(&String, f64)> = values.iter().map(|(l, v)| (l, *v)).collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    all.into_iter()
        .take(top_n)
        .map(|(l, _)| l.clone())
        .collect()
}

pub fn select_topics(q: &QTable, top_n: usize) -> Vec<String> {
    rank_labels(&q.q, top_n)
}

/// Cosine similarity of every validation document against every topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTopicMatrix {
    pub doc_ids: Vec<String>,
    pub topic_labels: Vec<String>,
    /// `[doc][topic]`
    pub sims: Vec<Vec<f64>>,
    /// Documents with no in-vocabulary tokens.
    pub degenerate: Vec<bool>,
}

impl DocTopicMatrix {
    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn column(&self, topic: usize) -> Vec<f64> {
        self.sims.iter().map(|row| row[topic]).collect()
    }

    /// Document indices sorted by similarity to `topic`, best first.
    pub fn ranked_docs(&self, topic: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.num_docs()).collect();
        idx.sort_by(|&a, &b| {
            self.sims[b][topic]
                .total_cmp(&self.sims[a][topic])
                .then(a.cmp(&b))
        });
        idx
    }

    /// Header `doc_id,<labels...>,degenerate`, one row per document.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut head = vec!["doc_id".to_string()];
        head.extend(self.topic_labels.iter().cloned());
        head.push("degenerate".into());
        w.write_record(&head)?;
        for (i, id) in self.doc_ids.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.sims[i].iter().map(f64::to_string));
            rec.push(self.degenerate[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<docsim>", e))?;
        Ok(())
    }

    pub fn read_csv(input: impl std::io::Read) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let head = r.headers()?.clone();
        if head.len() < 2
            || head.get(0) != Some("doc_id")
            || head.get(head.len() - 1) != Some("degenerate")
        {
            return Err(Error::Shape(
                "document matrix header must be doc_id,<labels>,degenerate".into(),
            ));
        }
        let topic_labels: Vec<String> = head
            .iter()
            .skip(1)
            .take(head.len() - 2)
            .map(str::to_string)
            .collect();
        let (mut doc_ids, mut sims, mut degenerate) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |m: String| Error::Parse {
                line: i + 2,
                message: m,
            };
            doc_ids.push(rec.get(0).unwrap_or_default().to_string());
            let row = (1..=topic_labels.len())
                .map(|j| {
                    rec.get(j)
                        .unwrap_or_default()
                        .parse::<f64>()
                        .map_err(|e| bad(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            sims.push(row);
            degenerate.push(
                rec.get(topic_labels.len() + 1)
                    .unwrap_or_default()
                    .parse::<bool>()
                    .map_err(|e| bad(e.to_string()))?,
            );
        }
        Ok(DocTopicMatrix {
            doc_ids,
            topic_labels,
            sims,
            degenerate,
        })
    }
}

/// Term-count vector of each document over the model vocabulary; tokens
/// outside it are dropped.
pub fn document_vectors(model: &TopicModel, docs: &Corpus) -> Vec<Vec<f64>> {
    let vocab = model.vocabulary();
    docs.tokens()
        .iter()
        .map(|tokens| {
            let mut v = vec![0.0; vocab.len()];
            for t in tokens {
                if let Some(i) = vocab.index_of(t) {
                    v[i] += 1.0;
                }
            }
            v
        })
        .collect()
}

pub fn doc_topic_similarity(model: &TopicModel, docs: &Corpus) -> DocTopicMatrix {
    let vectors = document_vectors(model, docs);
    let mut degenerate = Vec::with_capacity(vectors.len());
    let sims = vectors
        .iter()
        .map(|dv| {
            let empty = dv.iter().all(|&x| x == 0.0);
            degenerate.push(empty);
            model
                .rows()
                .iter()
                .map(|row| cosine_similarity(dv, row).value.clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    DocTopicMatrix {
        doc_ids: docs.documents().iter().map(|d| d.id.clone()).collect(),
        topic_labels: model.labels().to_vec(),
        sims,
        degenerate,
    }
}

/// Validation reward for one topic from its document similarities.
pub fn base_reward(topic: usize, matrix: &DocTopicMatrix, config: &AgentConfig) -> f64 {
    let col = matrix.column(topic);
    if col.is_empty() {
        return 0.0;
    }
    let t = config.sim_threshold;
    match config.base_reward_mode {
        BaseRewardMode::IndicatorMean => {
            col.iter().filter(|&&s| s > t).count() as f64 / col.len() as f64
        }
        BaseRewardMode::ThresholdedMean => {
            let above: Vec<f64> = col.into_iter().filter(|&s| s > t).collect();
            if above.is_empty() {
                0.0
            } else {
                above.iter().sum::<f64>() / above.len() as f64
            }
        }
        BaseRewardMode::TopKMean => {
            let mut sorted = col;
            sorted.sort_by(|a, b| b.total_cmp(a));
            sorted.truncate(config.top_k_docs);
            sorted.iter().sum::<f64>() / sorted.len() as f64
        }
    }
}

/// Max-future value for the update. `Shared` returns the same number for every
/// topic; `PerTopic` returns that topic's best document similarity.
pub fn max_future_q(matrix: &DocTopicMatrix, config: &AgentConfig) -> Vec<f64> {
    let k = matrix.topic_labels.len();
    match config.max_future {
        MaxFutureMode::Shared => {
            let best = (0..k)
                .map(|t| base_reward(t, matrix, config))
                .fold(0.0, f64::max);
            vec![best; k]
        }
        MaxFutureMode::PerTopic => (0..k)
            .map(|t| matrix.column(t).into_iter().fold(0.0, f64::max))
            .collect(),
    }
}

/// Everything a parameter sweep needs, captured before any update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepInputs {
    pub labels: Vec<String>,
    pub q_before: Vec<f64>,
    pub base_rewards: Vec<f64>,
    pub entropy_new: Vec<f64>,
    pub max_future_q: Vec<f64>,
    pub gamma: f64,
    pub top_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub labels: Vec<String>,
    /// (alpha, lambda) per column, alpha-major.
    pub pairs: Vec<(f64, f64)>,
    /// `[topic][pair]`
    pub q_after: Vec<Vec<f64>>,
    /// Top-n labels per pair.
    pub selected: Vec<Vec<String>>,
}

impl SweepReport {
    pub fn column_name(pair: (f64, f64)) -> String {
        format!("({}, {})", pair.0, pair.1)
    }

    pub fn is_selected(&self, topic: usize, pair: usize) -> bool {
        self.selected[pair].contains(&self.labels[topic])
    }

    /// Topic rows, one column per pair; cells outside that pair's top-n are blank.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut head = vec!["label".to_string()];
        head.extend(self.pairs.iter().map(|&p| Self::column_name(p)));
        w.write_record(&head)?;
        for (t, label) in self.labels.iter().enumerate() {
            let mut rec = vec![label.clone()];
            for p in 0..self.pairs.len() {
                rec.push(if self.is_selected(t, p) {
                    self.q_after[t][p].to_string()
                } else {
                    String::new()
                });
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<sweep>", e))?;
        Ok(())
    }
}

/// Recompute modified rewards and Q-updates for every (alpha, lambda) pair of
/// the grid, each from the same pre-update state.
pub fn parameter_sweep(
    inputs: &SweepInputs,
    alphas: &[f64],
    lambdas: &[f64],
) -> Result<SweepReport> {
    let pairs: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| lambdas.iter().map(move |&l| (a, l)))
        .collect();
    parameter_sweep_pairs(inputs, &pairs)
}

/// Sweep over an explicit list of (alpha, lambda) pairs.
pub fn parameter_sweep_pairs(inputs: &SweepInputs, pairs: &[(f64, f64)]) -> Result<SweepReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep grids must be non-empty".into(),
        ));
    }
    let k = inputs.labels.len();
    for v in [
        &inputs.q_before,
        &inputs.base_rewards,
        &inputs.entropy_new,
        &inputs.max_future_q,
    ] {
        if v.len() != k {
            return Err(Error::Shape(format!(
                "sweep input has {} values for {k} topics",
                v.len()
            )));
        }
    }
    for &(_, l) in pairs {
        if !(l.is_finite() && l >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be >= 0, got {l}"
            )));
        }
    }
    let columns: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(alpha, lambda)| {
            (0..k)
                .map(|t| {
                    let reward =
                        modified_reward(inputs.base_rewards[t], inputs.entropy_new[t], lambda);
                    q_update(
                        inputs.q_before[t],
                        reward,
                        inputs.max_future_q[t],
                        alpha,
                        inputs.gamma,
                    )
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let selected = columns
        .iter()
        .map(|col: &Vec<f64>| {
            let values = inputs
                .labels
                .iter()
                .cloned()
                .zip(col.iter().copied())
                .collect();
            rank_labels(&values, inputs.top_n)
        })
        .collect();
    let q_after = (0..k)
        .map(|t| columns.iter().map(|c| c[t]).collect())
        .collect();
    Ok(SweepReport {
        labels: inputs.labels.clone(),
        pairs: pairs.to_vec(),
        q_after,
        selected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedReward {
    pub label: String,
    pub modified_reward: f64,
}

/// Externally supplied modified rewards for one iteration, e.g. from a
/// previously published run, used instead of document validation. The listed
/// topics are the ones updated, in the listed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedRewards {
    pub label: String,
    pub max_future_q: f64,
    pub rewards: Vec<PublishedReward>,
}
