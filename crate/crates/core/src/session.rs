//! The iteration loop as a state machine.
//!
//! ```text
//! awaiting_aspect --run_iteration--> awaiting_decision --record_decision--> awaiting_aspect | ended
//! ```
//!
//! The session starts from a baseline model named `CTP1`. Iteration `n` applies
//! an aspect to the current model and names the result `CTP{n+1}`; a continue
//! decision promotes it to the current model.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{
    approximate_reward, base_reward, doc_topic_similarity, init_qtable, max_future_q,
    modified_reward, q_update, rank_labels, AgentConfig, DocTopicMatrix, PublishedRewards, QTable,
    RewardCoefficients, SweepInputs, UpdatePolicy,
};
use crate::aspect::AspectKeywords;
use crate::corpus::{Corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::metrics::{compare_models_with_base, LogBase, MetricsBundle};
use crate::topics::{
    fit_lda, read_model, split_topics, write_model, ApplyAspectOptions, LdaParams, TopicModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    AwaitingAspect,
    AwaitingDecision,
    /// Reported by servers while an iteration is in flight; never persisted.
    Running,
    Ended,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::AwaitingAspect => "awaiting_aspect",
            Status::AwaitingDecision => "awaiting_decision",
            Status::Running => "running",
            Status::Ended => "ended",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub agent: AgentConfig,
    pub reward_coeffs: RewardCoefficients,
    pub apply_aspect: ApplyAspectOptions,
    pub log_base: LogBase,
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        self.agent.validate()?;
        self.reward_coeffs.validate()?;
        if !(self.apply_aspect.retain_factor.is_finite() && self.apply_aspect.retain_factor >= 0.0)
        {
            return Err(Error::InvalidParameter("retain_factor must be >= 0".into()));
        }
        Ok(())
    }
}

/// Refine the baseline into `total_subtopics` subtopics before the loop starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub total_subtopics: usize,
    #[serde(default)]
    pub sub_params: LdaParams,
}

/// Where an iteration's rewards came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardSource {
    Documents,
    Published,
}

/// How an iteration is validated.
#[derive(Debug, Clone, PartialEq)]
pub enum Validation {
    /// Score topics against a preprocessed document set.
    Documents { label: String, corpus: Corpus },
    /// Take modified rewards as given.
    Published(PublishedRewards),
}

impl Validation {
    pub fn documents(label: impl Into<String>, corpus: Corpus) -> Self {
        Validation::Documents {
            label: label.into(),
            corpus,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Validation::Documents { label, .. } => label,
            Validation::Published(p) => &p.label,
        }
    }
}

/// Everything computed for one topic in one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRewards {
    pub label: String,
    pub q_before: f64,
    pub approx_reward: f64,
    pub provisional_q: f64,
    pub base_reward: Option<f64>,
    pub modified_reward: Option<f64>,
    pub max_future_q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QDelta {
    pub label: String,
    pub before: f64,
    pub after: f64,
}

impl QDelta {
    pub fn delta(&self) -> f64 {
        self.after - self.before
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub aspect_label: String,
    pub validation_label: String,
    pub reward_source: RewardSource,
    /// Model the aspect was applied to.
    pub source_model: String,
    /// Model produced by this iteration.
    pub model: String,
    pub bundle: MetricsBundle,
    pub selected_topics: Vec<String>,
    /// One entry per topic, in model label order.
    pub topics: Vec<TopicRewards>,
    /// Exactly the topics whose Q-value was updated.
    pub q_updates: Vec<QDelta>,
    pub novelty_flag: bool,
    pub expert_notes: String,
    #[serde(skip)]
    pub doc_matrix: Option<DocTopicMatrix>,
}

impl IterationRecord {
    pub fn topic(&self, label: &str) -> Option<&TopicRewards> {
        self.topics.iter().find(|t| t.label == label)
    }

    pub fn q_update(&self, label: &str) -> Option<&QDelta> {
        self.q_updates.iter().find(|u| u.label == label)
    }

    pub fn max_abs_delta(&self) -> f64 {
        self.q_updates
            .iter()
            .map(|u| u.delta().abs())
            .fold(0.0, f64::max)
    }

    /// Pre-update state for a parameter sweep over this iteration.
    pub fn sweep_inputs(&self, config: &AgentConfig) -> Result<SweepInputs> {
        if self.reward_source != RewardSource::Documents {
            return Err(Error::InvalidState(format!(
                "iteration {} used published rewards; a sweep needs document-validated rewards",
                self.index
            )));
        }
        let pick = |f: fn(&TopicRewards) -> Option<f64>| -> Result<Vec<f64>> {
            self.topics
                .iter()
                .map(|t| {
                    f(t).ok_or_else(|| Error::Corrupt {
                        path: PathBuf::new(),
                        message: format!("topic {} lacks rewards", t.label),
                    })
                })
                .collect()
        };
        Ok(SweepInputs {
            labels: self.topics.iter().map(|t| t.label.clone()).collect(),
            q_before: self.topics.iter().map(|t| t.q_before).collect(),
            base_rewards: pick(|t| t.base_reward)?,
            entropy_new: self.bundle.entropy_new.clone(),
            max_future_q: pick(|t| t.max_future_q)?,
            gamma: config.gamma,
            top_n: config.top_n,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub id: String,
    pub corpus_ref: String,
    pub created_at: u64,
    pub status: Status,
    pub config: SessionConfig,
    pub vocabulary: Arc<Vocabulary>,
    pub models: BTreeMap<String, TopicModel>,
    pub ctp1: String,
    pub ctp2: Option<String>,
    pub qtable: QTable,
    pub iterations: Vec<IterationRecord>,
    pub staged_aspect: Option<AspectKeywords>,
}

impl SessionState {
    /// Start a session from an existing baseline model and Q-table.
    pub fn from_model(
        id: impl Into<String>,
        corpus_ref: impl Into<String>,
        model: TopicModel,
        qtable: QTable,
        config: SessionConfig,
    ) -> Result<Self> {
        config.validate()?;
        for label in model.labels() {
            if qtable.get(label).is_none() {
                return Err(Error::Shape(format!(
                    "Q-table has no entry for topic {label}"
                )));
            }
        }
        let model = model.with_id("CTP1");
        let mut models = BTreeMap::new();
        let vocabulary = model.vocabulary().clone();
        models.insert("CTP1".to_string(), model);
        Ok(SessionState {
            id: id.into(),
            corpus_ref: corpus_ref.into(),
            created_at: now(),
            status: Status::AwaitingAspect,
            config,
            vocabulary,
            models,
            ctp1: "CTP1".into(),
            ctp2: None,
            qtable,
            iterations: Vec::new(),
            staged_aspect: None,
        })
    }

    pub fn current_model(&self) -> &TopicModel {
        &self.models[&self.ctp1]
    }

    pub fn pending_model(&self) -> Option<&TopicModel> {
        self.ctp2.as_ref().map(|id| &self.models[id])
    }

    pub fn model(&self, id: &str) -> Result<&TopicModel> {
        self.models
            .get(id)
            .ok_or_else(|| Error::NotFound(format!("model {id}")))
    }

    pub fn iteration(&self, index: usize) -> Result<&IterationRecord> {
        index
            .checked_sub(1)
            .and_then(|i| self.iterations.get(i))
            .ok_or_else(|| Error::NotFound(format!("iteration {index}")))
    }

    pub fn last_iteration(&self) -> Option<&IterationRecord> {
        self.iterations.last()
    }

    /// Model ids from the current model back to the baseline.
    pub fn lineage_chain(&self) -> Vec<String> {
        let mut chain = vec![self.ctp1.clone()];
        let mut cur = self.current_model();
        while let Some(l) = cur.lineage() {
            chain.push(l.parent.clone());
            match self.models.get(&l.parent) {
                Some(m) => cur = m,
                None => break,
            }
        }
        chain
    }

    fn expect_status(&self, expected: Status, op: &str) -> Result<()> {
        if self.status == expected {
            Ok(())
        } else {
            Err(Error::InvalidState(format!(
                "{op} needs status {expected}, session is {}",
                self.status
            )))
        }
    }

    /// Stage an aspect for the next iteration.
    pub fn stage_aspect(&mut self, aspect: AspectKeywords) -> Result<()> {
        self.expect_status(Status::AwaitingAspect, "staging an aspect")?;
        self.staged_aspect = Some(aspect);
        Ok(())
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Fit the baseline (flat, or split per `split`) and seed the Q-table from its
/// row norms.
pub fn create_session(
    id: impl Into<String>,
    corpus_ref: impl Into<String>,
    corpus: &Corpus,
    lda: &LdaParams,
    split: Option<&SplitPlan>,
    config: SessionConfig,
) -> Result<SessionState> {
    config.validate()?;
    let (model, assignment) = fit_lda(corpus, lda)?;
    let model = match split {
        None => model,
        Some(plan) => split_topics(
            &model,
            &assignment,
            corpus,
            plan.total_subtopics,
            &plan.sub_params,
            lda.seed,
        )?,
    };
    let q = init_qtable(&model);
    SessionState::from_model(id, corpus_ref, model, q, config)
}

/// One pass: apply the aspect, compare, pre-rank, validate, update.
pub fn run_iteration(
    state: &mut SessionState,
    aspect: Option<&AspectKeywords>,
    validation: &Validation,
) -> Result<IterationRecord> {
    state.expect_status(Status::AwaitingAspect, "run_iteration")?;
    let aspect = match aspect.or(state.staged_aspect.as_ref()) {
        Some(a) => a.clone(),
        None => return Err(Error::InvalidState("no aspect supplied or staged".into())),
    };
    if let Validation::Documents { corpus, .. } = validation {
        if corpus.is_empty() {
            return Err(Error::EmptyValidation);
        }
        if !corpus.is_preprocessed() {
            return Err(Error::InvalidParameter(
                "validation corpus is not preprocessed".into(),
            ));
        }
    }
    let cfg = state.config;
    let agent = &cfg.agent;
    let index = state.iterations.len() + 1;
    let old = state.current_model();
    let new_id = format!("CTP{}", index + 1);
    let new = old
        .apply_aspect(&aspect, &cfg.apply_aspect)?
        .with_id(new_id.clone());
    let bundle = compare_models_with_base(old, &new, cfg.log_base)?;
    let labels = new.labels().to_vec();
    let k = labels.len();

    let q_before: Vec<f64> = labels
        .iter()
        .map(|l| {
            state
                .qtable
                .get(l)
                .ok_or_else(|| Error::Shape(format!("Q-table has no entry for topic {l}")))
        })
        .collect::<Result<_>>()?;
    let approx: Vec<f64> = (0..k)
        .map(|t| approximate_reward(&bundle, t, &cfg.reward_coeffs))
        .collect();
    let approx_max = approx.iter().copied().fold(0.0, f64::max);
    let provisional: Vec<f64> = (0..k)
        .map(|t| q_update(q_before[t], approx[t], approx_max, agent.alpha, agent.gamma))
        .collect::<Result<_>>()?;

    let mut topics: Vec<TopicRewards> = (0..k)
        .map(|t| TopicRewards {
            label: labels[t].clone(),
            q_before: q_before[t],
            approx_reward: approx[t],
            provisional_q: provisional[t],
            base_reward: None,
            modified_reward: None,
            max_future_q: None,
        })
        .collect();

    let (selected, targets, doc_matrix) = match validation {
        Validation::Documents { corpus, .. } => {
            let provisional_map = labels
                .iter()
                .cloned()
                .zip(provisional.iter().copied())
                .collect();
            let selected = rank_labels(&provisional_map, agent.top_n);
            let matrix = doc_topic_similarity(&new, corpus);
            let future = max_future_q(&matrix, agent);
            for (t, tr) in topics.iter_mut().enumerate() {
                let base = base_reward(t, &matrix, agent);
                tr.base_reward = Some(base);
                tr.modified_reward = Some(modified_reward(
                    base,
                    bundle.entropy_new[t],
                    agent.lambda_entropy,
                ));
                tr.max_future_q = Some(future[t]);
            }
            let targets = match agent.update_policy {
                UpdatePolicy::Selected => selected.clone(),
                UpdatePolicy::All => labels.clone(),
            };
            (selected, targets, Some(matrix))
        }
        Validation::Published(p) => {
            let mut selected = Vec::new();
            for r in &p.rewards {
                let tr = topics
                    .iter_mut()
                    .find(|t| t.label == r.label)
                    .ok_or_else(|| {
                        Error::NotFound(format!("published topic {} is not in the model", r.label))
                    })?;
                tr.modified_reward = Some(r.modified_reward);
                tr.max_future_q = Some(p.max_future_q);
                selected.push(r.label.clone());
            }
            (selected.clone(), selected, None)
        }
    };

    let mut qtable = state.qtable.clone();
    let mut q_updates = Vec::with_capacity(targets.len());
    for label in &targets {
        let tr = topics
            .iter()
            .find(|t| &t.label == label)
            .expect("target is a model topic");
        let (reward, future) = (tr.modified_reward.unwrap(), tr.max_future_q.unwrap());
        let before = tr.q_before;
        let after = qtable.update(index, label, reward, future, agent.alpha, agent.gamma)?;
        q_updates.push(QDelta {
            label: label.clone(),
            before,
            after,
        });
    }

    let record = IterationRecord {
        index,
        aspect_label: aspect.label.clone(),
        validation_label: validation.label().to_string(),
        reward_source: match validation {
            Validation::Documents { .. } => RewardSource::Documents,
            Validation::Published(_) => RewardSource::Published,
        },
        source_model: state.ctp1.clone(),
        model: new_id.clone(),
        bundle,
        selected_topics: selected,
        topics,
        q_updates,
        novelty_flag: false,
        expert_notes: String::new(),
        doc_matrix,
    };
    tracing::info!(iteration = index, aspect = %record.aspect_label, selected = ?record.selected_topics, "iteration complete");

    state.qtable = qtable;
    state.models.insert(new_id.clone(), new);
    state.ctp2 = Some(new_id);
    state.staged_aspect = None;
    state.iterations.push(record.clone());
    state.status = Status::AwaitingDecision;
    Ok(record)
}

/// Stop ends the session and flags novelty on the last iteration; continue
/// promotes the pending model and optionally stages an edited aspect.
pub fn record_decision(
    state: &mut SessionState,
    continue_: bool,
    edited_aspect: Option<AspectKeywords>,
    notes: &str,
) -> Result<()> {
    state.expect_status(Status::AwaitingDecision, "record_decision")?;
    let last = state
        .iterations
        .last_mut()
        .expect("awaiting_decision implies an iteration");
    last.expert_notes = notes.to_string();
    if continue_ {
        state.ctp1 = state
            .ctp2
            .take()
            .expect("awaiting_decision implies a pending model");
        state.staged_aspect = edited_aspect;
        state.status = Status::AwaitingAspect;
    } else {
        last.novelty_flag = true;
        state.status = Status::Ended;
    }
    Ok(())
}

/// Run iterations without a human in the loop, always continuing, until the
/// lists run out, `max_iterations` is reached, or the largest Q change of an
/// iteration falls below `epsilon`. The session always ends.
pub fn autopilot(
    state: &mut SessionState,
    aspects: &[AspectKeywords],
    validations: &[Validation],
    max_iterations: usize,
    epsilon: f64,
) -> Result<()> {
    if aspects.is_empty() || aspects.len() != validations.len() {
        return Err(Error::InvalidParameter(format!(
            "need equal, non-empty aspect and validation lists, got {} and {}",
            aspects.len(),
            validations.len()
        )));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    if max_iterations == 0 {
        return Err(Error::InvalidParameter(
            "max_iterations must be >= 1".into(),
        ));
    }
    state.expect_status(Status::AwaitingAspect, "autopilot")?;
    let rounds = aspects.len().min(max_iterations);
    for i in 0..rounds {
        let record = run_iteration(state, Some(&aspects[i]), &validations[i])?;
        let converged = record.max_abs_delta() < epsilon;
        if i + 1 == rounds || converged {
            let why = if converged {
                format!(
                    "autopilot: max |dQ| {} below epsilon {epsilon}",
                    record.max_abs_delta()
                )
            } else {
                "autopilot: inputs exhausted".to_string()
            };
            return record_decision(state, false, None, &why);
        }
        record_decision(state, true, None, "autopilot: continue")?;
    }
    Ok(())
}

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    id: String,
    corpus_ref: String,
    created_at: u64,
    status: Status,
    config: SessionConfig,
    ctp1: String,
    ctp2: Option<String>,
    models: Vec<String>,
    iterations: usize,
    staged_aspect: Option<AspectKeywords>,
    /// Relative path -> sha256 hex.
    files: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn to_json(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// Write the session under `dir`; returns the manifest path.
pub fn save_session(state: &SessionState, dir: &Path) -> Result<PathBuf> {
    if state.status == Status::Running {
        return Err(Error::InvalidState("cannot save a running session".into()));
    }
    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    files.insert(
        "vocabulary.json".into(),
        to_json(state.vocabulary.as_ref())?,
    );
    for (id, model) in &state.models {
        let (mut header, mut matrix) = (Vec::new(), Vec::new());
        write_model(model, &mut header, &mut matrix)?;
        header.push(b'\n');
        files.insert(format!("models/{id}.json"), header);
        files.insert(format!("models/{id}.csv"), matrix);
    }
    files.insert("qtable.json".into(), to_json(&state.qtable)?);
    for rec in &state.iterations {
        files.insert(format!("iterations/{}.json", rec.index), to_json(rec)?);
        if let Some(m) = &rec.doc_matrix {
            let mut buf = Vec::new();
            m.write_csv(&mut buf)?;
            files.insert(format!("matrices/{}_docsim.csv", rec.index), buf);
        }
    }
    for sub in ["models", "iterations", "matrices"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let mut hashes = BTreeMap::new();
    for (rel, bytes) in &files {
        let p = dir.join(rel);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        hashes.insert(rel.clone(), sha256_hex(bytes));
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        id: state.id.clone(),
        corpus_ref: state.corpus_ref.clone(),
        created_at: state.created_at,
        status: state.status,
        config: state.config,
        ctp1: state.ctp1.clone(),
        ctp2: state.ctp2.clone(),
        models: state.models.keys().cloned().collect(),
        iterations: state.iterations.len(),
        staged_aspect: state.staged_aspect.clone(),
        files: hashes,
    };
    let path = dir.join("manifest.json");
    let tmp = dir.join("manifest.json.tmp");
    fs::write(&tmp, to_json(&manifest)?).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Load a saved session, checking every file against the manifest hashes.
pub fn load_session(dir: &Path) -> Result<SessionState> {
    let manifest_path = dir.join("manifest.json");
    let raw = fs::read(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_slice(&raw).map_err(|e| Error::Corrupt {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::Corrupt {
            path: manifest_path,
            message: format!("unsupported format version {}", manifest.format_version),
        });
    }
    let read = |rel: &str| -> Result<Vec<u8>> {
        let p = dir.join(rel);
        let expected = manifest.files.get(rel).ok_or_else(|| Error::Corrupt {
            path: manifest_path.clone(),
            message: format!("no hash recorded for {rel}"),
        })?;
        let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
        let actual = sha256_hex(&bytes);
        if &actual != expected {
            return Err(Error::HashMismatch {
                path: p,
                expected: expected.clone(),
                actual,
            });
        }
        Ok(bytes)
    };
    let corrupt = |rel: &str, e: Error| Error::Corrupt {
        path: dir.join(rel),
        message: e.to_string(),
    };

    let vocabulary: Arc<Vocabulary> = Arc::new(
        serde_json::from_slice(&read("vocabulary.json")?)
            .map_err(|e| corrupt("vocabulary.json", e.into()))?,
    );
    let mut models = BTreeMap::new();
    for id in &manifest.models {
        let (h, c) = (format!("models/{id}.json"), format!("models/{id}.csv"));
        let model = read_model(&read(&h)?[..], &read(&c)?[..], vocabulary.clone())
            .map_err(|e| corrupt(&c, e))?;
        models.insert(id.clone(), model);
    }
    for id in std::iter::once(&manifest.ctp1).chain(manifest.ctp2.as_ref()) {
        if !models.contains_key(id) {
            return Err(Error::Corrupt {
                path: manifest_path.clone(),
                message: format!("model {id} is not listed"),
            });
        }
    }
    let qtable: QTable = serde_json::from_slice(&read("qtable.json")?)
        .map_err(|e| corrupt("qtable.json", e.into()))?;
    let mut iterations = Vec::with_capacity(manifest.iterations);
    for n in 1..=manifest.iterations {
        let rel = format!("iterations/{n}.json");
        let mut rec: IterationRecord =
            serde_json::from_slice(&read(&rel)?).map_err(|e| corrupt(&rel, e.into()))?;
        if rec.index != n {
            return Err(Error::Corrupt {
                path: dir.join(&rel),
                message: format!("record index {} in slot {n}", rec.index),
            });
        }
        let mrel = format!("matrices/{n}_docsim.csv");
        if manifest.files.contains_key(&mrel) {
            rec.doc_matrix =
                Some(DocTopicMatrix::read_csv(&read(&mrel)?[..]).map_err(|e| corrupt(&mrel, e))?);
        }
        iterations.push(rec);
    }
    Ok(SessionState {
        id: manifest.id,
        corpus_ref: manifest.corpus_ref,
        created_at: manifest.created_at,
        status: manifest.status,
        config: manifest.config,
        vocabulary,
        models,
        ctp1: manifest.ctp1,
        ctp2: manifest.ctp2,
        qtable,
        iterations,
        staged_aspect: manifest.staged_aspect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::magnitude;

    fn corpus() -> Corpus {
        let mut docs = Vec::new();
        for i in 0..30 {
            docs.push(match i % 3 {
                0 => vec!["photon", "laser", "optic", "fiber", "photon"],
                1 => vec!["key", "secur", "protocol", "key", "attack"],
                _ => vec!["qubit", "gate", "circuit", "qubit", "nois"],
            });
        }
        Corpus::from_tokens(&docs)
    }

    fn params() -> LdaParams {
        LdaParams {
            k: 3,
            iterations: 60,
            alpha: Some(0.1),
            seed: 7,
            ..Default::default()
        }
    }

    fn config() -> SessionConfig {
        let mut c = SessionConfig::default();
        c.agent.top_n = 2;
        c
    }

    fn aspect(label: &str) -> AspectKeywords {
        AspectKeywords::new(
            label,
            vec![
                ("key".into(), 1.0),
                ("photon".into(), 0.5),
                ("qubit".into(), 0.25),
            ],
        )
        .unwrap()
    }

    fn validation() -> Validation {
        Validation::documents(
            "val",
            Corpus::from_tokens(&[vec!["key", "secur"], vec!["photon", "fiber"], vec!["zzz"]]),
        )
    }

    #[test]
    fn qtable_starts_at_row_norms() {
        let s = create_session("s", "c", &corpus(), &params(), None, config()).unwrap();
        let m = s.current_model();
        assert_eq!(s.qtable.q.len(), 3);
        for (l, r) in m.labels().iter().zip(m.rows()) {
            assert_eq!(s.qtable.get(l), Some(magnitude(r)));
        }
        assert_eq!(s.status, Status::AwaitingAspect);
        assert!(s.ctp2.is_none());
    }

    #[test]
    fn guards() {
        let mut s = create_session("s", "c", &corpus(), &params(), None, config()).unwrap();
        assert!(matches!(
            run_iteration(&mut s, None, &validation()),
            Err(Error::InvalidState(_))
        ));
        assert!(record_decision(&mut s, true, None, "").is_err());
        let empty = Validation::documents("v", Corpus::from_tokens::<&str>(&[]));
        assert!(matches!(
            run_iteration(&mut s, Some(&aspect("a")), &empty),
            Err(Error::EmptyValidation)
        ));
        run_iteration(&mut s, Some(&aspect("a")), &validation()).unwrap();
        assert!(run_iteration(&mut s, Some(&aspect("a")), &validation()).is_err());
        record_decision(&mut s, false, None, "done").unwrap();
        assert_eq!(s.status, Status::Ended);
        assert!(s.iterations[0].novelty_flag);
        assert!(record_decision(&mut s, false, None, "").is_err());
        assert!(run_iteration(&mut s, Some(&aspect("a")), &validation()).is_err());
    }

    #[test]
    fn continue_promotes_and_stages() {
        let mut s = create_session("s", "c", &corpus(), &params(), None, config()).unwrap();
        let rec = run_iteration(&mut s, Some(&aspect("first")), &validation()).unwrap();
        assert!(rec.selected_topics.len() <= 2);
        let unselected: Vec<_> = s
            .current_model()
            .labels()
            .iter()
            .filter(|l| !rec.selected_topics.contains(l))
            .cloned()
            .collect();
        for l in &unselected {
            assert_eq!(s.qtable.get(l), Some(rec.topic(l).unwrap().q_before));
        }
        record_decision(&mut s, true, Some(aspect("edited")), "more").unwrap();
        assert_eq!(s.ctp1, "CTP2");
        let rec2 = run_iteration(&mut s, None, &validation()).unwrap();
        assert_eq!(rec2.aspect_label, "edited");
        record_decision(&mut s, true, None, "").unwrap();
        assert_eq!(s.lineage_chain(), ["CTP3", "CTP2", "CTP1"]);
    }

    #[test]
    fn frozen_learning() {
        let mut cfg = config();
        cfg.agent.alpha = 1e-9;
        cfg.agent.lambda_entropy = 0.0;
        cfg.agent.update_policy = UpdatePolicy::All;
        let mut s = create_session("s", "c", &corpus(), &params(), None, cfg).unwrap();
        let rec = run_iteration(&mut s, Some(&aspect("a")), &validation()).unwrap();
        assert_eq!(rec.q_updates.len(), 3);
        for u in &rec.q_updates {
            assert!((u.after - u.before).abs() < 1e-6);
        }
    }

    #[test]
    fn autopilot_stops() {
        let mut s = create_session("s", "c", &corpus(), &params(), None, config()).unwrap();
        autopilot(
            &mut s,
            &[aspect("a"), aspect("b")],
            &[validation(), validation()],
            10,
            0.0,
        )
        .unwrap();
        assert_eq!(s.iterations.len(), 2);
        assert_eq!(s.status, Status::Ended);

        let mut s = create_session("s", "c", &corpus(), &params(), None, config()).unwrap();
        autopilot(
            &mut s,
            &[aspect("a"), aspect("b")],
            &[validation(), validation()],
            10,
            1e9,
        )
        .unwrap();
        assert_eq!(s.iterations.len(), 1);

        let mut s = create_session("s", "c", &corpus(), &params(), None, config()).unwrap();
        assert!(autopilot(&mut s, &[aspect("a")], &[], 10, 0.0).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = create_session("s", "c", &corpus(), &params(), None, config()).unwrap();
        run_iteration(&mut s, Some(&aspect("a")), &validation()).unwrap();
        save_session(&s, dir.path()).unwrap();
        assert_eq!(load_session(dir.path()).unwrap(), s);

        fs::write(
            dir.path().join("matrices/1_docsim.csv"),
            "doc_id,degenerate\n",
        )
        .unwrap();
        assert!(matches!(
            load_session(dir.path()),
            Err(Error::HashMismatch { .. })
        ));

        let missing = dir.path().join("nowhere");
        let err = load_session(&missing).unwrap_err().to_string();
        assert!(err.contains("manifest.json"), "{err}");
    }
}
