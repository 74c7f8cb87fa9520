//! Tabular exports: the data behind heatmaps, word clouds, Q charts and the
//! keyword comparison plots. Every report is a [`Table`] that renders to CSV
//! or JSON with the same cells.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::agent::{DocTopicMatrix, SweepReport};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::metrics::MetricsBundle;
use crate::session::SessionState;
use crate::topics::TopicModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(x) => x.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    /// Inverse of the CSV rendering.
    fn from_csv(s: &str) -> Cell {
        if s.is_empty() {
            Cell::Empty
        } else if let Ok(b) = s.parse::<bool>() {
            Cell::Bool(b)
        } else if let Ok(x) = s.parse::<f64>() {
            Cell::Num(x)
        } else {
            Cell::Text(s.to_string())
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidParameter(format!("unknown format {other:?}"))),
        }
    }
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::io("<table>", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(Cell::from_csv).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Table { columns, rows })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Union of each topic's top words against all topic labels. Rows are ordered
/// by summed weight across topics, descending, then by term.
pub fn export_model_heatmap(model: &TopicModel, top_words_per_topic: usize) -> Table {
    let mut table =
        Table::new(std::iter::once("term".to_string()).chain(model.labels().iter().cloned()));
    if top_words_per_topic == 0 {
        tracing::warn!("top_words_per_topic = 0 gives an empty heatmap");
        return table;
    }
    let vocab = model.vocabulary();
    let terms: BTreeSet<String> = (0..model.num_topics())
        .flat_map(|t| {
            model
                .top_words(t, top_words_per_topic)
                .into_iter()
                .map(|(w, _)| w)
        })
        .collect();
    let mut rows: Vec<(String, Vec<f64>, f64)> = terms
        .into_iter()
        .map(|term| {
            let j = vocab
                .index_of(&term)
                .expect("top word is in the vocabulary");
            let cells: Vec<f64> = model.rows().iter().map(|r| r[j]).collect();
            let total = cells.iter().sum();
            (term, cells, total)
        })
        .collect();
    rows.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
    for (term, cells, _) in rows {
        let mut row = vec![Cell::Text(term)];
        row.extend(cells.into_iter().map(Cell::Num));
        table.push(row);
    }
    table
}

/// Per-topic bundle fields followed by the similarity row against every new topic.
pub fn export_comparison_bundle(bundle: &MetricsBundle) -> Table {
    let fixed = [
        "label",
        "magnitude",
        "corresponding_similarity",
        "adns",
        "entropy_old",
        "entropy_new",
        "entropy_delta",
        "degenerate",
    ];
    let mut table = Table::new(
        fixed
            .iter()
            .map(|s| s.to_string())
            .chain(bundle.labels.iter().cloned()),
    );
    for i in 0..bundle.num_topics() {
        let mut row: Vec<Cell> = vec![
            bundle.labels[i].as_str().into(),
            bundle.magnitude[i].into(),
            bundle.corresponding_similarity[i].into(),
            bundle.adns[i].into(),
            bundle.entropy_old[i].into(),
            bundle.entropy_new[i].into(),
            bundle.entropy_delta[i].into(),
            bundle.degenerate[i].into(),
        ];
        row.extend(bundle.similarity_matrix[i].iter().map(|&x| Cell::Num(x)));
        table.push(row);
    }
    table
}

pub fn export_doc_matrix(matrix: &DocTopicMatrix) -> Table {
    let mut table = Table::new(
        std::iter::once("doc_id".to_string())
            .chain(matrix.topic_labels.iter().cloned())
            .chain(std::iter::once("degenerate".to_string())),
    );
    for (i, id) in matrix.doc_ids.iter().enumerate() {
        let mut row = vec![Cell::Text(id.clone())];
        row.extend(matrix.sims[i].iter().map(|&x| Cell::Num(x)));
        row.push(matrix.degenerate[i].into());
        table.push(row);
    }
    table
}

/// Topic rows, one column per (alpha, lambda) pair; blank outside each pair's top-n.
pub fn export_sweep(report: &SweepReport) -> Table {
    let mut table = Table::new(
        std::iter::once("label".to_string())
            .chain(report.pairs.iter().map(|&p| SweepReport::column_name(p))),
    );
    for (t, label) in report.labels.iter().enumerate() {
        let mut row = vec![Cell::Text(label.clone())];
        for p in 0..report.pairs.len() {
            row.push(if report.is_selected(t, p) {
                Cell::Num(report.q_after[t][p])
            } else {
                Cell::Empty
            });
        }
        table.push(row);
    }
    table
}

/// One row per topic per iteration in `range`.
pub fn q_report(state: &SessionState, range: RangeInclusive<usize>) -> Result<Table> {
    let mut table = Table::new([
        "iteration",
        "label",
        "q_before",
        "approx_reward",
        "provisional_q",
        "base_reward",
        "modified_reward",
        "max_future_q",
        "q_after",
        "selected",
    ]);
    for n in range {
        let rec = state.iteration(n)?;
        for t in &rec.topics {
            let after = rec.q_update(&t.label).map_or(t.q_before, |u| u.after);
            table.push(vec![
                Cell::Num(n as f64),
                t.label.as_str().into(),
                t.q_before.into(),
                t.approx_reward.into(),
                t.provisional_q.into(),
                t.base_reward.into(),
                t.modified_reward.into(),
                t.max_future_q.into(),
                after.into(),
                rec.selected_topics.contains(&t.label).into(),
            ]);
        }
    }
    Ok(table)
}

/// Keyword weights of the selected topics next to the weights the validation
/// documents give the same keywords.
///
/// Keywords are the union of each selected topic's `top_words`. The model side
/// is the keyword's mean weight over the selected topics. The document side is
/// the mean term frequency (count over in-vocabulary length) across the union
/// of each selected topic's `top_k_docs` most similar, non-degenerate documents.
pub fn export_keyword_comparison(
    model: &TopicModel,
    selected: &[String],
    matrix: &DocTopicMatrix,
    docs: &Corpus,
    top_words: usize,
    top_k_docs: usize,
) -> Result<Table> {
    if matrix.topic_labels != model.labels() {
        return Err(Error::Shape(
            "document matrix topics differ from the model's".into(),
        ));
    }
    if matrix.doc_ids.len() != docs.len()
        || docs
            .documents()
            .iter()
            .zip(&matrix.doc_ids)
            .any(|(d, id)| &d.id != id)
    {
        return Err(Error::Shape(
            "document matrix rows differ from the validation corpus".into(),
        ));
    }
    let topics: Vec<usize> = selected
        .iter()
        .map(|l| {
            model
                .label_index(l)
                .ok_or_else(|| Error::NotFound(format!("topic {l}")))
        })
        .collect::<Result<_>>()?;
    let vocab = model.vocabulary();

    let mut keyword_set = BTreeSet::new();
    for &t in &topics {
        keyword_set.extend(model.top_words(t, top_words).into_iter().map(|(w, _)| w));
    }
    let mut chosen_docs = BTreeSet::new();
    for &t in &topics {
        chosen_docs.extend(
            matrix
                .ranked_docs(t)
                .into_iter()
                .filter(|&d| !matrix.degenerate[d])
                .take(top_k_docs),
        );
    }
    let mut doc_tf: BTreeMap<&str, f64> = BTreeMap::new();
    for &d in &chosen_docs {
        let in_vocab: Vec<&String> = docs.tokens()[d]
            .iter()
            .filter(|t| vocab.index_of(t).is_some())
            .collect();
        let len = in_vocab.len() as f64;
        for tok in in_vocab {
            *doc_tf.entry(tok.as_str()).or_default() += 1.0 / len;
        }
    }

    let mut rows: Vec<(String, f64, f64)> = keyword_set
        .into_iter()
        .map(|term| {
            let j = vocab
                .index_of(&term)
                .expect("top word is in the vocabulary");
            let model_w =
                topics.iter().map(|&t| model.row(t)[j]).sum::<f64>() / topics.len() as f64;
            let doc_w = if chosen_docs.is_empty() {
                0.0
            } else {
                doc_tf.get(term.as_str()).copied().unwrap_or(0.0) / chosen_docs.len() as f64
            };
            (term, model_w, doc_w)
        })
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut table = Table::new(["term", "model_weight", "document_weight"]);
    for (term, m, d) in rows {
        table.push(vec![Cell::Text(term), Cell::Num(m), Cell::Num(d)]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    ModelHeatmap,
    ComparisonBundle,
    QReport,
    DocMatrix,
    KeywordComparison,
    Sweep,
}

impl std::str::FromStr for ReportKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidParameter(format!("unknown report kind {s:?}")))
    }
}

/// A report over a saved session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRequest {
    pub kind: ReportKind,
    /// First and last iteration; `None` means the latest (or all, for `q_report`).
    pub iterations: Option<(usize, usize)>,
    pub format: Format,
    #[serde(default = "default_top_words")]
    pub top_words: usize,
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    /// Pair alphas and lambdas element-wise instead of taking the product.
    #[serde(default)]
    pub zip: bool,
}

fn default_top_words() -> usize {
    10
}

impl ReportRequest {
    pub fn new(kind: ReportKind) -> Self {
        ReportRequest {
            kind,
            iterations: None,
            format: Format::Csv,
            top_words: default_top_words(),
            alphas: Vec::new(),
            lambdas: Vec::new(),
            zip: false,
        }
    }
}

/// Default grids for sweeps: five alphas, five lambdas.
pub const DEFAULT_SWEEP_ALPHAS: [f64; 5] = [0.1, 0.15, 0.2, 0.25, 0.3];
pub const DEFAULT_SWEEP_LAMBDAS: [f64; 5] = [0.5, 1.5, 2.5, 3.5, 4.5];

/// Sweep an iteration of `state` over the given grids.
pub fn sweep_iteration(
    state: &SessionState,
    n: usize,
    alphas: &[f64],
    lambdas: &[f64],
    zip: bool,
) -> Result<SweepReport> {
    let inputs = state.iteration(n)?.sweep_inputs(&state.config.agent)?;
    let alphas = if alphas.is_empty() {
        &DEFAULT_SWEEP_ALPHAS[..]
    } else {
        alphas
    };
    let lambdas = if lambdas.is_empty() {
        &DEFAULT_SWEEP_LAMBDAS[..]
    } else {
        lambdas
    };
    if zip {
        if alphas.len() != lambdas.len() {
            return Err(Error::InvalidParameter(
                "zipped grids need equal lengths".into(),
            ));
        }
        let pairs: Vec<(f64, f64)> = alphas
            .iter()
            .copied()
            .zip(lambdas.iter().copied())
            .collect();
        crate::agent::parameter_sweep_pairs(&inputs, &pairs)
    } else {
        crate::agent::parameter_sweep(&inputs, alphas, lambdas)
    }
}

/// Build the table for `request`. Keyword comparisons need the validation
/// corpus of the iteration, which sessions do not store.
pub fn build_report(
    state: &SessionState,
    request: &ReportRequest,
    validation: Option<&Corpus>,
) -> Result<Table> {
    let latest = state.iterations.len();
    let single = || -> Result<usize> {
        let n = request.iterations.map_or(latest, |(a, _)| a);
        state.iteration(n).map(|_| n)
    };
    match request.kind {
        ReportKind::ModelHeatmap => {
            let model = match request.iterations {
                None => state
                    .pending_model()
                    .unwrap_or_else(|| state.current_model()),
                Some((0, _)) => state.model("CTP1")?,
                Some((n, _)) => state.model(&state.iteration(n)?.model)?,
            };
            Ok(export_model_heatmap(model, request.top_words))
        }
        ReportKind::ComparisonBundle => Ok(export_comparison_bundle(
            &state.iteration(single()?)?.bundle,
        )),
        ReportKind::DocMatrix => {
            let rec = state.iteration(single()?)?;
            let m = rec.doc_matrix.as_ref().ok_or_else(|| {
                Error::NotFound(format!("iteration {} has no document matrix", rec.index))
            })?;
            Ok(export_doc_matrix(m))
        }
        ReportKind::QReport => {
            let (a, b) = request.iterations.unwrap_or((1, latest));
            if a == 0 || b < a || b > latest {
                return Err(Error::NotFound(format!("iterations {a}..={b} of {latest}")));
            }
            q_report(state, a..=b)
        }
        ReportKind::KeywordComparison => {
            let rec = state.iteration(single()?)?;
            let docs = validation.ok_or_else(|| {
                Error::InvalidParameter("keyword comparison needs the validation corpus".into())
            })?;
            let m = rec.doc_matrix.as_ref().ok_or_else(|| {
                Error::NotFound(format!("iteration {} has no document matrix", rec.index))
            })?;
            export_keyword_comparison(
                state.model(&rec.model)?,
                &rec.selected_topics,
                m,
                docs,
                request.top_words,
                state.config.agent.top_k_docs,
            )
        }
        ReportKind::Sweep => {
            let n = single()?;
            Ok(export_sweep(&sweep_iteration(
                state,
                n,
                &request.alphas,
                &request.lambdas,
                request.zip,
            )?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;
    use crate::topics::ModelKind;
    use std::sync::Arc;

    fn model(rows: Vec<Vec<f64>>, terms: &[&str]) -> TopicModel {
        let vocab = Arc::new(Vocabulary::from_terms(terms.iter().copied()));
        let labels = crate::topics::default_labels(rows.len());
        TopicModel::new("m", ModelKind::AspectWeighted, rows, labels, vocab, None).unwrap()
    }

    #[test]
    fn heatmap_direct_dump() {
        let m = model(vec![vec![0.25, 0.75]], &["a", "b"]);
        let t = export_model_heatmap(&m, 2);
        assert_eq!(t.columns, ["term", "T01"]);
        assert_eq!(
            t.rows,
            vec![
                vec![Cell::from("b"), Cell::Num(0.75)],
                vec![Cell::from("a"), Cell::Num(0.25)]
            ]
        );
        assert!(export_model_heatmap(&m, 0).is_empty());
    }

    #[test]
    fn keyword_comparison_identity_and_absent() {
        let m = model(vec![vec![0.5, 0.5, 0.0]], &["a", "b", "c"]);
        let docs = Corpus::from_tokens(&[vec!["a", "b"]]);
        let mtx = crate::agent::doc_topic_similarity(&m, &docs);
        let t = export_keyword_comparison(&m, &["T01".into()], &mtx, &docs, 3, 5).unwrap();
        for row in &t.rows {
            assert_eq!(row[1], row[2]);
        }
        let m2 = model(vec![vec![0.5, 0.3, 0.2]], &["a", "b", "c"]);
        let mtx2 = crate::agent::doc_topic_similarity(&m2, &docs);
        let t = export_keyword_comparison(&m2, &["T01".into()], &mtx2, &docs, 3, 5).unwrap();
        let c = t.rows.iter().find(|r| r[0] == Cell::from("c")).unwrap();
        assert_eq!(c[2], Cell::Num(0.0));
    }

    #[test]
    fn csv_json_agree() {
        let mut t = Table::new(["label", "x", "flag", "blank"]);
        t.push(vec!["T01".into(), 0.1f64.into(), true.into(), Cell::Empty]);
        t.push(vec![
            "T02".into(),
            (1.0f64 / 3.0).into(),
            false.into(),
            Cell::Num(1e-7),
        ]);
        let from_csv = Table::from_csv(&t.to_csv().unwrap()).unwrap();
        let from_json = Table::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(from_csv, t);
        assert_eq!(from_json, t);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(
            "q_report".parse::<ReportKind>().unwrap(),
            ReportKind::QReport
        );
        assert!("heat".parse::<ReportKind>().is_err());
    }
}
