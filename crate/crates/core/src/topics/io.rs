//! JSON header + CSV matrix persistence for topic models.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Lineage, ModelKind, TopicModel};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub id: String,
    pub kind: ModelKind,
    pub labels: Vec<String>,
    pub lineage: Option<Lineage>,
    pub vocabulary_id: String,
    pub num_topics: usize,
    pub num_terms: usize,
}

impl ModelHeader {
    pub fn of(model: &TopicModel) -> Self {
        ModelHeader {
            id: model.id().to_string(),
            kind: model.kind(),
            labels: model.labels().to_vec(),
            lineage: model.lineage().cloned(),
            vocabulary_id: model.vocabulary().id(),
            num_topics: model.num_topics(),
            num_terms: model.num_terms(),
        }
    }
}

/// Write the header as pretty JSON and the matrix as CSV: a header row of
/// `label` plus the vocabulary terms, then one row per topic. Values use the
/// shortest representation that parses back to the same f64.
pub fn write_model(
    model: &TopicModel,
    header_out: impl Write,
    matrix_out: impl Write,
) -> Result<()> {
    serde_json::to_writer_pretty(header_out, &ModelHeader::of(model))?;
    let mut w = csv::Writer::from_writer(matrix_out);
    let mut head = Vec::with_capacity(model.num_terms() + 1);
    head.push("label".to_string());
    head.extend(model.vocabulary().terms().iter().cloned());
    w.write_record(&head)?;
    for (label, row) in model.labels().iter().zip(model.rows()) {
        let mut rec = Vec::with_capacity(row.len() + 1);
        rec.push(label.clone());
        rec.extend(row.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<matrix>", e))?;
    Ok(())
}

/// Read a model back; the vocabulary must match the header's id and the CSV columns.
pub fn read_model(
    header_in: impl Read,
    matrix_in: impl Read,
    vocabulary: Arc<Vocabulary>,
) -> Result<TopicModel> {
    let header: ModelHeader = serde_json::from_reader(header_in)?;
    if header.vocabulary_id != vocabulary.id() {
        return Err(Error::Shape(format!(
            "model {} was built on vocabulary {}, got {}",
            header.id,
            header.vocabulary_id,
            vocabulary.id()
        )));
    }
    let mut r = csv::Reader::from_reader(matrix_in);
    let head = r.headers()?.clone();
    if head.len() != vocabulary.len() + 1
        || head
            .iter()
            .skip(1)
            .ne(vocabulary.terms().iter().map(String::as_str))
    {
        return Err(Error::Shape(
            "matrix columns do not match the vocabulary".into(),
        ));
    }
    let mut rows = Vec::with_capacity(header.num_topics);
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let expected = header.labels.get(i).map(String::as_str);
        if rec.get(0) != expected {
            return Err(Error::Shape(format!(
                "row {i} label {:?}, header says {expected:?}",
                rec.get(0)
            )));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|s| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 2,
                    message: format!("{s:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    TopicModel::new(
        header.id,
        header.kind,
        rows,
        header.labels,
        vocabulary,
        header.lineage,
    )
}
