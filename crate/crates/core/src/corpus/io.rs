use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Corpus, Document};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guess from the file extension (`.csv` is CSV, anything else JSONL).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(Error::InvalidParameter(format!(
                "unknown corpus format {other:?}"
            ))),
        }
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    id: Option<serde_json::Value>,
    title: Option<String>,
    #[serde(rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    keywords: Option<Vec<String>>,
    year: Option<i64>,
    source: Option<String>,
}

#[derive(Deserialize)]
struct CsvRecord {
    id: Option<String>,
    title: Option<String>,
    #[serde(rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    keywords: Option<String>,
    #[serde(default)]
    year: Option<String>,
    #[serde(default)]
    source: Option<String>,
}

/// Load exported records. Tokens stay empty until [`Corpus::preprocess`].
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let records = match format {
        CorpusFormat::Jsonl => read_jsonl(BufReader::new(file), path)?,
        CorpusFormat::Csv => read_csv(file)?,
    };
    if records.is_empty() {
        return Err(Error::NoRecords(path.to_path_buf()));
    }
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (line, doc) in &records {
        if let Some(&first) = seen.get(&doc.id) {
            return Err(Error::DuplicateId {
                id: doc.id.clone(),
                first,
                second: *line,
            });
        }
        seen.insert(doc.id.clone(), *line);
    }
    for (line, doc) in &records {
        doc.validate(*line)?;
    }
    Corpus::new(records.into_iter().map(|(_, d)| d).collect())
}

fn read_jsonl(reader: impl BufRead, path: &Path) -> Result<Vec<(usize, Document)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let id = match rec.id {
            Some(serde_json::Value::String(s)) => s,
            Some(serde_json::Value::Number(n)) => n.to_string(),
            Some(other) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("id must be a string, got {other}"),
                })
            }
            None => {
                return Err(Error::MissingField {
                    line: line_no,
                    field: "id",
                })
            }
        };
        let title = rec.title.ok_or(Error::MissingField {
            line: line_no,
            field: "title",
        })?;
        let abstract_text = rec.abstract_text.ok_or(Error::MissingField {
            line: line_no,
            field: "abstract",
        })?;
        let year = rec.year.map(|y| year_from(y, line_no)).transpose()?;
        out.push((
            line_no,
            Document {
                id,
                title,
                abstract_text,
                keywords: rec.keywords.unwrap_or_default(),
                year,
                source: rec.source,
            },
        ));
    }
    Ok(out)
}

fn read_csv(file: File) -> Result<Vec<(usize, Document)>> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(file);
    let headers = reader.headers()?.clone();
    for required in ["id", "title", "abstract"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::MissingField {
                line: 1,
                field: required_name(required),
            });
        }
    }
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<CsvRecord>().enumerate() {
        // header is line 1
        let line_no = i + 2;
        let rec = row.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let id = rec
            .id
            .filter(|s| !s.is_empty())
            .ok_or(Error::MissingField {
                line: line_no,
                field: "id",
            })?;
        let year = match rec.year.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(y) => {
                let y: i64 = y.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("year {y:?} is not an integer"),
                })?;
                Some(year_from(y, line_no)?)
            }
        };
        let keywords = rec
            .keywords
            .unwrap_or_default()
            .split(';')
            .map(str::trim)
            .filter(|k| !k.is_empty())
            .map(str::to_string)
            .collect();
        out.push((
            line_no,
            Document {
                id,
                title: rec.title.unwrap_or_default(),
                abstract_text: rec.abstract_text.unwrap_or_default(),
                keywords,
                year,
                source: rec.source.filter(|s| !s.is_empty()),
            },
        ));
    }
    Ok(out)
}

fn required_name(name: &str) -> &'static str {
    match name {
        "id" => "id",
        "title" => "title",
        _ => "abstract",
    }
}

fn year_from(y: i64, line: usize) -> Result<i32> {
    if (1900..=2100).contains(&y) {
        Ok(y as i32)
    } else {
        Err(Error::Parse {
            line,
            message: format!("year {y} outside [1900, 2100]"),
        })
    }
}

/// Write documents as JSON lines, the format [`load_corpus`] reads back.
pub fn write_jsonl<'a>(
    docs: impl IntoIterator<Item = &'a Document>,
    mut out: impl std::io::Write,
) -> Result<()> {
    for d in docs {
        serde_json::to_writer(&mut out, d)?;
        out.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
    }
    out.flush().map_err(|e| Error::io("<jsonl>", e))
}
