//! Bibliographic records, boolean screening, and text preprocessing.

mod io;
mod query;
pub mod stem;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use io::{load_corpus, write_jsonl, CorpusFormat};
pub use query::{fold, Literal, QueryExpr, SearchQuery};

const BUNDLED_STOPWORDS: &str = include_str!("stopwords_en.txt");

/// One exported bibliographic record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        abstract_text: impl Into<String>,
    ) -> Self {
        Document {
            id: id.into(),
            title: title.into(),
            abstract_text: abstract_text.into(),
            keywords: Vec::new(),
            year: None,
            source: None,
        }
    }

    pub fn with_keywords<I, S>(mut self, keywords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.keywords = keywords.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    /// Title, abstract and keywords joined by spaces; the text queries and
    /// preprocessing operate on.
    pub fn full_text(&self) -> String {
        let mut text = String::with_capacity(
            self.title.len() + self.abstract_text.len() + 16 * self.keywords.len(),
        );
        text.push_str(&self.title);
        text.push(' ');
        text.push_str(&self.abstract_text);
        for k in &self.keywords {
            text.push(' ');
            text.push_str(k);
        }
        text
    }

    fn validate(&self, line: usize) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::MissingField { line, field: "id" });
        }
        if let Some(y) = self.year {
            if !(1900..=2100).contains(&y) {
                return Err(Error::Parse {
                    line,
                    message: format!("year {y} outside [1900, 2100]"),
                });
            }
        }
        Ok(())
    }
}

/// Dense term index with per-term document frequencies.
///
/// Terms are stored in lexicographic order so two corpora with the same
/// token sets produce identical vocabularies.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_frequency: Vec<usize>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    doc_frequency: Vec<usize>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::from_parts(r.terms, r.doc_frequency)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            terms: v.terms,
            doc_frequency: v.doc_frequency,
        }
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.doc_frequency == other.doc_frequency
    }
}

impl Vocabulary {
    /// Build from per-document token lists.
    pub fn build<S: AsRef<str>>(token_lists: &[Vec<S>]) -> Self {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for tokens in token_lists {
            let distinct: BTreeSet<&str> = tokens.iter().map(AsRef::as_ref).collect();
            for t in distinct {
                *df.entry(t).or_default() += 1;
            }
        }
        let (terms, doc_frequency) = df.into_iter().map(|(t, n)| (t.to_string(), n)).unzip();
        Vocabulary::from_parts(terms, doc_frequency)
    }

    /// A vocabulary over an explicit term list (each term counted once).
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = terms.into_iter().map(Into::into).collect();
        let n = set.len();
        Vocabulary::from_parts(set.into_iter().collect(), vec![1; n])
    }

    fn from_parts(terms: Vec<String>, doc_frequency: Vec<usize>) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            terms,
            doc_frequency,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_frequency(&self, index: usize) -> usize {
        self.doc_frequency[index]
    }

    pub fn doc_frequencies(&self) -> &[usize] {
        &self.doc_frequency
    }

    /// Content hash over the term list; used as the vocabulary id.
    pub fn id(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.terms {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        hex::encode(&h.finalize()[..8])
    }
}

/// Preprocessing options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub min_len: usize,
    /// Words added to the bundled English list.
    pub extra_stopwords: Vec<String>,
    /// Optional stop-word file, one word per line, merged into the list.
    pub stopwords_path: Option<PathBuf>,
    pub stem: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            min_len: 3,
            extra_stopwords: Vec::new(),
            stopwords_path: None,
            stem: true,
        }
    }
}

impl PreprocessConfig {
    /// The effective stop-word set: bundled list plus extras plus file contents.
    pub fn stopwords(&self) -> Result<HashSet<String>> {
        let mut set: HashSet<String> = bundled_stopwords().map(str::to_string).collect();
        set.extend(self.extra_stopwords.iter().map(|w| w.to_lowercase()));
        if let Some(path) = &self.stopwords_path {
            set.extend(read_word_list(path)?);
        }
        Ok(set)
    }
}

pub fn bundled_stopwords() -> impl Iterator<Item = &'static str> {
    BUNDLED_STOPWORDS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
}

/// Read a plain-text word list: one entry per line, blank lines and `#` comments skipped.
pub fn read_word_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect())
}

/// Lowercase, split on non-alphanumerics, drop short tokens and stop-words, stem.
pub fn tokenize(
    text: &str,
    min_len: usize,
    stopwords: &HashSet<String>,
    stem: bool,
) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= min_len)
        .filter(|t| !stopwords.contains(*t))
        .map(|t| if stem { stem::stem(t) } else { t.to_string() })
        .collect()
}

/// An ordered document collection with its token streams.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    tokens: Vec<Vec<String>>,
    vocabulary: Arc<Vocabulary>,
    preprocessed: bool,
}

impl Corpus {
    /// Wrap documents without preprocessing. Ids must be unique and non-empty.
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, d) in documents.iter().enumerate() {
            d.validate(i + 1)?;
            if let Some(&first) = seen.get(d.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: d.id.clone(),
                    first: first + 1,
                    second: i + 1,
                });
            }
            seen.insert(&d.id, i);
        }
        let n = documents.len();
        Ok(Corpus {
            documents,
            tokens: vec![Vec::new(); n],
            vocabulary: Arc::new(Vocabulary::default()),
            preprocessed: false,
        })
    }

    /// A preprocessed corpus from explicit token lists; ids are `d0`, `d1`, ...
    pub fn from_tokens<S: AsRef<str>>(token_lists: &[Vec<S>]) -> Self {
        let documents = (0..token_lists.len())
            .map(|i| Document::new(format!("d{i}"), String::new(), String::new()))
            .collect();
        let tokens: Vec<Vec<String>> = token_lists
            .iter()
            .map(|ts| ts.iter().map(|t| t.as_ref().to_string()).collect())
            .collect();
        let vocabulary = Arc::new(Vocabulary::build(&tokens));
        Corpus {
            documents,
            tokens,
            vocabulary,
            preprocessed: true,
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn tokens(&self) -> &[Vec<String>] {
        &self.tokens
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocabulary
    }

    pub fn is_preprocessed(&self) -> bool {
        self.preprocessed
    }

    /// Indices of documents with no tokens after preprocessing.
    pub fn empty_documents(&self) -> Vec<usize> {
        if !self.preprocessed {
            return Vec::new();
        }
        (0..self.len())
            .filter(|&i| self.tokens[i].is_empty())
            .collect()
    }

    pub fn is_empty_document(&self, index: usize) -> bool {
        self.preprocessed && self.tokens[index].is_empty()
    }

    /// Documents as vocabulary indices; tokens outside the vocabulary are skipped.
    pub fn word_ids(&self) -> Vec<Vec<usize>> {
        self.tokens
            .iter()
            .map(|ts| {
                ts.iter()
                    .filter_map(|t| self.vocabulary.index_of(t))
                    .collect()
            })
            .collect()
    }

    /// Keep the documents at `indices` (ascending). The vocabulary is rebuilt
    /// over the survivors so document frequencies stay exact.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        let documents: Vec<Document> = indices.iter().map(|&i| self.documents[i].clone()).collect();
        let tokens: Vec<Vec<String>> = indices.iter().map(|&i| self.tokens[i].clone()).collect();
        let vocabulary = if self.preprocessed {
            Arc::new(Vocabulary::build(&tokens))
        } else {
            self.vocabulary.clone()
        };
        Corpus {
            documents,
            tokens,
            vocabulary,
            preprocessed: self.preprocessed,
        }
    }

    /// Keep documents whose title, abstract and keywords satisfy `query`.
    pub fn filter_by_query(&self, query: &SearchQuery) -> Corpus {
        let keep: Vec<usize> = self
            .documents
            .iter()
            .enumerate()
            .filter(|(_, d)| query.matches(&d.full_text()))
            .map(|(i, _)| i)
            .collect();
        self.subset(&keep)
    }

    /// Keep documents matching at least `min_hits` distinct query literals.
    pub fn relevance_filter(&self, query: &SearchQuery, min_hits: usize) -> Corpus {
        let keep: Vec<usize> = self
            .documents
            .iter()
            .enumerate()
            .filter(|(_, d)| query.literal_hits(&d.full_text()) >= min_hits)
            .map(|(i, _)| i)
            .collect();
        self.subset(&keep)
    }

    /// Tokenize every document and build the vocabulary.
    pub fn preprocess(&self, config: &PreprocessConfig) -> Result<Corpus> {
        let stopwords = config.stopwords()?;
        Ok(self.preprocess_with(config, &stopwords))
    }

    /// As [`Corpus::preprocess`] with a caller-supplied stop-word set.
    pub fn preprocess_with(
        &self,
        config: &PreprocessConfig,
        stopwords: &HashSet<String>,
    ) -> Corpus {
        let tokens: Vec<Vec<String>> = self
            .documents
            .iter()
            .map(|d| tokenize(&d.full_text(), config.min_len, stopwords, config.stem))
            .collect();
        let vocabulary = Arc::new(Vocabulary::build(&tokens));
        let empty = tokens.iter().filter(|t| t.is_empty()).count();
        if empty > 0 {
            tracing::warn!(
                empty,
                "documents reduced to zero tokens were kept and flagged"
            );
        }
        Corpus {
            documents: self.documents.clone(),
            tokens,
            vocabulary,
            preprocessed: true,
        }
    }
}
