//! Weighted aspect keywords extracted from expert-curated texts.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{self, Corpus, Document, PreprocessConfig};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_K: usize = 100;

/// A ranked set of stemmed terms with nonnegative weights.
///
/// Entries are kept sorted by weight descending with ties broken by term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AspectRepr")]
pub struct AspectKeywords {
    pub label: String,
    entries: Vec<(String, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub source_ids: Vec<String>,
}

#[derive(Deserialize)]
struct AspectRepr {
    label: String,
    entries: Vec<(String, f64)>,
    #[serde(default)]
    source_ids: Vec<String>,
}

impl TryFrom<AspectRepr> for AspectKeywords {
    type Error = Error;
    fn try_from(r: AspectRepr) -> Result<Self> {
        let mut ak = AspectKeywords::new(r.label, r.entries)?;
        ak.source_ids = r.source_ids;
        Ok(ak)
    }
}

/// Weight descending, then term ascending.
pub(crate) fn rank_order(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

impl AspectKeywords {
    /// Validate and sort explicit entries (e.g. hand-written expert keywords).
    pub fn new(label: impl Into<String>, entries: Vec<(String, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (term, w) in &entries {
            if term.is_empty() {
                return Err(Error::InvalidParameter("empty aspect term".into()));
            }
            if !seen.insert(term.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate aspect term {term:?}"
                )));
            }
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "aspect weight for {term:?} must be finite and >= 0, got {w}"
                )));
            }
        }
        let mut entries = entries;
        entries.sort_by(rank_order);
        Ok(AspectKeywords {
            label: label.into(),
            entries,
            source_ids: Vec::new(),
        })
    }

    /// Stem raw expert terms through the same pipeline as the corpus. Phrases
    /// contribute each of their words; stems reached twice keep the larger weight.
    pub fn from_raw_terms(label: impl Into<String>, raw: &[(String, f64)]) -> Result<Self> {
        let mut merged: BTreeMap<String, f64> = BTreeMap::new();
        for (term, w) in raw {
            for word in term.to_lowercase().split(|c: char| !c.is_alphanumeric()) {
                if word.is_empty() {
                    continue;
                }
                let slot = merged.entry(corpus::stem::stem(word)).or_insert(*w);
                *slot = slot.max(*w);
            }
        }
        AspectKeywords::new(label, merged.into_iter().collect())
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, term: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(t, _)| t == term)
            .map(|(_, w)| *w)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Rescale weights. Ordering is unchanged for every mode.
    pub fn normalize(&self, mode: NormalizeMode) -> Result<Self> {
        if self.entries.is_empty() {
            return Err(Error::AspectEmpty(self.label.clone()));
        }
        let divisor = match mode {
            NormalizeMode::None => return Ok(self.clone()),
            NormalizeMode::MaxOne => self.entries.iter().map(|e| e.1).fold(0.0, f64::max),
            NormalizeMode::SumOne => self.entries.iter().map(|e| e.1).sum(),
        };
        if divisor <= 0.0 {
            return Err(Error::ZeroWeights);
        }
        let mut out = self.clone();
        for e in &mut out.entries {
            e.1 /= divisor;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeMode {
    MaxOne,
    SumOne,
    #[default]
    None,
}

/// Free-function form of [`AspectKeywords::normalize`].
pub fn normalize_weights(ak: &AspectKeywords, mode: NormalizeMode) -> Result<AspectKeywords> {
    ak.normalize(mode)
}

/// Stemmed terms to drop from aspect extraction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionList {
    terms: BTreeSet<String>,
}

impl ExclusionList {
    /// Raw words are lowercased and stemmed, so "algorithms" excludes "algorithm".
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        ExclusionList {
            terms: words
                .into_iter()
                .map(|w| corpus::stem::stem(&w.as_ref().trim().to_lowercase()))
                .filter(|t| !t.is_empty())
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self::from_words(corpus::read_word_list(path)?))
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains(term)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }
}

/// Mean over documents of `tf(t, d) * idf(t)` with `tf = count / |d|` and
/// `idf = ln(N / df)`.
pub fn compute_tfidf(corpus: &Corpus) -> Result<BTreeMap<String, f64>> {
    let n_docs = corpus.len();
    if n_docs == 0 || corpus.tokens().iter().all(Vec::is_empty) {
        return Err(Error::AspectEmpty("aspect corpus has no tokens".into()));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for tokens in corpus.tokens() {
        let distinct: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut sums: BTreeMap<&str, f64> = df.keys().map(|&t| (t, 0.0)).collect();
    for tokens in corpus.tokens() {
        if tokens.is_empty() {
            continue;
        }
        let len = tokens.len() as f64;
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for t in tokens {
            *counts.entry(t).or_default() += 1;
        }
        for (t, c) in counts {
            let idf = (n_docs as f64 / df[t] as f64).ln();
            *sums.get_mut(t).unwrap() += (c as f64 / len) * idf;
        }
    }
    Ok(sums
        .into_iter()
        .map(|(t, s)| (t.to_string(), s / n_docs as f64))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractOptions {
    pub label: String,
    pub max_k: usize,
    /// Scores strictly below this are dropped. 0 keeps everything and leaves
    /// the cut to `max_k`.
    pub min_score: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            label: "aspect".into(),
            max_k: DEFAULT_MAX_K,
            min_score: 0.0,
        }
    }
}

/// Rank aspect-corpus terms by tf-idf: exclusions first, then the score
/// threshold, then truncation to `max_k`.
pub fn extract_aspect_keywords(
    aspect_corpus: &Corpus,
    options: &ExtractOptions,
    exclusions: &ExclusionList,
) -> Result<AspectKeywords> {
    let scores = compute_tfidf(aspect_corpus)?;
    let mut ranked: Vec<(String, f64)> = scores
        .into_iter()
        .filter(|(t, _)| !exclusions.contains(t))
        .filter(|(_, s)| *s >= options.min_score)
        .collect();
    ranked.sort_by(rank_order);
    ranked.truncate(options.max_k);
    if ranked.is_empty() {
        return Err(Error::AspectEmpty(options.label.clone()));
    }
    let mut ak = AspectKeywords::new(options.label.clone(), ranked)?;
    ak.source_ids = aspect_corpus
        .documents()
        .iter()
        .enumerate()
        .filter(|(i, _)| !aspect_corpus.is_empty_document(*i))
        .map(|(_, d)| d.id.clone())
        .collect();
    Ok(ak)
}

/// Extract an aspect from raw texts, one document per text.
pub fn extract_from_texts(
    texts: &[String],
    preprocess: &PreprocessConfig,
    options: &ExtractOptions,
    exclusions: &ExclusionList,
) -> Result<AspectKeywords> {
    let docs = texts
        .iter()
        .enumerate()
        .map(|(i, t)| Document::new(format!("text-{}", i + 1), String::new(), t.clone()))
        .collect();
    let corpus = Corpus::new(docs)?.preprocess(preprocess)?;
    extract_aspect_keywords(&corpus, options, exclusions)
}
