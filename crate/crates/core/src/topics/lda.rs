//! Collapsed Gibbs sampling for LDA.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{content_id, default_labels, DocTopicAssignment, ModelKind, TopicModel};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaParams {
    pub k: usize,
    /// Symmetric document-topic prior; `None` means 50 / k.
    pub alpha: Option<f64>,
    /// Symmetric topic-word prior.
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaParams {
    fn default() -> Self {
        LdaParams {
            k: 10,
            alpha: None,
            beta: 0.01,
            iterations: 500,
            seed: 42,
        }
    }
}

impl LdaParams {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }

    fn validate(&self, vocab_size: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be >= 1".into()));
        }
        if !(self.alpha() > 0.0 && self.alpha().is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                self.alpha()
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.k > vocab_size {
            return Err(Error::InvalidParameter(format!(
                "k = {} exceeds vocabulary size {vocab_size}",
                self.k
            )));
        }
        Ok(())
    }
}

/// Fit LDA on a preprocessed corpus. Estimates are averaged over the last
/// 10% of sweeps (at least one).
pub fn fit_lda(corpus: &Corpus, params: &LdaParams) -> Result<(TopicModel, DocTopicAssignment)> {
    if !corpus.is_preprocessed() {
        return Err(Error::InvalidState(
            "corpus must be preprocessed before fitting".into(),
        ));
    }
    let vocab = corpus.vocabulary().clone();
    params.validate(vocab.len())?;
    let non_empty = corpus.tokens().iter().filter(|t| !t.is_empty()).count();
    if non_empty < params.k {
        return Err(Error::InvalidParameter(format!(
            "k = {} exceeds the number of non-empty documents ({non_empty})",
            params.k
        )));
    }
    let docs = corpus.word_ids();
    let (phi, theta) = fit_lda_on_ids(&docs, vocab.len(), params)?;
    let labels = default_labels(params.k);
    let id = content_id(
        &format!("lda-k{}-s{}", params.k, params.seed),
        &phi,
        &labels,
    );
    let model = TopicModel::new(id, ModelKind::Initial, phi, labels, vocab, None)?;
    Ok((model, DocTopicAssignment { doc_topic: theta }))
}

/// Sampler core over word-id documents. Returns (topic-word, doc-topic).
pub fn fit_lda_on_ids(
    docs: &[Vec<usize>],
    vocab_size: usize,
    params: &LdaParams,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    params.validate(vocab_size)?;
    let k = params.k;
    let v = vocab_size;
    let alpha = params.alpha();
    let beta = params.beta;
    let v_beta = v as f64 * beta;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut n_dk = vec![vec![0u32; k]; docs.len()];
    let mut n_kw = vec![vec![0u32; v]; k];
    let mut n_k = vec![0u32; k];
    let mut z: Vec<Vec<usize>> = Vec::with_capacity(docs.len());

    for (d, words) in docs.iter().enumerate() {
        let mut zd = Vec::with_capacity(words.len());
        for &w in words {
            let t = rng.gen_range(0..k);
            zd.push(t);
            n_dk[d][t] += 1;
            n_kw[t][w] += 1;
            n_k[t] += 1;
        }
        z.push(zd);
    }

    let samples = (params.iterations / 10).max(1);
    let first_sample = params.iterations - samples;
    let mut phi = vec![vec![0.0; v]; k];
    let mut theta = vec![vec![0.0; k]; docs.len()];
    let mut weights = vec![0.0; k];

    for sweep in 0..params.iterations {
        for (d, words) in docs.iter().enumerate() {
            for (i, &w) in words.iter().enumerate() {
                let old = z[d][i];
                n_dk[d][old] -= 1;
                n_kw[old][w] -= 1;
                n_k[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (n_dk[d][t] as f64 + alpha) * (n_kw[t][w] as f64 + beta)
                        / (n_k[t] as f64 + v_beta);
                    weights[t] = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                z[d][i] = new;
                n_dk[d][new] += 1;
                n_kw[new][w] += 1;
                n_k[new] += 1;
            }
        }
        if sweep >= first_sample {
            for t in 0..k {
                let denom = n_k[t] as f64 + v_beta;
                for w in 0..v {
                    phi[t][w] += (n_kw[t][w] as f64 + beta) / denom;
                }
            }
            for (d, words) in docs.iter().enumerate() {
                let denom = words.len() as f64 + k as f64 * alpha;
                for t in 0..k {
                    theta[d][t] += (n_dk[d][t] as f64 + alpha) / denom;
                }
            }
        }
    }

    // Averaging leaves rows a few ulps off one; renormalize exactly.
    for row in phi.iter_mut().chain(theta.iter_mut()) {
        let s: f64 = row.iter().sum();
        for x in row.iter_mut() {
            *x /= s;
        }
    }
    Ok((phi, theta))
}
