//! Topic-vector metrics and the two-model comparison bundle.
//!
//! All functions take plain weight slices. Entropy uses the natural log
//! unless [`LogBase::Two`] is requested.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topics::TopicModel;

/// Euclidean norm.
pub fn magnitude(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cosine similarity with a flag for zero-vector inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cosine {
    pub value: f64,
    /// Set when either side is the zero vector; `value` is then 0.
    pub degenerate: bool,
}

/// `a . b / (|a| |b|)`, clamped to [-1, 1]. A zero vector on either side gives 0
/// with the degenerate flag set.
///
/// # Panics
///
/// If the slices differ in length.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Cosine {
    assert_eq!(a.len(), b.len(), "cosine of vectors with different lengths");
    let na = magnitude(a);
    let nb = magnitude(b);
    if na == 0.0 || nb == 0.0 {
        return Cosine {
            value: 0.0,
            degenerate: true,
        };
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Cosine {
        value: (dot / (na * nb)).clamp(-1.0, 1.0),
        degenerate: false,
    }
}

/// `v / sum(v)`.
pub fn normalize_sum(v: &[f64]) -> Result<Vec<f64>> {
    let s: f64 = v.iter().sum();
    if s <= 0.0 || !s.is_finite() {
        return Err(Error::ZeroSum);
    }
    Ok(v.iter().map(|x| x / s).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    fn ln_scale(self) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
        }
    }
}

/// Shannon entropy of the sum-normalized vector, `0 ln 0 = 0`.
pub fn entropy(v: &[f64]) -> Result<f64> {
    entropy_with_base(v, LogBase::Natural)
}

pub fn entropy_with_base(v: &[f64], base: LogBase) -> Result<f64> {
    let p = normalize_sum(v)?;
    let h: f64 = -p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|x| x * x.ln())
        .sum::<f64>();
    Ok((h / base.ln_scale()).max(0.0))
}

/// Absolute difference in normalized sums: L1 distance of the two
/// sum-normalized vectors, in [0, 2].
pub fn adns(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "adns of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let pa = normalize_sum(a)?;
    let pb = normalize_sum(b)?;
    Ok(pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum())
}

/// Per-topic comparison of two models over the same labels and vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub labels: Vec<String>,
    /// `[i][j]` = cosine of old topic i against new topic j.
    pub similarity_matrix: Vec<Vec<f64>>,
    pub corresponding_similarity: Vec<f64>,
    /// Norm of each row of the new model.
    pub magnitude: Vec<f64>,
    pub adns: Vec<f64>,
    pub entropy_old: Vec<f64>,
    pub entropy_new: Vec<f64>,
    pub entropy_delta: Vec<f64>,
    /// Topics where either row is all zeros. Their entropy is reported as 0 and
    /// a zero row is treated as carrying no mass in ADNS.
    pub degenerate: Vec<bool>,
    pub log_base: LogBase,
}

impl MetricsBundle {
    pub fn num_topics(&self) -> usize {
        self.labels.len()
    }

    /// Square matrix CSV with topic labels on both axes.
    pub fn write_matrix_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut head = vec![String::new()];
        head.extend(self.labels.iter().cloned());
        w.write_record(&head)?;
        for (label, row) in self.labels.iter().zip(&self.similarity_matrix) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<bundle matrix>", e))?;
        Ok(())
    }

    /// One row per topic: label, magnitude, corresponding_similarity, adns,
    /// entropy_old, entropy_new, entropy_delta.
    pub fn write_topics_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "label",
            "magnitude",
            "corresponding_similarity",
            "adns",
            "entropy_old",
            "entropy_new",
            "entropy_delta",
        ])?;
        for i in 0..self.num_topics() {
            w.write_record([
                self.labels[i].clone(),
                self.magnitude[i].to_string(),
                self.corresponding_similarity[i].to_string(),
                self.adns[i].to_string(),
                self.entropy_old[i].to_string(),
                self.entropy_new[i].to_string(),
                self.entropy_delta[i].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<bundle topics>", e))?;
        Ok(())
    }
}

fn entropy_or_zero(v: &[f64], base: LogBase) -> f64 {
    entropy_with_base(v, base).unwrap_or(0.0)
}

fn adns_tolerant(a: &[f64], b: &[f64]) -> f64 {
    let pa = normalize_sum(a).unwrap_or_else(|_| vec![0.0; a.len()]);
    let pb = normalize_sum(b).unwrap_or_else(|_| vec![0.0; b.len()]);
    pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum()
}

/// Compare `old` against `new`: full cosine matrix plus per-topic magnitude,
/// ADNS and entropy change for corresponding topics.
pub fn compare_models(old: &TopicModel, new: &TopicModel) -> Result<MetricsBundle> {
    compare_models_with_base(old, new, LogBase::Natural)
}

pub fn compare_models_with_base(
    old: &TopicModel,
    new: &TopicModel,
    base: LogBase,
) -> Result<MetricsBundle> {
    if old.num_topics() != new.num_topics() {
        return Err(Error::Shape(format!(
            "models have {} and {} topics",
            old.num_topics(),
            new.num_topics()
        )));
    }
    if old.vocabulary().terms() != new.vocabulary().terms() {
        return Err(Error::Shape("models use different vocabularies".into()));
    }
    let k = old.num_topics();
    let similarity_matrix: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| cosine_similarity(old.row(i), new.row(j)).value)
                .collect()
        })
        .collect();
    let corresponding_similarity = (0..k).map(|i| similarity_matrix[i][i]).collect();
    let magnitude = new.rows().iter().map(|r| magnitude(r)).collect();
    let adns = (0..k)
        .map(|i| adns_tolerant(old.row(i), new.row(i)))
        .collect();
    let entropy_old: Vec<f64> = old
        .rows()
        .iter()
        .map(|r| entropy_or_zero(r, base))
        .collect();
    let entropy_new: Vec<f64> = new
        .rows()
        .iter()
        .map(|r| entropy_or_zero(r, base))
        .collect();
    let entropy_delta = entropy_new
        .iter()
        .zip(&entropy_old)
        .map(|(n, o)| n - o)
        .collect();
    let degenerate = (0..k)
        .map(|i| old.row(i).iter().all(|&x| x == 0.0) || new.row(i).iter().all(|&x| x == 0.0))
        .collect();
    Ok(MetricsBundle {
        labels: new.labels().to_vec(),
        similarity_matrix,
        corresponding_similarity,
        magnitude,
        adns,
        entropy_old,
        entropy_new,
        entropy_delta,
        degenerate,
        log_base: base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magnitude_cases() {
        assert_eq!(magnitude(&[3.0, 4.0]), 5.0);
        assert_eq!(magnitude(&[0.0; 4]), 0.0);
    }

    #[test]
    fn cosine_cases() {
        let v = [0.2, 0.5, 0.3];
        assert!((cosine_similarity(&v, &v).value - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 2.0]).value, 0.0);
        let c = cosine_similarity(&[0.0, 0.0], &[1.0, 2.0]);
        assert!(c.degenerate);
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn entropy_cases() {
        assert!((entropy(&[1.0; 4]).unwrap() - 4f64.ln()).abs() < 1e-12);
        assert_eq!(entropy(&[0.0, 3.0, 0.0]).unwrap(), 0.0);
        assert!(entropy(&[0.0, 0.0]).is_err());
        assert!((entropy_with_base(&[1.0, 1.0], LogBase::Two).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_cases() {
        assert_eq!(normalize_sum(&[2.0, 2.0]).unwrap(), [0.5, 0.5]);
        assert_eq!(normalize_sum(&[1.0, 3.0]).unwrap(), [0.25, 0.75]);
        assert_eq!(normalize_sum(&[0.25, 0.75]).unwrap(), [0.25, 0.75]);
        assert!(normalize_sum(&[0.0]).is_err());
    }

    #[test]
    fn adns_cases() {
        assert_eq!(adns(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 0.0);
        assert_eq!(adns(&[1.0, 0.0], &[0.0, 5.0]).unwrap(), 2.0);
        assert_eq!(adns(&[1.0, 1.0], &[1.0, 3.0]).unwrap(), 0.5);
        assert!(adns(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    }
}
