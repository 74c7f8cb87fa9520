//! Hierarchical refinement of primary topics into subtopics.

use super::lda::fit_lda_on_ids;
use super::{content_id, default_labels, DocTopicAssignment, LdaParams, ModelKind, TopicModel};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Largest-remainder allocation of `total` slots proportional to `sizes`,
/// with every partition receiving at least one.
pub fn allocate_subtopics(sizes: &[usize], total: usize) -> Result<Vec<usize>> {
    let k = sizes.len();
    if k == 0 {
        return Err(Error::InvalidParameter("no partitions to allocate".into()));
    }
    if total < k {
        return Err(Error::InvalidParameter(format!(
            "total subtopics {total} is below the number of partitions {k}"
        )));
    }
    let sum: usize = sizes.iter().sum();
    let quotas: Vec<f64> = if sum == 0 {
        vec![total as f64 / k as f64; k]
    } else {
        sizes
            .iter()
            .map(|&s| total as f64 * s as f64 / sum as f64)
            .collect()
    };
    let mut alloc: Vec<usize> = quotas.iter().map(|q| (q.floor() as usize).max(1)).collect();
    let remainder = |alloc: &[usize], i: usize| quotas[i] - alloc[i] as f64;

    let mut assigned: usize = alloc.iter().sum();
    while assigned < total {
        let i = (0..k)
            .max_by(|&a, &b| {
                remainder(&alloc, a)
                    .total_cmp(&remainder(&alloc, b))
                    .then(b.cmp(&a))
            })
            .unwrap();
        alloc[i] += 1;
        assigned += 1;
    }
    while assigned > total {
        let i = (0..k)
            .filter(|&i| alloc[i] > 1)
            .min_by(|&a, &b| {
                remainder(&alloc, a)
                    .total_cmp(&remainder(&alloc, b))
                    .then(b.cmp(&a))
            })
            .expect("total >= k guarantees a reducible partition");
        alloc[i] -= 1;
        assigned -= 1;
    }
    Ok(alloc)
}

/// Partition documents by dominant topic, fit a sub-LDA inside each partition
/// and stack the resulting rows under fresh labels.
///
/// `sub_params.k` is ignored (set per partition); `sub_params.alpha` of `None`
/// means 50 / sub-k for each partition. Partition `p` is sampled with seed
/// `seed + p`.
pub fn split_topics(
    model: &TopicModel,
    assignment: &DocTopicAssignment,
    corpus: &Corpus,
    total_subtopics: usize,
    sub_params: &LdaParams,
    seed: u64,
) -> Result<TopicModel> {
    if model.kind() != ModelKind::Initial {
        return Err(Error::InvalidParameter(
            "only initial models can be split".into(),
        ));
    }
    if assignment.doc_topic.len() != corpus.len() {
        return Err(Error::Shape(format!(
            "assignment covers {} documents, corpus has {}",
            assignment.doc_topic.len(),
            corpus.len()
        )));
    }
    if corpus.vocabulary().terms() != model.vocabulary().terms() {
        return Err(Error::Shape(
            "corpus vocabulary differs from the model's".into(),
        ));
    }
    let k = model.num_topics();
    let word_ids = corpus.word_ids();
    let mut partitions: Vec<Vec<Vec<usize>>> = vec![Vec::new(); k];
    for (d, t) in assignment.argmax().into_iter().enumerate() {
        if !word_ids[d].is_empty() {
            partitions[t].push(word_ids[d].clone());
        }
    }
    let sizes: Vec<usize> = partitions.iter().map(Vec::len).collect();
    let alloc = allocate_subtopics(&sizes, total_subtopics)?;
    for (p, (&n, &a)) in sizes.iter().zip(&alloc).enumerate() {
        if n < a {
            return Err(Error::PartitionTooSmall {
                partition: p,
                documents: n,
                allocated: a,
            });
        }
    }

    let v = model.num_terms();
    let mut rows = Vec::with_capacity(total_subtopics);
    for (p, docs) in partitions.iter().enumerate() {
        let params = LdaParams {
            k: alloc[p],
            seed: seed.wrapping_add(p as u64),
            ..sub_params.clone()
        };
        let (phi, _) = fit_lda_on_ids(docs, v, &params)?;
        rows.extend(phi);
    }
    for row in &mut rows {
        let s: f64 = row.iter().sum();
        for x in row.iter_mut() {
            *x /= s;
        }
    }
    let labels = default_labels(total_subtopics);
    let id = content_id("split", &rows, &labels);
    TopicModel::new(
        id,
        ModelKind::Initial,
        rows,
        labels,
        model.vocabulary().clone(),
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topics::fit_lda;

    #[test]
    fn largest_remainder_hand_case() {
        assert_eq!(allocate_subtopics(&[100, 50, 50], 8).unwrap(), [4, 2, 2]);
    }

    #[test]
    fn minimum_one_each() {
        assert_eq!(allocate_subtopics(&[1000, 1, 1], 5).unwrap(), [3, 1, 1]);
        assert_eq!(allocate_subtopics(&[3, 3, 3], 3).unwrap(), [1, 1, 1]);
    }

    #[test]
    fn remainder_goes_to_largest_fraction() {
        // quotas 3.5, 2.1, 1.4 -> floors 3, 2, 1, one leftover to the 0.5 remainder
        assert_eq!(allocate_subtopics(&[35, 21, 14], 7).unwrap(), [4, 2, 1]);
    }

    #[test]
    fn total_below_partitions_rejected() {
        assert!(allocate_subtopics(&[1, 1, 1], 2).is_err());
    }

    fn toy() -> Corpus {
        let mut docs = Vec::new();
        for i in 0..12 {
            if i % 2 == 0 {
                docs.push(vec!["photon", "laser", "optic", "photon"]);
            } else {
                docs.push(vec!["key", "secur", "protocol", "key"]);
            }
        }
        Corpus::from_tokens(&docs)
    }

    #[test]
    fn split_equal_to_k_keeps_count() {
        let c = toy();
        let p = LdaParams {
            k: 2,
            iterations: 50,
            alpha: Some(0.1),
            ..Default::default()
        };
        let (m, a) = fit_lda(&c, &p).unwrap();
        let s = split_topics(&m, &a, &c, 2, &p, 1).unwrap();
        assert_eq!(s.num_topics(), 2);
        let s = split_topics(&m, &a, &c, 5, &p, 1).unwrap();
        assert_eq!(s.labels().last().unwrap(), "T05");
        for row in s.rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn too_many_subtopics_for_partition() {
        let c = toy();
        let p = LdaParams {
            k: 2,
            iterations: 50,
            alpha: Some(0.1),
            ..Default::default()
        };
        let (m, a) = fit_lda(&c, &p).unwrap();
        assert!(matches!(
            split_topics(&m, &a, &c, 30, &p, 1),
            Err(Error::PartitionTooSmall { .. })
        ));
    }
}
