//! Brute-force reference implementations used to check the library.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution, WeightedIndex};

/// tf-idf by direct definition: for each term, walk every document.
pub fn tfidf(docs: &[Vec<String>]) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let mut terms: Vec<&String> = docs.iter().flatten().collect();
    terms.sort();
    terms.dedup();
    terms
        .into_iter()
        .map(|t| {
            let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
            let mut sum = 0.0;
            for d in docs {
                if d.is_empty() {
                    continue;
                }
                let c = d.iter().filter(|x| *x == t).count();
                if c > 0 {
                    sum += (c as f64 / d.len() as f64) * (n / df).ln();
                }
            }
            (t.clone(), sum / n)
        })
        .collect()
}

/// Sort by score descending, then term; keep `k`.
pub fn ranking(mut scores: Vec<(String, f64)>, k: usize) -> Vec<String> {
    scores.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scores.into_iter().take(k).map(|(t, _)| t).collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Match each true topic to its most similar unused recovered topic, best pairs first.
pub fn greedy_match(truth: &[Vec<f64>], found: &[Vec<f64>]) -> Vec<f64> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, t) in truth.iter().enumerate() {
        for (j, f) in found.iter().enumerate() {
            pairs.push((cosine(t, f), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut score = vec![f64::NAN; truth.len()];
    let mut used = vec![false; found.len()];
    for (c, i, j) in pairs {
        if score[i].is_nan() && !used[j] {
            score[i] = c;
            used[j] = true;
        }
    }
    score
}

/// Three topics over 30 words with mostly disjoint supports, 500 documents
/// drawn from the LDA generative process.
pub fn synthetic_lda(seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<String>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = 30;
    let topics: Vec<Vec<f64>> = (0..3)
        .map(|k| {
            let mut row: Vec<f64> = (0..v)
                .map(|w| {
                    if w / 10 == k {
                        1.0 + (w % 10) as f64 / 10.0
                    } else {
                        0.02
                    }
                })
                .collect();
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
            row
        })
        .collect();
    let words: Vec<String> = (0..v).map(|w| format!("w{w:02}")).collect();
    let theta = Dirichlet::new(&[0.3; 3]).unwrap();
    let word_dists: Vec<WeightedIndex<f64>> = topics
        .iter()
        .map(|t| WeightedIndex::new(t).unwrap())
        .collect();
    let docs = (0..500)
        .map(|_| {
            let mix = theta.sample(&mut rng);
            let pick = WeightedIndex::new(&mix).unwrap();
            (0..60)
                .map(|_| words[word_dists[pick.sample(&mut rng)].sample(&mut rng)].clone())
                .collect()
        })
        .collect();
    (topics, docs)
}
