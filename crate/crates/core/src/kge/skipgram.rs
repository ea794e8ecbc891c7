//! Skip-gram with negative sampling over a token corpus.

use std::collections::{BTreeMap, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmbedMethod, EmbeddingTable, KgeTrainConfig, WalkCorpus};
use crate::error::{Error, Result};
use crate::kg::NodeId;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Loss, center gradient, context gradient and per-negative gradients.
pub type SkipgramGradients = (f64, Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

/// Negative-sampling objective for one (center, context) pair:
/// `-ln σ(u_ctx·v) - Σ ln σ(-u_neg·v)`.
///
/// Returns the loss and gradients for the center input vector, the context
/// output vector and each negative output vector.
pub fn skipgram_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> Result<SkipgramGradients> {
    let d = center.len();
    for v in std::iter::once(context).chain(negatives.iter().copied()) {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: v.len() });
        }
    }
    let mut g_center = vec![0.0; d];
    let s = dot(context, center);
    let mut loss = -sigmoid(s).ln();
    // d/ds[-ln σ(s)] = σ(s) - 1
    let c = sigmoid(s) - 1.0;
    let g_context: Vec<f64> = center.iter().map(|v| c * v).collect();
    g_center.iter_mut().zip(context).for_each(|(g, u)| *g += c * u);
    let mut g_negs = Vec::with_capacity(negatives.len());
    for u in negatives {
        let s = dot(u, center);
        loss -= sigmoid(-s).ln();
        // d/ds[-ln σ(-s)] = σ(s)
        let c = sigmoid(s);
        g_negs.push(center.iter().map(|v| c * v).collect());
        g_center.iter_mut().zip(u.iter()).for_each(|(g, u)| *g += c * u);
    }
    Ok((loss, g_center, g_context, g_negs))
}

/// Train skip-gram vectors and keep those of node tokens.
///
/// Every token within `window` positions of a center token is a positive
/// context; each positive draws `negatives_per_positive` noise tokens from the
/// unigram distribution raised to 0.75. Updates are sequential, so a seed
/// fixes the result.
pub fn train_skipgram(corpus: &WalkCorpus, config: &KgeTrainConfig) -> Result<EmbeddingTable> {
    config.validate()?;
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for tok in corpus.sentences.iter().flatten() {
        *counts.entry(tok.as_str()).or_insert(0) += 1;
    }
    if counts.len() < 2 {
        return Err(Error::DegenerateCorpus(format!(
            "vocabulary has {} token(s), need at least 2",
            counts.len()
        )));
    }
    let vocab: Vec<&str> = counts.keys().copied().collect();
    let index: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, t)| (*t, i as u32)).collect();
    let noise = WeightedIndex::new(counts.values().map(|&c| (c as f64).powf(0.75)))
        .map_err(|e| Error::DegenerateCorpus(e.to_string()))?;
    let sentences: Vec<Vec<u32>> = corpus
        .sentences
        .iter()
        .map(|s| s.iter().map(|t| index[t.as_str()]).collect())
        .collect();

    let d = config.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input: Vec<f64> = (0..vocab.len() * d)
        .map(|_| rng.gen_range(-0.5..0.5) / d as f64)
        .collect();
    let mut output = vec![0.0; vocab.len() * d];
    let mut grad = vec![0.0; d];

    let tokens_per_epoch: usize = sentences.iter().map(Vec::len).sum();
    let total = (tokens_per_epoch * config.epochs) as f64;
    let mut seen = 0usize;
    for epoch in 0..config.epochs {
        let mut loss = 0.0;
        let mut lr = config.learning_rate;
        for sentence in &sentences {
            for (i, &center) in sentence.iter().enumerate() {
                lr = config.rate_at(seen as f64 / total);
                seen += 1;
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window + 1).min(sentence.len());
                for j in (lo..hi).filter(|&j| j != i) {
                    let target = sentence[j];
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let c0 = center as usize * d;
                    for k in 0..=config.negatives_per_positive {
                        let (word, label) = if k == 0 {
                            (target, 1.0)
                        } else {
                            let w = noise.sample(&mut rng) as u32;
                            if w == target {
                                continue;
                            }
                            (w, 0.0)
                        };
                        let o0 = word as usize * d;
                        let s = dot(&input[c0..c0 + d], &output[o0..o0 + d]);
                        let p = sigmoid(s);
                        loss -= if label == 1.0 { p.ln() } else { (1.0 - p).ln() };
                        let g = (label - p) * lr;
                        for x in 0..d {
                            grad[x] += g * output[o0 + x];
                            output[o0 + x] += g * input[c0 + x];
                        }
                    }
                    input[c0..c0 + d].iter_mut().zip(&grad).for_each(|(v, g)| *v += g);
                }
            }
        }
        if !loss.is_finite() || input.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { epoch, learning_rate: lr });
        }
        log::debug!("skip-gram epoch {epoch}: loss {:.4}", loss / tokens_per_epoch.max(1) as f64);
    }

    let mut vectors = BTreeMap::new();
    for tok in &corpus.node_tokens {
        let Some(&i) = index.get(tok.as_str()) else {
            continue;
        };
        let node: NodeId = tok.parse()?;
        let i = i as usize * d;
        vectors.insert(node, input[i..i + d].to_vec());
    }
    EmbeddingTable::new(EmbedMethod::Walk, d, config.seed, vectors, BTreeMap::new())
}
