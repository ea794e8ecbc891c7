//! TransE (margin ranking) and DistMult (logistic) trained by mini-batch SGD.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmbedMethod, EmbeddingTable, KgeTrainConfig, Norm};
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;

/// Per-epoch mean loss over the corruptions sampled during that epoch, and
/// over one fixed corruption set drawn before training.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainTrace {
    pub epoch_loss: Vec<f64>,
    pub fixed_loss: Vec<f64>,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    let d = dims[0];
    match dims.iter().find(|&&x| x != d) {
        Some(&found) => Err(Error::DimensionMismatch { expected: d, found }),
        None => Ok(d),
    }
}

fn distance(x: &[f64], norm: Norm) -> f64 {
    match norm {
        Norm::L1 => x.iter().map(|v| v.abs()).sum(),
        Norm::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

fn distance_grad(x: &[f64], norm: Norm) -> Vec<f64> {
    match norm {
        Norm::L1 => x.iter().map(|v| v.signum() * (*v != 0.0) as u8 as f64).collect(),
        Norm::L2 => {
            let n = distance(x, Norm::L2);
            if n == 0.0 {
                vec![0.0; x.len()]
            } else {
                x.iter().map(|v| v / n).collect()
            }
        }
    }
}

fn residual(h: &[f64], r: &[f64], t: &[f64]) -> Vec<f64> {
    h.iter().zip(r).zip(t).map(|((h, r), t)| h + r - t).collect()
}

/// `-‖h + r - t‖`; higher is more plausible.
pub fn transe_score(h: &[f64], r: &[f64], t: &[f64], norm: Norm) -> Result<f64> {
    check_dims(&[h.len(), r.len(), t.len()])?;
    Ok(-distance(&residual(h, r, t), norm))
}

/// Trilinear product `Σ h_i r_i t_i`.
pub fn distmult_score(h: &[f64], r: &[f64], t: &[f64]) -> Result<f64> {
    check_dims(&[h.len(), r.len(), t.len()])?;
    Ok(h.iter().zip(r).zip(t).map(|((h, r), t)| h * r * t).sum())
}

/// Margin loss `max(0, γ + d(h+r-t) - d(h'+r-t'))` and its gradients with
/// respect to `[h, r, t, h', t']`.
pub fn transe_margin_loss(
    h: &[f64],
    r: &[f64],
    t: &[f64],
    h_neg: &[f64],
    t_neg: &[f64],
    margin: f64,
    norm: Norm,
) -> Result<(f64, [Vec<f64>; 5])> {
    let d = check_dims(&[h.len(), r.len(), t.len(), h_neg.len(), t_neg.len()])?;
    let pos = residual(h, r, t);
    let neg = residual(h_neg, r, t_neg);
    let loss = margin + distance(&pos, norm) - distance(&neg, norm);
    if loss <= 0.0 {
        return Ok((0.0, std::array::from_fn(|_| vec![0.0; d])));
    }
    let gp = distance_grad(&pos, norm);
    let gn = distance_grad(&neg, norm);
    let gr = gp.iter().zip(&gn).map(|(a, b)| a - b).collect();
    let gt = gp.iter().map(|v| -v).collect();
    let gh_neg = gn.iter().map(|v| -v).collect();
    Ok((loss, [gp, gr, gt, gh_neg, gn]))
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `softplus(-y·score) + λ(‖h‖² + ‖r‖² + ‖t‖²)` for label `y = ±1`, with
/// gradients with respect to `[h, r, t]`.
pub fn distmult_logistic_loss(
    h: &[f64],
    r: &[f64],
    t: &[f64],
    label: f64,
    l2_reg: f64,
) -> Result<(f64, [Vec<f64>; 3])> {
    let score = distmult_score(h, r, t)?;
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let loss = softplus(-label * score) + l2_reg * (sq(h) + sq(r) + sq(t));
    let ds = -label * sigmoid(-label * score);
    let grad = |a: &[f64], b: &[f64], own: &[f64]| -> Vec<f64> {
        a.iter()
            .zip(b)
            .zip(own)
            .map(|((a, b), o)| ds * a * b + 2.0 * l2_reg * o)
            .collect()
    };
    Ok((loss, [grad(r, t, h), grad(h, t, r), grad(h, r, t)]))
}

/// Dense parameter block with one row per entity or relation.
#[derive(Debug, Clone)]
pub(super) struct Params {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Params {
    fn uniform(rows: usize, dim: usize, bound: f64, rng: &mut ChaCha8Rng) -> Self {
        let data = (0..rows * dim).map(|_| rng.gen_range(-bound..=bound)).collect();
        Params { dim, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn project_to_ball(&mut self, i: usize) {
        let row = self.row_mut(i);
        let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1.0 {
            row.iter_mut().for_each(|x| *x /= n);
        }
    }

    fn normalize(&mut self, i: usize) {
        let row = self.row_mut(i);
        let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            row.iter_mut().for_each(|x| *x /= n);
        }
    }

    fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Gradient accumulator keyed by row, applied in ascending row order.
#[derive(Default)]
struct Grads {
    rows: HashMap<usize, Vec<f64>>,
}

impl Grads {
    fn add(&mut self, row: usize, g: &[f64]) {
        let acc = self.rows.entry(row).or_insert_with(|| vec![0.0; g.len()]);
        acc.iter_mut().zip(g).for_each(|(a, b)| *a += b);
    }

    fn apply(self, params: &mut Params, lr: f64) -> Vec<usize> {
        let mut touched: Vec<usize> = self.rows.keys().copied().collect();
        touched.sort_unstable();
        for &i in &touched {
            let g = &self.rows[&i];
            params.row_mut(i).iter_mut().zip(g).for_each(|(p, g)| *p -= lr * g);
        }
        touched
    }
}

pub(super) struct Indexed {
    pub triples: Vec<(usize, usize, usize)>,
    pub entities: usize,
    pub relations: usize,
}

pub(super) fn index_triples(kg: &KnowledgeGraph) -> Result<Indexed> {
    if kg.triple_count() == 0 {
        return Err(Error::Precondition("knowledge graph has no triples".into()));
    }
    let labels = kg.relation_labels();
    let triples = kg
        .triples()
        .iter()
        .map(|t| {
            let s = kg.node_index(&t.subject).expect("triple subject is a node");
            let o = kg.node_index(&t.object).expect("triple object is a node");
            let r = labels
                .binary_search_by(|l| l.as_str().cmp(t.relation.as_str()))
                .expect("relation label indexed");
            (s, r, o)
        })
        .collect();
    Ok(Indexed {
        triples,
        entities: kg.node_count(),
        relations: labels.len(),
    })
}

/// Initial `(entities, relations)` for both models: uniform in ±6/√d.
/// TransE additionally starts with unit relations and entities in the unit ball.
pub(super) fn init_params(data: &Indexed, config: &KgeTrainConfig, method: EmbedMethod) -> (Params, Params, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 6.0 / (config.dimension as f64).sqrt();
    let mut ent = Params::uniform(data.entities, config.dimension, bound, &mut rng);
    let mut rel = Params::uniform(data.relations, config.dimension, bound, &mut rng);
    if method == EmbedMethod::Transe {
        (0..data.relations).for_each(|i| rel.normalize(i));
        (0..data.entities).for_each(|i| ent.project_to_ball(i));
    }
    (ent, rel, rng)
}

fn corrupt(triple: Triple, entities: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let e = rng.gen_range(0..entities);
    if rng.gen_bool(0.5) {
        (e, triple.2)
    } else {
        (triple.0, e)
    }
}

fn into_table(
    kg: &KnowledgeGraph,
    method: EmbedMethod,
    config: &KgeTrainConfig,
    ent: &Params,
    rel: &Params,
) -> Result<EmbeddingTable> {
    let vectors = (0..ent.data.len() / ent.dim)
        .map(|i| (kg.node_at(i).clone(), ent.row(i).to_vec()))
        .collect();
    let relations: BTreeMap<String, Vec<f64>> = kg
        .relation_labels()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), rel.row(i).to_vec()))
        .collect();
    EmbeddingTable::new(method, config.dimension, config.seed, vectors, relations)
}

type Triple = (usize, usize, usize);

/// Shared epoch loop. `term` returns the summed loss of one positive triple
/// against its corruptions and the number of loss terms, adding gradients to
/// the accumulators when they are supplied.
fn train_loop(
    kg: &KnowledgeGraph,
    config: &KgeTrainConfig,
    method: EmbedMethod,
    term: impl Fn(&Params, &Params, Triple, &[(usize, usize)], Option<(&mut Grads, &mut Grads)>) -> Result<(f64, usize)>,
) -> Result<(EmbeddingTable, TrainTrace)> {
    config.validate()?;
    let data = index_triples(kg)?;
    let (mut ent, mut rel, mut rng) = init_params(&data, config, method);
    let k = config.negatives_per_positive;
    let sample = |t: Triple, rng: &mut ChaCha8Rng| -> Vec<(usize, usize)> {
        (0..k).map(|_| corrupt(t, data.entities, rng)).collect()
    };
    let mut fixed_rng = ChaCha8Rng::seed_from_u64(config.seed ^ FIXED_SET_SALT);
    let fixed: Vec<Vec<(usize, usize)>> = data.triples.iter().map(|&t| sample(t, &mut fixed_rng)).collect();

    let mut order: Vec<usize> = (0..data.triples.len()).collect();
    let mut trace = TrainTrace::default();
    for epoch in 0..config.epochs {
        let lr = config.rate_at(epoch as f64 / config.epochs as f64);
        order.shuffle(&mut rng);
        let (mut total, mut terms) = (0.0, 0usize);
        for batch in order.chunks(config.batch_size) {
            let (mut ge, mut gr) = (Grads::default(), Grads::default());
            for &i in batch {
                let negatives = sample(data.triples[i], &mut rng);
                let (l, n) = term(&ent, &rel, data.triples[i], &negatives, Some((&mut ge, &mut gr)))?;
                total += l;
                terms += n;
            }
            let touched = ge.apply(&mut ent, lr);
            gr.apply(&mut rel, lr);
            if method == EmbedMethod::Transe {
                touched.into_iter().for_each(|i| ent.project_to_ball(i));
            }
        }
        let mean = total / terms.max(1) as f64;
        let (mut fixed_total, mut fixed_terms) = (0.0, 0usize);
        for (&t, negatives) in data.triples.iter().zip(&fixed) {
            let (l, n) = term(&ent, &rel, t, negatives, None)?;
            fixed_total += l;
            fixed_terms += n;
        }
        let fixed_mean = fixed_total / fixed_terms.max(1) as f64;
        if !mean.is_finite() || !fixed_mean.is_finite() || !ent.all_finite() || !rel.all_finite() {
            return Err(Error::Divergence {
                epoch,
                learning_rate: lr,
            });
        }
        log::debug!("{method} epoch {epoch}: loss {mean:.6}, fixed-set loss {fixed_mean:.6}");
        trace.epoch_loss.push(mean);
        trace.fixed_loss.push(fixed_mean);
    }
    Ok((into_table(kg, method, config, &ent, &rel)?, trace))
}

const FIXED_SET_SALT: u64 = 0x5eed_f1fe_d5e7_0001;

/// TransE with corrupted-head-or-tail negatives; entity vectors are projected
/// back into the unit L2 ball after every update.
pub fn train_transe(kg: &KnowledgeGraph, config: &KgeTrainConfig) -> Result<(EmbeddingTable, TrainTrace)> {
    train_loop(kg, config, EmbedMethod::Transe, |ent, rel, (s, r, o), negatives, mut grads| {
        let mut total = 0.0;
        for &(hn, tn) in negatives {
            let (loss, [gh, grr, gt, ghn, gtn]) = transe_margin_loss(
                ent.row(s),
                rel.row(r),
                ent.row(o),
                ent.row(hn),
                ent.row(tn),
                config.margin,
                config.norm,
            )?;
            if let (true, Some((ge, gr))) = (loss > 0.0, grads.as_mut()) {
                ge.add(s, &gh);
                ge.add(o, &gt);
                ge.add(hn, &ghn);
                ge.add(tn, &gtn);
                gr.add(r, &grr);
            }
            total += loss;
        }
        Ok((total, negatives.len()))
    })
}

/// DistMult with logistic loss over each positive and its corruptions.
pub fn train_distmult(kg: &KnowledgeGraph, config: &KgeTrainConfig) -> Result<(EmbeddingTable, TrainTrace)> {
    train_loop(kg, config, EmbedMethod::Distmult, |ent, rel, (s, r, o), negatives, mut grads| {
        let examples = std::iter::once((s, o, 1.0)).chain(negatives.iter().map(|&(h, t)| (h, t, -1.0)));
        let mut total = 0.0;
        for (h, t, y) in examples {
            let (loss, [gh, grr, gt]) = distmult_logistic_loss(ent.row(h), rel.row(r), ent.row(t), y, config.l2_reg)?;
            if let Some((ge, gr)) = grads.as_mut() {
                ge.add(h, &gh);
                ge.add(t, &gt);
                gr.add(r, &grr);
            }
            total += loss;
        }
        Ok((total, negatives.len() + 1))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{KgVariant, NodeId, Relation, Triple};
    use crate::types::TermId;
    use std::collections::BTreeSet;

    fn node(s: &str) -> NodeId {
        NodeId::Term(TermId::new(s).unwrap())
    }

    fn kg_of(edges: &[(&str, &str, &str)]) -> KnowledgeGraph {
        let triples: BTreeSet<Triple> = edges
            .iter()
            .map(|(s, r, o)| Triple::new(node(s), Relation::from(*r), node(o)))
            .collect();
        KnowledgeGraph::from_parts(KgVariant::Hp, BTreeSet::new(), triples)
    }

    fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn rel_err(analytic: f64, numeric: f64) -> f64 {
        (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
    }

    #[test]
    fn score_examples() {
        let s = transe_score(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0], Norm::L2).unwrap();
        assert_eq!(s, -(2f64.sqrt()));
        assert_eq!(transe_score(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0], Norm::L1).unwrap(), -2.0);
        assert_eq!(transe_score(&[1.0, 2.0], &[0.5, 0.5], &[1.5, 2.5], Norm::L2).unwrap(), 0.0);
        assert!(transe_score(&[1.0], &[1.0, 2.0], &[0.0], Norm::L2).is_err());

        assert_eq!(distmult_score(&[1.0, 2.0], &[1.0, 1.0], &[2.0, 1.0]).unwrap(), 4.0);
        assert_eq!(distmult_score(&[0.0, 0.0], &[3.0, 1.0], &[2.0, 1.0]).unwrap(), 0.0);
        let (h, t) = ([0.3, -1.2, 2.0], [1.5, 0.25, -0.5]);
        let dot: f64 = h.iter().zip(&t).map(|(a, b)| a * b).sum();
        assert_eq!(distmult_score(&h, &[1.0; 3], &t).unwrap(), dot);
        assert!(distmult_score(&[1.0], &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn transe_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eps = 1e-6;
        for norm in [Norm::L2, Norm::L1] {
            let mut checked = 0;
            while checked < 50 {
                let mut args: Vec<Vec<f64>> = (0..5).map(|_| random_vec(&mut rng, 6)).collect();
                let f = |a: &[Vec<f64>]| transe_margin_loss(&a[0], &a[1], &a[2], &a[3], &a[4], 1.0, norm).unwrap().0;
                let (loss, grads) = transe_margin_loss(&args[0], &args[1], &args[2], &args[3], &args[4], 1.0, norm).unwrap();
                // stay away from the hinge and from L1 kinks
                if loss < 1e-3 || (norm == Norm::L1 && args.iter().flatten().any(|x| x.abs() < 1e-3)) {
                    continue;
                }
                for a in 0..5 {
                    for k in 0..6 {
                        let orig = args[a][k];
                        args[a][k] = orig + eps;
                        let up = f(&args);
                        args[a][k] = orig - eps;
                        let down = f(&args);
                        args[a][k] = orig;
                        let numeric = (up - down) / (2.0 * eps);
                        if norm == Norm::L1 && (up - down).abs() > 0.0 && numeric.abs() < 1e-9 {
                            continue;
                        }
                        assert!(rel_err(grads[a][k], numeric) < 1e-4, "{norm:?} arg {a}[{k}]");
                    }
                }
                checked += 1;
            }
        }
    }

    #[test]
    fn distmult_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let eps = 1e-6;
        for i in 0..50 {
            let mut args: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, 5)).collect();
            let y = if i % 2 == 0 { 1.0 } else { -1.0 };
            let f = |a: &[Vec<f64>]| distmult_logistic_loss(&a[0], &a[1], &a[2], y, 0.01).unwrap().0;
            let (_, grads) = distmult_logistic_loss(&args[0], &args[1], &args[2], y, 0.01).unwrap();
            for a in 0..3 {
                for k in 0..5 {
                    let orig = args[a][k];
                    args[a][k] = orig + eps;
                    let up = f(&args);
                    args[a][k] = orig - eps;
                    let down = f(&args);
                    args[a][k] = orig;
                    assert!(rel_err(grads[a][k], (up - down) / (2.0 * eps)) < 1e-4);
                }
            }
        }
    }

    fn toy12() -> KnowledgeGraph {
        kg_of(&[
            ("HP:1", "is_a", "HP:0"),
            ("HP:2", "is_a", "HP:0"),
            ("HP:3", "is_a", "HP:1"),
            ("HP:4", "is_a", "HP:1"),
            ("HP:5", "is_a", "HP:2"),
            ("HP:6", "is_a", "HP:2"),
            ("HP:7", "is_a", "HP:3"),
            ("HP:8", "is_a", "HP:4"),
            ("HP:9", "is_a", "HP:5"),
            ("HP:10", "is_a", "HP:6"),
            ("HP:11", "is_a", "HP:6"),
            ("HP:7", "part_of", "HP:8"),
            ("HP:9", "part_of", "HP:10"),
        ])
    }

    fn toy_config() -> KgeTrainConfig {
        KgeTrainConfig {
            dimension: 16,
            epochs: 60,
            learning_rate: 0.05,
            batch_size: 4,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn transe_loss_decreases_and_stays_in_ball() {
        let (table, trace) = train_transe(&toy12(), &toy_config()).unwrap();
        assert_eq!(trace.epoch_loss.len(), 60);
        // single epochs jitter with the resampled corruptions; 20-epoch means
        // of the fixed-set loss must not increase
        let windows: Vec<f64> = trace.fixed_loss.chunks(20).map(|w| w.iter().sum::<f64>() / 20.0).collect();
        assert!(windows.windows(2).all(|w| w[1] <= w[0]), "{windows:?}");
        assert!(trace.fixed_loss[59] < trace.fixed_loss[0]);
        for v in table.vectors().values() {
            assert!(v.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1.0 + 1e-9);
        }
        assert_eq!(table.len(), 12);
    }

    #[test]
    fn transe_translation_consistency() {
        let kg = kg_of(&[("HP:1", "r", "HP:2"), ("HP:3", "r", "HP:4")]);
        let config = KgeTrainConfig {
            dimension: 8,
            epochs: 200,
            learning_rate: 0.05,
            negatives_per_positive: 2,
            seed: 5,
            ..Default::default()
        };
        let gap = |v: &dyn Fn(&str) -> Vec<f64>| {
            let (a, b, c, d) = (v("HP:1"), v("HP:2"), v("HP:3"), v("HP:4"));
            (0..8)
                .map(|k| ((b[k] - a[k]) - (d[k] - c[k])).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let data = index_triples(&kg).unwrap();
        let (ent0, _, _) = init_params(&data, &config, EmbedMethod::Transe);
        let before = gap(&|s| ent0.row(kg.node_index(&node(s)).unwrap()).to_vec());
        let (table, _) = train_transe(&kg, &config).unwrap();
        let after = gap(&|s| table.get(&node(s)).unwrap().to_vec());
        assert!(after < before, "{before} -> {after}");
    }

    #[test]
    fn distmult_ranks_true_triples_above_corruptions() {
        let mut edges = Vec::new();
        let names: Vec<String> = (0..16).map(|i| format!("HP:{i}")).collect();
        for i in 0..8 {
            edges.push((names[i].as_str(), "r1", names[(i + 1) % 8].as_str()));
            edges.push((names[8 + i].as_str(), "r2", names[8 + (i + 3) % 8].as_str()));
        }
        let kg = kg_of(&edges);
        let config = KgeTrainConfig {
            dimension: 16,
            epochs: 300,
            learning_rate: 0.1,
            batch_size: 4,
            seed: 9,
            ..Default::default()
        };
        let (table, _) = train_distmult(&kg, &config).unwrap();
        assert_eq!(table.len(), 16);
        assert!(table.relation("r1").is_some() && table.relation("r2").is_some());
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let (mut wins, mut total) = (0, 0);
        for t in kg.triples() {
            let r = table.relation(t.relation.as_str()).unwrap();
            let truth = distmult_score(table.get(&t.subject).unwrap(), r, table.get(&t.object).unwrap()).unwrap();
            for _ in 0..20 {
                let other = node(&names[rng.gen_range(0..16)]);
                let (h, o) = if rng.gen_bool(0.5) {
                    (&other, &t.object)
                } else {
                    (&t.subject, &other)
                };
                let corrupted = Triple::new(h.clone(), t.relation.clone(), o.clone());
                if kg.triples().contains(&corrupted) {
                    continue;
                }
                let s = distmult_score(table.get(h).unwrap(), r, table.get(o).unwrap()).unwrap();
                wins += (truth > s) as usize;
                total += 1;
            }
        }
        assert!(wins as f64 >= 0.8 * total as f64, "{wins}/{total}");
    }

    #[test]
    fn seeded_runs_are_identical() {
        let (a, _) = train_transe(&toy12(), &toy_config()).unwrap();
        let (b, _) = train_transe(&toy12(), &toy_config()).unwrap();
        assert_eq!(a.export(), b.export());
        let (a, _) = train_distmult(&toy12(), &toy_config()).unwrap();
        let (b, _) = train_distmult(&toy12(), &toy_config()).unwrap();
        assert_eq!(a.export(), b.export());
    }

    #[test]
    fn divergence_is_reported() {
        let config = KgeTrainConfig {
            learning_rate: 1e300,
            l2_reg: 1.0,
            ..toy_config()
        };
        assert!(matches!(train_distmult(&toy12(), &config), Err(Error::Divergence { epoch: 0, .. })));
    }

    #[test]
    fn empty_graph_rejected() {
        let kg = KnowledgeGraph::from_parts(KgVariant::Hp, BTreeSet::new(), BTreeSet::new());
        assert!(matches!(train_transe(&kg, &toy_config()), Err(Error::Precondition(_))));
    }
}
