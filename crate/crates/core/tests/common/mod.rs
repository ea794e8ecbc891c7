//! Random fixtures and brute-force oracles shared by the integration tests
//! and the acceptance harness. The oracles work on plain index lists and
//! share no code with the library.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ontokge::kg::{KgVariant, KnowledgeGraph, NodeId, Relation, Triple};
use ontokge::ontology_io::AnnotationMap;
use ontokge::semsim::Aggregation;
use ontokge::{EntityId, Label, TermId};
use rand::Rng;

/// DAG over terms `0..n` (parents always have smaller indices) plus entity
/// annotation lists.
#[derive(Debug, Clone)]
pub struct RandomDag {
    pub parents: Vec<Vec<usize>>,
    pub entities: Vec<Vec<usize>>,
}

pub fn term(k: usize) -> TermId {
    TermId::new(&format!("T:{k:03}")).unwrap()
}

pub fn entity(i: usize) -> EntityId {
    EntityId::gene(&format!("e{i}")).unwrap()
}

impl RandomDag {
    /// Term 0 is a root; every later term becomes an extra root with
    /// probability `extra_roots`.
    pub fn generate(
        rng: &mut impl Rng,
        max_terms: usize,
        max_entities: usize,
        max_annotations: usize,
        extra_roots: f64,
    ) -> Self {
        let n = rng.gen_range(2..=max_terms);
        let parents = (0..n)
            .map(|k| {
                if k == 0 || rng.gen_bool(extra_roots) {
                    return Vec::new();
                }
                let count = rng.gen_range(1..=3.min(k));
                let mut ps: Vec<usize> = (0..count).map(|_| rng.gen_range(0..k)).collect();
                ps.sort_unstable();
                ps.dedup();
                ps
            })
            .collect();
        let entities = (0..rng.gen_range(1..=max_entities))
            .map(|_| {
                let mut ts: Vec<usize> = (0..rng.gen_range(1..=max_annotations)).map(|_| rng.gen_range(0..n)).collect();
                ts.sort_unstable();
                ts.dedup();
                ts
            })
            .collect();
        RandomDag { parents, entities }
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&t| !self.parents.iter().any(|ps| ps.contains(&t))).collect()
    }

    pub fn kg(&self) -> KnowledgeGraph {
        let nodes = (0..self.len()).map(|k| NodeId::Term(term(k))).collect();
        let triples = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| Triple::new(term(c), Relation::SubClassOf, term(p))))
            .collect();
        KnowledgeGraph::from_parts(KgVariant::Hp, nodes, triples)
    }

    pub fn annotations(&self) -> AnnotationMap {
        self.entities
            .iter()
            .enumerate()
            .flat_map(|(i, ts)| ts.iter().map(move |&t| (entity(i), term(t))))
            .collect()
    }

    pub fn term_set(&self, ts: &[usize]) -> BTreeSet<TermId> {
        ts.iter().map(|&t| term(t)).collect()
    }

    /// Reachability by repeated expansion until nothing changes.
    pub fn ancestors(&self, t: usize) -> BTreeSet<usize> {
        let mut set = BTreeSet::from([t]);
        loop {
            let next: BTreeSet<usize> = set
                .iter()
                .flat_map(|&x| self.parents[x].iter().copied())
                .chain(set.iter().copied())
                .collect();
            if next.len() == set.len() {
                return set;
            }
            set = next;
        }
    }

    pub fn ancestors_of_set(&self, ts: &[usize]) -> BTreeSet<usize> {
        ts.iter().flat_map(|&t| self.ancestors(t)).collect()
    }

    pub fn ic_seco(&self) -> Vec<Option<f64>> {
        let n = self.len() as f64;
        (0..self.len())
            .map(|c| {
                let desc = (0..self.len()).filter(|&x| x != c && self.ancestors(x).contains(&c)).count();
                Some(1.0 - ((desc + 1) as f64).ln() / n.ln())
            })
            .collect()
    }

    pub fn ic_resnik(&self) -> Vec<Option<f64>> {
        let total = self.entities.len() as f64;
        (0..self.len())
            .map(|c| {
                let count = self
                    .entities
                    .iter()
                    .filter(|ts| self.ancestors_of_set(ts).contains(&c))
                    .count();
                (count > 0).then(|| (total / count as f64).ln())
            })
            .collect()
    }

    pub fn resnik(&self, ic: &[Option<f64>], a: usize, b: usize) -> f64 {
        let (xa, xb) = (self.ancestors(a), self.ancestors(b));
        (0..self.len())
            .filter(|c| xa.contains(c) && xb.contains(c))
            .filter_map(|c| ic[c])
            .fold(0.0, f64::max)
    }

    pub fn groupwise(&self, ic: &[Option<f64>], a: &[usize], b: &[usize], aggregation: Aggregation) -> f64 {
        let matrix: Vec<Vec<f64>> = a.iter().map(|&x| b.iter().map(|&y| self.resnik(ic, x, y)).collect()).collect();
        match aggregation {
            Aggregation::Max => matrix.iter().flatten().copied().fold(0.0, f64::max),
            Aggregation::Bma => {
                let rows: f64 = matrix.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).sum();
                let cols: f64 = (0..b.len())
                    .map(|j| matrix.iter().map(|r| r[j]).fold(0.0, f64::max))
                    .sum();
                0.5 * (rows / a.len() as f64 + cols / b.len() as f64)
            }
            Aggregation::SimGic => {
                let (xa, xb) = (self.ancestors_of_set(a), self.ancestors_of_set(b));
                let w = |c: &usize| ic[*c].unwrap_or(0.0);
                let num: f64 = xa.intersection(&xb).map(w).sum();
                let den: f64 = xa.union(&xb).map(w).sum();
                if den > 0.0 {
                    num / den
                } else {
                    0.0
                }
            }
        }
    }
}

/// `(concordant + ties/2) / (positives · negatives)` by enumerating pairs.
pub fn auc_by_pairs(truth: &[Label], scores: &[f64]) -> f64 {
    let mut hits = 0.0;
    let mut pairs = 0.0;
    for (i, ti) in truth.iter().enumerate() {
        for (j, tj) in truth.iter().enumerate() {
            if *ti == Label::Positive && *tj == Label::Negative {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    hits += 1.0;
                } else if scores[i] == scores[j] {
                    hits += 0.5;
                }
            }
        }
    }
    hits / pairs
}

/// Support-weighted F1 from confusion counts.
pub fn waf_by_counts(truth: &[Label], predicted: &[Label]) -> f64 {
    let f1 = |label: Label| {
        let tp = truth.iter().zip(predicted).filter(|(t, p)| **t == label && **p == label).count() as f64;
        let fp = truth.iter().zip(predicted).filter(|(t, p)| **t != label && **p == label).count() as f64;
        let fn_ = truth.iter().zip(predicted).filter(|(t, p)| **t == label && **p != label).count() as f64;
        if tp == 0.0 {
            0.0
        } else {
            2.0 * tp / (2.0 * tp + fp + fn_)
        }
    };
    let n = truth.len() as f64;
    [Label::Negative, Label::Positive]
        .into_iter()
        .map(|l| truth.iter().filter(|t| **t == l).count() as f64 / n * f1(l))
        .sum()
}

/// Labels with both classes present.
pub fn random_labels(rng: &mut impl Rng, n: usize) -> Vec<Label> {
    let mut y: Vec<Label> = (0..n).map(|_| Label::from_bool(rng.gen_bool(0.5))).collect();
    y[0] = Label::Positive;
    y[n - 1] = Label::Negative;
    y
}
