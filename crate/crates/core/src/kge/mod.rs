//! Node embeddings: TransE, DistMult and skip-gram over walk or lexical corpora.

mod skipgram;
mod translational;
mod walks;

pub use skipgram::{skipgram_loss, train_skipgram};
pub use translational::{
    distmult_logistic_loss, distmult_score, train_distmult, train_transe, transe_margin_loss, transe_score,
    TrainTrace,
};
pub use walks::{build_lexical_corpus, generate_walks, tokenize_lexical, WalkCorpus};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{KnowledgeGraph, NodeId};
use crate::ontology_io::Ontology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedMethod {
    Transe,
    Distmult,
    Walk,
    WalkLexical,
}

impl EmbedMethod {
    pub const ALL: [EmbedMethod; 4] = [
        EmbedMethod::Transe,
        EmbedMethod::Distmult,
        EmbedMethod::Walk,
        EmbedMethod::WalkLexical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EmbedMethod::Transe => "transe",
            EmbedMethod::Distmult => "distmult",
            EmbedMethod::Walk => "walk",
            EmbedMethod::WalkLexical => "walk_lexical",
        }
    }
}

impl fmt::Display for EmbedMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmbedMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EmbedMethod::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown embedding method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Norm {
    L1,
    #[default]
    L2,
}

/// Training hyperparameters shared by every embedding method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KgeTrainConfig {
    pub dimension: usize,
    pub epochs: usize,
    /// Initial rate; decays linearly towards zero over training.
    pub learning_rate: f64,
    /// TransE margin.
    pub margin: f64,
    pub negatives_per_positive: usize,
    pub batch_size: usize,
    pub walks_per_node: usize,
    pub walk_depth: usize,
    pub window: usize,
    pub seed: u64,
    /// TransE distance.
    pub norm: Norm,
    /// DistMult L2 penalty on the embeddings touched by a triple.
    pub l2_reg: f64,
}

impl Default for KgeTrainConfig {
    fn default() -> Self {
        KgeTrainConfig {
            dimension: 200,
            epochs: 100,
            learning_rate: 0.025,
            margin: 1.0,
            negatives_per_positive: 5,
            batch_size: 128,
            walks_per_node: 100,
            walk_depth: 4,
            window: 5,
            seed: 0,
            norm: Norm::L2,
            l2_reg: 1e-4,
        }
    }
}

impl KgeTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("dimension", self.dimension),
            ("epochs", self.epochs),
            ("negatives_per_positive", self.negatives_per_positive),
            ("batch_size", self.batch_size),
            ("walks_per_node", self.walks_per_node),
            ("walk_depth", self.walk_depth),
            ("window", self.window),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::Config("margin must be positive".into()));
        }
        if !(self.l2_reg >= 0.0 && self.l2_reg.is_finite()) {
            return Err(Error::Config("l2_reg must be non-negative".into()));
        }
        Ok(())
    }

    /// Linearly decayed rate at `progress` in [0, 1], floored at 1e-4 of the start.
    pub(crate) fn rate_at(&self, progress: f64) -> f64 {
        self.learning_rate * (1.0 - progress).max(1e-4)
    }
}

/// Trained node vectors. Relation vectors (TransE, DistMult) are kept for
/// inspection but never exported.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub method: EmbedMethod,
    pub dimension: usize,
    pub seed: u64,
    vectors: BTreeMap<NodeId, Vec<f64>>,
    relations: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(
        method: EmbedMethod,
        dimension: usize,
        seed: u64,
        vectors: BTreeMap<NodeId, Vec<f64>>,
        relations: BTreeMap<String, Vec<f64>>,
    ) -> Result<Self> {
        for v in vectors.values().chain(relations.values()) {
            if v.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("non-finite embedding component".into()));
            }
        }
        Ok(EmbeddingTable {
            method,
            dimension,
            seed,
            vectors,
            relations,
        })
    }

    pub fn get(&self, node: &NodeId) -> Option<&[f64]> {
        self.vectors.get(node).map(Vec::as_slice)
    }

    pub fn relation(&self, label: &str) -> Option<&[f64]> {
        self.relations.get(label).map(Vec::as_slice)
    }

    pub fn vectors(&self) -> &BTreeMap<NodeId, Vec<f64>> {
        &self.vectors
    }

    pub fn relations(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `node_count dimension`, then `node c1 c2 ...` per node in id order.
    /// Components use the shortest representation that parses back exactly.
    pub fn export(&self) -> String {
        let mut out = format!("{} {}\n", self.vectors.len(), self.dimension);
        for (node, v) in &self.vectors {
            out.push_str(&node.to_string());
            for x in v {
                out.push(' ');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn import(method: EmbedMethod, seed: u64, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let parse_err = |line: usize, message: String| Error::Parse { line: line + 1, message };
        let (_, header) = lines.next().ok_or_else(|| Error::EmptyInput("embedding file".into()))?;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(0, format!("bad header: {e}")))?;
        let [count, dimension] = head[..] else {
            return Err(parse_err(0, "header must be `node_count dimension`".into()));
        };
        let mut vectors = BTreeMap::new();
        for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
            let mut parts = line.split(' ');
            let node: NodeId = parts
                .next()
                .unwrap_or_default()
                .parse()
                .map_err(|e: Error| parse_err(i, e.to_string()))?;
            let v: Vec<f64> = parts
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(i, format!("bad component: {e}")))?;
            if v.len() != dimension {
                return Err(parse_err(i, format!("expected {dimension} components, found {}", v.len())));
            }
            vectors.insert(node, v);
        }
        if vectors.len() != count {
            return Err(parse_err(0, format!("header declares {count} nodes, found {}", vectors.len())));
        }
        EmbeddingTable::new(method, dimension, seed, vectors, BTreeMap::new())
    }
}

/// Train embeddings for `kg` with `method`. `lexicon` supplies the labels,
/// synonyms and definitions used by `walk_lexical`; other methods ignore it.
pub fn embed(
    kg: &KnowledgeGraph,
    method: EmbedMethod,
    config: &KgeTrainConfig,
    lexicon: &[&Ontology],
) -> Result<EmbeddingTable> {
    config.validate()?;
    match method {
        EmbedMethod::Transe => train_transe(kg, config).map(|(t, _)| t),
        EmbedMethod::Distmult => train_distmult(kg, config).map(|(t, _)| t),
        EmbedMethod::Walk => {
            let corpus = generate_walks(kg, config.walks_per_node, config.walk_depth, config.seed)?;
            train_skipgram(&corpus, config).map(|t| EmbeddingTable { method, ..t })
        }
        EmbedMethod::WalkLexical => {
            let mut corpus = generate_walks(kg, config.walks_per_node, config.walk_depth, config.seed)?;
            corpus.extend(build_lexical_corpus(kg, lexicon));
            train_skipgram(&corpus, config).map(|t| EmbeddingTable { method, ..t })
        }
    }
}
