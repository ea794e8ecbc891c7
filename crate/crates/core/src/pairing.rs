//! Gene/disease vector combination and cosine similarity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::AssociationDataset;
use crate::kg::NodeId;
use crate::kge::{EmbedMethod, EmbeddingTable};
use crate::types::EntityId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOperator {
    Concatenation,
    Average,
    Hadamard,
    WeightedL1,
    WeightedL2,
}

impl PairOperator {
    pub const ALL: [PairOperator; 5] = [
        PairOperator::Concatenation,
        PairOperator::Average,
        PairOperator::Hadamard,
        PairOperator::WeightedL1,
        PairOperator::WeightedL2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PairOperator::Concatenation => "concatenation",
            PairOperator::Average => "average",
            PairOperator::Hadamard => "hadamard",
            PairOperator::WeightedL1 => "weighted_l1",
            PairOperator::WeightedL2 => "weighted_l2",
        }
    }

    pub fn output_dimension(self, d: usize) -> usize {
        match self {
            PairOperator::Concatenation => 2 * d,
            _ => d,
        }
    }
}

impl fmt::Display for PairOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PairOperator::ALL
            .into_iter()
            .find(|o| o.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown pair operator `{s}`")))
    }
}

/// Combine a gene vector `g` and a disease vector `d`. Concatenation puts the
/// gene first.
pub fn combine(g: &[f64], d: &[f64], op: PairOperator) -> Result<Vec<f64>> {
    if g.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            found: d.len(),
        });
    }
    let zip = g.iter().zip(d);
    Ok(match op {
        PairOperator::Concatenation => g.iter().chain(d).copied().collect(),
        PairOperator::Average => zip.map(|(a, b)| (a + b) / 2.0).collect(),
        PairOperator::Hadamard => zip.map(|(a, b)| a * b).collect(),
        PairOperator::WeightedL1 => zip.map(|(a, b)| (a - b).abs()).collect(),
        PairOperator::WeightedL2 => zip.map(|(a, b)| (a - b) * (a - b)).collect(),
    })
}

/// Cosine similarity in [-1, 1].
pub fn cosine(g: &[f64], d: &[f64]) -> Result<f64> {
    if g.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            found: d.len(),
        });
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (ng, nd) = (norm(g), norm(d));
    if ng == 0.0 || nd == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    let dot: f64 = g.iter().zip(d).map(|(a, b)| a * b).sum();
    Ok((dot / (ng * nd)).clamp(-1.0, 1.0))
}

/// Cosine mapped onto [0, 1] by `(1 + cs) / 2` for threshold sweeps.
pub fn cosine_score(g: &[f64], d: &[f64]) -> Result<f64> {
    cosine(g, d).map(|c| (1.0 + c) / 2.0)
}

fn entity_vector<'a>(table: &'a EmbeddingTable, e: &EntityId) -> Result<&'a [f64]> {
    table
        .get(&NodeId::Entity(e.clone()))
        .ok_or_else(|| Error::Lookup(format!("no embedding for {e}")))
}

/// Pair representations aligned one-to-one with a dataset's pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatures {
    pub operator: PairOperator,
    pub source_method: EmbedMethod,
    pub pairs: Vec<(EntityId, EntityId)>,
    pub rows: Vec<Vec<f64>>,
}

impl PairFeatures {
    pub fn build(dataset: &AssociationDataset, table: &EmbeddingTable, op: PairOperator) -> Result<Self> {
        let mut pairs = Vec::with_capacity(dataset.len());
        let mut rows = Vec::with_capacity(dataset.len());
        for p in &dataset.pairs {
            let row = combine(entity_vector(table, &p.gene)?, entity_vector(table, &p.disease)?, op)?;
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite feature for {} {}", p.gene, p.disease)));
            }
            pairs.push((p.gene.clone(), p.disease.clone()));
            rows.push(row);
        }
        Ok(PairFeatures {
            operator: op,
            source_method: table.method,
            pairs,
            rows,
        })
    }

    pub fn dimension(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn select(&self, rows: &[usize]) -> Vec<Vec<f64>> {
        rows.iter().map(|&i| self.rows[i].clone()).collect()
    }

    /// `gene disease f0 f1 ...` with a header row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("gene\tdisease");
        for i in 0..self.dimension() {
            out.push_str(&format!("\tf{i}"));
        }
        out.push('\n');
        for ((g, d), row) in self.pairs.iter().zip(&self.rows) {
            out.push_str(&format!("{g}\t{d}"));
            for x in row {
                out.push('\t');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(operator: PairOperator, source_method: EmbedMethod, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 {
                return Err(err("expected gene and disease columns".into()));
            }
            let g = EntityId::parse_token(cols[0]).ok_or_else(|| err(format!("bad gene `{}`", cols[0])))?;
            let d = EntityId::parse_token(cols[1]).ok_or_else(|| err(format!("bad disease `{}`", cols[1])))?;
            let row: Vec<f64> = cols[2..]
                .iter()
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| err(e.to_string()))?;
            pairs.push((g, d));
            rows.push(row);
        }
        Ok(PairFeatures {
            operator,
            source_method,
            pairs,
            rows,
        })
    }
}

/// `(1 + cos) / 2` for every dataset pair.
pub fn cosine_scores(dataset: &AssociationDataset, table: &EmbeddingTable) -> Result<Vec<f64>> {
    dataset
        .pairs
        .iter()
        .map(|p| cosine_score(entity_vector(table, &p.gene)?, entity_vector(table, &p.disease)?))
        .collect()
}
