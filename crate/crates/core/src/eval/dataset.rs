use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{EntityId, Label};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledPair {
    pub gene: EntityId,
    pub disease: EntityId,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Test,
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Partition::Train => "train",
            Partition::Test => "test",
        })
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Partition::Train),
            "test" => Ok(Partition::Test),
            other => Err(Error::InvalidInput(format!("unknown partition `{other}`"))),
        }
    }
}

/// Labelled gene-disease pairs with an optional persisted split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationDataset {
    pub pairs: Vec<LabeledPair>,
    /// Aligned with `pairs` once split.
    pub split: Option<Vec<Partition>>,
    pub seed: Option<u64>,
    pub split_seed: Option<u64>,
}

impl AssociationDataset {
    pub fn from_pairs(pairs: Vec<LabeledPair>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &pairs {
            if !seen.insert((&p.gene, &p.disease)) {
                return Err(Error::InvalidInput(format!(
                    "duplicate pair ({}, {})",
                    p.gene, p.disease
                )));
            }
        }
        Ok(AssociationDataset {
            pairs,
            split: None,
            seed: None,
            split_seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.pairs.iter().map(|p| p.label).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.pairs.iter().filter(|p| p.label == label).count()
    }

    /// Row indices of one partition, in dataset order.
    pub fn partition_rows(&self, part: Partition) -> Result<Vec<usize>> {
        let split = self.split.as_ref().ok_or(Error::MissingSplit)?;
        Ok(split
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == part)
            .map(|(i, _)| i)
            .collect())
    }

    /// Split TSV: `gene, disease, label, partition`, preceded by a seed comment.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let fmt_seed = |s: Option<u64>| s.map(|v| v.to_string()).unwrap_or_else(|| "none".into());
        out.push_str(&format!(
            "# seed={} split_seed={}\n",
            fmt_seed(self.seed),
            fmt_seed(self.split_seed)
        ));
        out.push_str("gene\tdisease\tlabel\tpartition\n");
        for (i, p) in self.pairs.iter().enumerate() {
            let part = match &self.split {
                Some(s) => s[i].to_string(),
                None => "none".into(),
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                p.gene.id(),
                p.disease.id(),
                p.label.as_str(),
                part
            ));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut split_seed = None;
        let mut pairs = Vec::new();
        let mut parts = Vec::new();
        let mut unsplit = false;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(comment) = line.strip_prefix('#') {
                for kv in comment.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("seed", v)) => seed = v.parse().ok(),
                        Some(("split_seed", v)) => split_seed = v.parse().ok(),
                        _ => {}
                    }
                }
                continue;
            }
            if line.trim().is_empty() || line.starts_with("gene\t") {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 4 columns, found {}", cols.len()),
                });
            }
            let bad = |e: Error| Error::Parse {
                line: line_no,
                message: e.to_string(),
            };
            pairs.push(LabeledPair {
                gene: EntityId::gene(cols[0]).map_err(bad)?,
                disease: EntityId::disease(cols[1]).map_err(bad)?,
                label: cols[2].parse().map_err(bad)?,
            });
            if cols[3] == "none" {
                unsplit = true;
            } else {
                parts.push(cols[3].parse().map_err(bad)?);
            }
        }
        let mut ds = AssociationDataset::from_pairs(pairs)?;
        ds.seed = seed;
        ds.split_seed = split_seed;
        if !unsplit {
            ds.split = Some(parts);
        }
        Ok(ds)
    }
}

/// Draw as many negatives as positives from the genes × diseases grid of the
/// positive pairs, excluding known positives. Deterministic per seed.
pub fn sample_negatives(positives: &[(EntityId, EntityId)], seed: u64) -> Result<AssociationDataset> {
    let known: BTreeSet<(EntityId, EntityId)> = positives.iter().cloned().collect();
    let genes: Vec<&EntityId> = known.iter().map(|(g, _)| g).collect::<BTreeSet<_>>().into_iter().collect();
    let diseases: Vec<&EntityId> = known.iter().map(|(_, d)| d).collect::<BTreeSet<_>>().into_iter().collect();
    if genes.len() < 2 || diseases.len() < 2 {
        return Err(Error::Precondition(
            "negative sampling needs at least 2 distinct genes and 2 distinct diseases".into(),
        ));
    }
    let required = known.len();
    let available = genes.len() * diseases.len() - required;
    if available < required {
        return Err(Error::Infeasible { required, available });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let gene_pos: BTreeMap<&EntityId, usize> = genes.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let disease_pos: BTreeMap<&EntityId, usize> = diseases.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let known_idx: HashSet<(usize, usize)> = known.iter().map(|(g, d)| (gene_pos[g], disease_pos[d])).collect();
    let is_known = |g: usize, d: usize| known_idx.contains(&(g, d));
    if available <= 2 * required {
        // dense grid: enumerate the complement and take a random subset
        let mut candidates: Vec<(usize, usize)> = (0..genes.len())
            .flat_map(|g| (0..diseases.len()).map(move |d| (g, d)))
            .filter(|&(g, d)| !is_known(g, d))
            .collect();
        let (picked, _) = candidates.partial_shuffle(&mut rng, required);
        chosen.extend(picked.iter().copied());
    } else {
        while chosen.len() < required {
            let g = rng.gen_range(0..genes.len());
            let d = rng.gen_range(0..diseases.len());
            if !is_known(g, d) {
                chosen.insert((g, d));
            }
        }
    }

    let mut pairs: Vec<LabeledPair> = known
        .iter()
        .map(|(g, d)| LabeledPair {
            gene: g.clone(),
            disease: d.clone(),
            label: Label::Positive,
        })
        .chain(chosen.into_iter().map(|(g, d)| LabeledPair {
            gene: genes[g].clone(),
            disease: diseases[d].clone(),
            label: Label::Negative,
        }))
        .collect();
    pairs.sort();
    let mut ds = AssociationDataset::from_pairs(pairs)?;
    ds.seed = Some(seed);
    Ok(ds)
}

/// Number of training rows for a label of size `n`: `fraction * n` rounded
/// half up.
pub fn train_count(n: usize, train_fraction: f64) -> usize {
    ((train_fraction * n as f64) + 0.5).floor() as usize
}

/// Per-label random partition into train/test. Deterministic per seed.
pub fn stratified_split(
    dataset: &AssociationDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<AssociationDataset> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::Config(format!("train fraction {train_fraction} outside [0,1]")));
    }
    let mut by_label: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, p) in dataset.pairs.iter().enumerate() {
        by_label.entry(p.label).or_default().push(i);
    }
    for label in [Label::Negative, Label::Positive] {
        let n = by_label.get(&label).map_or(0, Vec::len);
        if n < 2 {
            return Err(Error::Stratification(format!(
                "label {} has {n} member(s), at least 2 required",
                label.as_str()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = vec![Partition::Test; dataset.len()];
    for rows in by_label.values_mut() {
        rows.shuffle(&mut rng);
        for &i in &rows[..train_count(rows.len(), train_fraction)] {
            split[i] = Partition::Train;
        }
    }
    let mut out = dataset.clone();
    out.split = Some(split);
    out.split_seed = Some(seed);
    Ok(out)
}
