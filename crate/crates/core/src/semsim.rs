//! Information content and groupwise semantic similarity baselines.
//!
//! All measures are built on the Resnik pairwise similarity: the IC of the
//! most informative common ancestor (MICA). Ancestor closures follow
//! `subClassOf` only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::AssociationDataset;
use crate::kg::{KnowledgeGraph, NodeId};
use crate::ontology_io::AnnotationMap;
use crate::types::{EntityId, Label, TermId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IcFlavor {
    /// Intrinsic IC from descendant counts.
    Seco,
    /// Corpus IC from propagated annotation frequencies.
    ResnikCorpus,
}

impl IcFlavor {
    pub fn as_str(self) -> &'static str {
        match self {
            IcFlavor::Seco => "ICSeco",
            IcFlavor::ResnikCorpus => "ICResnik",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationContentTable {
    pub flavor: IcFlavor,
    pub values: BTreeMap<TermId, f64>,
    /// Maximum IC in the table (1.0 when every value is 0).
    pub normalizer: f64,
}

impl InformationContentTable {
    fn new(flavor: IcFlavor, values: BTreeMap<TermId, f64>) -> Self {
        let max = values.values().copied().fold(0.0, f64::max);
        InformationContentTable {
            flavor,
            values,
            normalizer: if max > 0.0 { max } else { 1.0 },
        }
    }

    pub fn get(&self, term: &TermId) -> Option<f64> {
        self.values.get(term).copied()
    }
}

/// Per-node ancestor closures over term nodes, as sorted dense indices.
struct Closures {
    anc: Vec<Vec<u32>>,
}

impl Closures {
    fn new(kg: &KnowledgeGraph) -> Self {
        let anc = (0..kg.node_count())
            .map(|i| {
                if kg.node_at(i).is_term() {
                    kg.ancestor_indices(i, false)
                } else {
                    Vec::new()
                }
            })
            .collect();
        Closures { anc }
    }
}

/// Intrinsic IC: `1 - ln(desc(c) + 1) / ln(N)` over the graph's term nodes.
pub fn ic_seco(kg: &KnowledgeGraph) -> Result<InformationContentTable> {
    let closures = Closures::new(kg);
    ic_seco_with(kg, &closures)
}

fn ic_seco_with(kg: &KnowledgeGraph, closures: &Closures) -> Result<InformationContentTable> {
    let n = kg.term_nodes().count();
    if n < 2 {
        return Err(Error::DegenerateOntology(format!(
            "intrinsic IC needs at least 2 terms, graph has {n}"
        )));
    }
    let mut descendants = vec![0usize; kg.node_count()];
    for (i, anc) in closures.anc.iter().enumerate() {
        for &a in anc {
            if a as usize != i {
                descendants[a as usize] += 1;
            }
        }
    }
    let log_n = (n as f64).ln();
    let values = (0..kg.node_count())
        .filter_map(|i| {
            let term = kg.node_at(i).as_term()?;
            let ic = 1.0 - ((descendants[i] + 1) as f64).ln() / log_n;
            Some((term.clone(), ic))
        })
        .collect();
    Ok(InformationContentTable::new(IcFlavor::Seco, values))
}

/// Corpus IC `-ln p(c)` with true-path propagation; zero-count terms are
/// left out of the table.
pub fn ic_resnik(kg: &KnowledgeGraph, annotations: &AnnotationMap) -> Result<InformationContentTable> {
    let closures = Closures::new(kg);
    ic_resnik_with(kg, &closures, annotations)
}

fn ic_resnik_with(
    kg: &KnowledgeGraph,
    closures: &Closures,
    annotations: &AnnotationMap,
) -> Result<InformationContentTable> {
    if annotations.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts = vec![0usize; kg.node_count()];
    let mut mark = vec![usize::MAX; kg.node_count()];
    for (entity_no, (_, terms)) in annotations.iter().enumerate() {
        for term in terms {
            let idx = kg
                .node_index(&NodeId::Term(term.clone()))
                .ok_or_else(|| Error::Lookup(term.to_string()))?;
            for &a in &closures.anc[idx] {
                if mark[a as usize] != entity_no {
                    mark[a as usize] = entity_no;
                    counts[a as usize] += 1;
                }
            }
        }
    }
    let total = annotations.len() as f64;
    let values = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .filter_map(|(i, &c)| {
            let term = kg.node_at(i).as_term()?;
            Some((term.clone(), (total / c as f64).ln()))
        })
        .collect();
    Ok(InformationContentTable::new(IcFlavor::ResnikCorpus, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Aggregation {
    Bma,
    Max,
    SimGic,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Bma => "BMA",
            Aggregation::Max => "MAX",
            Aggregation::SimGic => "SimGIC",
        }
    }
}

/// One of the six baseline measures, e.g. `BMA_ICResnik`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SimilarityConfig {
    pub aggregation: Aggregation,
    pub ic_flavor: IcFlavor,
}

impl SimilarityConfig {
    /// The six measures, in table order.
    pub fn all() -> [SimilarityConfig; 6] {
        let mut out = [SimilarityConfig {
            aggregation: Aggregation::Bma,
            ic_flavor: IcFlavor::Seco,
        }; 6];
        let mut i = 0;
        for aggregation in [Aggregation::Bma, Aggregation::SimGic, Aggregation::Max] {
            for ic_flavor in [IcFlavor::Seco, IcFlavor::ResnikCorpus] {
                out[i] = SimilarityConfig {
                    aggregation,
                    ic_flavor,
                };
                i += 1;
            }
        }
        out
    }

    pub fn name(&self) -> String {
        format!("{}_{}", self.aggregation.as_str(), self.ic_flavor.as_str())
    }
}

impl fmt::Display for SimilarityConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for SimilarityConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SimilarityConfig::all()
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown similarity measure `{s}`")))
    }
}

impl TryFrom<String> for SimilarityConfig {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SimilarityConfig> for String {
    fn from(c: SimilarityConfig) -> String {
        c.name()
    }
}

/// Precomputed closures and dense IC for repeated scoring on one graph.
pub struct SimilarityEngine<'a> {
    kg: &'a KnowledgeGraph,
    closures: Closures,
    ic: Vec<Option<f64>>,
    flavor: IcFlavor,
}

impl<'a> SimilarityEngine<'a> {
    pub fn new(kg: &'a KnowledgeGraph, ic: &InformationContentTable) -> Self {
        Self::with_closures(kg, Closures::new(kg), ic)
    }

    fn with_closures(kg: &'a KnowledgeGraph, closures: Closures, ic: &InformationContentTable) -> Self {
        let dense = (0..kg.node_count())
            .map(|i| kg.node_at(i).as_term().and_then(|t| ic.get(t)))
            .collect();
        SimilarityEngine {
            kg,
            closures,
            ic: dense,
            flavor: ic.flavor,
        }
    }

    pub fn flavor(&self) -> IcFlavor {
        self.flavor
    }

    fn index(&self, term: &TermId) -> Result<usize> {
        self.kg
            .node_index(&NodeId::Term(term.clone()))
            .filter(|&i| self.kg.node_at(i).is_term())
            .ok_or_else(|| Error::Lookup(term.to_string()))
    }

    fn indices(&self, terms: &BTreeSet<TermId>) -> Result<Vec<usize>> {
        terms.iter().map(|t| self.index(t)).collect()
    }

    /// IC of the most informative common ancestor (0 if none has IC).
    pub fn resnik(&self, a: &TermId, b: &TermId) -> Result<f64> {
        let (ia, ib) = (self.index(a)?, self.index(b)?);
        let (xa, xb) = (&self.closures.anc[ia], &self.closures.anc[ib]);
        let mut best = 0.0f64;
        let (mut i, mut j) = (0, 0);
        while i < xa.len() && j < xb.len() {
            match xa[i].cmp(&xb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if let Some(ic) = self.ic[xa[i] as usize] {
                        best = best.max(ic);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(best)
    }

    fn union_closure(&self, terms: &[usize]) -> BTreeSet<u32> {
        terms
            .iter()
            .flat_map(|&t| self.closures.anc[t].iter().copied())
            .collect()
    }

    /// Best match of `term` against a set whose ancestor union is `other`:
    /// `max_b sim(a, b)` equals the max IC over `anc(a) ∩ ⋃ anc(b)`.
    fn best_match(&self, term: usize, other: &BTreeSet<u32>) -> f64 {
        self.closures.anc[term]
            .iter()
            .filter(|a| other.contains(a))
            .filter_map(|&a| self.ic[a as usize])
            .fold(0.0, f64::max)
    }

    /// Groupwise similarity between two non-empty term sets.
    pub fn groupwise(
        &self,
        a: &BTreeSet<TermId>,
        b: &BTreeSet<TermId>,
        aggregation: Aggregation,
    ) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Precondition("groupwise similarity needs non-empty term sets".into()));
        }
        let (ia, ib) = (self.indices(a)?, self.indices(b)?);
        let (anc_a, anc_b) = (self.union_closure(&ia), self.union_closure(&ib));
        Ok(match aggregation {
            Aggregation::Bma => {
                let ab: f64 = ia.iter().map(|&t| self.best_match(t, &anc_b)).sum::<f64>() / ia.len() as f64;
                let ba: f64 = ib.iter().map(|&t| self.best_match(t, &anc_a)).sum::<f64>() / ib.len() as f64;
                0.5 * (ab + ba)
            }
            Aggregation::Max => anc_a
                .intersection(&anc_b)
                .filter_map(|&c| self.ic[c as usize])
                .fold(0.0, f64::max),
            Aggregation::SimGic => {
                let ic = |c: &u32| self.ic[*c as usize].unwrap_or(0.0);
                let num: f64 = anc_a.intersection(&anc_b).map(ic).sum();
                let den: f64 = anc_a.union(&anc_b).map(ic).sum();
                if den > 0.0 {
                    num / den
                } else {
                    0.0
                }
            }
        })
    }
}

/// Resnik similarity of two terms.
pub fn sim_resnik_pair(
    a: &TermId,
    b: &TermId,
    kg: &KnowledgeGraph,
    ic: &InformationContentTable,
) -> Result<f64> {
    SimilarityEngine::new(kg, ic).resnik(a, b)
}

/// Groupwise similarity of two term sets under `config`.
pub fn sim_groupwise(
    gene_terms: &BTreeSet<TermId>,
    disease_terms: &BTreeSet<TermId>,
    config: SimilarityConfig,
    kg: &KnowledgeGraph,
    ic: &InformationContentTable,
) -> Result<f64> {
    if ic.flavor != config.ic_flavor {
        return Err(Error::Config(format!(
            "{} requested with an {} table",
            config,
            ic.flavor.as_str()
        )));
    }
    SimilarityEngine::new(kg, ic).groupwise(gene_terms, disease_terms, config.aggregation)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub gene: String,
    pub disease: String,
    pub raw_score: f64,
    pub normalized_score: f64,
    pub label: Label,
}

/// Baseline scores aligned with the scored subset of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPairs {
    pub measure: SimilarityConfig,
    pub rows: Vec<ScoredPair>,
    /// Index into the dataset's pair list for each row.
    pub dataset_rows: Vec<usize>,
    /// Entities without annotations; their pairs are not scored.
    pub excluded_entities: Vec<String>,
}

impl ScoredPairs {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("gene\tdisease\traw_score\tnormalized_score\tlabel\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                r.gene,
                r.disease,
                r.raw_score,
                r.normalized_score,
                r.label.as_str()
            ));
        }
        out
    }
}

/// Min-max normalization to [0,1]; a degenerate range maps everything to 1.
pub fn min_max_normalize(scores: &[f64]) -> Vec<f64> {
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // written so that NaN bounds also land here
    if max.partial_cmp(&min) != Some(std::cmp::Ordering::Greater) {
        return vec![1.0; scores.len()];
    }
    scores.iter().map(|s| (s - min) / (max - min)).collect()
}

/// Scores dataset pairs with any of the six measures, caching closures and
/// both IC tables.
pub struct BaselineScorer<'a> {
    kg: &'a KnowledgeGraph,
    annotations: &'a AnnotationMap,
    seco: SimilarityEngine<'a>,
    resnik: SimilarityEngine<'a>,
}

impl<'a> BaselineScorer<'a> {
    /// `annotations` supplies both the entity term sets and the Resnik corpus.
    pub fn new(kg: &'a KnowledgeGraph, annotations: &'a AnnotationMap) -> Result<Self> {
        let closures = Closures::new(kg);
        let seco_ic = ic_seco_with(kg, &closures)?;
        let resnik_ic = ic_resnik_with(kg, &closures, annotations)?;
        let seco = SimilarityEngine::with_closures(kg, closures, &seco_ic);
        let resnik = SimilarityEngine::with_closures(kg, Closures { anc: seco.closures.anc.clone() }, &resnik_ic);
        Ok(BaselineScorer {
            kg,
            annotations,
            seco,
            resnik,
        })
    }

    pub fn kg(&self) -> &KnowledgeGraph {
        self.kg
    }

    pub fn score(&self, dataset: &AssociationDataset, config: SimilarityConfig) -> Result<ScoredPairs> {
        let engine = match config.ic_flavor {
            IcFlavor::Seco => &self.seco,
            IcFlavor::ResnikCorpus => &self.resnik,
        };
        let mut excluded: BTreeSet<&EntityId> = BTreeSet::new();
        let mut work = Vec::new();
        for (i, p) in dataset.pairs.iter().enumerate() {
            match (self.annotations.get(&p.gene), self.annotations.get(&p.disease)) {
                (Some(g), Some(d)) => work.push((i, g, d)),
                (g, d) => {
                    if g.is_none() {
                        excluded.insert(&p.gene);
                    }
                    if d.is_none() {
                        excluded.insert(&p.disease);
                    }
                }
            }
        }
        let raw: Vec<f64> = work
            .par_iter()
            .map(|(_, g, d)| engine.groupwise(g, d, config.aggregation))
            .collect::<Result<_>>()?;
        let normalized = min_max_normalize(&raw);
        let rows = work
            .iter()
            .zip(raw.iter().zip(&normalized))
            .map(|((i, _, _), (&r, &n))| {
                let p = &dataset.pairs[*i];
                ScoredPair {
                    gene: p.gene.id().to_string(),
                    disease: p.disease.id().to_string(),
                    raw_score: r,
                    normalized_score: n,
                    label: p.label,
                }
            })
            .collect();
        Ok(ScoredPairs {
            measure: config,
            rows,
            dataset_rows: work.iter().map(|(i, _, _)| *i).collect(),
            excluded_entities: excluded.into_iter().map(|e| e.to_string()).collect(),
        })
    }
}

/// Score every pair of `dataset` with one measure and min-max normalize.
pub fn ssm_baseline(
    dataset: &AssociationDataset,
    config: SimilarityConfig,
    kg: &KnowledgeGraph,
    annotations: &AnnotationMap,
) -> Result<ScoredPairs> {
    BaselineScorer::new(kg, annotations)?.score(dataset, config)
}
