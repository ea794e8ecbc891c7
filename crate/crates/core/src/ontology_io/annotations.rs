//! Annotation corpora (GAF, genes_to_phenotype, HPOA) and identifier mappings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{EntityId, EntityKind, TermId};

use super::{data_lines, Ontology, Parsed, RowReport};

/// Entity → non-empty set of ontology terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationMap {
    entries: BTreeMap<EntityId, BTreeSet<TermId>>,
}

/// What [`AnnotationMap::reconcile`] discarded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconcileReport {
    pub obsolete_dropped: usize,
    pub unknown_dropped: usize,
    pub entities_emptied: usize,
}

impl AnnotationMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, entity: EntityId, term: TermId) {
        self.entries.entry(entity).or_default().insert(term);
    }

    pub fn get(&self, entity: &EntityId) -> Option<&BTreeSet<TermId>> {
        self.entries.get(entity)
    }

    pub fn contains(&self, entity: &EntityId) -> bool {
        self.entries.contains_key(entity)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EntityId, &BTreeSet<TermId>)> {
        self.entries.iter()
    }

    pub fn entities(&self) -> impl Iterator<Item = &EntityId> {
        self.entries.keys()
    }

    /// Total number of (entity, term) annotations.
    pub fn annotation_count(&self) -> usize {
        self.entries.values().map(BTreeSet::len).sum()
    }

    /// Union of two maps.
    pub fn merged(&self, other: &AnnotationMap) -> AnnotationMap {
        let mut out = self.clone();
        for (e, terms) in other.iter() {
            out.entries.entry(e.clone()).or_default().extend(terms.iter().cloned());
        }
        out
    }

    /// Keep only annotations to live terms of `ontologies`; obsolete and
    /// unknown targets are dropped and counted, emptied entities removed.
    pub fn reconcile(&self, ontologies: &[&Ontology]) -> (AnnotationMap, ReconcileReport) {
        let mut report = ReconcileReport::default();
        let mut out = AnnotationMap::new();
        for (entity, terms) in self.iter() {
            let mut kept = BTreeSet::new();
            for term in terms {
                if ontologies.iter().any(|o| o.contains(term)) {
                    kept.insert(term.clone());
                } else if ontologies.iter().any(|o| o.obsolete().contains(term)) {
                    report.obsolete_dropped += 1;
                } else {
                    report.unknown_dropped += 1;
                }
            }
            if kept.is_empty() {
                report.entities_emptied += 1;
            } else {
                out.entries.insert(entity.clone(), kept);
            }
        }
        (out, report)
    }
}

impl FromIterator<(EntityId, TermId)> for AnnotationMap {
    fn from_iter<I: IntoIterator<Item = (EntityId, TermId)>>(iter: I) -> Self {
        let mut map = AnnotationMap::new();
        for (e, t) in iter {
            map.insert(e, t);
        }
        map
    }
}

/// Two-column identifier mapping (external id → canonical ids).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMapping {
    map: BTreeMap<String, BTreeSet<String>>,
}

impl IdMapping {
    pub fn get(&self, external: &str) -> Option<&BTreeSet<String>> {
        self.map.get(external)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn insert(&mut self, external: &str, canonical: &str) {
        self.map
            .entry(external.to_string())
            .or_default()
            .insert(canonical.to_string());
    }
}

impl<'a> FromIterator<(&'a str, &'a str)> for IdMapping {
    fn from_iter<I: IntoIterator<Item = (&'a str, &'a str)>>(iter: I) -> Self {
        let mut m = IdMapping::default();
        for (a, b) in iter {
            m.insert(a, b);
        }
        m
    }
}

/// Parse a two-column TSV mapping. `#` lines are comments.
pub fn parse_mapping(text: &str) -> Result<Parsed<IdMapping>> {
    let mut report = RowReport::default();
    let mut mapping = IdMapping::default();
    for (line, row) in data_lines(text, "#") {
        report.rows_read += 1;
        let cols: Vec<&str> = row.split('\t').map(str::trim).collect();
        if cols.len() < 2 || cols[0].is_empty() || cols[1].is_empty() {
            report.warn(line, "mapping row needs two non-empty columns".into());
            continue;
        }
        mapping.insert(cols[0], cols[1]);
        report.rows_used += 1;
    }
    Ok(Parsed {
        value: mapping,
        report,
    })
}

/// GAF evidence-code handling. Every code is accepted by default.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum EvidenceFilter {
    #[default]
    AcceptAll,
    Exclude(BTreeSet<String>),
}

impl EvidenceFilter {
    fn accepts(&self, code: &str) -> bool {
        match self {
            EvidenceFilter::AcceptAll => true,
            EvidenceFilter::Exclude(codes) => !codes.contains(code),
        }
    }
}

fn is_negated(qualifier: &str) -> bool {
    qualifier.split('|').any(|q| q.trim().eq_ignore_ascii_case("NOT"))
}

/// Parse GAF 2.x rows into gene → GO terms.
///
/// Columns 2 (accession), 4 (qualifier), 5 (GO id) and 7 (evidence) are
/// consumed. Rows with fewer than 15 columns are skipped with a warning; a
/// file without any well-formed row is an error.
pub fn parse_gaf(
    text: &str,
    mapping: &IdMapping,
    evidence: &EvidenceFilter,
) -> Result<Parsed<AnnotationMap>> {
    let mut report = RowReport::default();
    let mut map = AnnotationMap::new();
    let mut well_formed = 0usize;
    for (line, row) in data_lines(text, "!") {
        report.rows_read += 1;
        let cols: Vec<&str> = row.split('\t').collect();
        if cols.len() < 15 {
            report.warn(line, format!("GAF row has {} columns, expected at least 15", cols.len()));
            continue;
        }
        let term = match TermId::new(cols[4].trim()) {
            Ok(t) => t,
            Err(_) => {
                report.warn(line, format!("malformed GO id `{}`", cols[4]));
                continue;
            }
        };
        well_formed += 1;
        if is_negated(cols[3]) {
            report.skipped_negated += 1;
            continue;
        }
        if !evidence.accepts(cols[6].trim()) {
            report.skipped_evidence += 1;
            continue;
        }
        let Some(genes) = mapping.get(cols[1].trim()) else {
            report.skipped_unmapped += 1;
            continue;
        };
        for gene in genes {
            map.insert(EntityId::gene(gene)?, term.clone());
        }
        report.rows_used += 1;
    }
    if well_formed == 0 {
        return Err(Error::EmptyInput("GAF file has no usable rows".into()));
    }
    Ok(Parsed { value: map, report })
}

fn parse_hp(raw: &str) -> Option<TermId> {
    TermId::new(raw.trim()).ok().filter(|t| t.prefix() == "HP")
}

/// Parse genes_to_phenotype rows: gene id in column 1, HP id in column 3
/// (or column 2 for a bare two-column layout).
pub fn parse_gene_phenotype(text: &str) -> Result<Parsed<AnnotationMap>> {
    let mut report = RowReport::default();
    let mut map = AnnotationMap::new();
    for (line, row) in data_lines(text, "#") {
        let cols: Vec<&str> = row.split('\t').collect();
        if cols[0].trim() == "ncbi_gene_id" {
            continue;
        }
        report.rows_read += 1;
        let hp_col = if cols.len() >= 3 { 2 } else { 1 };
        let Some(raw) = cols.get(hp_col) else {
            report.warn(line, "row has a single column".into());
            continue;
        };
        let Some(term) = parse_hp(raw) else {
            report.warn(line, format!("malformed HP id `{raw}`"));
            continue;
        };
        let Ok(gene) = EntityId::gene(cols[0]) else {
            report.warn(line, "empty gene id".into());
            continue;
        };
        map.insert(gene, term);
        report.rows_used += 1;
    }
    Ok(Parsed { value: map, report })
}

/// Parse HPOA rows (`database_id`, `disease_name`, `qualifier`, `hpo_id`, ...)
/// translating disease ids through `disease_mapping`.
pub fn parse_disease_phenotype(
    text: &str,
    disease_mapping: &IdMapping,
) -> Result<Parsed<AnnotationMap>> {
    if disease_mapping.is_empty() {
        return Err(Error::Config("disease mapping is empty".into()));
    }
    let mut report = RowReport::default();
    let mut map = AnnotationMap::new();
    for (line, row) in data_lines(text, "#") {
        let cols: Vec<&str> = row.split('\t').collect();
        if cols[0].trim() == "database_id" {
            continue;
        }
        report.rows_read += 1;
        if cols.len() < 4 {
            report.warn(line, format!("HPOA row has {} columns, expected at least 4", cols.len()));
            continue;
        }
        let Some(term) = parse_hp(cols[3]) else {
            report.warn(line, format!("malformed HP id `{}`", cols[3]));
            continue;
        };
        if is_negated(cols[2]) {
            report.skipped_negated += 1;
            continue;
        }
        let Some(diseases) = disease_mapping.get(cols[0].trim()) else {
            report.skipped_unmapped += 1;
            continue;
        };
        for d in diseases {
            map.insert(EntityId::new(EntityKind::Disease, d)?, term.clone());
        }
        report.rows_used += 1;
    }
    Ok(Parsed { value: map, report })
}
