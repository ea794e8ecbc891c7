//! Parsers for ontologies, annotation corpora, identifier mappings and curated
//! gene-disease associations.

mod annotations;
mod associations;
mod obo;
mod ontology;

pub use annotations::{
    parse_disease_phenotype, parse_gaf, parse_gene_phenotype, parse_mapping, AnnotationMap,
    EvidenceFilter, IdMapping, ReconcileReport,
};
pub use associations::{filter_associations, parse_associations, CuratedAssociation};
pub use obo::{parse_obo, write_obo};
pub use ontology::{Ontology, OntologyEdge, OntologyReport, OntologyTerm, IS_A};

use serde::{Deserialize, Serialize};

/// Row-level bookkeeping returned alongside every tabular parse.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowReport {
    /// Data rows seen (comments and headers excluded).
    pub rows_read: usize,
    /// Rows that contributed to the result.
    pub rows_used: usize,
    pub skipped_negated: usize,
    pub skipped_evidence: usize,
    pub skipped_unmapped: usize,
    /// `(line number, reason)` for rows skipped as malformed.
    pub warnings: Vec<(usize, String)>,
}

impl RowReport {
    fn warn(&mut self, line: usize, message: String) {
        log::warn!("line {line}: {message}");
        self.warnings.push((line, message));
    }
}

/// A parsed value plus its row report.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub report: RowReport,
}

/// Iterate `(1-based line number, line)` over non-empty, non-comment lines.
fn data_lines<'a>(
    text: &'a str,
    comment: &'a str,
) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(move |(_, l)| !l.trim().is_empty() && !l.starts_with(comment))
}
