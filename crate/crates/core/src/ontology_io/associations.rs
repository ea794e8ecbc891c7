//! Curated gene-disease association tables (DisGeNET layout).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::types::EntityId;

use super::{data_lines, AnnotationMap, Parsed, RowReport};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CuratedAssociation {
    pub gene: EntityId,
    pub disease: EntityId,
    /// Never empty.
    pub sources: BTreeSet<String>,
}

const GENE_COLUMNS: &[&str] = &["geneid", "gene_id", "gene"];
const DISEASE_COLUMNS: &[&str] = &["diseaseid", "disease_id", "disease"];
const SOURCE_COLUMNS: &[&str] = &["source", "sources"];

fn find_column(header: &[&str], names: &[&str], required: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| names.contains(&h.trim().to_ascii_lowercase().as_str()))
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing required column `{required}`"),
        })
}

/// Parse a header-carrying TSV with gene id, disease id and source columns.
///
/// Sources may be `;`-separated; rows for the same pair are merged.
pub fn parse_associations(text: &str) -> Result<Parsed<Vec<CuratedAssociation>>> {
    let mut lines = data_lines(text, "#");
    let Some((_, header)) = lines.next() else {
        return Ok(Parsed {
            value: Vec::new(),
            report: RowReport::default(),
        });
    };
    let header: Vec<&str> = header.split('\t').collect();
    let gene_col = find_column(&header, GENE_COLUMNS, "geneId")?;
    let disease_col = find_column(&header, DISEASE_COLUMNS, "diseaseId")?;
    let source_col = find_column(&header, SOURCE_COLUMNS, "source")?;
    let width = gene_col.max(disease_col).max(source_col) + 1;

    let mut report = RowReport::default();
    let mut pairs: BTreeMap<(EntityId, EntityId), BTreeSet<String>> = BTreeMap::new();
    for (line, row) in lines {
        report.rows_read += 1;
        let cols: Vec<&str> = row.split('\t').collect();
        if cols.len() < width {
            report.warn(line, format!("row has {} columns, expected at least {width}", cols.len()));
            continue;
        }
        let (Ok(gene), Ok(disease)) = (EntityId::gene(cols[gene_col]), EntityId::disease(cols[disease_col]))
        else {
            report.warn(line, "empty gene or disease id".into());
            continue;
        };
        let sources: BTreeSet<String> = cols[source_col]
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        if sources.is_empty() {
            report.warn(line, "row has no source".into());
            continue;
        }
        pairs.entry((gene, disease)).or_default().extend(sources);
        report.rows_used += 1;
    }
    let value = pairs
        .into_iter()
        .map(|((gene, disease), sources)| CuratedAssociation {
            gene,
            disease,
            sources,
        })
        .collect();
    Ok(Parsed { value, report })
}

/// Keep pairs with no excluded source whose gene has GO and HP annotations
/// and whose disease has HP annotations. Source names compare
/// case-insensitively. Output is deduplicated and sorted by (gene, disease).
pub fn filter_associations(
    assocs: &[CuratedAssociation],
    excluded_sources: &BTreeSet<String>,
    gene_go: &AnnotationMap,
    gene_hp: &AnnotationMap,
    disease_hp: &AnnotationMap,
) -> Vec<CuratedAssociation> {
    let excluded: BTreeSet<String> = excluded_sources.iter().map(|s| s.to_ascii_uppercase()).collect();
    let mut merged: BTreeMap<(&EntityId, &EntityId), BTreeSet<String>> = BTreeMap::new();
    for a in assocs {
        merged
            .entry((&a.gene, &a.disease))
            .or_default()
            .extend(a.sources.iter().cloned());
    }
    merged
        .into_iter()
        .filter(|(_, sources)| !sources.iter().any(|s| excluded.contains(&s.to_ascii_uppercase())))
        .filter(|((gene, disease), _)| {
            gene_go.contains(gene) && gene_hp.contains(gene) && disease_hp.contains(disease)
        })
        .map(|((gene, disease), sources)| CuratedAssociation {
            gene: gene.clone(),
            disease: disease.clone(),
            sources,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::TermId;

    const HEADER: &str = "geneId\tgeneSymbol\tdiseaseId\tdiseaseName\tscore\tsource\n";

    #[test]
    fn single_row() {
        let p = parse_associations(&format!("{HEADER}672\tBRCA1\tC0006142\tBreast cancer\t0.9\tCTD_human\n")).unwrap();
        assert_eq!(p.value.len(), 1);
        assert_eq!(p.value[0].gene.id(), "672");
        assert_eq!(p.value[0].disease.id(), "C0006142");
    }

    #[test]
    fn sources_merge() {
        let p = parse_associations(&format!(
            "{HEADER}672\tBRCA1\tC0006142\tx\t0.9\tCTD_human\n672\tBRCA1\tC0006142\tx\t0.9\tCLINGEN;CTD_human\n"
        ))
        .unwrap();
        assert_eq!(p.value.len(), 1);
        assert_eq!(p.value[0].sources.len(), 2);
    }

    #[test]
    fn empty_after_header() {
        assert!(parse_associations(HEADER).unwrap().value.is_empty());
        assert!(parse_associations("").unwrap().value.is_empty());
    }

    #[test]
    fn missing_column_is_named() {
        let err = parse_associations("geneId\tdiseaseId\n1\tC1\n").unwrap_err();
        match err {
            Error::Parse { message, .. } => assert!(message.contains("source"), "{message}"),
            e => panic!("{e:?}"),
        }
    }

    fn annotated(ids: &[&str], gene: bool) -> AnnotationMap {
        ids.iter()
            .map(|id| {
                let e = if gene { EntityId::gene(id) } else { EntityId::disease(id) };
                (e.unwrap(), TermId::new("HP:1").unwrap())
            })
            .collect()
    }

    fn assoc(g: &str, d: &str, sources: &[&str]) -> CuratedAssociation {
        CuratedAssociation {
            gene: EntityId::gene(g).unwrap(),
            disease: EntityId::disease(d).unwrap(),
            sources: sources.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn filter_criteria() {
        let go = annotated(&["g1", "g2"], true);
        let hp = annotated(&["g1", "g2", "g3"], true);
        let dhp = annotated(&["d1"], false);
        let excluded: BTreeSet<String> = ["UNIPROT".to_string()].into();
        let input = vec![
            assoc("g1", "d1", &["CTD_human"]),
            assoc("g3", "d1", &["CTD_human"]),
            assoc("g2", "d1", &["UniProt", "CTD_human"]),
            assoc("g1", "d2", &["CTD_human"]),
        ];
        let out = filter_associations(&input, &excluded, &go, &hp, &dhp);
        assert_eq!(out, vec![assoc("g1", "d1", &["CTD_human"])]);
    }
}
