//! Subset of the OBO 1.2/1.4 flat-file format: `[Term]` stanzas with the tags
//! `id`, `name`, `synonym`, `def`, `is_a`, `relationship`, `intersection_of`
//! and `is_obsolete`. Other stanzas and tags are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::types::{is_curie, TermId};

use super::ontology::{Ontology, OntologyEdge, OntologyTerm, IS_A};

#[derive(Default)]
struct Stanza {
    line: usize,
    id: Option<TermId>,
    label: String,
    synonyms: Vec<String>,
    definition: String,
    obsolete: bool,
    parents: Vec<(String, TermId)>,
    intersections: Vec<TermId>,
}

/// Parse OBO text into a validated [`Ontology`].
pub fn parse_obo(text: &str) -> Result<Ontology> {
    let mut terms = Vec::new();
    let mut edges = Vec::new();
    let mut current: Option<Stanza> = None;
    let mut in_term = false;

    let mut finish = |stanza: Option<Stanza>| -> Result<()> {
        let Some(s) = stanza else { return Ok(()) };
        let id = s.id.ok_or_else(|| Error::Parse {
            line: s.line,
            message: "[Term] stanza without an id".into(),
        })?;
        for (rel, parent) in s.parents {
            edges.push(OntologyEdge::new(id.clone(), &rel, parent));
        }
        terms.push(OntologyTerm {
            ld_targets: s.intersections,
            label: s.label,
            synonyms: s.synonyms,
            definition: s.definition,
            obsolete: s.obsolete,
            id,
        });
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            finish(current.take())?;
            in_term = line == "[Term]";
            if in_term {
                current = Some(Stanza {
                    line: line_no,
                    ..Stanza::default()
                });
            }
            continue;
        }
        let Some(stanza) = current.as_mut().filter(|_| in_term) else {
            // header or non-Term stanza
            continue;
        };
        let Some((tag, value)) = line.split_once(':') else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `tag: value`, got `{line}`"),
            });
        };
        let value = value.trim();
        let parse_id = |s: &str| {
            TermId::new(s).map_err(|_| Error::Parse {
                line: line_no,
                message: format!("malformed identifier `{s}`"),
            })
        };
        match tag.trim() {
            "id" => stanza.id = Some(parse_id(strip_trailing(value))?),
            "name" => stanza.label = value.to_string(),
            "def" => stanza.definition = quoted(value).unwrap_or_default(),
            "synonym" => {
                if let Some(s) = quoted(value) {
                    stanza.synonyms.push(s);
                }
            }
            "is_obsolete" => stanza.obsolete = strip_trailing(value) == "true",
            "is_a" => {
                let target = strip_trailing(value);
                stanza.parents.push((IS_A.to_string(), parse_id(target)?));
            }
            "relationship" => {
                let mut parts = strip_trailing(value).split_whitespace();
                match (parts.next(), parts.next()) {
                    (Some(rel), Some(target)) if is_curie(target) => {
                        stanza.parents.push((rel.to_string(), parse_id(target)?));
                    }
                    _ => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("malformed relationship `{value}`"),
                        })
                    }
                }
            }
            "intersection_of" => {
                // `intersection_of: GENUS` or `intersection_of: REL TARGET`
                if let Some(target) = strip_trailing(value).split_whitespace().last() {
                    if is_curie(target) {
                        let target = parse_id(target)?;
                        if !stanza.intersections.contains(&target) {
                            stanza.intersections.push(target);
                        }
                    }
                }
            }
            _ => {}
        }
    }
    finish(current.take())?;
    Ontology::from_parts(terms, edges)
}

/// Drop a trailing `! comment` and `{qualifier}` block.
fn strip_trailing(value: &str) -> &str {
    let v = value.split(" !").next().unwrap_or(value);
    let v = match v.find(" {") {
        Some(i) => &v[..i],
        None => v,
    };
    v.trim()
}

/// Extract the first double-quoted string, honouring `\"` escapes.
fn quoted(value: &str) -> Option<String> {
    let rest = value.strip_prefix('"')?;
    let mut out = String::new();
    let mut chars = rest.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                if let Some(n) = chars.next() {
                    out.push(match n {
                        'n' => '\n',
                        't' => '\t',
                        other => other,
                    });
                }
            }
            '"' => return Some(out),
            c => out.push(c),
        }
    }
    None
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// Serialize an ontology back to OBO text (terms and edges in sorted order).
pub fn write_obo(ontology: &Ontology) -> String {
    let mut by_child: BTreeMap<&TermId, Vec<&OntologyEdge>> = BTreeMap::new();
    for e in ontology.edges() {
        by_child.entry(&e.child).or_default().push(e);
    }
    let mut out = String::from("format-version: 1.2\n");
    for term in ontology.terms().values() {
        let _ = writeln!(out, "\n[Term]\nid: {}", term.id);
        if !term.label.is_empty() {
            let _ = writeln!(out, "name: {}", term.label);
        }
        if !term.definition.is_empty() {
            let _ = writeln!(out, "def: \"{}\" []", escape(&term.definition));
        }
        for s in &term.synonyms {
            let _ = writeln!(out, "synonym: \"{}\" EXACT []", escape(s));
        }
        for e in by_child.get(&term.id).into_iter().flatten() {
            if e.relation == IS_A {
                let _ = writeln!(out, "is_a: {}", e.parent);
            } else {
                let _ = writeln!(out, "relationship: {} {}", e.relation, e.parent);
            }
        }
        for t in &term.ld_targets {
            let _ = writeln!(out, "intersection_of: {t}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::TermId;

    fn t(s: &str) -> TermId {
        TermId::new(s).unwrap()
    }

    #[test]
    fn single_stanza() {
        let o = parse_obo("[Term]\nid: HP:0000001\nname: All").unwrap();
        assert_eq!(o.len(), 1);
        assert!(o.edges().is_empty());
        assert_eq!(o.roots().iter().collect::<Vec<_>>(), [&t("HP:0000001")]);
        assert_eq!(o.term(&t("HP:0000001")).unwrap().label, "All");
    }

    #[test]
    fn minimal_hierarchy() {
        let o = parse_obo("[Term]\nid: X:A\n\n[Term]\nid: X:B\nis_a: X:A ! the a term\n").unwrap();
        assert_eq!(
            o.edges().iter().collect::<Vec<_>>(),
            [&OntologyEdge::is_a(t("X:B"), t("X:A"))]
        );
        assert_eq!(o.roots().iter().collect::<Vec<_>>(), [&t("X:A")]);
    }

    #[test]
    fn logical_definition_targets() {
        let text = "\
[Term]
id: HP:0000365
name: Hearing impairment
def: \"A decreased magnitude of the sensory perception of sound.\" [HPO:probinson]
synonym: \"Deafness\" EXACT []
synonym: \"Hearing \\\"defect\\\"\" RELATED []
intersection_of: PATO:0000001 ! quality
intersection_of: inheres_in GO:0007605 ! sensory perception of sound
intersection_of: has_modifier HP:0012830
";
        let o = parse_obo(text).unwrap();
        let term = o.term(&t("HP:0000365")).unwrap();
        assert_eq!(term.ld_targets, vec![t("PATO:0000001"), t("GO:0007605")]);
        assert_eq!(o.count_logical_definitions("GO"), 1);
        assert_eq!(term.synonyms, vec!["Deafness".to_string(), "Hearing \"defect\"".to_string()]);
        assert_eq!(term.definition, "A decreased magnitude of the sensory perception of sound.");
    }

    #[test]
    fn relationships_keep_labels() {
        let o = parse_obo(
            "[Term]\nid: GO:1\n[Term]\nid: GO:2\nrelationship: part_of GO:1 {source=\"x\"}\nrelationship: part_of UBERON:1\n",
        )
        .unwrap();
        assert_eq!(
            o.edges().iter().collect::<Vec<_>>(),
            [&OntologyEdge::new(t("GO:2"), "part_of", t("GO:1"))]
        );
        assert_eq!(o.report().external_relationships_dropped, 1);
    }

    #[test]
    fn missing_id_reports_line() {
        let err = parse_obo("format-version: 1.2\n\n[Term]\nname: nothing\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn dangling_is_a_lists_offenders() {
        let err = parse_obo("[Term]\nid: X:1\nis_a: X:404\nis_a: X:405\n").unwrap_err();
        match err {
            Error::DanglingReference(v) => assert_eq!(v, vec!["X:404", "X:405"]),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn cycle_rejected() {
        let err = parse_obo("[Term]\nid: X:1\nis_a: X:2\n[Term]\nid: X:2\nis_a: X:1\n").unwrap_err();
        assert!(matches!(err, Error::Cycle(_)));
    }

    #[test]
    fn obsolete_and_typedefs_skipped() {
        let o = parse_obo(
            "[Term]\nid: X:1\n[Term]\nid: X:2\nis_obsolete: true\n[Typedef]\nid: part_of\nname: part of\n",
        )
        .unwrap();
        assert_eq!(o.len(), 1);
        assert!(o.obsolete().contains(&t("X:2")));
    }

    #[test]
    fn write_then_parse_is_identity() {
        let text = "[Term]\nid: X:1\nname: root\n[Term]\nid: X:2\nname: child\ndef: \"a \\\"b\\\"\" []\nis_a: X:1\nrelationship: part_of X:1\nintersection_of: Y:7\n";
        let o = parse_obo(text).unwrap();
        assert_eq!(parse_obo(&write_obo(&o)).unwrap(), o);
    }
}
