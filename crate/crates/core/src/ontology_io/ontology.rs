use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::TermId;

/// Relation name used for subsumption edges inside an [`Ontology`].
pub const IS_A: &str = "is_a";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyTerm {
    pub id: TermId,
    pub label: String,
    pub synonyms: Vec<String>,
    pub definition: String,
    pub obsolete: bool,
    /// Foreign-prefix terms referenced by this term's logical definition.
    pub ld_targets: Vec<TermId>,
}

impl OntologyTerm {
    pub fn new(id: TermId) -> Self {
        OntologyTerm {
            id,
            label: String::new(),
            synonyms: Vec::new(),
            definition: String::new(),
            obsolete: false,
            ld_targets: Vec::new(),
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OntologyEdge {
    pub child: TermId,
    pub relation: String,
    pub parent: TermId,
}

impl OntologyEdge {
    pub fn new(child: TermId, relation: &str, parent: TermId) -> Self {
        OntologyEdge {
            child,
            relation: relation.to_string(),
            parent,
        }
    }

    pub fn is_a(child: TermId, parent: TermId) -> Self {
        Self::new(child, IS_A, parent)
    }
}

/// Counts of what was discarded while finalizing an ontology.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyReport {
    pub obsolete_terms: usize,
    /// Edges touching an obsolete term.
    pub obsolete_edges_dropped: usize,
    /// Non-`is_a` edges whose target is not defined in the file.
    pub external_relationships_dropped: usize,
}

/// A validated ontology: non-obsolete terms, typed edges and roots.
#[derive(Debug, Clone, PartialEq)]
pub struct Ontology {
    terms: BTreeMap<TermId, OntologyTerm>,
    edges: BTreeSet<OntologyEdge>,
    roots: BTreeSet<TermId>,
    obsolete: BTreeSet<TermId>,
    report: OntologyReport,
}

impl Ontology {
    /// Validate and finalize a set of terms and edges.
    ///
    /// Obsolete terms are removed together with their edges. An `is_a` edge
    /// pointing outside the term set is an error; other relationships to
    /// unknown targets are dropped and counted.
    pub fn from_parts(terms: Vec<OntologyTerm>, edges: Vec<OntologyEdge>) -> Result<Self> {
        let mut report = OntologyReport::default();
        let mut obsolete = BTreeSet::new();
        let mut live = BTreeMap::new();
        for mut term in terms {
            if term.obsolete {
                obsolete.insert(term.id.clone());
                continue;
            }
            let own = term.id.prefix().to_string();
            term.ld_targets.retain(|t| t.prefix() != own);
            let mut seen = BTreeSet::new();
            term.ld_targets.retain(|t| seen.insert(t.clone()));
            live.insert(term.id.clone(), term);
        }
        report.obsolete_terms = obsolete.len();

        let mut dangling = BTreeSet::new();
        let mut kept = BTreeSet::new();
        for edge in edges {
            if obsolete.contains(&edge.child) || obsolete.contains(&edge.parent) {
                report.obsolete_edges_dropped += 1;
                continue;
            }
            if !live.contains_key(&edge.child) {
                dangling.insert(edge.child.to_string());
                continue;
            }
            if !live.contains_key(&edge.parent) {
                if edge.relation == IS_A {
                    dangling.insert(edge.parent.to_string());
                } else {
                    report.external_relationships_dropped += 1;
                }
                continue;
            }
            kept.insert(edge);
        }
        if !dangling.is_empty() {
            return Err(Error::DanglingReference(dangling.into_iter().collect()));
        }

        let ontology = Ontology {
            roots: BTreeSet::new(),
            terms: live,
            edges: kept,
            obsolete,
            report,
        };
        if let Some(cycle) = ontology.find_is_a_cycle() {
            return Err(Error::Cycle(cycle));
        }
        let with_parent: BTreeSet<&TermId> = ontology
            .edges
            .iter()
            .filter(|e| e.relation == IS_A)
            .map(|e| &e.child)
            .collect();
        let roots = ontology
            .terms
            .keys()
            .filter(|t| !with_parent.contains(t))
            .cloned()
            .collect();
        Ok(Ontology { roots, ..ontology })
    }

    pub fn terms(&self) -> &BTreeMap<TermId, OntologyTerm> {
        &self.terms
    }

    pub fn term(&self, id: &TermId) -> Option<&OntologyTerm> {
        self.terms.get(id)
    }

    pub fn contains(&self, id: &TermId) -> bool {
        self.terms.contains_key(id)
    }

    pub fn edges(&self) -> &BTreeSet<OntologyEdge> {
        &self.edges
    }

    pub fn roots(&self) -> &BTreeSet<TermId> {
        &self.roots
    }

    /// Ids of obsolete stanzas seen while building (they are not in `terms`).
    pub fn obsolete(&self) -> &BTreeSet<TermId> {
        &self.obsolete
    }

    pub fn report(&self) -> &OntologyReport {
        &self.report
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of terms whose logical definition references at least one term
    /// with the given prefix.
    pub fn count_logical_definitions(&self, target_prefix: &str) -> usize {
        self.terms
            .values()
            .filter(|t| t.ld_targets.iter().any(|x| x.prefix() == target_prefix))
            .count()
    }

    /// Iterative three-colour DFS over `is_a`; returns one cycle if present.
    fn find_is_a_cycle(&self) -> Option<Vec<String>> {
        let ids: Vec<&TermId> = self.terms.keys().collect();
        let index: BTreeMap<&TermId, usize> = ids.iter().enumerate().map(|(i, t)| (*t, i)).collect();
        let mut parents = vec![Vec::new(); ids.len()];
        for e in self.edges.iter().filter(|e| e.relation == IS_A) {
            parents[index[&e.child]].push(index[&e.parent]);
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; ids.len()];
        for start in 0..ids.len() {
            if state[start] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            state[start] = 1;
            while let Some((node, next)) = stack.last_mut() {
                let node = *node;
                if *next < parents[node].len() {
                    let p = parents[node][*next];
                    *next += 1;
                    match state[p] {
                        0 => {
                            state[p] = 1;
                            stack.push((p, 0));
                        }
                        1 => {
                            let pos = stack.iter().position(|(n, _)| *n == p).unwrap();
                            let mut cycle: Vec<String> =
                                stack[pos..].iter().map(|(n, _)| ids[*n].to_string()).collect();
                            cycle.push(ids[p].to_string());
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    state[node] = 2;
                    stack.pop();
                }
            }
        }
        None
    }
}
