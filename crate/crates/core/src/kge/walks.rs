//! Random-walk and lexical sentence corpora.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kg::{KnowledgeGraph, NodeId, Relation};
use crate::ontology_io::Ontology;

/// Token sentences plus the set of tokens that name graph nodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WalkCorpus {
    pub sentences: Vec<Vec<String>>,
    pub node_tokens: BTreeSet<String>,
}

impl WalkCorpus {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn extend(&mut self, other: WalkCorpus) {
        self.sentences.extend(other.sentences);
        self.node_tokens.extend(other.node_tokens);
    }

    fn push_nodes(&mut self, sentence: Vec<String>, nodes: impl IntoIterator<Item = String>) {
        self.node_tokens.extend(nodes);
        self.sentences.push(sentence);
    }
}

/// `walks_per_node` walks of at most `depth` edge steps from every node.
///
/// Edges are traversed in either direction but a walk never immediately
/// re-uses the edge it just crossed; a walk ends early when no other edge is
/// available. Nodes without edges produce no sentence. Each start node draws
/// from its own ChaCha stream, so the corpus does not depend on thread count.
pub fn generate_walks(kg: &KnowledgeGraph, walks_per_node: usize, depth: usize, seed: u64) -> Result<WalkCorpus> {
    if depth == 0 {
        return Err(Error::Config("walk depth must be at least 1".into()));
    }
    let labels = kg.relation_labels();
    let per_node: Vec<Vec<Vec<String>>> = (0..kg.node_count())
        .into_par_iter()
        .map(|start| {
            if kg.incident(start).is_empty() {
                return Vec::new();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(start as u64);
            (0..walks_per_node)
                .map(|_| {
                    let mut sentence = vec![kg.node_at(start).to_string()];
                    let (mut at, mut via) = (start, None);
                    for _ in 0..depth {
                        let options: Vec<&(u32, u32, u32)> =
                            kg.incident(at).iter().filter(|e| Some(e.2) != via).collect();
                        if options.is_empty() {
                            break;
                        }
                        let &(rel, next, edge) = options[rng.gen_range(0..options.len())];
                        sentence.push(labels[rel as usize].clone());
                        sentence.push(kg.node_at(next as usize).to_string());
                        at = next as usize;
                        via = Some(edge);
                    }
                    sentence
                })
                .collect()
        })
        .collect();
    let node_tokens = (0..kg.node_count())
        .filter(|&i| !kg.incident(i).is_empty())
        .map(|i| kg.node_at(i).to_string())
        .collect();
    Ok(WalkCorpus {
        sentences: per_node.into_iter().flatten().collect(),
        node_tokens,
    })
}

/// Lowercased whitespace tokens with surrounding punctuation trimmed.
pub fn tokenize_lexical(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Sentences from the graph's axioms and the ontologies' lexical metadata:
/// every non-annotation triple, every inferred (non-asserted) subsumption
/// `term subClassOf ancestor`, one `term word word ...` sentence per label,
/// synonym and definition, and finally every annotation triple.
pub fn build_lexical_corpus(kg: &KnowledgeGraph, ontologies: &[&Ontology]) -> WalkCorpus {
    let mut corpus = WalkCorpus::default();
    let triple_sentence = |s: &NodeId, r: &Relation, o: &NodeId| vec![s.to_string(), r.to_string(), o.to_string()];

    for t in kg.triples().iter().filter(|t| t.relation != Relation::HasAnnotation) {
        corpus.push_nodes(
            triple_sentence(&t.subject, &t.relation, &t.object),
            [t.subject.to_string(), t.object.to_string()],
        );
    }

    for i in 0..kg.node_count() {
        if !kg.node_at(i).is_term() {
            continue;
        }
        let direct = kg.parents_of(i);
        for a in kg.ancestor_indices(i, false) {
            if a as usize == i || direct.contains(&a) {
                continue;
            }
            let (s, o) = (kg.node_at(i), kg.node_at(a as usize));
            corpus.push_nodes(triple_sentence(s, &Relation::SubClassOf, o), [s.to_string(), o.to_string()]);
        }
    }

    for ontology in ontologies {
        for term in ontology.terms().values() {
            let node = NodeId::Term(term.id.clone());
            if !kg.contains(&node) {
                continue;
            }
            let texts = std::iter::once(&term.label)
                .chain(&term.synonyms)
                .chain(std::iter::once(&term.definition));
            for text in texts {
                let words = tokenize_lexical(text);
                if words.is_empty() {
                    continue;
                }
                let mut sentence = vec![node.to_string()];
                sentence.extend(words);
                corpus.push_nodes(sentence, [node.to_string()]);
            }
        }
    }

    for t in kg.triples().iter().filter(|t| t.relation == Relation::HasAnnotation) {
        corpus.push_nodes(
            triple_sentence(&t.subject, &t.relation, &t.object),
            [t.subject.to_string(), t.object.to_string()],
        );
    }
    corpus
}
