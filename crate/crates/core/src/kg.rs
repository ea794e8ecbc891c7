//! Knowledge graph assembly for the `HP`, `HP_GO` and `HP_GO_LD` variants.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology_io::{AnnotationMap, Ontology, IS_A};
use crate::types::{EntityId, TermId};

/// A graph node: an ontology term (including `VR:ROOT`) or an entity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Term(TermId),
    Entity(EntityId),
}

impl NodeId {
    pub fn as_term(&self) -> Option<&TermId> {
        match self {
            NodeId::Term(t) => Some(t),
            NodeId::Entity(_) => None,
        }
    }

    pub fn as_entity(&self) -> Option<&EntityId> {
        match self {
            NodeId::Entity(e) => Some(e),
            NodeId::Term(_) => None,
        }
    }

    pub fn is_term(&self) -> bool {
        matches!(self, NodeId::Term(_))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Term(t) => t.fmt(f),
            NodeId::Entity(e) => e.fmt(f),
        }
    }
}

impl FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(e) = EntityId::parse_token(s) {
            return Ok(NodeId::Entity(e));
        }
        TermId::new(s).map(NodeId::Term)
    }
}

impl From<TermId> for NodeId {
    fn from(t: TermId) -> Self {
        NodeId::Term(t)
    }
}

impl From<EntityId> for NodeId {
    fn from(e: EntityId) -> Self {
        NodeId::Entity(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    SubClassOf,
    EquivalentTo,
    HasAnnotation,
    /// Non-hierarchical ontology relationship such as `part_of`.
    Other(String),
}

impl Relation {
    pub fn as_str(&self) -> &str {
        match self {
            Relation::SubClassOf => "subClassOf",
            Relation::EquivalentTo => "equivalentTo",
            Relation::HasAnnotation => "hasAnnotation",
            Relation::Other(s) => s,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<&str> for Relation {
    fn from(s: &str) -> Self {
        match s {
            "subClassOf" | IS_A => Relation::SubClassOf,
            "equivalentTo" => Relation::EquivalentTo,
            "hasAnnotation" => Relation::HasAnnotation,
            other => Relation::Other(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: NodeId,
    pub relation: Relation,
    pub object: NodeId,
}

impl Triple {
    pub fn new(subject: impl Into<NodeId>, relation: Relation, object: impl Into<NodeId>) -> Self {
        Triple {
            subject: subject.into(),
            relation,
            object: object.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KgVariant {
    #[serde(rename = "HP")]
    Hp,
    #[serde(rename = "HP_GO")]
    HpGo,
    #[serde(rename = "HP_GO_LD")]
    HpGoLd,
}

impl KgVariant {
    pub const ALL: [KgVariant; 3] = [KgVariant::Hp, KgVariant::HpGo, KgVariant::HpGoLd];

    pub fn as_str(self) -> &'static str {
        match self {
            KgVariant::Hp => "HP",
            KgVariant::HpGo => "HP_GO",
            KgVariant::HpGoLd => "HP_GO_LD",
        }
    }

    pub fn uses_go(self) -> bool {
        self != KgVariant::Hp
    }
}

impl fmt::Display for KgVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KgVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "HP" => Ok(KgVariant::Hp),
            "HP_GO" => Ok(KgVariant::HpGo),
            "HP_GO_LD" => Ok(KgVariant::HpGoLd),
            other => Err(Error::Config(format!("unknown KG variant `{other}`"))),
        }
    }
}

/// Outcome of [`KnowledgeGraph::apply_logical_definitions`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LdReport {
    /// Terms that gained at least one equivalence link.
    pub terms_linked: usize,
    /// Undirected term pairs linked (each stored as two triples).
    pub links_added: usize,
    /// Targets not present in the graph.
    pub targets_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgReport {
    pub variant: KgVariant,
    pub nodes: usize,
    pub term_nodes: usize,
    pub entity_nodes: usize,
    pub triples: usize,
    pub triples_by_relation: BTreeMap<String, usize>,
    pub logical_definitions: Option<LdReport>,
}

/// Integer adjacency built once per graph for traversal queries.
#[derive(Debug, Clone, Default)]
struct GraphIndex {
    ids: Vec<NodeId>,
    pos: HashMap<NodeId, u32>,
    parents: Vec<Vec<u32>>,
    children: Vec<Vec<u32>>,
    equivalents: Vec<Vec<u32>>,
    /// `(relation index, neighbour, edge index)` for both edge directions.
    incident: Vec<Vec<(u32, u32, u32)>>,
    relations: Vec<String>,
}

impl GraphIndex {
    fn build(nodes: &BTreeSet<NodeId>, triples: &BTreeSet<Triple>) -> Self {
        let ids: Vec<NodeId> = nodes.iter().cloned().collect();
        let pos: HashMap<NodeId, u32> = ids.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        let n = ids.len();
        let mut idx = GraphIndex {
            parents: vec![Vec::new(); n],
            children: vec![Vec::new(); n],
            equivalents: vec![Vec::new(); n],
            incident: vec![Vec::new(); n],
            relations: Vec::new(),
            ids,
            pos,
        };
        let relations: BTreeSet<&str> = triples.iter().map(|t| t.relation.as_str()).collect();
        idx.relations = relations.iter().map(|s| s.to_string()).collect();
        let rel_pos: HashMap<&str, u32> = relations.iter().enumerate().map(|(i, r)| (*r, i as u32)).collect();
        for (edge, t) in triples.iter().enumerate() {
            let s = idx.pos[&t.subject];
            let o = idx.pos[&t.object];
            let r = rel_pos[t.relation.as_str()];
            match t.relation {
                Relation::SubClassOf => {
                    idx.parents[s as usize].push(o);
                    idx.children[o as usize].push(s);
                }
                Relation::EquivalentTo => idx.equivalents[s as usize].push(o),
                _ => {}
            }
            idx.incident[s as usize].push((r, o, edge as u32));
            idx.incident[o as usize].push((r, s, edge as u32));
        }
        idx
    }
}

/// Merged multi-ontology graph with annotation edges.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    variant: KgVariant,
    nodes: BTreeSet<NodeId>,
    triples: BTreeSet<Triple>,
    index: GraphIndex,
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.variant == other.variant && self.nodes == other.nodes && self.triples == other.triples
    }
}

/// Inputs for [`build_kg`]. GO fields are required for the GO variants and
/// must be absent for `HP`.
#[derive(Debug, Clone, Copy)]
pub struct KgInputs<'a> {
    pub hp: &'a Ontology,
    pub go: Option<&'a Ontology>,
    pub gene_hp: &'a AnnotationMap,
    pub disease_hp: &'a AnnotationMap,
    pub gene_go: Option<&'a AnnotationMap>,
}

/// Assemble one KG variant.
pub fn build_kg(variant: KgVariant, inputs: KgInputs<'_>) -> Result<(KnowledgeGraph, KgReport)> {
    let (go, gene_go) = match (variant.uses_go(), inputs.go, inputs.gene_go) {
        (false, None, None) => (None, None),
        (true, Some(go), Some(gg)) => (Some(go), Some(gg)),
        (false, _, _) => {
            return Err(Error::Config("variant HP takes no GO ontology or GO annotations".into()))
        }
        (true, _, _) => {
            return Err(Error::Config(format!(
                "variant {variant} requires both the GO ontology and GO annotations"
            )))
        }
    };
    let ontologies: Vec<&Ontology> = std::iter::once(inputs.hp).chain(go).collect();
    let annotation_maps: Vec<&AnnotationMap> = [inputs.gene_hp, inputs.disease_hp]
        .into_iter()
        .chain(gene_go)
        .collect();

    let mut missing = BTreeSet::new();
    for map in &annotation_maps {
        for (_, terms) in map.iter() {
            for t in terms {
                if !ontologies.iter().any(|o| o.contains(t)) {
                    missing.insert(t.to_string());
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Integrity(missing.into_iter().collect()));
    }

    let mut nodes = BTreeSet::new();
    let mut triples = BTreeSet::new();
    for o in &ontologies {
        nodes.extend(o.terms().keys().cloned().map(NodeId::Term));
        for e in o.edges() {
            triples.insert(Triple::new(
                e.child.clone(),
                Relation::from(e.relation.as_str()),
                e.parent.clone(),
            ));
        }
    }
    for map in &annotation_maps {
        for (entity, terms) in map.iter() {
            nodes.insert(NodeId::Entity(entity.clone()));
            for t in terms {
                triples.insert(Triple::new(entity.clone(), Relation::HasAnnotation, t.clone()));
            }
        }
    }
    let mut kg = KnowledgeGraph::from_parts(variant, nodes, triples);
    let mut ld = None;
    if variant.uses_go() {
        kg = kg.with_virtual_root();
    }
    if variant == KgVariant::HpGoLd {
        let (with_ld, report) = kg.apply_logical_definitions(inputs.hp);
        kg = with_ld;
        ld = Some(report);
    }
    let report = kg.report(ld);
    log::info!(
        "built {} KG: {} nodes, {} triples",
        variant,
        report.nodes,
        report.triples
    );
    Ok((kg, report))
}

impl KnowledgeGraph {
    /// Assemble a graph from explicit nodes and triples; triple endpoints are
    /// added to the node set.
    pub fn from_parts(variant: KgVariant, mut nodes: BTreeSet<NodeId>, triples: BTreeSet<Triple>) -> Self {
        for t in &triples {
            nodes.insert(t.subject.clone());
            nodes.insert(t.object.clone());
        }
        let index = GraphIndex::build(&nodes, &triples);
        KnowledgeGraph {
            variant,
            nodes,
            triples,
            index,
        }
    }

    pub fn variant(&self) -> KgVariant {
        self.variant
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn contains(&self, node: &NodeId) -> bool {
        self.index.pos.contains_key(node)
    }

    pub fn term_nodes(&self) -> impl Iterator<Item = &TermId> {
        self.nodes.iter().filter_map(NodeId::as_term)
    }

    pub fn entity_nodes(&self) -> impl Iterator<Item = &EntityId> {
        self.nodes.iter().filter_map(NodeId::as_entity)
    }

    /// Dense index of a node (nodes are indexed in sorted order).
    pub fn node_index(&self, node: &NodeId) -> Option<usize> {
        self.index.pos.get(node).map(|&i| i as usize)
    }

    pub fn node_at(&self, index: usize) -> &NodeId {
        &self.index.ids[index]
    }

    /// Direct `subClassOf` parents of the node at `index`.
    pub fn parents_of(&self, index: usize) -> &[u32] {
        &self.index.parents[index]
    }

    pub fn children_of(&self, index: usize) -> &[u32] {
        &self.index.children[index]
    }

    pub fn equivalents_of(&self, index: usize) -> &[u32] {
        &self.index.equivalents[index]
    }

    /// Incident edges in both directions as `(relation index, neighbour, edge id)`.
    pub fn incident(&self, index: usize) -> &[(u32, u32, u32)] {
        &self.index.incident[index]
    }

    /// Relation labels, indexed by the relation index used in [`Self::incident`].
    pub fn relation_labels(&self) -> &[String] {
        &self.index.relations
    }

    pub fn report(&self, logical_definitions: Option<LdReport>) -> KgReport {
        let mut by_rel = BTreeMap::new();
        for t in &self.triples {
            *by_rel.entry(t.relation.to_string()).or_insert(0) += 1;
        }
        let term_nodes = self.term_nodes().count();
        KgReport {
            variant: self.variant,
            nodes: self.nodes.len(),
            term_nodes,
            entity_nodes: self.nodes.len() - term_nodes,
            triples: self.triples.len(),
            triples_by_relation: by_rel,
            logical_definitions,
        }
    }

    /// Add `VR:ROOT` and a `subClassOf` edge to it from every term node that
    /// has no `subClassOf` parent. Idempotent.
    pub fn with_virtual_root(self) -> Self {
        let vr = NodeId::Term(TermId::virtual_root());
        let roots: Vec<NodeId> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(i, n)| n.is_term() && **n != vr && self.index.parents[*i].is_empty())
            .map(|(_, n)| n.clone())
            .collect();
        if roots.is_empty() && self.contains(&vr) {
            return self;
        }
        let KnowledgeGraph {
            variant,
            mut nodes,
            mut triples,
            ..
        } = self;
        nodes.insert(vr.clone());
        for r in roots {
            triples.insert(Triple::new(r, Relation::SubClassOf, vr.clone()));
        }
        KnowledgeGraph::from_parts(variant, nodes, triples)
    }

    /// Add `equivalentTo` triples in both directions between each term of
    /// `ontology` carrying logical-definition targets and every such target
    /// present in the graph.
    pub fn apply_logical_definitions(self, ontology: &Ontology) -> (Self, LdReport) {
        let mut report = LdReport::default();
        let mut added = Vec::new();
        for term in ontology.terms().values().filter(|t| !t.ld_targets.is_empty()) {
            let source = NodeId::Term(term.id.clone());
            if !self.contains(&source) {
                report.targets_skipped += term.ld_targets.len();
                continue;
            }
            let mut linked = false;
            for target in &term.ld_targets {
                let target = NodeId::Term(target.clone());
                if self.contains(&target) {
                    added.push(Triple::new(source.clone(), Relation::EquivalentTo, target.clone()));
                    added.push(Triple::new(target, Relation::EquivalentTo, source.clone()));
                    report.links_added += 1;
                    linked = true;
                } else {
                    report.targets_skipped += 1;
                }
            }
            if linked {
                report.terms_linked += 1;
            }
        }
        if added.is_empty() {
            return (self, report);
        }
        let KnowledgeGraph {
            variant,
            nodes,
            mut triples,
            ..
        } = self;
        triples.extend(added);
        (KnowledgeGraph::from_parts(variant, nodes, triples), report)
    }

    /// `term` plus every node reachable through `subClassOf` (and, with
    /// `cross_equivalence`, through `equivalentTo`).
    pub fn ancestors(&self, term: &TermId, cross_equivalence: bool) -> Result<BTreeSet<TermId>> {
        let start = self
            .node_index(&NodeId::Term(term.clone()))
            .ok_or_else(|| Error::Lookup(term.to_string()))?;
        Ok(self
            .ancestor_indices(start, cross_equivalence)
            .into_iter()
            .filter_map(|i| self.node_at(i as usize).as_term().cloned())
            .collect())
    }

    /// Index-level closure, sorted ascending.
    pub fn ancestor_indices(&self, start: usize, cross_equivalence: bool) -> Vec<u32> {
        let mut seen = vec![false; self.index.ids.len()];
        let mut queue = VecDeque::from([start as u32]);
        seen[start] = true;
        let mut out = Vec::new();
        while let Some(n) = queue.pop_front() {
            out.push(n);
            let eq: &[u32] = if cross_equivalence {
                &self.index.equivalents[n as usize]
            } else {
                &[]
            };
            for &p in self.index.parents[n as usize].iter().chain(eq) {
                if !seen[p as usize] {
                    seen[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Canonical TSV export: `subject\trelation\tobject`, lexicographically
    /// sorted, one triple per line.
    pub fn to_tsv(&self) -> String {
        let mut lines: Vec<String> = self
            .triples
            .iter()
            .map(|t| format!("{}\t{}\t{}", t.subject, t.relation, t.object))
            .collect();
        lines.sort_unstable();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }

    /// Inverse of [`Self::to_tsv`]. Nodes without any triple are not recoverable.
    pub fn from_tsv(variant: KgVariant, text: &str) -> Result<Self> {
        let mut triples = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 3 columns, found {}", cols.len()),
                });
            }
            let node = |s: &str| {
                s.parse::<NodeId>().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("bad node `{s}`"),
                })
            };
            triples.insert(Triple {
                subject: node(cols[0])?,
                relation: Relation::from(cols[1]),
                object: node(cols[2])?,
            });
        }
        Ok(KnowledgeGraph::from_parts(variant, BTreeSet::new(), triples))
    }
}
