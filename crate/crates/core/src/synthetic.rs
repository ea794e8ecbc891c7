//! Planted-structure corpus generator.
//!
//! Terms of both ontologies are grouped into clusters hanging below the
//! ontology roots. Genes and diseases are assigned a cluster and annotated
//! mostly with terms of that cluster; curated associations link genes and
//! diseases of the same cluster. Output files use the formats the parsers
//! read, so the whole pipeline can run on them.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology_io::{write_obo, Ontology, OntologyEdge, OntologyTerm};
use crate::kg::KgVariant;
use crate::kge::{EmbedMethod, KgeTrainConfig};
use crate::learn::{ClassifierKind, GridSpec, Hyperparameters};
use crate::pipeline::{InputFiles, PipelineConfig, Seeds};
use crate::types::TermId;

const TOPICS: &[&str] = &[
    "cardiac", "renal", "neural", "skeletal", "ocular", "hepatic", "dermal", "immune", "muscular", "auditory",
    "pulmonary", "dental",
];
const HP_ROOT: &str = "HP:0000001";
const HP_PHENOTYPE: &str = "HP:0000118";
const GO_ROOT: &str = "GO:0008150";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub clusters: usize,
    pub hp_terms_per_cluster: usize,
    pub go_terms_per_cluster: usize,
    pub genes: usize,
    pub diseases: usize,
    pub hp_per_gene: usize,
    pub go_per_gene: usize,
    pub hp_per_disease: usize,
    /// Probability that an annotation is drawn from a random other cluster.
    pub noise: f64,
    /// Probability that a same-cluster gene-disease pair is curated.
    pub positive_rate: f64,
    /// HP terms per cluster carrying a logical definition into GO.
    pub logical_definitions_per_cluster: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            clusters: 8,
            hp_terms_per_cluster: 19,
            go_terms_per_cluster: 18,
            genes: 60,
            diseases: 40,
            hp_per_gene: 3,
            go_per_gene: 3,
            hp_per_disease: 4,
            noise: 0.1,
            positive_rate: 0.6,
            logical_definitions_per_cluster: 3,
            seed: 7,
        }
    }
}

/// Generated file contents, keyed like [`InputFiles`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub hp_obo: String,
    pub go_obo: String,
    pub gaf: String,
    pub gaf_mapping: String,
    pub gene_phenotype: String,
    pub disease_phenotype: String,
    pub disease_mapping: String,
    pub associations: String,
    /// Every same-cluster (gene id, disease id) pair, curated or not.
    pub planted: Vec<(String, String)>,
    pub term_count: usize,
}

fn term_id(prefix: &str, n: usize) -> TermId {
    TermId::new(&format!("{prefix}:{n:07}")).expect("generated ids are CURIEs")
}

/// Cluster `c` of one ontology: ids `base + 100c + k`, term 0 is the head.
fn cluster_ids(prefix: &str, base: usize, c: usize, size: usize) -> Vec<TermId> {
    (0..size).map(|k| term_id(prefix, base + 100 * c + k)).collect()
}

fn topic(c: usize) -> String {
    let word = TOPICS[c % TOPICS.len()];
    match c / TOPICS.len() {
        0 => word.to_string(),
        round => format!("{word}{round}"),
    }
}

/// Random tree inside each cluster (plus occasional second parents), with
/// cluster heads attached to `anchor`.
fn grow_clusters(
    clusters: &[Vec<TermId>],
    anchor: &TermId,
    extra_relation: Option<&str>,
    rng: &mut ChaCha8Rng,
) -> Vec<OntologyEdge> {
    let mut edges = Vec::new();
    for ids in clusters {
        edges.push(OntologyEdge::is_a(ids[0].clone(), anchor.clone()));
        for k in 1..ids.len() {
            let p = rng.gen_range(0..k);
            edges.push(OntologyEdge::is_a(ids[k].clone(), ids[p].clone()));
            if k > 2 && rng.gen_bool(0.2) {
                let q = rng.gen_range(0..k);
                if q != p {
                    edges.push(OntologyEdge::is_a(ids[k].clone(), ids[q].clone()));
                }
            }
            if let Some(rel) = extra_relation {
                if k > 1 && rng.gen_bool(0.15) {
                    let q = rng.gen_range(1..k);
                    edges.push(OntologyEdge::new(ids[k].clone(), rel, ids[q].clone()));
                }
            }
        }
    }
    edges
}

fn describe(term: OntologyTerm, kind: &str, c: usize, k: usize) -> OntologyTerm {
    let t = topic(c);
    let label = if k == 0 {
        format!("{t} {kind}")
    } else {
        format!("{t} {kind} variant {k}")
    };
    OntologyTerm {
        synonyms: vec![format!("{t} {kind} type {k}")],
        definition: format!("A {kind} affecting the {t} system."),
        ..term.with_label(&label)
    }
}

/// Pick `n` distinct non-head terms, mostly from `home`.
fn pick_terms(clusters: &[Vec<TermId>], home: usize, n: usize, noise: f64, rng: &mut ChaCha8Rng) -> Vec<TermId> {
    let mut out: Vec<TermId> = Vec::with_capacity(n);
    while out.len() < n {
        let c = if clusters.len() > 1 && rng.gen_bool(noise) {
            let other = rng.gen_range(0..clusters.len() - 1);
            if other >= home {
                other + 1
            } else {
                other
            }
        } else {
            home
        };
        let t = clusters[c][rng.gen_range(1..clusters[c].len())].clone();
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

impl SyntheticCorpus {
    pub fn generate(config: &SyntheticConfig) -> Result<Self> {
        if config.clusters == 0 || config.genes < config.clusters || config.diseases < config.clusters {
            return Err(Error::Config(
                "synthetic corpus needs at least one gene and one disease per cluster".into(),
            ));
        }
        if config.hp_terms_per_cluster < 2 || config.go_terms_per_cluster < 2 || config.clusters > 90 {
            return Err(Error::Config("clusters need at least two terms each and at most 90 clusters".into()));
        }
        if config.hp_per_gene >= config.hp_terms_per_cluster
            || config.hp_per_disease >= config.hp_terms_per_cluster
            || config.go_per_gene >= config.go_terms_per_cluster
        {
            return Err(Error::Config("more annotations per entity than terms per cluster".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let hp_clusters: Vec<Vec<TermId>> = (0..config.clusters)
            .map(|c| cluster_ids("HP", 10_000, c, config.hp_terms_per_cluster))
            .collect();
        let go_clusters: Vec<Vec<TermId>> = (0..config.clusters)
            .map(|c| cluster_ids("GO", 20_000, c, config.go_terms_per_cluster))
            .collect();

        let hp_root = TermId::new(HP_ROOT)?;
        let hp_pheno = TermId::new(HP_PHENOTYPE)?;
        let mut hp_terms = vec![
            OntologyTerm::new(hp_root.clone()).with_label("All"),
            OntologyTerm::new(hp_pheno.clone()).with_label("Phenotypic abnormality"),
        ];
        let mut hp_edges = vec![OntologyEdge::is_a(hp_pheno.clone(), hp_root)];
        hp_edges.extend(grow_clusters(&hp_clusters, &hp_pheno, None, &mut rng));
        for (c, ids) in hp_clusters.iter().enumerate() {
            let ld_from = ids.len().saturating_sub(config.logical_definitions_per_cluster).max(1);
            for (k, id) in ids.iter().enumerate() {
                let mut term = describe(OntologyTerm::new(id.clone()), "abnormality", c, k);
                if k >= ld_from {
                    let go = go_clusters[c][rng.gen_range(1..go_clusters[c].len())].clone();
                    // the quality term lies outside both ontologies
                    term.ld_targets = vec![go, term_id("PATO", 1 + c)];
                }
                hp_terms.push(term);
            }
        }
        let hp = Ontology::from_parts(hp_terms, hp_edges)?;

        let go_root = TermId::new(GO_ROOT)?;
        let mut go_terms = vec![OntologyTerm::new(go_root.clone()).with_label("biological_process")];
        for (c, ids) in go_clusters.iter().enumerate() {
            go_terms.extend(ids.iter().enumerate().map(|(k, id)| describe(OntologyTerm::new(id.clone()), "process", c, k)));
        }
        let go_edges = grow_clusters(&go_clusters, &go_root, Some("part_of"), &mut rng);
        let go = Ontology::from_parts(go_terms, go_edges)?;

        let mut gene_cluster: Vec<usize> = (0..config.genes).map(|i| i % config.clusters).collect();
        let mut disease_cluster: Vec<usize> = (0..config.diseases).map(|i| i % config.clusters).collect();
        gene_cluster.shuffle(&mut rng);
        disease_cluster.shuffle(&mut rng);
        let gene_id = |i: usize| format!("{}", 1001 + i);
        let disease_id = |i: usize| format!("C{:07}", 600_001 + i);
        let omim_id = |i: usize| format!("OMIM:{}", 600_001 + i);

        let mut gaf = String::from("!gaf-version: 2.2\n");
        let mut gaf_mapping = String::from("# uniprot\tgene\n");
        let mut gene_phenotype = String::from("ncbi_gene_id\tgene_symbol\thpo_id\thpo_name\tfrequency\tdisease_id\n");
        for (i, &c) in gene_cluster.iter().enumerate() {
            let acc = format!("P{:05}", 10_001 + i);
            let sym = format!("GENE{}", i + 1);
            let _ = writeln!(gaf_mapping, "{acc}\t{}", gene_id(i));
            for go in pick_terms(&go_clusters, c, config.go_per_gene, config.noise, &mut rng) {
                let _ = writeln!(
                    gaf,
                    "UniProtKB\t{acc}\t{sym}\t\t{go}\tPMID:1\tIEA\t\tP\t{sym} protein\t\tprotein\ttaxon:9606\t20200101\tUniProt\t\t"
                );
            }
            // a negated row the parser must ignore
            let off = go_clusters[(c + 1) % config.clusters][1].clone();
            let _ = writeln!(
                gaf,
                "UniProtKB\t{acc}\t{sym}\tNOT\t{off}\tPMID:1\tIDA\t\tP\t{sym} protein\t\tprotein\ttaxon:9606\t20200101\tUniProt\t\t"
            );
            for hp in pick_terms(&hp_clusters, c, config.hp_per_gene, config.noise, &mut rng) {
                let _ = writeln!(gene_phenotype, "{}\t{sym}\t{hp}\t-\t-\t-", gene_id(i));
            }
        }

        let mut disease_phenotype =
            String::from("#description: synthetic annotations\ndatabase_id\tdisease_name\tqualifier\thpo_id\treference\tevidence\tonset\tfrequency\tsex\tmodifier\taspect\tbiocuration\n");
        let mut disease_mapping = String::from("# omim\tumls\n");
        for (i, &c) in disease_cluster.iter().enumerate() {
            let name = format!("{} syndrome {}", topic(c), i + 1);
            let _ = writeln!(disease_mapping, "{}\t{}", omim_id(i), disease_id(i));
            for hp in pick_terms(&hp_clusters, c, config.hp_per_disease, config.noise, &mut rng) {
                let _ = writeln!(disease_phenotype, "{}\t{name}\t\t{hp}\tPMID:1\tPCS\t\t\t\t\tP\tsynthetic", omim_id(i));
            }
        }

        let mut associations = String::from("geneId\tgeneSymbol\tdiseaseId\tdiseaseName\tscore\tsource\n");
        let mut planted = Vec::new();
        for (g, &gc) in gene_cluster.iter().enumerate() {
            for (d, &dc) in disease_cluster.iter().enumerate() {
                if gc != dc {
                    continue;
                }
                planted.push((gene_id(g), disease_id(d)));
                if rng.gen_bool(config.positive_rate) {
                    let source = if rng.gen_bool(0.5) { "CTD_human" } else { "CTD_human;PSYGENET" };
                    let _ = writeln!(associations, "{}\tGENE{}\t{}\tdisease\t0.5\t{source}", gene_id(g), g + 1, disease_id(d));
                }
            }
        }
        // rows the pipeline filters out: an excluded source and an unannotated gene
        let _ = writeln!(associations, "{}\tGENE1\t{}\tdisease\t0.1\tUNIPROT", gene_id(0), disease_id(0));
        let _ = writeln!(associations, "99999\tNOGENE\t{}\tdisease\t0.1\tCTD_human", disease_id(0));

        Ok(SyntheticCorpus {
            term_count: hp.len() + go.len(),
            hp_obo: write_obo(&hp),
            go_obo: write_obo(&go),
            gaf,
            gaf_mapping,
            gene_phenotype,
            disease_phenotype,
            disease_mapping,
            associations,
            planted,
        })
    }

    /// Write the files into `dir` and return their paths relative to `dir`,
    /// ready for a config file saved alongside them.
    pub fn write(&self, dir: &Path) -> Result<InputFiles> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = InputFiles {
            hp_ontology: "hp.obo".into(),
            go_ontology: "go.obo".into(),
            gaf: "goa_human.gaf".into(),
            gaf_mapping: "uniprot_to_gene.tsv".into(),
            gene_phenotype: "genes_to_phenotype.txt".into(),
            disease_phenotype: "phenotype.hpoa".into(),
            disease_mapping: "omim_to_umls.tsv".into(),
            associations: "curated_gene_disease_associations.tsv".into(),
        };
        for (name, text) in [
            (&files.hp_ontology, &self.hp_obo),
            (&files.go_ontology, &self.go_obo),
            (&files.gaf, &self.gaf),
            (&files.gaf_mapping, &self.gaf_mapping),
            (&files.gene_phenotype, &self.gene_phenotype),
            (&files.disease_phenotype, &self.disease_phenotype),
            (&files.disease_mapping, &self.disease_mapping),
            (&files.associations, &self.associations),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(files)
    }
}

/// Small-scale configuration for a corpus written by [`SyntheticCorpus::write`]:
/// walk embeddings of dimension 64 on `HP_GO_LD`, the Hadamard operator, a
/// random forest and the cosine mode.
pub fn demo_config(inputs: InputFiles, seed: u64) -> PipelineConfig {
    let mut config = PipelineConfig::new(inputs, Seeds::all(seed));
    config.kg_variants = vec![KgVariant::HpGoLd];
    config.embedding.methods = vec![EmbedMethod::Walk];
    config.embedding.training = KgeTrainConfig {
        dimension: 64,
        epochs: 5,
        walks_per_node: 20,
        walk_depth: 4,
        window: 5,
        ..KgeTrainConfig::default()
    };
    let candidates = [None, Some(10)]
        .into_iter()
        .map(|max_depth| Hyperparameters::RandomForest { trees: 100, max_depth })
        .collect();
    config.grids.insert(
        ClassifierKind::RandomForest,
        GridSpec {
            candidates,
            fold_count: 3,
        },
    );
    config
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology_io::{parse_associations, parse_disease_phenotype, parse_gaf, parse_gene_phenotype, parse_mapping, parse_obo, EvidenceFilter};

    #[test]
    fn default_corpus_parses() {
        let corpus = SyntheticCorpus::generate(&SyntheticConfig::default()).unwrap();
        assert_eq!(corpus.term_count, 2 + 8 * 19 + 1 + 8 * 18);
        let hp = parse_obo(&corpus.hp_obo).unwrap();
        let go = parse_obo(&corpus.go_obo).unwrap();
        assert_eq!(hp.roots().len(), 1);
        assert_eq!(go.roots().len(), 1);
        assert_eq!(hp.count_logical_definitions("GO"), 8 * 3);

        let uniprot = parse_mapping(&corpus.gaf_mapping).unwrap().value;
        let gaf = parse_gaf(&corpus.gaf, &uniprot, &EvidenceFilter::AcceptAll).unwrap();
        assert_eq!(gaf.value.len(), 60);
        assert_eq!(gaf.report.skipped_negated, 60);
        assert_eq!(parse_gene_phenotype(&corpus.gene_phenotype).unwrap().value.len(), 60);
        let omim = parse_mapping(&corpus.disease_mapping).unwrap().value;
        assert_eq!(parse_disease_phenotype(&corpus.disease_phenotype, &omim).unwrap().value.len(), 40);
        let assocs = parse_associations(&corpus.associations).unwrap().value;
        assert!(assocs.len() > 100);
    }

    #[test]
    fn curated_pairs_are_planted() {
        let corpus = SyntheticCorpus::generate(&SyntheticConfig::default()).unwrap();
        let assocs = parse_associations(&corpus.associations).unwrap().value;
        let curated = assocs.iter().filter(|a| a.gene.id() != "99999" && !a.sources.contains("UNIPROT"));
        for a in curated {
            assert!(corpus.planted.contains(&(a.gene.id().to_string(), a.disease.id().to_string())));
        }
    }

    #[test]
    fn seeded_generation() {
        let a = SyntheticCorpus::generate(&SyntheticConfig::default()).unwrap();
        let b = SyntheticCorpus::generate(&SyntheticConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = SyntheticCorpus::generate(&SyntheticConfig {
            seed: 8,
            ..SyntheticConfig::default()
        })
        .unwrap();
        assert_ne!(a.associations, c.associations);
    }

    #[test]
    fn rejects_impossible_shapes() {
        let bad = SyntheticConfig {
            genes: 3,
            ..SyntheticConfig::default()
        };
        assert!(matches!(SyntheticCorpus::generate(&bad), Err(Error::Config(_))));
    }
}
