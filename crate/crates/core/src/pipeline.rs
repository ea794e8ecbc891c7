//! Staged experiment runner.
//!
//! Each stage reads the artifacts of earlier stages from the output
//! directory, writes its own files into `<out>/<stage>/` and records a
//! [`RunManifest`] with SHA-256 digests of everything it read and wrote.
//! Stages: ingest, build-kg, baseline, embed, pair, train, evaluate, report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::{
    evaluate_run, sample_negatives, stratified_split, AssociationDataset, EvalMode, EvalReport, Partition, RunInput,
};
use crate::kg::{build_kg, KgInputs, KgVariant, KnowledgeGraph, Relation};
use crate::kge::{embed, EmbedMethod, EmbeddingTable, KgeTrainConfig};
use crate::learn::{grid_search, ClassifierKind, ClassifierModel, GridSpec};
use crate::ontology_io::{
    filter_associations, parse_associations, parse_disease_phenotype, parse_gaf, parse_gene_phenotype, parse_mapping,
    parse_obo, AnnotationMap, EvidenceFilter, Ontology, Parsed,
};
use crate::pairing::{cosine_scores, PairFeatures, PairOperator};
use crate::semsim::{BaselineScorer, SimilarityConfig};
use crate::types::{EntityId, Label};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
const MANIFEST: &str = "manifest.json";
const DATASET: &str = "dataset.tsv";

/// Raw input files, relative to the configuration file unless absolute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputFiles {
    pub hp_ontology: PathBuf,
    pub go_ontology: PathBuf,
    /// GO annotations (GAF 2.x).
    pub gaf: PathBuf,
    /// GAF accession → gene id.
    pub gaf_mapping: PathBuf,
    /// genes_to_phenotype layout.
    pub gene_phenotype: PathBuf,
    /// HPOA layout.
    pub disease_phenotype: PathBuf,
    /// HPOA disease id → association-source disease id.
    pub disease_mapping: PathBuf,
    pub associations: PathBuf,
}

impl InputFiles {
    fn entries(&self) -> [(&'static str, &Path); 8] {
        [
            ("hp_ontology", &self.hp_ontology),
            ("go_ontology", &self.go_ontology),
            ("gaf", &self.gaf),
            ("gaf_mapping", &self.gaf_mapping),
            ("gene_phenotype", &self.gene_phenotype),
            ("disease_phenotype", &self.disease_phenotype),
            ("disease_mapping", &self.disease_mapping),
            ("associations", &self.associations),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub sampling: u64,
    pub split: u64,
    pub embedding: u64,
    pub training: u64,
}

impl Seeds {
    pub fn all(seed: u64) -> Self {
        Seeds {
            sampling: seed,
            split: seed,
            embedding: seed,
            training: seed,
        }
    }
}

/// A classifier, or thresholded cosine similarity of the raw vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Learner {
    Classifier(ClassifierKind),
    Cosine,
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Learner::Classifier(k) => f.write_str(k.as_str()),
            Learner::Cosine => f.write_str("cosine"),
        }
    }
}

impl FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("cosine") {
            Ok(Learner::Cosine)
        } else {
            s.parse().map(Learner::Classifier)
        }
    }
}

impl TryFrom<String> for Learner {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Learner> for String {
    fn from(l: Learner) -> String {
        l.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSettings {
    pub methods: Vec<EmbedMethod>,
    /// The seed field is ignored; cell seeds derive from `seeds.embedding`.
    pub training: KgeTrainConfig,
}

impl Default for EmbeddingSettings {
    fn default() -> Self {
        EmbeddingSettings {
            methods: vec![EmbedMethod::Walk],
            training: KgeTrainConfig::default(),
        }
    }
}

fn default_excluded() -> BTreeSet<String> {
    ["UNIPROT", "OMIM", "ORPHANET"].into_iter().map(String::from).collect()
}

fn default_train_fraction() -> f64 {
    0.7
}

fn default_variants() -> Vec<KgVariant> {
    KgVariant::ALL.to_vec()
}

fn default_measures() -> Vec<SimilarityConfig> {
    SimilarityConfig::all().to_vec()
}

fn default_operators() -> Vec<PairOperator> {
    vec![PairOperator::Hadamard]
}

fn default_learners() -> Vec<Learner> {
    vec![Learner::Classifier(ClassifierKind::RandomForest), Learner::Cosine]
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Experiment configuration, stored as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: InputFiles,
    /// Association sources whose pairs are dropped.
    #[serde(default = "default_excluded")]
    pub excluded_sources: BTreeSet<String>,
    /// GAF evidence codes to skip.
    #[serde(default)]
    pub excluded_evidence: BTreeSet<String>,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_variants")]
    pub kg_variants: Vec<KgVariant>,
    #[serde(default = "default_measures")]
    pub baseline_measures: Vec<SimilarityConfig>,
    #[serde(default)]
    pub embedding: EmbeddingSettings,
    #[serde(default = "default_operators")]
    pub operators: Vec<PairOperator>,
    #[serde(default = "default_learners")]
    pub learners: Vec<Learner>,
    /// Per-classifier grids; missing kinds use the built-in grid.
    #[serde(default)]
    pub grids: BTreeMap<ClassifierKind, GridSpec>,
    pub seeds: Seeds,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    /// Configuration with every optional field at its default.
    pub fn new(inputs: InputFiles, seeds: Seeds) -> Self {
        PipelineConfig {
            inputs,
            excluded_sources: default_excluded(),
            excluded_evidence: BTreeSet::new(),
            train_fraction: default_train_fraction(),
            kg_variants: default_variants(),
            baseline_measures: default_measures(),
            embedding: EmbeddingSettings::default(),
            operators: default_operators(),
            learners: default_learners(),
            grids: BTreeMap::new(),
            seeds,
            output_dir: default_output(),
            base_dir: PathBuf::from("."),
        }
    }

    /// Read and validate a JSON configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let missing: Vec<String> = self
            .inputs
            .entries()
            .iter()
            .map(|(_, p)| self.resolve(p))
            .filter(|p| !p.is_file())
            .map(|p| p.display().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!("input files not found: {}", missing.join(", "))));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!("train_fraction {} outside (0,1)", self.train_fraction)));
        }
        let nonempty = [
            ("kg_variants", self.kg_variants.is_empty()),
            ("baseline_measures", self.baseline_measures.is_empty()),
            ("embedding.methods", self.embedding.methods.is_empty()),
            ("operators", self.operators.is_empty()),
            ("learners", self.learners.is_empty()),
        ];
        if let Some((name, _)) = nonempty.iter().find(|(_, empty)| *empty) {
            return Err(Error::Config(format!("{name} must not be empty")));
        }
        self.embedding.training.validate()?;
        for (kind, grid) in &self.grids {
            grid.validate()?;
            if grid.candidates[0].kind() != *kind {
                return Err(Error::Config(format!("grid for {kind} holds {} candidates", grid.candidates[0].kind())));
            }
        }
        Ok(())
    }

    fn grid(&self, kind: ClassifierKind) -> GridSpec {
        self.grids.get(&kind).cloned().unwrap_or_else(|| GridSpec::default_for(kind))
    }

    fn classifiers(&self) -> impl Iterator<Item = ClassifierKind> + '_ {
        self.learners.iter().filter_map(|l| match l {
            Learner::Classifier(k) => Some(*k),
            Learner::Cosine => None,
        })
    }

    fn uses_cosine(&self) -> bool {
        self.learners.contains(&Learner::Cosine)
    }

    /// Configured variants plus `HP`, which the baselines need.
    fn built_variants(&self) -> BTreeSet<KgVariant> {
        self.kg_variants.iter().copied().chain([KgVariant::Hp]).collect()
    }

    /// JSON echo stored in manifests; the output location is left out so
    /// identical runs into different directories agree.
    fn echo(&self) -> Result<serde_json::Value> {
        let mut value = serde_json::to_value(self)?;
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        Ok(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    BuildKg,
    Baseline,
    Embed,
    Pair,
    Train,
    Evaluate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::BuildKg,
        Stage::Baseline,
        Stage::Embed,
        Stage::Pair,
        Stage::Train,
        Stage::Evaluate,
        Stage::Report,
    ];

    /// Directory name and CLI subcommand.
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::BuildKg => "build-kg",
            Stage::Baseline => "baseline",
            Stage::Embed => "embed",
            Stage::Pair => "pair",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Provenance record written as `<stage>/manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: String,
    pub tool_version: String,
    pub config: serde_json::Value,
    /// SHA-256 of every file read: raw inputs by role, artifacts by path
    /// relative to the output directory.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of every file written, relative to the output directory.
    pub outputs: BTreeMap<String, String>,
    /// Seeds used, including per-cell derived seeds.
    pub seeds: BTreeMap<String, u64>,
    pub summary: serde_json::Value,
    /// Wall-clock milliseconds; omitted in deterministic mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Cell seed: the base seed XOR the first 8 bytes of SHA-256(cell name).
pub fn derive_seed(base: u64, cell: &str) -> u64 {
    let digest = Sha256::digest(cell.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    base ^ u64::from_le_bytes(bytes)
}

/// Bookkeeping for one stage execution.
struct StageRun<'a> {
    pipeline: &'a Pipeline,
    stage: Stage,
    dir: PathBuf,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    seeds: BTreeMap<String, u64>,
    started: Instant,
}

impl<'a> StageRun<'a> {
    /// Start a stage with an empty directory, keeping the files in `keep`.
    fn start(pipeline: &'a Pipeline, stage: Stage, keep: &[&str]) -> Result<Self> {
        let dir = pipeline.out.join(stage.as_str());
        if dir.is_dir() {
            let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
            for entry in entries {
                let entry = entry.map_err(|e| Error::io(&dir, e))?;
                let path = entry.path();
                if keep.iter().any(|k| entry.file_name() == *k) {
                    continue;
                }
                let removed = if path.is_dir() {
                    std::fs::remove_dir_all(&path)
                } else {
                    std::fs::remove_file(&path)
                };
                removed.map_err(|e| Error::io(&path, e))?;
            }
        }
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        log::info!("stage {stage}: writing to {}", dir.display());
        Ok(StageRun {
            pipeline,
            stage,
            dir,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            seeds: BTreeMap::new(),
            started: Instant::now(),
        })
    }

    fn read_input(&mut self, role: &str, path: &Path) -> Result<String> {
        let path = self.pipeline.config.resolve(path);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        self.inputs.insert(role.to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    /// Read an upstream artifact, `stage/file`.
    fn read_artifact(&mut self, stage: Stage, file: &str) -> Result<String> {
        let rel = format!("{}/{file}", stage.as_str());
        let path = self.pipeline.out.join(&rel);
        if !path.is_file() {
            return Err(Error::StageDependency(path));
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        self.inputs.insert(rel, sha256_hex(text.as_bytes()));
        Ok(text)
    }

    fn upstream_manifest(&mut self, stage: Stage) -> Result<RunManifest> {
        Ok(serde_json::from_str(&self.read_artifact(stage, MANIFEST)?)?)
    }

    fn write(&mut self, file: &str, text: &str) -> Result<()> {
        let path = self.dir.join(file);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.outputs
            .insert(format!("{}/{file}", self.stage.as_str()), sha256_hex(text.as_bytes()));
        Ok(())
    }

    fn finish(mut self, summary: serde_json::Value) -> Result<RunManifest> {
        let timings_ms = (!self.pipeline.deterministic)
            .then(|| BTreeMap::from([(self.stage.as_str().to_string(), self.started.elapsed().as_millis() as u64)]));
        let manifest = RunManifest {
            stage: self.stage.as_str().to_string(),
            tool_version: TOOL_VERSION.to_string(),
            config: self.pipeline.config.echo()?,
            inputs: std::mem::take(&mut self.inputs),
            outputs: std::mem::take(&mut self.outputs),
            seeds: std::mem::take(&mut self.seeds),
            summary,
            timings_ms,
        };
        let path = self.dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        log::info!("stage {}: done", self.stage);
        Ok(manifest)
    }
}

/// Parsed and reconciled annotation corpus.
struct Corpus {
    hp: Ontology,
    go: Ontology,
    gene_hp: AnnotationMap,
    disease_hp: AnnotationMap,
    gene_go: AnnotationMap,
    summary: serde_json::Value,
}

fn with_file<T>(result: Result<T>, path: &Path) -> Result<T> {
    result.map_err(|e| e.context(path.display().to_string()))
}

fn kg_file(variant: KgVariant) -> String {
    format!("{variant}.tsv")
}

fn embed_cell(variant: KgVariant, method: EmbedMethod) -> String {
    format!("{variant}__{method}")
}

/// One train/evaluate cell of the result grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GridCell {
    pub variant: KgVariant,
    pub method: EmbedMethod,
    /// `None` for cosine cells, which use the raw vectors.
    pub operator: Option<PairOperator>,
    pub learner: Learner,
}

impl GridCell {
    pub fn name(&self) -> String {
        match self.operator {
            Some(op) => format!("{}__{}__{op}__{}", self.variant, self.method, self.learner),
            None => format!("{}__{}__{}", self.variant, self.method, self.learner),
        }
    }

    fn features_file(&self) -> String {
        match self.operator {
            Some(op) => format!("{}__{op}.tsv", embed_cell(self.variant, self.method)),
            None => format!("{}__cosine.tsv", embed_cell(self.variant, self.method)),
        }
    }
}

/// Runs stages of one configuration into one output directory.
pub struct Pipeline {
    config: PipelineConfig,
    out: PathBuf,
    deterministic: bool,
}

impl Pipeline {
    /// `out` overrides the configured output directory.
    pub fn new(config: PipelineConfig, out: Option<PathBuf>, deterministic: bool) -> Self {
        let out = out.unwrap_or_else(|| config.resolve(&config.output_dir));
        Pipeline {
            config,
            out,
            deterministic,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn output_dir(&self) -> &Path {
        &self.out
    }

    /// Every cell the configuration requests, in name order.
    pub fn grid_cells(&self) -> Vec<GridCell> {
        let c = &self.config;
        let mut cells = Vec::new();
        for &variant in &c.kg_variants {
            for &method in &c.embedding.methods {
                for &learner in &c.learners {
                    match learner {
                        Learner::Cosine => cells.push(GridCell {
                            variant,
                            method,
                            operator: None,
                            learner,
                        }),
                        Learner::Classifier(_) => cells.extend(c.operators.iter().map(|&op| GridCell {
                            variant,
                            method,
                            operator: Some(op),
                            learner,
                        })),
                    }
                }
            }
        }
        cells.sort_by_key(GridCell::name);
        cells.dedup();
        cells
    }

    pub fn run(&self, stage: Stage) -> Result<RunManifest> {
        match stage {
            Stage::Ingest => self.ingest(),
            Stage::BuildKg => self.build_kg(),
            Stage::Baseline => self.baseline(),
            Stage::Embed => self.embed(),
            Stage::Pair => self.pair(),
            Stage::Train => self.train(),
            Stage::Evaluate => self.evaluate(),
            Stage::Report => self.report(),
        }
    }

    pub fn run_all(&self) -> Result<Vec<RunManifest>> {
        Stage::ALL.iter().map(|&s| self.run(s)).collect()
    }

    fn load_corpus(&self, run: &mut StageRun<'_>) -> Result<Corpus> {
        let files = &self.config.inputs;
        let obo = |run: &mut StageRun<'_>, role: &str, path: &Path| -> Result<Ontology> {
            let text = run.read_input(role, path)?;
            with_file(parse_obo(&text), path)
        };
        let hp = obo(run, "hp_ontology", &files.hp_ontology)?;
        let go = obo(run, "go_ontology", &files.go_ontology)?;
        let mapping = |run: &mut StageRun<'_>, role: &str, path: &Path| -> Result<_> {
            let text = run.read_input(role, path)?;
            Ok(with_file(parse_mapping(&text), path)?.value)
        };
        let gaf_map = mapping(run, "gaf_mapping", &files.gaf_mapping)?;
        let disease_map = mapping(run, "disease_mapping", &files.disease_mapping)?;
        let evidence = if self.config.excluded_evidence.is_empty() {
            EvidenceFilter::AcceptAll
        } else {
            EvidenceFilter::Exclude(self.config.excluded_evidence.clone())
        };
        let annotations = |run: &mut StageRun<'_>,
                           role: &str,
                           path: &Path,
                           f: &dyn Fn(&str) -> Result<Parsed<AnnotationMap>>| {
            let text = run.read_input(role, path)?;
            with_file(f(&text), path)
        };
        let gene_go = annotations(run, "gaf", &files.gaf, &|t| parse_gaf(t, &gaf_map, &evidence))?;
        let gene_hp = annotations(run, "gene_phenotype", &files.gene_phenotype, &parse_gene_phenotype)?;
        let disease_hp = annotations(run, "disease_phenotype", &files.disease_phenotype, &|t| {
            parse_disease_phenotype(t, &disease_map)
        })?;
        let (gene_go_r, go_rec) = gene_go.value.reconcile(&[&go]);
        let (gene_hp_r, ghp_rec) = gene_hp.value.reconcile(&[&hp]);
        let (disease_hp_r, dhp_rec) = disease_hp.value.reconcile(&[&hp]);
        let summary = serde_json::json!({
            "hp_terms": hp.len(),
            "go_terms": go.len(),
            "hp_ontology": hp.report(),
            "go_ontology": go.report(),
            "hp_logical_definitions_to_go": hp.count_logical_definitions("GO"),
            "gaf": gene_go.report,
            "gene_phenotype": gene_hp.report,
            "disease_phenotype": disease_hp.report,
            "reconcile": {
                "gene_go": go_rec,
                "gene_hp": ghp_rec,
                "disease_hp": dhp_rec,
            },
        });
        Ok(Corpus {
            hp,
            go,
            gene_hp: gene_hp_r,
            disease_hp: disease_hp_r,
            gene_go: gene_go_r,
            summary,
        })
    }

    /// Parse inputs, filter associations, sample negatives and split. An
    /// existing `ingest/dataset.tsv` is reused, never resampled.
    pub fn ingest(&self) -> Result<RunManifest> {
        let mut run = StageRun::start(self, Stage::Ingest, &[DATASET])?;
        let corpus = self.load_corpus(&mut run)?;
        let files = &self.config.inputs;
        let text = run.read_input("associations", &files.associations)?;
        let assocs = with_file(parse_associations(&text), &files.associations)?;
        let kept = filter_associations(
            &assocs.value,
            &self.config.excluded_sources,
            &corpus.gene_go,
            &corpus.gene_hp,
            &corpus.disease_hp,
        );
        let positives: Vec<(EntityId, EntityId)> = kept.iter().map(|a| (a.gene.clone(), a.disease.clone())).collect();
        let mut positives_tsv = String::from("gene\tdisease\tsources\n");
        for a in &kept {
            let sources: Vec<&str> = a.sources.iter().map(String::as_str).collect();
            let _ = writeln!(positives_tsv, "{}\t{}\t{}", a.gene.id(), a.disease.id(), sources.join(";"));
        }

        let existing = self.out.join(Stage::Ingest.as_str()).join(DATASET);
        let reused = existing.is_file();
        let dataset = if reused {
            let text = std::fs::read_to_string(&existing).map_err(|e| Error::io(&existing, e))?;
            let ds = with_file(AssociationDataset::from_tsv(&text), &existing)?;
            if ds.split.is_none() {
                return Err(Error::MissingSplit.context(existing.display().to_string()));
            }
            log::warn!("reusing persisted dataset {}; delete it to resample", existing.display());
            ds
        } else {
            let sampled = sample_negatives(&positives, self.config.seeds.sampling)?;
            stratified_split(&sampled, self.config.train_fraction, self.config.seeds.split)?
        };
        run.seeds.insert("sampling".into(), self.config.seeds.sampling);
        run.seeds.insert("split".into(), self.config.seeds.split);
        run.write("positives.tsv", &positives_tsv)?;
        run.write(DATASET, &dataset.to_tsv())?;

        let genes: BTreeSet<&EntityId> = positives.iter().map(|(g, _)| g).collect();
        let diseases: BTreeSet<&EntityId> = positives.iter().map(|(_, d)| d).collect();
        let count = |part: Partition, label: Label| {
            dataset.split.as_ref().map_or(0, |s| {
                s.iter()
                    .zip(&dataset.pairs)
                    .filter(|(p, pair)| **p == part && pair.label == label)
                    .count()
            })
        };
        let summary = serde_json::json!({
            "curated_pairs": assocs.value.len(),
            "associations": assocs.report,
            "genes": genes.len(),
            "diseases": diseases.len(),
            "positive_pairs": dataset.count(Label::Positive),
            "negative_pairs": dataset.count(Label::Negative),
            "train_positive": count(Partition::Train, Label::Positive),
            "train_negative": count(Partition::Train, Label::Negative),
            "test_positive": count(Partition::Test, Label::Positive),
            "test_negative": count(Partition::Test, Label::Negative),
            "dataset_reused": reused,
            "corpus": corpus.summary,
        });
        run.finish(summary)
    }

    /// Build every configured KG variant plus `HP`.
    pub fn build_kg(&self) -> Result<RunManifest> {
        let mut run = StageRun::start(self, Stage::BuildKg, &[])?;
        let corpus = self.load_corpus(&mut run)?;
        let mut reports = BTreeMap::new();
        for variant in self.config.built_variants() {
            let inputs = KgInputs {
                hp: &corpus.hp,
                go: variant.uses_go().then_some(&corpus.go),
                gene_hp: &corpus.gene_hp,
                disease_hp: &corpus.disease_hp,
                gene_go: variant.uses_go().then_some(&corpus.gene_go),
            };
            let (kg, report) = build_kg(variant, inputs)?;
            run.write(&kg_file(variant), &kg.to_tsv())?;
            reports.insert(variant.as_str().to_string(), report);
        }
        run.finish(serde_json::json!({ "graphs": reports, "corpus": corpus.summary }))
    }

    fn load_dataset(run: &mut StageRun<'_>) -> Result<AssociationDataset> {
        let text = run.read_artifact(Stage::Ingest, DATASET)?;
        AssociationDataset::from_tsv(&text)
    }

    fn load_kg(run: &mut StageRun<'_>, variant: KgVariant) -> Result<KnowledgeGraph> {
        let text = run.read_artifact(Stage::BuildKg, &kg_file(variant))?;
        KnowledgeGraph::from_tsv(variant, &text)
    }

    /// Six-measure similarity table on the `HP` graph.
    pub fn baseline(&self) -> Result<RunManifest> {
        let mut run = StageRun::start(self, Stage::Baseline, &[])?;
        let dataset = Self::load_dataset(&mut run)?;
        let kg = Self::load_kg(&mut run, KgVariant::Hp)?;
        let annotations: AnnotationMap = kg
            .triples()
            .iter()
            .filter(|t| t.relation == Relation::HasAnnotation)
            .filter_map(|t| Some((t.subject.as_entity()?.clone(), t.object.as_term()?.clone())))
            .collect();
        let scorer = BaselineScorer::new(&kg, &annotations)?;
        let mut table = String::from("measure\twaf\tauc\tthreshold\tevaluated_rows\n");
        let mut results = Vec::new();
        for &measure in &self.config.baseline_measures {
            let scored = scorer.score(&dataset, measure)?;
            let scores: Vec<f64> = scored.rows.iter().map(|r| r.normalized_score).collect();
            let name = measure.name();
            let configuration = BTreeMap::from([
                ("measure".to_string(), name.clone()),
                ("kg_variant".to_string(), KgVariant::Hp.to_string()),
            ]);
            let report = evaluate_run(
                &name,
                RunInput::Scores {
                    dataset_rows: &scored.dataset_rows,
                    scores: &scores,
                },
                &dataset,
                configuration,
                None,
            )?;
            run.write(&format!("{name}.scores.tsv"), &scored.to_tsv())?;
            run.write(&format!("{name}.json"), &report.to_json()?)?;
            run.write(&format!("{name}.roc.tsv"), &report.roc_tsv())?;
            let _ = writeln!(
                table,
                "{name}\t{}\t{}\t{}\t{}",
                report.waf,
                report.auc,
                report.threshold.unwrap_or(f64::NAN),
                report.evaluated_rows
            );
            results.push(serde_json::json!({
                "measure": name,
                "waf": report.waf,
                "auc": report.auc,
                "threshold": report.threshold,
                "excluded_entities": scored.excluded_entities.len(),
            }));
        }
        run.write("baseline.tsv", &table)?;
        run.finish(serde_json::json!({ "measures": results }))
    }

    /// Train one embedding table per (variant, method), in parallel.
    pub fn embed(&self) -> Result<RunManifest> {
        let mut run = StageRun::start(self, Stage::Embed, &[])?;
        let mut graphs = BTreeMap::new();
        for &variant in &self.config.kg_variants {
            graphs.insert(variant, Self::load_kg(&mut run, variant)?);
        }
        let lexical = self.config.embedding.methods.contains(&EmbedMethod::WalkLexical);
        let lexicon = if lexical {
            let files = &self.config.inputs;
            let hp = run.read_input("hp_ontology", &files.hp_ontology)?;
            let go = run.read_input("go_ontology", &files.go_ontology)?;
            Some((
                with_file(parse_obo(&hp), &files.hp_ontology)?,
                with_file(parse_obo(&go), &files.go_ontology)?,
            ))
        } else {
            None
        };
        let mut cells = Vec::new();
        for &variant in &self.config.kg_variants {
            for &method in &self.config.embedding.methods {
                let name = embed_cell(variant, method);
                let seed = derive_seed(self.config.seeds.embedding, &name);
                run.seeds.insert(name.clone(), seed);
                cells.push((variant, method, name, seed));
            }
        }
        let tables: Vec<(String, EmbeddingTable)> = cells
            .par_iter()
            .map(|(variant, method, name, seed)| {
                let config = KgeTrainConfig {
                    seed: *seed,
                    ..self.config.embedding.training.clone()
                };
                let ontologies: Vec<&Ontology> = match &lexicon {
                    Some((hp, go)) if variant.uses_go() => vec![hp, go],
                    Some((hp, _)) => vec![hp],
                    None => Vec::new(),
                };
                log::info!("embedding {name}");
                let table = embed(&graphs[variant], *method, &config, &ontologies)
                    .map_err(|e| e.context(format!("embedding {name}")))?;
                Ok((name.clone(), table))
            })
            .collect::<Result<_>>()?;
        let mut summary = BTreeMap::new();
        for (name, table) in &tables {
            run.write(&format!("{name}.emb"), &table.export())?;
            summary.insert(name.clone(), serde_json::json!({ "vectors": table.len(), "dimension": table.dimension }));
        }
        run.finish(serde_json::json!({ "tables": summary }))
    }

    fn load_table(run: &mut StageRun<'_>, variant: KgVariant, method: EmbedMethod) -> Result<EmbeddingTable> {
        let text = run.read_artifact(Stage::Embed, &format!("{}.emb", embed_cell(variant, method)))?;
        EmbeddingTable::import(method, 0, &text)
    }

    /// Pair features per (variant, method, operator) plus cosine scores.
    pub fn pair(&self) -> Result<RunManifest> {
        let mut run = StageRun::start(self, Stage::Pair, &[])?;
        let dataset = Self::load_dataset(&mut run)?;
        let mut summary = BTreeMap::new();
        let classifiers = self.config.classifiers().next().is_some();
        for &variant in &self.config.kg_variants {
            for &method in &self.config.embedding.methods {
                let table = Self::load_table(&mut run, variant, method)?;
                let base = embed_cell(variant, method);
                if classifiers {
                    for &op in &self.config.operators {
                        let features = PairFeatures::build(&dataset, &table, op)?;
                        run.write(&format!("{base}__{op}.tsv"), &features.to_tsv())?;
                        summary.insert(format!("{base}__{op}"), features.dimension());
                    }
                }
                if self.config.uses_cosine() {
                    let scores = cosine_scores(&dataset, &table)?;
                    let mut tsv = String::from("gene\tdisease\tscore\n");
                    for (p, s) in dataset.pairs.iter().zip(&scores) {
                        let _ = writeln!(tsv, "{}\t{}\t{s}", p.gene, p.disease);
                    }
                    run.write(&format!("{base}__cosine.tsv"), &tsv)?;
                    summary.insert(format!("{base}__cosine"), 1);
                }
            }
        }
        run.finish(serde_json::json!({ "feature_dimensions": summary }))
    }

    fn load_features(run: &mut StageRun<'_>, cell: &GridCell) -> Result<PairFeatures> {
        let text = run.read_artifact(Stage::Pair, &cell.features_file())?;
        let op = cell.operator.expect("classifier cells carry an operator");
        PairFeatures::from_tsv(op, cell.method, &text)
    }

    /// Grid-search every classifier cell on the training partition.
    pub fn train(&self) -> Result<RunManifest> {
        let mut run = StageRun::start(self, Stage::Train, &[])?;
        let dataset = Self::load_dataset(&mut run)?;
        let train_rows = dataset.partition_rows(Partition::Train)?;
        let labels: Vec<Label> = train_rows.iter().map(|&i| dataset.pairs[i].label).collect();
        let mut jobs = Vec::new();
        for cell in self.grid_cells() {
            let Learner::Classifier(kind) = cell.learner else { continue };
            let features = Self::load_features(&mut run, &cell)?;
            check_alignment(&features, &dataset)?;
            let name = cell.name();
            let seed = derive_seed(self.config.seeds.training, &name);
            run.seeds.insert(name.clone(), seed);
            jobs.push((name, features.select(&train_rows), self.config.grid(kind), seed));
        }
        let results: Vec<_> = jobs
            .par_iter()
            .map(|(name, x, grid, seed)| {
                log::info!("training {name}");
                grid_search(x, &labels, grid, *seed).map_err(|e| e.context(format!("training {name}")))
            })
            .collect::<Result<_>>()?;
        let mut summary = BTreeMap::new();
        for ((name, _, _, _), result) in jobs.iter().zip(&results) {
            run.write(&format!("{name}.model.json"), &result.model.save()?)?;
            summary.insert(
                name.clone(),
                serde_json::json!({ "best": result.best, "cv_waf": result.scores }),
            );
        }
        run.finish(serde_json::json!({ "cells": summary }))
    }

    /// Evaluate every grid cell on the test partition.
    pub fn evaluate(&self) -> Result<RunManifest> {
        let mut run = StageRun::start(self, Stage::Evaluate, &[])?;
        let dataset = Self::load_dataset(&mut run)?;
        let all_rows: Vec<usize> = (0..dataset.len()).collect();
        let mut reports = Vec::new();
        for cell in self.grid_cells() {
            let name = cell.name();
            let mut configuration = BTreeMap::from([
                ("kg_variant".to_string(), cell.variant.to_string()),
                ("method".to_string(), cell.method.to_string()),
                ("learner".to_string(), cell.learner.to_string()),
            ]);
            let report = match cell.learner {
                Learner::Classifier(_) => {
                    let features = Self::load_features(&mut run, &cell)?;
                    check_alignment(&features, &dataset)?;
                    let model = ClassifierModel::load(&run.read_artifact(Stage::Train, &format!("{name}.model.json"))?)?;
                    configuration.insert("operator".into(), features.operator.to_string());
                    configuration.insert("hyperparameters".into(), model.hyperparameters.describe());
                    let seed = Some(model.seed);
                    evaluate_run(
                        &name,
                        RunInput::Classifier {
                            model: &model,
                            features: &features,
                        },
                        &dataset,
                        configuration,
                        seed,
                    )?
                }
                Learner::Cosine => {
                    let scores = parse_scores(&run.read_artifact(Stage::Pair, &cell.features_file())?, &dataset)?;
                    evaluate_run(
                        &name,
                        RunInput::Scores {
                            dataset_rows: &all_rows,
                            scores: &scores,
                        },
                        &dataset,
                        configuration,
                        None,
                    )?
                }
            };
            run.write(&format!("{name}.json"), &report.to_json()?)?;
            run.write(&format!("{name}.roc.tsv"), &report.roc_tsv())?;
            reports.push(serde_json::json!({
                "cell": name,
                "waf": report.waf,
                "auc": report.auc,
                "threshold": report.threshold,
            }));
        }
        run.finish(serde_json::json!({ "cells": reports }))
    }

    /// Consolidated ranking. Without evaluation results only the baseline
    /// table is written.
    pub fn report(&self) -> Result<RunManifest> {
        let mut run = StageRun::start(self, Stage::Report, &[])?;
        let mut baselines = Vec::new();
        for &measure in &self.config.baseline_measures {
            let text = run.read_artifact(Stage::Baseline, &format!("{}.json", measure.name()))?;
            baselines.push(EvalReport::from_json(&text)?);
        }
        let evaluated = self.out.join(Stage::Evaluate.as_str()).join(MANIFEST).is_file();
        let mut cells = Vec::new();
        if evaluated {
            let manifest = run.upstream_manifest(Stage::Evaluate)?;
            for file in manifest.outputs.keys() {
                let Some(file) = file.strip_prefix("evaluate/").filter(|f| f.ends_with(".json")) else {
                    continue;
                };
                cells.push(EvalReport::from_json(&run.read_artifact(Stage::Evaluate, file)?)?);
            }
        }
        let document = render_report(&baselines, &cells);
        run.write("report.md", &document.markdown)?;
        run.write("ranking.tsv", &document.ranking_tsv)?;
        run.finish(serde_json::json!({
            "best_baseline": document.best_baseline,
            "best_cell": document.best_cell,
            "cells": cells.len(),
        }))
    }
}

fn check_alignment(features: &PairFeatures, dataset: &AssociationDataset) -> Result<()> {
    let aligned = features.pairs.len() == dataset.len()
        && features
            .pairs
            .iter()
            .zip(&dataset.pairs)
            .all(|((g, d), p)| *g == p.gene && *d == p.disease);
    if aligned {
        Ok(())
    } else {
        Err(Error::Precondition(
            "pair features do not match the persisted dataset; rerun the pair stage".into(),
        ))
    }
}

fn parse_scores(text: &str, dataset: &AssociationDataset) -> Result<Vec<f64>> {
    let rows: Vec<&str> = text.lines().skip(1).filter(|l| !l.trim().is_empty()).collect();
    if rows.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            found: rows.len(),
        });
    }
    rows.iter()
        .enumerate()
        .map(|(i, line)| {
            line.rsplit('\t').next().and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
                line: i + 2,
                message: format!("bad score row `{line}`"),
            })
        })
        .collect()
}

/// Rendered report plus headline values.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportDocument {
    pub markdown: String,
    /// `rank, name, mode, waf, auc, improvement` over baselines and cells.
    pub ranking_tsv: String,
    pub best_baseline: Option<(String, f64)>,
    pub best_cell: Option<(String, f64)>,
}

/// `(waf − best) / best`; undefined for a zero baseline.
pub fn relative_improvement(waf: f64, best_baseline: f64) -> Option<f64> {
    (best_baseline > 0.0).then(|| (waf - best_baseline) / best_baseline)
}

fn by_waf_then_name(a: &&EvalReport, b: &&EvalReport) -> std::cmp::Ordering {
    b.waf.total_cmp(&a.waf).then_with(|| a.name.cmp(&b.name))
}

fn fmt_improvement(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{:+.1}%", 100.0 * v))
}

/// Baseline table (measures as columns, best WAF starred) and, when grid
/// results exist, a ranking of every run by WAF then name.
pub fn render_report(baselines: &[EvalReport], cells: &[EvalReport]) -> ReportDocument {
    let best_baseline = baselines.iter().min_by(by_waf_then_name);
    let mut md = String::from("# Gene-disease association prediction\n\n## Semantic similarity baselines\n\n| |");
    for b in baselines {
        let _ = write!(md, " {} |", b.name);
    }
    md.push_str("\n|");
    md.push_str(&"---|".repeat(baselines.len() + 1));
    let mark = |b: &EvalReport| {
        if best_baseline.is_some_and(|best| best.name == b.name) {
            "*"
        } else {
            ""
        }
    };
    let mut row = |label: &str, f: &dyn Fn(&EvalReport) -> String| {
        let _ = write!(md, "\n| {label} |");
        for b in baselines {
            let _ = write!(md, " {} |", f(b));
        }
    };
    row("WAF", &|b| format!("{:.4}{}", b.waf, mark(b)));
    row("AUC", &|b| format!("{:.4}", b.auc));
    row("threshold", &|b| b.threshold.map_or("-".into(), |t| format!("{t:.2}")));
    md.push_str("\n\n* best baseline WAF\n");

    let best_waf = best_baseline.map(|b| b.waf);
    let mut ranking_tsv = String::from("rank\tname\tmode\twaf\tauc\timprovement\n");
    let mut all: Vec<&EvalReport> = baselines.iter().chain(cells).collect();
    all.sort_by(by_waf_then_name);
    for (i, r) in all.iter().enumerate() {
        let improvement = best_waf.and_then(|b| relative_improvement(r.waf, b));
        let mode = match r.mode {
            EvalMode::Classifier => "classifier",
            EvalMode::ScoreThreshold => "score_threshold",
        };
        let _ = writeln!(
            ranking_tsv,
            "{}\t{}\t{mode}\t{}\t{}\t{}",
            i + 1,
            r.name,
            r.waf,
            r.auc,
            improvement.map_or("NA".into(), |v| v.to_string())
        );
    }

    let best_cell = cells.iter().min_by(by_waf_then_name);
    if !cells.is_empty() {
        md.push_str("\n## Embedding experiments\n\nRanked by WAF, then name. Improvement is relative to the best baseline WAF.\n\n");
        md.push_str("| rank | run | KG | method | operator | learner | WAF | AUC | improvement |\n");
        md.push_str("|---|---|---|---|---|---|---|---|---|\n");
        let mut ranked: Vec<&EvalReport> = cells.iter().collect();
        ranked.sort_by(by_waf_then_name);
        let get = |r: &EvalReport, k: &str| r.configuration.get(k).cloned().unwrap_or_else(|| "-".into());
        for (i, r) in ranked.iter().enumerate() {
            let improvement = best_waf.and_then(|b| relative_improvement(r.waf, b));
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} | {:.4} | {:.4} | {} |",
                i + 1,
                r.name,
                get(r, "kg_variant"),
                get(r, "method"),
                get(r, "operator"),
                get(r, "learner"),
                r.waf,
                r.auc,
                fmt_improvement(improvement)
            );
        }
    }
    ReportDocument {
        markdown: md,
        ranking_tsv,
        best_baseline: best_baseline.map(|b| (b.name.clone(), b.waf)),
        best_cell: best_cell.map(|c| (c.name.clone(), c.waf)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(name: &str, waf: f64) -> EvalReport {
        EvalReport {
            name: name.into(),
            mode: EvalMode::Classifier,
            configuration: BTreeMap::new(),
            seed: None,
            evaluated_rows: 4,
            per_label: Vec::new(),
            waf,
            auc: 0.5,
            threshold: None,
            selection_waf: None,
            roc: Vec::new(),
        }
    }

    #[test]
    fn improvement_formula() {
        assert_eq!(relative_improvement(0.77, 0.7).map(|x| (x * 1e12).round() / 1e12), Some(0.1));
        assert_eq!(relative_improvement(0.5, 0.0), None);
    }

    #[test]
    fn baseline_only_report_has_one_section() {
        let doc = render_report(&[report("BMA_ICSeco", 0.6), report("MAX_ICSeco", 0.7)], &[]);
        assert!(doc.markdown.contains("## Semantic similarity baselines"));
        assert!(!doc.markdown.contains("## Embedding experiments"));
        assert!(doc.markdown.contains("0.7000*"));
        assert_eq!(doc.best_baseline, Some(("MAX_ICSeco".into(), 0.7)));
        assert_eq!(doc.best_cell, None);
    }

    #[test]
    fn ranking_is_waf_then_name() {
        let cells = [report("b", 0.8), report("a", 0.8), report("c", 0.9)];
        let doc = render_report(&[report("base", 0.5)], &cells);
        let names: Vec<&str> = doc
            .ranking_tsv
            .lines()
            .skip(1)
            .map(|l| l.split('\t').nth(1).unwrap())
            .collect();
        assert_eq!(names, ["c", "a", "b", "base"]);
        let c = doc.ranking_tsv.lines().nth(1).unwrap();
        assert!(c.ends_with(&(0.4f64 / 0.5).to_string()));
        assert!(doc.markdown.contains("+80.0%"));
    }

    #[test]
    fn derived_seeds_differ_per_cell() {
        assert_ne!(derive_seed(1, "a"), derive_seed(1, "b"));
        assert_eq!(derive_seed(1, "a"), derive_seed(1, "a"));
        assert_eq!(derive_seed(1, "a") ^ derive_seed(2, "a"), 3);
    }

    #[test]
    fn learner_names() {
        assert_eq!("cosine".parse::<Learner>().unwrap(), Learner::Cosine);
        assert_eq!("rf".parse::<Learner>().unwrap(), Learner::Classifier(ClassifierKind::RandomForest));
        assert_eq!(Learner::Classifier(ClassifierKind::Mlp).to_string(), "mlp");
        assert!("svm".parse::<Learner>().is_err());
    }

    #[test]
    fn config_defaults_and_unknown_fields() {
        let json = r#"{"inputs": {"hp_ontology": "a", "go_ontology": "b", "gaf": "c", "gaf_mapping": "d",
            "gene_phenotype": "e", "disease_phenotype": "f", "disease_mapping": "g", "associations": "h"},
            "seeds": {"sampling": 1, "split": 2, "embedding": 3, "training": 4}}"#;
        let c: PipelineConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.train_fraction, 0.7);
        assert_eq!(c.kg_variants, KgVariant::ALL);
        assert!(c.excluded_sources.contains("UNIPROT"));
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let bad = json.replacen("\"seeds\"", "\"bogus\": 1, \"seeds\"", 1);
        assert!(serde_json::from_str::<PipelineConfig>(&bad).is_err());
        let unseeded = json.split(",\n            \"seeds\"").next().unwrap().to_string() + "}";
        assert!(serde_json::from_str::<PipelineConfig>(&unseeded).is_err());
    }
}
