//! Gene-disease association prediction over multi-ontology knowledge graphs.
//!
//! The crate is organised as a pipeline:
//!
//! * [`ontology_io`] parses OBO ontologies, GAF / phenotype annotation files and
//!   curated association tables.
//! * [`kg`] assembles the `HP`, `HP_GO` and `HP_GO_LD` knowledge graph variants.
//! * [`semsim`] computes information content and the six classical semantic
//!   similarity baselines.
//! * [`kge`] trains node embeddings (TransE, DistMult, random-walk and lexical
//!   corpora with skip-gram).
//! * [`pairing`] turns gene and disease vectors into pair features.
//! * [`learn`] holds the classifiers and grid search.
//! * [`eval`] builds the labelled dataset and computes WAF / ROC AUC.
//! * [`pipeline`] runs the staged experiment grid and persists artifacts.

pub mod error;
pub mod eval;
pub mod kg;
pub mod kge;
pub mod learn;
pub mod ontology_io;
pub mod pairing;
pub mod pipeline;
pub mod semsim;
pub mod synthetic;
pub mod types;

pub use error::{Error, Result};
pub use types::{EntityId, EntityKind, Label, TermId};
