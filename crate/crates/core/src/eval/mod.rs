//! Dataset assembly, metrics and evaluation reports.

mod dataset;
mod metrics;

pub use dataset::{
    sample_negatives, stratified_split, train_count, AssociationDataset, LabeledPair, Partition,
};
pub use metrics::{
    classification_metrics, roc_auc, sweep_thresholds, threshold_sweep, trapezoid_area, waf,
    LabelMetrics, RocCurve, RocPoint, SweepResult,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::ClassifierModel;
use crate::pairing::PairFeatures;
use crate::types::Label;

/// Probability above which a classifier predicts a positive association.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Classifier,
    ScoreThreshold,
}

/// What [`evaluate_run`] scores.
pub enum RunInput<'a> {
    /// A fitted model plus features aligned with the dataset's pairs.
    Classifier {
        model: &'a ClassifierModel,
        features: &'a PairFeatures,
    },
    /// Scores in [0,1] for a subset of dataset rows.
    Scores {
        dataset_rows: &'a [usize],
        scores: &'a [f64],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub name: String,
    pub mode: EvalMode,
    pub configuration: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub evaluated_rows: usize,
    pub per_label: Vec<LabelMetrics>,
    pub waf: f64,
    pub auc: f64,
    /// Score threshold picked by the sweep (score mode only).
    pub threshold: Option<f64>,
    /// Best WAF over the full scored set during threshold selection.
    pub selection_waf: Option<f64>,
    pub roc: Vec<RocPoint>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn roc_tsv(&self) -> String {
        RocCurve {
            auc: self.auc,
            points: self.roc.clone(),
        }
        .to_tsv()
    }
}

/// Evaluate one experiment cell on the dataset's test partition.
///
/// Classifier mode thresholds probabilities at 0.5. Score mode selects the
/// sweep threshold on every scored pair, then reports WAF on the scored test
/// rows at that threshold; AUC always comes from the continuous outputs.
pub fn evaluate_run(
    name: &str,
    input: RunInput<'_>,
    dataset: &AssociationDataset,
    configuration: BTreeMap<String, String>,
    seed: Option<u64>,
) -> Result<EvalReport> {
    let test = dataset.partition_rows(Partition::Test)?;
    let (mode, test_rows, test_scores, threshold, selection_waf) = match input {
        RunInput::Classifier { model, features } => {
            if features.rows.len() != dataset.len() {
                return Err(Error::DimensionMismatch {
                    expected: dataset.len(),
                    found: features.rows.len(),
                });
            }
            let x: Vec<Vec<f64>> = test.iter().map(|&i| features.rows[i].clone()).collect();
            let proba = model.predict_proba(&x)?;
            (EvalMode::Classifier, test, proba, DECISION_THRESHOLD, None)
        }
        RunInput::Scores { dataset_rows, scores } => {
            if dataset_rows.len() != scores.len() {
                return Err(Error::DimensionMismatch {
                    expected: dataset_rows.len(),
                    found: scores.len(),
                });
            }
            let all_truth: Vec<Label> = dataset_rows.iter().map(|&i| dataset.pairs[i].label).collect();
            let sweep = threshold_sweep(scores, &all_truth)?;
            let by_row: BTreeMap<usize, f64> = dataset_rows.iter().copied().zip(scores.iter().copied()).collect();
            let (rows, s): (Vec<usize>, Vec<f64>) =
                test.iter().filter_map(|i| by_row.get(i).map(|s| (*i, *s))).unzip();
            (
                EvalMode::ScoreThreshold,
                rows,
                s,
                sweep.best_threshold,
                Some(sweep.best_waf),
            )
        }
    };
    let truth: Vec<Label> = test_rows.iter().map(|&i| dataset.pairs[i].label).collect();
    let predicted: Vec<Label> = test_scores.iter().map(|&p| Label::from_bool(p > threshold)).collect();
    let (per_label, waf) = classification_metrics(&truth, &predicted)?;
    let roc = roc_auc(&truth, &test_scores)?;
    Ok(EvalReport {
        name: name.to_string(),
        mode,
        configuration,
        seed,
        evaluated_rows: truth.len(),
        per_label,
        waf,
        auc: roc.auc,
        threshold: (mode == EvalMode::ScoreThreshold).then_some(threshold),
        selection_waf,
        roc: roc.points,
    })
}
