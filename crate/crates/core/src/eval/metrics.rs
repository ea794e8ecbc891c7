//! WAF, ROC AUC and the fixed-grid threshold sweep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Per-label precision/recall/F1 (negative first) and their support-weighted
/// F1 average.
pub fn classification_metrics(truth: &[Label], predicted: &[Label]) -> Result<(Vec<LabelMetrics>, f64)> {
    if truth.is_empty() {
        return Err(Error::InvalidInput("WAF of an empty prediction set".into()));
    }
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    let mut per_label = Vec::with_capacity(2);
    let mut weighted = 0.0;
    for label in [Label::Negative, Label::Positive] {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t == label, p == label) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                _ => {}
            }
        }
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let support = tp + fn_;
        weighted += f1 * support as f64;
        per_label.push(LabelMetrics {
            label,
            precision,
            recall,
            f1,
            support,
        });
    }
    Ok((per_label, weighted / truth.len() as f64))
}

/// Weighted average of per-label F-measures.
pub fn waf(truth: &[Label], predicted: &[Label]) -> Result<f64> {
    classification_metrics(truth, predicted).map(|(_, w)| w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub auc: f64,
    /// Starts at (0, 0) with threshold `max score + 1`, ends at (1, 1).
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("threshold\tfpr\ttpr\n");
        for p in &self.points {
            out.push_str(&format!("{}\t{}\t{}\n", p.threshold, p.fpr, p.tpr));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Vec<RocPoint>> {
        text.lines()
            .enumerate()
            .skip(1)
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                let v: Vec<f64> = l
                    .split('\t')
                    .map(|c| c.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Parse {
                        line: i + 1,
                        message: e.to_string(),
                    })?;
                match v.as_slice() {
                    [threshold, fpr, tpr] => Ok(RocPoint {
                        threshold: *threshold,
                        fpr: *fpr,
                        tpr: *tpr,
                    }),
                    _ => Err(Error::Parse {
                        line: i + 1,
                        message: "expected 3 columns".into(),
                    }),
                }
            })
            .collect()
    }
}

/// Area under the piecewise-linear ROC curve.
pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

/// ROC AUC by the rank statistic `(concordant + ties / 2) / (n_pos * n_neg)`,
/// plus the ROC points of the descending unique-threshold sweep.
pub fn roc_auc(truth: &[Label], scores: &[f64]) -> Result<RocCurve> {
    if truth.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("non-finite score".into()));
    }
    let n_pos = truth.iter().filter(|l| l.is_positive()).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc("both labels must be present".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    // Walk tie groups from the highest score down. Each positive in a group
    // beats every negative below it and ties with the negatives in it.
    let mut concordant = 0.0f64;
    let mut negatives_below = n_neg as f64;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut points = vec![RocPoint {
        threshold: scores[order[0]] + 1.0,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut gp, mut gn) = (0usize, 0usize);
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]].is_positive() {
                gp += 1;
            } else {
                gn += 1;
            }
            i += 1;
        }
        negatives_below -= gn as f64;
        concordant += gp as f64 * (negatives_below + 0.5 * gn as f64);
        tp += gp;
        fp += gn;
        points.push(RocPoint {
            threshold: s,
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
        });
    }
    Ok(RocCurve {
        auc: concordant / (n_pos as f64 * n_neg as f64),
        points,
    })
}

/// The 101 thresholds `0.00, 0.01, ..., 1.00`.
pub fn sweep_thresholds() -> impl Iterator<Item = f64> {
    (0..=100).map(|i| i as f64 / 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub best_threshold: f64,
    pub best_waf: f64,
    /// `(threshold, WAF)` for every evaluated threshold.
    pub curve: Vec<(f64, f64)>,
}

/// Evaluate WAF at every grid threshold (positive iff `score > t`) and keep
/// the maximum; ties go to the smallest threshold.
pub fn threshold_sweep(scores: &[f64], truth: &[Label]) -> Result<SweepResult> {
    let mut curve = Vec::with_capacity(101);
    let mut best: Option<(f64, f64)> = None;
    for t in sweep_thresholds() {
        let predicted: Vec<Label> = scores.iter().map(|&s| Label::from_bool(s > t)).collect();
        let w = waf(truth, &predicted)?;
        curve.push((t, w));
        if best.is_none_or(|(_, bw)| w > bw) {
            best = Some((t, w));
        }
    }
    let (best_threshold, best_waf) = best.expect("101 thresholds evaluated");
    Ok(SweepResult {
        best_threshold,
        best_waf,
        curve,
    })
}
