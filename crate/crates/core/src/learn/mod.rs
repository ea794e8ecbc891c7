//! Classifiers over pair features and grid search by stratified k-fold WAF.

mod forest;
mod mlp;
mod nb;

pub use forest::{DecisionTree, RandomForest, TreeNode};
pub use mlp::{init_layers, mlp_gradient_check, mlp_loss_gradient, Layer, Mlp, MlpConfig};
pub use nb::GaussianNb;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::waf;
use crate::types::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    RandomForest,
    GaussianNb,
    Mlp,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::RandomForest, ClassifierKind::GaussianNb, ClassifierKind::Mlp];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::GaussianNb => "gaussian_nb",
            ClassifierKind::Mlp => "mlp",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random_forest" | "rf" => Ok(ClassifierKind::RandomForest),
            "gaussian_nb" | "nb" => Ok(ClassifierKind::GaussianNb),
            "mlp" => Ok(ClassifierKind::Mlp),
            _ => Err(Error::Config(format!("unknown classifier `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Hyperparameters {
    RandomForest {
        trees: usize,
        /// `None` grows trees until leaves are pure.
        max_depth: Option<usize>,
    },
    GaussianNb {},
    Mlp(MlpConfig),
}

impl Hyperparameters {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Hyperparameters::RandomForest { .. } => ClassifierKind::RandomForest,
            Hyperparameters::GaussianNb {} => ClassifierKind::GaussianNb,
            Hyperparameters::Mlp(_) => ClassifierKind::Mlp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Hyperparameters::RandomForest { trees, max_depth } => {
                if *trees == 0 || *max_depth == Some(0) {
                    return Err(Error::Config("forest needs trees > 0 and max_depth > 0".into()));
                }
            }
            Hyperparameters::GaussianNb {} => {}
            Hyperparameters::Mlp(c) => {
                if c.hidden.is_empty() || c.hidden.contains(&0) || c.epochs == 0 || c.batch_size == 0 {
                    return Err(Error::Config("mlp needs non-empty positive hidden sizes, epochs and batch size".into()));
                }
                let (lr_ok, l2_ok) = (c.learning_rate > 0.0, c.l2 >= 0.0);
                if !lr_ok || !(0.0..1.0).contains(&c.momentum) || !l2_ok {
                    return Err(Error::Config("mlp learning_rate, momentum or l2 out of range".into()));
                }
            }
        }
        Ok(())
    }

    /// Compact `key=value` description for reports.
    pub fn describe(&self) -> String {
        match self {
            Hyperparameters::RandomForest { trees, max_depth } => format!(
                "trees={trees},max_depth={}",
                max_depth.map_or("none".to_string(), |d| d.to_string())
            ),
            Hyperparameters::GaussianNb {} => "default".into(),
            Hyperparameters::Mlp(c) => format!(
                "hidden={:?},learning_rate={},epochs={}",
                c.hidden, c.learning_rate, c.epochs
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parameters {
    RandomForest(RandomForest),
    GaussianNb(GaussianNb),
    Mlp(Mlp),
}

/// A fitted classifier with the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
    pub feature_count: usize,
    pub parameters: Parameters,
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        self.hyperparameters.kind()
    }

    /// Positive-label probability for each row.
    pub fn predict_proba(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        if let Some(row) = x.iter().find(|r| r.len() != self.feature_count) {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                found: row.len(),
            });
        }
        let p = |row: &Vec<f64>| match &self.parameters {
            Parameters::RandomForest(f) => f.predict(row),
            Parameters::GaussianNb(nb) => nb.predict(row),
            Parameters::Mlp(m) => m.predict(row),
        };
        Ok(x.par_iter().map(p).collect())
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<Label>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| Label::from_bool(p > crate::eval::DECISION_THRESHOLD))
            .collect())
    }

    /// Self-describing JSON document; reloading reproduces predictions exactly.
    pub fn save(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn load(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_training_data(x: &[Vec<f64>], y: &[Label]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let Some(first) = x.first() else {
        return Err(Error::DegenerateTraining("no training rows".into()));
    };
    let d = first.len();
    if d == 0 {
        return Err(Error::InvalidInput("zero-width feature rows".into()));
    }
    if let Some(row) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: row.len(),
        });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("NaN or infinite feature value".into()));
    }
    let pos = y.iter().filter(|l| l.is_positive()).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::DegenerateTraining("both labels must be present".into()));
    }
    Ok(d)
}

/// Fit the classifier described by `hyperparameters`. Deterministic per seed.
pub fn fit(x: &[Vec<f64>], y: &[Label], hyperparameters: &Hyperparameters, seed: u64) -> Result<ClassifierModel> {
    hyperparameters.validate()?;
    let d = check_training_data(x, y)?;
    let yb: Vec<bool> = y.iter().map(|l| l.is_positive()).collect();
    let parameters = match hyperparameters {
        Hyperparameters::RandomForest { trees, max_depth } => {
            Parameters::RandomForest(RandomForest::fit(x, &yb, *trees, *max_depth, seed))
        }
        Hyperparameters::GaussianNb {} => Parameters::GaussianNb(GaussianNb::fit(x, &yb)),
        Hyperparameters::Mlp(config) => {
            let m = Mlp::fit(x, &yb, config, seed);
            if !m.is_finite() {
                return Err(Error::Divergence {
                    epoch: config.epochs,
                    learning_rate: config.learning_rate,
                });
            }
            Parameters::Mlp(m)
        }
    };
    Ok(ClassifierModel {
        hyperparameters: hyperparameters.clone(),
        seed,
        feature_count: d,
        parameters,
    })
}

/// Hyperparameter candidates in declared order plus the CV fold count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub candidates: Vec<Hyperparameters>,
    pub fold_count: usize,
}

impl GridSpec {
    pub fn new(candidates: Vec<Hyperparameters>, fold_count: usize) -> Result<Self> {
        let g = GridSpec { candidates, fold_count };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidates.is_empty() {
            return Err(Error::Config("grid has no candidates".into()));
        }
        if self.fold_count < 2 {
            return Err(Error::Config("fold_count must be at least 2".into()));
        }
        let kind = self.candidates[0].kind();
        if self.candidates.iter().any(|c| c.kind() != kind) {
            return Err(Error::Config("grid mixes classifier kinds".into()));
        }
        self.candidates.iter().try_for_each(Hyperparameters::validate)
    }

    /// Forest: trees {100, 200, 500} × max_depth {none, 10, 20}. MLP: hidden
    /// {(100), (200), (100, 50)} × learning_rate {0.01, 0.001}, 200 epochs.
    /// Naive Bayes has a single candidate. Five folds.
    pub fn default_for(kind: ClassifierKind) -> Self {
        let candidates = match kind {
            ClassifierKind::RandomForest => [100, 200, 500]
                .into_iter()
                .flat_map(|trees| {
                    [None, Some(10), Some(20)]
                        .into_iter()
                        .map(move |max_depth| Hyperparameters::RandomForest { trees, max_depth })
                })
                .collect(),
            ClassifierKind::GaussianNb => vec![Hyperparameters::GaussianNb {}],
            ClassifierKind::Mlp => [vec![100], vec![200], vec![100, 50]]
                .into_iter()
                .flat_map(|hidden| {
                    [0.01, 0.001].into_iter().map(move |learning_rate| {
                        Hyperparameters::Mlp(MlpConfig {
                            hidden: hidden.clone(),
                            learning_rate,
                            epochs: 200,
                            batch_size: 200,
                            momentum: 0.9,
                            l2: 1e-4,
                        })
                    })
                })
                .collect(),
        };
        GridSpec {
            candidates,
            fold_count: 5,
        }
    }
}

/// Validation folds: each label's rows are shuffled with `seed` and dealt
/// round-robin. Every fold must contain both labels.
pub fn stratified_folds(y: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for label in [Label::Negative, Label::Positive] {
        let mut rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == label).collect();
        rows.shuffle(&mut rng);
        for i in rows {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for (f, fold) in folds.iter_mut().enumerate() {
        fold.sort_unstable();
        let pos = fold.iter().filter(|&&i| y[i].is_positive()).count();
        if pos == 0 || pos == fold.len() {
            return Err(Error::FoldConstruction(format!("fold {f} holds a single label")));
        }
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: Hyperparameters,
    /// Mean validation WAF per candidate, in grid order.
    pub scores: Vec<f64>,
    pub model: ClassifierModel,
}

/// Score every candidate by mean k-fold WAF on the given (training) rows,
/// pick the best (ties go to the earlier candidate) and refit it on all rows.
pub fn grid_search(x: &[Vec<f64>], y: &[Label], grid: &GridSpec, seed: u64) -> Result<GridResult> {
    grid.validate()?;
    check_training_data(x, y)?;
    let folds = stratified_folds(y, grid.fold_count, seed)?;
    let jobs: Vec<(usize, usize)> = (0..grid.candidates.len())
        .flat_map(|c| (0..folds.len()).map(move |f| (c, f)))
        .collect();
    let fold_scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let mut in_val = vec![false; y.len()];
            folds[f].iter().for_each(|&i| in_val[i] = true);
            let (tx, ty): (Vec<Vec<f64>>, Vec<Label>) =
                (0..y.len()).filter(|&i| !in_val[i]).map(|i| (x[i].clone(), y[i])).unzip();
            let vx: Vec<Vec<f64>> = folds[f].iter().map(|&i| x[i].clone()).collect();
            let vy: Vec<Label> = folds[f].iter().map(|&i| y[i]).collect();
            let model = fit(&tx, &ty, &grid.candidates[c], seed)?;
            waf(&vy, &model.predict(&vx)?)
        })
        .collect::<Result<_>>()?;
    let scores: Vec<f64> = fold_scores
        .chunks(folds.len())
        .map(|s| s.iter().sum::<f64>() / s.len() as f64)
        .collect();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    let model = fit(x, y, &grid.candidates[best], seed)?;
    Ok(GridResult {
        best: grid.candidates[best].clone(),
        scores,
        model,
    })
}
