//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

/// Per-label priors, feature means and variances; index 0 is the negative
/// label, 1 the positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

impl GaussianNb {
    /// Variances get `1e-9 × (largest feature variance)` added so constant
    /// features stay finite; an all-constant matrix uses 1e-9.
    pub fn fit(x: &[Vec<f64>], y: &[bool]) -> Self {
        let d = x[0].len();
        let n = x.len() as f64;
        let moments = |rows: &mut dyn Iterator<Item = &Vec<f64>>| {
            let rows: Vec<&Vec<f64>> = rows.collect();
            let m = rows.len() as f64;
            let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / m).collect();
            let var: Vec<f64> = (0..d)
                .map(|j| rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / m)
                .collect();
            (rows.len(), mean, var)
        };
        let (_, _, overall) = moments(&mut x.iter());
        let max_var = overall.iter().copied().fold(0.0, f64::max);
        let eps = if max_var > 0.0 { 1e-9 * max_var } else { 1e-9 };
        let (n0, m0, v0) = moments(&mut x.iter().zip(y).filter(|(_, &l)| !l).map(|(r, _)| r));
        let (n1, m1, v1) = moments(&mut x.iter().zip(y).filter(|(_, &l)| l).map(|(r, _)| r));
        let floor = |v: Vec<f64>| v.into_iter().map(|x| x + eps).collect();
        GaussianNb {
            priors: [n0 as f64 / n, n1 as f64 / n],
            means: [m0, m1],
            variances: [floor(v0), floor(v1)],
        }
    }

    fn log_joint(&self, c: usize, x: &[f64]) -> f64 {
        let mut lj = self.priors[c].ln();
        for ((xi, m), v) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
            lj -= 0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (xi - m).powi(2) / v);
        }
        lj
    }

    /// Normalized posterior of the positive label.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let diff = self.log_joint(0, x) - self.log_joint(1, x);
        if diff >= 0.0 {
            let e = (-diff).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + diff.exp())
        }
    }
}
