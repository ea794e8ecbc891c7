//! Bagged CART trees with Gini impurity.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Leaf {
        /// Fraction of positive training rows reaching the leaf.
        positive: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat binary tree; node 0 is the root. Rows with `x[feature] <= threshold`
/// go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { positive } => return positive,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, at: usize) -> usize {
            match t.nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    max_depth: Option<usize>,
    max_features: usize,
    nodes: Vec<TreeNode>,
    rng: ChaCha8Rng,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl Builder<'_> {
    fn leaf(&mut self, rows: &[usize]) -> usize {
        let pos = rows.iter().filter(|&&i| self.y[i]).count();
        self.nodes.push(TreeNode::Leaf {
            positive: pos as f64 / rows.len() as f64,
        });
        self.nodes.len() - 1
    }

    /// Best `(weighted child impurity, threshold)` for one feature.
    fn best_threshold(&self, rows: &mut [usize], feature: usize) -> Option<(f64, f64)> {
        let x = self.x;
        rows.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
        let n = rows.len();
        let total_pos = rows.iter().filter(|&&i| self.y[i]).count();
        let mut left_pos = 0;
        let mut best: Option<(f64, f64)> = None;
        for k in 1..n {
            left_pos += self.y[rows[k - 1]] as usize;
            let (a, b) = (x[rows[k - 1]][feature], x[rows[k]][feature]);
            if a == b {
                continue;
            }
            let impurity = (k as f64 * gini(left_pos, k) + (n - k) as f64 * gini(total_pos - left_pos, n - k)) / n as f64;
            if best.is_none_or(|(bi, _)| impurity < bi) {
                let mid = a + (b - a) / 2.0;
                best = Some((impurity, if mid < b { mid } else { a }));
            }
        }
        best
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let pos = rows.iter().filter(|&&i| self.y[i]).count();
        let pure = pos == 0 || pos == rows.len();
        if pure || rows.len() < 2 || self.max_depth.is_some_and(|m| depth >= m) {
            return self.leaf(rows);
        }
        let d = self.x[0].len();
        // a random permutation: the first max_features entries are the
        // sample; later ones are tried only while no valid split exists
        let order: Vec<usize> = index::sample(&mut self.rng, d, d).into_vec();
        let mut best: Option<(f64, usize, f64)> = None;
        for (k, &f) in order.iter().enumerate() {
            if k >= self.max_features && best.is_some() {
                break;
            }
            if let Some((imp, thr)) = self.best_threshold(rows, f) {
                if best.is_none_or(|(bi, _, _)| imp < bi) {
                    best = Some((imp, f, thr));
                }
            }
        }
        // like common CART implementations, a valid split is taken even
        // without an impurity decrease, so checkerboards remain learnable
        let Some((_, feature, threshold)) = best else {
            return self.leaf(rows);
        };
        let x = self.x;
        rows.sort_by_key(|&i| x[i][feature] > threshold);
        let split = rows.partition_point(|&i| x[i][feature] <= threshold);
        let me = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { positive: 0.0 });
        let (l, r) = rows.split_at_mut(split);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[me] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        me
    }
}

/// One tree on a bootstrap resample drawn with `seed`.
pub fn fit_tree(x: &[Vec<f64>], y: &[bool], max_depth: Option<usize>, seed: u64) -> DecisionTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let mut rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let d = x[0].len();
    let mut b = Builder {
        x,
        y,
        max_depth,
        max_features: ((d as f64).sqrt().floor() as usize).clamp(1, d),
        nodes: Vec::new(),
        rng,
    };
    b.grow(&mut rows, 0);
    DecisionTree { nodes: b.nodes }
}

impl RandomForest {
    /// Tree `i` uses seed `seed + i`; trees train in parallel.
    pub fn fit(x: &[Vec<f64>], y: &[bool], trees: usize, max_depth: Option<usize>, seed: u64) -> Self {
        let trees = (0..trees)
            .into_par_iter()
            .map(|i| fit_tree(x, y, max_depth, seed.wrapping_add(i as u64)))
            .collect();
        RandomForest { trees }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}
