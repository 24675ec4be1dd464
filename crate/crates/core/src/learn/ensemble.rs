//! Random forest, extremely randomized trees, and SAMME AdaBoost.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{normalize, Tree, TreeParams};
use crate::rng::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl Forest {
    /// Trees are grown in parallel; tree `t` draws from its own stream
    /// derived from `seed`, so the result does not depend on thread count.
    pub fn fit(x: &[&[f64]], y: &[bool], params: &ForestParams, seed: u64) -> Forest {
        let n = x.len();
        let trees = (0..params.n_estimators)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_for(seed, "tree", t as u64);
                let mut w = vec![0.0; n];
                if params.bootstrap {
                    for _ in 0..n {
                        w[rng.gen_range(0..n)] += 1.0;
                    }
                } else {
                    w.fill(1.0);
                }
                Tree::fit(x, y, &w, &params.tree, &mut rng)
            })
            .collect();
        Forest { trees }
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_proba(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn importances(&self, n_features: usize) -> Vec<f64> {
        let mut imp = vec![0.0; n_features];
        for t in &self.trees {
            for (a, b) in imp.iter_mut().zip(t.importances(n_features)) {
                *a += b;
            }
        }
        normalize(&mut imp);
        imp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub trees: Vec<Tree>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub tree: TreeParams,
}

impl AdaBoost {
    /// Two-class SAMME: each round fits a weighted tree, gives it weight
    /// `lr · ln((1 − err)/err)` and up-weights its mistakes.
    pub fn fit(x: &[&[f64]], y: &[bool], params: &AdaBoostParams, seed: u64) -> AdaBoost {
        let n = x.len();
        let mut w = vec![1.0 / n as f64; n];
        let mut model = AdaBoost {
            trees: Vec::new(),
            weights: Vec::new(),
        };
        for round in 0..params.n_estimators {
            let mut rng = rng_for(seed, "boost", round as u64);
            let tree = Tree::fit(x, y, &w, &params.tree, &mut rng);
            let miss: Vec<bool> = x
                .iter()
                .zip(y)
                .map(|(r, &l)| (tree.predict_proba(r) >= 0.5) != l)
                .collect();
            let total: f64 = w.iter().sum();
            let err: f64 = w.iter().zip(&miss).filter(|(_, m)| **m).map(|(w, _)| w).sum::<f64>() / total;
            if err <= 0.0 {
                model.trees.push(tree);
                model.weights.push(1.0);
                break;
            }
            if err >= 0.5 {
                if model.trees.is_empty() {
                    model.trees.push(tree);
                    model.weights.push(1.0);
                }
                break;
            }
            let alpha = params.learning_rate * ((1.0 - err) / err).ln();
            for (wi, &m) in w.iter_mut().zip(&miss) {
                if m {
                    *wi *= alpha.exp();
                }
            }
            let total: f64 = w.iter().sum();
            for wi in w.iter_mut() {
                *wi /= total;
            }
            model.trees.push(tree);
            model.weights.push(alpha);
        }
        model
    }

    /// Weighted vote mapped from [-1, 1] to [0, 1].
    pub fn score(&self, row: &[f64]) -> f64 {
        let total: f64 = self.weights.iter().sum();
        if total <= 0.0 {
            return 0.5;
        }
        let d: f64 = self
            .trees
            .iter()
            .zip(&self.weights)
            .map(|(t, a)| a * if t.predict_proba(row) >= 0.5 { 1.0 } else { -1.0 })
            .sum::<f64>()
            / total;
        (d + 1.0) / 2.0
    }

    pub fn importances(&self, n_features: usize) -> Vec<f64> {
        let mut imp = vec![0.0; n_features];
        for (t, a) in self.trees.iter().zip(&self.weights) {
            for (x, v) in imp.iter_mut().zip(t.importances(n_features)) {
                *x += a * v;
            }
        }
        normalize(&mut imp);
        imp
    }
}
