//! Seeded random hyperparameter search with stratified k-fold CV.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train_classifier_with, Algorithm, AlgorithmSpec, HyperValue, Hyperparams, ModelArtifact, ScalerKind};
use crate::dataset::{stratified_kfold_indices, Dataset};
use crate::error::{Error, Result};
use crate::eval::balanced_accuracy;
use crate::rng::{derive_seed, rng_for};
use crate::sampling::SamplerSpec;

/// Candidate values per hyperparameter name. The key `scaler` selects the
/// feature scaler of the linear model.
pub type ParamGrid = BTreeMap<String, Vec<HyperValue>>;

/// The AdaBoost learning-rate grid.
pub const ADABOOST_LEARNING_RATES: [f64; 5] = [1.0, 0.1, 0.01, 0.001, 0.0001];

fn ints(v: &[i64]) -> Vec<HyperValue> {
    v.iter().map(|i| HyperValue::Int(*i)).collect()
}

fn floats(v: &[f64]) -> Vec<HyperValue> {
    v.iter().map(|x| HyperValue::Float(*x)).collect()
}

fn texts(v: &[&str]) -> Vec<HyperValue> {
    v.iter().map(|s| HyperValue::Text(s.to_string())).collect()
}

fn depths() -> Vec<HyperValue> {
    let mut d = texts(&["none"]);
    d.extend(ints(&[5, 10, 20, 50]));
    d
}

pub fn default_grid(algorithm: Algorithm) -> ParamGrid {
    let mut g = ParamGrid::new();
    match algorithm {
        Algorithm::LogisticRegression => {
            g.insert("C".into(), floats(&[0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]));
            g.insert(
                "scaler".into(),
                texts(&ScalerKind::ALL.map(|s| s.as_str())),
            );
        }
        Algorithm::DecisionTree => {
            g.insert("criterion".into(), texts(&["gini", "entropy"]));
            g.insert("max_depth".into(), depths());
            g.insert("min_samples_leaf".into(), ints(&[1, 5, 10, 50]));
            g.insert("min_samples_split".into(), ints(&[2, 5, 10]));
            g.insert("max_features".into(), texts(&["all", "sqrt", "log2"]));
        }
        Algorithm::RandomForest | Algorithm::ExtraTrees => {
            g.insert("n_estimators".into(), ints(&[50, 100, 200, 500]));
            g.insert("criterion".into(), texts(&["gini", "entropy"]));
            g.insert("max_depth".into(), depths());
            g.insert("min_samples_leaf".into(), ints(&[1, 5, 10, 50]));
            g.insert("max_features".into(), texts(&["sqrt", "log2"]));
        }
        Algorithm::Adaboost => {
            g.insert("n_estimators".into(), ints(&[50, 100, 200, 500]));
            g.insert("learning_rate".into(), floats(&ADABOOST_LEARNING_RATES));
            g.insert("max_depth".into(), ints(&[1, 2, 3]));
        }
    }
    g
}

/// Search grids for every algorithm; entries override the defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchSpace {
    pub grids: BTreeMap<Algorithm, ParamGrid>,
}

impl SearchSpace {
    pub fn grid(&self, algorithm: Algorithm) -> ParamGrid {
        let mut g = default_grid(algorithm);
        if let Some(over) = self.grids.get(&algorithm) {
            for (k, v) in over {
                g.insert(k.clone(), v.clone());
            }
        }
        g
    }

    pub fn validate(&self) -> Result<()> {
        for (alg, grid) in &self.grids {
            for (k, v) in grid {
                if v.is_empty() {
                    return Err(Error::config(format!("{alg}.{k}: empty candidate list")));
                }
            }
            if *alg == Algorithm::Adaboost {
                if let Some(rates) = grid.get("learning_rate") {
                    for r in rates {
                        let ok = matches!(r, HyperValue::Float(x) if ADABOOST_LEARNING_RATES.contains(x))
                            || matches!(r, HyperValue::Int(1));
                        if !ok {
                            return Err(Error::config(format!(
                                "adaboost.learning_rate must be drawn from 10^0..10^-4, got {r}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub n_trials: usize,
    pub k_folds: usize,
    pub sampler: SamplerSpec,
    pub seed: u64,
    pub space: SearchSpace,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            n_trials: 10,
            k_folds: 5,
            sampler: SamplerSpec::default(),
            seed: 0,
            space: SearchSpace::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub hyperparams: Hyperparams,
    pub scaler: ScalerKind,
    /// Balanced accuracy on each held-out fold.
    pub fold_scores: Vec<f64>,
    pub mean_score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: ModelArtifact,
    pub best_trial: usize,
    pub trials: Vec<TrialRecord>,
}

/// Draw one value per grid key, in key order, from the trial's own stream.
pub fn draw_spec(algorithm: Algorithm, grid: &ParamGrid, seed: u64, trial: usize) -> Result<AlgorithmSpec> {
    let mut rng = rng_for(seed, &format!("trial:{algorithm}"), trial as u64);
    let mut spec = AlgorithmSpec::new(algorithm, derive_seed(seed, &format!("model:{algorithm}"), trial as u64));
    for (key, values) in grid {
        let v = values[rng.gen_range(0..values.len())].clone();
        if key == "scaler" {
            match &v {
                HyperValue::Text(s) => spec.scaler = ScalerKind::parse(s)?,
                other => return Err(Error::config(format!("scaler: expected a name, got {other}"))),
            }
        } else {
            spec.hyperparams.insert(key.clone(), v);
        }
    }
    Ok(spec)
}

/// Random search over `config.n_trials` draws, each scored by mean
/// balanced accuracy over stratified folds of `train`. The sampler is
/// applied to the fitting folds only; the best draw is refit on the whole
/// (sampled) training set.
pub fn random_search(algorithm: Algorithm, train: &Dataset, config: &SearchConfig) -> Result<SearchResult> {
    if config.n_trials == 0 {
        return Err(Error::config("n_trials must be at least 1"));
    }
    config.space.validate()?;
    let grid = config.space.grid(algorithm);
    let specs: Vec<AlgorithmSpec> = (0..config.n_trials)
        .map(|t| draw_spec(algorithm, &grid, config.seed, t))
        .collect::<Result<_>>()?;

    let k = config.k_folds;
    let labels = train.labels();
    let folds = stratified_kfold_indices(&labels, k, derive_seed(config.seed, "cv", 0))?;

    // Sampled fitting sets are shared by all trials.
    let fit_sets: Vec<Result<Dataset>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let fit_idx: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect();
            let sampler = SamplerSpec {
                seed: derive_seed(config.seed, "cv-sampler", f as u64),
                ..config.sampler.clone()
            };
            let fit = sampler.apply(&train.subset(&fit_idx))?;
            let held_out: BTreeSet<_> = folds[f].iter().map(|&i| &train.rows()[i].id).collect();
            if fit.rows().iter().any(|r| held_out.contains(&r.id)) {
                return Err(Error::Internal("validation row reached a fitting set".into()));
            }
            Ok(fit)
        })
        .collect();
    let fit_sets: Vec<Dataset> = fit_sets.into_iter().collect::<Result<_>>()?;
    let held_out: Vec<Dataset> = folds.iter().map(|idx| train.subset(idx)).collect();

    let cells: Vec<Result<f64>> = (0..config.n_trials * k)
        .into_par_iter()
        .map(|cell| {
            let (t, f) = (cell / k, cell % k);
            let model = train_classifier_with(&specs[t], &fit_sets[f], &config.sampler)?;
            balanced_accuracy(&model.predict(&held_out[f])?, &held_out[f].labels())
        })
        .collect();

    let mut trials = Vec::with_capacity(config.n_trials);
    for (t, spec) in specs.iter().enumerate() {
        let mut scores = Vec::with_capacity(k);
        let mut error = None;
        for r in &cells[t * k..(t + 1) * k] {
            match r {
                Ok(s) => scores.push(*s),
                Err(e) => {
                    error.get_or_insert_with(|| e.to_string());
                }
            }
        }
        if let Some(e) = &error {
            log::warn!("{algorithm} trial {t} failed: {e}");
        }
        let mean = error.is_none().then(|| scores.iter().sum::<f64>() / k as f64);
        trials.push(TrialRecord {
            trial: t,
            hyperparams: spec.hyperparams.clone(),
            scaler: spec.scaler,
            fold_scores: scores,
            mean_score: mean,
            error,
        });
    }

    let best_trial = trials
        .iter()
        .filter_map(|t| t.mean_score.map(|m| (t.trial, m)))
        .fold(None, |best: Option<(usize, f64)>, (t, m)| match best {
            Some((_, bm)) if bm >= m => best,
            _ => Some((t, m)),
        })
        .map(|(t, _)| t)
        .ok_or_else(|| Error::Training(format!("all {} {algorithm} trials failed", config.n_trials)))?;

    let sampler = SamplerSpec {
        seed: derive_seed(config.seed, "final-sampler", 0),
        ..config.sampler.clone()
    };
    let full = sampler.apply(train)?;
    let best = train_classifier_with(&specs[best_trial], &full, &config.sampler)?;
    Ok(SearchResult {
        best,
        best_trial,
        trials,
    })
}
