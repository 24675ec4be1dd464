//! Classifiers, hyperparameter search, and feature importance.

pub mod ensemble;
pub mod linear;
pub mod scaler;
pub mod search;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{schema, FEATURE_COUNT};
use crate::provenance::Provenance;
use crate::sampling::SamplerSpec;
use ensemble::{AdaBoost, AdaBoostParams, Forest, ForestParams};
use linear::{fit_logistic, Logistic, LogisticParams};
pub use scaler::{Scaler, ScalerKind};
pub use search::{random_search, SearchConfig, SearchResult, SearchSpace, TrialRecord};
use tree::{Criterion, MaxFeatures, Splitter, Tree, TreeParams};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    LogisticRegression,
    DecisionTree,
    RandomForest,
    ExtraTrees,
    Adaboost,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::LogisticRegression,
        Algorithm::DecisionTree,
        Algorithm::RandomForest,
        Algorithm::ExtraTrees,
        Algorithm::Adaboost,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::LogisticRegression => "logistic_regression",
            Algorithm::DecisionTree => "decision_tree",
            Algorithm::RandomForest => "random_forest",
            Algorithm::ExtraTrees => "extra_trees",
            Algorithm::Adaboost => "adaboost",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::LogisticRegression => "Logistic Regression",
            Algorithm::DecisionTree => "Decision Tree",
            Algorithm::RandomForest => "Random Forest",
            Algorithm::ExtraTrees => "Extra Trees",
            Algorithm::Adaboost => "AdaBoost",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A hyperparameter value as written in configs and artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for HyperValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperValue::Bool(b) => write!(f, "{b}"),
            HyperValue::Int(i) => write!(f, "{i}"),
            HyperValue::Float(x) => write!(f, "{x}"),
            HyperValue::Text(s) => f.write_str(s),
        }
    }
}

pub type Hyperparams = BTreeMap<String, HyperValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub algorithm: Algorithm,
    pub hyperparams: Hyperparams,
    pub scaler: ScalerKind,
    pub seed: u64,
}

impl AlgorithmSpec {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        AlgorithmSpec {
            algorithm,
            hyperparams: Hyperparams::new(),
            scaler: ScalerKind::None,
            seed,
        }
    }

    pub fn with(mut self, key: &str, value: HyperValue) -> Self {
        self.hyperparams.insert(key.to_string(), value);
        self
    }

    fn float(&self, key: &str, default: f64) -> Result<f64> {
        match self.hyperparams.get(key) {
            None => Ok(default),
            Some(HyperValue::Float(x)) => Ok(*x),
            Some(HyperValue::Int(i)) => Ok(*i as f64),
            Some(v) => Err(Error::config(format!("{key}: expected a number, got {v}"))),
        }
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        match self.hyperparams.get(key) {
            None => Ok(default),
            Some(HyperValue::Int(i)) if *i >= 0 => Ok(*i as usize),
            Some(v) => Err(Error::config(format!("{key}: expected a count, got {v}"))),
        }
    }

    fn optional_count(&self, key: &str, default: Option<usize>) -> Result<Option<usize>> {
        match self.hyperparams.get(key) {
            None => Ok(default),
            Some(HyperValue::Text(s)) if s == "none" => Ok(None),
            Some(HyperValue::Int(i)) if *i >= 1 => Ok(Some(*i as usize)),
            Some(v) => Err(Error::config(format!("{key}: expected a depth or \"none\", got {v}"))),
        }
    }

    fn boolean(&self, key: &str, default: bool) -> Result<bool> {
        match self.hyperparams.get(key) {
            None => Ok(default),
            Some(HyperValue::Bool(b)) => Ok(*b),
            Some(v) => Err(Error::config(format!("{key}: expected true/false, got {v}"))),
        }
    }

    fn text(&self, key: &str) -> Result<Option<&str>> {
        match self.hyperparams.get(key) {
            None => Ok(None),
            Some(HyperValue::Text(s)) => Ok(Some(s)),
            Some(v) => Err(Error::config(format!("{key}: expected a name, got {v}"))),
        }
    }

    fn tree_params(&self, default_max_features: MaxFeatures, splitter: Splitter) -> Result<TreeParams> {
        let criterion = match self.text("criterion")? {
            None | Some("gini") => Criterion::Gini,
            Some("entropy") => Criterion::Entropy,
            Some(o) => return Err(Error::config(format!("unknown criterion '{o}'"))),
        };
        let max_features = match self.text("max_features")? {
            None => default_max_features,
            Some("sqrt") => MaxFeatures::Sqrt,
            Some("log2") => MaxFeatures::Log2,
            Some("all") => MaxFeatures::All,
            Some(o) => return Err(Error::config(format!("unknown max_features '{o}'"))),
        };
        let default_depth = if self.algorithm == Algorithm::Adaboost {
            Some(1)
        } else {
            None
        };
        let p = TreeParams {
            criterion,
            max_depth: self.optional_count("max_depth", default_depth)?,
            min_samples_split: self.count("min_samples_split", 2)?,
            min_samples_leaf: self.count("min_samples_leaf", 1)?,
            max_features,
            splitter,
        };
        if p.min_samples_split < 2 || p.min_samples_leaf < 1 {
            return Err(Error::config(
                "min_samples_split must be ≥ 2 and min_samples_leaf ≥ 1",
            ));
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scaler != ScalerKind::None && self.algorithm != Algorithm::LogisticRegression {
            return Err(Error::config(format!(
                "scaler '{}' is only valid for logistic_regression",
                self.scaler.as_str()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Logistic { scaler: Scaler, model: Logistic },
    Tree { tree: Tree },
    Forest { forest: Forest },
    AdaBoost { boost: AdaBoost },
}

impl FittedModel {
    pub fn score(&self, row: &[f64]) -> f64 {
        match self {
            FittedModel::Logistic { scaler, model } => model.score(&scaler.transform(row)),
            FittedModel::Tree { tree } => tree.predict_proba(row),
            FittedModel::Forest { forest } => forest.score(row),
            FittedModel::AdaBoost { boost } => boost.score(row),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub provenance: Provenance,
    pub spec: AlgorithmSpec,
    pub sampler: SamplerSpec,
    pub model: FittedModel,
    pub feature_importances: Vec<f64>,
}

fn check_rows(train: &Dataset) -> Result<()> {
    if train.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let pos = train.positives();
    if pos == 0 || pos == train.len() {
        return Err(Error::Training(
            "training set contains a single class".into(),
        ));
    }
    for r in train.rows() {
        if r.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Training(format!("non-finite feature value in {}", r.id)));
        }
    }
    Ok(())
}

/// Fit one model on `train` (already sampled, if sampling is wanted).
pub fn train_classifier(spec: &AlgorithmSpec, train: &Dataset) -> Result<ModelArtifact> {
    train_classifier_with(spec, train, &SamplerSpec::default())
}

/// As [`train_classifier`], recording `sampler` in the artifact.
pub fn train_classifier_with(
    spec: &AlgorithmSpec,
    train: &Dataset,
    sampler: &SamplerSpec,
) -> Result<ModelArtifact> {
    spec.validate()?;
    check_rows(train)?;
    if train.schema_hash() != schema().hash {
        return Err(Error::SchemaMismatch {
            expected: schema().hash.clone(),
            found: train.schema_hash().to_string(),
        });
    }
    let x = train.features();
    let y = train.labels();
    let (model, importances) = fit_model(spec, &x, &y)?;
    Ok(ModelArtifact {
        format_version: MODEL_FORMAT_VERSION,
        provenance: train.provenance.clone(),
        spec: spec.clone(),
        sampler: sampler.clone(),
        model,
        feature_importances: importances,
    })
}

/// Fit on raw rows of any width; returns the model and its importances.
pub fn fit_model(spec: &AlgorithmSpec, x: &[&[f64]], y: &[bool]) -> Result<(FittedModel, Vec<f64>)> {
    spec.validate()?;
    let n_features = x.first().map(|r| r.len()).unwrap_or(0);
    let fitted = match spec.algorithm {
        Algorithm::LogisticRegression => {
            let scaler = Scaler::fit(spec.scaler, x);
            let scaled: Vec<Vec<f64>> = x.iter().map(|r| scaler.transform(r)).collect();
            let params = LogisticParams {
                c: spec.float("C", 1.0)?,
                max_iter: spec.count("max_iter", 10_000)?,
                ..Default::default()
            };
            let (model, _) = fit_logistic(&scaled, y, &params)?;
            let imp = model.coefficients.iter().map(|c| c.abs()).collect();
            (FittedModel::Logistic { scaler, model }, imp)
        }
        Algorithm::DecisionTree => {
            let params = spec.tree_params(MaxFeatures::All, Splitter::Best)?;
            let w = vec![1.0; x.len()];
            let mut rng = crate::rng::rng_for(spec.seed, "tree", 0);
            let tree = Tree::fit(x, y, &w, &params, &mut rng);
            let imp = tree.importances(n_features);
            (FittedModel::Tree { tree }, imp)
        }
        Algorithm::RandomForest | Algorithm::ExtraTrees => {
            let extra = spec.algorithm == Algorithm::ExtraTrees;
            let params = ForestParams {
                n_estimators: spec.count("n_estimators", 100)?.max(1),
                bootstrap: spec.boolean("bootstrap", !extra)?,
                tree: spec.tree_params(
                    MaxFeatures::Sqrt,
                    if extra { Splitter::Random } else { Splitter::Best },
                )?,
            };
            let forest = Forest::fit(x, y, &params, spec.seed);
            let imp = forest.importances(n_features);
            (FittedModel::Forest { forest }, imp)
        }
        Algorithm::Adaboost => {
            let params = AdaBoostParams {
                n_estimators: spec.count("n_estimators", 50)?.max(1),
                learning_rate: spec.float("learning_rate", 1.0)?,
                tree: spec.tree_params(MaxFeatures::All, Splitter::Best)?,
            };
            if !(params.learning_rate > 0.0) {
                return Err(Error::config("learning_rate must be positive"));
            }
            let boost = AdaBoost::fit(x, y, &params, spec.seed);
            let imp = boost.importances(n_features);
            (FittedModel::AdaBoost { boost }, imp)
        }
    };
    Ok(fitted)
}

impl ModelArtifact {
    fn check_schema(&self, expected: &str) -> Result<()> {
        if self.provenance.schema_hash != expected {
            return Err(Error::SchemaMismatch {
                expected: expected.to_string(),
                found: self.provenance.schema_hash.clone(),
            });
        }
        Ok(())
    }

    pub fn scores(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.check_schema(data.schema_hash())?;
        Ok(data.rows().iter().map(|r| self.model.score(&r.values)).collect())
    }

    /// Labels are `score ≥ 0.5`.
    pub fn predict(&self, data: &Dataset) -> Result<Vec<bool>> {
        Ok(self.scores(data)?.into_iter().map(|s| s >= 0.5).collect())
    }

    pub fn predict_row(&self, values: &[f64]) -> Result<bool> {
        if values.len() != FEATURE_COUNT {
            return Err(Error::SchemaMismatch {
                expected: format!("{FEATURE_COUNT} features"),
                found: format!("{} features", values.len()),
            });
        }
        Ok(self.model.score(values) >= 0.5)
    }

    pub fn to_json(&self) -> String {
        crate::provenance::to_json(self)
    }

    pub fn from_json(text: &str, expected_schema: Option<&str>) -> Result<Self> {
        let m: ModelArtifact = serde_json::from_str(text).map_err(|e| Error::Malformed {
            line: e.line(),
            message: e.to_string(),
        })?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::data(format!(
                "unsupported model format version {}",
                m.format_version
            )));
        }
        m.check_schema(expected_schema.unwrap_or(&schema().hash))?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, expected_schema: Option<&str>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, expected_schema)
    }
}

/// Features by decreasing importance; ties keep schema order.
pub fn rank_importances(names: &[&str], importances: &[f64]) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = names
        .iter()
        .zip(importances)
        .map(|(n, v)| (n.to_string(), *v))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked
}

pub fn feature_importance(m: &ModelArtifact) -> Vec<(String, f64)> {
    rank_importances(&schema().names(), &m.feature_importances)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRow {
    pub feature: String,
    /// `positions[r]` = number of models ranking this feature at `r + 1`.
    pub positions: Vec<usize>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingTable {
    pub top_k: usize,
    pub models: usize,
    pub rows: Vec<RankingRow>,
}

/// Tabulate how often each feature appears at each of the top `top_k`
/// positions. Features with zero importance never enter a top list. Rows
/// are ordered by total, then by position counts (more first places
/// first), then by schema order.
pub fn rank_features_across_models(
    names: &[&str],
    importances: &[&[f64]],
    top_k: usize,
) -> RankingTable {
    let mut positions: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for imp in importances {
        let ranked = rank_importances(names, imp);
        for (r, (name, v)) in ranked.iter().take(top_k).enumerate() {
            if *v <= 0.0 {
                break;
            }
            let idx = names.iter().position(|n| n == name).unwrap_or(usize::MAX);
            positions.entry(idx).or_insert_with(|| vec![0; top_k])[r] += 1;
        }
    }
    let mut rows: Vec<(usize, RankingRow)> = positions
        .into_iter()
        .map(|(idx, pos)| {
            let total = pos.iter().sum();
            (
                idx,
                RankingRow {
                    feature: names[idx].to_string(),
                    positions: pos,
                    total,
                },
            )
        })
        .collect();
    rows.sort_by(|(ia, a), (ib, b)| {
        b.total
            .cmp(&a.total)
            .then_with(|| b.positions.cmp(&a.positions))
            .then(ia.cmp(ib))
    });
    RankingTable {
        top_k,
        models: importances.len(),
        rows: rows.into_iter().map(|(_, r)| r).collect(),
    }
}

pub fn rank_models(models: &[&ModelArtifact], top_k: usize) -> RankingTable {
    let names = schema().names();
    let imps: Vec<&[f64]> = models.iter().map(|m| m.feature_importances.as_slice()).collect();
    rank_features_across_models(&names, &imps, top_k)
}

impl RankingTable {
    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.feature.len())
            .max()
            .unwrap_or(7)
            .max(7);
        let mut out = format!("{:<width$}", "Feature");
        for r in 1..=self.top_k {
            out.push_str(&format!(" {:>4}", format!("#{r}")));
        }
        out.push_str("  Total\n");
        for row in &self.rows {
            out.push_str(&format!("{:<width$}", row.feature));
            for c in &row.positions {
                out.push_str(&format!(" {c:>4}"));
            }
            out.push_str(&format!("  {:>5}\n", row.total));
        }
        out
    }
}
