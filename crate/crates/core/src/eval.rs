//! Scoring, probabilistic baselines, experiment suites and transfer runs.

use std::collections::BTreeSet;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learn::{random_search, Algorithm, ModelArtifact, SearchConfig, TrialRecord};
use crate::rng::rng_for;
use crate::sampling::{SamplerKind, SamplerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tn: u64, fp: u64, fn_: u64, tp: u64) -> Self {
        ConfusionMatrix { tp, fp, tn, fn_ }
    }

    pub fn from_predictions(predictions: &[bool], labels: &[bool]) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(Error::data(format!(
                "{} predictions for {} labels",
                predictions.len(),
                labels.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::data("cannot score an empty test set"));
        }
        let mut cm = ConfusionMatrix::default();
        for (&p, &l) in predictions.iter().zip(labels) {
            match (p, l) {
                (true, true) => cm.tp += 1,
                (true, false) => cm.fp += 1,
                (false, false) => cm.tn += 1,
                (false, true) => cm.fn_ += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores {
    pub balanced_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    /// Names of ratios whose denominator was zero (reported as 0).
    pub undefined: Vec<String>,
}

impl Scores {
    pub fn from_matrix(cm: &ConfusionMatrix) -> Scores {
        let (tpr, tpr_undef) = ratio(cm.tp, cm.tp + cm.fn_);
        let (tnr, tnr_undef) = ratio(cm.tn, cm.tn + cm.fp);
        let (precision, pr_undef) = ratio(cm.tp, cm.tp + cm.fp);
        let mut undefined = Vec::new();
        if tpr_undef || tnr_undef {
            undefined.push("balanced_accuracy".to_string());
        }
        if pr_undef {
            undefined.push("precision".to_string());
        }
        if tpr_undef {
            undefined.push("recall".to_string());
        }
        Scores {
            balanced_accuracy: 0.5 * (tpr + tnr),
            precision,
            recall: tpr,
            undefined,
        }
    }
}

pub fn balanced_accuracy(predictions: &[bool], labels: &[bool]) -> Result<f64> {
    let cm = ConfusionMatrix::from_predictions(predictions, labels)?;
    Ok(Scores::from_matrix(&cm).balanced_accuracy)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub train: String,
    pub test: String,
    pub sampler: String,
    pub confusion: ConfusionMatrix,
    #[serde(flatten)]
    pub scores: Scores,
}

impl EvalReport {
    pub fn fp(&self) -> u64 {
        self.confusion.fp
    }

    pub fn fn_(&self) -> u64 {
        self.confusion.fn_
    }
}

pub fn score(predictions: &[bool], labels: &[bool]) -> Result<EvalReport> {
    let cm = ConfusionMatrix::from_predictions(predictions, labels)?;
    Ok(EvalReport {
        confusion: cm,
        scores: Scores::from_matrix(&cm),
        ..Default::default()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Random,
    Biased,
}

impl BaselineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::Random => "random",
            BaselineKind::Biased => "biased",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub kind: BaselineKind,
    pub p: f64,
    pub seed: u64,
}

impl BaselineSpec {
    pub fn random(seed: u64) -> Self {
        BaselineSpec {
            kind: BaselineKind::Random,
            p: 0.5,
            seed,
        }
    }

    pub fn biased(train_prevalence: f64, seed: u64) -> Self {
        BaselineSpec {
            kind: BaselineKind::Biased,
            p: train_prevalence,
            seed,
        }
    }
}

/// Independent seeded draws, positive with probability `p`.
pub fn baseline_predict(spec: &BaselineSpec, n: usize) -> Vec<bool> {
    let mut rng = rng_for(spec.seed, spec.kind.as_str(), 0);
    let p = spec.p.clamp(0.0, 1.0);
    (0..n).map(|_| rng.gen_bool(p)).collect()
}

pub fn evaluate_model(model: &ModelArtifact, test: &Dataset) -> Result<EvalReport> {
    let mut r = score(&model.predict(test)?, &test.labels())?;
    r.model = model.spec.algorithm.as_str().to_string();
    r.sampler = model.sampler.kind.as_str().to_string();
    r.train = model.provenance.config_hash.clone();
    Ok(r)
}

/// One (algorithm, sampler) cell of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCell {
    pub algorithm: Algorithm,
    pub sampler: SamplerKind,
    pub report: Option<EvalReport>,
    pub error: Option<String>,
    pub best_trial: Option<usize>,
    pub trials: Vec<TrialRecord>,
    #[serde(skip)]
    pub model: Option<ModelArtifact>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub algorithm: Algorithm,
    pub sampler: SamplerKind,
    pub balanced_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub fp: i64,
    #[serde(rename = "fn")]
    pub fn_: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub baselines: Vec<EvalReport>,
    pub cells: Vec<SuiteCell>,
    pub deltas: Vec<DeltaRow>,
}

/// Search, fit and score every (algorithm, sampler) pair on a fixed test
/// set. Hyperparameters are searched separately for each sampler; the test
/// set only ever reaches `predict`.
pub fn evaluate_suite(
    train: &Dataset,
    test: &Dataset,
    algorithms: &[Algorithm],
    samplers: &[SamplerKind],
    config: &SearchConfig,
) -> Result<SuiteReport> {
    if train.schema_hash() != test.schema_hash() {
        return Err(Error::SchemaMismatch {
            expected: train.schema_hash().to_string(),
            found: test.schema_hash().to_string(),
        });
    }
    let baselines = vec![
        {
            let mut r = score(
                &baseline_predict(&BaselineSpec::random(config.seed), test.len()),
                &test.labels(),
            )?;
            r.model = "random_guess".into();
            r
        },
        {
            let mut r = score(
                &baseline_predict(&BaselineSpec::biased(train.prevalence(), config.seed), test.len()),
                &test.labels(),
            )?;
            r.model = "biased_guess".into();
            r
        },
    ];

    let mut cells = Vec::new();
    for &algorithm in algorithms {
        for &sampler in samplers {
            let cfg = SearchConfig {
                sampler: SamplerSpec {
                    kind: sampler,
                    ..config.sampler.clone()
                },
                ..config.clone()
            };
            let cell = match random_search(algorithm, train, &cfg) {
                Ok(res) => match evaluate_model(&res.best, test) {
                    Ok(report) => SuiteCell {
                        algorithm,
                        sampler,
                        report: Some(report),
                        error: None,
                        best_trial: Some(res.best_trial),
                        trials: res.trials,
                        model: Some(res.best),
                    },
                    Err(e) => failed_cell(algorithm, sampler, e),
                },
                Err(e) => failed_cell(algorithm, sampler, e),
            };
            log::info!(
                "{} + {}: {}",
                algorithm,
                sampler.as_str(),
                cell.report
                    .as_ref()
                    .map(|r| format!("BA {:.3}", r.scores.balanced_accuracy))
                    .unwrap_or_else(|| "failed".into())
            );
            cells.push(cell);
        }
    }
    let deltas = delta_rows(&cells);
    Ok(SuiteReport {
        baselines,
        cells,
        deltas,
    })
}

fn failed_cell(algorithm: Algorithm, sampler: SamplerKind, e: Error) -> SuiteCell {
    SuiteCell {
        algorithm,
        sampler,
        report: None,
        error: Some(e.to_string()),
        best_trial: None,
        trials: Vec::new(),
        model: None,
    }
}

/// Signed differences of each sampled cell against the unsampled cell of the
/// same algorithm.
pub fn delta_rows(cells: &[SuiteCell]) -> Vec<DeltaRow> {
    let mut out = Vec::new();
    for c in cells {
        if c.sampler == SamplerKind::None {
            continue;
        }
        let base = cells
            .iter()
            .find(|b| b.algorithm == c.algorithm && b.sampler == SamplerKind::None);
        if let (Some(r), Some(Some(b))) = (&c.report, base.map(|b| &b.report)) {
            out.push(DeltaRow {
                algorithm: c.algorithm,
                sampler: c.sampler,
                balanced_accuracy: r.scores.balanced_accuracy - b.scores.balanced_accuracy,
                precision: r.scores.precision - b.scores.precision,
                recall: r.scores.recall - b.scores.recall,
                fp: r.confusion.fp as i64 - b.confusion.fp as i64,
                fn_: r.confusion.fn_ as i64 - b.confusion.fn_ as i64,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub source: String,
    pub train_rows: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub algorithm: Algorithm,
    /// One row per source, by decreasing balanced accuracy.
    pub per_source: Vec<TransferRow>,
    /// The model trained on all sources together.
    pub combined: TransferRow,
}

pub const COMBINED_SOURCE: &str = "all combined";

/// Train on each source and on their union; score all on `test`.
pub fn transfer_evaluate(
    sources: &[(String, Dataset)],
    test: &Dataset,
    algorithm: Algorithm,
    config: &SearchConfig,
) -> Result<TransferReport> {
    if sources.is_empty() {
        return Err(Error::config("transfer needs at least one source dataset"));
    }
    let test_ids = test.ids();
    for (name, d) in sources {
        if d.schema_hash() != test.schema_hash() {
            return Err(Error::SchemaMismatch {
                expected: test.schema_hash().to_string(),
                found: format!("{} (source '{name}')", d.schema_hash()),
            });
        }
        if let Some(id) = d.rows().iter().map(|r| &r.id).find(|id| test_ids.contains(id)) {
            return Err(Error::data(format!(
                "source '{name}' shares row {id} with the test set"
            )));
        }
    }
    let names: BTreeSet<&str> = sources.iter().map(|(n, _)| n.as_str()).collect();
    if names.len() != sources.len() {
        return Err(Error::config("transfer source names must be unique"));
    }

    let run = |name: &str, d: &Dataset| -> Result<TransferRow> {
        let res = random_search(algorithm, d, config)?;
        let mut report = evaluate_model(&res.best, test)?;
        report.train = name.to_string();
        Ok(TransferRow {
            source: name.to_string(),
            train_rows: d.len(),
            report,
        })
    };

    let mut per_source = Vec::new();
    for (name, d) in sources {
        per_source.push(run(name, d)?);
    }
    per_source.sort_by(|a, b| {
        b.report
            .scores
            .balanced_accuracy
            .total_cmp(&a.report.scores.balanced_accuracy)
            .then_with(|| a.source.cmp(&b.source))
    });
    let parts: Vec<&Dataset> = sources.iter().map(|(_, d)| d).collect();
    let combined = run(COMBINED_SOURCE, &Dataset::concat(&parts)?)?;
    Ok(TransferReport {
        algorithm,
        per_source,
        combined,
    })
}

fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                s.push_str(&format!("{c:<w$}"));
            } else {
                s.push_str(&format!("  {c:>w$}"));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    out.push_str(&line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(|s| s.as_str()).collect()));
    for r in rows {
        out.push_str(&line(r.iter().map(|s| s.as_str()).collect()));
    }
    out
}

fn report_cells(name: &str, r: &EvalReport) -> Vec<String> {
    vec![
        name.to_string(),
        r.confusion.tn.to_string(),
        r.confusion.fp.to_string(),
        r.confusion.fn_.to_string(),
        r.confusion.tp.to_string(),
        format!("{:.2}", r.scores.balanced_accuracy),
        format!("{:.2}", r.scores.precision),
        format!("{:.2}", r.scores.recall),
    ]
}

impl SuiteReport {
    /// Performance table for one sampler plus the baselines.
    pub fn performance_table(&self, sampler: SamplerKind) -> String {
        let mut rows: Vec<Vec<String>> = self
            .cells
            .iter()
            .filter(|c| c.sampler == sampler)
            .map(|c| match &c.report {
                Some(r) => report_cells(c.algorithm.display_name(), r),
                None => vec![c.algorithm.display_name().to_string(), "failed".into()],
            })
            .collect();
        for b in &self.baselines {
            let name = if b.model == "random_guess" { "Random guess" } else { "Biased guess" };
            rows.push(report_cells(name, b));
        }
        table(&["Model", "TN", "FP", "FN", "TP", "BA", "Pr", "Rec"], &rows)
    }

    pub fn delta_table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .deltas
            .iter()
            .map(|d| {
                vec![
                    d.algorithm.display_name().to_string(),
                    d.sampler.as_str().to_uppercase(),
                    format!("{:+.2}", d.balanced_accuracy),
                    format!("{:+.2}", d.precision),
                    format!("{:+.2}", d.recall),
                    format!("{:+}", d.fp),
                    format!("{:+}", d.fn_),
                ]
            })
            .collect();
        table(&["Model", "Sampling", "BA", "Pr", "Rec", "FP", "FN"], &rows)
    }
}

impl TransferReport {
    pub fn to_text(&self) -> String {
        let mut rows: Vec<Vec<String>> = self
            .per_source
            .iter()
            .chain(std::iter::once(&self.combined))
            .map(|r| {
                vec![
                    r.source.clone(),
                    r.train_rows.to_string(),
                    format!("{:.2}", r.report.scores.balanced_accuracy),
                    format!("{:.2}", r.report.scores.precision),
                    format!("{:.2}", r.report.scores.recall),
                ]
            })
            .collect();
        if rows.is_empty() {
            rows.push(vec!["-".into()]);
        }
        table(&["Training data", "Rows", "BA", "Pr", "Rec"], &rows)
    }
}
