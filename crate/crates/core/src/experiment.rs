//! Declarative experiment configuration and the command implementations
//! behind the CLI.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::KeywordGroups;
use crate::dataset::{read_dataset, stratified_split, write_dataset, Dataset, SplitManifest, SplitSpec};
use crate::error::{Error, Result};
use crate::eval::{evaluate_suite, transfer_evaluate, SuiteReport, TransferReport};
use crate::learn::search::ParamGrid;
use crate::learn::{rank_models, Algorithm, RankingTable, SearchConfig, SearchSpace};
use crate::metrics::schema;
use crate::pipeline::{extract_corpus, scan_corpus, ExtractOptions, UnitRemoval};
use crate::provenance::{content_hash, to_json, Provenance};
use crate::sampling::{SamplerKind, SamplerSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub name: String,
    /// Source tree to extract.
    pub root: Option<PathBuf>,
    /// Previously extracted dataset, used instead of `root`.
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub test: Option<Vec<String>>,
    pub documentation: Option<Vec<String>>,
    pub build: Option<Vec<String>>,
    pub strict_log_regex: bool,
}

impl FilterConfig {
    pub fn keyword_groups(&self) -> KeywordGroups {
        let mut g = KeywordGroups::default();
        if let Some(t) = &self.test {
            g.test = t.clone();
        }
        if let Some(d) = &self.documentation {
            g.documentation = d.clone();
        }
        if let Some(b) = &self.build {
            g.build = b.clone();
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { test_fraction: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub n_trials: usize,
    pub k_folds: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            n_trials: 10,
            k_folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSettings {
    pub smote_k: usize,
    pub target_ratio: f64,
}

impl Default for SamplingSettings {
    fn default() -> Self {
        SamplingSettings {
            smote_k: 5,
            target_ratio: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    /// Project whose held-out split is the fixed test set.
    pub test_project: String,
    /// Source projects; defaults to every other project.
    #[serde(default)]
    pub sources: Option<Vec<String>>,
    #[serde(default = "default_transfer_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub sampler: SamplerKind,
}

fn default_transfer_algorithm() -> Algorithm {
    Algorithm::RandomForest
}

fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}

fn default_samplers() -> Vec<SamplerKind> {
    SamplerKind::ALL.to_vec()
}

fn default_top_k() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub force: bool,
    pub projects: Vec<ProjectConfig>,
    #[serde(default)]
    pub filters: FilterConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub search: SearchSettings,
    #[serde(default)]
    pub sampling: SamplingSettings,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_samplers")]
    pub samplers: Vec<SamplerKind>,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default)]
    pub grids: BTreeMap<Algorithm, ParamGrid>,
    #[serde(default)]
    pub transfer: Option<TransferConfig>,
}

impl ExperimentConfig {
    /// Parse TOML; relative project paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        for p in &mut cfg.projects {
            for path in [&mut p.root, &mut p.dataset].into_iter().flatten() {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        if let Some(out) = &mut cfg.output_dir {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.projects.is_empty() {
            return Err(Error::config("at least one project is required"));
        }
        let mut names = std::collections::BTreeSet::new();
        for p in &self.projects {
            if !names.insert(p.name.as_str()) {
                return Err(Error::config(format!("duplicate project name '{}'", p.name)));
            }
            if p.name.is_empty() || p.name.contains(['/', '\\']) {
                return Err(Error::config(format!("invalid project name '{}'", p.name)));
            }
            match (&p.root, &p.dataset) {
                (Some(r), None) if !r.is_dir() => {
                    return Err(Error::config(format!(
                        "project '{}': root {} does not exist",
                        p.name,
                        r.display()
                    )))
                }
                (None, Some(d)) if !d.is_file() => {
                    return Err(Error::config(format!(
                        "project '{}': dataset {} does not exist",
                        p.name,
                        d.display()
                    )))
                }
                (Some(_), Some(_)) | (None, None) => {
                    return Err(Error::config(format!(
                        "project '{}': set exactly one of root or dataset",
                        p.name
                    )))
                }
                _ => {}
            }
        }
        SplitSpec {
            test_fraction: self.split.test_fraction,
            k: self.search.k_folds,
            ..Default::default()
        }
        .validate()?;
        self.sampler_spec(SamplerKind::None).validate()?;
        self.search_config().space.validate()?;
        if self.algorithms.is_empty() {
            return Err(Error::config("algorithm list is empty"));
        }
        if self.samplers.is_empty() {
            return Err(Error::config("sampler list is empty"));
        }
        if let Some(t) = &self.transfer {
            if !names.contains(t.test_project.as_str()) {
                return Err(Error::config(format!(
                    "transfer.test_project '{}' is not a project",
                    t.test_project
                )));
            }
            for s in t.sources.iter().flatten() {
                if !names.contains(s.as_str()) {
                    return Err(Error::config(format!("transfer source '{s}' is not a project")));
                }
            }
        }
        Ok(())
    }

    /// Hash of the effective configuration, excluding where outputs go.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        content_hash(serde_json::to_string(&canonical).expect("config serializes").as_bytes())
    }

    pub fn provenance(&self) -> Provenance {
        Provenance::new(self.config_hash(), self.seed)
    }

    pub fn sampler_spec(&self, kind: SamplerKind) -> SamplerSpec {
        SamplerSpec {
            kind,
            seed: self.seed,
            smote_k: self.sampling.smote_k,
            target_ratio: self.sampling.target_ratio,
        }
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            n_trials: self.search.n_trials,
            k_folds: self.search.k_folds,
            sampler: self.sampler_spec(SamplerKind::None),
            seed: self.seed,
            space: SearchSpace {
                grids: self.grids.clone(),
            },
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            test_fraction: self.split.test_fraction,
            seed: self.seed,
            k: self.search.k_folds,
            ..Default::default()
        }
    }

    fn extract_options(&self, project: &str) -> ExtractOptions {
        ExtractOptions {
            keywords: self.filters.keyword_groups(),
            strict_log_regex: self.filters.strict_log_regex,
            project: Some(project.to_string()),
            shadow_dir: None,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Provenance header for plain-text tables.
pub fn text_header(p: &Provenance) -> String {
    format!(
        "# tool: {}\n# config_hash: {}\n# seed: {}\n# schema_hash: {}\n\n",
        p.tool, p.config_hash, p.seed, p.schema_hash
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutput {
    pub provenance: Provenance,
    #[serde(flatten)]
    pub report: crate::corpus::CorpusReport,
    pub parse_failures: Vec<crate::pipeline::ParseFailure>,
    pub warnings: Vec<String>,
}

pub fn cmd_scan(root: &Path, options: &ExtractOptions, provenance: Provenance) -> Result<ScanOutput> {
    let scan = scan_corpus(root, options)?;
    let mut warnings = scan.discovery.warnings.clone();
    if scan.parse_failure_rate() > crate::pipeline::MAX_PARSE_FAILURE_RATE {
        warnings.push(format!(
            "WARNING: {:.1}% of production files failed to parse",
            scan.parse_failure_rate() * 100.0
        ));
    }
    Ok(ScanOutput {
        provenance,
        report: scan.report(),
        parse_failures: scan.failures.clone(),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalSummary {
    pub provenance: Provenance,
    pub files: usize,
    pub methods: usize,
    pub logged_methods: usize,
    pub logs_before: usize,
    pub logs_after: usize,
    pub guards_removed: usize,
    pub methods_dropped: usize,
    pub residual_ratio: f64,
    pub parse_failure_rate: f64,
    pub warnings: Vec<String>,
    pub parse_failures: Vec<crate::pipeline::ParseFailure>,
    pub units: Vec<UnitRemoval>,
}

/// Extract one project. The removal report is always returned; the dataset
/// is refused (data error) when the residual ratio exceeds the limit unless
/// `force` is set.
pub fn cmd_extract(
    root: &Path,
    options: &ExtractOptions,
    provenance: Provenance,
    force: bool,
) -> Result<(RemovalSummary, Result<Dataset>)> {
    let ex = extract_corpus(root, options)?;
    let total = ex.removal_total();
    let summary = RemovalSummary {
        provenance: provenance.clone(),
        files: ex.discovery.production().count(),
        methods: ex.rows.len(),
        logged_methods: ex.rows.iter().filter(|r| r.label).count(),
        logs_before: total.logs_before,
        logs_after: total.logs_after,
        guards_removed: total.guards_removed,
        methods_dropped: ex.removals.iter().map(|u| u.methods_dropped).sum(),
        residual_ratio: total.residual_ratio(),
        parse_failure_rate: ex.parse_failure_rate(),
        warnings: ex.warnings(),
        parse_failures: ex.failures.clone(),
        units: ex.removals.clone(),
    };
    let dataset = ex
        .check_residual(force)
        .and_then(|()| Dataset::new(provenance, ex.rows));
    Ok((summary, dataset))
}

/// Dataset of one project, extracting it (and writing it under
/// `out/datasets`) when only a source root is configured.
fn project_dataset(cfg: &ExperimentConfig, project: &ProjectConfig, out: &Path) -> Result<Dataset> {
    let provenance = cfg.provenance();
    if let Some(path) = &project.dataset {
        let d = read_dataset(path, Some(&schema().hash))?;
        return Dataset::new(provenance, d.rows().to_vec());
    }
    let root = project.root.as_ref().expect("validated");
    let (summary, d) = cmd_extract(root, &cfg.extract_options(&project.name), provenance, cfg.force)?;
    write_file(
        &out.join("datasets").join(format!("{}.removal.json", project.name)),
        &to_json(&summary),
    )?;
    let d = d?;
    write_dataset(&d, &out.join("datasets").join(format!("{}.csv", project.name)))?;
    Ok(d)
}

fn load_projects(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<(String, Dataset)>> {
    cfg.projects
        .iter()
        .map(|p| Ok((p.name.clone(), project_dataset(cfg, p, out)?)))
        .collect()
}

/// Split `d` and persist the manifest at `path`, or reuse the manifest if
/// it already exists for the same schema and seed.
pub fn split_with_manifest(
    d: &Dataset,
    spec: &SplitSpec,
    provenance: &Provenance,
    path: &Path,
) -> Result<(Dataset, Dataset, SplitManifest)> {
    if path.is_file() {
        let m = SplitManifest::read(path)?;
        if m.provenance.seed == spec.seed && m.provenance.schema_hash == d.schema_hash() {
            let (train, test) = m.apply(d)?;
            return Ok((train, test, m));
        }
    }
    let (train, test) = stratified_split(d, spec)?;
    let m = SplitManifest::new(provenance.clone(), spec, &train, &test);
    write_file(path, &to_json(&m))?;
    Ok((train, test, m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentBundle {
    pub provenance: Provenance,
    pub projects: Vec<String>,
    pub rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub suite: SuiteReport,
    pub ranking: RankingTable,
}

/// Within-corpus experiment over the union of all projects.
pub fn cmd_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<ExperimentBundle> {
    cfg.validate()?;
    let provenance = cfg.provenance();
    let projects = load_projects(cfg, out)?;
    let parts: Vec<&Dataset> = projects.iter().map(|(_, d)| d).collect();
    let all = Dataset::concat(&parts)?;
    let (train, test, _) = split_with_manifest(
        &all,
        &cfg.split_spec(),
        &provenance,
        &out.join("split").join("test_manifest.json"),
    )?;

    let suite = evaluate_suite(&train, &test, &cfg.algorithms, &cfg.samplers, &cfg.search_config())?;
    let models: Vec<_> = suite.cells.iter().filter_map(|c| c.model.as_ref()).collect();
    for c in &suite.cells {
        let stem = format!("{}_{}", c.algorithm, c.sampler.as_str());
        if let Some(m) = &c.model {
            write_file(&out.join("models").join(format!("{stem}.json")), &m.to_json())?;
        }
        write_file(&out.join("trials").join(format!("{stem}.json")), &to_json(&c.trials))?;
    }
    let ranking = rank_models(&models, cfg.top_k);

    let bundle = ExperimentBundle {
        provenance: provenance.clone(),
        projects: projects.iter().map(|(n, _)| n.clone()).collect(),
        rows: all.len(),
        train_rows: train.len(),
        test_rows: test.len(),
        suite,
        ranking,
    };
    write_file(&out.join("reports").join("experiment.json"), &to_json(&bundle))?;
    write_file(&out.join("reports").join("experiment.txt"), &render_experiment(&bundle))?;
    Ok(bundle)
}

pub fn render_experiment(b: &ExperimentBundle) -> String {
    let mut s = text_header(&b.provenance);
    s.push_str(&format!(
        "Projects: {}\nRows: {} (train {}, test {})\n\n",
        b.projects.join(", "),
        b.rows,
        b.train_rows,
        b.test_rows
    ));
    let samplers: Vec<SamplerKind> = SamplerKind::ALL
        .into_iter()
        .filter(|k| b.suite.cells.iter().any(|c| c.sampler == *k))
        .collect();
    for k in samplers {
        s.push_str(&format!("Performance (sampling: {})\n", k.as_str()));
        s.push_str(&b.suite.performance_table(k));
        s.push('\n');
    }
    if !b.suite.deltas.is_empty() {
        s.push_str("Change relative to no sampling\n");
        s.push_str(&b.suite.delta_table());
        s.push('\n');
    }
    s.push_str(&format!(
        "Top {} features across {} models\n",
        b.ranking.top_k, b.ranking.models
    ));
    s.push_str(&b.ranking.to_text());
    for c in &b.suite.cells {
        if let Some(e) = &c.error {
            s.push_str(&format!("\nFAILED {} + {}: {e}\n", c.algorithm, c.sampler.as_str()));
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferBundle {
    pub provenance: Provenance,
    pub test_project: String,
    pub test_rows: usize,
    pub sampler: SamplerKind,
    pub report: TransferReport,
}

/// Cross-project run: the test split of `transfer.test_project` (persisted
/// manifest) against models trained on the other projects.
pub fn cmd_transfer(cfg: &ExperimentConfig, out: &Path) -> Result<TransferBundle> {
    cfg.validate()?;
    let t = cfg
        .transfer
        .as_ref()
        .ok_or_else(|| Error::config("missing [transfer] section"))?;
    let provenance = cfg.provenance();
    let projects = load_projects(cfg, out)?;
    let target = &projects
        .iter()
        .find(|(n, _)| *n == t.test_project)
        .expect("validated")
        .1;
    let (_, test, _) = split_with_manifest(
        target,
        &cfg.split_spec(),
        &provenance,
        &out
            .join("split")
            .join(format!("{}_test_manifest.json", t.test_project)),
    )?;
    let sources: Vec<(String, Dataset)> = projects
        .iter()
        .filter(|(n, _)| match &t.sources {
            Some(list) => list.contains(n),
            None => *n != t.test_project,
        })
        .cloned()
        .collect();
    let search = SearchConfig {
        sampler: cfg.sampler_spec(t.sampler),
        ..cfg.search_config()
    };
    let report = transfer_evaluate(&sources, &test, t.algorithm, &search)?;
    let bundle = TransferBundle {
        provenance,
        test_project: t.test_project.clone(),
        test_rows: test.len(),
        sampler: t.sampler,
        report,
    };
    write_file(&out.join("reports").join("transfer.json"), &to_json(&bundle))?;
    write_file(&out.join("reports").join("transfer.txt"), &render_transfer(&bundle))?;
    Ok(bundle)
}

pub fn render_transfer(b: &TransferBundle) -> String {
    let mut s = text_header(&b.provenance);
    s.push_str(&format!(
        "Test set: {} ({} rows), algorithm: {}, sampling: {}\n",
        b.test_project,
        b.test_rows,
        b.report.algorithm.display_name(),
        b.sampler.as_str()
    ));
    s.push_str(&b.report.to_text());
    s
}

/// Re-render the text reports of a bundle directory from its JSON files.
pub fn cmd_report(dir: &Path) -> Result<String> {
    let reports = dir.join("reports");
    let mut out = String::new();
    let exp = reports.join("experiment.json");
    let tr = reports.join("transfer.json");
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
    let parse_err = |e: serde_json::Error| Error::Malformed {
        line: e.line(),
        message: e.to_string(),
    };
    if exp.is_file() {
        let b: ExperimentBundle = serde_json::from_str(&read(&exp)?).map_err(parse_err)?;
        if b.provenance.schema_hash != schema().hash {
            return Err(Error::SchemaMismatch {
                expected: schema().hash.clone(),
                found: b.provenance.schema_hash,
            });
        }
        out.push_str(&render_experiment(&b));
    }
    if tr.is_file() {
        let b: TransferBundle = serde_json::from_str(&read(&tr)?).map_err(parse_err)?;
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&render_transfer(&b));
    }
    if out.is_empty() {
        return Err(Error::data(format!(
            "no experiment.json or transfer.json under {}",
            reports.display()
        )));
    }
    Ok(out)
}
