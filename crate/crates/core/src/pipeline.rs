//! Corpus scan and removal-then-metrics feature extraction.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{discover_files, CorpusReport, Discovery, KeywordGroups};
use crate::error::{Error, Result};
use crate::java::{parse_unit, remove_logs_mapped, JavaUnit, LogDetector, MethodRecord, RemovalReport};
use crate::metrics::{assemble_features, FeatureVector, HierarchyIndex, UnitMetrics};

/// Residual ratio above which extraction refuses to emit a dataset.
pub const MAX_RESIDUAL_RATIO: f64 = 0.005;
/// Parse-failure rate above which reports carry a warning banner.
pub const MAX_PARSE_FAILURE_RATE: f64 = 0.10;

#[derive(Debug, Clone, Default)]
pub struct ExtractOptions {
    pub keywords: KeywordGroups,
    pub strict_log_regex: bool,
    /// Prefix for identity paths, usually the project name.
    pub project: Option<String>,
    /// Directory receiving the log-free sources, mirroring the corpus layout.
    pub shadow_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseFailure {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitRemoval {
    pub path: String,
    #[serde(flatten)]
    pub report: RemovalReport,
    /// Methods declared inside deleted statements (anonymous classes).
    pub methods_dropped: usize,
}

/// Per-file output of the scanning pass.
struct ScannedUnit {
    original: JavaUnit,
    records: Vec<MethodRecord>,
}

#[derive(Debug, Clone)]
pub struct Scan {
    pub discovery: Discovery,
    pub records: Vec<MethodRecord>,
    pub failures: Vec<ParseFailure>,
}

impl Scan {
    pub fn report(&self) -> CorpusReport {
        CorpusReport::build(&self.discovery, &self.records)
    }

    pub fn parse_failure_rate(&self) -> f64 {
        failure_rate(self.failures.len(), self.discovery.production().count())
    }
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub discovery: Discovery,
    pub records: Vec<MethodRecord>,
    pub rows: Vec<FeatureVector>,
    pub removals: Vec<UnitRemoval>,
    pub failures: Vec<ParseFailure>,
}

impl Extraction {
    pub fn removal_total(&self) -> RemovalReport {
        let mut total = RemovalReport::default();
        for r in &self.removals {
            total.merge(&r.report);
        }
        total
    }

    pub fn residual_ratio(&self) -> f64 {
        self.removal_total().residual_ratio()
    }

    pub fn parse_failure_rate(&self) -> f64 {
        failure_rate(self.failures.len(), self.discovery.production().count())
    }

    /// Error when the residual ratio exceeds the bound and `force` is unset.
    pub fn check_residual(&self, force: bool) -> Result<()> {
        let ratio = self.residual_ratio();
        if ratio > MAX_RESIDUAL_RATIO && !force {
            return Err(Error::data(format!(
                "log removal left {:.3}% of log statements in place (limit {:.1}%); rerun with --force to emit anyway",
                ratio * 100.0,
                MAX_RESIDUAL_RATIO * 100.0
            )));
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = self.discovery.warnings.clone();
        let rate = self.parse_failure_rate();
        if rate > MAX_PARSE_FAILURE_RATE {
            out.push(format!(
                "WARNING: {:.1}% of production files failed to parse",
                rate * 100.0
            ));
        }
        let ratio = self.residual_ratio();
        if ratio > 0.0 {
            out.push(format!(
                "log removal residual ratio {:.4}% ({} of {} statements kept)",
                ratio * 100.0,
                self.removal_total().logs_after,
                self.removal_total().logs_before
            ));
        }
        out
    }
}

fn failure_rate(failures: usize, files: usize) -> f64 {
    if files == 0 {
        0.0
    } else {
        failures as f64 / files as f64
    }
}

fn identity_path(options: &ExtractOptions, rel: &str) -> String {
    match &options.project {
        Some(p) => format!("{p}/{rel}"),
        None => rel.to_string(),
    }
}

/// Label every method of a unit from its original (pre-removal) source.
pub fn label_methods(unit: &JavaUnit, detector: &LogDetector, id_path: &str) -> Vec<MethodRecord> {
    let structure = unit.structure();
    structure
        .methods
        .iter()
        .map(|m| {
            let log_statements = detector.detect_log_statements(unit, m.node);
            MethodRecord {
                id: structure.method_id(id_path, m),
                is_constructor: m.is_constructor,
                label: !log_statements.is_empty(),
                log_statements,
            }
        })
        .collect()
}

fn read_and_parse(root: &Path, rel: &str, id_path: &str) -> Result<JavaUnit> {
    let path = root.join(rel);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let source = String::from_utf8_lossy(&bytes).into_owned();
    parse_unit(id_path, source)
}

fn scan_units(
    root: &Path,
    discovery: &Discovery,
    options: &ExtractOptions,
    detector: &LogDetector,
) -> Vec<(String, Result<ScannedUnit>)> {
    let files: Vec<&str> = discovery.production().map(|f| f.path.as_str()).collect();
    files
        .par_iter()
        .map(|rel| {
            let id_path = identity_path(options, rel);
            let scanned = read_and_parse(root, rel, &id_path).map(|original| {
                let records = label_methods(&original, detector, &id_path);
                ScannedUnit { original, records }
            });
            (rel.to_string(), scanned)
        })
        .collect()
}

/// Discover, parse and label the production files of one project.
pub fn scan_corpus(root: &Path, options: &ExtractOptions) -> Result<Scan> {
    let discovery = discover_files(root, &options.keywords)?;
    let detector = LogDetector::new(options.strict_log_regex);
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (rel, scanned) in scan_units(root, &discovery, options, &detector) {
        match scanned {
            Ok(s) => records.extend(s.records),
            Err(e) => failures.push(ParseFailure {
                path: rel,
                message: e.to_string(),
            }),
        }
    }
    Ok(Scan {
        discovery,
        records,
        failures,
    })
}

/// Label, remove logs, and compute feature vectors for one project.
pub fn extract_corpus(root: &Path, options: &ExtractOptions) -> Result<Extraction> {
    let discovery = discover_files(root, &options.keywords)?;
    let detector = LogDetector::new(options.strict_log_regex);

    let mut failures = Vec::new();
    let mut scanned = Vec::new();
    for (rel, s) in scan_units(root, &discovery, options, &detector) {
        match s {
            Ok(s) => scanned.push((rel, s)),
            Err(e) => failures.push(ParseFailure {
                path: rel,
                message: e.to_string(),
            }),
        }
    }

    let removed: Vec<Result<(JavaUnit, RemovalReport, Vec<usize>)>> = scanned
        .par_iter()
        .map(|(_, s)| remove_logs_mapped(&s.original, &detector))
        .collect();

    let mut units = Vec::new();
    let mut hierarchy = HierarchyIndex::new();
    for ((rel, s), r) in scanned.into_iter().zip(removed) {
        match r {
            Ok((modified, report, origin)) => {
                hierarchy.add_unit(&modified.structure());
                units.push((rel, s, modified, report, origin));
            }
            Err(e) => failures.push(ParseFailure {
                path: rel,
                message: e.to_string(),
            }),
        }
    }

    if let Some(dir) = &options.shadow_dir {
        for (rel, _, modified, _, _) in &units {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(&path, modified.source()).map_err(|e| Error::io(&path, e))?;
        }
    }

    let per_unit: Vec<Result<(Vec<FeatureVector>, usize)>> = units
        .par_iter()
        .map(|(_, s, modified, _, origin)| unit_features(&s.original, modified, origin, &s.records, &hierarchy))
        .collect();

    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut removals = Vec::new();
    for ((rel, s, _, report, _), r) in units.into_iter().zip(per_unit) {
        match r {
            Ok((v, methods_dropped)) => {
                rows.extend(v);
                records.extend(s.records);
                removals.push(UnitRemoval {
                    path: identity_path(options, &rel),
                    report,
                    methods_dropped,
                });
            }
            Err(e) => failures.push(ParseFailure {
                path: rel,
                message: e.to_string(),
            }),
        }
    }
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    records.sort_by(|a, b| a.id.cmp(&b.id));
    failures.sort_by(|a, b| a.path.cmp(&b.path));

    Ok(Extraction {
        discovery,
        records,
        rows,
        removals,
        failures,
    })
}

/// Label, remove logs and extract features for a single in-memory source.
/// Supertypes outside the unit are unresolved.
pub fn extract_source(
    path: &str,
    source: &str,
    strict_log_regex: bool,
) -> Result<(Vec<FeatureVector>, RemovalReport)> {
    let detector = LogDetector::new(strict_log_regex);
    let original = parse_unit(path, source)?;
    let records = label_methods(&original, &detector, path);
    let (modified, report, origin) = remove_logs_mapped(&original, &detector)?;
    let mut hierarchy = HierarchyIndex::new();
    hierarchy.add_unit(&modified.structure());
    let (mut rows, _) = unit_features(&original, &modified, &origin, &records, &hierarchy)?;
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((rows, report))
}

/// Feature vectors of a log-free unit, labelled from the original records.
/// `origin` maps offsets of `modified` back into `original`; methods that
/// did not survive removal have no row. Returns the rows and the number of
/// dropped methods.
pub fn unit_features(
    original: &JavaUnit,
    modified: &JavaUnit,
    origin: &[usize],
    labels: &[MethodRecord],
    hierarchy: &HierarchyIndex,
) -> Result<(Vec<FeatureVector>, usize)> {
    let before = original.structure();
    if before.methods.len() != labels.len() {
        return Err(Error::Internal(format!(
            "{}: {} methods but {} records",
            original.path(),
            before.methods.len(),
            labels.len()
        )));
    }
    let by_start: std::collections::HashMap<usize, &MethodRecord> = before
        .methods
        .iter()
        .map(|m| m.node.start_byte())
        .zip(labels)
        .collect();
    let um = UnitMetrics::new(modified);
    let class_metrics: Vec<_> = (0..um.structure.types.len())
        .map(|i| um.class_metrics(i, hierarchy))
        .collect();
    let mut out = Vec::with_capacity(um.structure.methods.len());
    for (i, m) in um.structure.methods.iter().enumerate() {
        let record = by_start.get(&origin[m.node.start_byte()]).ok_or_else(|| {
            Error::Internal(format!(
                "{}: method {} has no counterpart before log removal",
                modified.path(),
                m.signature
            ))
        })?;
        if record.id.signature != m.signature {
            return Err(Error::Internal(format!(
                "method identity changed by log removal: {} vs {}",
                record.id, m.signature
            )));
        }
        out.push(assemble_features(
            &um.method_metrics(i),
            &class_metrics[m.type_index],
            record.label,
            record.id.clone(),
        ));
    }
    let dropped = labels.len() - out.len();
    Ok((out, dropped))
}
