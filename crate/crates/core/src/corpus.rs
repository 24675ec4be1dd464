//! File discovery, path-based classification, and corpus statistics.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::java::{LogContext, MethodRecord};

pub const JAVA_SUFFIX: &str = ".java";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileCategory {
    Production,
    Test,
    Documentation,
    Build,
}

impl FileCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            FileCategory::Production => "production",
            FileCategory::Test => "test",
            FileCategory::Documentation => "documentation",
            FileCategory::Build => "build",
        }
    }
}

/// Path keywords per category. Groups are tried in the order test,
/// documentation, build; the first match wins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KeywordGroups {
    pub test: Vec<String>,
    pub documentation: Vec<String>,
    pub build: Vec<String>,
}

impl Default for KeywordGroups {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        KeywordGroups {
            test: v(&["fixture", "memtest", "/mock/", "test/"]),
            documentation: v(&["docs/", "/examples/"]),
            build: v(&["buildSrc/"]),
        }
    }
}

impl KeywordGroups {
    /// Case-sensitive substring match on the forward-slash normalized path.
    pub fn classify(&self, path: &str) -> FileCategory {
        let normalized = path.replace('\\', "/");
        let hit = |keys: &[String]| keys.iter().any(|k| normalized.contains(k.as_str()));
        if hit(&self.test) {
            FileCategory::Test
        } else if hit(&self.documentation) {
            FileCategory::Documentation
        } else if hit(&self.build) {
            FileCategory::Build
        } else {
            FileCategory::Production
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the discovery root, forward slashes.
    pub path: String,
    pub category: FileCategory,
}

#[derive(Debug, Clone, Default)]
pub struct Discovery {
    pub files: Vec<FileRecord>,
    pub warnings: Vec<String>,
}

impl Discovery {
    pub fn production(&self) -> impl Iterator<Item = &FileRecord> {
        self.files
            .iter()
            .filter(|f| f.category == FileCategory::Production)
    }

    pub fn files_by_category(&self) -> BTreeMap<String, usize> {
        let mut out: BTreeMap<String, usize> = [
            FileCategory::Production,
            FileCategory::Test,
            FileCategory::Documentation,
            FileCategory::Build,
        ]
        .iter()
        .map(|c| (c.as_str().to_string(), 0))
        .collect();
        for f in &self.files {
            *out.entry(f.category.as_str().to_string()).or_default() += 1;
        }
        out
    }
}

/// Find every `.java` file under `root`, sorted by relative path.
pub fn discover_files(root: &Path, groups: &KeywordGroups) -> Result<Discovery> {
    let meta = std::fs::metadata(root).map_err(|e| Error::io(root, e))?;
    if !meta.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory"),
        ));
    }
    std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;

    let mut out = Discovery::default();
    for entry in WalkDir::new(root).follow_links(false).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                out.warnings.push(format!("skipping unreadable entry: {e}"));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy();
        if !name.ends_with(JAVA_SUFFIX) {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .to_string_lossy()
            .replace('\\', "/");
        if let Err(e) = File::open(entry.path()) {
            out.warnings.push(format!("skipping unreadable file {rel}: {e}"));
            continue;
        }
        let category = groups.classify(&rel);
        out.files.push(FileRecord {
            path: rel,
            category,
        });
    }
    out.files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub files_by_category: BTreeMap<String, usize>,
    pub methods: usize,
    pub log_statements: usize,
    pub logged_methods: usize,
    pub logged_ratio: f64,
}

impl CorpusSummary {
    pub fn production_files(&self) -> usize {
        self.files_by_category
            .get(FileCategory::Production.as_str())
            .copied()
            .unwrap_or(0)
    }

    /// Elementwise sum with the ratio recomputed.
    pub fn combine(&self, other: &CorpusSummary) -> CorpusSummary {
        let mut files = self.files_by_category.clone();
        for (k, v) in &other.files_by_category {
            *files.entry(k.clone()).or_default() += v;
        }
        let methods = self.methods + other.methods;
        let logged = self.logged_methods + other.logged_methods;
        CorpusSummary {
            files_by_category: files,
            methods,
            log_statements: self.log_statements + other.log_statements,
            logged_methods: logged,
            logged_ratio: ratio(logged, methods),
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Method, log-statement, and logged-method counts over production records.
pub fn summarize_corpus(records: &[MethodRecord]) -> CorpusSummary {
    let methods = records.len();
    let logged = records.iter().filter(|r| r.label).count();
    let logs = records.iter().map(|r| r.log_statements.len()).sum();
    CorpusSummary {
        files_by_category: BTreeMap::new(),
        methods,
        log_statements: logs,
        logged_methods: logged,
        logged_ratio: ratio(logged, methods),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextHistogram {
    pub counts: BTreeMap<String, usize>,
    pub total: usize,
}

impl ContextHistogram {
    pub fn get(&self, ctx: LogContext) -> usize {
        self.counts.get(ctx.as_str()).copied().unwrap_or(0)
    }
}

pub fn placement_context_histogram(records: &[MethodRecord]) -> ContextHistogram {
    let mut counts: BTreeMap<String, usize> = LogContext::ALL
        .iter()
        .map(|c| (c.as_str().to_string(), 0))
        .collect();
    let mut total = 0;
    for stmt in records.iter().flat_map(|r| r.log_statements.iter()) {
        *counts.entry(stmt.context.as_str().to_string()).or_default() += 1;
        total += 1;
    }
    ContextHistogram { counts, total }
}

/// Five-number summary of log statements per logged method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityQuantiles {
    pub min: usize,
    pub q1: usize,
    pub median: usize,
    pub q3: usize,
    pub max: usize,
}

/// Nearest-rank quantile of a sorted slice: the value at rank `ceil(p * n)`.
pub fn nearest_rank(sorted: &[usize], p: f64) -> usize {
    let n = sorted.len();
    let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// `None` when no method is logged.
pub fn log_density_distribution(records: &[MethodRecord]) -> Option<DensityQuantiles> {
    let mut counts: Vec<usize> = records
        .iter()
        .filter(|r| r.label)
        .map(|r| r.log_statements.len())
        .collect();
    if counts.is_empty() {
        return None;
    }
    counts.sort_unstable();
    Some(DensityQuantiles {
        min: counts[0],
        q1: nearest_rank(&counts, 0.25),
        median: nearest_rank(&counts, 0.5),
        q3: nearest_rank(&counts, 0.75),
        max: counts[counts.len() - 1],
    })
}

/// Keep projects whose logged ratio exceeds `min_ratio` and whose production
/// file count exceeds `min_files` (both strict).
pub fn select_projects(
    summaries: &[(String, CorpusSummary)],
    min_ratio: f64,
    min_files: usize,
) -> Vec<(String, CorpusSummary)> {
    summaries
        .iter()
        .filter(|(_, s)| s.logged_ratio > min_ratio && s.production_files() > min_files)
        .cloned()
        .collect()
}

pub const DEFAULT_MIN_RATIO: f64 = 0.04;
pub const DEFAULT_MIN_FILES: usize = 100;

/// Corpus report as written by the `scan` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub files_by_category: BTreeMap<String, usize>,
    pub methods: usize,
    pub log_statements: usize,
    pub logged_methods: usize,
    pub logged_ratio: f64,
    pub context_histogram: BTreeMap<String, usize>,
    pub density_quantiles: Option<DensityQuantiles>,
}

impl CorpusReport {
    pub fn build(discovery: &Discovery, records: &[MethodRecord]) -> Self {
        let summary = summarize_corpus(records);
        CorpusReport {
            files_by_category: discovery.files_by_category(),
            methods: summary.methods,
            log_statements: summary.log_statements,
            logged_methods: summary.logged_methods,
            logged_ratio: summary.logged_ratio,
            context_histogram: placement_context_histogram(records).counts,
            density_quantiles: log_density_distribution(records),
        }
    }

    pub fn summary(&self) -> CorpusSummary {
        CorpusSummary {
            files_by_category: self.files_by_category.clone(),
            methods: self.methods,
            log_statements: self.log_statements,
            logged_methods: self.logged_methods,
            logged_ratio: self.logged_ratio,
        }
    }
}
