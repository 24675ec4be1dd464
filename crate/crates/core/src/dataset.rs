//! Feature datasets: CSV round-trip, stratified splitting and folding.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::java::MethodId;
use crate::metrics::{schema, FeatureVector, FEATURE_COUNT};
use crate::provenance::Provenance;
use crate::rng::rng_for;

pub const INDEX_COLUMNS: [&str; 3] = ["file_path", "class_fqn", "method_signature"];
pub const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub provenance: Provenance,
    rows: Vec<FeatureVector>,
}

impl Dataset {
    /// Validate dimensionality, finiteness and identity uniqueness.
    pub fn new(provenance: Provenance, rows: Vec<FeatureVector>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &rows {
            if r.values.len() != FEATURE_COUNT {
                return Err(Error::SchemaMismatch {
                    expected: format!("{FEATURE_COUNT} features"),
                    found: format!("{} features in row {}", r.values.len(), r.id),
                });
            }
            if let Some(v) = r.values.iter().find(|v| !v.is_finite()) {
                return Err(Error::data(format!("non-finite value {v} in row {}", r.id)));
            }
            if !seen.insert(&r.id) {
                return Err(Error::data(format!("duplicate row identity {}", r.id)));
            }
        }
        Ok(Dataset { provenance, rows })
    }

    pub fn schema_hash(&self) -> &str {
        &self.provenance.schema_hash
    }

    pub fn rows(&self) -> &[FeatureVector] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn positives(&self) -> usize {
        self.rows.iter().filter(|r| r.label).count()
    }

    pub fn prevalence(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            self.positives() as f64 / self.rows.len() as f64
        }
    }

    pub fn features(&self) -> Vec<&[f64]> {
        self.rows.iter().map(|r| r.values.as_slice()).collect()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            provenance: self.provenance.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Concatenate datasets sharing one schema; identities must stay unique.
    pub fn concat(parts: &[&Dataset]) -> Result<Dataset> {
        let first = parts
            .first()
            .ok_or_else(|| Error::data("cannot concatenate zero datasets"))?;
        let mut rows = Vec::new();
        for p in parts {
            if p.schema_hash() != first.schema_hash() {
                return Err(Error::SchemaMismatch {
                    expected: first.schema_hash().to_string(),
                    found: p.schema_hash().to_string(),
                });
            }
            rows.extend(p.rows.iter().cloned());
        }
        Dataset::new(first.provenance.clone(), rows)
    }

    pub fn ids(&self) -> BTreeSet<&MethodId> {
        self.rows.iter().map(|r| &r.id).collect()
    }
}

fn header() -> Vec<String> {
    let mut h: Vec<String> = INDEX_COLUMNS.iter().map(|s| s.to_string()).collect();
    h.extend(schema().names().into_iter().map(str::to_string));
    h.push(LABEL_COLUMN.to_string());
    h
}

pub fn write_dataset_to<W: Write>(d: &Dataset, out: W) -> Result<()> {
    let mut out = out;
    let p = &d.provenance;
    let preamble = format!(
        "# tool: {}\n# schema_hash: {}\n# config_hash: {}\n# seed: {}\n",
        p.tool, p.schema_hash, p.config_hash, p.seed
    );
    let io = |e: std::io::Error| Error::io("<dataset>", e);
    out.write_all(preamble.as_bytes()).map_err(io)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| Error::data(format!("writing dataset: {e}"));
    w.write_record(header()).map_err(csv_err)?;
    for r in &d.rows {
        let mut rec: Vec<String> = vec![
            r.id.file_path.clone(),
            r.id.class_fqn.clone(),
            r.id.signature.clone(),
        ];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        rec.push(if r.label { "1" } else { "0" }.to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn write_dataset(d: &Dataset, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_dataset_to(d, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Parse a dataset. `expected_schema` defaults to the current schema hash.
pub fn parse_dataset(text: &str, expected_schema: Option<&str>) -> Result<Dataset> {
    let mut fields = std::collections::BTreeMap::new();
    let mut body_start = 0;
    let mut preamble_lines = 0;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.strip_prefix('#') else { break };
        if let Some((k, v)) = rest.trim().split_once(':') {
            fields.insert(k.trim().to_string(), v.trim().to_string());
        }
        body_start += line.len();
        preamble_lines += 1;
    }
    let get = |k: &str| {
        fields
            .get(k)
            .cloned()
            .ok_or_else(|| Error::Malformed {
                line: 1,
                message: format!("missing provenance field '{k}'"),
            })
    };
    let seed = get("seed")?.parse::<u64>().map_err(|e| Error::Malformed {
        line: preamble_lines,
        message: format!("bad seed: {e}"),
    })?;
    let provenance = Provenance {
        tool: get("tool")?,
        schema_hash: get("schema_hash")?,
        config_hash: get("config_hash")?,
        seed,
    };
    let expected = expected_schema.unwrap_or(schema().hash.as_str());
    if provenance.schema_hash != expected {
        return Err(Error::SchemaMismatch {
            expected: expected.to_string(),
            found: provenance.schema_hash,
        });
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text[body_start..].as_bytes());
    let header_line = preamble_lines + 1;
    let found: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Malformed {
            line: header_line,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let want = header();
    if found != want {
        return Err(Error::SchemaMismatch {
            expected: format!("{} columns ({} features)", want.len(), FEATURE_COUNT),
            found: format!(
                "{} columns ({} features)",
                found.len(),
                found.len().saturating_sub(INDEX_COLUMNS.len() + 1)
            ),
        });
    }

    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = header_line + 1 + i;
        let rec = rec.map_err(|e| Error::Malformed {
            line,
            message: e.to_string(),
        })?;
        if rec.len() != want.len() {
            return Err(Error::Malformed {
                line,
                message: format!("expected {} fields, found {}", want.len(), rec.len()),
            });
        }
        let mut values = Vec::with_capacity(FEATURE_COUNT);
        for (j, field) in rec.iter().skip(INDEX_COLUMNS.len()).take(FEATURE_COUNT).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Malformed {
                line,
                message: format!("column '{}': not a number: {field:?}", want[j + 3]),
            })?;
            values.push(v);
        }
        let label = match &rec[want.len() - 1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Malformed {
                    line,
                    message: format!("label must be 0 or 1, found {other:?}"),
                })
            }
        };
        rows.push(FeatureVector {
            id: MethodId {
                file_path: rec[0].to_string(),
                class_fqn: rec[1].to_string(),
                signature: rec[2].to_string(),
            },
            values,
            label,
        });
    }
    Dataset::new(provenance, rows)
}

pub fn read_dataset(path: &Path, expected_schema: Option<&str>) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, expected_schema)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    #[default]
    TrainTest,
    KFold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub kind: SplitKind,
    pub k: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.2,
            seed: 0,
            kind: SplitKind::TrainTest,
            k: 5,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::config(format!(
                "test_fraction must be in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.k < 2 {
            return Err(Error::config(format!("k must be at least 2, got {}", self.k)));
        }
        Ok(())
    }
}

fn class_indices(labels: &[bool]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        out[l as usize].push(i);
    }
    out
}

/// Per-class test counts by largest-remainder rounding of `n_c × fraction`,
/// summing to `round(n × fraction)`.
pub fn largest_remainder_counts(class_sizes: &[usize], fraction: f64) -> Vec<usize> {
    let n: usize = class_sizes.iter().sum();
    let total = (n as f64 * fraction).round() as usize;
    let exact: Vec<f64> = class_sizes.iter().map(|&c| c as f64 * fraction).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &c in order.iter().take(total.saturating_sub(assigned)) {
        counts[c] = (counts[c] + 1).min(class_sizes[c]);
    }
    counts
}

/// Stratified train/test indices, each sorted ascending.
pub fn stratified_split_indices(
    labels: &[bool],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let classes = class_indices(labels);
    for (c, rows) in classes.iter().enumerate() {
        if rows.len() < 2 {
            return Err(Error::data(format!(
                "cannot stratify: class {c} has {} row(s)",
                rows.len()
            )));
        }
    }
    let counts = largest_remainder_counts(&[classes[0].len(), classes[1].len()], test_fraction);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, mut rows) in classes.into_iter().enumerate() {
        rows.shuffle(&mut rng_for(seed, "split", c as u64));
        test.extend_from_slice(&rows[..counts[c]]);
        train.extend_from_slice(&rows[counts[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let (train, test) = stratified_split_indices(&d.labels(), spec.test_fraction, spec.seed)?;
    Ok((d.subset(&train), d.subset(&test)))
}

/// `k` disjoint folds (sorted indices) covering every row. Each class is
/// shuffled, then dealt round-robin with one counter running across both
/// classes, so fold sizes differ by at most one.
pub fn stratified_kfold_indices(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::config(format!("k must be at least 2, got {k}")));
    }
    let classes = class_indices(labels);
    for (c, rows) in classes.iter().enumerate() {
        if rows.len() < k {
            return Err(Error::data(format!(
                "cannot build {k} stratified folds: class {c} has {} row(s)",
                rows.len()
            )));
        }
    }
    let mut folds = vec![Vec::new(); k];
    let mut counter = 0usize;
    for (c, mut rows) in classes.into_iter().enumerate().rev() {
        rows.shuffle(&mut rng_for(seed, "kfold", c as u64));
        for i in rows {
            folds[counter % k].push(i);
            counter += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

pub fn stratified_kfold(d: &Dataset, k: usize, seed: u64) -> Result<Vec<Dataset>> {
    Ok(stratified_kfold_indices(&d.labels(), k, seed)?
        .iter()
        .map(|f| d.subset(f))
        .collect())
}

/// Persisted record of a test partition, reused across experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub provenance: Provenance,
    pub test_fraction: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub test_ids: Vec<MethodId>,
}

impl SplitManifest {
    pub fn new(provenance: Provenance, spec: &SplitSpec, train: &Dataset, test: &Dataset) -> Self {
        let mut test_ids: Vec<MethodId> = test.rows.iter().map(|r| r.id.clone()).collect();
        test_ids.sort();
        SplitManifest {
            provenance,
            test_fraction: spec.test_fraction,
            train_rows: train.len(),
            test_rows: test.len(),
            test_ids,
        }
    }

    /// Re-create the (train, test) partition of `d` recorded by this manifest.
    pub fn apply(&self, d: &Dataset) -> Result<(Dataset, Dataset)> {
        if d.schema_hash() != self.provenance.schema_hash {
            return Err(Error::SchemaMismatch {
                expected: self.provenance.schema_hash.clone(),
                found: d.schema_hash().to_string(),
            });
        }
        let wanted: BTreeSet<&MethodId> = self.test_ids.iter().collect();
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (i, r) in d.rows.iter().enumerate() {
            if wanted.contains(&r.id) {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        if test.len() != self.test_ids.len() {
            return Err(Error::data(format!(
                "split manifest lists {} test rows but only {} exist in the dataset",
                self.test_ids.len(),
                test.len()
            )));
        }
        Ok((d.subset(&train), d.subset(&test)))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Malformed {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, positives: usize) -> Dataset {
        let rows = (0..n)
            .map(|i| FeatureVector {
                id: MethodId {
                    file_path: format!("F{}.java", i / 10),
                    class_fqn: "p.C".into(),
                    signature: format!("m{i}()"),
                },
                values: (0..FEATURE_COUNT).map(|j| (i * j) as f64 / 7.0).collect(),
                label: i < positives,
            })
            .collect();
        Dataset::new(Provenance::new("cfg", 7), rows).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let d = toy(25, 4);
        let mut buf = Vec::new();
        write_dataset_to(&d, &mut buf).unwrap();
        let back = parse_dataset(std::str::from_utf8(&buf).unwrap(), None).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn wrong_schema_hash_is_rejected() {
        let d = toy(3, 1);
        let mut buf = Vec::new();
        write_dataset_to(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(matches!(
            parse_dataset(&text, Some("0000")),
            Err(Error::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn malformed_row_reports_line() {
        let d = toy(3, 1);
        let mut buf = Vec::new();
        write_dataset_to(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("0.14285714285714285", "x", 1);
        match parse_dataset(&text, None) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn largest_remainder_example() {
        let counts = largest_remainder_counts(&[923, 77], 0.2);
        assert_eq!(counts.iter().sum::<usize>(), 200);
        assert!(counts[1] == 15 || counts[1] == 16);
    }

    #[test]
    fn kfold_exact_counts() {
        let d = toy(100, 10);
        let folds = stratified_kfold(&d, 5, 3).unwrap();
        for f in folds {
            assert_eq!(f.len(), 20);
            assert_eq!(f.positives(), 2);
        }
    }

    #[test]
    fn split_needs_two_rows_per_class() {
        let d = toy(10, 1);
        assert!(stratified_split(&d, &SplitSpec::default()).is_err());
    }

    #[test]
    fn manifest_reproduces_partition() {
        let d = toy(50, 10);
        let spec = SplitSpec::default();
        let (train, test) = stratified_split(&d, &spec).unwrap();
        let m = SplitManifest::new(d.provenance.clone(), &spec, &train, &test);
        let (train2, test2) = m.apply(&d).unwrap();
        assert_eq!((train, test), (train2, test2));
    }
}
