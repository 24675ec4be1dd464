use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use logplace::java::{parse_unit, ClassKind, JavaUnit};
use logplace::metrics::{ClassCounts, HierarchyIndex, MethodCounts, UnitMetrics};
use logplace::pipeline::{extract_corpus, ExtractOptions};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
struct Expected {
    #[serde(rename = "type")]
    types: Vec<ExpectedType>,
    #[serde(rename = "method")]
    methods: Vec<ExpectedMethod>,
}

#[derive(Debug, Deserialize)]
struct ExpectedType {
    fqn: String,
    kind: ClassKind,
    metrics: BTreeMap<String, u64>,
}

#[derive(Debug, Deserialize)]
struct ExpectedMethod {
    class: String,
    signature: String,
    #[serde(default)]
    constructor: bool,
    metrics: BTreeMap<String, u64>,
}

/// Outcome of comparing extracted metrics with the hand-computed table.
#[derive(Debug, Default)]
pub struct OracleReport {
    pub types: usize,
    pub methods: usize,
    pub values: usize,
    pub mismatches: Vec<String>,
}

fn check_labels(what: &str, metrics: &BTreeMap<String, u64>, names: &[&str], out: &mut Vec<String>) {
    for key in metrics.keys() {
        if !names.contains(&key.as_str()) {
            out.push(format!("{what}: unknown metric {key}"));
        }
    }
}

fn full_vector(m: &ExpectedMethod, t: &ExpectedType) -> Vec<f64> {
    let mut v: Vec<f64> = MethodCounts::NAMES
        .iter()
        .map(|n| m.metrics.get(*n).copied().unwrap_or(0) as f64)
        .collect();
    v.extend(ClassCounts::NAMES.iter().map(|n| t.metrics.get(*n).copied().unwrap_or(0) as f64));
    v.push(if m.constructor { 0.0 } else { 1.0 });
    v.push(if m.constructor { 1.0 } else { 0.0 });
    v.extend(ClassKind::ALL.iter().map(|k| if *k == t.kind { 1.0 } else { 0.0 }));
    v
}

/// Compare every metric of every type and method under `root` with `expected.toml`.
pub fn run(root: &Path) -> OracleReport {
    let text = std::fs::read_to_string(root.join("expected.toml")).unwrap();
    let expected: Expected = toml::from_str(&text).unwrap();
    let mut report = OracleReport::default();
    let out = &mut report.mismatches;

    let mut units: Vec<JavaUnit> = Vec::new();
    let mut files: Vec<_> = std::fs::read_dir(root.join("sample"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    for path in files {
        let rel = format!("sample/{}", path.file_name().unwrap().to_str().unwrap());
        units.push(parse_unit(rel, std::fs::read_to_string(&path).unwrap()).unwrap());
    }
    let mut hierarchy = HierarchyIndex::new();
    for u in &units {
        hierarchy.add_unit(&u.structure());
    }

    let types: BTreeMap<&str, &ExpectedType> = expected.types.iter().map(|t| (t.fqn.as_str(), t)).collect();
    let methods: BTreeMap<(&str, &str), &ExpectedMethod> = expected
        .methods
        .iter()
        .map(|m| ((m.class.as_str(), m.signature.as_str()), m))
        .collect();
    let mut seen_types = BTreeSet::new();
    let mut seen_methods = BTreeSet::new();

    for unit in &units {
        let um = UnitMetrics::new(unit);
        for (i, t) in um.structure.types.iter().enumerate() {
            let Some(exp) = types.get(t.fqn.as_str()) else {
                out.push(format!("type {} has no expectation", t.fqn));
                continue;
            };
            seen_types.insert(t.fqn.clone());
            check_labels(&t.fqn, &exp.metrics, ClassCounts::NAMES, out);
            let got = um.class_metrics(i, &hierarchy);
            if got.class_kind != exp.kind {
                out.push(format!("{}: kind {:?}, expected {:?}", t.fqn, got.class_kind, exp.kind));
            }
            for name in ClassCounts::NAMES {
                let want = exp.metrics.get(*name).copied().unwrap_or(0);
                let have = got.counts.get(name).unwrap();
                report.values += 1;
                if want != have {
                    out.push(format!("{} {name}: got {have}, expected {want}", t.fqn));
                }
            }
        }
        for (i, m) in um.structure.methods.iter().enumerate() {
            let fqn = um.structure.types[m.type_index].fqn.clone();
            let Some(exp) = methods.get(&(fqn.as_str(), m.signature.as_str())) else {
                out.push(format!("method {fqn}#{} has no expectation", m.signature));
                continue;
            };
            seen_methods.insert((fqn.clone(), m.signature.clone()));
            let what = format!("{fqn}#{}", m.signature);
            check_labels(&what, &exp.metrics, MethodCounts::NAMES, out);
            let got = um.method_metrics(i);
            if got.is_constructor != exp.constructor {
                out.push(format!("{what}: constructor flag {}", got.is_constructor));
            }
            for name in MethodCounts::NAMES {
                let want = exp.metrics.get(*name).copied().unwrap_or(0);
                let have = got.counts.get(name).unwrap();
                report.values += 1;
                if want != have {
                    out.push(format!("{what} {name}: got {have}, expected {want}"));
                }
            }
        }
    }
    for t in &expected.types {
        if !seen_types.contains(&t.fqn) {
            out.push(format!("expected type {} not found", t.fqn));
        }
    }
    for m in &expected.methods {
        if !seen_methods.contains(&(m.class.clone(), m.signature.clone())) {
            out.push(format!("expected method {}#{} not found", m.class, m.signature));
        }
    }

    let extraction = extract_corpus(root, &ExtractOptions::default()).unwrap();
    if extraction.rows.len() != expected.methods.len() {
        out.push(format!(
            "dataset has {} rows, expected {}",
            extraction.rows.len(),
            expected.methods.len()
        ));
    }
    for row in &extraction.rows {
        let key = (row.id.class_fqn.as_str(), row.id.signature.as_str());
        let (Some(m), Some(t)) = (methods.get(&key), types.get(key.0)) else {
            out.push(format!("row {} has no expectation", row.id));
            continue;
        };
        if row.values != full_vector(m, t) {
            out.push(format!("row {} differs from the expected 68-slot vector", row.id));
        }
        if row.label {
            out.push(format!("row {} labelled as logged", row.id));
        }
    }

    report.types = seen_types.len();
    report.methods = seen_methods.len();
    report
}
