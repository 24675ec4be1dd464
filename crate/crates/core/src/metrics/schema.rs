//! Canonical feature schema: 23 method counts, 38 class counts, a two-slot
//! constructor one-hot and a five-slot class-type one-hot.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ClassCounts, MethodCounts};
use crate::java::ClassKind;

pub const FEATURE_COUNT: usize = 68;
pub const METHOD_PREFIX: &str = "method_";
pub const CLASS_PREFIX: &str = "class_";
pub const CONSTRUCTOR_SLOTS: [&str; 2] = ["constructor_False", "constructor_True"];
pub const CLASS_TYPE_SLOTS: [&str; 5] = [
    "type_class",
    "type_inner_class",
    "type_interface",
    "type_enum",
    "type_anonymous",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Method,
    Class,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub scope: Scope,
    /// `count`, `lines`, or `one_hot:<metric>`.
    pub encoding: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub version: u32,
    pub hash: String,
    pub features: Vec<FeatureSpec>,
}

impl FeatureSchema {
    pub fn names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes") + "\n"
    }
}

/// Hash of an ordered feature-name list; datasets and models carry it.
pub fn hash_names<S: AsRef<str>>(names: &[S]) -> String {
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_ref().as_bytes());
        h.update(b"\n");
    }
    hex::encode(&h.finalize()[..16])
}

pub fn schema() -> &'static FeatureSchema {
    static SCHEMA: OnceLock<FeatureSchema> = OnceLock::new();
    SCHEMA.get_or_init(build)
}

pub fn schema_hash() -> &'static str {
    &schema().hash
}

fn build() -> FeatureSchema {
    let mut features = Vec::with_capacity(FEATURE_COUNT);
    let enc = |label: &str| if label == "SLOC" { "lines" } else { "count" };
    for label in MethodCounts::NAMES {
        features.push(FeatureSpec {
            name: format!("{METHOD_PREFIX}{label}"),
            scope: Scope::Method,
            encoding: enc(label).into(),
        });
    }
    for label in ClassCounts::NAMES {
        features.push(FeatureSpec {
            name: format!("{CLASS_PREFIX}{label}"),
            scope: Scope::Class,
            encoding: enc(label).into(),
        });
    }
    for name in CONSTRUCTOR_SLOTS {
        features.push(FeatureSpec {
            name: name.into(),
            scope: Scope::Method,
            encoding: "one_hot:isConstructor".into(),
        });
    }
    for name in CLASS_TYPE_SLOTS {
        features.push(FeatureSpec {
            name: name.into(),
            scope: Scope::Class,
            encoding: "one_hot:classType".into(),
        });
    }
    assert_eq!(features.len(), FEATURE_COUNT);
    let names: Vec<&str> = features.iter().map(|f| f.name.as_str()).collect();
    FeatureSchema {
        version: 1,
        hash: hash_names(&names),
        features,
    }
}

/// Slot offset of the constructor one-hot block.
pub const CONSTRUCTOR_OFFSET: usize = 61;
pub const CLASS_TYPE_OFFSET: usize = 63;

pub fn class_type_slot(kind: ClassKind) -> usize {
    CLASS_TYPE_OFFSET + kind.index()
}

/// Indices of the one-hot slots; every other slot is a numeric count.
pub fn is_one_hot_slot(index: usize) -> bool {
    index >= CONSTRUCTOR_OFFSET
}
