//! Provenance stamped into every output file.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::metrics::schema_hash;

pub const TOOL: &str = concat!("logplace ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub schema_hash: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Provenance {
            tool: TOOL.to_string(),
            schema_hash: schema_hash().to_string(),
            config_hash: config_hash.into(),
            seed,
        }
    }
}

/// Short hex digest of arbitrary bytes (configs, canonical option strings).
pub fn content_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    hex::encode(&digest[..16])
}

/// JSON with a trailing newline, keys in declaration/sorted order.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}
