//! Named seed derivation.
//!
//! Every random stream in the pipeline is derived from the single experiment
//! seed plus a component label and a counter, so adding a component never
//! perturbs the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn derive_seed(master: u64, label: &str, counter: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(counter.to_le_bytes());
    let digest = h.finalize();
    let mut buf = [0u8; 8];
    buf.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(buf)
}

pub fn rng_for(master: u64, label: &str, counter: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, label, counter))
}
