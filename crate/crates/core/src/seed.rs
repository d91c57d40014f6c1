//! Seed splitting.
//!
//! Every random stream in a run is derived from one master seed and a
//! component name: `seed = first 8 bytes (LE) of SHA-256(master_le || name)`.
//! Adding a new component therefore never shifts the stream of an existing
//! one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn derive_seed(master: u64, component: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(component.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn component_rng(master: u64, component: &str) -> Rng {
    rng_from(derive_seed(master, component))
}
