//! Seed management.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded by a
//! [`Seed`]. A run has one root seed; stages derive their own seed from the
//! root and a stage label, so adding or reordering stages never shifts the
//! stream of another stage.
//!
//! Derivation: `child = first 8 bytes (little endian) of
//! SHA-256(parent.to_le_bytes() || label)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn derive(self, label: &str) -> Seed {
        let mut hasher = Sha256::new();
        hasher.update(self.0.to_le_bytes());
        hasher.update(label.as_bytes());
        let digest = hasher.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        Seed(u64::from_le_bytes(bytes))
    }

    pub fn derive_indexed(self, label: &str, index: u64) -> Seed {
        self.derive(&format!("{label}/{index}"))
    }

    pub fn rng(self) -> Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}
