//! Seeded random streams.
//!
//! Every stream is a `ChaCha8Rng` keyed by the master seed (expanded with
//! `seed_from_u64`) and selecting a 64-bit ChaCha stream id. Two streams with
//! the same master seed but different ids never overlap, and the mapping is
//! independent of platform and of the order in which streams are created.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Well-known stream ids. Units take `UNIT_BASE + index`.
pub mod streams {
    pub const WORKFLOWS: u64 = 1;
    pub const REPLAY: u64 = 2;
    pub const ENV_SAMPLING: u64 = 3;
    pub const PERTURB: u64 = 4;
    pub const META_INIT: u64 = 5;
    pub const UNIT_INIT_BASE: u64 = 0x100;
    pub const UNIT_POLICY_BASE: u64 = 0x200;
}

#[derive(Debug, Clone)]
pub struct RandomStream(ChaCha8Rng);

impl RandomStream {
    pub fn new(master: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        rng.set_stream(stream);
        Self(rng)
    }

    /// Uniform draw from the closed range `[lo, hi]`; degenerate ranges return `lo`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            // consume a draw anyway so stream positions do not depend on range widths
            let _: f64 = self.0.gen();
            lo
        } else {
            self.0.gen_range(lo..=hi)
        }
    }

    pub fn unit(&mut self) -> f64 {
        self.0.gen()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }

    pub fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.0
    }
}

/// Derives a child master seed for an experiment cell, e.g. `(setting, seed)`.
///
/// SplitMix64 finalizer applied to `master ^ (salt * golden)`.
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    let mut z = master ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
