use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ComplexVec;
use crate::error::{domain, Result};

/// Generator behind every [`RandomStream`]: ChaCha8 keyed by the master
/// seed, with the substream index selecting the ChaCha stream.
pub type StreamRng = ChaCha8Rng;

/// Immutable descriptor of a counter-based random stream.
///
/// The pair `(master_seed, substream_index)` fixes the ChaCha key and stream
/// id, and a draw is addressed by its word position inside that stream.
/// Nothing depends on which thread consumes the stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub master_seed: u64,
    pub substream_index: u64,
}

const fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(master_seed: u64, substream_index: u64) -> Self {
        Self { master_seed, substream_index }
    }

    /// Root stream of a seed.
    pub fn root(master_seed: u64) -> Self {
        Self::new(master_seed, 0)
    }

    /// Derived substream for the `index`-th child task.
    ///
    /// Children of distinct parents or distinct indices land on distinct
    /// 64-bit stream ids except with negligible probability.
    pub fn child(&self, index: u64) -> Self {
        let id = splitmix64(self.substream_index ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F)));
        Self::new(self.master_seed, id)
    }

    /// Generator positioned at the first draw of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.substream_index);
        rng
    }

    /// Generator positioned at 32-bit word `word_pos` of this stream.
    pub fn rng_at(&self, word_pos: u128) -> StreamRng {
        let mut rng = self.rng();
        rng.set_word_pos(word_pos);
        rng
    }
}

/// Fills `out` with complex Gaussians whose real and imaginary parts are
/// i.i.d. `N(0, var)`. Two normal draws are consumed per entry even when
/// `var == 0`, so streams stay aligned across noise levels.
pub fn fill_gaussian(rng: &mut StreamRng, out: &mut [Complex64], var: f64) {
    let sd = var.sqrt();
    for z in out.iter_mut() {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        *z = if var == 0.0 { Complex64::new(0.0, 0.0) } else { Complex64::new(sd * a, sd * b) };
    }
}

/// First `n` complex Gaussians of `stream` with per-quadrature variance `var`.
pub fn gaussian_complex(stream: RandomStream, n: usize, var: f64) -> Result<ComplexVec> {
    if !(var >= 0.0) || !var.is_finite() {
        return Err(domain(format!("variance must be finite and nonnegative, got {var}")));
    }
    if n == 0 {
        return Err(domain("n must be positive"));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    fill_gaussian(&mut stream.rng(), &mut out, var);
    ComplexVec::new(out)
}
