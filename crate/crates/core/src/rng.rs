//! Counter-based Gaussian random numbers.
//!
//! Every random draw in the crate is addressed by a triple
//! `(master_seed, stream_id, counter)` and evaluated as a pure function of
//! that triple. Nothing depends on call order, so evaluating probes, rows or
//! trials on any number of threads yields bit-identical results.
//!
//! The generator is a keyed SplitMix64 counter mode:
//!
//! ```text
//! key    = mix(mix(seed ^ K0) ^ stream * K1)
//! salt   = mix(stream ^ K2)
//! word_i = mix(mix(key + i * GOLDEN) ^ salt)        i = 2 * counter + lane
//! ```
//!
//! where `mix` is the SplitMix64 finalizer. A normal variate uses the two
//! lanes of one counter through the cosine branch of Box-Muller. `ln` and
//! `cos` come from `libm`, so values do not depend on the platform libm.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const K0: u64 = 0x6A09_E667_F3BC_C908;
const K1: u64 = 0xD1B5_4A32_D192_ED03;
const K2: u64 = 0xBB67_AE85_84CA_A73B;
const TWO_POW_M53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// Stream identifiers, one per purpose.
pub mod streams {
    pub const BASIS: u64 = 1;
    pub const CENTERS: u64 = 2;
    pub const SAMPLE_COMPONENT: u64 = 3;
    pub const SAMPLE_COEFF: u64 = 4;
    pub const LAYER: u64 = 5;
    pub const PROBE: u64 = 6;
    pub const SHUFFLE: u64 = 7;
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn stream_key(seed: u64, stream: u64) -> (u64, u64) {
    let key = mix64(mix64(seed ^ K0) ^ stream.wrapping_mul(K1));
    let salt = mix64(stream ^ K2);
    (key, salt)
}

#[inline]
fn word(key: u64, salt: u64, index: u64) -> u64 {
    mix64(mix64(key.wrapping_add(index.wrapping_mul(GOLDEN))) ^ salt)
}

/// Raw 64-bit word for `(seed, stream, counter)`.
pub fn bits_at(seed: u64, stream: u64, counter: u64) -> u64 {
    let (key, salt) = stream_key(seed, stream);
    word(key, salt, counter.wrapping_mul(2))
}

/// Uniform variate in `[0, 1)` with 53 bits of resolution.
pub fn uniform_at(seed: u64, stream: u64, counter: u64) -> f64 {
    (bits_at(seed, stream, counter) >> 11) as f64 * TWO_POW_M53
}

/// Standard normal variate for `(seed, stream, counter)`.
pub fn gaussian_at(seed: u64, stream: u64, counter: u64) -> f64 {
    let (key, salt) = stream_key(seed, stream);
    gaussian_keyed(key, salt, counter)
}

#[inline]
fn gaussian_keyed(key: u64, salt: u64, counter: u64) -> f64 {
    let i = counter.wrapping_mul(2);
    // u1 in (0, 1] keeps the log finite
    let u1 = ((word(key, salt, i) >> 11) + 1) as f64 * TWO_POW_M53;
    let u2 = (word(key, salt, i.wrapping_add(1)) >> 11) as f64 * TWO_POW_M53;
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * std::f64::consts::PI * u2)
}

/// Derives an independent child seed, e.g. per trial or per replicate.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master ^ K2).wrapping_add(index.wrapping_mul(GOLDEN)) ^ K0)
}

/// A Gaussian stream addressed by counter.
///
/// `counter` is the base offset; [`GaussianStream::at`] reads relative to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianStream {
    pub master_seed: u64,
    pub stream_id: u64,
    pub counter: u64,
    key: u64,
    salt: u64,
}

impl GaussianStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self::with_offset(master_seed, stream_id, 0)
    }

    pub fn with_offset(master_seed: u64, stream_id: u64, counter: u64) -> Self {
        let (key, salt) = stream_key(master_seed, stream_id);
        Self {
            master_seed,
            stream_id,
            counter,
            key,
            salt,
        }
    }

    #[inline]
    pub fn at(&self, index: u64) -> f64 {
        gaussian_keyed(self.key, self.salt, self.counter.wrapping_add(index))
    }

    /// Fills `out[i]` with the variate at `start + i`.
    pub fn fill(&self, start: u64, out: &mut [f64]) {
        for (i, v) in out.iter_mut().enumerate() {
            *v = self.at(start.wrapping_add(i as u64));
        }
    }
}
