//! Counter-based random number streams.
//!
//! Reproducibility contract: identical (seed, stream, counter) produces an
//! identical draw sequence bit-for-bit, and distinct stream indices give
//! statistically independent sequences. Backed by ChaCha12, whose 64-bit
//! stream field and seekable word position provide exactly that interface.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// SplitMix64 finalizer, used to derive child stream indices from labels.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A named, seekable random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, stream: 0 }
    }

    /// Derive an independent child stream. Chaining labels walks a tree of
    /// streams, so `(seed, [labels...])` addresses a unique generator.
    pub fn substream(&self, label: u64) -> Self {
        RngStream {
            seed: self.seed,
            stream: mix64(self.stream ^ mix64(label.wrapping_add(0xa076_1d64_78bd_642f))),
        }
    }

    /// Generator positioned at counter 0.
    pub fn rng(&self) -> ChaCha12Rng {
        self.rng_at(0)
    }

    /// Generator positioned at an explicit word counter.
    pub fn rng_at(&self, counter: u128) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        let mut s = self.seed;
        for chunk in key.chunks_mut(8) {
            s = mix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(self.stream);
        rng.set_word_pos(counter);
        rng
    }
}

/// Uniform draw in (0, 1); never returns 0 so logs are safe.
pub fn uniform_open01<R: RngCore>(rng: &mut R) -> f64 {
    loop {
        // 53-bit mantissa uniform in [0,1)
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
        if u > 0.0 {
            return u;
        }
    }
}

/// Standard exponential via inversion.
pub fn exponential<R: RngCore>(rng: &mut R) -> f64 {
    -uniform_open01(rng).ln()
}

/// Standard normal via Marsaglia polar (second value discarded).
pub fn normal<R: RngCore>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * uniform_open01(rng) - 1.0;
        let v = 2.0 * uniform_open01(rng) - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Poisson draw. Knuth product for small means, PTRS transformed
/// rejection (Hoermann) for large ones.
pub fn poisson<R: RngCore>(rng: &mut R, lambda: f64) -> u64 {
    assert!(lambda >= 0.0 && lambda.is_finite(), "poisson mean must be finite and >= 0");
    if lambda == 0.0 {
        return 0;
    }
    if lambda < 30.0 {
        let limit = (-lambda).exp();
        let mut k = 0u64;
        let mut prod = uniform_open01(rng);
        while prod > limit {
            k += 1;
            prod *= uniform_open01(rng);
        }
        return k;
    }
    // PTRS (Hoermann 1993), exact for lambda >= 10.
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = uniform_open01(rng) - 0.5;
        let v = uniform_open01(rng);
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -lambda + k * loglam - ln_factorial(k as u64);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// ln(k!) via Stirling series for large k, exact table below 16.
fn ln_factorial(k: u64) -> f64 {
    const TABLE: [f64; 16] = [
        0.0,
        0.0,
        0.6931471805599453,
        1.791759469228055,
        3.1780538303479458,
        4.787491742782046,
        6.579251212010101,
        8.525161361065415,
        10.60460290274525,
        12.801827480081469,
        15.104412573075516,
        17.502307845873887,
        19.987214495661885,
        22.552163853123425,
        25.19122118493434,
        27.89927138384089,
    ];
    if (k as usize) < TABLE.len() {
        return TABLE[k as usize];
    }
    let x = (k + 1) as f64;
    (x - 0.5) * x.ln() - x + 0.9189385332046727
        + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x * x)
}
