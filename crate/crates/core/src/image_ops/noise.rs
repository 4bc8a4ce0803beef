//! Counter-based random draws. Every value is a pure function of
//! `(seed, image index, element index, draw index)`, so results do not depend
//! on iteration order or thread count.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub(crate) fn new(seed: u64, image_index: u64) -> Self {
        Self {
            key: splitmix64(splitmix64(seed) ^ image_index.wrapping_mul(GOLDEN)),
        }
    }

    #[inline]
    pub(crate) fn bits(&self, element: u64, draw: u64) -> u64 {
        splitmix64(splitmix64(self.key ^ element) ^ draw.wrapping_mul(0xd6e8_feb8_6659_fd93))
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub(crate) fn uniform(&self, element: u64, draw: u64) -> f64 {
        (self.bits(element, draw) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller on draws `2*draw` and `2*draw + 1`.
    #[inline]
    pub(crate) fn normal(&self, element: u64, draw: u64) -> f64 {
        let u1 = 1.0 - self.uniform(element, 2 * draw);
        let u2 = self.uniform(element, 2 * draw + 1);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Mean below which Poisson draws use exact inversion; above it a rounded
/// normal approximation is used.
pub const POISSON_INVERSION_LIMIT: f64 = 10.0;

pub(crate) fn poisson(mean: f64, rng: &CounterRng, element: u64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    if mean < POISSON_INVERSION_LIMIT {
        let u = rng.uniform(element, 0);
        let mut k = 0u32;
        let mut pmf = (-mean).exp();
        let mut cdf = pmf;
        // the cap only matters when roundoff keeps cdf below u
        while u > cdf && k < 1000 {
            k += 1;
            pmf *= mean / k as f64;
            cdf += pmf;
        }
        k as f64
    } else {
        (mean + mean.sqrt() * rng.normal(element, 1)).round().max(0.0)
    }
}
