//! Low-discrepancy point generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 4] = [2, 3, 5, 7];

/// Golden angle in radians.
pub const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Four-dimensional Halton sequence with a seeded Cranley-Patterson shift.
#[derive(Debug, Clone)]
pub struct Halton4 {
    shift: [f64; 4],
    index: u64,
}

impl Halton4 {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
        Self { shift, index: 1 }
    }

    /// Next point of the unit cube.
    pub fn next_unit(&mut self) -> [f64; 4] {
        let i = self.index;
        self.index += 1;
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = (radical_inverse(i, PRIMES[k]) + self.shift[k]).fract();
        }
        out
    }

    /// Next point of the box `lo[k] <= x[k] <= hi[k]`.
    pub fn next_in_box(&mut self, bbox: &[[f64; 2]; 4]) -> [f64; 4] {
        let u = self.next_unit();
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = bbox[k][0] + u[k] * (bbox[k][1] - bbox[k][0]);
        }
        out
    }
}

/// Sunflower (Vogel) spiral on the planar annulus `r_in <= |w| <= r_out`,
/// area-uniform. The seed sets a radial offset and a global rotation.
pub fn sunflower_annulus(n: usize, r_in: f64, r_out: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset: f64 = rng.gen();
    let rot: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    let (a, b) = (r_in * r_in, r_out * r_out);
    (0..n)
        .map(|i| {
            let r2 = a + (b - a) * ((i as f64 + offset) / n as f64);
            let phi = rot + GOLDEN_ANGLE * i as f64;
            let r = r2.sqrt();
            (r * phi.cos(), r * phi.sin())
        })
        .collect()
}
