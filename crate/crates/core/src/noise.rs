//! Counter-based Gaussian lattice `ε_{j,k}`.
//!
//! Each value is a pure function of `(seed, j, k)`, so the processes `X`
//! and `Z` read identical coefficients and synthesis can run in any order.
//!
//! Counter scheme: a Philox4x32-10 block is keyed by the 64-bit seed and
//! addressed by the 128-bit counter `(zigzag(j), zigzag(⌊k/2⌋))`, each half
//! little-endian in two 32-bit words. The block's four words become two
//! uniforms `u₁ ∈ (0, 1]`, `u₂ ∈ [0, 1)` (53 bits each) and a Box–Muller
//! pair; `k mod 2 = 0` takes the cosine branch, `k mod 2 = 1` the sine
//! branch. `zigzag(n) = (n << 1) ^ (n >> 63)`.

use std::f64::consts::TAU;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// Philox4x32 with 10 rounds.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let p0 = u64::from(PHILOX_M0) * u64::from(c[0]);
        let p1 = u64::from(PHILOX_M1) * u64::from(c[2]);
        let (hi0, lo0) = ((p0 >> 32) as u32, p0 as u32);
        let (hi1, lo1) = ((p1 >> 32) as u32, p1 as u32);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

pub fn zigzag(n: i64) -> u64 {
    ((n << 1) ^ (n >> 63)) as u64
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoiseLattice {
    seed: u64,
    key: [u32; 2],
}

impl NoiseLattice {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            key: [seed as u32, (seed >> 32) as u32],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent lattice for Monte Carlo replicate `r`, keyed by
    /// `splitmix64(seed ^ splitmix64(r))`.
    pub fn replicate(&self, r: u64) -> Self {
        Self::new(splitmix64(self.seed ^ splitmix64(r)))
    }

    fn pair(&self, j: i64, half_k: i64) -> (f64, f64) {
        let cj = zigzag(j);
        let ck = zigzag(half_k);
        let out = philox4x32([cj as u32, (cj >> 32) as u32, ck as u32, (ck >> 32) as u32], self.key);
        let a = (u64::from(out[1]) << 32) | u64::from(out[0]);
        let b = (u64::from(out[3]) << 32) | u64::from(out[2]);
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        (r * c, r * s)
    }

    /// `ε_{j,k}`.
    pub fn epsilon(&self, j: i64, k: i64) -> f64 {
        let (c, s) = self.pair(j, k.div_euclid(2));
        if k.rem_euclid(2) == 0 {
            c
        } else {
            s
        }
    }

    /// Writes `ε_{j,k}` for `k = k_start, k_start + 1, …` into `out`.
    pub fn fill(&self, j: i64, k_start: i64, out: &mut [f64]) {
        let mut idx = 0;
        let mut k = k_start;
        while idx < out.len() {
            let (c, s) = self.pair(j, k.div_euclid(2));
            if k.rem_euclid(2) == 0 {
                out[idx] = c;
                if idx + 1 < out.len() {
                    out[idx + 1] = s;
                }
                idx += 2;
                k += 2;
            } else {
                out[idx] = s;
                idx += 1;
                k += 1;
            }
        }
    }

    /// Counts `|ε_{j,k}| > c·√log(3 + |j| + |k|)` over `|j|, |k| ≤ n` and
    /// returns it with the largest ratio `|ε_{j,k}| / √log(3 + |j| + |k|)`.
    pub fn envelope(&self, n: i64, c: f64) -> (u64, f64) {
        let len = (2 * n + 1) as usize;
        let mut buf = vec![0.0; len];
        let mut exceed = 0;
        let mut sup: f64 = 0.0;
        for j in -n..=n {
            self.fill(j, -n, &mut buf);
            for (i, e) in buf.iter().enumerate() {
                let k = -n + i as i64;
                let ratio = e.abs() / ((3 + j.abs() + k.abs()) as f64).ln().sqrt();
                sup = sup.max(ratio);
                if ratio > c {
                    exceed += 1;
                }
            }
        }
        (exceed, sup)
    }
}
