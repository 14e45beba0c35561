//! Shared helpers for the integration suites: a tiny deterministic PRNG
//! (so "random" inputs are reproducible across runs and platforms) and
//! builders for random physical inputs.

#![allow(dead_code)]

use cyclemix::nalgebra::Matrix3;
use cyclemix::{SystemParams, C64};

/// splitmix64 — deterministic, seedable, no dependencies.
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    /// Complex number with magnitude uniform in [lo, hi) and random phase.
    pub fn complex(&mut self, lo: f64, hi: f64) -> C64 {
        let r = self.uniform(lo, hi);
        let theta = self.uniform(0.0, std::f64::consts::TAU);
        C64::from_polar(r, theta)
    }
}

/// Valid parameters with O(1) rates and drives; every field randomized.
pub fn random_params(rng: &mut SplitMix64) -> SystemParams {
    SystemParams {
        gamma12: rng.uniform(0.0, 1.0),
        gamma13: rng.uniform(0.5, 2.0),
        gamma23: rng.uniform(0.0, 1.0),
        gamma_phi2: rng.uniform(0.0, 0.5),
        gamma_phi3: rng.uniform(0.0, 0.5),
        omega_c: rng.complex(0.0, 3.0),
        omega_d: rng.complex(0.0, 3.0),
        delta_p: rng.uniform(-3.0, 3.0),
        kappa12: rng.uniform(0.5, 2.0),
        kappa13: rng.uniform(0.5, 4.0),
        mu_ratio: rng.uniform(0.5, 2.0),
        freq_ratio: rng.uniform(0.5, 4.0),
        probe_rabi0: rng.complex(0.1, 1.0),
    }
}

/// Random physical density matrix: ρ = A†A / tr(A†A) is Hermitian,
/// positive semidefinite, unit trace.
pub fn random_density(rng: &mut SplitMix64) -> Matrix3<C64> {
    let a = Matrix3::from_fn(|_, _| rng.complex(0.0, 1.0));
    let rho = a.adjoint() * a;
    let tr = rho.trace();
    rho / tr
}

pub fn max_entry(m: &Matrix3<C64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
