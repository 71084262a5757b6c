//! Seeded random test fields.
//!
//! Fields are sums of a few low-wavenumber plane waves under a Gaussian
//! envelope, normalized on the grid. Modes are capped at n/8 bins so that
//! pointwise products up to fourth order stay below the Nyquist frequency,
//! and the envelope keeps boundary values at ~1e-11; this is what lets the
//! discrete inequality checks run at 1e-8 slack.

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;

use crate::grid::{ComplexField, Grid, RealField};

/// Random normalized complex field on the grid, deterministic in `seed`.
pub fn random_field(grid: &Grid, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid.box_length();
    let kmax = (grid.n() / 8) as i64;
    let two_pi = std::f64::consts::TAU;
    let modes: Vec<(f64, f64, Complex64)> = (0..8)
        .map(|_| {
            let mx = rng.gen_range(-kmax..=kmax) as f64;
            let my = rng.gen_range(-kmax..=kmax) as f64;
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (two_pi * mx / l, two_pi * my / l, amp)
        })
        .collect();
    let sigma = l / 16.0;
    let mut field = ComplexField::from_fn(grid, |x, y| {
        let env = (-0.5 * (x * x + y * y) / (sigma * sigma)).exp();
        let mut v = Complex64::default();
        for &(kx, ky, a) in &modes {
            v += a * Complex64::new(0.0, kx * x + ky * y).exp();
        }
        v * env
    });
    field.normalize();
    field
}

/// Random smooth decayed density of unit mass: |random_field|^2.
pub fn random_density(grid: &Grid, seed: u64) -> RealField {
    random_field(grid, seed).density()
}

/// Random real normalized field (zero current), useful where a current-free
/// state is wanted.
pub fn random_real_field(grid: &Grid, seed: u64) -> ComplexField {
    let f = random_field(grid, seed);
    let mut g = ComplexField {
        grid: f.grid.clone(),
        values: f.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
    };
    g.normalize();
    g
}
