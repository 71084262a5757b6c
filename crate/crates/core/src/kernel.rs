//! The self-generated magnetic potential A[rho] = (grad-perp log) * rho, its
//! disk-mollified regularization A_R[rho], the curl operator, the dot-product
//! convolution used by the energy gradient, and an independent radial
//! Newton-theorem oracle.
//!
//! Free-space convolutions are evaluated on a zero-padded grid with the
//! analytic frequency symbol of the *truncated* log kernel
//! w_D(x) = log|x| 1(|x| <= D). Truncation keeps the symbol finite at k = 0
//! and confines the periodization artifacts to a ring at distance D, outside
//! the restricted box, so curl(A[rho]) = 2 pi rho holds to spectral accuracy
//! for decayed densities. The plain -2*pi*i*kperp/|k|^2 symbol with a zeroed
//! k = 0 mode would instead pick up the neutralizing-background error
//! 2*pi/(pL)^2, far above the accuracy this module is held to.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{fft2_inplace, partials_real, Grid, RealField, VectorField};

/// Configuration of the free-space convolution.
#[derive(Debug, Clone, Copy)]
pub struct KernelConfig {
    /// Zero-padding multiple for the aperiodic convolution (2 or 4).
    pub padding_factor: usize,
    /// Disk-mollifier radius R; 0 means the bare kernel.
    pub regularization_radius: f64,
    /// Use the pi^2 R^2 mollifier normalization (mass 1/pi) instead of the
    /// unit-mass pi R^2 one.
    pub compat_pi2: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { padding_factor: 2, regularization_radius: 0.0, compat_pi2: false }
    }
}

impl KernelConfig {
    pub fn with_radius(radius: f64) -> Self {
        KernelConfig { regularization_radius: radius, ..Default::default() }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        if self.padding_factor != 2 && self.padding_factor != 4 {
            return Err(Error::BadPaddingFactor(self.padding_factor));
        }
        let r = self.regularization_radius;
        if r < 0.0 || (r > 0.0 && r >= grid.box_length() / 4.0) {
            return Err(Error::BadRegularizationRadius {
                radius: r,
                max: grid.box_length() / 4.0,
            });
        }
        Ok(())
    }

    /// Kernel truncation radius on a box of side L. Padding 2 covers pairs up
    /// to distance L (ample for centered decayed densities); padding 4 covers
    /// every in-box pair exactly while still excluding periodic images.
    fn truncation_radius(&self, box_length: f64) -> f64 {
        match self.padding_factor {
            2 => box_length,
            _ => 2.5 * box_length,
        }
    }
}

/// Fourier transform of log|x| 1(|x| <= D):
/// 2 pi [ (D log D / k) J1(kD) - (1 - J0(kD)) / k^2 ].
fn log_kernel_hat(k: f64, d: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let x = k * d;
    if x < 1e-2 {
        // series of J1(x)/x and (1 - J0(x))/x^2
        let x2 = x * x;
        let j1_over_x = 0.5 - x2 / 16.0 + x2 * x2 / 384.0;
        let one_minus_j0 = 0.25 - x2 / 64.0 + x2 * x2 / 2304.0;
        two_pi * d * d * (d.ln() * j1_over_x - one_minus_j0)
    } else {
        two_pi * (d * d.ln() * libm::j1(x) / k - (1.0 - libm::j0(x)) / (k * k))
    }
}

/// Transform of the unit-mass disk mollifier 1(B(0,R)) / (pi R^2).
fn mollifier_hat(k: f64, radius: f64) -> f64 {
    let x = k * radius;
    if x < 1e-2 {
        let x2 = x * x;
        1.0 - x2 / 8.0 + x2 * x2 / 192.0
    } else {
        2.0 * libm::j1(x) / x
    }
}

/// curl symbol of the truncated kernel: -k^2 w_D(k).
fn curl_kernel_hat(k: f64, d: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let x = k * d;
    if x < 1e-2 {
        let x2 = x * x;
        let one_minus_j0 = x2 * (0.25 - x2 / 64.0 + x2 * x2 / 2304.0);
        two_pi * (one_minus_j0 - x * d.ln() * libm::j1(x))
    } else {
        two_pi * (1.0 - libm::j0(x) - x * d.ln() * libm::j1(x))
    }
}

/// Scalar symbol tables, one entry per (mode grid, kernel settings). The
/// Bessel evaluations are the dominant cost of a kernel application, so the
/// tables are computed once and shared.
#[derive(PartialEq, Eq, Hash, Clone)]
struct SymbolKey {
    np: usize,
    box_bits: u64,
    d_bits: u64,
    r_bits: u64,
    compat: bool,
    curl: bool,
}

static SYMBOLS: OnceLock<Mutex<HashMap<SymbolKey, Arc<Vec<f64>>>>> = OnceLock::new();

fn symbol_table(np: usize, box_p: f64, d: f64, cfg: &KernelConfig, curl: bool) -> Arc<Vec<f64>> {
    let key = SymbolKey {
        np,
        box_bits: box_p.to_bits(),
        d_bits: d.to_bits(),
        r_bits: cfg.regularization_radius.to_bits(),
        compat: cfg.compat_pi2,
        curl,
    };
    let cache = SYMBOLS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    let mut table = vec![0.0; np * np];
    for iy in 0..np {
        let ky = padded_wavenumber(np, box_p, iy);
        for ix in 0..np {
            let kx = padded_wavenumber(np, box_p, ix);
            let k = (kx * kx + ky * ky).sqrt();
            let mut w = if curl { curl_kernel_hat(k, d) } else { log_kernel_hat(k, d) };
            if cfg.regularization_radius > 0.0 {
                w *= mollifier_hat(k, cfg.regularization_radius);
            }
            if cfg.compat_pi2 {
                w /= std::f64::consts::PI;
            }
            table[iy * np + ix] = w;
        }
    }
    let table = Arc::new(table);
    cache.lock().unwrap().insert(key, table.clone());
    table
}

struct Padded {
    np: usize,
    box_p: f64,
    hat: Vec<Complex64>,
}

/// Zero-pad real data to (p n)^2 and transform.
fn pad_forward(grid: &Grid, data: &[f64], p: usize) -> Padded {
    let n = grid.n();
    let np = p * n;
    let mut padded = vec![Complex64::default(); np * np];
    for iy in 0..n {
        for ix in 0..n {
            padded[iy * np + ix] = Complex64::new(data[iy * n + ix], 0.0);
        }
    }
    fft2_inplace(np, &mut padded, false);
    Padded { np, box_p: grid.box_length() * p as f64, hat: padded }
}

fn padded_wavenumber(np: usize, box_p: f64, m: usize) -> f64 {
    let mm = if m <= np / 2 { m as i64 } else { m as i64 - np as i64 };
    std::f64::consts::TAU * mm as f64 / box_p
}

fn restrict_real(grid: &Grid, np: usize, padded: &[Complex64]) -> Vec<f64> {
    let n = grid.n();
    let mut out = Vec::with_capacity(n * n);
    for iy in 0..n {
        for ix in 0..n {
            out.push(padded[iy * np + ix].re);
        }
    }
    out
}

fn check_density(rho: &RealField) -> Result<()> {
    let min = rho.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = rho.max_abs();
    if min < -1e-10 * (1.0 + scale) {
        return Err(Error::NegativeDensity(min));
    }
    Ok(())
}

/// Self-generated vector potential A[rho] (or A_R[rho] when the config has a
/// positive mollifier radius), restricted to rho's grid.
pub fn vector_potential(rho: &RealField, cfg: &KernelConfig) -> Result<VectorField> {
    check_density(rho)?;
    let (ax, ay) = vector_potential_padded(rho, cfg)?;
    let grid = &rho.grid;
    let np = cfg.padding_factor * grid.n();
    Ok(VectorField {
        grid: grid.clone(),
        x: restrict_real(grid, np, &ax),
        y: restrict_real(grid, np, &ay),
    })
}

/// Full padded-grid potential (used by tests to verify the divergence-free
/// structure of the symbol before restriction).
pub(crate) fn vector_potential_padded(
    rho: &RealField,
    cfg: &KernelConfig,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let grid = &rho.grid;
    cfg.validate(grid)?;
    let d = cfg.truncation_radius(grid.box_length());
    let pad = pad_forward(grid, &rho.values, cfg.padding_factor);
    let np = pad.np;
    let table = symbol_table(np, pad.box_p, d, cfg, false);
    let mut ax = vec![Complex64::default(); np * np];
    let mut ay = vec![Complex64::default(); np * np];
    for iy in 0..np {
        let ky = padded_wavenumber(np, pad.box_p, iy);
        for ix in 0..np {
            let kx = padded_wavenumber(np, pad.box_p, ix);
            let idx = iy * np + ix;
            let w = table[idx];
            let rh = pad.hat[idx];
            // A_hat = i k_perp w rho_hat, k_perp = (-k2, k1)
            ax[idx] = Complex64::new(0.0, -ky * w) * rh;
            ay[idx] = Complex64::new(0.0, kx * w) * rh;
        }
    }
    fft2_inplace(np, &mut ax, true);
    fft2_inplace(np, &mut ay, true);
    Ok((ax, ay))
}

/// curl A = d1 A2 - d2 A1 by spectral differentiation on A's own grid.
///
/// Accurate for fields that are periodic or decayed on that grid; for the
/// slowly-decaying potential A[rho] use [`curl_of_potential`], which carries
/// the curl through the padded pipeline instead.
pub fn curl(a: &VectorField) -> RealField {
    let (d1_ay, _) = partials_real(&a.grid, &a.y);
    let (_, d2_ax) = partials_real(&a.grid, &a.x);
    RealField {
        grid: a.grid.clone(),
        values: d1_ay.iter().zip(&d2_ax).map(|(p, q)| p - q).collect(),
    }
}

/// div A by spectral differentiation on A's own grid (same caveat as `curl`).
pub fn divergence(a: &VectorField) -> RealField {
    let (d1_ax, _) = partials_real(&a.grid, &a.x);
    let (_, d2_ay) = partials_real(&a.grid, &a.y);
    RealField {
        grid: a.grid.clone(),
        values: d1_ax.iter().zip(&d2_ay).map(|(p, q)| p + q).collect(),
    }
}

/// curl(A[rho]) evaluated inside the padded pipeline, where it equals
/// 2 pi rho to spectral accuracy for decayed rho.
pub fn curl_of_potential(rho: &RealField, cfg: &KernelConfig) -> Result<RealField> {
    check_density(rho)?;
    let grid = &rho.grid;
    cfg.validate(grid)?;
    let d = cfg.truncation_radius(grid.box_length());
    let pad = pad_forward(grid, &rho.values, cfg.padding_factor);
    let np = pad.np;
    let table = symbol_table(np, pad.box_p, d, cfg, true);
    let mut out = pad.hat;
    for (v, w) in out.iter_mut().zip(table.iter()) {
        *v *= *w;
    }
    fft2_inplace(np, &mut out, true);
    Ok(RealField { grid: grid.clone(), values: restrict_real(grid, np, &out) })
}

/// Dot-product convolution (grad-perp log * F)(x) = integral of
/// grad-perp w0(x - y) . F(y) dy, by the same padded frequency-space method.
pub fn scalar_convolution(f: &VectorField, cfg: &KernelConfig) -> Result<RealField> {
    let grid = &f.grid;
    cfg.validate(grid)?;
    let d = cfg.truncation_radius(grid.box_length());
    let pad_x = pad_forward(grid, &f.x, cfg.padding_factor);
    let pad_y = pad_forward(grid, &f.y, cfg.padding_factor);
    let np = pad_x.np;
    let table = symbol_table(np, pad_x.box_p, d, cfg, false);
    let mut out = vec![Complex64::default(); np * np];
    for iy in 0..np {
        let ky = padded_wavenumber(np, pad_x.box_p, iy);
        for ix in 0..np {
            let kx = padded_wavenumber(np, pad_x.box_p, ix);
            let idx = iy * np + ix;
            // sum_c i kperp_c w F_c
            out[idx] = Complex64::new(0.0, table[idx])
                * (-ky * pad_x.hat[idx] + kx * pad_y.hat[idx]);
        }
    }
    fft2_inplace(np, &mut out, true);
    Ok(RealField { grid: grid.clone(), values: restrict_real(grid, np, &out) })
}

/// Newton-theorem oracle: for radial rho, A[rho](x) = x_perp m(|x|)/|x|^2
/// with m(r) = 2 pi * integral_0^r rho(t) t dt.
///
/// `r` and `rho` tabulate the radial density on an ascending uniform mesh
/// covering at least the grid diagonal.
pub fn radial_oracle(r: &[f64], rho: &[f64], grid: &Grid) -> Result<VectorField> {
    let need = grid.box_length() * std::f64::consts::SQRT_2 / 2.0;
    let r_max = *r.last().unwrap_or(&0.0);
    if r.len() < 3 || r.len() != rho.len() || r_max < need {
        return Err(Error::RadialRangeTooShort { r_max, need });
    }
    if rho.iter().any(|&v| v < -1e-12) {
        return Err(Error::NegativeDensity(
            rho.iter().cloned().fold(f64::INFINITY, f64::min),
        ));
    }
    // cumulative mass by the parabola-corrected (Simpson-like) rule
    let two_pi = std::f64::consts::TAU;
    let m = r.len();
    let f: Vec<f64> = (0..m).map(|i| two_pi * rho[i] * r[i]).collect();
    let mut mass = vec![0.0; m];
    for i in 1..m {
        let dr = r[i] - r[i - 1];
        // quadratic through (i-1, i, i+1) when available, else trapezoid
        let seg = if i + 1 < m {
            dr / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1])
        } else {
            dr / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i])
        };
        mass[i] = mass[i - 1] + seg;
    }

    let dr = r[1] - r[0];
    let eval_mass = |radius: f64| -> f64 {
        let t = radius / dr;
        let i = (t as usize).min(m - 2);
        let frac = t - i as f64;
        mass[i] * (1.0 - frac) + mass[i + 1] * frac
    };

    Ok(VectorField::from_fn(grid, |x, y| {
        let r2 = x * x + y * y;
        if r2 == 0.0 {
            (0.0, 0.0)
        } else {
            let g = eval_mass(r2.sqrt()) / r2;
            (-y * g, x * g)
        }
    }))
}
