//! Uniform 2D grid over a square box with spectral differentiation,
//! quadrature and FFT plumbing.
//!
//! The box is [-L/2, L/2]^2 sampled at n points per side (n a power of two),
//! row-major with x1 on the fast axis. All derivatives are computed in
//! frequency space; the quadrature is the plain h^2 * sum rule, which is
//! spectrally accurate for periodic or boundary-decayed fields.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Uniform square grid with spectral transform metadata.
#[derive(Debug, Clone)]
pub struct Grid {
    n: usize,
    box_length: f64,
    h: f64,
    wavenumbers: Vec<f64>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.box_length.to_bits() == other.box_length.to_bits()
    }
}

impl Grid {
    /// Build a grid with `n` points per side (power of two, >= 16) on a box
    /// of side `box_length` centered at the origin.
    pub fn new(n: usize, box_length: f64) -> Result<Grid> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::BadGridSize(n));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(Error::BadBoxLength(box_length));
        }
        let h = box_length / n as f64;
        let two_pi = std::f64::consts::TAU;
        let wavenumbers = (0..n)
            .map(|m| {
                let mm = if m <= n / 2 { m as i64 } else { m as i64 - n as i64 };
                two_pi * mm as f64 / box_length
            })
            .collect();
        Ok(Grid { n, box_length, h, wavenumbers })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Grid spacing h = box_length / n.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of sample index i along either axis: -L/2 + i h.
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.box_length + i as f64 * self.h
    }

    /// Physical coordinates of the row-major sample (ix, iy).
    pub fn point(&self, ix: usize, iy: usize) -> (f64, f64) {
        (self.coord(ix), self.coord(iy))
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    /// Frequency of mode m in FFT storage order (antisymmetric apart from
    /// the Nyquist entry).
    pub fn wavenumber(&self, m: usize) -> f64 {
        self.wavenumbers[m]
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Quadrature weight of one sample.
    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }
}

fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

// ---------------------------------------------------------------------------
// FFT plumbing: cached plans keyed by length and direction. Plans are Sync;
// scratch buffers are per call, so transforms are safe to run concurrently.
// ---------------------------------------------------------------------------

static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap();
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if inverse { FftDirection::Inverse } else { FftDirection::Forward };
            planner.plan_fft(n, dir)
        })
        .clone()
}

fn transpose_square(n: usize, data: &mut [Complex64]) {
    for iy in 0..n {
        for ix in (iy + 1)..n {
            data.swap(iy * n + ix, ix * n + iy);
        }
    }
}

thread_local! {
    static SCRATCH: std::cell::RefCell<HashMap<usize, Vec<Complex64>>> =
        std::cell::RefCell::new(HashMap::new());
}

/// In-place 2D FFT of row-major n x n data. Forward is unnormalized; the
/// inverse divides by n^2 so that ifft2(fft2(f)) == f.
pub(crate) fn fft2_inplace(n: usize, data: &mut [Complex64], inverse: bool) {
    debug_assert_eq!(data.len(), n * n);
    let p = plan(n, inverse);
    let need = p.get_inplace_scratch_len();
    SCRATCH.with(|cell| {
        let mut pool = cell.borrow_mut();
        let scratch = pool.entry(need).or_default();
        scratch.resize(need, Complex64::default());
        p.process_with_scratch(data, scratch);
        transpose_square(n, data);
        p.process_with_scratch(data, scratch);
        transpose_square(n, data);
    });
    if inverse {
        let scale = 1.0 / (n * n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

// ---------------------------------------------------------------------------
// Sampled fields
// ---------------------------------------------------------------------------

/// Complex scalar samples u(x_ij), row-major.
#[derive(Debug, Clone)]
pub struct ComplexField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

/// Real scalar samples (densities, traps, curls).
#[derive(Debug, Clone)]
pub struct RealField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

/// Real 2-vector samples (magnetic potential, current).
#[derive(Debug, Clone)]
pub struct VectorField {
    pub grid: Grid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl ComplexField {
    pub fn zeros(grid: &Grid) -> ComplexField {
        ComplexField { grid: grid.clone(), values: vec![Complex64::default(); grid.len()] }
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64) -> Complex64) -> ComplexField {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..n {
            let y = grid.coord(iy);
            for ix in 0..n {
                values.push(f(grid.coord(ix), y));
            }
        }
        ComplexField { grid: grid.clone(), values }
    }

    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<ComplexField> {
        if values.len() != grid.len() {
            return Err(Error::FieldFile(format!(
                "value count {} does not match grid {}^2",
                values.len(),
                grid.n()
            )));
        }
        Ok(ComplexField { grid: grid.clone(), values })
    }

    /// Pointwise |u|^2 as a RealField.
    pub fn density(&self) -> RealField {
        RealField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    /// The quadrature value of the integral of |u|^2.
    pub fn norm_sq(&self) -> f64 {
        let w = self.grid.cell_area();
        w * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sq() - 1.0).abs() <= tol
    }

    /// Rescale to unit L2 norm.
    pub fn normalize(&mut self) {
        let s = 1.0 / self.norm_sq().sqrt();
        for v in &mut self.values {
            *v *= s;
        }
    }
}

impl RealField {
    pub fn zeros(grid: &Grid) -> RealField {
        RealField { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64) -> f64) -> RealField {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..n {
            let y = grid.coord(iy);
            for ix in 0..n {
                values.push(f(grid.coord(ix), y));
            }
        }
        RealField { grid: grid.clone(), values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> VectorField {
        VectorField {
            grid: grid.clone(),
            x: vec![0.0; grid.len()],
            y: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64) -> (f64, f64)) -> VectorField {
        let n = grid.n();
        let mut vx = Vec::with_capacity(grid.len());
        let mut vy = Vec::with_capacity(grid.len());
        for iy in 0..n {
            let y = grid.coord(iy);
            for ix in 0..n {
                let (a, b) = f(grid.coord(ix), y);
                vx.push(a);
                vy.push(b);
            }
        }
        VectorField { grid: grid.clone(), x: vx, y: vy }
    }
}

// ---------------------------------------------------------------------------
// Spectral operations
// ---------------------------------------------------------------------------

/// Both partial derivatives of a complex field, by multiplication with i k in
/// frequency space. The Nyquist-mode derivative is zeroed so that real fields
/// stay real under differentiation.
pub fn gradient(f: &ComplexField) -> (ComplexField, ComplexField) {
    let grid = &f.grid;
    let n = grid.n();
    let mut hat = f.values.clone();
    fft2_inplace(n, &mut hat, false);

    let nyq = n / 2;
    let mut gx = hat.clone();
    let mut gy = hat;
    for iy in 0..n {
        let ky = if iy == nyq { 0.0 } else { grid.wavenumber(iy) };
        for ix in 0..n {
            let kx = if ix == nyq { 0.0 } else { grid.wavenumber(ix) };
            let idx = iy * n + ix;
            gx[idx] *= Complex64::new(0.0, kx);
            gy[idx] *= Complex64::new(0.0, ky);
        }
    }
    fft2_inplace(n, &mut gx, true);
    fft2_inplace(n, &mut gy, true);
    (
        ComplexField { grid: grid.clone(), values: gx },
        ComplexField { grid: grid.clone(), values: gy },
    )
}

/// Laplacian by multiplication with -|k|^2 in frequency space.
pub fn laplacian(f: &ComplexField) -> ComplexField {
    let grid = &f.grid;
    let n = grid.n();
    let mut hat = f.values.clone();
    fft2_inplace(n, &mut hat, false);
    for iy in 0..n {
        let ky = grid.wavenumber(iy);
        for ix in 0..n {
            let kx = grid.wavenumber(ix);
            hat[iy * n + ix] *= -(kx * kx + ky * ky);
        }
    }
    fft2_inplace(n, &mut hat, true);
    ComplexField { grid: grid.clone(), values: hat }
}

/// Gradient and Laplacian from a single forward transform.
pub(crate) fn spectral_derivs(f: &ComplexField) -> (ComplexField, ComplexField, ComplexField) {
    let grid = &f.grid;
    let n = grid.n();
    let mut hat = f.values.clone();
    fft2_inplace(n, &mut hat, false);
    let nyq = n / 2;
    let mut gx = hat.clone();
    let mut gy = hat.clone();
    let mut lap = hat;
    for iy in 0..n {
        let ky_full = grid.wavenumber(iy);
        let ky = if iy == nyq { 0.0 } else { ky_full };
        for ix in 0..n {
            let kx_full = grid.wavenumber(ix);
            let kx = if ix == nyq { 0.0 } else { kx_full };
            let idx = iy * n + ix;
            gx[idx] *= Complex64::new(0.0, kx);
            gy[idx] *= Complex64::new(0.0, ky);
            lap[idx] *= -(kx_full * kx_full + ky_full * ky_full);
        }
    }
    fft2_inplace(n, &mut gx, true);
    fft2_inplace(n, &mut gy, true);
    fft2_inplace(n, &mut lap, true);
    (
        ComplexField { grid: grid.clone(), values: gx },
        ComplexField { grid: grid.clone(), values: gy },
        ComplexField { grid: grid.clone(), values: lap },
    )
}

/// Partial derivatives of real data, same spectral rule as `gradient`.
pub(crate) fn partials_real(grid: &Grid, data: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n();
    let mut hat: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2_inplace(n, &mut hat, false);
    let nyq = n / 2;
    let mut gx = hat.clone();
    let mut gy = hat;
    for iy in 0..n {
        let ky = if iy == nyq { 0.0 } else { grid.wavenumber(iy) };
        for ix in 0..n {
            let kx = if ix == nyq { 0.0 } else { grid.wavenumber(ix) };
            let idx = iy * n + ix;
            gx[idx] *= Complex64::new(0.0, kx);
            gy[idx] *= Complex64::new(0.0, ky);
        }
    }
    fft2_inplace(n, &mut gx, true);
    fft2_inplace(n, &mut gy, true);
    (gx.iter().map(|v| v.re).collect(), gy.iter().map(|v| v.re).collect())
}

/// h^2 * sum quadrature.
pub fn integrate(f: &RealField) -> f64 {
    f.grid.cell_area() * f.values.iter().sum::<f64>()
}

/// Sesquilinear inner product h^2 * sum conj(u) v.
pub fn inner(u: &ComplexField, v: &ComplexField) -> Result<Complex64> {
    same_grid(&u.grid, &v.grid)?;
    let s: Complex64 = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(s * u.grid.cell_area())
}
