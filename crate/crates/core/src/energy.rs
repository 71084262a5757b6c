//! The average-field-Pauli energy, its cross-term decomposition, the
//! average-field-Hartree energy with smeared interaction, the probability
//! current, the functional gradient, and the kinetic/quartic quotient.
//!
//! The Euler-Lagrange operator implemented by [`grad_afp`] is
//!
//!   G[u] = (-i grad + beta A[rho])^2 u + V u - g |u|^2 u
//!          - 2 beta (grad-perp w0 * J_beta[u]) u,
//!
//! with rho = |u|^2 and the gauge-covariant current
//! J_beta[u] = Im(conj(u) grad u) + beta A[rho] rho. The last term is the
//! back-reaction of the density-dependent potential. This formula is gated by
//! the finite-difference checks below and in the acceptance suite; they are
//! its only authority.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{spectral_derivs, ComplexField, Grid, RealField, VectorField};
use crate::kernel::{scalar_convolution, vector_potential, KernelConfig};

/// Two-body smearing of the Hartree interaction: W_{N^nu} with W the
/// unit-mass, unit-variance Gaussian (analytic transform, first moment zero).
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct HartreeParams {
    pub nu: f64,
    pub n_particles: f64,
}

impl HartreeParams {
    /// Smearing length N^{-nu}.
    pub fn smearing_sigma(&self) -> f64 {
        self.n_particles.powf(-self.nu)
    }
}

/// Model parameters of the energy functionals.
#[derive(Debug, Clone, Copy)]
pub struct PhysicsParams {
    /// Magnetic coupling, >= 0 (conjugation symmetry).
    pub beta: f64,
    /// Interaction strength; attraction is g > 0.
    pub g: f64,
    /// Trap exponent: V(x) = |x|^s.
    pub s: f64,
    pub trap_on: bool,
    /// Kernel settings, including the regularization radius R (0 = bare).
    pub kernel: KernelConfig,
    pub hartree: Option<HartreeParams>,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams {
            beta: 0.0,
            g: 0.0,
            s: 2.0,
            trap_on: true,
            kernel: KernelConfig::default(),
            hartree: None,
        }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<()> {
        if self.beta < 0.0 || !self.beta.is_finite() {
            return Err(Error::BadParams(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.s > 0.0) {
            return Err(Error::BadParams(format!("trap exponent s must be > 0, got {}", self.s)));
        }
        if let Some(h) = &self.hartree {
            if !(h.nu > 0.0) || !(h.n_particles >= 1.0) {
                return Err(Error::BadParams(format!(
                    "hartree parameters need nu > 0 and N >= 1, got nu = {}, N = {}",
                    h.nu, h.n_particles
                )));
            }
        }
        Ok(())
    }
}

/// Term-by-term decomposition of the energy.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EnergyBreakdown {
    pub total: f64,
    /// integral of |grad u|^2
    pub kinetic_plain: f64,
    /// 2 beta integral of A . J
    pub cross: f64,
    /// beta^2 integral of A^2 |u|^2
    pub a_squared: f64,
    /// integral of |(-i grad + beta A) u|^2
    pub kinetic_magnetic: f64,
    /// integral of V |u|^2
    pub potential: f64,
    /// -(g/2) integral of |u|^4, or the smeared Hartree analog
    pub quartic: f64,
}

/// Probability current J[u] = Im(conj(u) grad u).
pub fn current(u: &ComplexField) -> VectorField {
    let (gx, gy, _) = spectral_derivs(u);
    current_from_grad(u, &gx, &gy)
}

fn current_from_grad(u: &ComplexField, gx: &ComplexField, gy: &ComplexField) -> VectorField {
    VectorField {
        grid: u.grid.clone(),
        x: u.values.iter().zip(&gx.values).map(|(a, b)| (a.conj() * b).im).collect(),
        y: u.values.iter().zip(&gy.values).map(|(a, b)| (a.conj() * b).im).collect(),
    }
}

/// Trap samples V(x) = |x|^s.
pub fn trap_field(grid: &Grid, s: f64) -> RealField {
    if s == 2.0 {
        RealField::from_fn(grid, |x, y| x * x + y * y)
    } else {
        RealField::from_fn(grid, |x, y| (x * x + y * y).powf(0.5 * s))
    }
}

/// Smear a density with W_{N^nu} (frequency-space Gaussian factor).
pub fn smear_density(rho: &RealField, hartree: &HartreeParams) -> RealField {
    let grid = &rho.grid;
    let n = grid.n();
    let sigma = hartree.smearing_sigma();
    let mut hat: Vec<Complex64> = rho.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    crate::grid::fft2_inplace(n, &mut hat, false);
    for iy in 0..n {
        let ky = grid.wavenumber(iy);
        for ix in 0..n {
            let kx = grid.wavenumber(ix);
            hat[iy * n + ix] *= (-0.5 * sigma * sigma * (kx * kx + ky * ky)).exp();
        }
    }
    crate::grid::fft2_inplace(n, &mut hat, true);
    RealField { grid: grid.clone(), values: hat.iter().map(|v| v.re).collect() }
}

struct Evaluation {
    breakdown: EnergyBreakdown,
    gradient: Option<ComplexField>,
}

/// Shared pipeline for both functionals. `hartree` selects the smeared
/// interaction; the magnetic term always uses the config's radius R.
fn evaluate(u: &ComplexField, p: &PhysicsParams, hartree: bool, want_grad: bool) -> Result<Evaluation> {
    p.validate()?;
    if hartree && p.hartree.is_none() {
        return Err(Error::MissingHartree);
    }
    let grid = &u.grid;
    let w = grid.cell_area();
    let (gx, gy, lap) = spectral_derivs(u);
    let rho = u.density();

    let kinetic_plain = w
        * u.values
            .iter()
            .enumerate()
            .map(|(i, _)| gx.values[i].norm_sqr() + gy.values[i].norm_sqr())
            .sum::<f64>();

    let a = if p.beta != 0.0 {
        Some(vector_potential(&rho, &p.kernel)?)
    } else {
        None
    };

    let (cross, a_squared, kinetic_magnetic) = if let Some(a) = &a {
        let j = current_from_grad(u, &gx, &gy);
        let mut cross = 0.0;
        let mut asq = 0.0;
        let mut km = 0.0;
        for i in 0..grid.len() {
            cross += a.x[i] * j.x[i] + a.y[i] * j.y[i];
            asq += (a.x[i] * a.x[i] + a.y[i] * a.y[i]) * rho.values[i];
            // |(-i d_c + beta A_c) u|^2 = |d_c u + i beta A_c u|^2
            let zx = gx.values[i] + Complex64::new(0.0, p.beta * a.x[i]) * u.values[i];
            let zy = gy.values[i] + Complex64::new(0.0, p.beta * a.y[i]) * u.values[i];
            km += zx.norm_sqr() + zy.norm_sqr();
        }
        (2.0 * p.beta * w * cross, p.beta * p.beta * w * asq, w * km)
    } else {
        (0.0, 0.0, kinetic_plain)
    };

    let potential = if p.trap_on {
        let v = trap_field(grid, p.s);
        w * v.values.iter().zip(&rho.values).map(|(a, b)| a * b).sum::<f64>()
    } else {
        0.0
    };

    let interaction_density = if hartree {
        smear_density(&rho, p.hartree.as_ref().unwrap())
    } else {
        rho.clone()
    };
    let quartic = -0.5
        * p.g
        * w
        * interaction_density
            .values
            .iter()
            .zip(&rho.values)
            .map(|(a, b)| a * b)
            .sum::<f64>();

    let breakdown = EnergyBreakdown {
        total: kinetic_magnetic + potential + quartic,
        kinetic_plain,
        cross,
        a_squared,
        kinetic_magnetic,
        potential,
        quartic,
    };

    let gradient = if want_grad {
        let mut gvals: Vec<Complex64> = Vec::with_capacity(grid.len());
        // (-i grad + beta A)^2 u = -lap u - 2 i beta A . grad u + beta^2 A^2 u
        let back_reaction = if let Some(a) = &a {
            let j = current_from_grad(u, &gx, &gy);
            let j_beta = VectorField {
                grid: grid.clone(),
                x: j.x
                    .iter()
                    .zip(&a.x)
                    .zip(&rho.values)
                    .map(|((jj, aa), rr)| jj + p.beta * aa * rr)
                    .collect(),
                y: j.y
                    .iter()
                    .zip(&a.y)
                    .zip(&rho.values)
                    .map(|((jj, aa), rr)| jj + p.beta * aa * rr)
                    .collect(),
            };
            Some(scalar_convolution(&j_beta, &p.kernel)?)
        } else {
            None
        };
        let v = if p.trap_on { Some(trap_field(grid, p.s)) } else { None };
        for i in 0..grid.len() {
            let mut g = -lap.values[i];
            if let Some(a) = &a {
                let adotgrad = a.x[i] * gx.values[i] + a.y[i] * gy.values[i];
                let a2 = a.x[i] * a.x[i] + a.y[i] * a.y[i];
                g += Complex64::new(0.0, -2.0 * p.beta) * adotgrad
                    + p.beta * p.beta * a2 * u.values[i];
            }
            if let Some(v) = &v {
                g += v.values[i] * u.values[i];
            }
            g -= p.g * interaction_density.values[i] * u.values[i];
            if let Some(s) = &back_reaction {
                g -= 2.0 * p.beta * s.values[i] * u.values[i];
            }
            gvals.push(g);
        }
        Some(ComplexField { grid: grid.clone(), values: gvals })
    } else {
        None
    };

    Ok(Evaluation { breakdown, gradient })
}

fn require_normalized(u: &ComplexField) -> Result<()> {
    let n = u.norm_sq();
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

/// Average-field-Pauli energy of a normalized field.
pub fn energy_afp(u: &ComplexField, p: &PhysicsParams) -> Result<EnergyBreakdown> {
    require_normalized(u)?;
    Ok(evaluate(u, p, false, false)?.breakdown)
}

/// Average-field-Hartree energy (smeared interaction, regularized kernel).
pub fn energy_afh(u: &ComplexField, p: &PhysicsParams) -> Result<EnergyBreakdown> {
    require_normalized(u)?;
    Ok(evaluate(u, p, true, false)?.breakdown)
}

/// Euler-Lagrange operator of the Pauli energy at u.
pub fn grad_afp(u: &ComplexField, p: &PhysicsParams) -> Result<ComplexField> {
    require_normalized(u)?;
    Ok(evaluate(u, p, false, true)?.gradient.unwrap())
}

/// Euler-Lagrange operator of the Hartree energy at u.
pub fn grad_afh(u: &ComplexField, p: &PhysicsParams) -> Result<ComplexField> {
    require_normalized(u)?;
    Ok(evaluate(u, p, true, true)?.gradient.unwrap())
}

/// Unchecked energy evaluation, for finite-difference probes at points that
/// are deliberately off the unit sphere.
pub fn energy_unchecked(u: &ComplexField, p: &PhysicsParams, hartree: bool) -> Result<EnergyBreakdown> {
    Ok(evaluate(u, p, hartree, false)?.breakdown)
}

/// Energy and gradient in one pass (the minimizer's inner loop).
pub(crate) fn energy_and_grad(
    u: &ComplexField,
    p: &PhysicsParams,
    hartree: bool,
) -> Result<(EnergyBreakdown, ComplexField)> {
    let ev = evaluate(u, p, hartree, true)?;
    Ok((ev.breakdown, ev.gradient.unwrap()))
}

/// Magnetic kinetic / quartic quotient at coupling beta, mollifier radius R.
///
/// Equals g*(0) at the Townes profile for beta = 0 and upper-bounds the
/// critical coupling g*(beta) for any trial state.
pub fn gn_quotient(u: &ComplexField, beta: f64, radius: f64) -> Result<f64> {
    require_normalized(u)?;
    let p = PhysicsParams {
        beta,
        g: 0.0,
        trap_on: false,
        kernel: KernelConfig { regularization_radius: radius, ..Default::default() },
        ..Default::default()
    };
    let b = evaluate(u, &p, false, false)?.breakdown;
    let w = u.grid.cell_area();
    let quartic: f64 = w * u.values.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>();
    if quartic <= 0.0 {
        return Err(Error::VanishingQuartic);
    }
    Ok(b.kinetic_magnetic / (0.5 * quartic))
}

/// L2 norm squared of grad |u|, from the pointwise a.e. derivative
/// Re(sgn(conj u) grad u); this inherits the pointwise diamagnetic bound
/// instead of differentiating the non-smooth |u|.
pub fn grad_abs_norm_sq(u: &ComplexField) -> f64 {
    let (gx, gy, _) = spectral_derivs(u);
    let mut acc = 0.0;
    for i in 0..u.grid.len() {
        let mag = u.values[i].norm();
        if mag > 0.0 {
            let s = u.values[i].conj() / mag;
            let dx = (s * gx.values[i]).re;
            let dy = (s * gy.values[i]).re;
            acc += dx * dx + dy * dy;
        }
    }
    acc * u.grid.cell_area()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::grid::{inner, laplacian};
    use crate::townes;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn gaussian_state(grid: &Grid) -> ComplexField {
        let mut u = ComplexField::from_fn(grid, |x, y| {
            Complex64::new((-0.5 * (x * x + y * y)).exp() / PI.sqrt(), 0.0)
        });
        u.normalize();
        u
    }

    #[test]
    fn current_of_real_field_vanishes() {
        let grid = Grid::new(64, 12.0).unwrap();
        let u = corpus::random_real_field(&grid, 1);
        let j = current(&u);
        assert!(j.x.iter().chain(&j.y).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn current_of_boosted_gaussian() {
        let grid = Grid::new(128, 16.0).unwrap();
        let k0 = (grid.wavenumber(3), grid.wavenumber(2));
        let env = |x: f64, y: f64| (-0.5 * (x * x + y * y)).exp();
        let u = ComplexField::from_fn(&grid, |x, y| {
            Complex64::new(0.0, k0.0 * x + k0.1 * y).exp() * env(x, y)
        });
        let j = current(&u);
        let mut worst = 0.0_f64;
        for iy in 0..grid.n() {
            for ix in 0..grid.n() {
                let (x, y) = grid.point(ix, iy);
                let g2 = env(x, y) * env(x, y);
                let i = grid.index(ix, iy);
                worst = worst.max((j.x[i] - k0.0 * g2).abs().max((j.y[i] - k0.1 * g2).abs()));
            }
        }
        assert!(worst <= 1e-8, "current residual {worst}");
    }

    #[test]
    fn current_polar_form_identity() {
        // u = G e^{i phi}: J = G^2 grad phi
        let grid = Grid::new(128, 16.0).unwrap();
        let kp = grid.wavenumber(2);
        let phase = |x: f64, _: f64| 0.4 * (kp * x).sin();
        let env = |x: f64, y: f64| (-0.5 * (x * x + y * y)).exp();
        let u = ComplexField::from_fn(&grid, |x, y| {
            Complex64::new(0.0, phase(x, y)).exp() * env(x, y)
        });
        let j = current(&u);
        let mut worst = 0.0_f64;
        for iy in 0..grid.n() {
            for ix in 0..grid.n() {
                let (x, y) = grid.point(ix, iy);
                let expected = env(x, y) * env(x, y) * 0.4 * kp * (kp * x).cos();
                worst = worst.max((j.x[grid.index(ix, iy)] - expected).abs());
            }
        }
        assert!(worst <= 1e-7, "polar identity residual {worst}");
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let grid = Grid::new(128, 16.0).unwrap();
        let u = gaussian_state(&grid);
        let p = PhysicsParams::default();
        let b = energy_afp(&u, &p).unwrap();
        assert!((b.total - 2.0).abs() <= 1e-6, "total {}", b.total);
        assert!((b.kinetic_plain - 1.0).abs() <= 1e-6);
        assert!((b.potential - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn rejects_unnormalized_input() {
        let grid = Grid::new(64, 12.0).unwrap();
        let mut u = gaussian_state(&grid);
        for v in &mut u.values {
            *v *= 1.001;
        }
        assert!(matches!(
            energy_afp(&u, &PhysicsParams::default()),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn gn_equality_at_townes() {
        let (profile, c) = townes::cached();
        let grid = Grid::new(256, 24.0).unwrap();
        let u = townes::sample_on_grid(profile, &grid, 1.0, (0.0, 0.0)).unwrap();
        let p = PhysicsParams { g: c.g_star0, trap_on: false, ..Default::default() };
        let b = energy_afp(&u, &p).unwrap();
        assert!(
            b.total.abs() <= 2e-3 * c.grad_q0_sq,
            "E at the optimizer = {}",
            b.total
        );
    }

    #[test]
    fn scaled_townes_magnetic_excess() {
        // kinetic_magnetic - (g/2) int |u|^4 = beta^2 A0 / ell^2 at g = g*(0)
        let (profile, c) = townes::cached();
        let ell = 1.3_f64;
        let beta = 0.5_f64;
        let grid = Grid::new(256, 45.0).unwrap();
        let u = townes::sample_on_grid(profile, &grid, ell, (0.0, 0.0)).unwrap();
        let p = PhysicsParams { beta, g: c.g_star0, trap_on: false, ..Default::default() };
        let b = energy_afp(&u, &p).unwrap();
        let excess = (b.kinetic_magnetic + b.quartic) * ell * ell / (beta * beta);
        assert!(
            (excess - c.a0).abs() <= 0.01 * c.a0,
            "excess {excess} vs A0 {}",
            c.a0
        );
    }

    #[test]
    fn breakdown_terms_consistent() {
        let grid = Grid::new(64, 14.0).unwrap();
        for seed in 0..5u64 {
            let u = corpus::random_field(&grid, seed);
            let p = PhysicsParams { beta: 0.7, g: 2.0, ..Default::default() };
            let b = energy_afp(&u, &p).unwrap();
            let sum = b.kinetic_plain + b.cross + b.a_squared;
            assert!(
                (b.kinetic_magnetic - sum).abs() <= 1e-8 * (1.0 + b.kinetic_magnetic.abs()),
                "km {} vs parts {sum}",
                b.kinetic_magnetic
            );
            assert!(b.kinetic_magnetic >= 0.0);
            assert!(
                (b.total - (b.kinetic_magnetic + b.potential + b.quartic)).abs()
                    <= 1e-12 * (1.0 + b.total.abs())
            );
        }
    }

    #[test]
    fn gradient_reduces_to_laplacian() {
        let grid = Grid::new(64, 12.0).unwrap();
        let u = corpus::random_field(&grid, 9);
        let p = PhysicsParams { trap_on: false, ..Default::default() };
        let g = grad_afp(&u, &p).unwrap();
        let lap = laplacian(&u);
        let scale = lap.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        for i in 0..grid.len() {
            assert!((g.values[i] + lap.values[i]).norm() <= 1e-10 * (1.0 + scale));
        }
    }

    #[test]
    fn townes_is_a_stationary_point() {
        let (profile, c) = townes::cached();
        let grid = Grid::new(256, 24.0).unwrap();
        let u = townes::sample_on_grid(profile, &grid, 1.0, (0.0, 0.0)).unwrap();
        let p = PhysicsParams { g: c.g_star0, trap_on: false, ..Default::default() };
        let g = grad_afp(&u, &p).unwrap();
        let mu = inner(&u, &g).unwrap();
        // -Delta Q0 - g*(0) Q0^3 = -Q0
        assert!((mu.re + c.grad_q0_sq).abs() <= 2e-3, "multiplier {mu}");
        let mut resid = 0.0;
        for i in 0..grid.len() {
            resid += (g.values[i] - mu * u.values[i]).norm_sqr();
        }
        resid = (resid * grid.cell_area()).sqrt();
        assert!(resid <= 1e-3, "orthogonal residual {resid}");
    }

    #[test]
    fn finite_difference_gradient_check() {
        let grid = Grid::new(64, 14.0).unwrap();
        let eps = 1e-5;
        for (beta, g) in [(0.0, 0.0), (0.1, 5.0)] {
            for hartree in [false, true] {
                let p = PhysicsParams {
                    beta,
                    g,
                    hartree: hartree.then_some(HartreeParams { nu: 0.75, n_particles: 64.0 }),
                    kernel: KernelConfig::with_radius(if hartree { 0.05 } else { 0.0 }),
                    ..Default::default()
                };
                for seed in 0..3u64 {
                    let u = corpus::random_field(&grid, seed);
                    let gr = if hartree { grad_afh(&u, &p) } else { grad_afp(&u, &p) }.unwrap();
                    for dir_seed in 100..104u64 {
                        let phi = corpus::random_field(&grid, dir_seed);
                        let predicted = 2.0 * inner(&gr, &phi).unwrap().re;
                        let mut up = u.clone();
                        let mut um = u.clone();
                        for i in 0..grid.len() {
                            up.values[i] += eps * phi.values[i];
                            um.values[i] -= eps * phi.values[i];
                        }
                        let ep = energy_unchecked(&up, &p, hartree).unwrap().total;
                        let em = energy_unchecked(&um, &p, hartree).unwrap().total;
                        let fd = (ep - em) / (2.0 * eps);
                        let denom = fd.abs().max(1.0);
                        assert!(
                            (predicted - fd).abs() <= 1e-5 * denom,
                            "FD mismatch: {predicted} vs {fd} (beta {beta}, g {g}, hartree {hartree})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn diamagnetic_and_bogomolny_inequalities() {
        let grid = Grid::new(64, 14.0).unwrap();
        for seed in 0..10u64 {
            let u = corpus::random_field(&grid, seed);
            let rho_sq: f64 =
                grid.cell_area() * u.values.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>();
            let grad_abs = grad_abs_norm_sq(&u);
            for beta in [0.0, 0.1, 1.0] {
                let p = PhysicsParams { beta, trap_on: false, ..Default::default() };
                let b = energy_afp(&u, &p).unwrap();
                assert!(
                    grad_abs <= b.kinetic_magnetic + 1e-8,
                    "diamagnetic violated: {grad_abs} > {}",
                    b.kinetic_magnetic
                );
                let flux = 2.0 * PI * beta * rho_sq;
                assert!(
                    b.kinetic_magnetic >= flux - 1e-8,
                    "bogomolny violated: {} < {flux}",
                    b.kinetic_magnetic
                );
            }
        }
    }

    #[test]
    fn gauge_and_conjugation_symmetry() {
        let grid = Grid::new(64, 14.0).unwrap();
        let u = corpus::random_field(&grid, 4);
        let p = PhysicsParams { beta: 0.6, g: 1.5, ..Default::default() };
        let b = energy_afp(&u, &p).unwrap();

        let theta = 1.234;
        let rot = ComplexField {
            grid: grid.clone(),
            values: u.values.iter().map(|v| v * Complex64::new(0.0, theta).exp()).collect(),
        };
        let br = energy_afp(&rot, &p).unwrap();
        for (x, y) in [
            (b.total, br.total),
            (b.kinetic_plain, br.kinetic_plain),
            (b.cross, br.cross),
            (b.a_squared, br.a_squared),
            (b.potential, br.potential),
            (b.quartic, br.quartic),
        ] {
            assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()), "{x} vs {y}");
        }

        let conj = ComplexField {
            grid: grid.clone(),
            values: u.values.iter().map(|v| v.conj()).collect(),
        };
        let bc = energy_afp(&conj, &p).unwrap();
        assert!((bc.cross + b.cross).abs() <= 1e-10 * (1.0 + b.cross.abs()));
        assert!((bc.kinetic_plain - b.kinetic_plain).abs() <= 1e-10);
        assert!((bc.a_squared - b.a_squared).abs() <= 1e-10);
    }

    #[test]
    fn hartree_energy_behavior() {
        let grid = Grid::new(64, 14.0).unwrap();
        let u = corpus::random_field(&grid, 12);
        let base = PhysicsParams { g: 3.0, ..Default::default() };

        assert!(matches!(energy_afh(&u, &base), Err(Error::MissingHartree)));

        // smeared attraction is weaker on every corpus field
        for seed in 0..8u64 {
            let u = corpus::random_field(&grid, seed);
            let p = PhysicsParams {
                hartree: Some(HartreeParams { nu: 0.5, n_particles: 16.0 }),
                ..base
            };
            let afh = energy_afh(&u, &p).unwrap();
            let afp = energy_afp(&u, &base).unwrap();
            assert!(afh.quartic >= afp.quartic - 1e-12);
        }

        // N -> infinity surrogate: relative quartic gap below 1e-3
        let big_n = (1e3 / grid.spacing()).powf(1.0 / 0.75);
        let p = PhysicsParams {
            hartree: Some(HartreeParams { nu: 0.75, n_particles: big_n }),
            ..base
        };
        let afh = energy_afh(&u, &p).unwrap();
        let afp = energy_afp(&u, &base).unwrap();
        assert!(
            (afh.quartic - afp.quartic).abs() <= 1e-3 * afp.quartic.abs(),
            "{} vs {}",
            afh.quartic,
            afp.quartic
        );

        // smearing a constant density changes nothing
        let flat = {
            let mut f = ComplexField::from_fn(&grid, |_, _| Complex64::new(1.0, 0.0));
            f.normalize();
            f
        };
        let p_small = PhysicsParams {
            hartree: Some(HartreeParams { nu: 1.0, n_particles: 4.0 }),
            ..base
        };
        let qa = energy_afh(&flat, &p_small).unwrap().quartic;
        let qb = energy_afp(&flat, &base).unwrap().quartic;
        assert!((qa - qb).abs() <= 1e-12 * qb.abs());
    }

    #[test]
    fn quotient_examples() {
        let (profile, c) = townes::cached();
        let grid = Grid::new(256, 24.0).unwrap();
        let q0 = townes::sample_on_grid(profile, &grid, 1.0, (0.0, 0.0)).unwrap();
        let q = gn_quotient(&q0, 0.0, 0.0).unwrap();
        assert!((q - c.g_star0).abs() <= 0.005 * c.g_star0, "quotient {q}");

        let grid_small = Grid::new(64, 14.0).unwrap();
        for seed in 0..6u64 {
            let u = corpus::random_field(&grid_small, seed);
            let q = gn_quotient(&u, 0.0, 0.0).unwrap();
            assert!(q >= c.g_star0 - 1e-8, "GN inequality violated: {q}");
            let q2 = gn_quotient(&u, 2.0, 0.0).unwrap();
            assert!(q2 >= 8.0 * PI - 1e-6, "bogomolny floor violated: {q2}");
        }
    }
}
