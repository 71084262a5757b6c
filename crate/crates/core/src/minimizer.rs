//! Constrained minimization over the unit L2 sphere by preconditioned
//! projected gradient descent, plus blow-up diagnostics and alignment of a
//! state to the soliton reference.
//!
//! One descent engine drives both the energy functionals and (in the
//! experiments module) the kinetic/quartic quotient: iterate
//! u <- normalize(u - tau P (G[u] - mu u)) with P = (-Delta + c)^{-1} applied
//! spectrally, mu = <u, G[u]>, and tau chosen by backtracking so the value
//! never increases.

use num_complex::Complex64;

use crate::energy::{energy_and_grad, energy_unchecked, EnergyBreakdown, PhysicsParams};
use crate::error::{Error, Result};
use crate::grid::{fft2_inplace, ComplexField, Grid};
use crate::townes;

/// Initial iterate of a minimization.
#[derive(Debug, Clone)]
pub enum InitKind {
    /// Unit-width normalized Gaussian.
    Gaussian,
    /// Townes soliton sampled at the given scale.
    Townes { scale: f64 },
    /// Caller-provided field (e.g. loaded from a checkpoint file).
    Provided(ComplexField),
}

/// Periodic state dumps during a minimization.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub every: usize,
    pub dir: std::path::PathBuf,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Relative energy-decrease threshold.
    pub energy_tol: f64,
    /// Projected-gradient norm threshold (scaled by 1 + |mu|).
    pub grad_tol: f64,
    /// c in the Sobolev preconditioner (-Delta + c)^{-1}.
    pub precond_shift: f64,
    pub step0: f64,
    pub backtrack_factor: f64,
    pub init: InitKind,
    pub checkpoint: Option<Checkpoint>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 2000,
            energy_tol: 1e-10,
            grad_tol: 1e-6,
            precond_shift: 1.0,
            step0: 0.5,
            backtrack_factor: 0.5,
            init: InitKind::Gaussian,
            checkpoint: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_tol > 0.0 && self.grad_tol > 0.0 && self.precond_shift > 0.0 && self.step0 > 0.0)
        {
            return Err(Error::BadSolverConfig(
                "tolerances, preconditioner shift and step0 must be positive".into(),
            ));
        }
        if !(self.backtrack_factor > 0.1 && self.backtrack_factor < 0.9) {
            return Err(Error::BadSolverConfig(format!(
                "backtrack factor {} outside (0.1, 0.9)",
                self.backtrack_factor
            )));
        }
        Ok(())
    }
}

/// Terminal state of a minimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    /// Energy kept falling while the core shrank below grid resolvability:
    /// the unstable regime g > g*(beta), reported as an outcome rather than
    /// an error so sweeps can probe the stability boundary.
    Diverged,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub u: ComplexField,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Blow-up diagnostic epsilon = 1 / ||grad u||_2.
    pub eps_inv_grad: f64,
    /// Lagrange-multiplier estimate <u, G[u]> at the final iterate.
    pub multiplier: f64,
    /// ||G[u] - mu u||_2 at the final iterate.
    pub grad_residual: f64,
    /// Accepted energies, non-increasing.
    pub history: Vec<f64>,
}

impl MinimizeResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Objective driven by the descent engine.
pub(crate) trait Objective {
    fn value(&self, u: &ComplexField) -> Result<f64>;
    fn value_and_grad(&self, u: &ComplexField) -> Result<(f64, ComplexField)>;
}

struct EnergyObjective<'a> {
    params: &'a PhysicsParams,
    hartree: bool,
}

impl Objective for EnergyObjective<'_> {
    fn value(&self, u: &ComplexField) -> Result<f64> {
        Ok(energy_unchecked(u, self.params, self.hartree)?.total)
    }
    fn value_and_grad(&self, u: &ComplexField) -> Result<(f64, ComplexField)> {
        let (b, g) = energy_and_grad(u, self.params, self.hartree)?;
        Ok((b.total, g))
    }
}

fn apply_preconditioner(r: &ComplexField, shift: f64) -> ComplexField {
    let grid = &r.grid;
    let n = grid.n();
    let mut hat = r.values.clone();
    fft2_inplace(n, &mut hat, false);
    for iy in 0..n {
        let ky = grid.wavenumber(iy);
        for ix in 0..n {
            let kx = grid.wavenumber(ix);
            hat[iy * n + ix] /= kx * kx + ky * ky + shift;
        }
    }
    fft2_inplace(n, &mut hat, true);
    ComplexField { grid: grid.clone(), values: hat }
}

fn dot_re(a: &ComplexField, b: &ComplexField) -> f64 {
    let s: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| x.conj() * y).sum();
    (s * a.grid.cell_area()).re
}

/// Integer-cell circular shift pinning the density centroid to the origin
/// (tie-breaking for translation-invariant problems).
fn recenter(u: &mut ComplexField) {
    let grid = u.grid.clone();
    let n = grid.n();
    let w = grid.cell_area();
    let (mut cx, mut cy, mut mass) = (0.0, 0.0, 0.0);
    for iy in 0..n {
        for ix in 0..n {
            let r = u.values[iy * n + ix].norm_sqr();
            let (x, y) = grid.point(ix, iy);
            cx += x * r;
            cy += y * r;
            mass += r;
        }
    }
    cx *= w / (mass * w);
    cy *= w / (mass * w);
    let sx = (cx / grid.spacing()).round() as i64;
    let sy = (cy / grid.spacing()).round() as i64;
    if sx == 0 && sy == 0 {
        return;
    }
    let wrap = |i: i64| -> usize { i.rem_euclid(n as i64) as usize };
    let old = u.values.clone();
    for iy in 0..n {
        for ix in 0..n {
            // moving the centroid by (-sx, -sy) cells
            u.values[iy * n + ix] = old[wrap(iy as i64 + sy) * n + wrap(ix as i64 + sx)];
        }
    }
}

pub(crate) struct DescentOutcome {
    pub u: ComplexField,
    pub value: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub multiplier: f64,
    pub grad_residual: f64,
    pub history: Vec<f64>,
}

pub(crate) fn descend(
    mut u: ComplexField,
    objective: &dyn Objective,
    cfg: &SolverConfig,
    recenter_each_step: bool,
) -> Result<DescentOutcome> {
    cfg.validate()?;
    u.normalize();
    let h = u.grid.spacing();
    let (mut value, mut grad) = objective.value_and_grad(&u)?;
    let mut history = vec![value];
    let mut tau = cfg.step0;
    let mut status = SolveStatus::MaxIters;
    let mut multiplier = dot_re(&u, &grad);
    let mut grad_residual = f64::INFINITY;
    let mut iterations = 0;

    for iter in 0..cfg.max_iters {
        iterations = iter + 1;
        multiplier = dot_re(&u, &grad);
        let mut residual = grad.clone();
        for i in 0..residual.values.len() {
            residual.values[i] -= multiplier * u.values[i];
        }
        grad_residual = residual.norm_sq().sqrt();

        let energy_flat = history.len() >= 2 && {
            let prev = history[history.len() - 2];
            (prev - value).abs() <= cfg.energy_tol * (1.0 + value.abs())
        };
        if energy_flat && grad_residual <= cfg.grad_tol * (1.0 + multiplier.abs()) {
            status = SolveStatus::Converged;
            break;
        }

        // shift by the multiplier estimate so the preconditioner matches the
        // curvature scale of collapsing states (mu ~ 1/ell^2)
        let direction = apply_preconditioner(&residual, cfg.precond_shift + multiplier.abs());

        // Backtracking on the normalized trial state. Near stationarity the
        // true decrease per step drops below the evaluation noise of the
        // objective, so acceptance tolerates a noise-floor increase; without
        // it the step size collapses and the residual stops contracting.
        let noise_floor = 1e-13 * (1.0 + value.abs());
        let mut accepted = false;
        let mut genuine_decrease = false;
        let mut stalled = false;
        loop {
            let mut trial = u.clone();
            for i in 0..trial.values.len() {
                trial.values[i] -= tau * direction.values[i];
            }
            trial.normalize();
            if recenter_each_step {
                recenter(&mut trial);
            }
            let trial_value = objective.value(&trial)?;
            if trial_value <= value + noise_floor {
                genuine_decrease = trial_value < value - noise_floor;
                u = trial;
                value = trial_value;
                accepted = true;
                break;
            }
            tau *= cfg.backtrack_factor;
            if tau < 1e-6 * cfg.step0 {
                stalled = true;
                break;
            }
        }
        if stalled {
            // no descent direction at floating-point resolution: converged if
            // the stationarity residual is met, else report the iteration cap
            if grad_residual <= cfg.grad_tol * (1.0 + multiplier.abs()) {
                status = SolveStatus::Converged;
            }
            break;
        }
        if accepted {
            history.push(value);
            // growing the step on noise-level accepts would inflate the
            // oscillation ball around the minimum; grow only on progress
            if genuine_decrease {
                tau = (tau * 1.5).min(cfg.step0 * 4.0);
            }
        }

        if let Some(cp) = &cfg.checkpoint {
            if cp.every > 0 && (iter + 1) % cp.every == 0 {
                std::fs::create_dir_all(&cp.dir)?;
                crate::io::dump_field(&u, &cp.dir.join(format!("checkpoint_{:06}.bin", iter + 1)))?;
            }
        }

        let (v, g) = objective.value_and_grad(&u)?;
        value = v;
        grad = g;

        // collapse beyond grid resolvability, with the energy still falling:
        // the unstable regime
        let kinetic = grad_kinetic(&u);
        let eps = 1.0 / kinetic.sqrt();
        if eps < 4.0 * h && iter >= 3 {
            let back = history.len().saturating_sub(100);
            if history[back] > value {
                status = SolveStatus::Diverged;
                break;
            }
        }
    }

    Ok(DescentOutcome { u, value, iterations, status, multiplier, grad_residual, history })
}

fn grad_kinetic(u: &ComplexField) -> f64 {
    let (gx, gy) = crate::grid::gradient(u);
    gx.norm_sq() + gy.norm_sq()
}

fn initial_state(grid: &Grid, init: &InitKind) -> Result<ComplexField> {
    match init {
        InitKind::Gaussian => {
            let mut u = ComplexField::from_fn(grid, |x, y| {
                Complex64::new((-0.5 * (x * x + y * y)).exp(), 0.0)
            });
            u.normalize();
            Ok(u)
        }
        InitKind::Townes { scale } => {
            let (profile, _) = townes::cached();
            townes::sample_on_grid(profile, grid, *scale, (0.0, 0.0))
        }
        InitKind::Provided(u) => {
            if u.grid != *grid {
                return Err(Error::GridMismatch);
            }
            let mut u = u.clone();
            u.normalize();
            Ok(u)
        }
    }
}

/// Minimize the Pauli energy (or the Hartree energy when `p.hartree` is set)
/// over the unit sphere on the given grid.
pub fn minimize(p: &PhysicsParams, cfg: &SolverConfig, grid: &Grid) -> Result<MinimizeResult> {
    p.validate()?;
    let u0 = initial_state(grid, &cfg.init)?;
    let hartree = p.hartree.is_some();
    let objective = EnergyObjective { params: p, hartree };
    let out = descend(u0, &objective, cfg, !p.trap_on)?;
    let energy = energy_unchecked(&out.u, p, hartree)?;
    let eps_inv_grad = 1.0 / energy.kinetic_plain.sqrt();
    Ok(MinimizeResult {
        u: out.u,
        energy,
        iterations: out.iterations,
        status: out.status,
        eps_inv_grad,
        multiplier: out.multiplier,
        grad_residual: out.grad_residual,
        history: out.history,
    })
}

/// Optimal phase, centroid shift and H1 distance aligning `u` to `reference`.
///
/// The shift is the density-centroid difference rounded to whole cells; the
/// phase theta = -arg<reference, u_shifted> minimizes the L2 distance, which
/// enforces orthogonality of the residual's imaginary part to the reference.
pub fn align(u: &ComplexField, reference: &ComplexField) -> Result<(f64, (f64, f64), f64)> {
    if u.grid != reference.grid {
        return Err(Error::GridMismatch);
    }
    let grid = &u.grid;
    let n = grid.n();
    let w = grid.cell_area();

    let centroid = |f: &ComplexField| -> (f64, f64) {
        let (mut cx, mut cy, mut mass) = (0.0, 0.0, 0.0);
        for iy in 0..n {
            for ix in 0..n {
                let r = f.values[iy * n + ix].norm_sqr();
                let (x, y) = grid.point(ix, iy);
                cx += x * r;
                cy += y * r;
                mass += r;
            }
        }
        (cx / mass, cy / mass)
    };
    let cu = centroid(u);
    let cr = centroid(reference);
    let sx = ((cu.0 - cr.0) / grid.spacing()).round() as i64;
    let sy = ((cu.1 - cr.1) / grid.spacing()).round() as i64;

    let wrap = |i: i64| -> usize { i.rem_euclid(n as i64) as usize };
    let mut shifted = ComplexField::zeros(grid);
    for iy in 0..n {
        for ix in 0..n {
            shifted.values[iy * n + ix] =
                u.values[wrap(iy as i64 + sy) * n + wrap(ix as i64 + sx)];
        }
    }

    let mut overlap = Complex64::default();
    for i in 0..grid.len() {
        overlap += reference.values[i].conj() * shifted.values[i];
    }
    overlap *= w;
    let theta = -overlap.arg();

    let phase = Complex64::new(0.0, theta).exp();
    let mut diff = ComplexField::zeros(grid);
    for i in 0..grid.len() {
        diff.values[i] = phase * shifted.values[i] - reference.values[i];
    }
    let (dx, dy) = crate::grid::gradient(&diff);
    let h1 = (diff.norm_sq() + dx.norm_sq() + dy.norm_sq()).sqrt();

    Ok((theta, (sx as f64 * grid.spacing(), sy as f64 * grid.spacing()), h1))
}

/// How the blow-up length is extracted from a converged state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupMode {
    /// epsilon = 1 / ||grad u||.
    GradInverse,
    /// scale minimizing the L2 distance to the rescaled soliton.
    Variational,
}

/// Blow-up length scale of a converged minimization.
pub fn blowup_length(result: &MinimizeResult, mode: BlowupMode) -> Result<f64> {
    if !result.converged() {
        return Err(Error::NotConverged(
            "blow-up length requested for a non-converged result".into(),
        ));
    }
    blowup_scale_of_field(&result.u, result.eps_inv_grad, mode)
}

pub(crate) fn blowup_scale_of_field(
    u: &ComplexField,
    eps_inv_grad: f64,
    mode: BlowupMode,
) -> Result<f64> {
    match mode {
        BlowupMode::GradInverse => Ok(eps_inv_grad),
        BlowupMode::Variational => {
            let (profile, _) = townes::cached();
            // || ell u(ell x) - Q0(x) ||_2 = || u - ell^{-1} Q0(x/ell) ||_2
            let distance = |ell: f64| -> Result<f64> {
                let reference = townes::sample_on_grid(profile, &u.grid, ell, (0.0, 0.0))?;
                let mut acc = 0.0;
                for i in 0..u.grid.len() {
                    acc += (u.values[i] - reference.values[i]).norm_sqr();
                }
                Ok((acc * u.grid.cell_area()).sqrt())
            };
            // golden-section search on a bracket around the gradient estimate
            let (mut lo, mut hi) = (eps_inv_grad / 3.0, eps_inv_grad * 3.0);
            lo = lo.max(4.0 * u.grid.spacing() + 1e-12);
            let gr = 0.5 * (5.0_f64.sqrt() - 1.0);
            let mut a = hi - gr * (hi - lo);
            let mut b = lo + gr * (hi - lo);
            let mut fa = distance(a)?;
            let mut fb = distance(b)?;
            for _ in 0..60 {
                if fa < fb {
                    hi = b;
                    b = a;
                    fb = fa;
                    a = hi - gr * (hi - lo);
                    fa = distance(a)?;
                } else {
                    lo = a;
                    a = b;
                    fa = fb;
                    b = lo + gr * (hi - lo);
                    fb = distance(b)?;
                }
                if (hi - lo) < 1e-10 * eps_inv_grad {
                    break;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}
