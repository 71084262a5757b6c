//! Configuration parsing, command dispatch and result manifests.
//!
//! Every command writes a `manifest.json` into the output directory: the
//! config echo, the soliton constants in use, one pass/fail record per
//! quantified assertion, wall-clock per stage, and a digest inventory of
//! every emitted file. A run "passes" iff every assertion in the manifest
//! passes; the command-line front end turns that into the exit status.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::corpus;
use crate::energy::{
    energy_afp, energy_unchecked, gn_quotient, grad_abs_norm_sq, grad_afh, grad_afp,
    HartreeParams, PhysicsParams,
};
use crate::error::{Error, Result};
use crate::experiments::{
    critical_sweep, default_critical_betas, default_subcritical_deltas, estimate_gstar,
    gn_optimizer_convergence, hartree_rate_study, instability_probe, subcritical_sweep,
    supercritical_sweep, SweepPoint,
};
use crate::grid::{inner, ComplexField, Grid};
use crate::io::{dump_field, load_field};
use crate::kernel::{curl_of_potential, radial_oracle, vector_potential, KernelConfig};
use crate::minimizer::{minimize, InitKind, SolveStatus, SolverConfig};
use crate::townes::{self, constants, relax_townes, solve_townes};

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Townes,
    Minimize,
    Gstar,
    SweepSub,
    SweepCrit,
    SweepSuper,
    HartreeRates,
    GnWeakfield,
    Validate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub beta: f64,
    pub g: f64,
    pub s: f64,
    pub trap_on: bool,
    pub regularization_radius: f64,
    pub padding_factor: usize,
    pub hartree: Option<HartreeParams>,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            beta: 0.0,
            g: 0.0,
            s: 2.0,
            trap_on: true,
            regularization_radius: 0.0,
            padding_factor: 2,
            hartree: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum InitConfig {
    Gaussian,
    Townes { scale: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfigFile {
    pub max_iters: usize,
    pub energy_tol: f64,
    pub grad_tol: f64,
    pub precond_shift: f64,
    pub step0: f64,
    pub backtrack_factor: f64,
    pub init: InitConfig,
    /// Dump the iterate into the output directory every k iterations.
    pub checkpoint_every: Option<usize>,
}

impl Default for SolverConfigFile {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverConfigFile {
            max_iters: d.max_iters,
            energy_tol: d.energy_tol,
            grad_tol: d.grad_tol,
            precond_shift: d.precond_shift,
            step0: d.step0,
            backtrack_factor: d.backtrack_factor,
            init: InitConfig::Gaussian,
            checkpoint_every: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    /// Absent means the command's auto rule (the box-sizing is checked post
    /// hoc and recorded in the manifest).
    pub box_length: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: 256, box_length: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Sub-critical distances to g*(0); g = g*(0)(1 - delta), beta = delta/2.
    pub deltas: Vec<f64>,
    /// Critical / super-critical magnetic couplings.
    pub betas: Vec<f64>,
    /// Super-critical coupling offset; absent means 0.25 g*(0) A0.
    pub tau0: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            deltas: default_subcritical_deltas(),
            betas: default_critical_betas(),
            tau0: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HartreeStudyConfig {
    pub nu: f64,
    pub eta: f64,
    pub n_schedule: Vec<f64>,
}

impl Default for HartreeStudyConfig {
    fn default() -> Self {
        HartreeStudyConfig {
            nu: 0.75,
            eta: 1.0,
            n_schedule: (4..=10).map(|k| (1u64 << k) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    pub inequality_fields: usize,
    pub fd_fields: usize,
    pub fd_directions: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { inequality_fields: 200, fd_fields: 20, fd_directions: 20 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub solver: SolverConfigFile,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub emit_fields: bool,
    #[serde(default)]
    pub compat_pi2: bool,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub hartree_study: HartreeStudyConfig,
    #[serde(default = "default_gstar_betas")]
    pub gstar_betas: Vec<f64>,
    #[serde(default)]
    pub validate: ValidateConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_gstar_betas() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Schema {
            key: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        cfg.validate_semantics()?;
        Ok(cfg)
    }

    fn validate_semantics(&self) -> Result<()> {
        if self.grid.n < 16 || !self.grid.n.is_power_of_two() {
            return Err(Error::Schema {
                key: "grid.n".into(),
                message: format!("must be a power of two >= 16, got {}", self.grid.n),
            });
        }
        if let Some(l) = self.grid.box_length {
            if !(l > 0.0) {
                return Err(Error::Schema {
                    key: "grid.box_length".into(),
                    message: format!("must be positive, got {l}"),
                });
            }
        }
        if self.physics.padding_factor != 2 && self.physics.padding_factor != 4 {
            return Err(Error::Schema {
                key: "physics.padding_factor".into(),
                message: format!("must be 2 or 4, got {}", self.physics.padding_factor),
            });
        }
        Ok(())
    }

    fn physics_params(&self) -> PhysicsParams {
        PhysicsParams {
            beta: self.physics.beta,
            g: self.physics.g,
            s: self.physics.s,
            trap_on: self.physics.trap_on,
            kernel: KernelConfig {
                padding_factor: self.physics.padding_factor,
                regularization_radius: self.physics.regularization_radius,
                compat_pi2: self.compat_pi2,
            },
            hartree: self.physics.hartree,
        }
    }

    fn solver_config(&self) -> Result<SolverConfig> {
        let init = match &self.solver.init {
            InitConfig::Gaussian => InitKind::Gaussian,
            InitConfig::Townes { scale } => InitKind::Townes { scale: *scale },
            InitConfig::File { path } => InitKind::Provided(load_field(path)?),
        };
        Ok(SolverConfig {
            max_iters: self.solver.max_iters,
            energy_tol: self.solver.energy_tol,
            grad_tol: self.solver.grad_tol,
            precond_shift: self.solver.precond_shift,
            step0: self.solver.step0,
            backtrack_factor: self.solver.backtrack_factor,
            init,
            checkpoint: self.solver.checkpoint_every.map(|every| crate::minimizer::Checkpoint {
                every,
                dir: self.output_dir.join("checkpoints"),
            }),
        })
    }

    fn grid(&self, auto_box: f64) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.box_length.unwrap_or(auto_box))
    }
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct AssertionRecord {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// Inclusive bounds the value was held to (NaN when one-sided).
    pub lo: f64,
    pub hi: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub artifact: String,
    pub config: RunConfig,
    pub townes_constants: Option<crate::townes::TownesConstants>,
    pub assertions: Vec<AssertionRecord>,
    /// Wall clock per stage; excluded from determinism comparisons.
    pub timings: Vec<StageTiming>,
    pub files: Vec<FileRecord>,
}

impl Manifest {
    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// JSON with the timing section stripped, for determinism comparisons.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timings");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

fn record_in(name: &str, value: f64, lo: f64, hi: f64, detail: impl Into<String>) -> AssertionRecord {
    AssertionRecord {
        name: name.into(),
        passed: value.is_finite() && value >= lo && value <= hi,
        value,
        lo,
        hi,
        detail: detail.into(),
    }
}

fn record_le(name: &str, value: f64, hi: f64, detail: impl Into<String>) -> AssertionRecord {
    record_in(name, value, f64::NEG_INFINITY, hi, detail)
}

fn record_ge(name: &str, value: f64, lo: f64, detail: impl Into<String>) -> AssertionRecord {
    record_in(name, value, lo, f64::INFINITY, detail)
}

fn record_flag(name: &str, passed: bool, detail: impl Into<String>) -> AssertionRecord {
    AssertionRecord {
        name: name.into(),
        passed,
        value: if passed { 1.0 } else { 0.0 },
        lo: 1.0,
        hi: 1.0,
        detail: detail.into(),
    }
}

struct Emitter {
    dir: PathBuf,
    files: Vec<FileRecord>,
}

impl Emitter {
    fn new(dir: &Path) -> Result<Emitter> {
        fs::create_dir_all(dir)?;
        Ok(Emitter { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.track(name)?;
        Ok(())
    }

    fn track(&mut self, name: &str) -> Result<()> {
        let path = self.dir.join(name);
        let bytes = fs::read(&path)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.files.push(FileRecord { path: name.into(), sha256: hex, bytes: bytes.len() as u64 });
        Ok(())
    }

    fn write_csv(&mut self, name: &str, header: &str, rows: &[String]) -> Result<()> {
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }
}

// ---------------------------------------------------------------------------
// Command dispatch
// ---------------------------------------------------------------------------

/// Execute a parsed configuration, writing tables, optional field dumps and
/// `manifest.json` into the output directory.
pub fn run(config: &RunConfig) -> Result<Manifest> {
    let mut emitter = Emitter::new(&config.output_dir)?;
    let mut assertions = Vec::new();
    let mut timings = Vec::new();
    let started = Instant::now();

    let stage = match config.command {
        Command::Townes => run_townes(config, &mut emitter, &mut assertions)?,
        Command::Minimize => run_minimize(config, &mut emitter, &mut assertions)?,
        Command::Gstar => run_gstar(config, &mut emitter, &mut assertions)?,
        Command::SweepSub => run_sweep_sub(config, &mut emitter, &mut assertions)?,
        Command::SweepCrit => run_sweep_crit(config, &mut emitter, &mut assertions)?,
        Command::SweepSuper => run_sweep_super(config, &mut emitter, &mut assertions)?,
        Command::HartreeRates => run_hartree_rates(config, &mut emitter, &mut assertions)?,
        Command::GnWeakfield => run_gn_weakfield(config, &mut emitter, &mut assertions)?,
        Command::Validate => run_validate(config, &mut emitter, &mut assertions)?,
    };
    timings.push(StageTiming { stage, seconds: started.elapsed().as_secs_f64() });

    let townes_constants = Some(townes::cached().1);
    let mut manifest = Manifest {
        artifact: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        config: config.clone(),
        townes_constants,
        assertions,
        timings,
        files: Vec::new(),
    };
    // manifest digest inventory covers everything emitted before it
    manifest.files = emitter.files.clone();
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(config.output_dir.join("manifest.json"), json)?;
    Ok(manifest)
}

fn sweep_csv_rows(points: &[SweepPoint]) -> Vec<String> {
    points
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                p.beta,
                p.g,
                p.ell_predicted,
                p.ell_measured,
                p.ell_variational,
                p.energy_measured,
                p.energy_predicted,
                p.h1_distance_to_townes,
                p.converged,
                p.flagged,
                p.iterations
            )
        })
        .collect()
}

const SWEEP_CSV_HEADER: &str = "beta,g,ell_predicted,ell_measured,ell_variational,energy_measured,energy_predicted,h1_distance_to_townes,converged,flagged,iterations";

fn run_townes(
    config: &RunConfig,
    emitter: &mut Emitter,
    assertions: &mut Vec<AssertionRecord>,
) -> Result<String> {
    let profile = solve_townes(1e-8)?;
    let consts = constants(&profile, config.physics.s)?;

    let mut table = String::new();
    for (r, q) in profile.r.iter().zip(&profile.q) {
        table.push_str(&format!("{r:.12e} {q:.17e}\n"));
    }
    emitter.write("townes_profile.txt", table.as_bytes())?;

    #[derive(Serialize)]
    struct TownesSidecar {
        constants: crate::townes::TownesConstants,
        residual: f64,
        r_max: f64,
        mesh_points: usize,
        tail_coeff: f64,
        relaxation_amplitude: f64,
    }
    let relaxed = relax_townes(100_000, 25.0)?;
    let sidecar = TownesSidecar {
        constants: consts,
        residual: profile.residual(),
        r_max: profile.r_max,
        mesh_points: profile.r.len(),
        tail_coeff: profile.tail_coeff(),
        relaxation_amplitude: relaxed,
    };
    emitter.write("townes_constants.json", serde_json::to_string_pretty(&sidecar)?.as_bytes())?;

    let reference = 2.0 * std::f64::consts::PI * 1.86;
    assertions.push(record_in(
        "townes.norm_band",
        consts.g_star0,
        reference * 0.995,
        reference * 1.005,
        "||Q||^2 within 0.5% of 2 pi x 1.86",
    ));
    assertions.push(record_in(
        "townes.grad_normalization",
        consts.grad_q0_sq,
        1.0 - 1e-3,
        1.0 + 1e-3,
        "||grad Q0||^2 = 1 within 1e-3",
    ));
    let q4_target = 2.0 / consts.g_star0;
    assertions.push(record_in(
        "townes.pohozaev_quartic",
        consts.q0_fourth,
        q4_target * 0.995,
        q4_target * 1.005,
        "int Q0^4 = 2/g*(0) within 0.5%",
    ));
    assertions.push(record_le(
        "townes.two_solver_agreement",
        (profile.amplitude() - relaxed).abs(),
        1e-6,
        "shooting vs relaxation amplitude",
    ));
    assertions.push(record_le(
        "townes.residual",
        profile.residual(),
        1e-8,
        "max ODE residual on the mesh interior",
    ));
    Ok("townes".into())
}

fn run_minimize(
    config: &RunConfig,
    emitter: &mut Emitter,
    assertions: &mut Vec<AssertionRecord>,
) -> Result<String> {
    let grid = config.grid(16.0)?;
    let p = config.physics_params();
    let cfg = config.solver_config()?;
    let result = minimize(&p, &cfg, &grid)?;

    #[derive(Serialize)]
    struct MinimizeReport<'a> {
        energy: &'a crate::energy::EnergyBreakdown,
        iterations: usize,
        status: SolveStatus,
        eps_inv_grad: f64,
        multiplier: f64,
        grad_residual: f64,
        norm: f64,
    }
    let report = MinimizeReport {
        energy: &result.energy,
        iterations: result.iterations,
        status: result.status,
        eps_inv_grad: result.eps_inv_grad,
        multiplier: result.multiplier,
        grad_residual: result.grad_residual,
        norm: result.u.norm_sq(),
    };
    emitter.write("result.json", serde_json::to_string_pretty(&report)?.as_bytes())?;
    let rows: Vec<String> =
        result.history.iter().enumerate().map(|(i, e)| format!("{i},{e}")).collect();
    emitter.write_csv("minimize_history.csv", "iteration,energy", &rows)?;
    if config.emit_fields {
        let path = config.output_dir.join("u_final.bin");
        dump_field(&result.u, &path)?;
        emitter.track("u_final.bin")?;
        emitter.track("u_final.bin.json")?;
    }

    assertions.push(record_flag(
        "minimize.converged",
        result.converged(),
        format!("status {:?}", result.status),
    ));
    assertions.push(record_le(
        "minimize.constraint",
        (result.u.norm_sq() - 1.0).abs(),
        1e-10,
        "unit-norm constraint preserved",
    ));
    assertions.push(record_le(
        "minimize.stationarity",
        result.grad_residual,
        cfg.grad_tol * (1.0 + result.multiplier.abs()),
        "||G - mu u|| <= grad_tol (1 + |mu|)",
    ));
    assertions.push(record_flag(
        "minimize.monotone_descent",
        result
            .history
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs())),
        "accepted energies never increase beyond the noise-floor slack",
    ));
    // post-hoc box rule: L >= 12 x rms radius of the final density
    let rms = {
        let mut acc = 0.0;
        for iy in 0..grid.n() {
            for ix in 0..grid.n() {
                let (x, y) = grid.point(ix, iy);
                acc += (x * x + y * y) * result.u.values[grid.index(ix, iy)].norm_sqr();
            }
        }
        (acc * grid.cell_area()).sqrt()
    };
    assertions.push(record_ge(
        "minimize.box_rule",
        grid.box_length(),
        12.0 * rms,
        format!("box {} vs 12 x rms radius {rms}", grid.box_length()),
    ));
    Ok("minimize".into())
}

fn run_gstar(
    config: &RunConfig,
    emitter: &mut Emitter,
    assertions: &mut Vec<AssertionRecord>,
) -> Result<String> {
    let grid = config.grid(24.0)?;
    let cfg = config.solver_config()?;
    let mut rows = Vec::new();
    for &beta in &config.gstar_betas {
        let est = estimate_gstar(beta, &grid, &cfg)?;
        let certificate = gn_quotient(&est.witness, beta, 0.0)?;
        rows.push(format!(
            "{},{},{},{},{}",
            beta, est.value, est.lower_bound, est.upper_bound, est.iterations
        ));
        assertions.push(record_in(
            &format!("gstar.band[beta={beta}]"),
            est.value,
            est.lower_bound * (1.0 - 1e-9),
            est.upper_bound * 1.05,
            "estimate within the weak-field band",
        ));
        assertions.push(record_le(
            &format!("gstar.certificate[beta={beta}]"),
            (certificate - est.value).abs(),
            1e-6 * est.value,
            "witness quotient reproduces the estimate",
        ));
        if config.emit_fields {
            let name = format!("gstar_witness_beta_{beta}.bin");
            dump_field(&est.witness, &config.output_dir.join(&name))?;
            emitter.track(&name)?;
            emitter.track(&format!("{name}.json"))?;
        }
    }
    emitter.write_csv("gstar.csv", "beta,value,lower_bound,upper_bound,iterations", &rows)?;
    Ok("gstar".into())
}

fn run_sweep_sub(
    config: &RunConfig,
    emitter: &mut Emitter,
    assertions: &mut Vec<AssertionRecord>,
) -> Result<String> {
    let (_, consts) = townes::cached();
    let s = config.physics.s;
    let schedule: Vec<(f64, f64)> = config
        .sweep
        .deltas
        .iter()
        .map(|&d| (0.5 * d, consts.g_star0 * (1.0 - d)))
        .collect();
    let cfg = config.solver_config()?;
    let (points, fit) = subcritical_sweep(s, &schedule, config.grid.n, &cfg)?;
    emitter.write_csv("sweep_subcritical.csv", SWEEP_CSV_HEADER, &sweep_csv_rows(&points))?;
    emitter.write("sweep_subcritical_fit.json", serde_json::to_string_pretty(&fit)?.as_bytes())?;

    let target = 1.0 / (s + 2.0);
    assertions.push(record_in(
        "sweep_sub.exponent",
        fit.exponent,
        target - 0.02,
        target + 0.02,
        "ell vs g*(0) - g scaling exponent",
    ));
    assertions.push(record_ge("sweep_sub.r_squared", fit.r_squared, 0.98, "fit quality"));
    assertions.push(record_flag(
        "sweep_sub.all_converged",
        points.iter().all(|p| p.converged),
        "every sweep point converged",
    ));
    if let Some(tightest) = points.last() {
        assertions.push(record_in(
            "sweep_sub.energy_ratio",
            tightest.energy_measured / tightest.energy_predicted,
            0.9,
            1.1,
            "energy vs (s+2)/s Q_s ell^s at the tightest point",
        ));
    }
    let h1: Vec<f64> = points.iter().map(|p| p.h1_distance_to_townes).collect();
    assertions.push(record_flag(
        "sweep_sub.h1_monotone",
        h1.windows(2).all(|w| w[1] < w[0]),
        format!("H1 distances to the soliton decrease along the sweep: {h1:?}"),
    ));
    Ok("sweep-sub".into())
}

fn run_sweep_crit(
    config: &RunConfig,
    emitter: &mut Emitter,
    assertions: &mut Vec<AssertionRecord>,
) -> Result<String> {
    let (_, consts) = townes::cached();
    let s = config.physics.s;
    let cfg = config.solver_config()?;
    let (points, fit) = critical_sweep(s, &config.sweep.betas, config.grid.n, &cfg)?;
    emitter.write_csv("sweep_critical.csv", SWEEP_CSV_HEADER, &sweep_csv_rows(&points))?;
    emitter.write("sweep_critical_fit.json", serde_json::to_string_pretty(&fit)?.as_bytes())?;

    let target = 2.0 / (s + 2.0);
    let prefactor_target = (consts.a0 / consts.q_s).powf(1.0 / (s + 2.0));
    assertions.push(record_in(
        "sweep_crit.exponent",
        fit.exponent,
        target - 0.05,
        target + 0.05,
        "ell vs beta scaling exponent",
    ));
    assertions.push(record_in(
        "sweep_crit.prefactor",
        fit.prefactor,
        prefactor_target * 0.85,
        prefactor_target * 1.15,
        "prefactor vs (A0/Q_s)^{1/(s+2)}",
    ));
    assertions.push(record_ge("sweep_crit.r_squared", fit.r_squared, 0.98, "fit quality"));
    // kappa = eps_beta / beta^{2/(s+2)} approaches a positive constant
    let kappas: Vec<f64> = points
        .iter()
        .map(|p| p.ell_measured / p.beta.powf(2.0 / (s + 2.0)))
        .collect();
    let kmin = kappas.iter().cloned().fold(f64::INFINITY, f64::min);
    let kmax = kappas.iter().cloned().fold(0.0_f64, f64::max);
    assertions.push(record_in(
        "sweep_crit.kappa_bounded",
        kmax / kmin,
        1.0,
        1.35,
        format!("kappa spread across the sweep: {kappas:?}"),
    ));
    Ok("sweep-crit".into())
}

fn run_sweep_super(
    config: &RunConfig,
    emitter: &mut Emitter,
    assertions: &mut Vec<AssertionRecord>,
) -> Result<String> {
    let (_, consts) = townes::cached();
    let s = config.physics.s;
    let tau0 = config.sweep.tau0.unwrap_or(0.25 * consts.g_star0 * consts.a0);
    let cfg = config.solver_config()?;
    let (points, fit) = supercritical_sweep(s, tau0, &config.sweep.betas, config.grid.n, &cfg)?;
    emitter.write_csv("sweep_supercritical.csv", SWEEP_CSV_HEADER, &sweep_csv_rows(&points))?;
    emitter.write("sweep_supercritical_fit.json", serde_json::to_string_pretty(&fit)?.as_bytes())?;

    let target = 2.0 / (s + 2.0);
    let coefficient = ((consts.a0 - tau0 / consts.g_star0) / consts.q_s).powf(1.0 / (s + 2.0));
    assertions.push(record_in(
        "sweep_super.exponent",
        fit.exponent,
        target - 0.05,
        target + 0.05,
        "ell vs beta scaling exponent",
    ));
    assertions.push(record_in(
        "sweep_super.prefactor",
        fit.prefactor,
        coefficient * 0.8,
        coefficient * 1.2,
        "prefactor vs the super-critical length formula",
    ));
    assertions.push(record_ge("sweep_super.r_squared", fit.r_squared, 0.98, "fit quality"));

    // formula continuity at tau0 -> 0: the coefficient tends to the critical one
    let critical_coeff = (consts.a0 / consts.q_s).powf(1.0 / (s + 2.0));
    let tiny_tau_coeff =
        ((consts.a0 - 1e-12 / consts.g_star0) / consts.q_s).powf(1.0 / (s + 2.0));
    assertions.push(record_le(
        "sweep_super.tau0_continuity",
        (tiny_tau_coeff - critical_coeff).abs(),
        1e-10,
        "length formula is continuous at tau0 = 0",
    ));

    // instability probe far above the stable envelope
    let status = instability_probe(s, 2.0 * consts.g_star0 * consts.a0, 0.1, config.grid.n, &cfg)?;
    assertions.push(record_flag(
        "sweep_super.instability_reported",
        status == SolveStatus::Diverged,
        format!("tau0 = 2 g*(0) A0 probe status {status:?}"),
    ));
    Ok("sweep-super".into())
}

fn run_hartree_rates(
    config: &RunConfig,
    emitter: &mut Emitter,
    assertions: &mut Vec<AssertionRecord>,
) -> Result<String> {
    let (_, consts) = townes::cached();
    let grid = config.grid(16.0)?;
    let cfg = config.solver_config()?;
    let hs = &config.hartree_study;
    // fixed stable parameters for the ground-state gap
    let p = PhysicsParams {
        beta: 0.5,
        g: 0.5 * consts.g_star0,
        s: config.physics.s,
        trap_on: true,
        kernel: KernelConfig {
            padding_factor: config.physics.padding_factor,
            regularization_radius: 0.0,
            compat_pi2: config.compat_pi2,
        },
        hartree: None,
    };
    let study = hartree_rate_study(hs.nu, hs.eta, &hs.n_schedule, &p, &grid, &cfg)?;

    let rows: Vec<String> = study
        .points
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{},{},{}",
                p.n_particles, p.smearing_sigma, p.radius, p.quartic_gap, p.kinetic_gap, p.energy_gap
            )
        })
        .collect();
    emitter.write_csv(
        "hartree_rates.csv",
        "n_particles,smearing_sigma,radius,quartic_gap,kinetic_gap,energy_gap",
        &rows,
    )?;
    emitter.write("hartree_fits.json", serde_json::to_string_pretty(&study)?.as_bytes())?;

    assertions.push(record_le(
        "hartree.smear_slope",
        study.smear_fit.exponent,
        -hs.nu + 0.1,
        "fixed-field smearing gap decays at least like N^{-nu}",
    ));
    assertions.push(record_in(
        "hartree.smear_slope_symmetry_boost",
        study.smear_fit.exponent,
        -2.0 * hs.nu - 0.3,
        -2.0 * hs.nu + 0.3,
        "Gaussian W has zero first moment, so the observed rate is N^{-2 nu}",
    ));
    assertions.push(record_le(
        "hartree.reg_slope",
        study.reg_fit.exponent,
        -hs.eta + 0.1,
        "fixed-field regularization gap decays at least like N^{-eta}",
    ));
    let gaps: Vec<f64> = study.points.iter().map(|p| p.energy_gap).collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] * 1.001);
    assertions.push(record_flag(
        "hartree.gap_monotone",
        monotone && gaps.iter().all(|g| g.is_finite()),
        format!("|E_afH - E_afP| along the schedule: {gaps:?}"),
    ));
    assertions.push(record_le(
        "hartree.gap_vanishes",
        gaps.last().copied().unwrap_or(f64::NAN),
        0.1 * gaps.first().copied().unwrap_or(f64::NAN),
        "ground-state gap shrinks by 10x across the schedule",
    ));
    Ok("hartree-rates".into())
}

fn run_gn_weakfield(
    config: &RunConfig,
    emitter: &mut Emitter,
    assertions: &mut Vec<AssertionRecord>,
) -> Result<String> {
    let grid = config.grid(24.0)?;
    let cfg = config.solver_config()?;
    let mut betas = config.gstar_betas.clone();
    betas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if betas.last() != Some(&0.0) {
        betas.push(0.0);
    }
    let table = gn_optimizer_convergence(&betas, &grid, &cfg)?;
    let rows: Vec<String> = table
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{},{}",
                p.beta, p.gstar_value, p.gstar_lower, p.gstar_upper, p.h1_distance
            )
        })
        .collect();
    emitter.write_csv(
        "weakfield.csv",
        "beta,gstar_value,gstar_lower,gstar_upper,h1_distance",
        &rows,
    )?;

    let dists: Vec<f64> = table.iter().map(|p| p.h1_distance).collect();
    assertions.push(record_flag(
        "weakfield.monotone",
        dists.windows(2).all(|w| w[1] < w[0]),
        format!("optimizer distances decrease as beta -> 0: {dists:?}"),
    ));
    // last positive beta and the beta = 0 reference
    if table.len() >= 2 {
        assertions.push(record_le(
            "weakfield.smallest_distance",
            dists[table.len() - 2],
            0.05,
            "distance at the smallest positive beta",
        ));
    }
    assertions.push(record_le(
        "weakfield.zero_reference",
        *dists.last().unwrap(),
        1e-3,
        "beta = 0 witness is the soliton up to sampling error",
    ));
    let values: Vec<f64> = table.iter().map(|p| p.gstar_value).collect();
    assertions.push(record_flag(
        "weakfield.gstar_decreasing",
        values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)),
        format!("g*(beta) decreases toward g*(0): {values:?}"),
    ));
    for p in &table {
        assertions.push(record_in(
            &format!("weakfield.band[beta={}]", p.beta),
            p.gstar_value,
            p.gstar_lower * (1.0 - 1e-9),
            p.gstar_upper * 1.05,
            "estimate within the weak-field band",
        ));
    }
    Ok("gn-weakfield".into())
}

fn run_validate(
    config: &RunConfig,
    emitter: &mut Emitter,
    assertions: &mut Vec<AssertionRecord>,
) -> Result<String> {
    let (_, consts) = townes::cached();
    let seed = config.seed;

    // --- kernel: curl identity and Newton-oracle agreement at n = 256
    let grid = Grid::new(256, 16.0)?;
    let kernel_cfg = KernelConfig {
        padding_factor: config.physics.padding_factor,
        compat_pi2: config.compat_pi2,
        ..Default::default()
    };
    let mut worst_curl = 0.0_f64;
    for k in 0..3u64 {
        let rho = corpus::random_density(&grid, seed.wrapping_add(k));
        let c = curl_of_potential(&rho, &kernel_cfg)?;
        let scale = 1.0_f64.max(rho.max_abs());
        for i in 0..grid.len() {
            worst_curl = worst_curl
                .max((c.values[i] - std::f64::consts::TAU * rho.values[i]).abs() / scale);
        }
    }
    assertions.push(record_le(
        "kernel.curl_identity",
        worst_curl,
        1e-5,
        "curl(A[rho]) = 2 pi rho in sup norm, smooth decayed densities",
    ));

    let rho2d = crate::grid::RealField::from_fn(&grid, |x, y| {
        (-(x * x + y * y)).exp() / std::f64::consts::PI
    });
    let a = vector_potential(&rho2d, &kernel_cfg)?;
    let m = 16001;
    let dr = 16.0 / (m - 1) as f64;
    let rr: Vec<f64> = (0..m).map(|i| i as f64 * dr).collect();
    let rho_r: Vec<f64> =
        rr.iter().map(|&t| (-t * t).exp() / std::f64::consts::PI).collect();
    let oracle = radial_oracle(&rr, &rho_r, &grid)?;
    let amax = oracle
        .x
        .iter()
        .zip(&oracle.y)
        .map(|(p, q)| (p * p + q * q).sqrt())
        .fold(0.0_f64, f64::max);
    let mut worst_oracle = 0.0_f64;
    for i in 0..grid.len() {
        let err = ((a.x[i] - oracle.x[i]).powi(2) + (a.y[i] - oracle.y[i]).powi(2)).sqrt();
        worst_oracle = worst_oracle.max(err);
    }
    assertions.push(record_le(
        "kernel.oracle_agreement",
        worst_oracle / amax,
        1e-3,
        "A[rho] vs the radial Newton oracle, normalized sup error",
    ));

    // --- gradient: finite-difference agreement over the corpus
    let fd_grid = Grid::new(64, 14.0)?;
    let eps = 1e-5;
    let mut combos = Vec::new();
    for beta in [0.0, 0.1] {
        for g in [0.0, 5.0] {
            for hartree in [false, true] {
                combos.push((beta, g, hartree));
            }
        }
    }
    let worst_fd = combos
        .par_iter()
        .map(|&(beta, g, hartree)| -> Result<f64> {
            let p = PhysicsParams {
                beta,
                g,
                hartree: hartree.then_some(HartreeParams { nu: 0.75, n_particles: 64.0 }),
                kernel: KernelConfig::with_radius(if hartree { 0.05 } else { 0.0 }),
                ..Default::default()
            };
            let mut worst = 0.0_f64;
            for fs in 0..config.validate.fd_fields as u64 {
                let u = corpus::random_field(&fd_grid, seed.wrapping_add(1000 + fs));
                let gr = if hartree { grad_afh(&u, &p) } else { grad_afp(&u, &p) }?;
                for ds in 0..config.validate.fd_directions as u64 {
                    let phi = corpus::random_field(&fd_grid, seed.wrapping_add(5000 + ds));
                    let predicted = 2.0 * inner(&gr, &phi)?.re;
                    let mut up = u.clone();
                    let mut um = u.clone();
                    for i in 0..fd_grid.len() {
                        up.values[i] += eps * phi.values[i];
                        um.values[i] -= eps * phi.values[i];
                    }
                    let ep = energy_unchecked(&up, &p, hartree)?.total;
                    let em = energy_unchecked(&um, &p, hartree)?.total;
                    let fd = (ep - em) / (2.0 * eps);
                    worst = worst.max((predicted - fd).abs() / fd.abs().max(1.0));
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0_f64, f64::max);
    assertions.push(record_le(
        "gradient.fd_agreement",
        worst_fd,
        1e-5,
        "Euler-Lagrange operator vs central differences of the energy",
    ));

    // --- inequality suite on random normalized fields
    let ineq_grid = Grid::new(128, 16.0)?;
    let betas = [0.0, 0.5, 1.0, 2.0];
    let margins: Vec<(f64, f64, f64)> = (0..config.validate.inequality_fields as u64)
        .into_par_iter()
        .map(|k| -> Result<(f64, f64, f64)> {
            let u = corpus::random_field(&ineq_grid, seed.wrapping_add(20_000 + k));
            let grad_abs = grad_abs_norm_sq(&u);
            let quartic: f64 = ineq_grid.cell_area()
                * u.values.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>();
            let mut dia = f64::INFINITY;
            let mut bogo = f64::INFINITY;
            for &beta in &betas {
                let p = PhysicsParams { beta, trap_on: false, ..Default::default() };
                let b = energy_afp(&u, &p)?;
                dia = dia.min(b.kinetic_magnetic - grad_abs);
                bogo = bogo.min(
                    b.kinetic_magnetic - 2.0 * std::f64::consts::PI * beta * quartic,
                );
            }
            // GN: kinetic of |u| >= g*(0)/2 int |u|^4 for unit mass
            let gn = grad_abs - 0.5 * consts.g_star0 * quartic;
            Ok((dia, bogo, gn))
        })
        .collect::<Result<_>>()?;
    let worst_dia = margins.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    let worst_bogo = margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let worst_gn = margins.iter().map(|m| m.2).fold(f64::INFINITY, f64::min);
    assertions.push(record_ge(
        "inequality.diamagnetic",
        worst_dia,
        -1e-8,
        "kinetic_magnetic - ||grad |u|||^2 over the corpus",
    ));
    assertions.push(record_ge(
        "inequality.bogomolny",
        worst_bogo,
        -1e-8,
        "kinetic_magnetic - 2 pi beta int |u|^4 over the corpus",
    ));
    assertions.push(record_ge(
        "inequality.gn",
        worst_gn,
        -1e-8,
        "||grad |u|||^2 - g*(0)/2 int |u|^4 over the corpus",
    ));

    let summary = serde_json::json!({
        "worst_curl_identity": worst_curl,
        "worst_oracle_agreement": worst_oracle / amax,
        "worst_fd_agreement": worst_fd,
        "worst_diamagnetic_margin": worst_dia,
        "worst_bogomolny_margin": worst_bogo,
        "worst_gn_margin": worst_gn,
    });
    emitter.write("validate_summary.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok("validate".into())
}
