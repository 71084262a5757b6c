//! Acceptance suite: one test per quantitative criterion, each printing a
//! pass/fail line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Criteria 2-4 share a single `validate` run; the collapse sweeps use the
//! default schedules at n = 256 on per-point rescaled boxes.

use std::path::PathBuf;
use std::sync::OnceLock;

use csgs::energy::PhysicsParams;
use csgs::grid::Grid;
use csgs::minimizer::{minimize, InitKind, SolverConfig};
use csgs::runner::{run, Manifest, RunConfig};
use csgs::townes;

fn out_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("csgs_acceptance").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn report(criterion: usize, label: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("acceptance criterion {criterion} [{label}]: {tag} -- {detail}");
    assert!(passed, "criterion {criterion} ({label}): {detail}");
}

fn assertion_detail(manifest: &Manifest, name: &str) -> (bool, String) {
    match manifest.assertions.iter().find(|a| a.name == name) {
        Some(a) => (
            a.passed,
            format!("{} = {:.6e} in [{:.3e}, {:.3e}]", a.name, a.value, a.lo, a.hi),
        ),
        None => (false, format!("assertion {name} missing from manifest")),
    }
}

fn check_named(criterion: usize, label: &str, manifest: &Manifest, names: &[&str]) {
    for name in names {
        let (passed, detail) = assertion_detail(manifest, name);
        report(criterion, label, passed, &detail);
    }
}

fn run_command(json: &str, dir: &str) -> Manifest {
    let mut cfg = RunConfig::from_json(json).expect("config");
    cfg.output_dir = out_dir(dir);
    run(&cfg).expect("runner")
}

/// Shared validate run backing criteria 2, 3 and 4 (full corpus sizes).
fn validate_manifest() -> &'static Manifest {
    static MANIFEST: OnceLock<Manifest> = OnceLock::new();
    MANIFEST.get_or_init(|| run_command(r#"{"command": "validate"}"#, "validate"))
}

#[test]
fn criterion_1_townes_constants() {
    let manifest = run_command(r#"{"command": "townes"}"#, "townes");
    check_named(
        1,
        "townes constants",
        &manifest,
        &[
            "townes.norm_band",
            "townes.grad_normalization",
            "townes.pohozaev_quartic",
            "townes.two_solver_agreement",
            "townes.residual",
        ],
    );
}

#[test]
fn criterion_2_kernel_correctness() {
    let manifest = validate_manifest();
    check_named(
        2,
        "kernel correctness",
        manifest,
        &["kernel.curl_identity", "kernel.oracle_agreement"],
    );
}

#[test]
fn criterion_3_gradient_correctness() {
    let manifest = validate_manifest();
    check_named(3, "gradient correctness", manifest, &["gradient.fd_agreement"]);
}

#[test]
fn criterion_4_inequality_suite() {
    let manifest = validate_manifest();
    check_named(
        4,
        "inequality suite",
        manifest,
        &["inequality.diamagnetic", "inequality.bogomolny", "inequality.gn"],
    );
}

#[test]
fn criterion_5_stable_regime_ground_state() {
    // harmonic-oscillator oracle: beta = 0, g = 0, V = |x|^2
    let grid = Grid::new(128, 16.0).unwrap();
    let p = PhysicsParams::default();
    let cfg = SolverConfig { max_iters: 1000, ..Default::default() };
    let r = minimize(&p, &cfg, &grid).unwrap();
    report(
        5,
        "harmonic oracle",
        r.converged() && (r.energy.total - 2.0).abs() <= 1e-4,
        &format!("energy {} vs 2 (tolerance 1e-4)", r.energy.total),
    );

    // interacting magnetic point well inside the stable regime
    let (_, c) = townes::cached();
    let grid = Grid::new(256, 16.0).unwrap();
    let p = PhysicsParams { beta: 0.1, g: 0.5 * c.g_star0, ..Default::default() };
    let cfg = SolverConfig { max_iters: 3000, grad_tol: 1e-6, ..Default::default() };
    let r = minimize(&p, &cfg, &grid).unwrap();
    let stationarity = r.grad_residual / (1.0 + r.multiplier.abs());
    report(
        5,
        "magnetic stable point",
        r.converged() && stationarity <= 1e-6,
        &format!(
            "converged {} with stationarity residual {stationarity:.3e} (tolerance 1e-6)",
            r.converged()
        ),
    );
}

#[test]
fn criterion_6_subcritical_collapse() {
    let manifest = run_command(
        r#"{"command": "sweep-sub", "solver": {"max_iters": 2500, "grad_tol": 1e-5, "energy_tol": 1e-11}}"#,
        "sweep_sub",
    );
    check_named(
        6,
        "sub-critical collapse",
        &manifest,
        &[
            "sweep_sub.exponent",
            "sweep_sub.r_squared",
            "sweep_sub.all_converged",
            "sweep_sub.energy_ratio",
            "sweep_sub.h1_monotone",
        ],
    );
}

#[test]
fn criterion_7_critical_collapse() {
    let manifest = run_command(
        r#"{"command": "sweep-crit", "solver": {"max_iters": 2500, "grad_tol": 1e-5, "energy_tol": 1e-11}}"#,
        "sweep_crit",
    );
    check_named(
        7,
        "critical collapse",
        &manifest,
        &[
            "sweep_crit.exponent",
            "sweep_crit.prefactor",
            "sweep_crit.r_squared",
            "sweep_crit.kappa_bounded",
        ],
    );
}

#[test]
fn criterion_8_supercritical_collapse() {
    let manifest = run_command(
        r#"{"command": "sweep-super", "solver": {"max_iters": 2500, "grad_tol": 1e-5, "energy_tol": 1e-11}}"#,
        "sweep_super",
    );
    check_named(
        8,
        "super-critical collapse",
        &manifest,
        &[
            "sweep_super.exponent",
            "sweep_super.prefactor",
            "sweep_super.r_squared",
            "sweep_super.tau0_continuity",
            "sweep_super.instability_reported",
        ],
    );
}

#[test]
fn criterion_9_weak_field_band() {
    let manifest = run_command(
        r#"{"command": "gn-weakfield", "gstar_betas": [0.2, 0.1, 0.05],
            "solver": {"max_iters": 600, "grad_tol": 1e-6}}"#,
        "weakfield",
    );
    let names: Vec<String> = manifest
        .assertions
        .iter()
        .map(|a| a.name.clone())
        .filter(|n| n.starts_with("weakfield."))
        .collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    check_named(9, "weak-field band", &manifest, &refs);
}

#[test]
fn criterion_10_hartree_rates() {
    let manifest = run_command(
        r#"{"command": "hartree-rates", "grid": {"n": 128, "box_length": 16.0},
            "solver": {"max_iters": 2000, "grad_tol": 1e-7}}"#,
        "hartree",
    );
    check_named(
        10,
        "hartree rates",
        &manifest,
        &[
            "hartree.smear_slope",
            "hartree.smear_slope_symmetry_boost",
            "hartree.reg_slope",
            "hartree.gap_monotone",
            "hartree.gap_vanishes",
        ],
    );
}
