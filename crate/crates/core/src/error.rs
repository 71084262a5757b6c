//! Error type shared across the solver crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid: n must be a power of two >= 16, got {0}")]
    BadGridSize(usize),
    #[error("grid: box length must be positive, got {0}")]
    BadBoxLength(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field is not L2-normalized: |u|^2 integrates to {0}")]
    NotNormalized(f64),
    #[error("density has negative values (min = {0})")]
    NegativeDensity(f64),
    #[error("regularization radius {radius} out of range (must be < {max})")]
    BadRegularizationRadius { radius: f64, max: f64 },
    #[error("padding factor must be 2 or 4, got {0}")]
    BadPaddingFactor(usize),
    #[error("hartree parameters missing (energy_afh requires them)")]
    MissingHartree,
    #[error("quartic norm vanishes; quotient undefined")]
    VanishingQuartic,
    #[error("invalid physics parameters: {0}")]
    BadParams(String),
    #[error("invalid solver configuration: {0}")]
    BadSolverConfig(String),
    #[error("shooting bracket failed: no sign change on [{lo}, {hi}]")]
    ShootingBracket { lo: f64, hi: f64 },
    #[error("radial tabulation too short: r_max = {r_max}, need >= {need}")]
    RadialRangeTooShort { r_max: f64, need: f64 },
    #[error("soliton scale {scale} under-resolved on grid with spacing {h} (need >= 8 points across the core)")]
    ScaleUnderResolved { scale: f64, h: f64 },
    #[error("minimization did not converge: {0}")]
    NotConverged(String),
    #[error("collapse under-resolved / unstable regime (beta = {beta}, g = {g})")]
    Unstable { beta: f64, g: f64 },
    #[error("sweep point violates its regime hypothesis: {0}")]
    RegimeGuard(String),
    #[error("config schema violation at key `{key}`: {message}")]
    Schema { key: String, message: String },
    #[error("field file: {0}")]
    FieldFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
