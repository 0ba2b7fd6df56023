use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{XiParams, DEFAULT_XI_MAX_SHELL};
use crate::random::derive_seed;

/// Time-stepping scheme for the Galerkin system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Itô form with the correction drift, Euler–Maruyama noise.
    EulerMaruyamaIto,
    /// Itô form with the correction drift plus the commutative Milstein term.
    MilsteinIto,
    /// Stratonovich form (no correction drift), stochastic Heun predictor–corrector.
    HeunStratonovich,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::EulerMaruyamaIto => "euler_maruyama_ito",
            Scheme::MilsteinIto => "milstein_ito",
            Scheme::HeunStratonovich => "heun_stratonovich",
        }
    }
}

/// Treatment of the viscous term `-νAu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Viscous {
    /// Exact per-mode decay factor `e^{-νλ dt}` (integrating factor).
    Exact,
    /// Explicit evaluation alongside the other drift terms.
    Explicit,
}

/// Which blow-up functional drives the stopping time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monitor {
    /// `sup ‖u‖₁² + ∫ ‖u‖₂²`
    H,
    /// `sup ‖u‖₂² + ∫ ‖u‖₃²`
    V,
}

impl Monitor {
    /// Sobolev indices `(sup norm, integrated norm)`.
    pub fn indices(&self) -> (u32, u32) {
        match self {
            Monitor::H => (1, 2),
            Monitor::V => (2, 3),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    TaylorGreen,
    Random,
    Zero,
}

/// Initial condition. `amplitude` is the Taylor–Green coefficient, or the L²
/// norm of a random field on shells `1..=max_shell` with spectral slope `slope`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub max_shell: i64,
    pub slope: f64,
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition {
            kind: InitialKind::TaylorGreen,
            amplitude: 1.0,
            max_shell: 16,
            slope: 1.0,
        }
    }
}

/// One simulation: grid, Galerkin level, physics, noise, time stepping and
/// the stopping rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dim: usize,
    pub resolution: usize,
    /// Number of eigenvalue shells kept; `None` keeps the whole retained band.
    pub shells: Option<usize>,
    pub nu: f64,
    pub xi_count: usize,
    pub xi_decay: f64,
    pub xi_amplitude: f64,
    pub xi_max_shell: i64,
    pub dt: f64,
    pub horizon: f64,
    /// Stopping threshold `M`.
    pub threshold: f64,
    pub scheme: Scheme,
    pub viscous: Viscous,
    pub monitor: Monitor,
    pub seed: u64,
    /// Snapshot every this many steps; zero disables snapshots.
    pub snapshot_every: usize,
    pub initial: InitialCondition,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dim: 2,
            resolution: 32,
            shells: None,
            nu: 1.0,
            xi_count: 0,
            xi_decay: 0.5,
            xi_amplitude: 0.05,
            xi_max_shell: DEFAULT_XI_MAX_SHELL,
            dt: 1e-3,
            horizon: 1.0,
            threshold: 100.0,
            scheme: Scheme::EulerMaruyamaIto,
            viscous: Viscous::Exact,
            monitor: Monitor::H,
            seed: 0,
            snapshot_every: 0,
            initial: InitialCondition::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.threshold.is_nan() || self.threshold <= 1.0 {
            return Err(Error::param(
                "threshold",
                format!("M must exceed 1, got {}", self.threshold),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::param("horizon", format!("must be positive, got {}", self.horizon)));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::param("nu", format!("must be positive, got {}", self.nu)));
        }
        if self.xi_count > 0 && !(self.xi_decay > 0.0 && self.xi_decay < 1.0) {
            return Err(Error::param(
                "xi_decay",
                format!("must lie in (0, 1), got {}", self.xi_decay),
            ));
        }
        if !(self.initial.amplitude >= 0.0 && self.initial.amplitude.is_finite()) {
            return Err(Error::param("initial_amplitude", "must be finite and non-negative"));
        }
        Ok(())
    }

    /// Number of steps needed to reach the horizon.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }

    pub fn xi_params(&self) -> XiParams {
        XiParams {
            count: self.xi_count,
            decay: self.xi_decay,
            amplitude: self.xi_amplitude,
            max_shell: self.xi_max_shell,
            seed: derive_seed(self.seed, &[0x5849]),
        }
    }

    /// Seed of the driving Brownian path for Monte Carlo path `path`.
    pub fn path_seed(&self, path: u64) -> u64 {
        derive_seed(self.seed, &[0x5057, path])
    }

    pub fn initial_seed(&self) -> u64 {
        derive_seed(self.seed, &[0x5530])
    }
}
