//! Flat TOML run configuration. Every key has a default; unknown keys are
//! rejected so a typo can never silently fall back to a default.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use salt_core::lab::{Exponents, LabConfig};
use salt_core::noise::XiParams;
use salt_core::sde::{InitialCondition, InitialKind, Monitor, Scheme, SimConfig, Viscous};
use salt_core::{make_grid, StokesSpectrum};

/// Every recognized key with its default. The resolved form is echoed into
/// each output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub resolution: usize,
    /// Largest Stokes eigenvalue kept by `simulate`; 0 keeps the full band.
    pub max_eigenvalue: i64,
    pub nu: f64,
    pub xi_count: usize,
    pub xi_decay: f64,
    pub xi_amplitude: f64,
    pub xi_max_shell: i64,
    pub dt: f64,
    pub horizon: f64,
    /// Stopping threshold M.
    pub threshold: f64,
    pub scheme: Scheme,
    pub viscous: Viscous,
    pub monitor: Monitor,
    pub seed: u64,
    pub snapshot_every: usize,
    pub initial: InitialKind,
    pub initial_amplitude: f64,
    pub initial_max_shell: i64,
    pub initial_slope: f64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,

    /// Eigenvalue caps of the Galerkin levels compared by `cauchy`; 0 is the full band.
    pub levels: Vec<i64>,
    pub paths: usize,
    pub s_grid: Vec<f64>,

    pub samples: usize,
    pub directions: usize,
    pub kappa_min: f64,
    pub coercive_c: f64,
    pub p: f64,
    pub q: f64,
    pub p_tilde: f64,
    pub q_tilde: f64,
    pub field_max_shell: i64,
    pub field_slope: f64,
    pub commutator_resolution: usize,
    pub commutator_max_shell: i64,
    /// Resolutions audited by `assumptions`; empty means `[resolution]`.
    pub resolutions: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        let lab = LabConfig::default();
        RunConfig {
            dim: sim.dim,
            resolution: sim.resolution,
            max_eigenvalue: 0,
            nu: sim.nu,
            xi_count: lab.xi.count,
            xi_decay: sim.xi_decay,
            xi_amplitude: sim.xi_amplitude,
            xi_max_shell: sim.xi_max_shell,
            dt: sim.dt,
            horizon: sim.horizon,
            threshold: sim.threshold,
            scheme: sim.scheme,
            viscous: sim.viscous,
            monitor: sim.monitor,
            seed: sim.seed,
            snapshot_every: sim.snapshot_every,
            initial: sim.initial.kind,
            initial_amplitude: sim.initial.amplitude,
            initial_max_shell: sim.initial.max_shell,
            initial_slope: sim.initial.slope,
            threads: 0,
            levels: vec![2, 8, 0],
            paths: 16,
            s_grid: vec![0.2, 0.1, 0.05, 0.02, 0.01],
            samples: lab.samples,
            directions: lab.directions,
            kappa_min: lab.kappa_min,
            coercive_c: lab.coercive_c,
            p: lab.exponents.p,
            q: lab.exponents.q,
            p_tilde: lab.exponents.p_tilde,
            q_tilde: lab.exponents.q_tilde,
            field_max_shell: lab.field_max_shell,
            field_slope: lab.field_slope,
            commutator_resolution: lab.commutator_resolution,
            commutator_max_shell: lab.commutator_max_shell,
            resolutions: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("{}", e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        if self.seed > i64::MAX as u64 {
            bail!("invalid parameter `seed`: must not exceed {}", i64::MAX);
        }
        Ok(toml::to_string(self)?)
    }

    /// Checks every key-level invariant, naming the offending key.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.sim_config()?;
        if self.max_eigenvalue < 0 {
            bail!("invalid parameter `max_eigenvalue`: must be non-negative (0 keeps the full band)");
        }
        if self.levels.iter().any(|&l| l < 0) {
            bail!("invalid parameter `levels`: eigenvalue caps must be non-negative (0 is the full band)");
        }
        if self.s_grid.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            bail!("invalid parameter `s_grid`: times must be finite and non-negative");
        }
        if self.samples == 0 {
            bail!("invalid parameter `samples`: must be at least 1");
        }
        if self.directions == 0 {
            bail!("invalid parameter `directions`: must be at least 1");
        }
        for (name, v) in [("p", self.p), ("q", self.q), ("p_tilde", self.p_tilde), ("q_tilde", self.q_tilde)] {
            if !(v >= 0.0 && v.is_finite()) {
                bail!("invalid parameter `{name}`: exponents must be finite and non-negative");
            }
        }
        for &r in self.resolutions.iter().chain([&self.commutator_resolution]) {
            make_grid(self.dim, r).map_err(|e| anyhow::anyhow!("invalid parameter `resolutions`: {e}"))?;
        }
        Ok(())
    }

    /// Simulation parameters with the eigenvalue cap converted to a shell count.
    pub fn sim_config(&self) -> anyhow::Result<SimConfig> {
        let grid = std::sync::Arc::new(
            make_grid(self.dim, self.resolution).map_err(|e| anyhow::anyhow!("invalid parameter `resolution`: {e}"))?,
        );
        let spectrum = StokesSpectrum::new(&grid);
        let cfg = SimConfig {
            dim: self.dim,
            resolution: self.resolution,
            shells: shells_for(&spectrum, self.max_eigenvalue, "max_eigenvalue")?,
            nu: self.nu,
            xi_count: self.xi_count,
            xi_decay: self.xi_decay,
            xi_amplitude: self.xi_amplitude,
            xi_max_shell: self.xi_max_shell,
            dt: self.dt,
            horizon: self.horizon,
            threshold: self.threshold,
            scheme: self.scheme,
            viscous: self.viscous,
            monitor: self.monitor,
            seed: self.seed,
            snapshot_every: self.snapshot_every,
            initial: InitialCondition {
                kind: self.initial,
                amplitude: self.initial_amplitude,
                max_shell: self.initial_max_shell,
                slope: self.initial_slope,
            },
        };
        cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(cfg)
    }

    /// Galerkin levels as shell counts (`None` is the full band).
    pub fn level_shells(&self) -> anyhow::Result<Vec<Option<usize>>> {
        let grid = std::sync::Arc::new(make_grid(self.dim, self.resolution)?);
        let spectrum = StokesSpectrum::new(&grid);
        self.levels
            .iter()
            .map(|&l| shells_for(&spectrum, l, "levels"))
            .collect()
    }

    pub fn lab_config(&self, resolution: usize) -> LabConfig {
        LabConfig {
            dim: self.dim,
            resolution,
            nu: self.nu,
            xi: XiParams {
                count: self.xi_count,
                decay: self.xi_decay,
                amplitude: self.xi_amplitude,
                max_shell: self.xi_max_shell,
                seed: 0,
            },
            seed: self.seed,
            samples: self.samples,
            directions: self.directions,
            exponents: Exponents {
                p: self.p,
                q: self.q,
                p_tilde: self.p_tilde,
                q_tilde: self.q_tilde,
            },
            coercive_c: self.coercive_c,
            kappa_min: self.kappa_min,
            levels: LabConfig::default().levels,
            field_max_shell: self.field_max_shell,
            field_slope: self.field_slope,
            commutator_resolution: self.commutator_resolution,
            commutator_max_shell: self.commutator_max_shell,
        }
    }

    pub fn audit_resolutions(&self) -> Vec<usize> {
        if self.resolutions.is_empty() {
            vec![self.resolution]
        } else {
            self.resolutions.clone()
        }
    }
}

fn shells_for(spectrum: &StokesSpectrum, cap: i64, key: &str) -> anyhow::Result<Option<usize>> {
    if cap == 0 || cap >= *spectrum.shells().last().unwrap_or(&0) {
        return Ok(None);
    }
    let n = spectrum.shells_through(cap);
    if n == 0 {
        bail!("invalid parameter `{key}`: no eigenvalue shell at or below {cap}");
    }
    Ok(Some(n))
}
