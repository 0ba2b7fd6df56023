//! Numerical audits of the growth, coercivity, Lipschitz and monotonicity
//! inequalities for the concrete Navier–Stokes operators.
//!
//! Space identification: `V = W^{3,2}_σ`, `H = W^{2,2}_σ`, `U = W^{1,2}_σ`,
//! `X = L²_σ`, i.e. Sobolev indices 3, 2, 1 and 0. The operators are the Itô
//! drift `𝒜(φ) = -𝒫L_φφ - νAφ + ½Σ𝒫B_i²φ` and `𝒢_i(φ) = -𝒫B_iφ`.

mod checks;

pub use checks::{
    check_cancellation, check_coercive_inequality, check_commutator_order, check_growth_bounds,
    check_local_lipschitz, check_monotonicity_pair, check_projection_commutation, check_projection_properties,
    coercive_amplitude_sweep,
};

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{make_grid, TorusGrid};
use crate::noise::{XiEnsemble, XiParams};
use crate::random::derive_seed;
use crate::sde::{DriftParts, GalerkinSystem};
use crate::spectrum::StokesSpectrum;

pub const SPACE_V: u32 = 3;
pub const SPACE_H: u32 = 2;
pub const SPACE_U: u32 = 1;
pub const SPACE_X: u32 = 0;

/// Exponents of the growth envelopes
/// `K(φ,ψ) = 1 + ‖φ‖_U^p + ‖ψ‖_U^q` and `K̃(φ,ψ) = K(φ,ψ) + ‖φ‖_H^p̃ + ‖ψ‖_H^q̃`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub p_tilde: f64,
    pub q_tilde: f64,
}

impl Default for Exponents {
    fn default() -> Self {
        Exponents {
            p: 4.0,
            q: 4.0,
            p_tilde: 2.0,
            q_tilde: 2.0,
        }
    }
}

impl Exponents {
    pub fn k(&self, u_phi: f64) -> f64 {
        1.0 + u_phi.powf(self.p)
    }

    pub fn k_pair(&self, u_phi: f64, u_psi: f64) -> f64 {
        1.0 + u_phi.powf(self.p) + u_psi.powf(self.q)
    }

    pub fn k_tilde(&self, u_phi: f64, h_phi: f64) -> f64 {
        self.k(u_phi) + h_phi.powf(self.p_tilde)
    }

    pub fn k_tilde_pair(&self, u_phi: f64, u_psi: f64, h_phi: f64, h_psi: f64) -> f64 {
        self.k_pair(u_phi, u_psi) + h_phi.powf(self.p_tilde) + h_psi.powf(self.q_tilde)
    }
}

/// Audit suite parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabConfig {
    pub dim: usize,
    pub resolution: usize,
    pub nu: f64,
    pub xi: XiParams,
    pub seed: u64,
    pub samples: usize,
    /// Independent directions in magnitude and difference sweeps.
    pub directions: usize,
    pub exponents: Exponents,
    /// Constant multiplying `K̃` when estimating κ; zero isolates the
    /// dissipative margin.
    pub coercive_c: f64,
    pub kappa_min: f64,
    /// Galerkin levels (shell counts) sampled by the V_n audits; `None` is the full band.
    pub levels: Vec<Option<usize>>,
    /// Random test fields live on shells `1..=field_max_shell` with slope `field_slope`.
    pub field_max_shell: i64,
    pub field_slope: f64,
    pub commutator_resolution: usize,
    pub commutator_max_shell: i64,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            dim: 2,
            resolution: 32,
            nu: 1.0,
            xi: XiParams {
                count: 4,
                ..XiParams::default()
            },
            seed: 0,
            samples: 100,
            directions: 5,
            exponents: Exponents::default(),
            coercive_c: 0.0,
            kappa_min: 0.5,
            levels: vec![Some(2), Some(8), None],
            field_max_shell: 50,
            field_slope: 1.0,
            commutator_resolution: 64,
            commutator_max_shell: 64,
        }
    }
}

/// Outcome of an expected-fail control.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Control {
    pub description: String,
    pub value: f64,
    pub failed_as_expected: bool,
}

/// One audited inequality.
///
/// `ratio[k] = max(lhs[k], 0) / rhs_base[k]` (zero when both vanish), so
/// ratios are non-negative and `c_hat` is the smallest constant satisfying
/// the suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub id: String,
    pub inequality: String,
    pub samples: usize,
    pub lhs: Vec<f64>,
    pub rhs_base: Vec<f64>,
    pub ratio: Vec<f64>,
    pub c_hat: f64,
    pub kappa_hat: Option<f64>,
    pub trend_slope: Option<f64>,
    pub pass: bool,
    pub exponents: Exponents,
    pub metrics: BTreeMap<String, f64>,
    pub control: Option<Control>,
}

impl AssumptionReport {
    pub(crate) fn new(id: &str, inequality: &str, exponents: Exponents, lhs: Vec<f64>, rhs_base: Vec<f64>) -> Self {
        let ratio: Vec<f64> = lhs.iter().zip(&rhs_base).map(|(&l, &r)| ratio(l, r)).collect();
        let c_hat = ratio.iter().copied().fold(0.0, f64::max);
        AssumptionReport {
            id: id.to_string(),
            inequality: inequality.to_string(),
            samples: lhs.len(),
            lhs,
            rhs_base,
            ratio,
            c_hat,
            kappa_hat: None,
            trend_slope: None,
            pass: false,
            exponents,
            metrics: BTreeMap::new(),
            control: None,
        }
    }

    pub fn ratios_finite(&self) -> bool {
        self.ratio.iter().all(|r| r.is_finite())
    }

    pub(crate) fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }
}

pub(crate) fn ratio(lhs: f64, rhs: f64) -> f64 {
    let l = lhs.max(0.0);
    if l == 0.0 {
        0.0
    } else {
        l / rhs
    }
}

/// Shared grids, ensembles and operators for a suite run.
pub struct LabContext {
    pub cfg: LabConfig,
    pub grid: Arc<TorusGrid>,
    pub spectrum: Arc<StokesSpectrum>,
    pub ensemble: Arc<XiEnsemble<f64>>,
    /// Full Itô operators on the whole retained band.
    pub system: GalerkinSystem<f64>,
}

impl LabContext {
    pub fn new(cfg: &LabConfig) -> Result<Self> {
        let grid = Arc::new(make_grid(cfg.dim, cfg.resolution)?);
        let spectrum = Arc::new(StokesSpectrum::new(&grid));
        let xi = XiParams {
            seed: derive_seed(cfg.seed, &[0x5849]),
            ..cfg.xi
        };
        let ensemble = Arc::new(if xi.count == 0 {
            XiEnsemble::empty(&grid)
        } else {
            XiEnsemble::generate(&grid, &xi)?
        });
        let system = GalerkinSystem::new(&spectrum, None, cfg.nu, &ensemble)?;
        Ok(LabContext {
            cfg: cfg.clone(),
            grid,
            spectrum,
            ensemble,
            system,
        })
    }

    /// The Stokes part alone: no nonlinearity, no noise.
    pub fn stokes_system(&self) -> Result<GalerkinSystem<f64>> {
        let empty = Arc::new(XiEnsemble::empty(&self.grid));
        Ok(self.system.with_ensemble(&empty)?.with_parts(DriftParts {
            nonlinear: false,
            ito_correction: false,
        }))
    }

    /// Sample stream seed for audit `tag`.
    pub(crate) fn seed(&self, tag: u64) -> u64 {
        derive_seed(self.cfg.seed, &[0x4c4142, tag])
    }
}

/// All audits with their pass flags.
#[derive(Clone, Debug, Serialize)]
pub struct LabSuite {
    pub config: LabConfig,
    pub reports: Vec<AssumptionReport>,
    pub pass: bool,
}

pub fn run_suite(cfg: &LabConfig) -> Result<LabSuite> {
    let ctx = LabContext::new(cfg)?;
    let mut reports = vec![check_cancellation(&ctx, cfg.samples)?];
    reports.extend(check_growth_bounds(&ctx, cfg.samples)?);
    reports.push(check_coercive_inequality(&ctx, cfg.samples)?);
    reports.extend(check_local_lipschitz(&ctx, cfg.samples)?);
    reports.extend(check_monotonicity_pair(&ctx, cfg.samples)?);
    reports.push(check_projection_properties(&ctx, cfg.samples)?);
    reports.push(check_projection_commutation(&ctx, cfg.samples)?);
    reports.push(check_commutator_order(&ctx)?);
    let pass = reports.iter().all(|r| r.pass);
    Ok(LabSuite {
        config: cfg.clone(),
        reports,
        pass,
    })
}
