use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{leray_project, stokes_apply, SpectralField};
use crate::grid::TorusGrid;
use crate::noise::XiEnsemble;
use crate::operators::OperatorWorkspace;
use crate::real::Real;
use crate::spectrum::StokesSpectrum;

use super::config::{Scheme, Viscous};

/// Drift terms that can be switched off for controlled experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DriftParts {
    pub nonlinear: bool,
    pub ito_correction: bool,
}

impl Default for DriftParts {
    fn default() -> Self {
        DriftParts {
            nonlinear: true,
            ito_correction: true,
        }
    }
}

/// The Galerkin system at one truncation level.
///
/// With `G_i u = -P_n 𝒫 B_i u` and `N(u) = -P_n 𝒫 L_u u` the Itô form reads
/// `du = (N(u) - νAu + ½ Σ P_n 𝒫 B_i² u) dt + Σ G_i u dW_i`
/// and the Stratonovich form drops the correction and uses `∘ dW_i`.
#[derive(Clone)]
pub struct GalerkinSystem<T: Real> {
    spectrum: Arc<StokesSpectrum>,
    shells: usize,
    lmax: i64,
    nu: T,
    xis: Arc<XiEnsemble<T>>,
    ws: OperatorWorkspace<T>,
    parts: DriftParts,
    viscous: Viscous,
}

impl<T: Real> GalerkinSystem<T> {
    /// `shells: None` keeps the whole retained band.
    pub fn new(
        spectrum: &Arc<StokesSpectrum>,
        shells: Option<usize>,
        nu: f64,
        xis: &Arc<XiEnsemble<T>>,
    ) -> Result<Self> {
        let grid = spectrum.grid();
        if !xis.grid().same_shape(grid) {
            return Err(Error::GridMismatch {
                left: format!("{grid:?}"),
                right: format!("{:?}", xis.grid()),
            });
        }
        let shells = shells.unwrap_or(spectrum.shell_count());
        if shells == 0 || shells > spectrum.shell_count() {
            return Err(Error::LevelOutOfRange {
                requested: shells,
                available: spectrum.shell_count(),
            });
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::param("nu", format!("must be positive, got {nu}")));
        }
        Ok(GalerkinSystem {
            spectrum: Arc::clone(spectrum),
            shells,
            lmax: spectrum.level_max_eigenvalue(shells),
            nu: T::lit(nu),
            xis: Arc::clone(xis),
            ws: OperatorWorkspace::new(grid),
            parts: DriftParts::default(),
            viscous: Viscous::Exact,
        })
    }

    /// Same operators at another truncation level.
    pub fn at_level(&self, shells: Option<usize>) -> Result<Self> {
        let nu = self.nu.to_f64_lossy();
        Ok(GalerkinSystem::new(&self.spectrum, shells, nu, &self.xis)?
            .with_parts(self.parts)
            .with_viscous(self.viscous))
    }

    /// Same level with a different noise ensemble.
    pub fn with_ensemble(&self, xis: &Arc<XiEnsemble<T>>) -> Result<Self> {
        let nu = self.nu.to_f64_lossy();
        Ok(GalerkinSystem::new(&self.spectrum, Some(self.shells), nu, xis)?
            .with_parts(self.parts)
            .with_viscous(self.viscous))
    }

    pub fn parts(&self) -> DriftParts {
        self.parts
    }

    pub fn with_parts(mut self, parts: DriftParts) -> Self {
        self.parts = parts;
        self
    }

    pub fn with_viscous(mut self, viscous: Viscous) -> Self {
        self.viscous = viscous;
        self
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.spectrum.grid()
    }

    pub fn spectrum(&self) -> &Arc<StokesSpectrum> {
        &self.spectrum
    }

    pub fn shells(&self) -> usize {
        self.shells
    }

    /// Largest Stokes eigenvalue kept.
    pub fn max_eigenvalue(&self) -> i64 {
        self.lmax
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn ensemble(&self) -> &Arc<XiEnsemble<T>> {
        &self.xis
    }

    pub fn workspace(&mut self) -> &mut OperatorWorkspace<T> {
        &mut self.ws
    }

    /// `P_n f`.
    pub fn project(&self, f: SpectralField<T>) -> SpectralField<T> {
        let mut raw = f.into_raw();
        self.spectrum.project_in_place(&mut raw, self.lmax);
        SpectralField::from_raw_unchecked(raw)
    }

    /// Non-viscous drift; the Itô correction is included when `ito` is set
    /// and the correction part is enabled.
    pub fn inviscid_drift(&mut self, u: &SpectralField<T>, ito: bool) -> SpectralField<T> {
        let mut out = SpectralField::zeros(self.grid());
        if self.parts.nonlinear {
            out -= &self.ws.nonlinear_term(u);
        }
        if ito && self.parts.ito_correction && !self.xis.is_empty() {
            out += &self.ws.ito_correction(u, &self.xis);
        }
        self.project(out)
    }

    /// Full Itô drift `N(u) - νAu + ½ Σ P_n 𝒫 B_i² u`.
    pub fn drift(&mut self, u: &SpectralField<T>) -> SpectralField<T> {
        let mut out = self.inviscid_drift(u, true);
        out.axpy(-self.nu, &stokes_apply(u));
        out
    }

    /// `G_i u = -P_n 𝒫 B_i u`.
    pub fn noise_term(&mut self, i: usize, u: &SpectralField<T>) -> Result<SpectralField<T>> {
        let b = self.ws.noise_op(i, u, &self.xis)?;
        Ok(self.project(-&leray_project(&b)))
    }

    /// `Σ_i ‖G_i u‖²_m`.
    pub fn noise_energy(&mut self, u: &SpectralField<T>, m: u32) -> T {
        (0..self.xis.len())
            .map(|i| self.noise_term(i, u).expect("index in range").norm(m).powi(2))
            .sum()
    }

    /// `Σ_i ΔW_i G_i u`.
    fn noise_increment(&mut self, u: &SpectralField<T>, dw: &[T]) -> SpectralField<T> {
        if dw.iter().all(|w| *w == T::zero()) {
            return SpectralField::zeros(self.grid());
        }
        let b = self
            .ws
            .weighted_noise_op(dw, u, &self.xis)
            .expect("increment count matches ensemble");
        self.project(-&leray_project(&b))
    }

    /// Explicitly treated drift: inviscid part plus `-νAu` when viscosity is
    /// not handled by the integrating factor.
    fn explicit_drift(&mut self, u: &SpectralField<T>, ito: bool) -> SpectralField<T> {
        let mut out = self.inviscid_drift(u, ito);
        if self.viscous == Viscous::Explicit {
            out.axpy(-self.nu, &stokes_apply(u));
        }
        out
    }

    /// Multiplies by `e^{-νλ dt}` under the exact treatment, otherwise the identity.
    fn propagate(&self, mut f: SpectralField<T>, dt: T) -> SpectralField<T> {
        if self.viscous == Viscous::Exact {
            let a = -self.nu * dt;
            f.apply_radial(|k2| (a * T::lit(k2 as f64)).exp());
        }
        f
    }

    pub fn step_euler_maruyama(&mut self, u: &SpectralField<T>, dt: T, dw: &[T]) -> SpectralField<T> {
        let mut v = u.clone();
        v.axpy(dt, &self.explicit_drift(u, true));
        v += &self.noise_increment(u, dw);
        self.propagate(v, dt)
    }

    /// Milstein step with the commutative-noise double integrals
    /// `I_ij ≈ ½(ΔW_i ΔW_j - δ_ij dt)`.
    pub fn step_milstein(&mut self, u: &SpectralField<T>, dt: T, dw: &[T]) -> SpectralField<T> {
        let mut v = u.clone();
        v.axpy(dt, &self.explicit_drift(u, true));
        let gdu = self.noise_increment(u, dw);
        v += &gdu;
        let half = T::lit(0.5);
        v.axpy(half, &self.noise_increment(&gdu, dw));
        for i in 0..dw.len() {
            let g = self.noise_term(i, u).expect("index in range");
            let gg = self.noise_term(i, &g).expect("index in range");
            v.axpy(-half * dt, &gg);
        }
        self.propagate(v, dt)
    }

    /// Stochastic Heun for the Stratonovich form, in Lawson form when the
    /// viscous term is exact.
    pub fn step_heun(&mut self, u: &SpectralField<T>, dt: T, dw: &[T]) -> SpectralField<T> {
        let half = T::lit(0.5);
        let f0 = self.explicit_drift(u, false);
        let g0 = self.noise_increment(u, dw);
        let mut pred = u.clone();
        pred.axpy(dt, &f0);
        pred += &g0;
        let pred = self.propagate(pred, dt);

        let mut base = u.clone();
        base.axpy(half * dt, &f0);
        base.axpy(half, &g0);
        let mut out = self.propagate(base, dt);
        out.axpy(half * dt, &self.explicit_drift(&pred, false));
        out.axpy(half, &self.noise_increment(&pred, dw));
        out
    }

    /// One step of `scheme`. `dw` must hold one increment per ensemble member.
    pub fn step(&mut self, scheme: Scheme, u: &SpectralField<T>, dt: f64, dw: &[f64]) -> Result<SpectralField<T>> {
        if dw.len() != self.xis.len() {
            return Err(Error::param(
                "increments",
                format!("{} increments for {} noise fields", dw.len(), self.xis.len()),
            ));
        }
        let dwt: Vec<T> = dw.iter().map(|&w| T::lit(w)).collect();
        let dt = T::lit(dt);
        Ok(match scheme {
            Scheme::EulerMaruyamaIto => self.step_euler_maruyama(u, dt, &dwt),
            Scheme::MilsteinIto => self.step_milstein(u, dt, &dwt),
            Scheme::HeunStratonovich => self.step_heun(u, dt, &dwt),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::noise::XiParams;
    use crate::random::{single_mode, taylor_green};

    fn setup(n: usize, xi_count: usize) -> (Arc<TorusGrid>, Arc<StokesSpectrum>, Arc<XiEnsemble<f64>>) {
        let g = Arc::new(make_grid(2, n).unwrap());
        let s = Arc::new(StokesSpectrum::new(&g));
        let p = XiParams {
            count: xi_count,
            seed: 3,
            ..XiParams::default()
        };
        let e = Arc::new(XiEnsemble::generate(&g, &p).unwrap());
        (g, s, e)
    }

    #[test]
    fn single_mode_decays_exactly() {
        let (g, s, e) = setup(16, 0);
        let mut sys = GalerkinSystem::new(&s, None, 0.7, &e).unwrap();
        let u0 = single_mode::<f64>(&g, [2, 1, 0], [0.0, 0.0, 0.0], [1.0, -2.0, 0.0]);
        let mut u = u0.clone();
        let dt = 0.01;
        for _ in 0..50 {
            u = sys.step(Scheme::EulerMaruyamaIto, &u, dt, &[]).unwrap();
        }
        let expect = u0.scaled((-0.7 * 5.0 * 0.5f64).exp());
        assert!((&u - &expect).norm(0) <= 1e-12 * expect.norm(0));
    }

    #[test]
    fn schemes_agree_without_noise() {
        let (g, s, e) = setup(16, 0);
        let mut sys = GalerkinSystem::new(&s, None, 1.0, &e).unwrap();
        let u0 = taylor_green::<f64>(&g, 2.0);
        let a = sys.step(Scheme::EulerMaruyamaIto, &u0, 1e-3, &[]).unwrap();
        let b = sys.step(Scheme::MilsteinIto, &u0, 1e-3, &[]).unwrap();
        let c = sys.step(Scheme::HeunStratonovich, &u0, 1e-3, &[]).unwrap();
        assert!((&a - &b).norm(0) < 1e-14);
        assert!((&a - &c).norm(0) < 1e-14);
    }

    #[test]
    fn zero_stays_zero_and_projection_holds() {
        let (g, s, e) = setup(16, 3);
        let mut sys = GalerkinSystem::new(&s, Some(2), 1.0, &e).unwrap();
        let z = SpectralField::<f64>::zeros(&g);
        for scheme in [Scheme::EulerMaruyamaIto, Scheme::MilsteinIto, Scheme::HeunStratonovich] {
            let out = sys.step(scheme, &z, 1e-3, &[0.03, -0.01, 0.02]).unwrap();
            assert_eq!(out.max_abs(), 0.0);
        }
        let u0 = sys.project(taylor_green::<f64>(&g, 1.0));
        let u = sys.step(Scheme::EulerMaruyamaIto, &u0, 1e-3, &[0.1, 0.2, -0.1]).unwrap();
        for flat in 0..g.len() {
            if g.k2(flat) > 2 {
                for c in 0..2 {
                    assert_eq!(u.component(c)[flat].norm(), 0.0);
                }
            }
        }
        assert!(sys.step(Scheme::EulerMaruyamaIto, &u0, 1e-3, &[0.1]).is_err());
    }

    #[test]
    fn bad_levels_rejected() {
        let (_, s, e) = setup(16, 0);
        assert!(GalerkinSystem::<f64>::new(&s, Some(0), 1.0, &e).is_err());
        assert!(GalerkinSystem::<f64>::new(&s, Some(s.shell_count() + 1), 1.0, &e).is_err());
        assert!(GalerkinSystem::<f64>::new(&s, None, 0.0, &e).is_err());
    }
}
