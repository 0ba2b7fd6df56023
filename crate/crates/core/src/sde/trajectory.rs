use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{sobolev_norm, SpectralField};
use crate::grid::{make_grid, TorusGrid};
use crate::noise::{BrownianPath, XiEnsemble};
use crate::random::{random_field, stream_rng, taylor_green, RandomSpectrum};
use crate::real::Real;
use crate::spectrum::StokesSpectrum;

use super::config::{InitialCondition, InitialKind, Monitor, Scheme, SimConfig};
use super::system::GalerkinSystem;

/// First step at which the monitored functional reached its bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StoppingTimeEvent {
    pub step: usize,
    pub time: f64,
    pub functional: f64,
    pub bound: f64,
    pub threshold: f64,
    pub monitor: Monitor,
}

/// Time series of Sobolev norms and running blow-up functionals.
///
/// `sup_*` are running maxima including the initial value; `int_*` are
/// trapezoidal time integrals from zero.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRecord {
    pub monitor: Monitor,
    pub threshold: f64,
    pub shells: usize,
    pub max_eigenvalue: i64,
    pub times: Vec<f64>,
    pub n0: Vec<f64>,
    pub n1: Vec<f64>,
    pub n2: Vec<f64>,
    pub n3: Vec<f64>,
    pub sup_n1sq: Vec<f64>,
    pub int_n2sq: Vec<f64>,
    pub sup_n2sq: Vec<f64>,
    pub int_n3sq: Vec<f64>,
    pub event: Option<StoppingTimeEvent>,
}

impl TrajectoryRecord {
    pub fn new(monitor: Monitor, threshold: f64, shells: usize, max_eigenvalue: i64) -> Self {
        TrajectoryRecord {
            monitor,
            threshold,
            shells,
            max_eigenvalue,
            times: Vec::new(),
            n0: Vec::new(),
            n1: Vec::new(),
            n2: Vec::new(),
            n3: Vec::new(),
            sup_n1sq: Vec::new(),
            int_n2sq: Vec::new(),
            sup_n2sq: Vec::new(),
            int_n3sq: Vec::new(),
            event: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Appends a sample and returns its index.
    pub fn push<T: Real>(&mut self, time: f64, u: &SpectralField<T>) -> usize {
        let norms: [f64; 4] = std::array::from_fn(|m| sobolev_norm(u, m as u32).to_f64_lossy());
        let idx = self.times.len();
        let (sup1, int2, sup2, int3) = match idx {
            0 => (norms[1].powi(2), 0.0, norms[2].powi(2), 0.0),
            _ => {
                let p = idx - 1;
                let h = time - self.times[p];
                (
                    self.sup_n1sq[p].max(norms[1].powi(2)),
                    self.int_n2sq[p] + 0.5 * h * (self.n2[p].powi(2) + norms[2].powi(2)),
                    self.sup_n2sq[p].max(norms[2].powi(2)),
                    self.int_n3sq[p] + 0.5 * h * (self.n3[p].powi(2) + norms[3].powi(2)),
                )
            }
        };
        self.times.push(time);
        self.n0.push(norms[0]);
        self.n1.push(norms[1]);
        self.n2.push(norms[2]);
        self.n3.push(norms[3]);
        self.sup_n1sq.push(sup1);
        self.int_n2sq.push(int2);
        self.sup_n2sq.push(sup2);
        self.int_n3sq.push(int3);
        idx
    }

    /// Blow-up functional of `monitor` at sample `idx`.
    pub fn functional_of(&self, monitor: Monitor, idx: usize) -> f64 {
        match monitor {
            Monitor::H => self.sup_n1sq[idx] + self.int_n2sq[idx],
            Monitor::V => self.sup_n2sq[idx] + self.int_n3sq[idx],
        }
    }

    pub fn functional(&self, idx: usize) -> f64 {
        self.functional_of(self.monitor, idx)
    }

    /// `‖u₀‖²_U` in the monitor's sup-norm.
    pub fn initial_norm_sq(&self) -> f64 {
        match self.monitor {
            Monitor::H => self.n1[0].powi(2),
            Monitor::V => self.n2[0].powi(2),
        }
    }

    /// Stopping bound `M + ‖u₀‖²_U`.
    pub fn bound(&self) -> f64 {
        self.threshold + self.initial_norm_sq()
    }

    /// Functional at the last recorded time.
    pub fn final_functional(&self) -> f64 {
        self.functional(self.len() - 1)
    }

    /// Index of the last sample at or before `time`.
    pub fn index_at(&self, time: f64) -> Result<usize> {
        let last = *self.times.last().unwrap_or(&0.0);
        if self.is_empty() || time > last * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::BeyondRecord {
                requested: time,
                horizon: last,
            });
        }
        Ok(self.times.partition_point(|&t| t <= time * (1.0 + 1e-12) + 1e-15) - 1)
    }

    fn check_event(&mut self, idx: usize) {
        if self.event.is_some() {
            return;
        }
        let value = self.functional(idx);
        let bound = self.bound();
        if value >= bound {
            self.event = Some(StoppingTimeEvent {
                step: idx,
                time: self.times[idx],
                functional: value,
                bound,
                threshold: self.threshold,
                monitor: self.monitor,
            });
        }
    }
}

/// State snapshot taken during a run.
#[derive(Clone, Debug)]
pub struct Snapshot<T: Real> {
    pub step: usize,
    pub time: f64,
    pub field: SpectralField<T>,
}

/// Steps one Galerkin solution, recording norms and the stopping event.
#[derive(Clone, Debug)]
pub struct TrajectoryRunner<T: Real> {
    state: SpectralField<T>,
    record: TrajectoryRecord,
    scheme: Scheme,
    dt: f64,
    step: usize,
    snapshot_every: usize,
    snapshots: Vec<Snapshot<T>>,
}

impl<T: Real> TrajectoryRunner<T> {
    /// Starts from `P_n u0` at time zero.
    pub fn new(
        sys: &GalerkinSystem<T>,
        u0: &SpectralField<T>,
        scheme: Scheme,
        dt: f64,
        monitor: Monitor,
        threshold: f64,
    ) -> Result<Self> {
        if threshold.is_nan() || threshold <= 1.0 {
            return Err(Error::param("threshold", format!("M must exceed 1, got {threshold}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        if !u0.grid().same_shape(sys.grid()) {
            return Err(Error::GridMismatch {
                left: format!("{:?}", sys.grid()),
                right: format!("{:?}", u0.grid()),
            });
        }
        let state = sys.project(u0.clone());
        let mut record = TrajectoryRecord::new(monitor, threshold, sys.shells(), sys.max_eigenvalue());
        record.push(0.0, &state);
        Ok(TrajectoryRunner {
            state,
            record,
            scheme,
            dt,
            step: 0,
            snapshot_every: 0,
            snapshots: Vec::new(),
        })
    }

    /// Keeps a snapshot every `every` steps (and of the initial state).
    pub fn with_snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = every;
        if every > 0 {
            self.snapshots.push(Snapshot {
                step: 0,
                time: 0.0,
                field: self.state.clone(),
            });
        }
        self
    }

    pub fn state(&self) -> &SpectralField<T> {
        &self.state
    }

    pub fn record(&self) -> &TrajectoryRecord {
        &self.record
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn stopped(&self) -> bool {
        self.record.event.is_some()
    }

    /// Advances one step with Brownian increments `dw`.
    pub fn advance(&mut self, sys: &mut GalerkinSystem<T>, dw: &[f64]) -> Result<()> {
        let next = sys.step(self.scheme, &self.state, self.dt, dw)?;
        self.step += 1;
        let time = self.time();
        if !next.is_finite() {
            return Err(Error::NonFinite {
                step: self.step,
                time,
                detail: format!("{} produced NaN or infinite coefficients", self.scheme.name()),
            });
        }
        self.state = next;
        let idx = self.record.push(time, &self.state);
        self.record.check_event(idx);
        if self.snapshot_every > 0 && self.step.is_multiple_of(self.snapshot_every) {
            self.snapshots.push(Snapshot {
                step: self.step,
                time,
                field: self.state.clone(),
            });
        }
        Ok(())
    }

    pub fn finish(self) -> Trajectory<T> {
        Trajectory {
            record: self.record,
            snapshots: self.snapshots,
            final_state: self.state,
        }
    }
}

/// Completed run.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub record: TrajectoryRecord,
    pub snapshots: Vec<Snapshot<T>>,
    pub final_state: SpectralField<T>,
}

/// How a single run is integrated and stopped.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub scheme: Scheme,
    pub monitor: Monitor,
    pub threshold: f64,
    /// Stop at the first threshold crossing instead of the end of the path.
    pub stop_at_trigger: bool,
    pub snapshot_every: usize,
}

impl RunOptions {
    pub fn from_config(cfg: &SimConfig) -> Self {
        RunOptions {
            scheme: cfg.scheme,
            monitor: cfg.monitor,
            threshold: cfg.threshold,
            stop_at_trigger: true,
            snapshot_every: cfg.snapshot_every,
        }
    }
}

/// Integrates `u0` along `path` with time step `path.dt()`.
pub fn run_with_path<T: Real>(
    sys: &mut GalerkinSystem<T>,
    u0: &SpectralField<T>,
    path: &BrownianPath,
    opts: &RunOptions,
) -> Result<Trajectory<T>> {
    let mut runner = TrajectoryRunner::new(sys, u0, opts.scheme, path.dt(), opts.monitor, opts.threshold)?
        .with_snapshots(opts.snapshot_every);
    for s in 0..path.steps() {
        if opts.stop_at_trigger && runner.stopped() {
            break;
        }
        runner.advance(sys, path.step(s))?;
    }
    Ok(runner.finish())
}

/// Blow-up functional `sup ‖u‖₁² + ∫‖u‖₂²` at the end of a record.
pub fn blowup_functional(record: &TrajectoryRecord) -> f64 {
    record.functional_of(Monitor::H, record.len() - 1)
}

/// Analytic first crossing time of the blow-up functional for a single-shell
/// viscous decay `u_t = e^{-νλt}u₀` on the λ = 2 shell (the 2D Taylor–Green
/// vortex): `s* = -ln(1 - 4νM/‖u₀‖²_{k+1}) / (4ν)`, where `k` is the sup-norm
/// index of `monitor`. `None` when the functional never reaches the bound.
pub fn taylor_green_crossing(nu: f64, threshold: f64, monitor: Monitor, u0: &SpectralField<f64>) -> Option<f64> {
    let (_, int_index) = monitor.indices();
    let q = 4.0 * nu * threshold / u0.norm(int_index).powi(2);
    if q >= 1.0 || !q.is_finite() {
        None
    } else {
        Some(-(1.0 - q).ln() / (4.0 * nu))
    }
}

/// Initial condition on `grid`; random fields draw from `seed`.
pub fn build_initial<T: Real>(grid: &Arc<TorusGrid>, ic: &InitialCondition, seed: u64) -> SpectralField<T> {
    match ic.kind {
        InitialKind::TaylorGreen => taylor_green(grid, ic.amplitude),
        InitialKind::Zero => SpectralField::zeros(grid),
        InitialKind::Random => {
            let spec = RandomSpectrum {
                min_shell: 1,
                max_shell: ic.max_shell,
                slope: ic.slope,
            };
            random_field(grid, spec, 0, T::lit(ic.amplitude), &mut stream_rng(seed, 0))
        }
    }
}

/// Everything a configured simulation is built from.
pub struct SimSetup<T: Real> {
    pub grid: Arc<TorusGrid>,
    pub spectrum: Arc<StokesSpectrum>,
    pub ensemble: Arc<XiEnsemble<T>>,
    pub system: GalerkinSystem<T>,
    pub initial: SpectralField<T>,
}

impl<T: Real> SimSetup<T> {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = Arc::new(make_grid(cfg.dim, cfg.resolution)?);
        let spectrum = Arc::new(StokesSpectrum::new(&grid));
        let ensemble = Arc::new(XiEnsemble::generate(&grid, &cfg.xi_params())?);
        let system = GalerkinSystem::new(&spectrum, cfg.shells, cfg.nu, &ensemble)?.with_viscous(cfg.viscous);
        let initial = build_initial(&grid, &cfg.initial, cfg.initial_seed());
        Ok(SimSetup {
            grid,
            spectrum,
            ensemble,
            system,
            initial,
        })
    }

    /// Driving path for Monte Carlo sample `path`.
    pub fn path(&self, cfg: &SimConfig, path: u64) -> Result<BrownianPath> {
        BrownianPath::sample(cfg.steps(), self.ensemble.len(), cfg.dt, cfg.path_seed(path))
    }
}

/// Runs the configured simulation on path zero, stopping at the trigger.
pub fn simulate<T: Real>(cfg: &SimConfig) -> Result<(SimSetup<T>, Trajectory<T>)> {
    let mut setup = SimSetup::<T>::new(cfg)?;
    let path = setup.path(cfg, 0)?;
    let u0 = setup.initial.clone();
    let traj = run_with_path(&mut setup.system, &u0, &path, &RunOptions::from_config(cfg))?;
    Ok((setup, traj))
}
