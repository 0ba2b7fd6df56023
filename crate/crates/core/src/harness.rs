//! Monte Carlo experiments across Galerkin levels driven by one shared noise:
//! the Cauchy property of the level sequence, level-uniform energy bounds
//! and the small-time exceedance probability.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::sde::{GalerkinSystem, Monitor, RunOptions, SimConfig, SimSetup, TrajectoryRecord, TrajectoryRunner};
use crate::stats::{mean, std_error};

/// Terms of `‖ψ‖²_{X(T)} = sup_{r≤T}‖ψ_r‖₁² + ∫₀ᵀ‖ψ_r‖₂² dr`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XtNorm {
    pub sup_term: f64,
    pub integral_term: f64,
    pub norm: f64,
}

/// Discrete X(T) norm of a recorded trajectory.
pub fn xt_norm(rec: &TrajectoryRecord, t: f64) -> Result<XtNorm> {
    let idx = rec.index_at(t)?;
    let sup_term = rec.sup_n1sq[idx];
    let integral_term = rec.int_n2sq[idx];
    Ok(XtNorm {
        sup_term,
        integral_term,
        norm: (sup_term + integral_term).sqrt(),
    })
}

/// Mean and standard error of one Monte Carlo quantity, with the per-path samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: Vec<f64>,
}

impl Estimate {
    pub fn new(samples: Vec<f64>) -> Self {
        Estimate {
            mean: mean(&samples),
            std_error: std_error(&samples),
            samples,
        }
    }
}

/// Difference functional estimate for levels `m < n` (indices into `levels`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairEstimate {
    pub m: usize,
    pub n: usize,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyReport {
    /// Shell counts of the levels.
    pub levels: Vec<usize>,
    pub max_eigenvalues: Vec<i64>,
    pub paths: usize,
    pub discarded: usize,
    pub pairs: Vec<PairEstimate>,
    /// Paired gaps `D(m_j, top) - D(m_{j+1}, top)` with their standard errors.
    pub gaps: Vec<Estimate>,
    pub decreasing: bool,
}

impl CauchyReport {
    pub fn pair(&self, m: usize, n: usize) -> Option<&PairEstimate> {
        self.pairs.iter().find(|p| p.m == m && p.n == n)
    }

    /// Symmetric matrix of mean estimates.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let l = self.levels.len();
        let mut out = vec![vec![0.0; l]; l];
        for p in &self.pairs {
            out[p.m][p.n] = p.estimate.mean;
            out[p.n][p.m] = p.estimate.mean;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelBound {
    pub shells: usize,
    pub max_eigenvalue: i64,
    pub sup_h: Estimate,
    pub int_v: Estimate,
    pub total: Estimate,
    pub initial_h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformBoundReport {
    pub levels: Vec<LevelBound>,
    pub paths: usize,
    pub discarded: usize,
    /// `max_n E[sup‖Ψⁿ‖²_H + ∫‖Ψⁿ‖²_V] / (E‖Ψⁿ₀‖²_H + 1)`.
    pub bound_constant: f64,
    pub trend_slope: f64,
    pub trend_se: f64,
    pub no_trend: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallTimeReport {
    pub levels: Vec<usize>,
    pub s_grid: Vec<f64>,
    /// `frequency[level][j]` is the exceedance frequency at `s_grid[j]`.
    pub frequency: Vec<Vec<f64>>,
    pub max_over_levels: Vec<f64>,
    pub paths: usize,
    pub discarded: usize,
    pub decreasing: bool,
}

/// Outcome of integrating every level along one path.
struct PathOutcome {
    records: Vec<TrajectoryRecord>,
    pair_functionals: Vec<f64>,
}

fn pair_indices(l: usize) -> Vec<(usize, usize)> {
    (0..l).flat_map(|m| (m + 1..l).map(move |n| (m, n))).collect()
}

struct PairAccumulator {
    sup: f64,
    integral: f64,
    last_n2sq: f64,
}

/// Integrates all levels in lockstep on one path. Each level stops at its
/// own trigger; a pair accumulates `sup ‖Ψⁿ-Ψᵐ‖₁² + ∫‖Ψⁿ-Ψᵐ‖₂²` while both are running.
fn run_levels(
    systems: &mut [GalerkinSystem<f64>],
    u0: &SpectralField<f64>,
    path: &crate::noise::BrownianPath,
    opts: &RunOptions,
    with_pairs: bool,
) -> Result<PathOutcome> {
    let mut runners = systems
        .iter()
        .map(|s| TrajectoryRunner::new(s, u0, opts.scheme, path.dt(), opts.monitor, opts.threshold))
        .collect::<Result<Vec<_>>>()?;
    let pairs = if with_pairs { pair_indices(systems.len()) } else { Vec::new() };
    let mut acc: Vec<PairAccumulator> = pairs
        .iter()
        .map(|&(m, n)| {
            let d = runners[n].state() - runners[m].state();
            PairAccumulator {
                sup: d.norm(1).powi(2),
                integral: 0.0,
                last_n2sq: d.norm(2).powi(2),
            }
        })
        .collect();
    let dt = path.dt();
    for s in 0..path.steps() {
        if runners.iter().all(|r| r.stopped()) {
            break;
        }
        // A pair stays open while neither member had stopped before this step.
        let open: Vec<bool> = pairs
            .iter()
            .map(|&(m, n)| !runners[m].stopped() && !runners[n].stopped())
            .collect();
        for (r, sys) in runners.iter_mut().zip(systems.iter_mut()) {
            if !r.stopped() {
                r.advance(sys, path.step(s))?;
            }
        }
        for ((a, &(m, n)), &o) in acc.iter_mut().zip(&pairs).zip(&open) {
            if o {
                let d = runners[n].state() - runners[m].state();
                let n2 = d.norm(2).powi(2);
                a.sup = a.sup.max(d.norm(1).powi(2));
                a.integral += 0.5 * dt * (a.last_n2sq + n2);
                a.last_n2sq = n2;
            }
        }
    }
    Ok(PathOutcome {
        records: runners.into_iter().map(|r| r.finish().record).collect(),
        pair_functionals: acc.iter().map(|a| a.sup + a.integral).collect(),
    })
}

/// Systems, initial state and per-path outcomes for a level set.
struct LevelRun {
    shells: Vec<usize>,
    max_eigenvalues: Vec<i64>,
    outcomes: Vec<PathOutcome>,
    discarded: usize,
}

fn run_paths(cfg: &SimConfig, levels: &[Option<usize>], paths: usize, horizon: f64, with_pairs: bool) -> Result<LevelRun> {
    if levels.is_empty() {
        return Err(Error::param("levels", "at least one level is required"));
    }
    let setup = SimSetup::<f64>::new(cfg)?;
    let systems: Vec<GalerkinSystem<f64>> = levels
        .iter()
        .map(|&l| setup.system.at_level(l))
        .collect::<Result<_>>()?;
    let shells: Vec<usize> = systems.iter().map(|s| s.shells()).collect();
    if shells.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("levels", format!("must be strictly ascending, got {shells:?}")));
    }
    let steps = (horizon / cfg.dt).round().max(1.0) as usize;
    let opts = RunOptions {
        stop_at_trigger: true,
        snapshot_every: 0,
        ..RunOptions::from_config(cfg)
    };
    let count = setup.ensemble.len();
    let results: Vec<Result<PathOutcome>> = (0..paths)
        .into_par_iter()
        .map_init(
            || systems.clone(),
            |sys, p| {
                let path = crate::noise::BrownianPath::sample(steps, count, cfg.dt, cfg.path_seed(p as u64))?;
                run_levels(sys, &setup.initial, &path, &opts, with_pairs)
            },
        )
        .collect();
    let mut outcomes = Vec::with_capacity(paths);
    let mut discarded = 0;
    for r in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err(Error::NonFinite { .. }) => discarded += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(LevelRun {
        max_eigenvalues: systems.iter().map(|s| s.max_eigenvalue()).collect(),
        shells,
        outcomes,
        discarded,
    })
}

fn check_paths(paths: usize) -> Result<()> {
    if paths < 4 {
        return Err(Error::param("paths", format!("at least 4 paths are required, got {paths}")));
    }
    Ok(())
}

/// Coupled-level Cauchy experiment up to `cfg.horizon`.
///
/// Verdict: for consecutive lower levels `m_j < m_{j+1}` against the top
/// level, the paired gap `D(m_j, top) - D(m_{j+1}, top)` exceeds two
/// standard errors.
pub fn cauchy_experiment(cfg: &SimConfig, levels: &[Option<usize>], paths: usize) -> Result<CauchyReport> {
    check_paths(paths)?;
    Ok(cauchy_from_run(&run_paths(cfg, levels, paths, cfg.horizon, true)?))
}

/// Cauchy and uniform-bound reports from one shared set of coupled runs.
pub fn cauchy_and_bounds(
    cfg: &SimConfig,
    levels: &[Option<usize>],
    paths: usize,
) -> Result<(CauchyReport, UniformBoundReport)> {
    check_paths(paths)?;
    let run = run_paths(cfg, levels, paths, cfg.horizon, true)?;
    Ok((cauchy_from_run(&run), bounds_from_run(&run)))
}

fn cauchy_from_run(run: &LevelRun) -> CauchyReport {
    let pairs_idx = pair_indices(run.shells.len());
    let pairs: Vec<PairEstimate> = pairs_idx
        .iter()
        .enumerate()
        .map(|(j, &(m, n))| PairEstimate {
            m,
            n,
            estimate: Estimate::new(run.outcomes.iter().map(|o| o.pair_functionals[j]).collect()),
        })
        .collect();
    let top = run.shells.len() - 1;
    let against_top = |m: usize| pairs_idx.iter().position(|&p| p == (m, top));
    let mut gaps = Vec::new();
    for m in 0..top.saturating_sub(1) {
        let (a, b) = (against_top(m).expect("pair"), against_top(m + 1).expect("pair"));
        let diffs = run
            .outcomes
            .iter()
            .map(|o| o.pair_functionals[a] - o.pair_functionals[b])
            .collect();
        gaps.push(Estimate::new(diffs));
    }
    let decreasing = !run.outcomes.is_empty() && gaps.iter().all(|g| g.mean > 2.0 * g.std_error && g.mean > 0.0);
    CauchyReport {
        levels: run.shells.clone(),
        max_eigenvalues: run.max_eigenvalues.clone(),
        paths: run.outcomes.len(),
        discarded: run.discarded,
        pairs,
        gaps,
        decreasing,
    }
}

/// Level-wise `E[sup‖Ψⁿ‖²_H]` and `E[∫‖Ψⁿ‖²_V]` up to each level's stopping time.
///
/// Verdict: the least squares slope of the level means against level index
/// lies within two standard errors of zero, the standard error propagated
/// from the per-level Monte Carlo errors (a small absolute floor covers
/// noise-free runs).
pub fn uniform_bounds_experiment(cfg: &SimConfig, levels: &[Option<usize>], paths: usize) -> Result<UniformBoundReport> {
    check_paths(paths)?;
    Ok(bounds_from_run(&run_paths(cfg, levels, paths, cfg.horizon, false)?))
}

fn bounds_from_run(run: &LevelRun) -> UniformBoundReport {
    let bounds: Vec<LevelBound> = (0..run.shells.len())
        .map(|l| {
            let recs: Vec<&TrajectoryRecord> = run.outcomes.iter().map(|o| &o.records[l]).collect();
            let last = |r: &TrajectoryRecord| r.len() - 1;
            let sup: Vec<f64> = recs.iter().map(|r| r.sup_n2sq[last(r)]).collect();
            let int: Vec<f64> = recs.iter().map(|r| r.int_n3sq[last(r)]).collect();
            let total: Vec<f64> = sup.iter().zip(&int).map(|(a, b)| a + b).collect();
            LevelBound {
                shells: run.shells[l],
                max_eigenvalue: run.max_eigenvalues[l],
                initial_h: recs.first().map_or(0.0, |r| r.n2[0].powi(2)),
                sup_h: Estimate::new(sup),
                int_v: Estimate::new(int),
                total: Estimate::new(total),
            }
        })
        .collect();
    let bound_constant = bounds
        .iter()
        .map(|b| b.total.mean / (b.initial_h + 1.0))
        .fold(0.0, f64::max);
    let l = bounds.len();
    let xs: Vec<f64> = (0..l).map(|j| j as f64).collect();
    let xm = mean(&xs);
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let (slope, se) = if sxx > 0.0 {
        let slope = xs.iter().zip(&bounds).map(|(x, b)| (x - xm) * b.total.mean).sum::<f64>() / sxx;
        let var: f64 = xs
            .iter()
            .zip(&bounds)
            .map(|(x, b)| ((x - xm) / sxx).powi(2) * b.total.std_error.powi(2))
            .sum();
        (slope, var.sqrt())
    } else {
        (0.0, 0.0)
    };
    let scale = bounds.iter().map(|b| b.total.mean.abs()).fold(0.0, f64::max);
    let no_trend = slope.abs() <= 2.0 * se + 1e-9 * scale;
    UniformBoundReport {
        levels: bounds,
        paths: run.outcomes.len(),
        discarded: run.discarded,
        bound_constant,
        trend_slope: slope,
        trend_se: se,
        no_trend,
    }
}

/// Frequencies of `sup_{r≤τ∧S}‖Ψⁿ_r‖₁² + ∫₀^{τ∧S}‖Ψⁿ_r‖₂² ≥ M - 1 + ‖Ψⁿ₀‖₁²`.
///
/// Verdict: the max-over-levels frequency does not increase as S decreases,
/// beyond two binomial standard errors.
pub fn small_time_probability_experiment(
    cfg: &SimConfig,
    levels: &[Option<usize>],
    paths: usize,
    s_grid: &[f64],
) -> Result<SmallTimeReport> {
    check_paths(paths)?;
    if s_grid.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::param("s_grid", "times must be finite and non-negative"));
    }
    let horizon = s_grid.iter().copied().fold(cfg.dt, f64::max);
    let cfg_h = SimConfig {
        monitor: Monitor::H,
        ..cfg.clone()
    };
    let run = run_paths(&cfg_h, levels, paths, horizon, false)?;
    let np = run.outcomes.len().max(1) as f64;
    let frequency: Vec<Vec<f64>> = (0..run.shells.len())
        .map(|l| {
            s_grid
                .iter()
                .map(|&s| {
                    let hits = run
                        .outcomes
                        .iter()
                        .filter(|o| {
                            let r = &o.records[l];
                            let idx = r.index_at(s.min(r.times[r.len() - 1])).expect("within record");
                            r.functional_of(Monitor::H, idx) >= cfg.threshold - 1.0 + r.n1[0].powi(2)
                        })
                        .count();
                    hits as f64 / np
                })
                .collect()
        })
        .collect();
    let max_over_levels: Vec<f64> = (0..s_grid.len())
        .map(|j| frequency.iter().map(|f| f[j]).fold(0.0, f64::max))
        .collect();
    let mut order: Vec<usize> = (0..s_grid.len()).collect();
    order.sort_by(|&a, &b| s_grid[a].total_cmp(&s_grid[b]));
    let decreasing = order.windows(2).all(|w| {
        let (lo, hi) = (max_over_levels[w[0]], max_over_levels[w[1]]);
        let se = (hi * (1.0 - hi) / np).sqrt();
        lo <= hi + 2.0 * se
    });
    Ok(SmallTimeReport {
        levels: run.shells,
        s_grid: s_grid.to_vec(),
        frequency,
        max_over_levels,
        paths: run.outcomes.len(),
        discarded: run.discarded,
        decreasing,
    })
}

/// Pathwise gap between the Stratonovich (Heun) and Itô (Euler–Maruyama
/// and Milstein, both with the correction drift) integrations of the
/// linearized system at successively halved time steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub dts: Vec<f64>,
    /// RMS over paths of `‖u_Heun(T) - u_Milstein(T)‖₀ / ‖u_Heun(T)‖₀`.
    pub gap_milstein: Vec<f64>,
    pub gap_euler: Vec<f64>,
    pub order_milstein: f64,
    pub order_euler: f64,
    pub paths: usize,
    pub min_order: f64,
    pub pass: bool,
}

/// Runs `refinements + 1` time steps `cfg.dt / 2^ℓ` on shared Brownian paths
/// with the nonlinearity switched off. The verdict uses the Milstein gap:
/// Euler–Maruyama is only strong order ½, so its gap is reported alongside.
pub fn ito_stratonovich_consistency(
    cfg: &SimConfig,
    refinements: u32,
    paths: usize,
    min_order: f64,
) -> Result<ConsistencyReport> {
    use crate::sde::{DriftParts, Scheme};
    let setup = SimSetup::<f64>::new(cfg)?;
    let sys = setup.system.clone().with_parts(DriftParts {
        nonlinear: false,
        ito_correction: true,
    });
    let count = setup.ensemble.len();
    let steps = cfg.steps();
    let opts = |scheme| RunOptions {
        scheme,
        monitor: Monitor::H,
        threshold: f64::MAX,
        stop_at_trigger: false,
        snapshot_every: 0,
    };
    let per_path: Vec<Result<Vec<(f64, f64)>>> = (0..paths)
        .into_par_iter()
        .map_init(
            || sys.clone(),
            |sys, p| {
                let coarse = crate::noise::BrownianPath::with_depth(
                    steps,
                    count,
                    cfg.dt,
                    cfg.path_seed(p as u64),
                    refinements.max(crate::noise::DEFAULT_DEPTH),
                )?;
                (0..=refinements)
                    .map(|l| {
                        let path = coarse.refined(l)?;
                        let run = |sys: &mut GalerkinSystem<f64>, scheme| {
                            crate::sde::run_with_path(sys, &setup.initial, &path, &opts(scheme)).map(|t| t.final_state)
                        };
                        let heun = run(sys, Scheme::HeunStratonovich)?;
                        let mil = run(sys, Scheme::MilsteinIto)?;
                        let em = run(sys, Scheme::EulerMaruyamaIto)?;
                        let scale = heun.norm(0);
                        Ok(((&heun - &mil).norm(0) / scale, (&heun - &em).norm(0) / scale))
                    })
                    .collect()
            },
        )
        .collect();
    let per_path: Vec<Vec<(f64, f64)>> = per_path.into_iter().collect::<Result<_>>()?;
    let rms = |pick: fn(&(f64, f64)) -> f64, l: usize| {
        (per_path.iter().map(|g| pick(&g[l]).powi(2)).sum::<f64>() / paths as f64).sqrt()
    };
    let levels = refinements as usize + 1;
    let dts: Vec<f64> = (0..levels).map(|l| cfg.dt / (1u64 << l) as f64).collect();
    let gap_milstein: Vec<f64> = (0..levels).map(|l| rms(|g| g.0, l)).collect();
    let gap_euler: Vec<f64> = (0..levels).map(|l| rms(|g| g.1, l)).collect();
    let order = |g: &[f64]| crate::stats::log_log_slope(&dts, g).map_or(f64::NAN, |f| f.slope);
    let order_milstein = order(&gap_milstein);
    let order_euler = order(&gap_euler);
    Ok(ConsistencyReport {
        pass: order_milstein >= min_order,
        dts,
        gap_milstein,
        gap_euler,
        order_milstein,
        order_euler,
        paths,
        min_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::{simulate, InitialCondition, InitialKind};

    fn base() -> SimConfig {
        SimConfig {
            resolution: 16,
            horizon: 0.05,
            dt: 1e-3,
            ..SimConfig::default()
        }
    }

    #[test]
    fn xt_norm_terms_and_monotonicity() {
        let cfg = SimConfig {
            threshold: 1e9,
            ..base()
        };
        let (_, traj) = simulate::<f64>(&cfg).unwrap();
        let r = &traj.record;
        let mut prev = 0.0;
        for t in [0.0, 0.01, 0.03, 0.05] {
            let x = xt_norm(r, t).unwrap();
            assert!(x.sup_term >= 0.0 && x.integral_term >= 0.0);
            assert!((x.norm.powi(2) - x.sup_term - x.integral_term).abs() < 1e-12 * x.norm.powi(2));
            assert!(x.norm >= prev);
            prev = x.norm;
        }
        assert!(xt_norm(r, 1.0).is_err());
        let zero = SimConfig {
            initial: InitialCondition {
                kind: InitialKind::Zero,
                ..InitialCondition::default()
            },
            ..cfg
        };
        let (_, traj) = simulate::<f64>(&zero).unwrap();
        assert_eq!(xt_norm(&traj.record, 0.05).unwrap().norm, 0.0);
    }

    #[test]
    fn identical_levels_and_resolved_data_give_zero() {
        // Taylor–Green lives in the second shell; without noise every level
        // containing it evolves identically.
        let cfg = SimConfig {
            threshold: 1e9,
            ..base()
        };
        let rep = cauchy_experiment(&cfg, &[Some(2), Some(5), None], 4).unwrap();
        for p in &rep.pairs {
            assert!(p.estimate.mean <= 1e-20, "{p:?}");
        }
        assert!(cauchy_experiment(&cfg, &[Some(3), Some(3)], 4).is_err());
        assert!(cauchy_experiment(&cfg, &[Some(2), None], 3).is_err());
    }

    #[test]
    fn multi_shell_differences_decrease() {
        let mut cfg = SimConfig {
            threshold: 1e9,
            xi_count: 2,
            ..base()
        };
        cfg.initial = InitialCondition {
            kind: InitialKind::Random,
            amplitude: 1.0,
            max_shell: 40,
            slope: 1.0,
        };
        let rep = cauchy_experiment(&cfg, &[Some(1), Some(3), None], 4).unwrap();
        assert!(rep.decreasing, "{:?}", rep.gaps);
        let m = rep.matrix();
        assert!(m[0][2] > m[1][2] && m[1][2] > 0.0);
    }

    #[test]
    fn uniform_bounds_for_zero_and_resolved_data() {
        let mut cfg = SimConfig {
            threshold: 1e9,
            ..base()
        };
        cfg.initial.kind = InitialKind::Zero;
        let rep = uniform_bounds_experiment(&cfg, &[Some(2), None], 4).unwrap();
        assert!(rep.levels.iter().all(|l| l.total.mean == 0.0));
        assert!(rep.no_trend);
        cfg.initial.kind = InitialKind::TaylorGreen;
        let rep = uniform_bounds_experiment(&cfg, &[Some(2), Some(5), None], 4).unwrap();
        let t0 = rep.levels[0].total.mean;
        assert!(rep.levels.iter().all(|l| (l.total.mean - t0).abs() <= 1e-12 * t0));
        assert!(rep.no_trend);
    }

    #[test]
    fn consistency_orders() {
        let cfg = SimConfig {
            xi_count: 1,
            xi_amplitude: 0.5,
            horizon: 0.05,
            dt: 2e-3,
            ..base()
        };
        let rep = ito_stratonovich_consistency(&cfg, 2, 4, 0.8).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.gap_milstein.windows(2).all(|w| w[1] < w[0]));
        assert!(rep.order_euler < rep.order_milstein);
    }

    #[test]
    fn small_time_rows() {
        let cfg = SimConfig {
            threshold: 2.0,
            xi_count: 2,
            initial: InitialCondition {
                amplitude: 3.0,
                ..InitialCondition::default()
            },
            ..base()
        };
        let s = [0.0, 0.01, 0.2];
        let rep = small_time_probability_experiment(&cfg, &[Some(2), None], 4, &s).unwrap();
        assert_eq!(rep.max_over_levels[0], 0.0);
        assert_eq!(rep.max_over_levels[2], 1.0);
        assert!(rep.decreasing);
        let big = SimConfig { threshold: 1e9, ..cfg };
        let rep = small_time_probability_experiment(&big, &[Some(2), None], 4, &s).unwrap();
        assert!(rep.max_over_levels.iter().all(|f| *f == 0.0));
    }
}
