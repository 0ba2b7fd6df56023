use std::sync::Arc;

use super::*;
use crate::error::Error;
use crate::grid::make_grid;
use crate::noise::{BrownianPath, XiEnsemble};
use crate::random::single_mode;
use crate::spectrum::StokesSpectrum;

fn deterministic(n: usize) -> (Arc<crate::grid::TorusGrid>, GalerkinSystem<f64>) {
    let g = Arc::new(make_grid(2, n).unwrap());
    let s = Arc::new(StokesSpectrum::new(&g));
    let e = Arc::new(XiEnsemble::empty(&g));
    let sys = GalerkinSystem::new(&s, None, 1.0, &e).unwrap();
    (g, sys)
}

fn opts(threshold: f64, stop: bool) -> RunOptions {
    RunOptions {
        scheme: Scheme::EulerMaruyamaIto,
        monitor: Monitor::H,
        threshold,
        stop_at_trigger: stop,
        snapshot_every: 0,
    }
}

#[test]
fn taylor_green_decays_at_the_viscous_rate() {
    let cfg = SimConfig {
        horizon: 0.5,
        threshold: 1e9,
        ..SimConfig::default()
    };
    let (setup, traj) = simulate::<f64>(&cfg).unwrap();
    let e0 = setup.initial.norm(0);
    let last = traj.record.len() - 1;
    assert_eq!(last, 500);
    let t = traj.record.times[last];
    let expect = e0 * (-2.0 * t).exp();
    assert!((traj.record.n0[last] - expect).abs() <= 1e-12 * expect);
}

#[test]
fn single_mode_functional_matches_closed_form() {
    let (g, mut sys) = deterministic(16);
    let u0 = single_mode::<f64>(&g, [2, 1, 0], [0.0; 3], [1.0, -2.0, 0.0]);
    let lam = 5.0;
    let a2 = u0.norm(0).powi(2);
    let path = BrownianPath::sample(400, 0, 1e-3, 0).unwrap();
    let traj = run_with_path(&mut sys, &u0, &path, &opts(1e6, false)).unwrap();
    let t: f64 = 0.4;
    let exact = lam * a2 + lam * lam * a2 * (1.0 - (-2.0 * lam * t).exp()) / (2.0 * lam);
    let got = blowup_functional(&traj.record);
    assert!((got - exact).abs() <= 1e-4 * exact, "{got} vs {exact}");
}

#[test]
fn trigger_is_the_first_crossing_and_monotone_in_m() {
    let (g, mut sys) = deterministic(16);
    let u0 = crate::random::taylor_green::<f64>(&g, 3.0);
    let path = BrownianPath::sample(400, 0, 1e-3, 0).unwrap();
    let mut prev = 0.0;
    for m in [1.5, 2.0, 3.0] {
        let traj = run_with_path(&mut sys, &u0, &path, &opts(m, true)).unwrap();
        let ev = traj.record.event.clone().expect("crosses");
        let r = &traj.record;
        assert!(r.functional(ev.step) >= r.bound());
        assert!((0..ev.step).all(|i| r.functional(i) < r.bound()));
        assert_eq!(r.len(), ev.step + 1);
        assert!(ev.time > prev);
        prev = ev.time;
    }
    // analytic crossing for M = 2: s* = -ln(1 - 4M/‖u₀‖₂²)/4
    let traj = run_with_path(&mut sys, &u0, &path, &opts(2.0, true)).unwrap();
    let s_star = -(1.0 - 8.0 / 18.0f64).ln() / 4.0;
    assert!((taylor_green_crossing(1.0, 2.0, Monitor::H, &u0).unwrap() - s_star).abs() < 1e-12);
    assert!(taylor_green_crossing(1.0, 100.0, Monitor::H, &u0).is_none());
    assert!((traj.record.event.unwrap().time - s_star).abs() <= 2e-3);
}

#[test]
fn no_trigger_and_threshold_validation() {
    let (g, mut sys) = deterministic(8);
    let z = crate::field::SpectralField::<f64>::zeros(&g);
    let path = BrownianPath::sample(10, 0, 1e-2, 0).unwrap();
    let traj = run_with_path(&mut sys, &z, &path, &opts(2.0, true)).unwrap();
    assert!(traj.record.event.is_none());
    assert_eq!(traj.record.len(), 11);
    assert!(run_with_path(&mut sys, &z, &path, &opts(1.0, true)).is_err());
    assert!(traj.record.index_at(0.05).unwrap() == 5);
    assert!(matches!(traj.record.index_at(0.2), Err(Error::BeyondRecord { .. })));
}

#[test]
fn runaway_explicit_step_reports_non_finite() {
    let (g, sys) = deterministic(16);
    let mut sys = sys.with_viscous(Viscous::Explicit);
    let spec = crate::random::RandomSpectrum::default();
    let u0 = crate::random::random_field::<f64, _>(&g, spec, 0, 1.0, &mut crate::random::stream_rng(1, 0));
    let path = BrownianPath::sample(2000, 0, 1.0, 0).unwrap();
    let err = run_with_path(&mut sys, &u0, &path, &opts(1e300, false)).unwrap_err();
    assert!(matches!(err, Error::NonFinite { .. }), "{err}");
}

#[test]
fn snapshots_follow_cadence() {
    let cfg = SimConfig {
        resolution: 8,
        horizon: 0.01,
        snapshot_every: 4,
        threshold: 1e9,
        ..SimConfig::default()
    };
    let (_, traj) = simulate::<f64>(&cfg).unwrap();
    let steps: Vec<usize> = traj.snapshots.iter().map(|s| s.step).collect();
    assert_eq!(steps, vec![0, 4, 8]);
}
