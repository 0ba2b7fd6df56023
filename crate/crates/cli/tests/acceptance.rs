//! Acceptance run: prints one PASS/FAIL line per criterion.
//!
//! Verdicts are reported, not asserted, so a failing criterion shows up here
//! without breaking the rest of the test suite. A criterion that could not be
//! evaluated at all (an error) panics.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use salt_core::harness::{cauchy_experiment, ito_stratonovich_consistency, uniform_bounds_experiment};
use salt_core::lab::{
    check_cancellation, check_coercive_inequality, check_commutator_order, check_projection_commutation,
    check_projection_properties, LabConfig, LabContext,
};
use salt_core::sde::{simulate, taylor_green_crossing, InitialCondition, InitialKind, Monitor, SimConfig};
use salt_core::{make_grid, StokesSpectrum};

struct Line {
    id: u32,
    pass: bool,
    detail: String,
}

fn line(id: u32, pass: bool, detail: String) -> Line {
    let l = Line { id, pass, detail };
    println!("criterion {:>2}: {}  {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.detail);
    l
}

fn tg_config() -> SimConfig {
    SimConfig {
        dim: 2,
        resolution: 32,
        nu: 1.0,
        xi_count: 0,
        dt: 1e-3,
        horizon: 0.5,
        ..SimConfig::default()
    }
}

fn lab(count: usize, samples: usize) -> LabContext {
    let mut cfg = LabConfig {
        dim: 2,
        resolution: 32,
        nu: 1.0,
        samples,
        ..LabConfig::default()
    };
    cfg.xi.count = count;
    cfg.xi.amplitude = 0.05;
    LabContext::new(&cfg).expect("lab context")
}

fn taylor_green_decay() -> Line {
    let t0 = Instant::now();
    let (_, traj) = simulate::<f64>(&tg_config()).expect("taylor-green run");
    let secs = t0.elapsed().as_secs_f64();
    let rec = &traj.record;
    let idx = rec.index_at(0.5).expect("t = 0.5 recorded");
    let exact = (-2.0f64 * rec.times[idx]).exp() * rec.n0[0];
    let err = (rec.n0[idx] - exact).abs() / exact;
    line(
        1,
        err <= 1e-5 && secs < 10.0,
        format!("TG decay rel. error {err:.2e} at t = {} ({secs:.2} s)", rec.times[idx]),
    )
}

fn cancellation() -> Line {
    let ctx = lab(4, 100);
    let t0 = Instant::now();
    let r = check_cancellation(&ctx, 100).expect("cancellation audit");
    let secs = t0.elapsed().as_secs_f64();
    let control = r.control.as_ref().expect("control");
    line(
        2,
        r.pass && control.failed_as_expected && secs < 5.0,
        format!(
            "max scaled residual {:.2e} over {} pairs; control {:.2e} fails: {} ({secs:.2} s)",
            r.c_hat, r.samples, control.value, control.failed_as_expected
        ),
    )
}

fn commutation() -> Line {
    let r = check_projection_commutation(&lab(4, 50), 50).expect("commutation audit");
    line(
        3,
        r.pass && r.samples == 50,
        format!("max relative defect {:.2e} over {} samples", r.c_hat, r.samples),
    )
}

fn consistency() -> Line {
    let cfg = SimConfig {
        xi_count: 1,
        xi_amplitude: 0.5,
        dt: 1e-3,
        horizon: 0.05,
        initial: InitialCondition {
            kind: InitialKind::Random,
            ..InitialCondition::default()
        },
        ..tg_config()
    };
    let t0 = Instant::now();
    let r = ito_stratonovich_consistency(&cfg, 2, 8, 0.8).expect("consistency run");
    let secs = t0.elapsed().as_secs_f64();
    // The criterion names Euler–Maruyama; Milstein is shown for reference.
    line(
        4,
        r.order_euler >= 0.8 && secs < 30.0,
        format!(
            "dt {:?}: Heun vs EM gap {:.2e} -> order {:.3}; vs Milstein order {:.3} ({secs:.1} s)",
            r.dts,
            r.gap_euler.last().copied().unwrap_or(f64::NAN),
            r.order_euler,
            r.order_milstein
        ),
    )
}

fn tails() -> Line {
    let r = check_projection_properties(&lab(0, 100), 100).expect("projection audit");
    line(
        5,
        r.pass,
        format!(
            "max residual {:.2e} over 100 fields x {} levels",
            r.metrics["max_residual"], r.metrics["levels"]
        ),
    )
}

fn coercivity() -> Line {
    let free = check_coercive_inequality(&lab(0, 200), 200).expect("coercive audit");
    let k0 = free.kappa_hat.expect("kappa");
    let noisy = check_coercive_inequality(&lab(4, 200), 200).expect("coercive audit");
    let k1 = noisy.kappa_hat.expect("kappa");
    line(
        6,
        (k0 - 2.0).abs() <= 1e-10 && k1 >= 0.5,
        format!("xi-free kappa {k0:.12} (2 nu = 2); amplitude 0.05 kappa {k1:.4}"),
    )
}

fn commutator() -> Line {
    let r = check_commutator_order(&lab(4, 1)).expect("commutator audit");
    let slope = r.trend_slope.expect("slope");
    line(
        7,
        slope <= 1.15,
        format!("log-log slope {slope:.3} over {} shells on 64^2", r.samples),
    )
}

/// Shell counts for eigenvalue caps 2, 8 and the full band on 32².
fn cap_levels() -> Vec<Option<usize>> {
    let grid = Arc::new(make_grid(2, 32).expect("grid"));
    let spec = StokesSpectrum::new(&grid);
    vec![Some(spec.shells_through(2)), Some(spec.shells_through(8)), None]
}

fn cauchy() -> Line {
    let cfg = SimConfig {
        xi_count: 4,
        xi_amplitude: 0.05,
        horizon: 0.2,
        initial: InitialCondition {
            kind: InitialKind::Random,
            amplitude: 1.0,
            max_shell: 16,
            slope: 1.0,
        },
        ..tg_config()
    };
    let t0 = Instant::now();
    let r = cauchy_experiment(&cfg, &cap_levels(), 16).expect("cauchy run");
    let secs = t0.elapsed().as_secs_f64();
    let gaps: Vec<String> = r
        .gaps
        .iter()
        .map(|g| format!("{:.3e}+-{:.1e}", g.mean, g.std_error))
        .collect();
    line(
        8,
        r.decreasing && r.paths == 16 && secs < 300.0,
        format!("levels {:?}, successive gaps [{}] ({secs:.1} s)", r.levels, gaps.join(", ")),
    )
}

fn stopping_time() -> Line {
    let cfg = SimConfig {
        threshold: 2.0,
        monitor: Monitor::H,
        initial: InitialCondition {
            amplitude: 3.0,
            ..InitialCondition::default()
        },
        ..tg_config()
    };
    let (setup, traj) = simulate::<f64>(&cfg).expect("taylor-green run");
    let s = taylor_green_crossing(cfg.nu, cfg.threshold, cfg.monitor, &setup.initial);
    let t = traj.record.event.as_ref().map(|e| e.time);
    let pass = matches!((s, t), (Some(s), Some(t)) if (s - t).abs() <= 2.0 * cfg.dt);
    line(9, pass, format!("analytic crossing {s:?}, discrete trigger {t:?}, dt {}", cfg.dt))
}

fn uniform_bounds() -> Line {
    let cfg = SimConfig {
        xi_count: 4,
        xi_amplitude: 0.05,
        horizon: 0.2,
        ..tg_config()
    };
    let r = uniform_bounds_experiment(&cfg, &cap_levels(), 16).expect("uniform bounds run");
    let means: Vec<String> = r.levels.iter().map(|l| format!("{:.6}", l.total.mean)).collect();
    line(
        10,
        r.no_trend,
        format!(
            "level means [{}], slope {:.2e} +- {:.2e}",
            means.join(", "),
            r.trend_slope,
            r.trend_se
        ),
    )
}

fn files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).expect("read dir") {
            let path = entry.expect("entry").path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "timings.json") {
                let rel = path.strip_prefix(root).expect("prefix").display().to_string();
                out.push((rel, std::fs::read(&path).expect("read file")));
            }
        }
    }
    out.sort();
    out
}

fn reproducibility() -> Line {
    let tmp = tempfile::tempdir().expect("tempdir");
    let mut all_same = true;
    let mut compared = 0;
    for cmd in ["assumptions", "taylor-green", "simulate"] {
        let mut runs = Vec::new();
        for k in 0..2 {
            let dir = tmp.path().join(format!("{cmd}-{k}"));
            let code = salt_cli::dispatch(["salt", cmd, "-q", "--seed", "7", "--out", dir.to_str().expect("utf-8")]);
            assert!(code != salt_cli::EXIT_USAGE, "{cmd} rejected its arguments");
            runs.push(files(&dir));
        }
        compared += runs[0].len();
        let differing: Vec<&str> = runs[0]
            .iter()
            .zip(&runs[1])
            .filter(|(a, b)| a != b)
            .map(|(a, _)| a.0.as_str())
            .collect();
        if !differing.is_empty() {
            println!("  {cmd}: differing files {differing:?}");
        }
        all_same &= !runs[0].is_empty() && runs[0].len() == runs[1].len() && differing.is_empty();
    }
    line(
        11,
        all_same,
        format!("{compared} files from 3 subcommands byte-identical across reruns (timings excluded)"),
    )
}

fn main() {
    let lines = [
        taylor_green_decay(),
        cancellation(),
        commutation(),
        consistency(),
        tails(),
        coercivity(),
        commutator(),
        cauchy(),
        stopping_time(),
        uniform_bounds(),
        reproducibility(),
    ];
    let passed = lines.iter().filter(|l| l.pass).count();
    println!("acceptance: {passed}/{} criteria pass", lines.len());
}
