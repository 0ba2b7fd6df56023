use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use serde_json::json;

use salt_core::harness::{
    cauchy_and_bounds, small_time_probability_experiment, xt_norm, CauchyReport,
    SmallTimeReport, UniformBoundReport,
};
use salt_core::lab::{run_suite, LabSuite};
use salt_core::noise::EnsembleSummary;
use salt_core::random::derive_seed;
use salt_core::sde::{
    simulate, taylor_green_crossing, InitialKind, SimConfig, SimSetup, StoppingTimeEvent, Trajectory, TrajectoryRecord,
};
use salt_core::snapshot::{write_ensemble, write_field};

use crate::config::RunConfig;
use crate::output::{sha256_hex, OutDir, RunManifest};

/// Everything a subcommand needs.
pub struct Invocation {
    pub subcommand: &'static str,
    pub cfg: RunConfig,
    pub out: std::path::PathBuf,
    pub quiet: bool,
}

fn e(x: f64) -> String {
    format!("{x:e}")
}

fn manifest(inv: &Invocation, sim: &SimConfig, setup: Option<&SimSetup<f64>>, paths: usize) -> anyhow::Result<RunManifest> {
    let toml = inv.cfg.to_toml()?;
    let xi = sim.xi_params();
    let grid = setup.map_or(serde_json::Value::Null, |s| {
        json!({
            "dim": s.grid.dim(),
            "resolution": s.grid.resolution(),
            "cutoff": s.grid.cutoff(),
            "padded_resolution": s.grid.padded_resolution(),
            "shells": s.spectrum.shell_count(),
            "modes": s.spectrum.mode_count(s.spectrum.shell_count()),
        })
    });
    let ensemble = match setup {
        Some(s) => serde_json::to_value(s.ensemble.summary())?,
        None => serde_json::Value::Null,
    };
    Ok(RunManifest {
        tool: "salt".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: inv.subcommand.into(),
        config_sha256: sha256_hex(toml.as_bytes()),
        seeds: json!({
            "seed": sim.seed,
            "xi_seed": xi.seed,
            "initial_seed": sim.initial_seed(),
            "path_seeds": (0..paths as u64).map(|p| sim.path_seed(p)).collect::<Vec<_>>(),
        }),
        grid,
        ensemble,
        files: Vec::new(),
    })
}

fn start(inv: &Invocation) -> anyhow::Result<OutDir> {
    let mut out = OutDir::create(&inv.out)?;
    out.write("config.resolved.toml", inv.cfg.to_toml()?.as_bytes())?;
    Ok(out)
}

fn finish(inv: &Invocation, mut out: OutDir, summary: String, manifest: RunManifest, started: Instant) -> anyhow::Result<()> {
    out.write("summary.txt", summary.as_bytes())?;
    if !inv.quiet {
        print!("{summary}");
    }
    let timings = json!({ "total_seconds": started.elapsed().as_secs_f64() });
    out.finish(manifest, &timings)
}

fn norms_rows(rec: &TrajectoryRecord) -> Vec<Vec<String>> {
    let stop = rec.event.as_ref().map(|ev| ev.step);
    (0..rec.len())
        .map(|i| {
            vec![
                e(rec.times[i]),
                e(rec.n0[i]),
                e(rec.n1[i]),
                e(rec.n2[i]),
                e(rec.n3[i]),
                e(rec.sup_n1sq[i]),
                e(rec.int_n2sq[i]),
                e(rec.sup_n2sq[i]),
                e(rec.int_n3sq[i]),
                e(rec.functional(i)),
                u8::from(stop.is_some_and(|s| i >= s)).to_string(),
            ]
        })
        .collect()
}

const NORMS_HEADER: [&str; 11] = [
    "time", "n0", "n1", "n2", "n3", "sup_n1sq", "int_n2sq", "sup_n2sq", "int_n3sq", "functional", "stopped",
];

#[derive(Serialize)]
struct SimulationReport<'a> {
    subcommand: &'a str,
    scheme: &'a str,
    shells: usize,
    max_eigenvalue: i64,
    steps: usize,
    final_time: f64,
    final_norms: [f64; 4],
    xt_norm_final: f64,
    bound: f64,
    stop: Option<&'a StoppingTimeEvent>,
    ensemble: EnsembleSummary,
}

fn trajectory_outputs(out: &mut OutDir, setup: &SimSetup<f64>, traj: &Trajectory<f64>) -> anyhow::Result<()> {
    let rec = &traj.record;
    out.write_csv("norms.csv", "norms", &NORMS_HEADER, &norms_rows(rec))?;
    let mut buf = Vec::new();
    write_ensemble(&mut buf, setup.ensemble.fields(), &setup.grid)?;
    out.write("ensemble.bin", &buf)?;
    out.write_json("ensemble.json", &setup.ensemble.summary())?;
    for s in &traj.snapshots {
        let mut buf = Vec::new();
        write_field(&mut buf, &s.field, s.time)?;
        out.write(&format!("snapshots/step_{:08}.bin", s.step), &buf)?;
    }
    Ok(())
}

fn sim_report<'a>(inv: &'a Invocation, sim: &'a SimConfig, setup: &SimSetup<f64>, traj: &'a Trajectory<f64>) -> anyhow::Result<SimulationReport<'a>> {
    let rec = &traj.record;
    let last = rec.len() - 1;
    Ok(SimulationReport {
        subcommand: inv.subcommand,
        scheme: sim.scheme.name(),
        shells: rec.shells,
        max_eigenvalue: rec.max_eigenvalue,
        steps: last,
        final_time: rec.times[last],
        final_norms: [rec.n0[last], rec.n1[last], rec.n2[last], rec.n3[last]],
        xt_norm_final: xt_norm(rec, rec.times[last])?.norm,
        bound: rec.bound(),
        stop: rec.event.as_ref(),
        ensemble: setup.ensemble.summary(),
    })
}

fn describe_stop(rec: &TrajectoryRecord) -> String {
    match &rec.event {
        Some(ev) => format!(
            "stopped at step {} (t = {}), functional {:.6e} >= bound {:.6e}\n",
            ev.step, ev.time, ev.functional, ev.bound
        ),
        None => format!("no stop: functional stayed below bound {:.6e}\n", rec.bound()),
    }
}

pub fn simulate_cmd(inv: &Invocation) -> anyhow::Result<bool> {
    let started = Instant::now();
    let sim = inv.cfg.sim_config()?;
    let (setup, traj) = simulate::<f64>(&sim)?;
    let mut out = start(inv)?;
    trajectory_outputs(&mut out, &setup, &traj)?;
    let report = sim_report(inv, &sim, &setup, &traj)?;
    out.write_json("report.json", &report)?;
    let rec = &traj.record;
    let mut summary = format!(
        "simulate: {}D, {}^d grid, {} shells (lambda <= {}), {} noise fields, scheme {}\n",
        sim.dim,
        sim.resolution,
        rec.shells,
        rec.max_eigenvalue,
        setup.ensemble.len(),
        sim.scheme.name()
    );
    summary += &format!(
        "t = {}: |u|_0 = {:.6e}, |u|_1 = {:.6e}, |u|_2 = {:.6e}\n",
        report.final_time, report.final_norms[0], report.final_norms[1], report.final_norms[2]
    );
    summary += &describe_stop(rec);
    finish(inv, out, summary, manifest(inv, &sim, Some(&setup), 1)?, started)?;
    Ok(true)
}

#[derive(Serialize)]
struct TaylorGreenReport<'a> {
    simulation: SimulationReport<'a>,
    max_relative_decay_error: f64,
    decay_tolerance: f64,
    analytic_crossing: Option<f64>,
    trigger_time: Option<f64>,
    crossing_tolerance: f64,
    decay_pass: bool,
    crossing_pass: bool,
    pass: bool,
}

/// Taylor–Green on the 2-torus without noise: checks exact viscous decay and
/// the analytic stopping time.
pub fn taylor_green_cmd(inv: &Invocation) -> anyhow::Result<bool> {
    let started = Instant::now();
    let mut sim = inv.cfg.sim_config()?;
    sim.dim = 2;
    sim.xi_count = 0;
    sim.initial.kind = InitialKind::TaylorGreen;
    let (setup, traj) = simulate::<f64>(&sim)?;
    let rec = &traj.record;
    let e0 = rec.n0[0];
    let decay_tolerance = 1e-5;
    let max_err = rec
        .times
        .iter()
        .zip(&rec.n0)
        .map(|(t, n)| {
            let exact = e0 * (-2.0 * sim.nu * t).exp();
            if exact == 0.0 {
                n.abs()
            } else {
                (n - exact).abs() / exact
            }
        })
        .fold(0.0, f64::max);
    let crossing = taylor_green_crossing(sim.nu, sim.threshold, sim.monitor, &setup.initial);
    let trigger = rec.event.as_ref().map(|ev| ev.time);
    let tol = 2.0 * sim.dt;
    let crossing_pass = match (crossing, trigger) {
        (Some(s), Some(t)) => (s - t).abs() <= tol,
        (Some(s), None) => s > sim.horizon - tol,
        (None, None) => true,
        (None, Some(_)) => false,
    };
    let decay_pass = max_err <= decay_tolerance;
    let mut out = start(inv)?;
    trajectory_outputs(&mut out, &setup, &traj)?;
    let report = TaylorGreenReport {
        simulation: sim_report(inv, &sim, &setup, &traj)?,
        max_relative_decay_error: max_err,
        decay_tolerance,
        analytic_crossing: crossing,
        trigger_time: trigger,
        crossing_tolerance: tol,
        decay_pass,
        crossing_pass,
        pass: decay_pass && crossing_pass,
    };
    out.write_json("report.json", &report)?;
    let mut summary = format!(
        "taylor-green: nu = {}, {}^2 grid, dt = {}, horizon = {}\n",
        sim.nu, sim.resolution, sim.dt, sim.horizon
    );
    summary += &format!(
        "decay: max relative error {:.3e} (tolerance {:.0e}) {}\n",
        max_err,
        decay_tolerance,
        verdict(decay_pass)
    );
    summary += &format!(
        "stopping time: analytic {} vs trigger {} (tolerance {}) {}\n",
        crossing.map_or("none".into(), |s| format!("{s:.6}")),
        trigger.map_or("none".into(), |s| format!("{s:.6}")),
        tol,
        verdict(crossing_pass)
    );
    finish(inv, out, summary, manifest(inv, &sim, Some(&setup), 1)?, started)?;
    Ok(report.pass)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct ExperimentReport {
    cauchy: CauchyReport,
    uniform_bounds: UniformBoundReport,
    small_time: SmallTimeReport,
    pass: bool,
}

/// Cauchy property, uniform bounds and small-time probabilities on shared noise.
pub fn cauchy_cmd(inv: &Invocation) -> anyhow::Result<bool> {
    let started = Instant::now();
    let cfg = &inv.cfg;
    let sim = cfg.sim_config()?;
    let levels = cfg.level_shells()?;
    let setup = SimSetup::<f64>::new(&sim)?;
    let (cauchy, uniform_bounds) = cauchy_and_bounds(&sim, &levels, cfg.paths)?;
    let small_time = small_time_probability_experiment(&sim, &levels, cfg.paths, &cfg.s_grid)?;
    let pass = cauchy.decreasing && uniform_bounds.no_trend && small_time.decreasing;
    let mut out = start(inv)?;

    let m = cauchy.matrix();
    let header: Vec<String> = std::iter::once("shells".to_string())
        .chain(cauchy.levels.iter().map(|l| format!("shells_{l}")))
        .collect();
    let rows: Vec<Vec<String>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| std::iter::once(cauchy.levels[i].to_string()).chain(row.iter().map(|x| e(*x))).collect())
        .collect();
    let header_ref: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    out.write_csv("cauchy_matrix.csv", "cauchy-matrix", &header_ref, &rows)?;
    let rows: Vec<Vec<String>> = cauchy
        .pairs
        .iter()
        .map(|p| {
            vec![
                cauchy.levels[p.m].to_string(),
                cauchy.levels[p.n].to_string(),
                e(p.estimate.mean),
                e(p.estimate.std_error),
            ]
        })
        .collect();
    out.write_csv("cauchy_pairs.csv", "cauchy-pairs", &["shells_m", "shells_n", "mean", "std_error"], &rows)?;
    let rows: Vec<Vec<String>> = uniform_bounds
        .levels
        .iter()
        .map(|l| {
            vec![
                l.shells.to_string(),
                l.max_eigenvalue.to_string(),
                e(l.sup_h.mean),
                e(l.sup_h.std_error),
                e(l.int_v.mean),
                e(l.int_v.std_error),
                e(l.total.mean),
                e(l.total.std_error),
            ]
        })
        .collect();
    out.write_csv(
        "uniform_bounds.csv",
        "uniform-bounds",
        &["shells", "max_eigenvalue", "sup_h", "sup_h_se", "int_v", "int_v_se", "total", "total_se"],
        &rows,
    )?;
    let mut rows = Vec::new();
    for (l, freqs) in small_time.frequency.iter().enumerate() {
        for (j, f) in freqs.iter().enumerate() {
            rows.push(vec![small_time.levels[l].to_string(), e(small_time.s_grid[j]), e(*f)]);
        }
    }
    out.write_csv("small_time.csv", "small-time", &["shells", "s", "frequency"], &rows)?;
    let report = ExperimentReport {
        cauchy,
        uniform_bounds,
        small_time,
        pass,
    };
    out.write_json("report.json", &report)?;

    let c = &report.cauchy;
    let mut summary = format!(
        "cauchy: levels (shells) {:?}, eigenvalue caps {:?}, {} paths ({} discarded), horizon {}\n",
        c.levels, c.max_eigenvalues, c.paths, c.discarded, sim.horizon
    );
    for p in &c.pairs {
        summary += &format!(
            "  D({}, {}) = {:.6e} +- {:.2e}\n",
            c.levels[p.m], c.levels[p.n], p.estimate.mean, p.estimate.std_error
        );
    }
    summary += &format!("difference functional decreasing in m: {}\n", verdict(c.decreasing));
    let u = &report.uniform_bounds;
    for l in &u.levels {
        summary += &format!(
            "  shells {}: E[sup |u|_H^2 + int |u|_V^2] = {:.6e} +- {:.2e}\n",
            l.shells, l.total.mean, l.total.std_error
        );
    }
    summary += &format!(
        "uniform bounds: slope {:.3e} +- {:.2e}, constant {:.4e} {}\n",
        u.trend_slope,
        u.trend_se,
        u.bound_constant,
        verdict(u.no_trend)
    );
    summary += &format!(
        "small-time exceedance (max over levels) {:?} at S = {:?} {}\n",
        report.small_time.max_over_levels,
        report.small_time.s_grid,
        verdict(report.small_time.decreasing)
    );
    finish(inv, out, summary, manifest(inv, &sim, Some(&setup), cfg.paths)?, started)?;
    Ok(pass)
}

/// Runs the audit suite at each configured resolution.
pub fn assumptions_cmd(inv: &Invocation) -> anyhow::Result<bool> {
    let started = Instant::now();
    let cfg = &inv.cfg;
    let sim = cfg.sim_config()?;
    let suites: Vec<LabSuite> = cfg
        .audit_resolutions()
        .into_iter()
        .map(|r| run_suite(&cfg.lab_config(r)).with_context(|| format!("audits at resolution {r}")))
        .collect::<anyhow::Result<_>>()?;
    let pass = suites.iter().all(|s| s.pass);
    let mut out = start(inv)?;
    let opt = |x: Option<f64>| x.map_or(String::new(), e);
    let rows: Vec<Vec<String>> = suites
        .iter()
        .flat_map(|s| {
            s.reports.iter().map(move |r| {
                vec![
                    s.config.resolution.to_string(),
                    r.id.clone(),
                    r.samples.to_string(),
                    e(r.c_hat),
                    opt(r.kappa_hat),
                    opt(r.trend_slope),
                    u8::from(r.pass).to_string(),
                ]
            })
        })
        .collect();
    out.write_csv(
        "assumptions.csv",
        "assumptions",
        &["resolution", "id", "samples", "c_hat", "kappa_hat", "trend_slope", "pass"],
        &rows,
    )?;
    out.write_json("report.json", &suites)?;
    let mut summary = format!(
        "assumptions: {}D, nu = {}, {} noise fields (amplitude {}), seed {}\n",
        cfg.dim, cfg.nu, cfg.xi_count, cfg.xi_amplitude, cfg.seed
    );
    summary += &format!(
        "{:>5}  {:<32} {:>7} {:>12} {:>12} {:>12}  {}\n",
        "res", "audit", "samples", "c_hat", "kappa_hat", "trend", "verdict"
    );
    for s in &suites {
        for r in &s.reports {
            summary += &format!(
                "{:>5}  {:<32} {:>7} {:>12.4e} {:>12} {:>12}  {}\n",
                s.config.resolution,
                r.id,
                r.samples,
                r.c_hat,
                r.kappa_hat.map_or("-".into(), |k| format!("{k:.4e}")),
                r.trend_slope.map_or("-".into(), |k| format!("{k:.4}")),
                verdict(r.pass)
            );
            if let Some(c) = &r.control {
                summary += &format!(
                    "       control: {} -> {:.3e} ({})\n",
                    c.description,
                    c.value,
                    if c.failed_as_expected { "fails as expected" } else { "UNEXPECTEDLY PASSES" }
                );
            }
        }
    }
    summary += &format!("overall: {}\n", verdict(pass));
    finish(inv, out, summary, manifest(inv, &sim, None, 0)?, started)?;
    Ok(pass)
}

/// Grid, spectrum and ensemble facts for a configuration.
pub fn info_cmd(inv: &Invocation) -> anyhow::Result<bool> {
    let started = Instant::now();
    let cfg = &inv.cfg;
    let sim = cfg.sim_config()?;
    let setup = SimSetup::<f64>::new(&sim)?;
    let spec = &setup.spectrum;
    let levels: Vec<serde_json::Value> = cfg
        .level_shells()?
        .into_iter()
        .map(|l| {
            let n = l.unwrap_or(spec.shell_count());
            let mu = spec.tail_bound_mu(n).expect("level in range");
            json!({
                "shells": n,
                "max_eigenvalue": spec.level_max_eigenvalue(n),
                "modes": spec.mode_count(n),
                "mu": if mu.is_finite() { json!(mu) } else { json!("inf") },
            })
        })
        .collect();
    let info = json!({
        "dim": sim.dim,
        "resolution": sim.resolution,
        "cutoff": setup.grid.cutoff(),
        "padded_resolution": setup.grid.padded_resolution(),
        "shell_count": spec.shell_count(),
        "first_shells": spec.shells().iter().take(12).collect::<Vec<_>>(),
        "modes": spec.mode_count(spec.shell_count()),
        "levels": levels,
        "ensemble": setup.ensemble.summary(),
        "xi_seed": derive_seed(sim.seed, &[0x5849]),
    });
    let mut out = start(inv)?;
    out.write_json("info.json", &info)?;
    let mut summary = format!(
        "info: {}D torus, {}^d grid, retained |k_j| <= {}, products on {}^d\n",
        sim.dim,
        sim.resolution,
        setup.grid.cutoff(),
        setup.grid.padded_resolution()
    );
    summary += &format!(
        "{} eigenvalue shells, {} divergence-free modes; first shells {:?}\n",
        spec.shell_count(),
        spec.mode_count(spec.shell_count()),
        &spec.shells()[..spec.shell_count().min(12)]
    );
    for l in info["levels"].as_array().expect("array") {
        summary += &format!(
            "  level: {} shells, lambda <= {}, {} modes, mu = {}\n",
            l["shells"], l["max_eigenvalue"], l["modes"], l["mu"]
        );
    }
    let ens = setup.ensemble.summary();
    summary += &format!(
        "noise: {} fields, certificate {:.4e} (measured {:.4e})\n",
        ens.count, ens.summability_certificate, ens.measured_sum
    );
    finish(inv, out, summary, manifest(inv, &sim, Some(&setup), 0)?, started)?;
    Ok(true)
}
