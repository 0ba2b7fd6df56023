use super::*;
use crate::lab::{run_suite, LabConfig};
use crate::random::taylor_green;

fn ctx_with(count: usize, nu: f64, resolution: usize) -> LabContext {
    let mut cfg = LabConfig {
        resolution,
        nu,
        samples: 20,
        ..LabConfig::default()
    };
    cfg.xi.count = count;
    LabContext::new(&cfg).unwrap()
}

#[test]
fn zero_field_ratio_is_zero() {
    assert_eq!(ratio(0.0, 0.0), 0.0);
    assert_eq!(ratio(-1.0, 2.0), 0.0);
    assert_eq!(ratio(1.0, 4.0), 0.25);
}

#[test]
fn cancellation_holds_and_control_fails() {
    let ctx = ctx_with(0, 1.0, 16);
    let r = check_cancellation(&ctx, 10).unwrap();
    assert!(r.c_hat <= 1e-10, "{}", r.c_hat);
    let control = r.control.as_ref().unwrap();
    assert!(control.failed_as_expected && control.value > 1e-3, "{control:?}");
    assert!(r.pass);
}

#[test]
fn single_mode_growth_is_homogeneous() {
    // ξ-free, steady Euler mode: 𝒜φ = -νAφ, so ‖𝒜φ‖²_U = ν²λ³‖φ‖²_X exactly.
    let ctx = ctx_with(0, 0.7, 16);
    let mut sys = ctx.system.clone();
    for s in [0.01, 1.0, 100.0] {
        let phi = taylor_green::<f64>(&ctx.grid, s);
        let lhs = sys.drift(&phi).norm(SPACE_U).powi(2);
        let expect = 0.49 * 8.0 * s * s / 2.0;
        assert!((lhs - expect).abs() <= 1e-12 * expect);
    }
}

#[test]
fn growth_reports_have_no_upward_trend() {
    let ctx = ctx_with(2, 1.0, 16);
    for r in check_growth_bounds(&ctx, 20).unwrap() {
        assert!(r.pass, "{}: trend {:?}", r.id, r.trend_slope);
        assert!(r.ratio.iter().all(|x| *x >= 0.0));
    }
}

#[test]
fn stokes_coercivity_is_two_nu() {
    for nu in [1.0, 0.5] {
        let ctx = ctx_with(0, nu, 16);
        let r = check_coercive_inequality(&ctx, 12).unwrap();
        let k = r.kappa_hat.unwrap();
        assert!((k - 2.0 * nu).abs() <= 1e-10, "{k}");
    }
}

#[test]
fn linear_lipschitz_ratio_is_constant() {
    let ctx = ctx_with(2, 1.0, 16);
    let mut lin = linear_parts(&ctx.system);
    let phi = test_field(&ctx, 50, 0, SPACE_U, 1.0);
    let h = test_field(&ctx, 51, 0, SPACE_H, 1.0);
    let ratios: Vec<f64> = [1e-6, 1e-3, 1.0]
        .iter()
        .map(|&e| {
            let psi = &phi + &h.scaled(e);
            (&lin.drift(&phi) - &lin.drift(&psi)).norm(SPACE_X) / (&phi - &psi).norm(SPACE_H)
        })
        .collect();
    for r in &ratios {
        assert!((r - ratios[2]).abs() <= 1e-8 * ratios[2], "{ratios:?}");
    }
}

#[test]
fn frechet_quotient_matches_linearization() {
    let ctx = ctx_with(2, 1.0, 16);
    let phi = test_field(&ctx, 52, 0, SPACE_U, 1.0);
    let h = test_field(&ctx, 53, 0, SPACE_H, 1.0);
    for eps in [1e-3, 1e-4] {
        let (defect, quad) = frechet_defect(&mut ctx.system.clone(), &phi, &h, eps);
        // The drift is quadratic, so the remainder is exactly ε𝒫L_hh.
        assert!((defect - quad).abs() <= 1e-3 * quad, "{defect} vs {quad}");
    }
    let reports = check_local_lipschitz(&ctx, 20).unwrap();
    assert!(reports.iter().all(|r| r.pass));
}

#[test]
fn stokes_pair_is_two_nu_and_reduction_agrees() {
    let ctx = ctx_with(0, 1.0, 16);
    let reports = check_monotonicity_pair(&ctx, 8).unwrap();
    let u = &reports[0];
    assert!((u.kappa_hat.unwrap() - 2.0).abs() <= 1e-10);
    assert!(u.metrics["reduction_defect"] <= 1e-12);
    let ctx = ctx_with(2, 1.0, 16);
    let reports = check_monotonicity_pair(&ctx, 8).unwrap();
    assert!(reports.iter().all(|r| r.pass));
    assert!(reports[0].metrics["reduction_defect"] <= 1e-12);
}

#[test]
fn projection_audit_is_exact() {
    let ctx = ctx_with(0, 1.0, 16);
    let r = check_projection_properties(&ctx, 10).unwrap();
    assert!(r.pass, "{:?}", r.metrics);
    assert!(r.c_hat <= 1.0 + 1e-12);
}

#[test]
fn projection_commutes_with_conversion() {
    let ctx = ctx_with(3, 1.0, 16);
    let r = check_projection_commutation(&ctx, 12).unwrap();
    assert!(r.pass, "c_hat {}", r.c_hat);
    assert_eq!(r.samples, 12);
    // the intermediate projection is not a no-op, so the identity has content
    let u = test_field(&ctx, 11, 0, SPACE_X, 1.0);
    let mut ws = OperatorWorkspace::<f64>::new(&ctx.grid);
    let b = ws.noise_op(0, &u, &ctx.ensemble).unwrap();
    let mut gradient = b.clone();
    gradient.axpy(-1.0, &leray_project(&b));
    assert!(gradient.max_abs() > 1e-6 * b.max_abs());
    assert_eq!(check_projection_commutation(&ctx_with(0, 1.0, 16), 5).unwrap().samples, 0);
}

#[test]
fn commutator_vanishes_without_noise_and_is_second_order() {
    let mut cfg = LabConfig {
        commutator_resolution: 32,
        commutator_max_shell: 32,
        ..LabConfig::default()
    };
    cfg.xi.count = 0;
    let r = check_commutator_order(&LabContext::new(&cfg).unwrap()).unwrap();
    assert!(r.lhs.iter().all(|x| *x == 0.0));
    cfg.xi.count = 1;
    let r = check_commutator_order(&LabContext::new(&cfg).unwrap()).unwrap();
    assert!(r.pass, "slope {:?}", r.trend_slope);
}

#[test]
fn suite_is_reproducible() {
    let cfg = LabConfig {
        resolution: 16,
        samples: 10,
        commutator_resolution: 32,
        commutator_max_shell: 20,
        ..LabConfig::default()
    };
    let a = run_suite(&cfg).unwrap();
    let b = run_suite(&cfg).unwrap();
    assert_eq!(a.reports, b.reports);
}
