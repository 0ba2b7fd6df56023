use std::sync::Arc;

use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;

use salt_core::operators::evaluate_on_grid;
use salt_core::random::{random_field, random_raw, stream_rng, RandomSpectrum};
use salt_core::{leray_project, make_grid, sobolev_inner, sobolev_norm, BrownianPath, RawField, TorusGrid, Workspace};

fn grid(dim: usize, n: usize) -> Arc<TorusGrid> {
    Arc::new(make_grid(dim, n).unwrap())
}

fn spec(max_shell: i64) -> RandomSpectrum {
    RandomSpectrum {
        min_shell: 1,
        max_shell,
        slope: 1.0,
    }
}

/// Same random low-mode coefficients (|k_j| <= 2) placed on two grids.
fn low_mode_pair(seed: u64, coarse: &Arc<TorusGrid>, fine: &Arc<TorusGrid>) -> (RawField<f64>, RawField<f64>) {
    let mut rng = stream_rng(seed, 0);
    let mut a = RawField::zeros(coarse);
    let mut b = RawField::zeros(fine);
    for kx in -2..=2 {
        for ky in 0..=2 {
            if ky == 0 && kx <= 0 {
                continue;
            }
            let k = [kx, ky, 0];
            let neg = [-kx, -ky, 0];
            for c in 0..2 {
                let z = Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                for f in [&mut a, &mut b] {
                    f.set(&k, c, z);
                    f.set(&neg, c, z.conj());
                }
            }
        }
    }
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn leray_is_an_orthogonal_projection(seed in any::<u64>(), dim in 2usize..=3) {
        let g = grid(dim, if dim == 2 { 16 } else { 8 });
        let mut rng = stream_rng(seed, 0);
        let f = random_raw::<f64, _>(&g, spec(20), &mut rng);
        let h = random_raw::<f64, _>(&g, spec(20), &mut rng);
        let pf = leray_project(&f);
        let ppf = leray_project(&pf);
        let scale = f.max_abs().max(1.0);
        prop_assert!((&ppf - &pf).max_abs() <= 1e-12 * scale);
        prop_assert!(pf.divergence_residual() <= 1e-12 * scale);
        let ph = leray_project(&h);
        let lhs = sobolev_inner(&pf, &h, 0).unwrap();
        let rhs = sobolev_inner(&f, &ph, 0).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * sobolev_norm(&f, 0) * sobolev_norm(&h, 0));
        prop_assert!(sobolev_norm(&pf, 0) <= sobolev_norm(&f, 0) * (1.0 + 1e-14));
    }

    #[test]
    fn sobolev_norms_are_ordered(seed in any::<u64>(), max_shell in 1i64..60) {
        let g = grid(2, 32);
        let f = random_field::<f64, _>(&g, spec(max_shell), 0, 1.0, &mut stream_rng(seed, 1));
        let norms: Vec<f64> = (0..4).map(|m| f.norm(m)).collect();
        for w in norms.windows(2) {
            prop_assert!(w[0] <= w[1] * (1.0 + 1e-14));
        }
    }

    #[test]
    fn parseval_with_mean_normalization(seed in any::<u64>()) {
        let g = grid(2, 16);
        let f = random_field::<f64, _>(&g, spec(30), 0, 1.0, &mut stream_rng(seed, 2));
        let comps = evaluate_on_grid(&f, 16, &[]);
        let npts = comps[0].len() as f64;
        let mean_sq: f64 = comps.iter().flat_map(|c| c.iter()).map(|v| v * v).sum::<f64>() / npts;
        prop_assert!((mean_sq - f.norm(0).powi(2)).abs() <= 1e-12);
    }

    #[test]
    fn advection_is_grid_independent_for_resolved_inputs(seed in any::<u64>()) {
        let (coarse, fine) = (grid(2, 16), grid(2, 32));
        let (phi_c, phi_f) = low_mode_pair(seed, &coarse, &fine);
        let (psi_c, psi_f) = low_mode_pair(seed ^ 0x5a5a, &coarse, &fine);
        let a = Workspace::new(&coarse).advect(&phi_c, &psi_c).unwrap();
        let b = Workspace::new(&fine).advect(&phi_f, &psi_f).unwrap();
        let scale = b.max_abs().max(1.0);
        for kx in -5..=5 {
            for ky in -5..=5 {
                for c in 0..2 {
                    let k = [kx, ky, 0];
                    prop_assert!((a.at(&k, c) - b.at(&k, c)).norm() <= 1e-13 * scale);
                }
            }
        }
        // products of |k_j| <= 2 modes stay inside |k_j| <= 4
        prop_assert!(b.at(&[6, 0, 0], 0).norm() <= 1e-15 * scale);
    }

    #[test]
    fn brownian_increments_have_variance_dt(seed in any::<u64>()) {
        let dt = 1e-2;
        let path = BrownianPath::sample(4096, 2, dt, seed).unwrap();
        let a = path.stream(0);
        let b = path.stream(1);
        let n = a.len() as f64;
        let var = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() / n;
        prop_assert!((var(&a) / dt - 1.0).abs() < 0.15);
        prop_assert!((var(&b) / dt - 1.0).abs() < 0.15);
        let corr = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / n / dt;
        prop_assert!(corr.abs() < 0.1);
        let fine = path.refined(2).unwrap();
        let total: f64 = fine.stream(0).iter().sum();
        prop_assert!((total - a.iter().sum::<f64>()).abs() <= 1e-12);
    }
}
