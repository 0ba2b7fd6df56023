//! Seeded random divergence-free fields used by experiments and audits.

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::field::{leray_project, sobolev_norm, RawField, SpectralField};
use crate::grid::TorusGrid;
use crate::real::Real;

/// Deterministic RNG for a `(seed, stream)` pair.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer; mixes structured keys into well-spread seeds.
pub fn mix_seed(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed derived from a base seed and a sequence of indices.
pub fn derive_seed(base: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(mix_seed(base), |acc, &k| mix_seed(acc ^ mix_seed(k)))
}

/// Shape of a random spectrum: Gaussian coefficients on shells
/// `min_shell ≤ |k|² ≤ max_shell` with standard deviation `|k|^{-slope}`.
#[derive(Clone, Copy, Debug)]
pub struct RandomSpectrum {
    pub min_shell: i64,
    pub max_shell: i64,
    pub slope: f64,
}

impl Default for RandomSpectrum {
    fn default() -> Self {
        RandomSpectrum {
            min_shell: 1,
            max_shell: i64::MAX,
            slope: 1.0,
        }
    }
}

impl RandomSpectrum {
    pub fn band(min_shell: i64, max_shell: i64) -> Self {
        RandomSpectrum {
            min_shell,
            max_shell,
            slope: 0.0,
        }
    }
}

/// Raw Gaussian field (conjugate-symmetric, not projected).
pub fn random_raw<T: Real, R: Rng + ?Sized>(
    grid: &Arc<TorusGrid>,
    spec: RandomSpectrum,
    rng: &mut R,
) -> RawField<T> {
    let mut raw = RawField::<T>::zeros(grid);
    let len = grid.len();
    for &flat in grid.retained() {
        let k2 = grid.k2(flat);
        if k2 < spec.min_shell || k2 > spec.max_shell {
            continue;
        }
        let sd = (k2 as f64).powf(-0.5 * spec.slope);
        let coeffs = raw.coeffs_mut();
        for c in 0..grid.dim() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            coeffs[c * len + flat] = Complex::new(T::lit(re * sd), T::lit(im * sd));
        }
    }
    raw.symmetrize();
    raw
}

/// Random divergence-free field rescaled to `‖f‖_m = norm`.
pub fn random_field<T: Real, R: Rng + ?Sized>(
    grid: &Arc<TorusGrid>,
    spec: RandomSpectrum,
    m: u32,
    norm: T,
    rng: &mut R,
) -> SpectralField<T> {
    let f = leray_project(&random_raw::<T, R>(grid, spec, rng));
    let current = sobolev_norm(&f, m);
    if current == T::zero() {
        f
    } else {
        f.scaled(norm / current)
    }
}

/// Single real Fourier mode `a cos(k·x) + b sin(k·x)` projected onto the
/// divergence-free subspace.
pub fn single_mode<T: Real>(
    grid: &Arc<TorusGrid>,
    k: [i32; 3],
    cos_amp: [f64; 3],
    sin_amp: [f64; 3],
) -> SpectralField<T> {
    let mut raw = RawField::<T>::zeros(grid);
    let neg = [-k[0], -k[1], -k[2]];
    for c in 0..grid.dim() {
        // a cos + b sin = (a - ib)/2 e^{ikx} + (a + ib)/2 e^{-ikx}
        let z = Complex::new(T::lit(cos_amp[c] / 2.0), T::lit(-sin_amp[c] / 2.0));
        raw.set(&k, c, z);
        raw.set(&neg, c, z.conj());
    }
    leray_project(&raw)
}

/// Taylor–Green vortex. On the 2-torus `A(-cos x sin y, sin x cos y)`; on the
/// 3-torus `A(sin x cos y cos z, -cos x sin y cos z, 0)`.
pub fn taylor_green<T: Real>(grid: &Arc<TorusGrid>, amplitude: f64) -> SpectralField<T> {
    let mut raw = RawField::<T>::zeros(grid);
    let q = amplitude / 4.0;
    let sx = [1, -1];
    if grid.dim() == 2 {
        // -cos x sin y = Σ ±(i/4) e^{i(±x ±y)}, etc.
        for &a in &sx {
            for &b in &sx {
                let k = [a, b, 0];
                // -cos x sin y: coefficient of e^{i(ax+by)} is -(1/2)(1/(2i)) b = i b / 4
                raw.set(&k, 0, Complex::new(T::zero(), T::lit(q * b as f64)));
                // sin x cos y: coefficient is (1/(2i)) a (1/2) = -i a / 4
                raw.set(&k, 1, Complex::new(T::zero(), T::lit(-q * a as f64)));
            }
        }
    } else {
        for &a in &sx {
            for &b in &sx {
                for &c in &sx {
                    let k = [a, b, c];
                    // sin x cos y cos z: (a/(2i)) (1/2)(1/2) = -i a / 8
                    raw.set(&k, 0, Complex::new(T::zero(), T::lit(-q * a as f64 / 2.0)));
                    // -cos x sin y cos z: -(1/2)(b/(2i))(1/2) = i b / 8
                    raw.set(&k, 1, Complex::new(T::zero(), T::lit(q * b as f64 / 2.0)));
                }
            }
        }
    }
    leray_project(&raw)
}
