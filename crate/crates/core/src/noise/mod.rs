//! Synthetic correlation fields ξ_i and the truncated cylindrical Brownian
//! motion driving them.

mod brownian;

pub use brownian::{sample_increments, BrownianPath, DEFAULT_DEPTH};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{sobolev_norm, SpectralField};
use crate::grid::TorusGrid;
use crate::operators::{evaluate_on_grid, OperatorWorkspace, PhysicalVector};
use crate::random::{random_field, stream_rng, RandomSpectrum};
use crate::real::Real;

/// Highest eigenvalue shell used to synthesize ξ fields by default.
pub const DEFAULT_XI_MAX_SHELL: i64 = 9;

/// Construction parameters for [`XiEnsemble::generate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiParams {
    pub count: usize,
    pub decay: f64,
    pub amplitude: f64,
    pub max_shell: i64,
    pub seed: u64,
}

impl Default for XiParams {
    fn default() -> Self {
        XiParams {
            count: 0,
            decay: 0.5,
            amplitude: 0.05,
            max_shell: DEFAULT_XI_MAX_SHELL,
            seed: 0,
        }
    }
}

/// Finite family of divergence-free correlation fields.
///
/// Member `i` is a random-phase combination of eigenmodes on shells
/// `1..=max_shell`, normalized to unit L² norm and scaled by
/// `amplitude * decay^i`. The summability certificate bounds
/// `Σ_i ‖ξ_i‖²_{W^{3,∞}}` by `amplitude² · C · (1 - decay^{2N}) / (1 - decay²)`
/// where `C` is the largest squared W^{3,∞} estimate of a normalized member.
#[derive(Clone, Debug)]
pub struct XiEnsemble<T: Real> {
    grid: Arc<TorusGrid>,
    fields: Vec<SpectralField<T>>,
    prepared: Vec<PhysicalVector<T>>,
    w3inf_norms: Vec<f64>,
    decay: f64,
    amplitude: f64,
    norm_factor: f64,
    certificate: f64,
}

impl<T: Real> XiEnsemble<T> {
    pub fn empty(grid: &Arc<TorusGrid>) -> Self {
        Self::assemble(grid, Vec::new(), 0.0, 0.0, 0.0, 0.0)
    }

    pub fn generate(grid: &Arc<TorusGrid>, params: &XiParams) -> Result<Self> {
        if !(params.decay > 0.0 && params.decay < 1.0) {
            return Err(Error::param(
                "xi_decay",
                format!("must lie in (0, 1) for a summable family, got {}", params.decay),
            ));
        }
        if !(params.amplitude >= 0.0 && params.amplitude.is_finite()) {
            return Err(Error::param(
                "xi_amplitude",
                format!("must be finite and non-negative, got {}", params.amplitude),
            ));
        }
        if params.max_shell < 1 {
            return Err(Error::param("xi_max_shell", "must be at least 1"));
        }
        let spec = RandomSpectrum::band(1, params.max_shell);
        let mut bases = Vec::with_capacity(params.count);
        let mut factor = 0.0f64;
        for i in 0..params.count {
            let mut rng = stream_rng(params.seed, i as u64);
            let base = random_field::<T, _>(grid, spec, 0, T::one(), &mut rng);
            factor = factor.max(w3inf_estimate(&base).to_f64_lossy().powi(2));
            bases.push(base);
        }
        let fields = bases
            .into_iter()
            .enumerate()
            .map(|(i, b)| b.scaled(T::lit(params.amplitude * params.decay.powi(i as i32))))
            .collect();
        let d2 = params.decay * params.decay;
        let n = params.count as i32;
        let certificate = params.amplitude.powi(2) * factor * (1.0 - d2.powi(n)) / (1.0 - d2);
        Ok(Self::assemble(
            grid,
            fields,
            params.decay,
            params.amplitude,
            factor,
            certificate,
        ))
    }

    /// Ensemble from explicit fields; the certificate is the measured sum.
    pub fn from_fields(grid: &Arc<TorusGrid>, fields: Vec<SpectralField<T>>) -> Result<Self> {
        for f in &fields {
            if !f.grid().same_shape(grid) {
                return Err(Error::GridMismatch {
                    left: format!("{grid:?}"),
                    right: format!("{:?}", f.grid()),
                });
            }
        }
        let mut ens = Self::assemble(grid, fields, 0.0, 0.0, 0.0, 0.0);
        ens.certificate = ens.measured_sum();
        ens.norm_factor = ens.w3inf_norms.iter().fold(0.0, |m, &x| m.max(x * x));
        Ok(ens)
    }

    fn assemble(
        grid: &Arc<TorusGrid>,
        fields: Vec<SpectralField<T>>,
        decay: f64,
        amplitude: f64,
        norm_factor: f64,
        certificate: f64,
    ) -> Self {
        let mut ws = OperatorWorkspace::<T>::new(grid);
        let prepared = fields.iter().map(|f| ws.physical(f, true)).collect();
        let w3inf_norms = fields.iter().map(|f| w3inf_estimate(f).to_f64_lossy()).collect();
        XiEnsemble {
            grid: Arc::clone(grid),
            fields,
            prepared,
            w3inf_norms,
            decay,
            amplitude,
            norm_factor,
            certificate,
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[SpectralField<T>] {
        &self.fields
    }

    pub fn field(&self, i: usize) -> Result<&SpectralField<T>> {
        self.fields.get(i).ok_or(Error::NoiseIndex {
            index: i,
            len: self.fields.len(),
        })
    }

    /// Padded physical samples and gradients of member `i`.
    pub fn prepared(&self, i: usize) -> Result<&PhysicalVector<T>> {
        self.prepared.get(i).ok_or(Error::NoiseIndex {
            index: i,
            len: self.fields.len(),
        })
    }

    pub fn w3inf_norms(&self) -> &[f64] {
        &self.w3inf_norms
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Per-field norm factor `C` entering the certificate.
    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    pub fn summability_certificate(&self) -> f64 {
        self.certificate
    }

    /// `Σ_i ‖ξ_i‖²_{W^{3,∞}}` from the stored estimates.
    pub fn measured_sum(&self) -> f64 {
        self.w3inf_norms.iter().fold(0.0, |acc, x| acc + x * x)
    }

    /// Partial sums of squared W^{3,∞} estimates.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.w3inf_norms
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x * x;
                Some(*acc)
            })
            .collect()
    }

    /// Largest divergence residual relative to the field's L² norm.
    pub fn max_divergence_residual(&self) -> f64 {
        self.fields
            .iter()
            .map(|f| {
                let n = sobolev_norm(f, 0).to_f64_lossy();
                if n == 0.0 {
                    0.0
                } else {
                    f.divergence_residual().to_f64_lossy() / n
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn summary(&self) -> EnsembleSummary {
        EnsembleSummary {
            count: self.len(),
            decay: self.decay,
            amplitude: self.amplitude,
            norm_factor: self.norm_factor,
            w3inf_norms: self.w3inf_norms.clone(),
            measured_sum: self.measured_sum(),
            summability_certificate: self.certificate,
        }
    }
}

/// Serializable digest of an ensemble (the JSON sidecar content).
#[derive(Clone, Debug, Serialize)]
pub struct EnsembleSummary {
    pub count: usize,
    pub decay: f64,
    pub amplitude: f64,
    pub norm_factor: f64,
    pub w3inf_norms: Vec<f64>,
    pub measured_sum: f64,
    pub summability_certificate: f64,
}

/// Lower estimate of `‖ξ‖_{W^{3,∞}}`: the largest pointwise magnitude of any
/// derivative `∂^α ξ` with `|α| ≤ 3`, sampled on a grid oversampled 2× along
/// each axis.
pub fn w3inf_estimate<T: Real>(xi: &SpectralField<T>) -> T {
    let grid = xi.grid();
    let dim = grid.dim();
    let size = 2 * grid.resolution();
    let mut best = T::zero();
    for alpha in multi_indices(dim, 3) {
        let comps = evaluate_on_grid(xi, size, &alpha);
        let npts = comps[0].len();
        for p in 0..npts {
            let mag = comps.iter().map(|c| c[p] * c[p]).sum::<T>().sqrt();
            best = best.max(mag);
        }
    }
    best
}

/// Non-decreasing axis lists of length `0..=order`, one per multi-index.
fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..order {
        let mut next = Vec::new();
        for idx in &frontier {
            let start = idx.last().copied().unwrap_or(0);
            for axis in start..dim {
                let mut v: Vec<usize> = idx.clone();
                v.push(axis);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::random::single_mode;

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 3).len(), 1 + 2 + 3 + 4);
        assert_eq!(multi_indices(3, 3).len(), 1 + 3 + 6 + 10);
    }

    #[test]
    fn w3inf_of_a_sinusoid() {
        let g = Arc::new(make_grid(2, 16).unwrap());
        let xi = single_mode::<f64>(&g, [2, 0, 0], [0.0; 3], [0.0, 1.0, 0.0]);
        assert!((w3inf_estimate(&xi) - 8.0).abs() < 1e-12);
        assert_eq!(w3inf_estimate(&SpectralField::<f64>::zeros(&g)), 0.0);
        let s = w3inf_estimate(&xi.scaled(-2.5));
        assert!((s - 2.5 * 8.0).abs() < 1e-12 * s);
    }

    #[test]
    fn empty_and_invalid_ensembles() {
        let g = Arc::new(make_grid(2, 16).unwrap());
        let p = XiParams {
            count: 0,
            ..XiParams::default()
        };
        let e = XiEnsemble::<f64>::generate(&g, &p).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.summability_certificate(), 0.0);
        for decay in [1.0, 1.5, 0.0] {
            let p = XiParams {
                count: 3,
                decay,
                ..XiParams::default()
            };
            assert!(XiEnsemble::<f64>::generate(&g, &p).is_err());
        }
        assert!(matches!(e.prepared(0), Err(Error::NoiseIndex { .. })));
    }

    #[test]
    fn geometric_certificate_bounds_measured_norms() {
        let g = Arc::new(make_grid(2, 16).unwrap());
        let a = 0.3;
        let p = XiParams {
            count: 3,
            decay: 0.5,
            amplitude: a,
            max_shell: 9,
            seed: 11,
        };
        let e = XiEnsemble::<f64>::generate(&g, &p).unwrap();
        let c = e.norm_factor();
        let bound = a * a * c * (1.0 + 0.25 + 0.0625);
        assert!((e.summability_certificate() - bound).abs() <= 1e-12 * bound);
        let sums = e.partial_sums();
        assert!(sums.windows(2).all(|w| w[0] <= w[1]));
        assert!(*sums.last().unwrap() <= e.summability_certificate() * (1.0 + 1e-12));
        assert!(e.max_divergence_residual() <= 1e-12);
    }
}
