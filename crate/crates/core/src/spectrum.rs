//! Stokes eigenstructure of the retained band and Galerkin truncations.
//!
//! Galerkin spaces always contain whole eigenvalue shells: level `n` keeps
//! every retained mode with `|k|²` among the `n` smallest distinct values.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{RawField, SpectralField};
use crate::grid::{TorusGrid, Wavevector};
use crate::real::Real;

#[derive(Clone, Debug)]
pub struct StokesSpectrum {
    grid: Arc<TorusGrid>,
    /// Retained flat indices sorted by `(|k|², k)`.
    ordering: Vec<usize>,
    /// Distinct eigenvalues, ascending.
    shells: Vec<i64>,
    /// `shell_end[s]` = number of entries of `ordering` with eigenvalue ≤ `shells[s]`.
    shell_end: Vec<usize>,
}

impl StokesSpectrum {
    pub fn new(grid: &Arc<TorusGrid>) -> Self {
        let mut ordering: Vec<usize> = grid.retained().to_vec();
        ordering.sort_by_key(|&flat| (grid.k2(flat), grid.wavevector(flat)));
        let mut shells = Vec::new();
        let mut shell_end = Vec::new();
        for (pos, &flat) in ordering.iter().enumerate() {
            let lam = grid.k2(flat);
            if shells.last() != Some(&lam) {
                if !shells.is_empty() {
                    shell_end.push(pos);
                }
                shells.push(lam);
            }
        }
        if !shells.is_empty() {
            shell_end.push(ordering.len());
        }
        StokesSpectrum {
            grid: Arc::clone(grid),
            ordering,
            shells,
            shell_end,
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    /// Number of distinct eigenvalue shells in the retained band.
    pub fn shell_count(&self) -> usize {
        self.shells.len()
    }

    /// Eigenvalue of shell `s` (zero-based).
    pub fn shell(&self, s: usize) -> i64 {
        self.shells[s]
    }

    pub fn shells(&self) -> &[i64] {
        &self.shells
    }

    /// Number of shells with eigenvalue at most `lambda`.
    pub fn shells_through(&self, lambda: i64) -> usize {
        self.shells.partition_point(|&l| l <= lambda)
    }

    /// Eigenvalue of every retained wavevector in the deterministic order.
    pub fn ordered_modes(&self) -> impl Iterator<Item = (Wavevector, i64)> + '_ {
        self.ordering
            .iter()
            .map(|&flat| (self.grid.wavevector(flat), self.grid.k2(flat)))
    }

    /// Count of Stokes eigenfunctions in the first `shells` shells
    /// (`dim - 1` divergence-free polarizations per wavevector).
    pub fn mode_count(&self, shells: usize) -> usize {
        let wavevectors = if shells == 0 { 0 } else { self.shell_end[shells - 1] };
        wavevectors * (self.grid.dim() - 1)
    }

    /// Largest eigenvalue kept at level `shells`, zero for the empty level.
    pub fn level_max_eigenvalue(&self, shells: usize) -> i64 {
        if shells == 0 {
            0
        } else {
            self.shells[shells - 1]
        }
    }

    /// `μ_n = √λ_{n+1}`, the square root of the smallest excluded eigenvalue,
    /// or `+∞` when level `shells` keeps everything.
    pub fn tail_bound_mu(&self, shells: usize) -> Result<f64> {
        if shells > self.shell_count() {
            return Err(Error::LevelOutOfRange {
                requested: shells,
                available: self.shell_count(),
            });
        }
        Ok(if shells == self.shell_count() {
            f64::INFINITY
        } else {
            (self.shells[shells] as f64).sqrt()
        })
    }

    /// Orthogonal projection onto the first `shells` eigenvalue shells.
    pub fn galerkin_project<T: Real>(
        &self,
        f: &SpectralField<T>,
        shells: usize,
    ) -> Result<SpectralField<T>> {
        let raw = self.galerkin_project_raw(f.raw(), shells)?;
        Ok(SpectralField::from_raw_unchecked(raw))
    }

    pub fn galerkin_project_raw<T: Real>(&self, f: &RawField<T>, shells: usize) -> Result<RawField<T>> {
        if shells > self.shell_count() {
            return Err(Error::LevelOutOfRange {
                requested: shells,
                available: self.shell_count(),
            });
        }
        let mut out = f.clone();
        if shells == self.shell_count() {
            return Ok(out);
        }
        let lmax = self.level_max_eigenvalue(shells);
        let len = self.grid.len();
        let dim = self.grid.dim();
        let coeffs = out.coeffs_mut();
        for flat in 0..len {
            if self.grid.k2(flat) > lmax {
                for c in 0..dim {
                    coeffs[c * len + flat] = Complex::default();
                }
            }
        }
        Ok(out)
    }

    /// In-place Galerkin projection without the range check.
    pub(crate) fn project_in_place<T: Real>(&self, f: &mut RawField<T>, lmax: i64) {
        let len = self.grid.len();
        let dim = self.grid.dim();
        let grid = Arc::clone(&self.grid);
        let coeffs = f.coeffs_mut();
        for flat in 0..len {
            if grid.k2(flat) > lmax {
                for c in 0..dim {
                    coeffs[c * len + flat] = Complex::default();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{leray_project, sobolev_norm, stokes_apply};
    use crate::grid::make_grid;

    fn two_mode_field(grid: &Arc<TorusGrid>) -> SpectralField<f64> {
        // (0, cos x) on λ = 1 and (0, 0.5 cos 3x) on λ = 9
        let mut raw = RawField::<f64>::zeros(grid);
        for (kx, a) in [(1, 0.5), (3, 0.25)] {
            raw.set(&[kx, 0, 0], 1, Complex::new(a, 0.0));
            raw.set(&[-kx, 0, 0], 1, Complex::new(a, 0.0));
        }
        leray_project(&raw)
    }

    #[test]
    fn lattice_shells_in_two_dimensions() {
        let g = Arc::new(make_grid(2, 16).unwrap());
        let sp = StokesSpectrum::new(&g);
        assert_eq!(&sp.shells()[..6], &[1, 2, 4, 5, 8, 9]);
        assert_eq!(sp.shells_through(4), 3);
        assert_eq!(sp.tail_bound_mu(3).unwrap(), 5f64.sqrt());
        assert_eq!(sp.tail_bound_mu(0).unwrap(), 1.0);
        assert!(sp.tail_bound_mu(sp.shell_count()).unwrap().is_infinite());
        assert!(sp.tail_bound_mu(sp.shell_count() + 1).is_err());
        // 4 wavevectors on λ=1, one polarization each in 2D
        assert_eq!(sp.mode_count(1), 4);
    }

    #[test]
    fn ordering_is_monotone_with_lexicographic_ties() {
        let g = Arc::new(make_grid(3, 8).unwrap());
        let sp = StokesSpectrum::new(&g);
        let modes: Vec<_> = sp.ordered_modes().collect();
        for w in modes.windows(2) {
            assert!((w[0].1, w[0].0) < (w[1].1, w[1].0));
        }
    }

    #[test]
    fn galerkin_extremes_and_two_shell_example() {
        let g = Arc::new(make_grid(2, 16).unwrap());
        let sp = StokesSpectrum::new(&g);
        let f = two_mode_field(&g);
        let all = sp.galerkin_project(&f, sp.shell_count()).unwrap();
        assert_eq!(all.coeffs(), f.coeffs());
        assert_eq!(sp.galerkin_project(&f, 0).unwrap().max_abs(), 0.0);
        assert!(sp.galerkin_project(&f, sp.shell_count() + 1).is_err());

        let n = sp.shells_through(1);
        let low = sp.galerkin_project(&f, n).unwrap();
        let tail = &f - &low;
        assert_eq!(tail.at(&[1, 0, 0], 1), Complex::new(0.0, 0.0));
        assert!((sobolev_norm(&tail, 1) - 3.0 * sobolev_norm(&tail, 0)).abs() < 1e-15);
        // commutes with the Stokes operator
        let a = stokes_apply(&sp.galerkin_project(&f, 4).unwrap());
        let b = sp.galerkin_project(&stokes_apply(&f), 4).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
    }
}
