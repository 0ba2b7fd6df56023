//! Periodic grids on the torus `[0, 2π)^d` and their wavevector lattices.

use std::fmt;

use crate::error::{Error, Result};

/// Default fraction of the resolvable band kept after every product.
pub const TWO_THIRDS: f64 = 2.0 / 3.0;

/// Integer wavevector; trailing entries are zero when `dim == 2`.
pub type Wavevector = [i32; 3];

/// Uniform periodic grid with `resolution` points per axis on `[0, 2π)^dim`.
///
/// Spectral arrays are stored in FFT order: flat index `((i0 * n) + i1) * n + i2`
/// with axis 0 slowest, and index `i` on an axis carrying wavenumber `i` for
/// `i < n/2` and `i - n` otherwise.
#[derive(Clone)]
pub struct TorusGrid {
    dim: usize,
    resolution: usize,
    dealias: f64,
    cutoff: i32,
    wavevectors: Vec<Wavevector>,
    retained: Vec<usize>,
    mask: Vec<bool>,
    mirror: Vec<usize>,
}

impl TorusGrid {
    /// Grid with the standard 2/3 dealiasing rule.
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        Self::with_dealias(dim, resolution, TWO_THIRDS)
    }

    pub fn with_dealias(dim: usize, resolution: usize, dealias: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if resolution < 4 {
            return Err(Error::InvalidGrid(format!(
                "resolution must be at least 4, got {resolution}"
            )));
        }
        if !resolution.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "resolution must be even, got {resolution}"
            )));
        }
        if !(dealias > 0.0 && dealias <= TWO_THIRDS + 1e-12) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction must lie in (0, 2/3], got {dealias}"
            )));
        }
        // Largest |k_j| strictly inside the dealiased band.
        let band = dealias * (resolution / 2) as f64;
        let cutoff = (band.ceil() as i32 - 1).max(0);
        let n = resolution;
        let len = n.pow(dim as u32);
        let mut wavevectors = Vec::with_capacity(len);
        for flat in 0..len {
            let mut k = [0i32; 3];
            let mut rem = flat;
            for axis in (0..dim).rev() {
                let i = rem % n;
                rem /= n;
                k[axis] = if i < n / 2 { i as i32 } else { i as i32 - n as i32 };
            }
            wavevectors.push(k);
        }
        let mask: Vec<bool> = wavevectors
            .iter()
            .map(|k| k.iter().all(|&kj| kj.abs() <= cutoff) && *k != [0, 0, 0])
            .collect();
        let retained = (0..len).filter(|&i| mask[i]).collect();
        let mut grid = TorusGrid {
            dim,
            resolution,
            dealias,
            cutoff,
            wavevectors,
            retained,
            mask,
            mirror: Vec::new(),
        };
        grid.mirror = (0..len)
            .map(|i| {
                let k = grid.wavevectors[i];
                grid.index_of(&[-k[0], -k[1], -k[2]]).unwrap_or(i)
            })
            .collect();
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn dealias(&self) -> f64 {
        self.dealias
    }

    /// Largest retained `|k_j|` per axis.
    pub fn cutoff(&self) -> i32 {
        self.cutoff
    }

    /// Number of lattice points, `resolution^dim`.
    pub fn len(&self) -> usize {
        self.wavevectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavevectors.is_empty()
    }

    pub fn wavevector(&self, flat: usize) -> Wavevector {
        self.wavevectors[flat]
    }

    pub fn wavevectors(&self) -> &[Wavevector] {
        &self.wavevectors
    }

    /// `|k|^2` at a flat index, i.e. the Stokes eigenvalue of that mode.
    pub fn k2(&self, flat: usize) -> i64 {
        let k = self.wavevectors[flat];
        k.iter().map(|&x| (x as i64) * (x as i64)).sum()
    }

    /// Flat indices of the retained (dealiased, nonzero) modes, ascending.
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn is_retained(&self, flat: usize) -> bool {
        self.mask[flat]
    }

    /// Flat index of `-k`.
    pub fn mirror(&self, flat: usize) -> usize {
        self.mirror[flat]
    }

    /// Flat index of a wavevector, if it lies on the lattice.
    pub fn index_of(&self, k: &Wavevector) -> Option<usize> {
        let n = self.resolution as i32;
        let mut flat = 0usize;
        for &kj in k.iter().take(self.dim) {
            if kj < -n / 2 || kj >= n / 2 {
                return None;
            }
            let i = if kj >= 0 { kj } else { kj + n };
            flat = flat * self.resolution + i as usize;
        }
        if self.dim == 2 && k[2] != 0 {
            return None;
        }
        Some(flat)
    }

    /// Points per axis of the zero-padded grid used for quadratic products.
    pub fn padded_resolution(&self) -> usize {
        3 * self.resolution / 2
    }

    /// Grid spacing `2π / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.resolution as f64
    }

    pub fn same_shape(&self, other: &TorusGrid) -> bool {
        self.dim == other.dim
            && self.resolution == other.resolution
            && self.cutoff == other.cutoff
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other)
    }
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim)
            .field("resolution", &self.resolution)
            .field("cutoff", &self.cutoff)
            .field("retained", &self.retained.len())
            .finish()
    }
}

/// Validating constructor with the default 2/3 rule.
pub fn make_grid(dim: usize, resolution: usize) -> Result<TorusGrid> {
    TorusGrid::new(dim, resolution)
}
