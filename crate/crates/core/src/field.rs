//! Spectral vector fields, the Leray projector, the Stokes operator and the
//! Sobolev-type inner products `⟨f, g⟩_m = Σ_k |k|^{2m} Re(f̂(k) · conj ĝ(k))`.
//!
//! Coefficients follow `f(x) = Σ_k f̂(k) e^{ik·x}`, so `⟨f, g⟩_0` is the
//! mean of `f · g` over the torus.

use std::ops::{Add, AddAssign, Deref, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::real::Real;

/// Vector field in spectral space with no structural guarantees beyond the
/// grid layout: component-major, each component a `resolution^dim` array in
/// FFT order.
#[derive(Clone, Debug)]
pub struct RawField<T: Real> {
    grid: Arc<TorusGrid>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> RawField<T> {
    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        RawField {
            grid: Arc::clone(grid),
            coeffs: vec![Complex::default(); grid.dim() * grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Arc<TorusGrid>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.dim() * grid.len() {
            return Err(Error::Format(format!(
                "expected {} coefficients, got {}",
                grid.dim() * grid.len(),
                coeffs.len()
            )));
        }
        Ok(RawField {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    /// Builds a field by evaluating `f(k, component)` on every retained mode.
    pub fn from_modes(
        grid: &Arc<TorusGrid>,
        mut f: impl FnMut(&[i32; 3], usize) -> Complex<T>,
    ) -> Self {
        let mut out = Self::zeros(grid);
        let len = grid.len();
        for &flat in grid.retained() {
            let k = grid.wavevector(flat);
            for c in 0..grid.dim() {
                out.coeffs[c * len + flat] = f(&k, c);
            }
        }
        out
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex<T>] {
        let len = self.grid.len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex<T>] {
        let len = self.grid.len();
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    /// Coefficient of component `c` at wavevector `k`, zero off the lattice.
    pub fn at(&self, k: &[i32; 3], c: usize) -> Complex<T> {
        match self.grid.index_of(k) {
            Some(flat) => self.coeffs[c * self.grid.len() + flat],
            None => Complex::default(),
        }
    }

    pub fn set(&mut self, k: &[i32; 3], c: usize, value: Complex<T>) {
        let flat = self.grid.index_of(k).expect("wavevector on lattice");
        let len = self.grid.len();
        self.coeffs[c * len + flat] = value;
    }

    pub fn check_grid(&self, other: &RawField<T>) -> Result<()> {
        if self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: format!("{:?}", self.grid),
                right: format!("{:?}", other.grid),
            })
        }
    }

    /// Zeroes every coefficient outside the retained band (including `k = 0`).
    pub fn truncate(&mut self) {
        let len = self.grid.len();
        for c in 0..self.dim() {
            for flat in 0..len {
                if !self.grid.is_retained(flat) {
                    self.coeffs[c * len + flat] = Complex::default();
                }
            }
        }
    }

    /// Truncates and averages each retained pair `(k, -k)` so that
    /// `f̂(-k) = conj f̂(k)` holds exactly.
    pub fn symmetrize(&mut self) {
        self.truncate();
        let len = self.grid.len();
        let half = T::lit(0.5);
        for c in 0..self.dim() {
            for &flat in self.grid.retained() {
                let m = self.grid.mirror(flat);
                if m < flat {
                    continue;
                }
                let a = self.coeffs[c * len + flat];
                let b = self.coeffs[c * len + m];
                let avg = (a + b.conj()).scale(half);
                self.coeffs[c * len + flat] = avg;
                self.coeffs[c * len + m] = avg.conj();
            }
        }
    }

    /// `max_k |Σ_j k_j f̂_j(k)|` over the whole lattice.
    pub fn divergence_residual(&self) -> T {
        let len = self.grid.len();
        let mut worst = T::zero();
        for flat in 0..len {
            let k = self.grid.wavevector(flat);
            let mut acc = Complex::<T>::default();
            for (c, &kc) in k.iter().enumerate().take(self.dim()) {
                acc += self.coeffs[c * len + flat].scale(T::lit(kc as f64));
            }
            worst = worst.max(acc.norm());
        }
        worst
    }

    /// `max_k |f̂(-k) - conj f̂(k)|`.
    pub fn conjugate_defect(&self) -> T {
        let len = self.grid.len();
        let mut worst = T::zero();
        for c in 0..self.dim() {
            for flat in 0..len {
                let m = self.grid.mirror(flat);
                let d = self.coeffs[c * len + m] - self.coeffs[c * len + flat].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Largest coefficient magnitude outside the retained band.
    pub fn off_band_max(&self) -> T {
        let len = self.grid.len();
        let mut worst = T::zero();
        for c in 0..self.dim() {
            for flat in 0..len {
                if !self.grid.is_retained(flat) {
                    worst = worst.max(self.coeffs[c * len + flat].norm());
                }
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn scale_in_place(&mut self, a: T) {
        for z in &mut self.coeffs {
            *z = z.scale(a);
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: T, other: &RawField<T>) {
        debug_assert!(self.grid.same_shape(&other.grid));
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y.scale(a);
        }
    }

    /// Multiplies each mode by `mult(|k|^2)`.
    pub fn apply_radial(&mut self, mut mult: impl FnMut(i64) -> T) {
        let len = self.grid.len();
        let grid = Arc::clone(&self.grid);
        for flat in 0..len {
            let s = mult(grid.k2(flat));
            for c in 0..grid.dim() {
                let z = &mut self.coeffs[c * len + flat];
                *z = z.scale(s);
            }
        }
    }
}

/// Divergence-free, zero-average, conjugate-symmetric field supported on the
/// retained band. Only produced by operations that preserve those properties.
#[derive(Clone, Debug)]
pub struct SpectralField<T: Real>(RawField<T>);

impl<T: Real> Deref for SpectralField<T> {
    type Target = RawField<T>;

    fn deref(&self) -> &RawField<T> {
        &self.0
    }
}

impl<T: Real> AsRef<RawField<T>> for SpectralField<T> {
    fn as_ref(&self) -> &RawField<T> {
        &self.0
    }
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        SpectralField(RawField::zeros(grid))
    }

    /// Accepts a raw field whose invariants hold to `rel_tol` relative to its
    /// largest coefficient; otherwise reports which invariant failed.
    pub fn try_from_raw(raw: RawField<T>, rel_tol: T) -> Result<Self> {
        let scale = raw.max_abs().max(T::min_positive_value());
        let cutoff = T::lit(raw.grid().cutoff() as f64).max(T::one());
        if raw.off_band_max() > T::zero() {
            return Err(Error::Format("coefficients outside the retained band".into()));
        }
        if raw.divergence_residual() > rel_tol * scale * cutoff {
            return Err(Error::Format("field is not divergence-free".into()));
        }
        if raw.conjugate_defect() > rel_tol * scale {
            return Err(Error::Format("field is not conjugate-symmetric".into()));
        }
        Ok(SpectralField(raw))
    }

    /// Wraps without checks; callers guarantee the invariants.
    pub(crate) fn from_raw_unchecked(raw: RawField<T>) -> Self {
        SpectralField(raw)
    }

    pub fn raw(&self) -> &RawField<T> {
        &self.0
    }

    pub fn into_raw(self) -> RawField<T> {
        self.0
    }

    pub fn scaled(&self, a: T) -> Self {
        let mut out = self.clone();
        out.0.scale_in_place(a);
        out
    }

    pub fn axpy(&mut self, a: T, other: &SpectralField<T>) {
        self.0.axpy(a, &other.0);
    }

    /// Multiplies each mode by a real function of `|k|^2`; radial multipliers
    /// commute with the Leray projector, so invariants are preserved.
    pub fn apply_radial(&mut self, mult: impl FnMut(i64) -> T) {
        self.0.apply_radial(mult);
    }

    pub fn norm(&self, m: u32) -> T {
        sobolev_norm(self, m)
    }
}

impl<T: Real> Add<&SpectralField<T>> for &SpectralField<T> {
    type Output = SpectralField<T>;

    fn add(self, rhs: &SpectralField<T>) -> SpectralField<T> {
        let mut out = self.clone();
        out.axpy(T::one(), rhs);
        out
    }
}

impl<T: Real> Sub<&SpectralField<T>> for &SpectralField<T> {
    type Output = SpectralField<T>;

    fn sub(self, rhs: &SpectralField<T>) -> SpectralField<T> {
        let mut out = self.clone();
        out.axpy(-T::one(), rhs);
        out
    }
}

impl<T: Real> Mul<T> for &SpectralField<T> {
    type Output = SpectralField<T>;

    fn mul(self, rhs: T) -> SpectralField<T> {
        self.scaled(rhs)
    }
}

impl<T: Real> Neg for &SpectralField<T> {
    type Output = SpectralField<T>;

    fn neg(self) -> SpectralField<T> {
        self.scaled(-T::one())
    }
}

impl<T: Real> AddAssign<&SpectralField<T>> for SpectralField<T> {
    fn add_assign(&mut self, rhs: &SpectralField<T>) {
        self.axpy(T::one(), rhs);
    }
}

impl<T: Real> SubAssign<&SpectralField<T>> for SpectralField<T> {
    fn sub_assign(&mut self, rhs: &SpectralField<T>) {
        self.axpy(-T::one(), rhs);
    }
}

/// Applies `I - k kᵀ / |k|²` on every retained mode and clears everything
/// else, including the mean. Idempotent and self-adjoint in `⟨·,·⟩_0`.
pub fn leray_project<T: Real>(f: &RawField<T>) -> SpectralField<T> {
    let grid = Arc::clone(f.grid());
    let len = grid.len();
    let dim = grid.dim();
    let mut out = RawField::zeros(&grid);
    let mut v = [Complex::<T>::default(); 3];
    for &flat in grid.retained() {
        let k = grid.wavevector(flat);
        let k2 = T::lit(grid.k2(flat) as f64);
        let mut kv = Complex::<T>::default();
        for c in 0..dim {
            v[c] = f.coeffs[c * len + flat];
            kv += v[c].scale(T::lit(k[c] as f64));
        }
        let s = kv.unscale(k2);
        for c in 0..dim {
            out.coeffs[c * len + flat] = v[c] - s.scale(T::lit(k[c] as f64));
        }
    }
    out.symmetrize();
    SpectralField(out)
}

/// `Σ_k |k|^{2m} Re(f̂(k) · conj ĝ(k))`.
pub fn sobolev_inner<T: Real>(f: &RawField<T>, g: &RawField<T>, m: u32) -> Result<T> {
    f.check_grid(g)?;
    Ok(sobolev_inner_unchecked(f, g, m))
}

pub(crate) fn sobolev_inner_unchecked<T: Real>(f: &RawField<T>, g: &RawField<T>, m: u32) -> T {
    let grid = f.grid();
    let len = grid.len();
    let mut total = T::zero();
    for flat in 0..len {
        let k2 = grid.k2(flat);
        if k2 == 0 && m > 0 {
            continue;
        }
        let mut acc = T::zero();
        for c in 0..grid.dim() {
            let a = f.coeffs[c * len + flat];
            let b = g.coeffs[c * len + flat];
            acc += a.re * b.re + a.im * b.im;
        }
        if acc != T::zero() {
            total += acc * T::lit(k2 as f64).powi(m as i32);
        }
    }
    total
}

pub fn sobolev_norm<T: Real>(f: &RawField<T>, m: u32) -> T {
    sobolev_inner_unchecked(f, f, m).max(T::zero()).sqrt()
}

/// Stokes operator `A = -𝒫Δ`: multiplication by `|k|²`.
pub fn stokes_apply<T: Real>(f: &SpectralField<T>) -> SpectralField<T> {
    let mut out = f.clone();
    out.apply_radial(|k2| T::lit(k2 as f64));
    out
}

/// Spectral Laplacian of an arbitrary field (multiplication by `-|k|²`).
pub fn laplacian<T: Real>(f: &RawField<T>) -> RawField<T> {
    let mut out = f.clone();
    out.apply_radial(|k2| -T::lit(k2 as f64));
    out
}
