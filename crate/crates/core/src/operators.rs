//! Transport, stretching and noise operators evaluated pseudo-spectrally.
//!
//! Every quadratic product is formed on a `3n/2` zero-padded grid, so for
//! inputs supported on the retained band (`|k_j| < n/3`) the retained part of
//! the product is exact up to rounding.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::field::{laplacian, leray_project, stokes_apply, RawField, SpectralField};
use crate::grid::TorusGrid;
use crate::noise::XiEnsemble;
use crate::real::Real;

/// Physical-space samples of a vector field and, optionally, its gradient on
/// the padded grid. `grads[j * dim + c]` holds `∂_j v^c`.
#[derive(Clone, Debug)]
pub struct PhysicalVector<T: Real> {
    pub values: Vec<Vec<T>>,
    pub grads: Vec<Vec<T>>,
}

/// Per-worker FFT plans and buffers for products on one grid.
#[derive(Clone)]
pub struct OperatorWorkspace<T: Real> {
    grid: Arc<TorusGrid>,
    padded: usize,
    fft: FftNd<T>,
    to_padded: Vec<usize>,
    // flat index of -k and padded index of -k, per retained position
    mirror: Vec<usize>,
    mirror_padded: Vec<usize>,
    buf: Vec<Complex<T>>,
}

impl<T: Real> OperatorWorkspace<T> {
    pub fn new(grid: &Arc<TorusGrid>) -> Self {
        let padded = grid.padded_resolution();
        let dim = grid.dim();
        let to_padded = grid
            .retained()
            .iter()
            .map(|&flat| padded_index(&grid.wavevector(flat), dim, padded))
            .collect();
        let mirror: Vec<usize> = grid.retained().iter().map(|&flat| grid.mirror(flat)).collect();
        let mirror_padded = mirror
            .iter()
            .map(|&m| padded_index(&grid.wavevector(m), dim, padded))
            .collect();
        OperatorWorkspace {
            grid: Arc::clone(grid),
            padded,
            fft: FftNd::new(dim, padded),
            to_padded,
            mirror,
            mirror_padded,
            buf: vec![Complex::default(); padded.pow(dim as u32)],
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn padded_resolution(&self) -> usize {
        self.padded
    }

    fn check(&self, f: &RawField<T>) -> Result<()> {
        if self.grid.same_shape(f.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: format!("{:?}", self.grid),
                right: format!("{:?}", f.grid()),
            })
        }
    }

    /// Coefficient of component `c` (or of `∂_axis` of it) at `flat`.
    fn coef(&self, f: &RawField<T>, c: usize, axis: Option<usize>, flat: usize) -> Complex<T> {
        let z = f.component(c)[flat];
        match axis {
            Some(j) => {
                let kj = T::lit(self.grid.wavevector(flat)[j] as f64);
                Complex::new(-z.im * kj, z.re * kj)
            }
            None => z,
        }
    }

    /// Samples up to two real quantities with one complex inverse transform:
    /// the Hermitian parts of both spectra go in as `A + iB`, so the result
    /// carries `a` in the real and `b` in the imaginary part.
    fn sample_pair(&mut self, f: &RawField<T>, a: (usize, Option<usize>), b: Option<(usize, Option<usize>)>) -> [Vec<T>; 2] {
        self.buf.fill(Complex::default());
        let half = T::lit(0.5);
        let i = Complex::new(T::zero(), T::one());
        for (pos, &flat) in self.grid.retained().iter().enumerate() {
            let m = self.mirror[pos];
            let mut z = (self.coef(f, a.0, a.1, flat) + self.coef(f, a.0, a.1, m).conj()).scale(half);
            if let Some(b) = b {
                z += i * (self.coef(f, b.0, b.1, flat) + self.coef(f, b.0, b.1, m).conj()).scale(half);
            }
            self.buf[self.to_padded[pos]] = z;
        }
        self.fft.inverse(&mut self.buf);
        let re = self.buf.iter().map(|z| z.re).collect();
        let im = if b.is_some() { self.buf.iter().map(|z| z.im).collect() } else { Vec::new() };
        [re, im]
    }

    /// Physical samples of `f`, with gradients when `with_grad` is set.
    pub fn physical(&mut self, f: &RawField<T>, with_grad: bool) -> PhysicalVector<T> {
        let dim = self.grid.dim();
        let mut wanted: Vec<(usize, Option<usize>)> = (0..dim).map(|c| (c, None)).collect();
        if with_grad {
            for j in 0..dim {
                for c in 0..dim {
                    wanted.push((c, Some(j)));
                }
            }
        }
        let mut out = Vec::with_capacity(wanted.len());
        for chunk in wanted.chunks(2) {
            let [a, b] = self.sample_pair(f, chunk[0], chunk.get(1).copied());
            out.push(a);
            if chunk.len() == 2 {
                out.push(b);
            }
        }
        let grads = out.split_off(dim);
        PhysicalVector { values: out, grads }
    }

    /// Forward transform of padded physical components back onto the retained
    /// band of the working grid (dealiased, conjugate-symmetrized). Components
    /// are transformed two at a time as `x + iy`.
    fn transform_back(&mut self, comps: &[Vec<T>]) -> RawField<T> {
        let mut out = RawField::zeros(&self.grid);
        let len = self.grid.len();
        let half_norm = T::lit(0.5 / self.buf.len() as f64);
        let grid = Arc::clone(&self.grid);
        for (p, pair) in comps.chunks(2).enumerate() {
            match pair {
                [x, y] => {
                    for ((slot, &a), &b) in self.buf.iter_mut().zip(x).zip(y) {
                        *slot = Complex::new(a, b);
                    }
                }
                [x] => {
                    for (slot, &a) in self.buf.iter_mut().zip(x) {
                        *slot = Complex::new(a, T::zero());
                    }
                }
                _ => unreachable!(),
            }
            self.fft.forward(&mut self.buf);
            let coeffs = out.coeffs_mut();
            for (pos, &flat) in grid.retained().iter().enumerate() {
                let z = self.buf[self.to_padded[pos]];
                let zm = self.buf[self.mirror_padded[pos]].conj();
                // X_k = (Z_k + conj Z_{-k}) / 2,  Y_k = (Z_k - conj Z_{-k}) / 2i
                coeffs[2 * p * len + flat] = (z + zm).scale(half_norm);
                if pair.len() == 2 {
                    let d = (z - zm).scale(half_norm);
                    coeffs[(2 * p + 1) * len + flat] = Complex::new(d.im, -d.re);
                }
            }
        }
        out.symmetrize();
        out
    }

    /// `L_φψ = Σ_j φ^j ∂_j ψ`, unprojected.
    pub fn advect(&mut self, phi: &RawField<T>, psi: &RawField<T>) -> Result<RawField<T>> {
        self.check(phi)?;
        self.check(psi)?;
        let a = self.physical(phi, false);
        let b = self.physical(psi, true);
        Ok(self.combine(&a, &b, true, false))
    }

    /// `𝒯_φψ = Σ_j ψ^j ∇φ^j`, unprojected.
    pub fn stretch(&mut self, phi: &RawField<T>, psi: &RawField<T>) -> Result<RawField<T>> {
        self.check(phi)?;
        self.check(psi)?;
        let a = self.physical(phi, true);
        let b = self.physical(psi, false);
        Ok(self.combine(&a, &b, false, true))
    }

    /// `B_ξ u = L_ξ u + 𝒯_ξ u` for a prepared ξ (values and gradients).
    pub fn transport(&mut self, xi: &PhysicalVector<T>, u: &RawField<T>) -> RawField<T> {
        let b = self.physical(u, true);
        self.combine(xi, &b, true, true)
    }

    /// Pointwise products: advection uses `a` values and `b` gradients,
    /// stretching uses `b` values and `a` gradients.
    fn combine(
        &mut self,
        a: &PhysicalVector<T>,
        b: &PhysicalVector<T>,
        advect: bool,
        stretch: bool,
    ) -> RawField<T> {
        let dim = self.grid.dim();
        let npts = self.buf.len();
        let mut out = vec![vec![T::zero(); npts]; dim];
        for (c, slot) in out.iter_mut().enumerate() {
            for j in 0..dim {
                if advect {
                    let (x, g) = (&a.values[j], &b.grads[j * dim + c]);
                    for p in 0..npts {
                        slot[p] += x[p] * g[p];
                    }
                }
                if stretch {
                    let (x, g) = (&b.values[j], &a.grads[c * dim + j]);
                    for p in 0..npts {
                        slot[p] += x[p] * g[p];
                    }
                }
            }
        }
        self.transform_back(&out)
    }

    /// `Σ_i w_i B_i u` through the single field `Σ_i w_i ξ_i` (B is linear in ξ).
    pub fn weighted_noise_op(&mut self, weights: &[T], u: &RawField<T>, xis: &XiEnsemble<T>) -> Result<RawField<T>> {
        self.check(u)?;
        if weights.len() != xis.len() {
            return Err(Error::param(
                "dw",
                format!("{} increments for {} noise fields", weights.len(), xis.len()),
            ));
        }
        let npts = self.buf.len();
        let dim = self.grid.dim();
        let mut xi = PhysicalVector {
            values: vec![vec![T::zero(); npts]; dim],
            grads: vec![vec![T::zero(); npts]; dim * dim],
        };
        for (i, &w) in weights.iter().enumerate() {
            let p = xis.prepared(i)?;
            for (dst, src) in xi.values.iter_mut().chain(xi.grads.iter_mut()).zip(p.values.iter().chain(&p.grads)) {
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
        Ok(self.transport(&xi, u))
    }

    /// `B_i u` for ensemble member `i`.
    pub fn noise_op(&mut self, i: usize, u: &RawField<T>, xis: &XiEnsemble<T>) -> Result<RawField<T>> {
        self.check(u)?;
        let xi = xis.prepared(i)?;
        Ok(self.transport(xi, u))
    }

    /// `𝒫 L_u u`.
    pub fn nonlinear_term(&mut self, u: &SpectralField<T>) -> SpectralField<T> {
        let a = self.physical(u, true);
        let adv = self.combine(&a, &a, true, false);
        leray_project(&adv)
    }

    /// `½ Σ_i 𝒫 B_i(B_i u)` with the inner application left unprojected.
    pub fn ito_correction(&mut self, u: &RawField<T>, xis: &XiEnsemble<T>) -> SpectralField<T> {
        let mut acc = RawField::zeros(&self.grid);
        let up = self.physical(u, true);
        for i in 0..xis.len() {
            let xi = xis.prepared(i).expect("index in range");
            let once = self.combine(xi, &up, true, true);
            let twice = self.transport(xi, &once);
            acc.axpy(T::one(), &twice);
        }
        let mut out = leray_project(&acc);
        out = out.scaled(T::lit(0.5));
        out
    }

    /// Itô drift `-𝒫L_u u - νAu + ½ Σ 𝒫B_i² u`.
    pub fn drift(&mut self, u: &SpectralField<T>, xis: &XiEnsemble<T>, nu: T) -> SpectralField<T> {
        let mut out = self.ito_correction(u, xis);
        out -= &self.nonlinear_term(u);
        out.axpy(-nu, &stokes_apply(u));
        out
    }

    /// Commutator `[Δ, B_i] f = Δ(B_i f) - B_i(Δ f)`.
    pub fn commutator_laplacian(
        &mut self,
        i: usize,
        f: &RawField<T>,
        xis: &XiEnsemble<T>,
    ) -> Result<RawField<T>> {
        let xi = xis.prepared(i)?;
        let mut out = laplacian(&self.transport(xi, f));
        let inner = self.transport(xi, &laplacian(f));
        out.axpy(-T::one(), &inner);
        Ok(out)
    }
}

fn padded_index(k: &[i32; 3], dim: usize, padded: usize) -> usize {
    let p = padded as i32;
    let mut flat = 0usize;
    for &kj in k.iter().take(dim) {
        let i = if kj >= 0 { kj } else { kj + p };
        flat = flat * padded + i as usize;
    }
    flat
}

/// Samples `∂^α f` on a uniform `size^dim` grid, where `derivative` lists the
/// differentiated axes (e.g. `[0, 0, 1]` is `∂_x ∂_x ∂_y`). Returns one array
/// per component in row-major order.
pub fn evaluate_on_grid<T: Real>(f: &RawField<T>, size: usize, derivative: &[usize]) -> Vec<Vec<T>> {
    let grid = f.grid();
    let dim = grid.dim();
    assert!(
        size as i32 > 2 * grid.cutoff(),
        "sampling grid must resolve the retained band"
    );
    let mut fft = FftNd::<T>::new(dim, size);
    let mut buf = vec![Complex::<T>::default(); fft.len()];
    (0..dim)
        .map(|c| {
            buf.fill(Complex::default());
            let comp = f.component(c);
            for &flat in grid.retained() {
                let k = grid.wavevector(flat);
                let mut z = comp[flat];
                for &axis in derivative {
                    let kj = T::lit(k[axis] as f64);
                    z = Complex::new(-z.im * kj, z.re * kj);
                }
                buf[padded_index(&k, dim, size)] = z;
            }
            fft.inverse(&mut buf);
            buf.iter().map(|z| z.re).collect()
        })
        .collect()
}
