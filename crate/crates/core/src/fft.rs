//! Multi-dimensional complex FFTs on cubic periodic grids.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::real::Real;

/// Forward/inverse transform pair for a `size^dim` array in row-major order.
///
/// Both directions are unnormalized: the inverse evaluates `Σ_k c_k e^{ik·x}`
/// at the grid points, the forward returns `size^dim` times the Fourier
/// coefficients.
pub struct FftNd<T: Real> {
    size: usize,
    dim: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    line: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> Clone for FftNd<T> {
    fn clone(&self) -> Self {
        FftNd {
            size: self.size,
            dim: self.dim,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
            line: vec![Complex::default(); self.size],
            scratch: vec![Complex::default(); self.scratch.len()],
        }
    }
}

impl<T: Real> FftNd<T> {
    pub fn new(dim: usize, size: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        FftNd {
            size,
            dim,
            forward,
            inverse,
            line: vec![Complex::default(); size],
            scratch: vec![Complex::default(); scratch_len],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn forward(&mut self, data: &mut [Complex<T>]) {
        self.run(data, false);
    }

    pub fn inverse(&mut self, data: &mut [Complex<T>]) {
        self.run(data, true);
    }

    fn run(&mut self, data: &mut [Complex<T>], inverse: bool) {
        assert_eq!(data.len(), self.len(), "fft buffer length");
        let plan = if inverse { &self.inverse } else { &self.forward };
        let n = self.size;
        // Last axis is contiguous: transform all lines in one call.
        plan.process_with_scratch(data, &mut self.scratch);
        for axis in (0..self.dim - 1).rev() {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (i, slot) in self.line.iter_mut().enumerate() {
                        *slot = data[base + i * stride];
                    }
                    plan.process_with_scratch(&mut self.line, &mut self.scratch);
                    for (i, v) in self.line.iter().enumerate() {
                        data[base + i * stride] = *v;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(dim: usize, n: usize, data: &[Complex<f64>], sign: f64) -> Vec<Complex<f64>> {
        let len = n.pow(dim as u32);
        let idx = |mut flat: usize| {
            let mut out = vec![0usize; dim];
            for a in (0..dim).rev() {
                out[a] = flat % n;
                flat /= n;
            }
            out
        };
        (0..len)
            .map(|p| {
                let kp = idx(p);
                let mut acc = Complex::new(0.0, 0.0);
                for (q, v) in data.iter().enumerate() {
                    let xq = idx(q);
                    let phase: usize = kp.iter().zip(&xq).map(|(a, b)| a * b).sum();
                    let ang = sign * 2.0 * std::f64::consts::PI * (phase % n) as f64 / n as f64;
                    acc += v * Complex::new(ang.cos(), ang.sin());
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_naive_transform() {
        for dim in [2, 3] {
            let n: usize = 6;
            let len = n.pow(dim as u32);
            let data: Vec<Complex<f64>> = (0..len)
                .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let mut fft = FftNd::<f64>::new(dim, n);
            let mut fwd = data.clone();
            fft.forward(&mut fwd);
            let expect = naive_dft(dim, n, &data, -1.0);
            for (a, b) in fwd.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-10);
            }
            let mut back = fwd.clone();
            fft.inverse(&mut back);
            for (a, b) in back.iter().zip(&data) {
                assert!((a / len as f64 - b).norm() < 1e-12);
            }
        }
    }
}
