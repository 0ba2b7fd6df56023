use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::random::{derive_seed, stream_rng};

/// Finest dyadic subdivision generated per coarse step by default.
pub const DEFAULT_DEPTH: u32 = 4;

/// Increments of `count` independent real Brownian motions on a uniform grid.
///
/// Stream-splitting rule: every pair `(i, coarse step s)` owns its own
/// generator, seeded from `(seed, i, s)`, which draws `2^depth` i.i.d.
/// `N(0, dt_coarse / 2^depth)` leaf increments. The path at refinement level
/// `ℓ` (time step `dt_coarse / 2^ℓ`) aggregates leaves by repeated pairwise
/// summation, so each level-`ℓ` increment is *exactly* the floating point sum
/// of its two level-`ℓ+1` children.
#[derive(Clone, Debug)]
pub struct BrownianPath {
    seed: u64,
    count: usize,
    coarse_steps: usize,
    coarse_dt: f64,
    level: u32,
    depth: u32,
    increments: Vec<f64>,
}

impl BrownianPath {
    /// Level-0 path with `steps` increments of variance `dt`.
    pub fn sample(steps: usize, count: usize, dt: f64, seed: u64) -> Result<Self> {
        Self::with_depth(steps, count, dt, seed, DEFAULT_DEPTH)
    }

    pub fn with_depth(steps: usize, count: usize, dt: f64, seed: u64, depth: u32) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        if depth > 20 {
            return Err(Error::param("depth", "at most 20 dyadic levels"));
        }
        Ok(Self::build(seed, count, steps, dt, 0, depth))
    }

    fn build(seed: u64, count: usize, coarse_steps: usize, coarse_dt: f64, level: u32, depth: u32) -> Self {
        let leaves = 1usize << depth;
        let per_coarse = 1usize << level;
        let sd = (coarse_dt / leaves as f64).sqrt();
        let steps = coarse_steps * per_coarse;
        let mut increments = vec![0.0; steps * count];
        let mut buf = vec![0.0f64; leaves];
        for i in 0..count {
            for s in 0..coarse_steps {
                let mut rng = stream_rng(derive_seed(seed, &[i as u64, s as u64]), 0);
                for slot in buf.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *slot = z * sd;
                }
                let mut width = leaves;
                while width > per_coarse {
                    width /= 2;
                    for j in 0..width {
                        buf[j] = buf[2 * j] + buf[2 * j + 1];
                    }
                }
                for j in 0..per_coarse {
                    increments[(s * per_coarse + j) * count + i] = buf[j];
                }
            }
        }
        BrownianPath {
            seed,
            count,
            coarse_steps,
            coarse_dt,
            level,
            depth,
            increments,
        }
    }

    /// Same path with the time step halved `levels` times.
    pub fn refined(&self, levels: u32) -> Result<Self> {
        let level = self.level + levels;
        if level > self.depth {
            return Err(Error::param(
                "levels",
                format!("refinement level {level} exceeds generated depth {}", self.depth),
            ));
        }
        Ok(Self::build(self.seed, self.count, self.coarse_steps, self.coarse_dt, level, self.depth))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn steps(&self) -> usize {
        self.coarse_steps << self.level
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dt(&self) -> f64 {
        self.coarse_dt / (1u64 << self.level) as f64
    }

    /// Increments `ΔW_i` for every `i` over step `step`.
    pub fn step(&self, step: usize) -> &[f64] {
        &self.increments[step * self.count..(step + 1) * self.count]
    }

    /// Series of stream `i`.
    pub fn stream(&self, i: usize) -> Vec<f64> {
        (0..self.steps()).map(|s| self.increments[s * self.count + i]).collect()
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }
}

pub fn sample_increments(steps: usize, count: usize, dt: f64, seed: u64) -> Result<BrownianPath> {
    BrownianPath::sample(steps, count, dt, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_a_seed() {
        let a = sample_increments(16, 3, 1e-2, 42).unwrap();
        let b = sample_increments(16, 3, 1e-2, 42).unwrap();
        assert_eq!(a.increments(), b.increments());
        let c = sample_increments(16, 3, 1e-2, 43).unwrap();
        assert_ne!(a.increments(), c.increments());
    }

    #[test]
    fn refinement_sums_exactly() {
        let coarse = sample_increments(8, 2, 1e-3, 7).unwrap();
        let fine = coarse.refined(1).unwrap();
        assert_eq!(fine.steps(), 16);
        assert_eq!(fine.dt(), 5e-4);
        for s in 0..8 {
            for i in 0..2 {
                assert_eq!(coarse.step(s)[i], fine.step(2 * s)[i] + fine.step(2 * s + 1)[i]);
            }
        }
        let finer = fine.refined(1).unwrap();
        for s in 0..16 {
            assert_eq!(fine.step(s)[1], finer.step(2 * s)[1] + finer.step(2 * s + 1)[1]);
        }
        assert!(coarse.refined(DEFAULT_DEPTH + 1).is_err());
    }

    #[test]
    fn rejects_non_positive_dt() {
        assert!(sample_increments(4, 1, 0.0, 1).is_err());
        assert!(sample_increments(4, 1, -1.0, 1).is_err());
    }
}
