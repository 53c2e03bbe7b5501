//! Seeded sampling plans.
//!
//! All randomness flows from a [`SamplingPlan`] seed through a SplitMix64
//! stream, drawn sequentially before any parallel evaluation, so a plan
//! always produces the same samples in the same order.

use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spaces::{Point, PointSpace};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_SLACK_TOL: f64 = 1e-9;
pub const DEFAULT_GRID_LEN: usize = 33;
pub const DEFAULT_GRID_RANGE: (f64, f64) = (1e-6, 1e6);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingPlan {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_grid")]
    pub lambda_grid: Vec<f64>,
    /// Relative slack for inequality checks; sides equal to infinity are
    /// compared exactly.
    #[serde(default = "default_slack")]
    pub slack_tol: f64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_slack() -> f64 {
    DEFAULT_SLACK_TOL
}

fn default_grid() -> Vec<f64> {
    log_grid(DEFAULT_GRID_RANGE.0, DEFAULT_GRID_RANGE.1, DEFAULT_GRID_LEN)
}

/// `len` log-spaced points on `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, len: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && len >= 2, "log_grid needs 0 < lo < hi and len >= 2");
    let (a, b) = (lo.log10(), hi.log10());
    let mut grid: Vec<f64> = (0..len)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (len - 1) as f64))
        .collect();
    grid[0] = lo;
    grid[len - 1] = hi;
    grid
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            n_samples: DEFAULT_SAMPLES,
            lambda_grid: default_grid(),
            slack_tol: DEFAULT_SLACK_TOL,
        }
    }
}

impl SamplingPlan {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    pub fn grid(mut self, grid: Vec<f64>) -> Self {
        self.lambda_grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid.is_empty() {
            return Err(invalid("lambda_grid", "must not be empty"));
        }
        if self.lambda_grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(invalid("lambda_grid", "entries must be finite and > 0"));
        }
        if self.lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("lambda_grid", "must be strictly ascending"));
        }
        if !(self.slack_tol.is_finite() && self.slack_tol >= 0.0) {
            return Err(invalid("slack_tol", "must be a finite nonnegative real"));
        }
        Ok(())
    }

    pub fn stream(&self) -> SampleStream {
        SampleStream::new(self.seed)
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_grid[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.lambda_grid.last().expect("validated grid is nonempty")
    }
}

/// Deterministic draw sequence for one sweep.
pub struct SampleStream {
    rng: SplitMix64,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn point(&mut self, space: &PointSpace) -> Point {
        space.sample(&mut self.rng)
    }

    /// A pair `(x, y)`; one draw in eight repeats `x` so identity cases are
    /// always exercised.
    pub fn pair(&mut self, space: &PointSpace) -> (Point, Point) {
        let x = self.point(space);
        let y = if self.chance(0.125) { x.clone() } else { self.point(space) };
        (x, y)
    }

    /// A triple `(x, y, z)` where `z` is fresh half the time and otherwise
    /// coincides with `x` or `y`.
    pub fn triple(&mut self, space: &PointSpace) -> (Point, Point, Point) {
        let (x, y) = self.pair(space);
        let u = self.unit();
        let z = if u < 0.5 {
            self.point(space)
        } else if u < 0.75 {
            x.clone()
        } else {
            y.clone()
        };
        (x, y, z)
    }

    pub fn grid_lambda(&mut self, grid: &[f64]) -> f64 {
        grid[self.index(grid.len())]
    }

    /// A pair `(λ, μ)` from the grid, with `μ = λ` half the time.
    pub fn lambda_pair(&mut self, grid: &[f64]) -> (f64, f64) {
        let lambda = self.grid_lambda(grid);
        let mu = if self.chance(0.5) { lambda } else { self.grid_lambda(grid) };
        (lambda, mu)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::build_euclidean;

    #[test]
    fn default_grid_shape() {
        let plan = SamplingPlan::default();
        assert_eq!(plan.lambda_grid.len(), 33);
        assert_eq!(plan.lambda_min(), 1e-6);
        assert_eq!(plan.lambda_max(), 1e6);
        assert!(plan.validate().is_ok());
        // quarter-decade spacing
        let ratio = plan.lambda_grid[1] / plan.lambda_grid[0];
        assert!((ratio - 10f64.powf(0.375)).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let bad = |grid: Vec<f64>| SamplingPlan::default().grid(grid).validate().is_err();
        assert!(bad(vec![]));
        assert!(bad(vec![0.0, 1.0]));
        assert!(bad(vec![2.0, 1.0]));
        assert!(bad(vec![1.0, 1.0]));
        assert!(bad(vec![1.0, f64::INFINITY]));
        let mut p = SamplingPlan::default();
        p.slack_tol = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn same_seed_same_stream() {
        let space = build_euclidean(2).unwrap();
        let draw = |seed| {
            let mut s = SampleStream::new(seed);
            (0..50).map(|_| s.triple(&space)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn plan_json_defaults() {
        let plan: SamplingPlan = serde_json::from_str(r#"{"seed": 7}"#).unwrap();
        assert_eq!(plan.seed, 7);
        assert_eq!(plan.n_samples, 1000);
        assert_eq!(plan.lambda_grid, SamplingPlan::default().lambda_grid);
        assert!(serde_json::from_str::<SamplingPlan>(r#"{"sed": 7}"#).is_err());
    }
}
