//! Radial-angular strongly quasar-convex function.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::geometry::FeasibleSet;
use crate::objective::Objective;
use crate::rng::RandomStream;
use crate::vector::Vector;

use super::Problem;

/// `h(x) = |x|^2 g(x / |x|)` with `g(v) = sum(a_i sin^2(b_i v_i) + 1)`.
/// At the origin `h(0) = 0`, the limit of `h(x) <= (1 + max a_i) d |x|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialAngular {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl RadialAngular {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(invalid("coefficients", "a and b must be nonempty and equally long"));
        }
        Ok(Self { a, b })
    }

    /// `a_i ~ U[0, 1]` then `b_i ~ U[-2.5, 2.5]`.
    pub fn sample(d: usize, stream: &mut RandomStream) -> Result<Self> {
        let a = (0..d).map(|_| stream.uniform()).collect();
        let b = (0..d).map(|_| stream.uniform_in(-2.5, 2.5)).collect();
        Self::new(a, b)
    }

    fn angular(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(self.a.iter().zip(&self.b))
            .map(|(vi, (ai, bi))| ai * (bi * vi).sin().powi(2) + 1.0)
            .sum()
    }
}

impl Objective for RadialAngular {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 == 0.0 {
            return 0.0;
        }
        let r = r2.sqrt();
        let v: Vec<f64> = x.iter().map(|xi| xi / r).collect();
        r2 * self.angular(&v)
    }

    /// `2 x g(v) + r (I - v v^T) grad g(v)` with `v = x / r`.
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 == 0.0 {
            return Some(vec![0.0; x.len()]);
        }
        let r = r2.sqrt();
        let v: Vec<f64> = x.iter().map(|xi| xi / r).collect();
        let g = self.angular(&v);
        let dg: Vec<f64> = v
            .iter()
            .zip(self.a.iter().zip(&self.b))
            .map(|(vi, (ai, bi))| ai * bi * (2.0 * bi * vi).sin())
            .collect();
        let radial: f64 = v.iter().zip(&dg).map(|(a, b)| a * b).sum();
        Some(
            x.iter()
                .zip(v.iter().zip(&dg))
                .map(|(xi, (vi, di))| 2.0 * xi * g + r * (di - vi * radial))
                .collect(),
        )
    }

    fn has_gradient(&self) -> bool {
        true
    }
}

/// Random instance in dimension `d` paired with the l1-ball of radius
/// `rho` around the origin. Declares `gamma = 1`, `beta = 2`, and the
/// minimiser at the origin.
pub fn radial_angular_problem(
    d: usize,
    rho: f64,
    stream: &mut RandomStream,
) -> Result<(Problem, FeasibleSet)> {
    if d == 0 {
        return Err(invalid("d", "must be at least 1"));
    }
    let f = RadialAngular::sample(d, stream)?;
    let set = FeasibleSet::l1_ball(Vector::zeros(d), rho)?;
    let p = Problem::new("radial", Arc::new(f), -1.0, 1.0)
        .with_optimum(Vector::zeros(d), 0.0)
        .with_constants(None, Some(1.0), Some(2.0));
    Ok((p, set))
}
