//! Support vector machine with the smoothed hinge loss.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::objective::Objective;
use crate::rng::RandomStream;
use crate::vector::{dot, Vector};

use super::{require_nonempty, LabeledDataset, Problem};

/// `0` for `z <= 0`, `z^2 / 2` on `[0, 1]`, `(z^alpha - 1) / alpha + 1/2`
/// for `z >= 1`.
pub fn smoothed_hinge(z: f64, alpha: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z <= 1.0 {
        0.5 * z * z
    } else {
        (z.powf(alpha) - 1.0) / alpha + 0.5
    }
}

pub fn smoothed_hinge_derivative(z: f64, alpha: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z <= 1.0 {
        z
    } else {
        z.powf(alpha - 1.0)
    }
}

struct HingeLoss {
    /// Rows pre-multiplied by their labels.
    rows: Vec<f64>,
    n: usize,
    alpha: f64,
}

impl Objective for HingeLoss {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.rows
            .chunks_exact(self.n)
            .map(|r| smoothed_hinge(1.0 - dot(r, x), self.alpha))
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; self.n];
        for r in self.rows.chunks_exact(self.n) {
            let c = smoothed_hinge_derivative(1.0 - dot(r, x), self.alpha);
            if c != 0.0 {
                g.iter_mut().zip(r).for_each(|(gj, rj)| *gj -= c * rj);
            }
        }
        Some(g)
    }

    fn has_gradient(&self) -> bool {
        true
    }
}

/// `f(x) = sum phi_alpha(1 - b_i a_i^T x)`, alpha-quasar-convex.
pub fn smoothed_hinge_svm(data: &LabeledDataset, alpha: f64) -> Result<Problem> {
    require_nonempty(data)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid("alpha", format!("must lie in (0, 1], got {alpha}")));
    }
    if let Some((i, b)) = data
        .labels()
        .iter()
        .enumerate()
        .find(|(_, b)| **b != 1.0 && **b != -1.0)
    {
        return Err(invalid("labels", format!("label {b} at row {i} is not +1 or -1")));
    }
    let n = data.dim();
    let rows = data
        .features()
        .iter()
        .zip(data.labels())
        .flat_map(|(a, b)| a.iter().map(move |v| b * v))
        .collect();
    Ok(Problem::new("svm", Arc::new(HingeLoss { rows, n, alpha }), -1.0, 1.0)
        .with_constants(None, Some(alpha), None))
}

/// Synthetic stand-in for the breast-cancer data: two Gaussian classes in
/// `n` dimensions with means `±shift` along a random unit direction, every
/// feature scaled by `scale`, and labels flipped with probability `flip`.
pub fn synthetic_svm_dataset(
    m: usize,
    n: usize,
    scale: f64,
    shift: f64,
    flip: f64,
    stream: &mut RandomStream,
) -> Result<LabeledDataset> {
    let dir = stream.standard_normal(n);
    let norm = dir.norm().max(f64::MIN_POSITIVE);
    let mut features = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let b = if stream.uniform() < 0.5 { 1.0 } else { -1.0 };
        let z = stream.standard_normal(n);
        let row: Vec<f64> = z
            .iter()
            .zip(dir.iter())
            .map(|(zi, di)| scale * (zi + b * shift * di / norm))
            .collect();
        features.push(Vector::new(row)?);
        let observed = if stream.uniform() < flip { -b } else { b };
        labels.push(observed);
    }
    LabeledDataset::new(features, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::testing::worst_gradient_error;

    #[test]
    fn branch_values() {
        for a in [0.25, 0.5, 1.0] {
            assert_eq!(smoothed_hinge(0.0, a), 0.0);
            assert_eq!(smoothed_hinge(1.0, a), 0.5);
        }
        assert!((smoothed_hinge(4.0, 0.5) - 2.5).abs() < 1e-15);
        assert_eq!(smoothed_hinge(3.0, 1.0), 2.5);
    }

    #[test]
    fn continuously_differentiable() {
        let e = 1e-13;
        for a in [0.25, 0.5, 1.0] {
            for z in [0.0, 1.0] {
                let left = smoothed_hinge_derivative(z - e, a);
                let right = smoothed_hinge_derivative(z + e, a);
                assert!((left - right).abs() <= 1e-12, "alpha {a}, z {z}");
                let slope = (smoothed_hinge(z + 1e-7, a) - smoothed_hinge(z - 1e-7, a)) / 2e-7;
                assert!((slope - smoothed_hinge_derivative(z, a)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn gradient_and_label_validation() {
        let mut s = RandomStream::new(7);
        let data = synthetic_svm_dataset(100, 5, 1.0, 1.0, 0.1, &mut s).unwrap();
        let p = smoothed_hinge_svm(&data, 0.5).unwrap();
        assert!(worst_gradient_error(&p, &[-2.0; 5], &[2.0; 5], 100, 8) < 1e-4);
        let bad = LabeledDataset::new(vec![Vector::zeros(2)], vec![0.0]).unwrap();
        assert!(smoothed_hinge_svm(&bad, 0.5).is_err());
        assert!(smoothed_hinge_svm(&data, 0.0).is_err());
    }
}
