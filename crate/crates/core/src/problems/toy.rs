//! Small low-dimensional functions used to exercise the checkers.

use std::sync::Arc;

use crate::objective::FnObjective;
use crate::vector::Vector;

use super::Problem;

/// `f(x) = x^4 - x^2`, minimised at `±1/sqrt(2)`; not quasar-convex.
pub fn double_well() -> Problem {
    let obj = FnObjective::new(1, |x| x[0].powi(4) - x[0] * x[0])
        .with_gradient(|x| vec![4.0 * x[0].powi(3) - 2.0 * x[0]]);
    let xs = std::f64::consts::FRAC_1_SQRT_2;
    Problem::new("double_well", Arc::new(obj), -1.5, 1.5)
        .with_optimum(Vector::filled(1, xs), -0.25)
        .with_constants(None, None, None)
}

/// `f(x, y) = x y`, proximal quasar-convex over the nonnegative orthant
/// with respect to the origin.
pub fn bilinear() -> Problem {
    let obj = FnObjective::new(2, |x| x[0] * x[1]).with_gradient(|x| vec![x[1], x[0]]);
    let mut p = Problem::new("bilinear", Arc::new(obj), 0.0, 3.0);
    p.optimum = Some((Vector::zeros(2), 0.0));
    p
}

/// `f(x, y) = x^2 y^2`, proximal quasar-convex over `{x >= 1}` with
/// respect to `(1, 0)`.
pub fn product_square() -> Problem {
    let obj = FnObjective::new(2, |x| x[0] * x[0] * x[1] * x[1])
        .with_gradient(|x| vec![2.0 * x[0] * x[1] * x[1], 2.0 * x[0] * x[0] * x[1]]);
    let mut p = Problem::new("product_square", Arc::new(obj), 1.0, 3.0);
    p.test_box = (vec![1.0, -2.0], vec![3.0, 2.0]);
    p.optimum = Some((Vector::new(vec![1.0, 0.0]).expect("finite"), 0.0));
    p
}
