use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::objective::FnObjective;
use crate::vector::Vector;

use super::Problem;

/// `f(x) = (beta / 2) |x - center|^2`: strongly convex, hence
/// `beta`-strongly 1-quasar-convex with `L1 = beta`.
pub fn quadratic_problem(center: Vector, beta: f64) -> Result<Problem> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    let n = center.dim();
    let c1 = center.clone().into_inner();
    let c2 = c1.clone();
    let obj = FnObjective::new(n, move |x| {
        0.5 * beta * x.iter().zip(&c1).map(|(a, c)| (a - c) * (a - c)).sum::<f64>()
    })
    .with_gradient(move |x| x.iter().zip(&c2).map(|(a, c)| beta * (a - c)).collect());
    Ok(Problem::new("quadratic", Arc::new(obj), -2.0, 2.0)
        .with_optimum(center, 0.0)
        .with_constants(Some(beta), Some(1.0), Some(beta)))
}
