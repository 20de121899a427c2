//! Entropy-regularised single-state bandit with a softmax policy.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::objective::FnObjective;
use crate::rng::RandomStream;
use crate::vector::Vector;

use super::Problem;

fn log_softmax(theta: &[f64]) -> Vec<f64> {
    let max = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + theta.iter().map(|t| (t - max).exp()).sum::<f64>().ln();
    theta.iter().map(|t| t - lse).collect()
}

/// `J(theta) = pi^T (r - tau log pi)` with `pi = softmax(theta)`.
pub fn regularized_value(theta: &[f64], r: &[f64], tau: f64) -> f64 {
    log_softmax(theta)
        .iter()
        .zip(r)
        .map(|(lp, ri)| lp.exp() * (ri - tau * lp))
        .sum()
}

/// `tau log sum exp(r / tau)`, the maximum of `J`.
pub fn optimal_value(r: &[f64], tau: f64) -> f64 {
    let scaled: Vec<f64> = r.iter().map(|v| v / tau).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    tau * (max + scaled.iter().map(|s| (s - max).exp()).sum::<f64>().ln())
}

/// Soft sub-optimality `J* - J(theta)`.
pub fn soft_suboptimality(theta: &[f64], r: &[f64], tau: f64) -> f64 {
    optimal_value(r, tau) - regularized_value(theta, r, tau)
}

/// Minimises `-J(theta)`. Gradient `dJ/dtheta_b = pi_b (v_b - J)` with
/// `v = r - tau log pi`. The metric `delta` reports the soft sub-optimality.
pub fn bandit_problem(rewards: Vector, tau: f64) -> Result<Problem> {
    let k = rewards.dim();
    if k < 2 {
        return Err(invalid("rewards", "need at least two actions"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau", format!("must be positive, got {tau}")));
    }
    let r = rewards.into_inner();
    let (rv, rg, rm) = (r.clone(), r.clone(), r.clone());
    let obj = FnObjective::new(k, move |th| -regularized_value(th, &rv, tau)).with_gradient(
        move |th| {
            let lp = log_softmax(th);
            let v: Vec<f64> = lp.iter().zip(&rg).map(|(l, ri)| ri - tau * l).collect();
            let j: f64 = lp.iter().zip(&v).map(|(l, vi)| l.exp() * vi).sum();
            lp.iter().zip(&v).map(|(l, vi)| -l.exp() * (vi - j)).collect()
        },
    );
    let opt = Vector::new(r.iter().map(|v| v / tau).collect())?;
    Ok(Problem::new("bandit", Arc::new(obj), -3.0, 3.0)
        .with_optimum(opt, -optimal_value(&r, tau))
        .with_metric("delta", move |th| soft_suboptimality(th, &rm, tau)))
}

/// Rewards drawn uniformly from `[0, 1]`.
pub fn random_rewards(k: usize, stream: &mut RandomStream) -> Vector {
    Vector::new((0..k).map(|_| stream.uniform()).collect()).expect("uniform draws are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Objective;
    use crate::problems::testing::worst_gradient_error;

    #[test]
    fn closed_form_optimum() {
        let r = [1.0, 0.0];
        assert!((optimal_value(&r, 1.0) - (1.0 + 1f64.exp()).ln()).abs() < 1e-15);
        assert!((optimal_value(&r, 1.0) - 1.3133).abs() < 1e-4);
        assert!((regularized_value(&r, &r, 1.0) - optimal_value(&r, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn delta_vanishes_at_optimum_and_uniform_case() {
        let mut s = RandomStream::new(12);
        for tau in [0.5, 5.0] {
            let r = random_rewards(20, &mut s);
            let p = bandit_problem(r.clone(), tau).unwrap();
            let opt: Vec<f64> = r.iter().map(|v| v / tau).collect();
            assert!(p.metric_value(&opt).unwrap().abs() <= 1e-12);
            let (x, v) = p.optimum.clone().unwrap();
            assert!((p.value(&x) - v).abs() <= 1e-12);
            for _ in 0..1000 {
                let th = s.standard_normal(20).scaled(3.0).unwrap();
                assert!(p.value(&th) >= v - 1e-12);
                assert!(p.metric_value(&th).unwrap() >= -1e-12);
            }
        }
        assert!(soft_suboptimality(&[0.0; 3], &[0.7; 3], 2.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_differences() {
        let mut s = RandomStream::new(13);
        let p = bandit_problem(random_rewards(6, &mut s), 0.5).unwrap();
        let (lo, hi) = &p.test_box;
        assert!(worst_gradient_error(&p, lo, hi, 100, 14) < 1e-4);
        assert!(bandit_problem(Vector::zeros(1), 1.0).is_err());
    }
}
