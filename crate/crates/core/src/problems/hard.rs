//! Hard quasar-convex chain function.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::objective::FnObjective;
use crate::vector::Vector;

use super::Problem;

fn antiderivative(t: f64) -> f64 {
    t * t / 2.0 - t - 0.5 * t.mul_add(t, 1.0).ln() + t.atan()
}

/// `upsilon(theta) = 120 * integral_1^theta t^2 (t - 1) / (1 + t^2) dt`.
pub fn upsilon(theta: f64) -> f64 {
    120.0 * (antiderivative(theta) - antiderivative(1.0))
}

pub fn upsilon_derivative(theta: f64) -> f64 {
    120.0 * theta * theta * (theta - 1.0) / theta.mul_add(theta, 1.0)
}

fn chain_value(x: &[f64], sigma: f64) -> f64 {
    let mut q = 0.25 * (x[0] - 1.0).powi(2);
    for w in x.windows(2) {
        q += 0.25 * (w[0] - w[1]).powi(2);
    }
    q + sigma * x.iter().map(|&v| upsilon(v)).sum::<f64>()
}

fn chain_gradient(x: &[f64], sigma: f64) -> Vec<f64> {
    let mut g: Vec<f64> = x.iter().map(|&v| sigma * upsilon_derivative(v)).collect();
    g[0] += 0.5 * (x[0] - 1.0);
    for i in 0..x.len().saturating_sub(1) {
        let d = 0.5 * (x[i] - x[i + 1]);
        g[i] += d;
        g[i + 1] -= d;
    }
    g
}

/// `q(x) + sigma * sum upsilon(x_i)` with
/// `q(x) = (x_1 - 1)^2 / 4 + sum (x_i - x_{i+1})^2 / 4`. Declares `L1 = 3`,
/// `gamma = 1 / (100 T sqrt(sigma))`, and the minimiser `(1, ..., 1)`.
pub fn hard_quasar_problem(t: usize, sigma: f64) -> Result<Problem> {
    if t == 0 {
        return Err(invalid("T", "must be at least 1"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma", format!("must be positive, got {sigma}")));
    }
    let obj = FnObjective::new(t, move |x| chain_value(x, sigma))
        .with_gradient(move |x| chain_gradient(x, sigma));
    let gamma = 1.0 / (100.0 * t as f64 * sigma.sqrt());
    Ok(Problem::new("hard", Arc::new(obj), -1.5, 2.5)
        .with_optimum(Vector::filled(t, 1.0), 0.0)
        .with_constants(Some(3.0), Some(gamma.min(1.0)), None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Objective;
    use crate::problems::testing::worst_gradient_error;

    fn integrand(t: f64) -> f64 {
        120.0 * t * t * (t - 1.0) / (1.0 + t * t)
    }

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f((a + b) / 2.0) + f(b))
    }

    fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = (a + b) / 2.0;
        let (l, r) = (simpson(f, a, m), simpson(f, m, b));
        // The first levels always split: a coarse Simpson estimate can agree
        // with its halves by coincidence.
        if depth == 0 || (depth < 45 && (l + r - whole).abs() <= 15.0 * tol) {
            l + r + (l + r - whole) / 15.0
        } else {
            adaptive(f, a, m, l, tol / 2.0, depth - 1) + adaptive(f, m, b, r, tol / 2.0, depth - 1)
        }
    }

    fn quadrature(theta: f64) -> f64 {
        adaptive(&integrand, 1.0, theta, simpson(&integrand, 1.0, theta), 1e-12, 50)
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for i in 0..=60 {
            let theta = -3.0 + 0.1 * i as f64;
            let diff = (upsilon(theta) - quadrature(theta)).abs();
            assert!(diff < 1e-8, "theta {theta}: {diff}");
        }
        assert!((upsilon(2.0) - 43.633).abs() < 5e-4, "{}", upsilon(2.0));
    }

    #[test]
    fn optimum_and_gamma() {
        let p = hard_quasar_problem(20, 1e-6).unwrap();
        assert_eq!(p.value(&[1.0; 20]), 0.0);
        assert!((p.constants.gamma.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(p.constants.l1, Some(3.0));
        assert!(p.gradient(&[1.0; 20]).unwrap().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn gradient_matches_differences() {
        let p = hard_quasar_problem(20, 1e-3).unwrap();
        let (lo, hi) = &p.test_box;
        assert!(worst_gradient_error(&p, lo, hi, 100, 3) < 1e-4);
    }

    #[test]
    fn random_probes_never_beat_the_optimum() {
        let p = hard_quasar_problem(10, 1e-2).unwrap();
        let mut s = crate::rng::RandomStream::new(4);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..10).map(|_| s.uniform_in(-1.5, 2.5)).collect();
            assert!(p.value(&x) >= -1e-12);
        }
    }
}
