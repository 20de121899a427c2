use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A black-box objective `f: R^n -> R`, optionally with an analytic gradient.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn has_gradient(&self) -> bool {
        false
    }
}

impl<T: Objective + ?Sized> Objective for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).gradient(x)
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).gradient(x)
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Objective built from closures.
#[derive(Clone)]
pub struct FnObjective {
    dim: usize,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradFn>>,
}

impl FnObjective {
    pub fn new(dim: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }
}

impl fmt::Debug for FnObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnObjective")
            .field("dim", &self.dim)
            .field("gradient", &self.gradient.is_some())
            .finish()
    }
}

impl Objective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }
    fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }
}

/// Evaluates `f(x)`, turning a non-finite value into [`Error::Evaluation`].
pub fn eval_checked<F: Objective + ?Sized>(f: &F, x: &[f64]) -> Result<f64> {
    let value = f.value(x);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation {
            point: x.to_vec(),
            value,
        })
    }
}

pub(crate) fn check_dim<F: Objective + ?Sized>(f: &F, x: &[f64]) -> Result<()> {
    if f.dim() == x.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: x.len(),
        })
    }
}

/// Base step of the central-difference fallback; scaled by `1 + ||x||`.
pub const FD_STEP: f64 = 1e-6;

/// Central finite-difference gradient with step `FD_STEP * (1 + ||x||)`.
pub fn central_difference<F: Objective + ?Sized>(f: &F, x: &[f64]) -> Result<Vec<f64>> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let step = FD_STEP * (1.0 + norm);
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + step;
        let plus = eval_checked(f, &probe)?;
        probe[i] = orig - step;
        let minus = eval_checked(f, &probe)?;
        probe[i] = orig;
        grad.push((plus - minus) / (2.0 * step));
    }
    Ok(grad)
}

/// Analytic gradient when available, central differences otherwise.
/// The flag reports whether the fallback was used.
pub fn gradient_or_fd<F: Objective + ?Sized>(f: &F, x: &[f64]) -> Result<(Vec<f64>, bool)> {
    match f.gradient(x) {
        Some(g) => Ok((g, false)),
        None => central_difference(f, x).map(|g| (g, true)),
    }
}
