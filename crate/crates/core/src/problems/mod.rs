//! Benchmark problems with known structure.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::objective::Objective;
use crate::vector::Vector;

pub mod bandit;
pub mod glm;
pub mod hard;
pub mod ldsi;
pub mod quadratic;
pub mod radial;
pub mod svm;
pub mod toy;

pub use bandit::bandit_problem;
pub use glm::{glm_problem, Link};
pub use hard::hard_quasar_problem;
pub use ldsi::{ldsi_problem, mass_spring_chain, LtiSystem, SequenceDataset};
pub use quadratic::quadratic_problem;
pub use radial::radial_angular_problem;
pub use svm::smoothed_hinge_svm;

/// Structural constants a problem declares about itself.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Constants {
    pub l1: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
}

type Metric = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// An objective together with what is known about it.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub objective: Arc<dyn Objective>,
    /// Global minimiser and minimum value, when known.
    pub optimum: Option<(Vector, f64)>,
    pub constants: Constants,
    /// Region where the analytic gradient is validated and checkers sample.
    pub test_box: (Vec<f64>, Vec<f64>),
    /// Suggested start, used by configs with `init = problem_default`.
    pub default_start: Option<Vector>,
    /// Problem-specific progress measure (soft sub-optimality, test MSE, ...).
    pub metric: Option<(String, Arc<Metric>)>,
}

impl Problem {
    pub fn new(name: impl Into<String>, objective: Arc<dyn Objective>, lo: f64, hi: f64) -> Self {
        let n = objective.dim();
        Self {
            name: name.into(),
            objective,
            optimum: None,
            constants: Constants::default(),
            test_box: (vec![lo; n], vec![hi; n]),
            default_start: None,
            metric: None,
        }
    }

    pub fn with_optimum(mut self, point: Vector, value: f64) -> Self {
        self.optimum = Some((point, value));
        self
    }

    pub fn with_constants(mut self, l1: Option<f64>, gamma: Option<f64>, beta: Option<f64>) -> Self {
        self.constants = Constants { l1, gamma, beta };
        self
    }

    pub fn with_metric(
        mut self,
        name: impl Into<String>,
        metric: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.metric = Some((name.into(), Arc::new(metric)));
        self
    }

    pub fn with_default_start(mut self, start: Vector) -> Self {
        self.default_start = Some(start);
        self
    }

    pub fn metric_value(&self, x: &[f64]) -> Option<f64> {
        self.metric.as_ref().map(|(_, m)| m(x))
    }

    pub fn metric_name(&self) -> Option<&str> {
        self.metric.as_ref().map(|(n, _)| n.as_str())
    }
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.objective.dim())
            .field("optimum", &self.optimum)
            .field("constants", &self.constants)
            .finish_non_exhaustive()
    }
}

impl Objective for Problem {
    fn dim(&self) -> usize {
        self.objective.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.objective.gradient(x)
    }
    fn has_gradient(&self) -> bool {
        self.objective.has_gradient()
    }
}

/// Feature vectors with scalar labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<Vector>,
    labels: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vector>, labels: Vec<f64>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                found: labels.len(),
            });
        }
        if let Some(first) = features.first() {
            let n = first.dim();
            if let Some(bad) = features.iter().find(|f| f.dim() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: bad.dim(),
                });
            }
        }
        if let Some(i) = labels.iter().position(|l| !l.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vector::dim)
    }

    pub fn features(&self) -> &[Vector] {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Copy with every feature shifted to mean 0 and scaled to unit
    /// population standard deviation. Constant features become 0.
    pub fn standardized(&self) -> Self {
        let m = self.len() as f64;
        let n = self.dim();
        let mut mean = vec![0.0; n];
        for x in &self.features {
            for (mu, v) in mean.iter_mut().zip(x.iter()) {
                *mu += v / m;
            }
        }
        let mut sd = vec![0.0; n];
        for x in &self.features {
            for ((s, mu), v) in sd.iter_mut().zip(&mean).zip(x.iter()) {
                *s += (v - mu) * (v - mu) / m;
            }
        }
        let features = self
            .features
            .iter()
            .map(|x| {
                let z = x
                    .iter()
                    .zip(mean.iter().zip(&sd))
                    .map(|(v, (mu, s2))| if *s2 > 0.0 { (v - mu) / s2.sqrt() } else { 0.0 })
                    .collect();
                Vector::new(z).expect("standardized features are finite")
            })
            .collect();
        Self {
            features,
            labels: self.labels.clone(),
        }
    }

    /// Row-major copy of the feature matrix.
    pub(crate) fn flat_features(&self) -> Vec<f64> {
        self.features.iter().flat_map(|f| f.iter().copied()).collect()
    }
}

pub(crate) fn require_nonempty(data: &LabeledDataset) -> Result<()> {
    if data.is_empty() || data.dim() == 0 {
        Err(invalid("data", "dataset is empty"))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardized_columns() {
        let rows = [[1.0, 5.0, 2.0], [3.0, 5.0, -1.0], [8.0, 5.0, 0.5]];
        let d = LabeledDataset::new(
            rows.iter().map(|r| Vector::new(r.to_vec()).unwrap()).collect(),
            vec![1.0, -1.0, 1.0],
        )
        .unwrap();
        let z = d.standardized();
        assert_eq!(z.labels(), d.labels());
        for j in 0..3 {
            let col: Vec<f64> = z.features().iter().map(|x| x[j]).collect();
            let mean = col.iter().sum::<f64>() / 3.0;
            let var = col.iter().map(|v| v * v).sum::<f64>() / 3.0;
            assert!(mean.abs() < 1e-15);
            let expected = if j == 1 { 0.0 } else { 1.0 };
            assert!((var - expected).abs() < 1e-12, "column {j}: {var}");
        }
        // Column 0 by hand: mean 4, population sd sqrt(26/3).
        assert!((z.features()[0][0] + 3.0 / (26.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
