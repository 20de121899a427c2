//! Squared-loss empirical risk of a generalised linear model.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::objective::Objective;
use crate::rng::RandomStream;
use crate::vector::{dot, Vector};

use super::{require_nonempty, LabeledDataset, Problem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Link {
    Sigmoid,
    Relu,
    LeakyRelu(f64),
}

impl Link {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Self::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Self::Relu => z.max(0.0),
            Self::LeakyRelu(a) => {
                if z > 0.0 {
                    z
                } else {
                    a * z
                }
            }
        }
    }

    /// Derivative; the ReLU kink at 0 uses the subgradient 0.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Self::Sigmoid => {
                let s = self.apply(z);
                s * (1.0 - s)
            }
            Self::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::LeakyRelu(a) => {
                if z > 0.0 {
                    1.0
                } else {
                    a
                }
            }
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sigmoid => f.write_str("sigmoid"),
            Self::Relu => f.write_str("relu"),
            Self::LeakyRelu(a) => write!(f, "leaky_relu({a})"),
        }
    }
}

impl FromStr for Link {
    type Err = Error;

    /// Accepts `sigmoid`, `relu`, `leaky_relu` (slope 0.5) and `leaky_relu(a)`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Self::Sigmoid),
            "relu" => Ok(Self::Relu),
            "leaky_relu" => Ok(Self::LeakyRelu(0.5)),
            _ => s
                .strip_prefix("leaky_relu(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|a| a.trim().parse::<f64>().ok())
                .filter(|a| a.is_finite())
                .map(Self::LeakyRelu)
                .ok_or_else(|| invalid("link", format!("unknown link `{s}`"))),
        }
    }
}

struct GlmRisk {
    x: Vec<f64>,
    y: Vec<f64>,
    n: usize,
    link: Link,
}

impl Objective for GlmRisk {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, w: &[f64]) -> f64 {
        let sum: f64 = self
            .x
            .chunks_exact(self.n)
            .zip(&self.y)
            .map(|(xi, yi)| 0.5 * (self.link.apply(dot(w, xi)) - yi).powi(2))
            .sum();
        sum / self.y.len() as f64
    }

    fn gradient(&self, w: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; self.n];
        for (xi, yi) in self.x.chunks_exact(self.n).zip(&self.y) {
            let z = dot(w, xi);
            let c = (self.link.apply(z) - yi) * self.link.derivative(z);
            g.iter_mut().zip(xi).for_each(|(gj, xj)| *gj += c * xj);
        }
        let m = self.y.len() as f64;
        g.iter_mut().for_each(|v| *v /= m);
        Some(g)
    }

    fn has_gradient(&self) -> bool {
        true
    }
}

/// `(1/m) sum (link(w^T x_i) - y_i)^2 / 2` over `w`.
pub fn glm_problem(data: &LabeledDataset, link: Link) -> Result<Problem> {
    require_nonempty(data)?;
    let obj = GlmRisk {
        x: data.flat_features(),
        y: data.labels().to_vec(),
        n: data.dim(),
        link,
    };
    Ok(Problem::new(format!("glm_{link}"), Arc::new(obj), -1.0, 1.0))
}

/// Standard-normal features, a standard-normal true parameter `w*`, and
/// noiseless labels `y_i = link(w*^T x_i)`. Returns the data and `w*`.
pub fn glm_dataset(
    m: usize,
    n: usize,
    link: Link,
    stream: &mut RandomStream,
) -> Result<(LabeledDataset, Vector)> {
    let w = stream.standard_normal(n);
    let features: Vec<Vector> = (0..m).map(|_| stream.standard_normal(n)).collect();
    let labels = features.iter().map(|x| link.apply(dot(x, &w))).collect();
    Ok((LabeledDataset::new(features, labels)?, w))
}
