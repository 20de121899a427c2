//! Convex feasible sets with exact Euclidean projection.

use crate::error::{invalid, Error, Result};
use crate::vector::{dist_sq, Vector};

/// Relative tolerance used by [`FeasibleSet::contains`].
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// A closed convex set. Box bounds may be infinite, which covers
/// orthants and half-spaces such as `{x >= 1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    WholeSpace,
    Box { lower: Vec<f64>, upper: Vec<f64> },
    L2Ball { center: Vector, radius: f64 },
    L1Ball { center: Vector, radius: f64 },
}

impl FeasibleSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (l, u) in lower.iter().zip(&upper) {
            if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY
            {
                return Err(invalid("box", format!("empty interval [{l}, {u}]")));
            }
        }
        Ok(Self::Box { lower, upper })
    }

    /// `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(vec![lo; n], vec![hi; n])
    }

    pub fn l2_ball(center: Vector, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self::L2Ball { center, radius })
    }

    pub fn l1_ball(center: Vector, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self::L1Ball { center, radius })
    }

    /// Ambient dimension; `None` for the whole space, which fits any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::WholeSpace => None,
            Self::Box { lower, .. } => Some(lower.len()),
            Self::L2Ball { center, .. } | Self::L1Ball { center, .. } => Some(center.dim()),
        }
    }

    pub fn is_whole_space(&self) -> bool {
        matches!(self, Self::WholeSpace)
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != n => Err(Error::DimensionMismatch {
                expected: d,
                found: n,
            }),
            _ => Ok(()),
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, z: &Vector) -> Result<Vector> {
        self.check_dim(z.dim())?;
        let coords = match self {
            Self::WholeSpace => return Ok(z.clone()),
            Self::Box { lower, upper } => z
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect(),
            Self::L2Ball { center, radius } => {
                let d = dist_sq(z, center).sqrt();
                if d <= *radius {
                    return Ok(z.clone());
                }
                let s = radius / d;
                z.iter()
                    .zip(center.iter())
                    .map(|(v, c)| c + s * (v - c))
                    .collect()
            }
            Self::L1Ball { center, radius } => {
                let shifted: Vec<f64> = z.iter().zip(center.iter()).map(|(v, c)| v - c).collect();
                project_l1(&shifted, *radius)
                    .into_iter()
                    .zip(center.iter())
                    .map(|(v, c)| v + c)
                    .collect()
            }
        };
        Vector::new(coords)
    }

    /// Membership up to a relative tolerance of [`FEASIBILITY_TOL`].
    pub fn contains(&self, x: &[f64]) -> bool {
        if self.check_dim(x.len()).is_err() {
            return false;
        }
        match self {
            Self::WholeSpace => true,
            Self::Box { lower, upper } => x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| {
                *v >= l - FEASIBILITY_TOL * l.abs().max(1.0)
                    && *v <= u + FEASIBILITY_TOL * u.abs().max(1.0)
            }),
            Self::L2Ball { center, radius } => {
                dist_sq(x, center).sqrt() <= radius * (1.0 + FEASIBILITY_TOL)
            }
            Self::L1Ball { center, radius } => {
                x.iter().zip(center.iter()).map(|(v, c)| (v - c).abs()).sum::<f64>()
                    <= radius * (1.0 + FEASIBILITY_TOL)
            }
        }
    }

    /// Supremum of pairwise distances; infinite for unbounded sets.
    pub fn diameter(&self) -> f64 {
        match self {
            Self::WholeSpace => f64::INFINITY,
            Self::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (u - l) * (u - l))
                .sum::<f64>()
                .sqrt(),
            Self::L2Ball { radius, .. } | Self::L1Ball { radius, .. } => 2.0 * radius,
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(invalid("radius", format!("must be positive, got {radius}")))
    }
}

/// Projection onto `{x : ||x||_1 <= radius}` by sorting magnitudes and
/// soft-thresholding. Magnitude ties are ordered by coordinate index.
fn project_l1(z: &[f64], radius: f64) -> Vec<f64> {
    let l1: f64 = z.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return z.to_vec();
    }
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&i, &j| z[j].abs().total_cmp(&z[i].abs()).then(i.cmp(&j)));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &i) in order.iter().enumerate() {
        let a = z[i].abs();
        cumsum += a;
        let candidate = (cumsum - radius) / (k + 1) as f64;
        if a > candidate {
            tau = candidate;
        } else {
            break;
        }
    }
    z.iter()
        .map(|v| v.signum() * (v.abs() - tau).max(0.0))
        .collect()
}

/// Gradient mapping `(x - project(x - a g)) / a`. On the whole space it
/// returns `g` exactly.
pub fn gradient_mapping(x: &Vector, g: &Vector, a: f64, set: &FeasibleSet) -> Result<Vector> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", format!("must be positive, got {a}")));
    }
    if x.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: g.dim(),
        });
    }
    if set.is_whole_space() {
        return Ok(g.clone());
    }
    let trial = x.axpy(-a, g)?;
    let p = set.project(&trial)?;
    x.sub(&p)?.scaled(1.0 / a)
}
