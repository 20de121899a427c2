//! Dense real vectors.
//!
//! A [`Vector`] always holds finite coordinates: every constructor and every
//! arithmetic operation checks the result and reports [`Error::NonFinite`]
//! instead of handing back NaN or infinity. Binary operations require equal
//! dimensions.

use std::ops::Deref;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

fn check_finite(coords: &[f64]) -> Result<()> {
    match coords.iter().position(|c| !c.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        })
    }
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords)?;
        Ok(Self(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// # Panics
    /// If `value` is not finite.
    pub fn filled(n: usize, value: f64) -> Self {
        assert!(value.is_finite(), "fill value must be finite");
        Self(vec![value; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.axpy(-1.0, other)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Vector) -> Result<Vector> {
        check_dims(self.dim(), other.dim())?;
        Vector::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Result<Vector> {
        Vector::new(self.0.iter().map(|a| a * factor).collect())
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Vector) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(dist_sq(&self.0, &other.0).sqrt())
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|a| a.abs()).sum()
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Vector::new(coords)
    }
}

impl TryFrom<&[f64]> for Vector {
    type Error = Error;

    fn try_from(coords: &[f64]) -> Result<Self> {
        Vector::new(coords.to_vec())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let v = Vector::new(vec![f64::MAX]).unwrap();
        assert!(v.scaled(2.0).is_err());
        assert!(v.add(&v).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let a = Vector::zeros(2);
        let b = Vector::zeros(3);
        assert_eq!(
            a.add(&b),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
        assert!(a.dot(&b).is_err());
    }

    #[test]
    fn arithmetic() {
        let a = Vector::new(vec![1.0, 2.0]).unwrap();
        let b = Vector::new(vec![3.0, -1.0]).unwrap();
        assert_eq!(a.axpy(2.0, &b).unwrap().as_slice(), &[7.0, 0.0]);
        assert_eq!(a.dot(&b).unwrap(), 1.0);
        assert_eq!(a.sub(&b).unwrap().norm_sq(), 4.0 + 9.0);
        assert_eq!(b.l1_norm(), 4.0);
    }
}
