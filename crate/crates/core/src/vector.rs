use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Point or direction in `R^n` with finite components.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self(coords))
    }

    /// Skips the finiteness check; callers must pass finite components.
    pub fn from_slice(coords: &[f64]) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self(coords.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// Standard basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, t: f64) -> Self {
        Self(self.0.iter().map(|a| a * t).collect())
    }

    /// `self + t * dir`.
    pub fn add_scaled(&self, t: f64, dir: &Self) -> Self {
        assert_eq!(self.dim(), dir.dim());
        Self(
            self.0
                .iter()
                .zip(&dir.0)
                .map(|(a, d)| a + t * d)
                .collect(),
        )
    }

    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }

    /// Unit vector in the direction of `self`, or `None` for (near-)zero input.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n <= 0.0 {
            return None;
        }
        let u = self.scale(1.0 / n);
        if u.0.iter().any(|c| !c.is_finite()) {
            return None;
        }
        Some(u)
    }
}

impl<'de> Deserialize<'de> for RealVector {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(de)?;
        RealVector::new(coords).map_err(serde::de::Error::custom)
    }
}

/// Shared numerical tolerances.
///
/// `feas_tol` bounds set-membership slack, `align_tol` bounds acceptable
/// angular defect of normal directions, `rate_tol` is the default slack on
/// fitted linear rates, and `eta0` is the relaxation at the initial sampling
/// radius (the relaxation shrinks proportionally with the radius).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    pub feas_tol: f64,
    pub align_tol: f64,
    pub rate_tol: f64,
    pub eta0: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feas_tol: 1e-10,
            align_tol: 1e-3,
            rate_tol: 0.05,
            eta0: 0.05,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = self.feas_tol > 0.0
            && self.align_tol > 0.0
            && self.rate_tol > 0.0
            && self.eta0 > 0.0
            && self.feas_tol < self.align_tol;
        if !ok {
            return Err(Error::Parse("tolerances must be positive with feas_tol < align_tol".into()));
        }
        Ok(())
    }
}
