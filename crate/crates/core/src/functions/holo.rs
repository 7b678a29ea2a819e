use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::laurent::LaurentPolynomial;
use super::maps::HoloMapExpr;
use crate::error::Result;

/// Anything that can be evaluated pointwise as a holomorphic function.
pub trait Holomorphic: Sync {
    fn eval(&self, z: &[Complex64]) -> Result<Complex64>;
}

impl Holomorphic for LaurentPolynomial {
    fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        self.evaluate(z)
    }
}

/// Multiplier `g` of a weighted composition operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// Exact Laurent weight.
    Laurent { poly: LaurentPolynomial },
    /// Branch of `J_map^exponent` built by [`HoloMapExpr::jacobian_power`].
    JacobianPower { map: HoloMapExpr, exponent: f64 },
}

impl Weight {
    pub fn eval(&self, w: &[Complex64]) -> Result<Complex64> {
        match self {
            Weight::Laurent { poly } => poly.evaluate(w),
            Weight::JacobianPower { map, exponent } => map.jacobian_power(w, *exponent),
        }
    }

    pub fn as_laurent(&self) -> Option<&LaurentPolynomial> {
        match self {
            Weight::Laurent { poly } => Some(poly),
            Weight::JacobianPower { .. } => None,
        }
    }
}

/// A holomorphic function: a Laurent polynomial or a lazily evaluated
/// weighted pullback `λ · (inner ∘ map) · weight`.
#[derive(Debug, Clone, PartialEq)]
pub enum HoloFn {
    Laurent(LaurentPolynomial),
    Composed {
        inner: Box<HoloFn>,
        map: HoloMapExpr,
        weight: Weight,
        lambda: Complex64,
    },
}

impl HoloFn {
    pub fn as_laurent(&self) -> Option<&LaurentPolynomial> {
        match self {
            HoloFn::Laurent(p) => Some(p),
            HoloFn::Composed { .. } => None,
        }
    }
}

impl From<LaurentPolynomial> for HoloFn {
    fn from(p: LaurentPolynomial) -> Self {
        HoloFn::Laurent(p)
    }
}

impl Holomorphic for HoloFn {
    fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        match self {
            HoloFn::Laurent(p) => p.evaluate(z),
            HoloFn::Composed { inner, map, weight, lambda } => {
                let g = weight.eval(z)?;
                let image = map.apply(z)?;
                Ok(lambda * inner.eval(&image)? * g)
            }
        }
    }
}

impl<T: Holomorphic + ?Sized> Holomorphic for &T {
    fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        (**self).eval(z)
    }
}
