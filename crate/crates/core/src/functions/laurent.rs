use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer exponent vector; negative entries are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Largest `|α_j|`.
    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|a| a.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// All indices with `0 ≤ α_j ≤ degree` for each coordinate.
    pub fn tensor_degree(n: usize, degree: u32) -> Vec<MultiIndex> {
        let d = degree as i64;
        let mut out = Vec::new();
        let mut idx = vec![0i64; n];
        loop {
            out.push(MultiIndex(idx.clone()));
            let mut j = 0;
            while j < n {
                idx[j] += 1;
                if idx[j] <= d {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == n {
                return out;
            }
        }
    }

    /// All nonnegative indices with total degree `≤ degree`.
    pub fn total_degree(n: usize, degree: u32) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> = Self::tensor_degree(n, degree)
            .into_iter()
            .filter(|a| a.sum() <= degree as i64)
            .collect();
        out.sort_by_key(|a| (a.sum(), std::cmp::Reverse(a.0.clone())));
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `z^α`, or a pole error when a negative exponent meets a zero coordinate.
pub fn monomial_value(alpha: &[i64], z: &[Complex64]) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for (j, (&a, &zj)) in alpha.iter().zip(z).enumerate() {
        if a == 0 {
            continue;
        }
        if a < 0 && zj == Complex64::new(0.0, 0.0) {
            return Err(Error::Pole { coord: j, exponent: a });
        }
        acc *= zj.powi(a as i32);
    }
    Ok(acc)
}

/// Finite sum `Σ c_α z^α` with integer multi-indices.
///
/// Zero coefficients are never stored. A polynomial of dimension 0 is a
/// constant and evaluates at points of any dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPolynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl LaurentPolynomial {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(MultiIndex::zeros(dim), c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(alpha: MultiIndex, c: Complex64) -> Self {
        let mut p = Self::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    /// `z^α` with unit coefficient.
    pub fn monomial_unit(exponents: &[i64]) -> Self {
        Self::monomial(MultiIndex(exponents.to_vec()), Complex64::new(1.0, 0.0))
    }

    /// The coordinate function `z_j`.
    pub fn coordinate(dim: usize, j: usize) -> Self {
        Self::monomial(MultiIndex::unit(dim, j), Complex64::new(1.0, 0.0))
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, Complex64)>) -> Result<Self> {
        let mut p = Self::zero(dim);
        for (a, c) in terms {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: a.dim() });
            }
            p.add_term(a, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        match self.terms.entry(alpha) {
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == zero {
                    slot.remove();
                }
            }
            Entry::Vacant(slot) => {
                if c != zero {
                    slot.insert(c);
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The single term, if there is exactly one.
    pub fn as_monomial(&self) -> Option<(&MultiIndex, Complex64)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(a, c)| (a, *c))
        } else {
            None
        }
    }

    /// Largest `|α_j|` over all terms.
    pub fn max_abs_exponent(&self) -> i64 {
        self.terms.keys().map(|a| a.max_abs()).max().unwrap_or(0)
    }

    /// Largest spread `max α_j − min α_j` over terms, per coordinate.
    pub fn exponent_span(&self) -> i64 {
        (0..self.dim)
            .map(|j| {
                let lo = self.terms.keys().map(|a| a.0[j]).min().unwrap_or(0);
                let hi = self.terms.keys().map(|a| a.0[j]).max().unwrap_or(0);
                hi - lo
            })
            .max()
            .unwrap_or(0)
    }

    /// Term-wise evaluation.
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        if self.dim != 0 && z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, c) in &self.terms {
            acc += c * monomial_value(&a.0, z)?;
        }
        Ok(acc)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let dim = self.common_dim(other)?;
        let mut out = self.lift(dim);
        for (a, c) in &other.lift(dim).terms {
            out.add_term(a.clone(), *c);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let dim = self.common_dim(other)?;
        let (x, y) = (self.lift(dim), other.lift(dim));
        let mut out = Self::zero(dim);
        for (a, c) in &x.terms {
            for (b, d) in &y.terms {
                let e = MultiIndex(a.0.iter().zip(&b.0).map(|(u, v)| u + v).collect());
                out.add_term(e, c * d);
            }
        }
        Ok(out)
    }

    /// `∂/∂z_j`.
    pub fn derivative(&self, j: usize) -> Result<Self> {
        if j >= self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: j + 1 });
        }
        let mut out = Self::zero(self.dim);
        for (a, c) in &self.terms {
            let e = a.0[j];
            if e != 0 {
                let mut b = a.clone();
                b.0[j] -= 1;
                out.add_term(b, c * e as f64);
            }
        }
        Ok(out)
    }

    /// Coordinates on which this polynomial, when a monomial, vanishes:
    /// its zero set is the union of `{z_j = 0}` over positive exponents.
    pub fn monomial_zero_set(&self) -> Option<Vec<usize>> {
        let (a, _) = self.as_monomial()?;
        Some(a.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(j, _)| j).collect())
    }

    /// Coefficient-wise comparison up to `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let Ok(diff) = self.add(&other.scale(Complex64::new(-1.0, 0.0))) else {
            return false;
        };
        diff.terms.values().all(|c| c.norm() <= tol)
    }

    fn common_dim(&self, other: &Self) -> Result<usize> {
        match (self.dim, other.dim) {
            (0, d) | (d, 0) => Ok(d),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(Error::DimensionMismatch { expected: a, got: b }),
        }
    }

    fn lift(&self, dim: usize) -> Self {
        if self.dim == dim {
            return self.clone();
        }
        // only constants (dim 0) are lifted
        let mut out = Self::zero(dim);
        for c in self.terms.values() {
            out.add_term(MultiIndex::zeros(dim), *c);
        }
        out
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, c)| format!("({:+}{:+}i)·z^{}", c.re, c.im, a))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<i64>,
    re: f64,
    im: f64,
}

impl Serialize for LaurentPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(a, c)| TermJson { exp: a.0.clone(), re: c.re, im: c.im })
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<TermJson>::deserialize(d)?;
        let dim = terms.first().map(|t| t.exp.len()).unwrap_or(0);
        Self::from_terms(
            dim,
            terms.into_iter().map(|t| (MultiIndex(t.exp), Complex64::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn pt(xs: &[f64]) -> Vec<C> {
        xs.iter().map(|&x| C::new(x, 0.0)).collect()
    }

    #[test]
    fn evaluate_examples() {
        let z = pt(&[0.3, 0.2, 0.5, 0.05]);
        let f = LaurentPolynomial::monomial_unit(&[1, 0, -1, 0]);
        assert!((f.evaluate(&z).unwrap() - C::new(0.6, 0.0)).norm() < 1e-15);
        let f2 = LaurentPolynomial::monomial_unit(&[2, 0, -2, 0]);
        assert!((f2.evaluate(&z).unwrap() - C::new(0.36, 0.0)).norm() < 1e-15);
        let one = LaurentPolynomial::monomial_unit(&[]);
        assert_eq!(one.evaluate(&z).unwrap(), C::new(1.0, 0.0));
    }

    #[test]
    fn pole_is_reported() {
        let f = LaurentPolynomial::monomial_unit(&[0, -1]);
        let err = f.evaluate(&pt(&[0.5, 0.0])).unwrap_err();
        assert_eq!(err, Error::Pole { coord: 1, exponent: -1 });
    }

    #[test]
    fn no_zero_coefficients_stored() {
        let a = LaurentPolynomial::monomial_unit(&[1, 0]);
        let s = a.add(&a.scale(C::new(-1.0, 0.0))).unwrap();
        assert!(s.is_zero());
        assert_eq!(s.len(), 0);
    }

    #[test]
    fn product_and_derivative() {
        let x = LaurentPolynomial::coordinate(2, 0);
        let y_inv = LaurentPolynomial::monomial_unit(&[0, -1]);
        let p = x.mul(&y_inv).unwrap().add(&LaurentPolynomial::one(2)).unwrap();
        let z = pt(&[2.0, 4.0]);
        assert!((p.evaluate(&z).unwrap() - C::new(1.5, 0.0)).norm() < 1e-15);
        let dp = p.derivative(1).unwrap();
        assert!((dp.evaluate(&z).unwrap() - C::new(-2.0 / 16.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn json_layout() {
        let p = LaurentPolynomial::monomial(MultiIndex(vec![1, -2]), C::new(0.5, -1.0));
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"[{"exp":[1,-2],"re":0.5,"im":-1.0}]"#);
        let back: LaurentPolynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn index_generators() {
        assert_eq!(MultiIndex::tensor_degree(2, 2).len(), 9);
        assert_eq!(MultiIndex::total_degree(2, 2).len(), 6);
        assert_eq!(MultiIndex::total_degree(4, 3).len(), 35);
    }
}
