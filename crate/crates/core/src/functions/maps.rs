use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::laurent::{monomial_value, LaurentPolynomial, MultiIndex};
use crate::error::{Error, Result};
use crate::geometry::Point;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `output_i(z) = c_i · ∏_j z_j^{e_ij}` with an integer exponent matrix and
/// unit coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialMap {
    /// Row `i` is the exponent vector of output coordinate `i`.
    pub exponents: Vec<Vec<i64>>,
    pub coeffs: Vec<Complex64>,
}

impl MonomialMap {
    pub fn new(exponents: Vec<Vec<i64>>, coeffs: Vec<Complex64>) -> Result<Self> {
        let n = exponents.len();
        if n == 0 {
            return Err(Error::Config("monomial map needs at least one coordinate".into()));
        }
        if let Some(row) = exponents.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
        if coeffs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: coeffs.len() });
        }
        if let Some(c) = coeffs.iter().find(|c| (c.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::Config(format!("monomial map coefficient {c} is not unimodular")));
        }
        Ok(Self { exponents, coeffs })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| MultiIndex::unit(n, i).0).collect();
        Self { exponents: rows, coeffs: vec![ONE; n] }
    }

    /// `(z_1, z_2) ↦ (z_1, z_1^k z_2)`; `shear(-k)` is its inverse.
    pub fn shear(k: i64) -> Self {
        Self { exponents: vec![vec![1, 0], vec![k, 1]], coeffs: vec![ONE; 2] }
    }

    /// `output_i = z_{perm[i]}`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::Config(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let rows = perm.iter().map(|&p| MultiIndex::unit(n, p).0).collect();
        Ok(Self { exponents: rows, coeffs: vec![ONE; n] })
    }

    /// Block-diagonal map acting on concatenated coordinates.
    pub fn block_diag(a: &MonomialMap, b: &MonomialMap) -> Self {
        let (na, nb) = (a.dim(), b.dim());
        let mut rows = Vec::with_capacity(na + nb);
        for r in &a.exponents {
            let mut row = r.clone();
            row.extend(std::iter::repeat_n(0, nb));
            rows.push(row);
        }
        for r in &b.exponents {
            let mut row = vec![0; na];
            row.extend_from_slice(r);
            rows.push(row);
        }
        let mut coeffs = a.coeffs.clone();
        coeffs.extend_from_slice(&b.coeffs);
        Self { exponents: rows, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn apply(&self, z: &[Complex64]) -> Result<Point> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        self.exponents
            .iter()
            .zip(&self.coeffs)
            .map(|(row, c)| Ok(c * monomial_value(row, z)?))
            .collect()
    }

    /// Determinant of the exponent matrix (exact integer arithmetic).
    pub fn exponent_det(&self) -> i64 {
        integer_det(&self.exponents)
    }

    /// Closed-form Jacobian determinant `c · z^β` with
    /// `c = det(E) ∏ c_i` and `β_j = Σ_i e_ij − 1`.
    pub fn jacobian_monomial(&self) -> Result<(Complex64, MultiIndex)> {
        let det = self.exponent_det();
        if det == 0 {
            return Err(Error::SingularExponentMatrix);
        }
        let n = self.dim();
        let beta = (0..n)
            .map(|j| self.exponents.iter().map(|row| row[j]).sum::<i64>() - 1)
            .collect();
        let c = self.coeffs.iter().fold(Complex64::new(det as f64, 0.0), |acc, c| acc * c);
        Ok((c, MultiIndex(beta)))
    }

    pub fn jacobian_det(&self, z: &[Complex64]) -> Result<Complex64> {
        let (c, beta) = self.jacobian_monomial()?;
        Ok(c * monomial_value(&beta.0, z)?)
    }

    /// `self ∘ inner`.
    pub fn compose_after(&self, inner: &MonomialMap) -> Result<MonomialMap> {
        let n = self.dim();
        if inner.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: inner.dim() });
        }
        let mut rows = vec![vec![0i64; n]; n];
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            let mut c = self.coeffs[i];
            for j in 0..n {
                let e = self.exponents[i][j];
                if e != 0 {
                    c *= inner.coeffs[j].powi(e as i32);
                    for (l, slot) in rows[i].iter_mut().enumerate() {
                        *slot += e * inner.exponents[j][l];
                    }
                }
            }
            coeffs.push(c);
        }
        Ok(MonomialMap { exponents: rows, coeffs })
    }

    /// Inverse map; requires `det E = ±1` so that the inverse is again monomial.
    pub fn inverse(&self) -> Result<MonomialMap> {
        let det = self.exponent_det();
        if det.abs() != 1 {
            return Err(Error::NotInvertible(format!(
                "exponent matrix has determinant {det}; a monomial inverse needs ±1"
            )));
        }
        let n = self.dim();
        let mut inv = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let minor: Vec<Vec<i64>> = self
                    .exponents
                    .iter()
                    .enumerate()
                    .filter(|(r, _)| *r != j)
                    .map(|(_, row)| {
                        row.iter().enumerate().filter(|(c, _)| *c != i).map(|(_, v)| *v).collect()
                    })
                    .collect();
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                inv[i][j] = sign * integer_det(&minor) * det;
            }
        }
        // z_j = ∏_i (w_i / c_i)^{inv_ji}
        let coeffs = (0..n)
            .map(|j| {
                (0..n).fold(ONE, |acc, i| {
                    let e = inv[j][i];
                    if e == 0 {
                        acc
                    } else {
                        acc * self.coeffs[i].powi(-(e as i32))
                    }
                })
            })
            .collect();
        Ok(MonomialMap { exponents: inv, coeffs })
    }
}

/// Bareiss fraction-free determinant.
fn integer_det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

/// One link of a [`HoloMapExpr`] chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum MapStep {
    Monomial(MonomialMap),
    /// Coordinate-wise disc automorphism `z ↦ (a − z)/(1 − āz)` where `a` is
    /// present, identity elsewhere. Each `|a| < 1`.
    Mobius { a: Vec<Option<Complex64>> },
    /// `z ↦ M z`, rows of `M`.
    Linear { matrix: Vec<Vec<Complex64>> },
    /// `output_i = z_{perm[i]}`.
    Permutation { perm: Vec<usize> },
}

impl MapStep {
    fn dim(&self) -> usize {
        match self {
            MapStep::Monomial(m) => m.dim(),
            MapStep::Mobius { a } => a.len(),
            MapStep::Linear { matrix } => matrix.len(),
            MapStep::Permutation { perm } => perm.len(),
        }
    }

    fn apply(&self, z: &[Complex64]) -> Result<Point> {
        match self {
            MapStep::Monomial(m) => m.apply(z),
            MapStep::Mobius { a } => Ok(z
                .iter()
                .zip(a)
                .map(|(&zj, aj)| match aj {
                    Some(a) => (a - zj) / (ONE - a.conj() * zj),
                    None => zj,
                })
                .collect()),
            MapStep::Linear { matrix } => Ok(matrix
                .iter()
                .map(|row| row.iter().zip(z).map(|(m, x)| m * x).sum())
                .collect()),
            MapStep::Permutation { perm } => Ok(perm.iter().map(|&p| z[p]).collect()),
        }
    }

    fn jacobian_det(&self, z: &[Complex64]) -> Result<Complex64> {
        match self {
            MapStep::Monomial(m) => m.jacobian_det(z),
            MapStep::Mobius { a } => Ok(z.iter().zip(a).fold(ONE, |acc, (&zj, aj)| match aj {
                Some(a) => {
                    let den = ONE - a.conj() * zj;
                    acc * Complex64::new(a.norm_sqr() - 1.0, 0.0) / (den * den)
                }
                None => acc,
            })),
            MapStep::Linear { matrix } => Ok(to_matrix(matrix).determinant()),
            MapStep::Permutation { perm } => Ok(Complex64::new(permutation_sign(perm), 0.0)),
        }
    }

    /// A single-valued branch of `J^q` along this step.
    fn jacobian_power(&self, z: &[Complex64], q: f64) -> Result<Complex64> {
        match self {
            MapStep::Monomial(m) => {
                let w = monomial_branch(m, q)?;
                w.evaluate(z)
            }
            MapStep::Mobius { a } => Ok(z.iter().zip(a).fold(ONE, |acc, (&zj, aj)| match aj {
                Some(a) => {
                    // Re(1 − āz) > 0 on the disc, so the principal logarithm is continuous there
                    let den = ONE - a.conj() * zj;
                    let lead = Complex64::new(a.norm_sqr() - 1.0, 0.0).powf(q);
                    acc * lead * (-2.0 * q * den.ln()).exp()
                }
                None => acc,
            })),
            MapStep::Linear { matrix } => Ok(to_matrix(matrix).determinant().powf(q)),
            MapStep::Permutation { perm } => Ok(Complex64::new(permutation_sign(perm), 0.0).powf(q)),
        }
    }

    fn inverse(&self) -> Result<MapStep> {
        match self {
            MapStep::Monomial(m) => Ok(MapStep::Monomial(m.inverse()?)),
            MapStep::Mobius { a } => Ok(MapStep::Mobius { a: a.clone() }),
            MapStep::Linear { matrix } => {
                let n = matrix.len();
                let inv = to_matrix(matrix)
                    .try_inverse()
                    .ok_or_else(|| Error::NotInvertible("singular linear step".into()))?;
                Ok(MapStep::Linear {
                    matrix: (0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect(),
                })
            }
            MapStep::Permutation { perm } => {
                let mut inv = vec![0; perm.len()];
                for (i, &p) in perm.iter().enumerate() {
                    inv[p] = i;
                }
                Ok(MapStep::Permutation { perm: inv })
            }
        }
    }

    fn as_monomial(&self) -> Option<MonomialMap> {
        match self {
            MapStep::Monomial(m) => Some(m.clone()),
            MapStep::Permutation { perm } => MonomialMap::permutation(perm).ok(),
            _ => None,
        }
    }
}

fn to_matrix(rows: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut sign = 1.0;
    let mut seen = vec![false; perm.len()];
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// A chain of holomorphic maps applied left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoloMapExpr {
    pub dim: usize,
    pub steps: Vec<MapStep>,
}

impl HoloMapExpr {
    pub fn identity(dim: usize) -> Self {
        Self { dim, steps: Vec::new() }
    }

    pub fn from_steps(dim: usize, steps: Vec<MapStep>) -> Result<Self> {
        if let Some(s) = steps.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: s.dim() });
        }
        for s in &steps {
            if let MapStep::Mobius { a } = s {
                if a.iter().flatten().any(|a| a.norm() >= 1.0) {
                    return Err(Error::Config("Möbius parameter must satisfy |a| < 1".into()));
                }
            }
        }
        Ok(Self { dim, steps })
    }

    pub fn monomial(m: MonomialMap) -> Self {
        Self { dim: m.dim(), steps: vec![MapStep::Monomial(m)] }
    }

    /// Disc automorphism `z ↦ (a − z)/(1 − āz)` on one coordinate of ℂⁿ.
    pub fn mobius(dim: usize, coord: usize, a: Complex64) -> Result<Self> {
        let mut params = vec![None; dim];
        params[coord] = Some(a);
        Self::from_steps(dim, vec![MapStep::Mobius { a: params }])
    }

    pub fn linear(matrix: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = matrix.len();
        if matrix.iter().any(|r| r.len() != dim) {
            return Err(Error::Config("linear step must be square".into()));
        }
        Self::from_steps(dim, vec![MapStep::Linear { matrix }])
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &HoloMapExpr) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        Ok(Self { dim: self.dim, steps })
    }

    pub fn apply(&self, z: &[Complex64]) -> Result<Point> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        let mut cur = z.to_vec();
        for s in &self.steps {
            cur = s.apply(&cur)?;
        }
        Ok(cur)
    }

    /// Chain rule: product of the step Jacobians along the orbit of `z`.
    pub fn jacobian_det(&self, z: &[Complex64]) -> Result<Complex64> {
        let mut cur = z.to_vec();
        let mut acc = ONE;
        for s in &self.steps {
            acc *= s.jacobian_det(&cur)?;
            cur = s.apply(&cur)?;
        }
        Ok(acc)
    }

    /// Product of per-step branches of `J^q`. Monomial steps need integral
    /// `q·β`; the other steps use principal branches that are continuous on
    /// the unit polydisc.
    pub fn jacobian_power(&self, z: &[Complex64], q: f64) -> Result<Complex64> {
        if let Some(m) = self.as_monomial() {
            return monomial_branch(&m, q)?.evaluate(z);
        }
        let mut cur = z.to_vec();
        let mut acc = ONE;
        for s in &self.steps {
            acc *= s.jacobian_power(&cur, q)?;
            cur = s.apply(&cur)?;
        }
        Ok(acc)
    }

    pub fn inverse(&self) -> Result<Self> {
        let steps = self.steps.iter().rev().map(|s| s.inverse()).collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: self.dim, steps })
    }

    /// The chain collapsed to one monomial map, when every step is monomial
    /// or a permutation.
    pub fn as_monomial(&self) -> Option<MonomialMap> {
        let mut acc = MonomialMap::identity(self.dim);
        for s in &self.steps {
            let m = s.as_monomial()?;
            acc = m.compose_after(&acc).ok()?;
        }
        Some(acc)
    }

    /// Complex Jacobian matrix by the 4th-order central stencil with real step `h`.
    pub fn jacobian_matrix_fd(&self, z: &[Complex64], h: f64) -> Result<DMatrix<Complex64>> {
        let n = self.dim;
        let mut jac = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for j in 0..n {
            let shifted = |t: f64| -> Result<Point> {
                let mut y = z.to_vec();
                y[j] += Complex64::new(t, 0.0);
                self.apply(&y)
            };
            let (p1, m1, p2, m2) = (shifted(h)?, shifted(-h)?, shifted(2.0 * h)?, shifted(-2.0 * h)?);
            for i in 0..n {
                jac[(i, j)] = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
            }
        }
        Ok(jac)
    }
}

impl From<MonomialMap> for HoloMapExpr {
    fn from(m: MonomialMap) -> Self {
        HoloMapExpr::monomial(m)
    }
}

/// `z^{qβ}` scaled by `|c|^q`, where `J = c z^β`.
pub(crate) fn monomial_branch(m: &MonomialMap, q: f64) -> Result<LaurentPolynomial> {
    let (c, beta) = m.jacobian_monomial()?;
    let mut exps = Vec::with_capacity(beta.dim());
    for &b in &beta.0 {
        let scaled = q * b as f64;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-9 {
            return Err(Error::NoMonomialBranch(format!(
                "(2/p)·β = {q}·{beta} is not an integer vector"
            )));
        }
        exps.push(rounded as i64);
    }
    Ok(LaurentPolynomial::monomial(MultiIndex(exps), Complex64::new(c.norm().powf(q), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn pt(xs: &[f64]) -> Vec<C> {
        xs.iter().map(|&x| C::new(x, 0.0)).collect()
    }

    #[test]
    fn integer_determinants() {
        assert_eq!(integer_det(&[vec![2, 1], vec![1, 1]]), 1);
        assert_eq!(integer_det(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(integer_det(&[vec![1, 2], vec![2, 4]]), 0);
        assert_eq!(integer_det(&[vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 1]]), 0);
        assert_eq!(integer_det(&[vec![0, 0, 1], vec![0, 2, 0], vec![3, 0, 0]]), -6);
    }

    #[test]
    fn shear_jacobians() {
        let f = MonomialMap::shear(3);
        assert_eq!(f.jacobian_monomial().unwrap().1, MultiIndex(vec![3, 0]));
        let g = MonomialMap::shear(-3);
        let j = g.jacobian_det(&pt(&[0.5, 0.2])).unwrap();
        assert!((j - C::new(8.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn singular_exponent_matrix() {
        let m = MonomialMap::new(vec![vec![1, 1], vec![2, 2]], vec![C::new(1.0, 0.0); 2]).unwrap();
        assert_eq!(m.jacobian_det(&pt(&[0.5, 0.5])), Err(Error::SingularExponentMatrix));
    }

    #[test]
    fn inverse_of_shear() {
        let f = MonomialMap::shear(3);
        assert_eq!(f.inverse().unwrap(), MonomialMap::shear(-3));
        let id = f.compose_after(&f.inverse().unwrap()).unwrap();
        assert_eq!(id, MonomialMap::identity(2));
    }

    #[test]
    fn mobius_is_an_involution() {
        let m = HoloMapExpr::mobius(1, 0, C::new(0.3, 0.1)).unwrap();
        let z = [C::new(0.2, -0.4)];
        let back = m.apply(&m.apply(&z).unwrap()).unwrap();
        assert!((back[0] - z[0]).norm() < 1e-14);
    }

    #[test]
    fn permutation_sign_and_det() {
        let m = HoloMapExpr::from_steps(3, vec![MapStep::Permutation { perm: vec![1, 0, 2] }]).unwrap();
        assert_eq!(m.jacobian_det(&pt(&[1.0, 2.0, 3.0])).unwrap(), C::new(-1.0, 0.0));
        assert_eq!(m.as_monomial().unwrap().exponent_det(), -1);
    }

    #[test]
    fn rejects_bad_mobius() {
        assert!(HoloMapExpr::mobius(1, 0, C::new(1.0, 0.0)).is_err());
    }
}
