//! Exact representations of the functions and maps the crate manipulates.

mod holo;
mod laurent;
mod maps;

pub use holo::{HoloFn, Holomorphic, Weight};
pub use laurent::{monomial_value, LaurentPolynomial, MultiIndex};
pub use maps::{HoloMapExpr, MapStep, MonomialMap};

use crate::error::{Error, Result};

/// Laurent monomial `z^{(2/p)β}` that is a single-valued branch of
/// `J_map^{2/p}` up to a unimodular constant, where `J_map = c·z^β`.
///
/// The coefficient is `|c|^{2/p}`, so `|branch|^p = |J_map|²` holds exactly.
pub fn weight_branch(map: &HoloMapExpr, p: f64) -> Result<LaurentPolynomial> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::Config(format!("p must be positive, got {p}")));
    }
    let m = map.as_monomial().ok_or_else(|| {
        Error::NoMonomialBranch("the map's Jacobian is not a Laurent monomial".into())
    })?;
    maps::monomial_branch(&m, 2.0 / p)
}

/// Symbolic pullback `φ ∘ inner`: each `z^α` becomes `w^{Eᵀα}` with
/// coefficient multiplied by `∏ c_i^{α_i}`.
pub fn compose(outer: &LaurentPolynomial, inner: &MonomialMap) -> Result<LaurentPolynomial> {
    let n = inner.dim();
    if outer.dim() != 0 && outer.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: outer.dim() });
    }
    let terms = outer.terms().map(|(alpha, c)| {
        if alpha.dim() == 0 {
            return (MultiIndex::zeros(n), *c);
        }
        let mut exps = vec![0i64; n];
        let mut coeff = *c;
        for (i, &a) in alpha.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            coeff *= inner.coeffs[i].powi(a as i32);
            for (l, slot) in exps.iter_mut().enumerate() {
                *slot += a * inner.exponents[i][l];
            }
        }
        (MultiIndex(exps), coeff)
    });
    LaurentPolynomial::from_terms(n, terms.collect::<Vec<_>>())
}

/// Maps of the counterexample construction on ℂ⁴.
pub mod counterexample {
    use super::MonomialMap;

    /// `F(z) = (z_1, z_1^k z_2, z_3, z_3^{-k} z_4)`, from `ball × hartogs(k)` to `fk_ball_prime(k) × Δ²`.
    pub fn forward(k: i64) -> MonomialMap {
        MonomialMap::block_diag(&MonomialMap::shear(k), &MonomialMap::shear(-k))
    }

    /// `G(w) = (w_1, w_1^{-k} w_2, w_3, w_3^k w_4)`, the inverse of [`forward`].
    pub fn backward(k: i64) -> MonomialMap {
        MonomialMap::block_diag(&MonomialMap::shear(-k), &MonomialMap::shear(k))
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
    fn forward_jacobian_value() {
        let f = counterexample::forward(3);
        let j = f.jacobian_det(&pt(&[0.3, 0.2, 0.5, 0.05])).unwrap();
        assert!((j - C::new(0.216, 0.0)).norm() < 1e-14);
        assert_eq!(f.jacobian_monomial().unwrap().1, MultiIndex(vec![3, 0, -3, 0]));
    }

    #[test]
    fn identity_jacobian() {
        let id = HoloMapExpr::identity(3);
        assert_eq!(id.jacobian_det(&pt(&[0.1, 0.2, 0.3])).unwrap(), C::new(1.0, 0.0));
        assert_eq!(weight_branch(&id, 0.7).unwrap(), LaurentPolynomial::one(3));
    }

    #[test]
    fn branches_of_the_counterexample() {
        let g: HoloMapExpr = counterexample::backward(3).into();
        assert_eq!(weight_branch(&g, 3.0).unwrap(), LaurentPolynomial::monomial_unit(&[-2, 0, 2, 0]));
        let f: HoloMapExpr = counterexample::forward(3).into();
        assert_eq!(weight_branch(&f, 3.0).unwrap(), LaurentPolynomial::monomial_unit(&[2, 0, -2, 0]));
    }

    #[test]
    fn non_integral_branch_rejected() {
        let g: HoloMapExpr = counterexample::backward(3).into();
        assert!(matches!(weight_branch(&g, 4.0), Err(Error::NoMonomialBranch(_))));
    }

    #[test]
    fn pullback_examples() {
        let g = counterexample::backward(3);
        let z1sq = LaurentPolynomial::monomial_unit(&[2, 0, 0, 0]);
        assert_eq!(compose(&z1sq, &g).unwrap(), z1sq);
        let z2 = LaurentPolynomial::coordinate(4, 1);
        assert_eq!(compose(&z2, &g).unwrap(), LaurentPolynomial::monomial_unit(&[-3, 1, 0, 0]));
        let one = LaurentPolynomial::one(4);
        assert_eq!(compose(&one, &g).unwrap(), one);
    }
}
