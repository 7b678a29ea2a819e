//! Closed-form monomial integrals on the catalog domains.

use std::f64::consts::PI;

use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::{BoundedDomain, RadialProfile};

/// `ln ∫_D |z^α|^p dλ`, computed factor by factor over the radial profile.
///
/// Gamma and Beta values go through their logarithms so large exponents do
/// not overflow. Fails with [`Error::DivergentIntegral`] when a radial
/// exponent after fiber integration is `≤ −1`.
pub fn ln_monomial_integral(domain: &BoundedDomain, alpha: &[i64], p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::Config(format!("p must be positive, got {p}")));
    }
    if alpha.len() != domain.dimension() {
        return Err(Error::DimensionMismatch { expected: domain.dimension(), got: alpha.len() });
    }
    let mut total = 0.0;
    for (off, leaf) in domain.profile().leaves() {
        let d = leaf.dimension();
        let a: Vec<f64> = alpha[off..off + d].iter().map(|&e| p * e as f64).collect();
        total += ln_leaf_integral(leaf, &a, off)?;
    }
    Ok(total)
}

/// `∫_D |z^α|^p dλ`.
pub fn monomial_integral(domain: &BoundedDomain, alpha: &[i64], p: f64) -> Result<f64> {
    Ok(ln_monomial_integral(domain, alpha, p)?.exp())
}

fn divergent(what: &str, coord: usize, value: f64) -> Error {
    Error::DivergentIntegral(format!(
        "{what} at coordinate {}: effective radial exponent {} must exceed -1",
        coord + 1,
        value - 1.0
    ))
}

/// `a` holds `p·α_j` for the leaf's coordinates.
fn ln_leaf_integral(leaf: &RadialProfile, a: &[f64], off: usize) -> Result<f64> {
    let ln2pi = (2.0 * PI).ln();
    match leaf {
        RadialProfile::Polydisc { radii } => {
            let mut s = 0.0;
            for (j, (&aj, &r)) in a.iter().zip(radii).enumerate() {
                let e = aj + 2.0;
                if e <= 0.0 {
                    return Err(divergent("polydisc", off + j, e));
                }
                s += ln2pi + e * r.ln() - e.ln();
            }
            Ok(s)
        }
        RadialProfile::Ball { n } => {
            let mut s = *n as f64 * PI.ln();
            let mut total = 0.0;
            for (j, &aj) in a.iter().enumerate() {
                if aj + 2.0 <= 0.0 {
                    return Err(divergent("ball", off + j, aj + 2.0));
                }
                s += ln_gamma(aj / 2.0 + 1.0);
                total += aj;
            }
            Ok(s - ln_gamma(*n as f64 + total / 2.0 + 1.0))
        }
        RadialProfile::HartogsGraph { k } => {
            let k = *k as f64;
            let fiber = a[1] + 2.0;
            if fiber <= 0.0 {
                return Err(divergent("graph fiber", off + 1, fiber));
            }
            let lead = a[0] + k * fiber + 2.0;
            if lead <= 0.0 {
                return Err(divergent("graph base", off, lead));
            }
            Ok(2.0 * ln2pi - fiber.ln() - lead.ln())
        }
        RadialProfile::GraphWithFactor { k } => {
            let k = *k as f64;
            let fiber = a[1] + 2.0;
            if fiber <= 0.0 {
                return Err(divergent("graph fiber", off + 1, fiber));
            }
            let lead = a[0] + k * fiber + 2.0;
            if lead <= 0.0 {
                return Err(divergent("graph base", off, lead));
            }
            Ok(2.0 * ln2pi - fiber.ln() + 0.5f64.ln() + ln_beta(lead / 2.0, (a[1] + 4.0) / 2.0))
        }
        RadialProfile::Product(parts) => {
            let mut s = 0.0;
            let mut o = 0;
            for part in parts {
                let d = part.dimension();
                s += ln_leaf_integral(part, &a[o..o + d], off + o)?;
                o += d;
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(s: &str) -> BoundedDomain {
        BoundedDomain::parse(s).unwrap()
    }

    #[test]
    fn disc_area() {
        let v = monomial_integral(&dom("disc"), &[0], 1.0).unwrap();
        assert!((v - PI).abs() < 1e-14);
    }

    #[test]
    fn punctured_disc_inverse() {
        let v = monomial_integral(&dom("punctured_disc"), &[-1], 1.0).unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn ball_dirichlet_value() {
        let v = monomial_integral(&dom("ball(2)"), &[2, 0], 3.0).unwrap();
        assert!((v - PI * PI / 20.0).abs() < 1e-13);
    }

    #[test]
    fn hartogs_volume() {
        let d = dom("hartogs(3)");
        for p in [0.5, 1.0, 3.0] {
            let v = monomial_integral(&d, &[0, 0], p).unwrap();
            assert!((v - PI * PI / 4.0).abs() < 1e-13);
        }
        let v = monomial_integral(&d, &[1, 1], 2.0).unwrap();
        assert!((v - (2.0 * PI).powi(2) / 64.0).abs() < 1e-13);
    }

    #[test]
    fn fk_ball_prime_volume() {
        let v = monomial_integral(&dom("fk_ball_prime(3)"), &[0, 0], 3.0).unwrap();
        assert!((v - PI * PI / 20.0).abs() < 1e-13);
    }

    #[test]
    fn divergence_detected() {
        let d = dom("punctured_disc");
        assert!(matches!(monomial_integral(&d, &[-1], 2.0), Err(Error::DivergentIntegral(_))));
        let h = dom("hartogs(3)");
        assert!(matches!(monomial_integral(&h, &[-9, 0], 1.0), Err(Error::DivergentIntegral(_))));
        assert!(monomial_integral(&h, &[-7, 0], 1.0).is_ok());
    }

    #[test]
    fn punctures_do_not_change_values() {
        let d = dom("ball(2)*hartogs(3)");
        let dp = d.with_exclusions(&[0]).unwrap();
        let a = monomial_integral(&d, &[1, 2, -1, 0], 3.0).unwrap();
        let b = monomial_integral(&dp, &[1, 2, -1, 0], 3.0).unwrap();
        assert_eq!(a, b);
    }
}
