//! `p`-norms `‖φ‖_p = (∫_D |φ|^p dλ)^{1/p}` by closed form, tensor quadrature
//! and Monte Carlo.
//!
//! For `0 < p < 1` the same quantity is computed; there it is only a
//! quasi-norm and `d(φ, ψ) = ‖φ − ψ‖_p^p` is the metric, so every result also
//! carries `integral = value^p`.

mod closed;
pub mod gauss;
mod montecarlo;
pub mod quadrature;

pub use closed::{ln_monomial_integral, monomial_integral};
pub use montecarlo::{mc_integral, Estimate};
pub use quadrature::{domain_nodes, radial_rule, NodeSet};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{Holomorphic, LaurentPolynomial, MultiIndex};
use crate::geometry::BoundedDomain;

/// How a norm was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// A computed `p`-norm with its error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PNormResult {
    pub value: f64,
    pub p: f64,
    pub method: NormMethod,
    /// Zero exactly for closed forms. Quadrature reports a node-halving
    /// discrepancy, Monte Carlo a delta-method standard error.
    pub std_error: f64,
    /// `value^p`.
    pub integral: f64,
    pub integral_std_error: f64,
    pub samples_or_nodes: u64,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PNormResult {
    fn from_integral(integral: f64, integral_err: f64, p: f64, method: NormMethod) -> Self {
        let value = integral.max(0.0).powf(1.0 / p);
        let std_error = if integral > 0.0 {
            value / integral * integral_err / p
        } else {
            integral_err.powf(1.0 / p)
        };
        Self {
            value,
            p,
            method,
            std_error,
            integral,
            integral_std_error: integral_err,
            samples_or_nodes: 0,
            seed: None,
            warnings: Vec::new(),
        }
    }

    /// `|a − b| / sqrt(σ_a² + σ_b²)` on the norm scale (infinite when both are exact and differ).
    pub fn z_score(&self, other: &PNormResult) -> f64 {
        let diff = (self.value - other.value).abs();
        let sigma = self.std_error.hypot(other.std_error);
        if sigma == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / sigma
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("p must be a positive real, got {p}")))
    }
}

/// Exact `‖z^α‖_p` on a catalog domain.
pub fn monomial_norm_closed(domain: &BoundedDomain, alpha: &MultiIndex, p: f64) -> Result<PNormResult> {
    check_p(p)?;
    let integral = monomial_integral(domain, &alpha.0, p)?;
    Ok(PNormResult::from_integral(integral, 0.0, p, NormMethod::ClosedForm))
}

/// Exact norm of a Laurent polynomial when one is available: single terms for
/// any `p`, and arbitrary sums for `p = 2` (monomials are orthogonal on
/// Reinhardt domains).
pub fn laurent_norm_closed(domain: &BoundedDomain, f: &LaurentPolynomial, p: f64) -> Result<PNormResult> {
    check_p(p)?;
    let lift = |a: &MultiIndex| if a.dim() == 0 { MultiIndex::zeros(domain.dimension()) } else { a.clone() };
    let integral = if let Some((alpha, c)) = f.as_monomial() {
        c.norm().powf(p) * monomial_integral(domain, &lift(alpha).0, p)?
    } else if f.is_zero() {
        0.0
    } else if p == 2.0 {
        let mut s = 0.0;
        for (alpha, c) in f.terms() {
            s += c.norm_sqr() * monomial_integral(domain, &lift(alpha).0, 2.0)?;
        }
        s
    } else {
        return Err(Error::Unsupported(format!(
            "no closed form for a {}-term polynomial at p = {p}",
            f.len()
        )));
    };
    Ok(PNormResult::from_integral(integral, 0.0, p, NormMethod::ClosedForm))
}

/// Relative floor on quadrature error estimates, above the rounding of
/// node sums and of the log-Gamma closed forms they are compared with.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Quadrature norm of a Laurent polynomial.
///
/// Single terms are integrated factor by factor over the product structure
/// (their modulus does not depend on the angles). Otherwise the full tensor
/// rule is used and `angular_nodes` must be at least `2·max|α_j| + 1`. The
/// error estimate is the change when the radial node count is halved.
pub fn quadrature_norm(
    domain: &BoundedDomain,
    f: &LaurentPolynomial,
    p: f64,
    radial_nodes: usize,
    angular_nodes: usize,
) -> Result<PNormResult> {
    check_p(p)?;
    if radial_nodes < 2 {
        return Err(Error::Config("at least two radial nodes are needed".into()));
    }
    let half = (radial_nodes / 2).max(1);
    let (fine, coarse, nodes) = if let Some((alpha, c)) = f.as_monomial() {
        let alpha = if alpha.dim() == 0 { MultiIndex::zeros(domain.dimension()) } else { alpha.clone() };
        let scale = c.norm().powf(p);
        let q = |n: usize| scale * monomial_quadrature(domain, &alpha.0, p, n);
        let count: usize = domain
            .profile()
            .leaves()
            .iter()
            .map(|(_, l)| radial_rule(l, radial_nodes).len())
            .sum();
        (q(radial_nodes), q(half), count as u64)
    } else if f.is_zero() {
        (0.0, 0.0, 0)
    } else {
        let need = 2 * f.max_abs_exponent() as usize + 1;
        if angular_nodes < need {
            return Err(Error::Config(format!(
                "angular_nodes = {angular_nodes} is below 2·max|exponent|+1 = {need}"
            )));
        }
        let q = |n: usize| -> Result<(f64, usize)> {
            let ns = domain_nodes(domain, n, angular_nodes)?;
            let mut s = 0.0;
            for (z, w) in ns.points.iter().zip(&ns.weights) {
                s += w * f.evaluate(z)?.norm().powf(p);
            }
            Ok((s, ns.len()))
        };
        let (a, count) = q(radial_nodes)?;
        let (b, _) = q(half)?;
        (a, b, count as u64)
    };
    let err = (fine - coarse).abs().max(ROUNDING_FLOOR * fine.abs()).max(f64::MIN_POSITIVE);
    let mut res = PNormResult::from_integral(fine, err, p, NormMethod::Quadrature);
    res.samples_or_nodes = nodes;
    Ok(res)
}

fn monomial_quadrature(domain: &BoundedDomain, alpha: &[i64], p: f64, nodes: usize) -> f64 {
    let mut total = 1.0;
    for (off, leaf) in domain.profile().leaves() {
        let d = leaf.dimension();
        let a = &alpha[off..off + d];
        let s: f64 = radial_rule(leaf, nodes)
            .iter()
            .map(|(r, w)| w * r.iter().zip(a).map(|(rj, &aj)| rj.powf(p * aj as f64)).product::<f64>())
            .sum();
        total *= s * (2.0 * PI).powi(d as i32);
    }
    total
}

/// Monte Carlo norm of any holomorphic function.
pub fn mc_norm_fn<H: Holomorphic>(
    domain: &BoundedDomain,
    f: &H,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<PNormResult> {
    check_p(p)?;
    if samples < 1000 {
        return Err(Error::Config(format!("Monte Carlo needs at least 1000 samples, got {samples}")));
    }
    let est = mc_integral(domain, samples, seed, |z| Ok(f.eval(z)?.norm().powf(p)))?;
    let mut res = PNormResult::from_integral(est.value, est.std_error, p, NormMethod::MonteCarlo);
    res.samples_or_nodes = samples as u64;
    res.seed = Some(seed);
    Ok(res)
}

/// Monte Carlo norm of a Laurent polynomial, with a pole-proximity warning
/// when some term has `|z^α|^{2p}` non-integrable (the sample variance then
/// does not converge).
pub fn mc_norm(domain: &BoundedDomain, f: &LaurentPolynomial, p: f64, samples: usize, seed: u64) -> Result<PNormResult> {
    let mut res = mc_norm_fn(domain, f, p, samples, seed)?;
    if let Some(w) = pole_warning(domain, f, p) {
        res.warnings.push(w);
    }
    Ok(res)
}

/// Warning text when `|f|^p` has infinite variance on `domain`.
pub fn pole_warning(domain: &BoundedDomain, f: &LaurentPolynomial, p: f64) -> Option<String> {
    for (alpha, _) in f.terms() {
        if alpha.dim() == 0 || alpha.0.iter().all(|&a| a >= 0) {
            continue;
        }
        if let Err(Error::DivergentIntegral(_)) = monomial_integral(domain, &alpha.0, 2.0 * p) {
            return Some(format!(
                "pole proximity: |z^{alpha}|^p has infinite variance near the coordinate axes; \
                 the Monte Carlo error bar is unreliable, prefer quadrature"
            ));
        }
    }
    None
}

/// `count` random monomials `z^α` with `|α_j| ≤ max_exp` that are holomorphic
/// on `domain` (negative exponents only on nonvanishing coordinates) and have
/// a finite integral of `|z^α|^q` for every `q` in `integrable_at`.
pub fn random_admissible_monomials(
    domain: &BoundedDomain,
    integrable_at: &[f64],
    count: usize,
    max_exp: i64,
    seed: u64,
) -> Result<Vec<MultiIndex>> {
    use rand::Rng;
    let n = domain.dimension();
    let free = domain.nonvanishing_coords();
    let mut rng = crate::rng::substream(seed, 0);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 1000 * count.max(1) {
            return Err(Error::Config(format!(
                "could not draw {count} admissible monomials on {}",
                domain.label()
            )));
        }
        let alpha: Vec<i64> = (0..n)
            .map(|j| {
                let lo = if free.contains(&j) { -max_exp } else { 0 };
                rng.random_range(lo..=max_exp)
            })
            .collect();
        if integrable_at.iter().all(|&q| monomial_integral(domain, &alpha, q).is_ok()) {
            out.push(MultiIndex(alpha));
        }
    }
    Ok(out)
}
