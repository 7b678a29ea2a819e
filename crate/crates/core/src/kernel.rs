//! Finite-span estimates of the `p`-Bergman kernel
//! `B_{D,p}(z) = sup |φ(z)|² / ‖φ‖_p²`.
//!
//! Every estimate is a supremum over a finite monomial span and therefore a
//! lower bound for the kernel on the whole space.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{monomial_value, MultiIndex};
use crate::geometry::{boundary_distance, BoundedDomain, Point};
use crate::integrate::{domain_nodes, monomial_integral};
use crate::rng::substream;

/// A monomial span used as a finite stand-in for `A^p(D)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub indices: Vec<MultiIndex>,
    pub domain: String,
    pub p: f64,
}

impl BasisSpec {
    /// Validates that the indices are distinct, holomorphic on `domain`
    /// (negative exponents only on coordinates the domain excludes from zero)
    /// and of finite `p`-norm.
    pub fn new(domain: &BoundedDomain, indices: Vec<MultiIndex>, p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Config(format!("p must be a positive real, got {p}")));
        }
        if indices.is_empty() {
            return Err(Error::InvalidBasis("the span is empty".into()));
        }
        let nonvanishing = domain.nonvanishing_coords();
        for (i, a) in indices.iter().enumerate() {
            if a.dim() != domain.dimension() {
                return Err(Error::DimensionMismatch { expected: domain.dimension(), got: a.dim() });
            }
            if indices[..i].contains(a) {
                return Err(Error::InvalidBasis(format!("z^{a} appears twice")));
            }
            if let Some(j) = (0..a.dim()).find(|&j| a.0[j] < 0 && !nonvanishing.contains(&j)) {
                return Err(Error::InvalidBasis(format!(
                    "z^{a} has a pole on {{z{} = 0}}, which meets {}",
                    j + 1,
                    domain.label()
                )));
            }
            if let Err(e) = monomial_integral(domain, &a.0, p) {
                return Err(Error::InvalidBasis(format!("z^{a} is not in A^{p}({}): {e}", domain.label())));
            }
        }
        Ok(Self { indices, domain: domain.label().to_string(), p })
    }

    /// All `z^α` with `0 ≤ α_j ≤ degree`.
    pub fn tensor(domain: &BoundedDomain, degree: u32, p: f64) -> Result<Self> {
        Self::new(domain, MultiIndex::tensor_degree(domain.dimension(), degree), p)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn check_domain(&self, domain: &BoundedDomain) -> Result<()> {
        if self.domain != domain.label() {
            return Err(Error::Config(format!(
                "basis was built for {} but the domain is {}",
                self.domain,
                domain.label()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub restarts: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelEstimate {
    pub value: f64,
    pub z: Point,
    pub basis: BasisSpec,
    pub optimizer_report: OptimizerReport,
    /// Always true: the sup is taken over a finite span.
    pub is_lower_bound: bool,
}

/// Settings for [`pbergman_min_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub radial_nodes: usize,
    /// Trapezoid nodes per angle; chosen from the exponent span when absent.
    pub angular_nodes: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    /// Random starting points for `p < 1`, on top of the `p = 1` and `p = 2` solutions.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { radial_nodes: 48, angular_nodes: None, tol: 1e-10, max_iter: 200, restarts: 4, seed: 0 }
    }
}

/// Exact `p = 2` kernel of the span: `Σ |z^α|² / ‖z^α‖₂²`, using that
/// monomials are orthogonal on Reinhardt domains.
pub fn bergman2_gram(domain: &BoundedDomain, basis: &BasisSpec, z: &[Complex64]) -> Result<KernelEstimate> {
    if basis.p != 2.0 {
        return Err(Error::Config(format!("the Gram formula needs p = 2, basis has p = {}", basis.p)));
    }
    basis.check_domain(domain)?;
    let mut value = 0.0;
    for a in &basis.indices {
        value += monomial_value(&a.0, z)?.norm_sqr() / monomial_integral(domain, &a.0, 2.0)?;
    }
    Ok(KernelEstimate {
        value,
        z: z.to_vec(),
        basis: basis.clone(),
        optimizer_report: OptimizerReport { iterations: 0, final_gradient_norm: 0.0, restarts: 0, converged: true },
        is_lower_bound: true,
    })
}

/// `sup |φ(z)|²/‖φ‖_p²` over the span, as `1/min‖φ‖_p²` subject to `φ(z) = 1`.
///
/// The integral is discretized once on a tensor quadrature grid. The
/// constraint is eliminated by solving for the coefficient with the largest
/// `|z^α|`, and the remaining real parameters are optimized by damped Newton
/// steps on `Σ w (|φ|² + ε²)^{p/2}` with Armijo backtracking. The final value
/// is evaluated without smoothing.
pub fn pbergman_min_norm(
    domain: &BoundedDomain,
    basis: &BasisSpec,
    z: &[Complex64],
    p: f64,
    cfg: &OptimizerConfig,
) -> Result<KernelEstimate> {
    basis.check_domain(domain)?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Config(format!("p must be a positive real, got {p}")));
    }
    if !domain.contains(z) {
        return Err(Error::Precondition("the evaluation point is not in the domain".into()));
    }
    let e: Vec<Complex64> = basis.indices.iter().map(|a| monomial_value(&a.0, z)).collect::<Result<_>>()?;
    let pivot = (0..e.len())
        .max_by(|&i, &j| e[i].norm().partial_cmp(&e[j].norm()).unwrap())
        .unwrap();
    if e[pivot].norm() == 0.0 {
        return Err(Error::NoBasisSupport);
    }
    let report = |iterations, g, restarts, converged| OptimizerReport {
        iterations,
        final_gradient_norm: g,
        restarts,
        converged,
    };
    if basis.len() == 1 {
        let a = &basis.indices[0].0;
        let norm_p = monomial_integral(domain, a, p)?;
        return Ok(KernelEstimate {
            value: e[0].norm_sqr() / norm_p.powf(2.0 / p),
            z: z.to_vec(),
            basis: basis.clone(),
            optimizer_report: report(0, 0.0, 0, true),
            is_lower_bound: true,
        });
    }

    let span = basis
        .indices
        .iter()
        .flat_map(|a| a.0.iter().copied())
        .fold((i64::MAX, i64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let width = (span.1 - span.0).max(0) as usize;
    let angular = cfg.angular_nodes.unwrap_or(if p == 2.0 { 2 * width + 1 } else { 4 * width + 9 });
    let nodes = domain_nodes(domain, cfg.radial_nodes, angular)?;
    let problem = Problem::new(&nodes.points, nodes.weights, &basis.indices, &e, pivot)?;

    let zero = DVector::zeros(problem.dim());
    let quad = problem.minimize(2.0, zero, cfg, 0.0);
    let eps = 1e-8 * (problem.objective_raw(&quad.x, 2.0) / problem.volume).sqrt();
    let mut best = if p == 2.0 { quad.clone() } else { problem.minimize(p, quad.x.clone(), cfg, eps) };
    let mut restarts = 0;
    if p < 1.0 {
        let mut starts = vec![problem.minimize(1.0, quad.x.clone(), cfg, eps).x];
        let mut rng = substream(cfg.seed, 0);
        let scale = quad.x.norm().max(1.0);
        for _ in 0..cfg.restarts {
            starts.push(DVector::from_fn(problem.dim(), |_, _| scale * (2.0 * rng.random::<f64>() - 1.0)));
        }
        for x0 in starts {
            restarts += 1;
            let run = problem.minimize(p, x0, cfg, eps);
            if problem.objective_raw(&run.x, p) < problem.objective_raw(&best.x, p) {
                best = run;
            }
        }
    }
    let min_norm = problem.objective_raw(&best.x, p).powf(1.0 / p);
    Ok(KernelEstimate {
        value: 1.0 / (min_norm * min_norm),
        z: z.to_vec(),
        basis: basis.clone(),
        optimizer_report: report(best.iterations, best.grad_norm, restarts, best.converged),
        is_lower_bound: true,
    })
}

/// One point of a [`boundary_probe`] path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbePoint {
    pub estimate: KernelEstimate,
    pub boundary_distance: f64,
    /// `value · distance²`, the blow-up-rate diagnostic.
    pub scaled: f64,
}

/// Kernel estimates along a path of interior points.
pub fn boundary_probe(
    domain: &BoundedDomain,
    path: &[Point],
    basis: &BasisSpec,
    p: f64,
    cfg: &OptimizerConfig,
) -> Result<Vec<ProbePoint>> {
    path.iter()
        .map(|z| {
            let estimate = pbergman_min_norm(domain, basis, z, p, cfg)?;
            let d = boundary_distance(domain, z, 1e-9).distance;
            let scaled = estimate.value * d * d;
            Ok(ProbePoint { estimate, boundary_distance: d, scaled })
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Run {
    x: DVector<f64>,
    iterations: usize,
    grad_norm: f64,
    converged: bool,
}

/// Values of `φ = a + B t` at the quadrature nodes, with `t ∈ ℂ^{m−1}`
/// stored as the real vector `(Re t, Im t)`.
struct Problem {
    a: Vec<Complex64>,
    b: DMatrix<Complex64>,
    w: Vec<f64>,
    volume: f64,
}

impl Problem {
    fn new(points: &[Point], w: Vec<f64>, indices: &[MultiIndex], e: &[Complex64], pivot: usize) -> Result<Self> {
        let m = indices.len();
        let others: Vec<usize> = (0..m).filter(|&j| j != pivot).collect();
        let ep = e[pivot];
        let mut a = Vec::with_capacity(points.len());
        let mut b = DMatrix::zeros(points.len(), m - 1);
        for (i, z) in points.iter().enumerate() {
            let vp = monomial_value(&indices[pivot].0, z)?;
            a.push(vp / ep);
            for (c, &j) in others.iter().enumerate() {
                b[(i, c)] = monomial_value(&indices[j].0, z)? - e[j] / ep * vp;
            }
        }
        let volume = w.iter().sum();
        Ok(Self { a, b, w, volume })
    }

    fn dim(&self) -> usize {
        2 * self.b.ncols()
    }

    fn values(&self, x: &DVector<f64>) -> Vec<Complex64> {
        let k = self.b.ncols();
        let t: Vec<Complex64> = (0..k).map(|j| Complex64::new(x[j], x[k + j])).collect();
        (0..self.a.len())
            .map(|i| self.a[i] + (0..k).map(|j| self.b[(i, j)] * t[j]).sum::<Complex64>())
            .collect()
    }

    /// `Σ w |φ|^p`.
    fn objective_raw(&self, x: &DVector<f64>, p: f64) -> f64 {
        self.values(x).iter().zip(&self.w).map(|(f, w)| w * f.norm().powf(p)).sum()
    }

    fn objective(&self, x: &DVector<f64>, p: f64, eps: f64) -> f64 {
        self.values(x)
            .iter()
            .zip(&self.w)
            .map(|(f, w)| w * (f.norm_sqr() + eps * eps).powf(p / 2.0))
            .sum()
    }

    fn gradient_hessian(&self, x: &DVector<f64>, p: f64, eps: f64) -> (DVector<f64>, DMatrix<f64>) {
        let k = self.b.ncols();
        let n = 2 * k;
        let q = p / 2.0 - 1.0;
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        let mut r = DVector::zeros(n);
        let mut s1 = DVector::zeros(n);
        let mut s2 = DVector::zeros(n);
        for (i, f) in self.values(x).iter().enumerate() {
            let u = f.norm_sqr() + eps * eps;
            let uq = u.powf(q);
            for j in 0..k {
                let bij = self.b[(i, j)];
                let fb = f.conj() * bij;
                r[j] = fb.re;
                r[k + j] = -fb.im;
                s1[j] = bij.re;
                s1[k + j] = -bij.im;
                s2[j] = bij.im;
                s2[k + j] = bij.re;
            }
            let w = self.w[i];
            g.axpy(w * p * uq, &r, 1.0);
            h.ger(w * 2.0 * p * q * uq / u, &r, &r, 1.0);
            h.ger(w * p * uq, &s1, &s1, 1.0);
            h.ger(w * p * uq, &s2, &s2, 1.0);
        }
        (g, h)
    }

    fn minimize(&self, p: f64, mut x: DVector<f64>, cfg: &OptimizerConfig, eps: f64) -> Run {
        let n = self.dim();
        let mut f = self.objective(&x, p, eps);
        let mut grad_norm = f64::INFINITY;
        for iter in 0..cfg.max_iter {
            let (g, h) = self.gradient_hessian(&x, p, eps);
            grad_norm = g.norm();
            if grad_norm <= cfg.tol * (1.0 + f) {
                return Run { x, iterations: iter, grad_norm, converged: true };
            }
            let dir = newton_direction(&h, &g, n);
            let slope = g.dot(&dir);
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &x + step * &dir;
                let fc = self.objective(&cand, p, eps);
                if fc <= f + 1e-4 * step * slope {
                    x = cand;
                    f = fc;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                return Run { x, iterations: iter, grad_norm, converged: false };
            }
        }
        Run { x, iterations: cfg.max_iter, grad_norm, converged: false }
    }
}

/// Descent direction from `(H + μI) d = −g`, raising `μ` until the
/// factorization succeeds; falls back to steepest descent.
fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>, n: usize) -> DVector<f64> {
    let scale = h.diagonal().amax().max(f64::MIN_POSITIVE);
    let mut mu = 0.0;
    for _ in 0..20 {
        let shifted = h + DMatrix::identity(n, n) * mu;
        if let Some(chol) = shifted.cholesky() {
            let d = -chol.solve(g);
            if g.dot(&d) < 0.0 {
                return d;
            }
        }
        mu = if mu == 0.0 { 1e-10 * scale } else { mu * 10.0 };
    }
    -g / scale
}
