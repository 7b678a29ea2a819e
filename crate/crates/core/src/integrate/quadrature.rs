//! Tensor quadrature over radial profiles: Gauss–Legendre in every modulus
//! (graph fibers use their exact limits) and the trapezoid rule in every angle.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gauss::gauss_legendre_on;
use crate::error::{Error, Result};
use crate::geometry::{BoundedDomain, Point, RadialProfile};

/// Refuse node sets larger than this.
pub const MAX_NODES: usize = 20_000_000;

/// Quadrature nodes in ℂⁿ with weights for `∫_D · dλ`.
#[derive(Debug, Clone)]
pub struct NodeSet {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sum of the weights, i.e. the quadrature volume of the domain.
    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Modulus nodes with weights that include the polar Jacobian `∏ r_j`.
pub fn radial_rule(leaf: &RadialProfile, nodes: usize) -> Vec<(Vec<f64>, f64)> {
    match leaf {
        RadialProfile::Polydisc { radii } => {
            let mut out = vec![(Vec::new(), 1.0)];
            for &r in radii {
                let rule = gauss_legendre_on(nodes, r);
                out = out
                    .into_iter()
                    .flat_map(|(v, w)| {
                        rule.iter().map(move |&(x, wx)| {
                            let mut v2 = v.clone();
                            v2.push(x);
                            (v2, w * wx * x)
                        })
                    })
                    .collect();
            }
            out
        }
        RadialProfile::Ball { n } => {
            let mut out = Vec::new();
            ball_nodes(*n, nodes, 1.0, Vec::new(), 1.0, &mut out);
            out
        }
        RadialProfile::HartogsGraph { k } => graph_nodes(nodes, |r1| r1.powi(*k as i32)),
        RadialProfile::GraphWithFactor { k } => {
            graph_nodes(nodes, |r1| r1.powi(*k as i32) * (1.0 - r1 * r1).max(0.0).sqrt())
        }
        RadialProfile::Product(parts) => {
            let mut out = vec![(Vec::new(), 1.0)];
            for part in parts {
                let rule = radial_rule(part, nodes);
                out = out
                    .into_iter()
                    .flat_map(|(v, w)| {
                        rule.iter().map(move |(x, wx)| {
                            let mut v2 = v.clone();
                            v2.extend_from_slice(x);
                            (v2, w * wx)
                        })
                    })
                    .collect();
            }
            out
        }
    }
}

fn ball_nodes(
    remaining: usize,
    nodes: usize,
    radius_sq: f64,
    prefix: Vec<f64>,
    weight: f64,
    out: &mut Vec<(Vec<f64>, f64)>,
) {
    if remaining == 0 {
        out.push((prefix, weight));
        return;
    }
    let bound = radius_sq.max(0.0).sqrt();
    for (x, wx) in gauss_legendre_on(nodes, bound) {
        let mut v = prefix.clone();
        v.push(x);
        ball_nodes(remaining - 1, nodes, radius_sq - x * x, v, weight * wx * x, out);
    }
}

fn graph_nodes(nodes: usize, fiber: impl Fn(f64) -> f64) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::with_capacity(nodes * nodes);
    for (r1, w1) in gauss_legendre_on(nodes, 1.0) {
        for (r2, w2) in gauss_legendre_on(nodes, fiber(r1)) {
            out.push((vec![r1, r2], w1 * w2 * r1 * r2));
        }
    }
    out
}

/// Full node set on `domain`: radial rule times `angular` trapezoid nodes per
/// coordinate. With `angular == 1` each angle contributes the factor `2π` at
/// θ = 0, exact for integrands that depend only on the moduli.
pub fn domain_nodes(domain: &BoundedDomain, radial: usize, angular: usize) -> Result<NodeSet> {
    if radial == 0 || angular == 0 {
        return Err(Error::Config("node counts must be positive".into()));
    }
    let n = domain.dimension();
    let rad = radial_rule(domain.profile(), radial);
    let total = (angular as f64).powi(n as i32) * rad.len() as f64;
    if total > MAX_NODES as f64 {
        return Err(Error::Unsupported(format!(
            "{total} quadrature nodes exceed the limit of {MAX_NODES}"
        )));
    }
    let dtheta = 2.0 * PI / angular as f64;
    let phases: Vec<Complex64> = (0..angular).map(|k| Complex64::from_polar(1.0, k as f64 * dtheta)).collect();
    let mut points = Vec::with_capacity(total as usize);
    let mut weights = Vec::with_capacity(total as usize);
    let angle_weight = dtheta.powi(n as i32);
    let mut idx = vec![0usize; n];
    for (r, w) in &rad {
        idx.iter_mut().for_each(|i| *i = 0);
        loop {
            points.push(r.iter().zip(&idx).map(|(&rj, &k)| phases[k] * rj).collect());
            weights.push(w * angle_weight);
            let mut j = 0;
            while j < n {
                idx[j] += 1;
                if idx[j] < angular {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == n {
                break;
            }
        }
    }
    Ok(NodeSet { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes_from_nodes() {
        let cases = [
            ("disc", PI),
            ("ball(2)", PI * PI / 2.0),
            ("hartogs(3)", PI * PI / 4.0),
            ("fk_ball_prime(3)", PI * PI / 20.0),
            ("polydisc(1,0.5)", PI * PI / 4.0),
        ];
        for (label, exact) in cases {
            let d = BoundedDomain::parse(label).unwrap();
            let ns = domain_nodes(&d, 48, 1).unwrap();
            assert!((ns.volume() - exact).abs() < 1e-6 * exact, "{label}: {}", ns.volume());
        }
    }

    #[test]
    fn nodes_are_members() {
        let d = BoundedDomain::parse("ball(2)*hartogs(2)").unwrap();
        let ns = domain_nodes(&d, 6, 3).unwrap();
        assert_eq!(ns.len(), 6usize.pow(4) * 3usize.pow(4));
        assert!(ns.points.iter().all(|z| d.contains(z)));
    }
}
