//! Boundary-distance and closure probes.
//!
//! For a Reinhardt domain the distance from `z` to the domain (or to its
//! complement) equals the distance from the modulus vector `|z|` to the
//! corresponding region of moduli, since `|z_j − w_j| ≥ ||z_j| − |w_j||` with
//! equality when the phases agree. Both probes therefore search the real
//! modulus space, reflecting negative coordinates through zero.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::{BoundedDomain, RadialProfile};
use crate::rng::substream;

/// Result of [`boundary_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryDistance {
    /// Distance to the boundary (inside) or to the domain (outside).
    pub distance: f64,
    /// Whether the query point is a member.
    pub inside: bool,
}

const RANDOM_DIRECTIONS: usize = 48;
const LINEAR_STEPS: usize = 1024;

/// Estimates the Euclidean distance from `w` to ∂D, accurate to about `tol`.
///
/// Marches along the coordinate axes and a fixed set of random directions of
/// the modulus space until membership flips, bisects the crossing, and refines
/// the best direction with a local pattern search. Coordinate punctures are
/// handled exactly (distance `|w_j|`).
pub fn boundary_distance(domain: &BoundedDomain, w: &[Complex64], tol: f64) -> BoundaryDistance {
    let x: Vec<f64> = w.iter().map(|c| c.norm()).collect();
    let inside = domain.contains_moduli(&x);
    let n = x.len();
    let reach = x.iter().map(|v| v * v).sum::<f64>().sqrt() + domain.box_diameter();

    let mut directions: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[j] = sign;
            directions.push(d);
        }
    }
    let mut rng = substream(0x00b0_07da_7a11, n as u64);
    for _ in 0..RANDOM_DIRECTIONS {
        directions.push(random_unit(&mut rng, n));
    }

    let schedule = march_schedule(tol, reach);
    let crossing = |d: &[f64]| first_flip(domain, &x, d, inside, &schedule, tol);

    let mut best = f64::INFINITY;
    let mut best_dir = directions[0].clone();
    for d in &directions {
        if let Some(s) = crossing(d) {
            if s < best {
                best = s;
                best_dir = d.clone();
            }
        }
    }

    // local refinement around the best direction
    if best.is_finite() && best > tol {
        let mut spread = 0.5;
        for _ in 0..6 {
            let mut improved = false;
            for _ in 0..16 {
                let jitter = random_unit(&mut rng, n);
                let mut cand: Vec<f64> = best_dir.iter().zip(&jitter).map(|(a, b)| a + spread * b).collect();
                let norm = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    continue;
                }
                cand.iter_mut().for_each(|v| *v /= norm);
                if let Some(s) = crossing(&cand) {
                    if s < best {
                        best = s;
                        best_dir = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                spread *= 0.5;
            }
        }
    }

    if inside {
        for &j in domain.null_exclusions() {
            best = best.min(x[j]);
        }
    }
    if best < tol {
        best = 0.0;
    }
    BoundaryDistance { distance: if best.is_finite() { best } else { reach }, inside }
}

fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

fn march_schedule(tol: f64, reach: f64) -> Vec<f64> {
    let mut s: Vec<f64> = Vec::new();
    let mut g = tol.max(1e-15);
    while g < reach {
        s.push(g);
        g *= 2.0;
    }
    s.extend((1..=LINEAR_STEPS).map(|i| reach * i as f64 / LINEAR_STEPS as f64));
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.dedup();
    s
}

fn first_flip(
    domain: &BoundedDomain,
    x: &[f64],
    d: &[f64],
    inside: bool,
    schedule: &[f64],
    tol: f64,
) -> Option<f64> {
    let status = |s: f64| {
        let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| (a + s * b).abs()).collect();
        domain.contains_moduli(&y)
    };
    let mut lo = 0.0;
    for &s in schedule {
        if status(s) != inside {
            let mut hi = s;
            while hi - lo > 0.25 * tol {
                let mid = 0.5 * (lo + hi);
                if status(mid) != inside {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        lo = s;
    }
    None
}

/// Outcome of [`interior_closure_probe`].
#[derive(Debug, Clone, Serialize)]
pub struct ClosureProbe {
    pub resolution: f64,
    pub grid_points: u64,
    /// Modulus vectors of non-members whose grid neighbours are all members.
    pub witnesses: Vec<Vec<f64>>,
}

impl ClosureProbe {
    pub fn violation_found(&self) -> bool {
        !self.witnesses.is_empty()
    }

    pub fn verdict(&self) -> String {
        if self.witnesses.is_empty() {
            format!("no violation found at resolution {}", self.resolution)
        } else {
            format!("{} witness point(s) where the interior of the closure exceeds the domain", self.witnesses.len())
        }
    }
}

/// Looks for points of int(closure(D)) \ D on a modulus grid of spacing `resolution`.
///
/// A non-member grid point is flagged when each of its axis neighbours (with
/// negative moduli reflected through zero) is a member. This is a falsification
/// probe at finite resolution, not a certificate. Products are probed factor by
/// factor since int(closure(A×B)) = int(closure(A)) × int(closure(B)).
pub fn interior_closure_probe(domain: &BoundedDomain, resolution: f64) -> ClosureProbe {
    let h = resolution;
    let mut witnesses = Vec::new();
    let mut grid_points = 0u64;
    let n = domain.dimension();
    let leaves = domain.profile().leaves();

    // a member modulus vector for every leaf, used to lift factor witnesses
    let mut filler = vec![0.0; n];
    for (off, leaf) in &leaves {
        let d = leaf.dimension();
        if let Some(m) = leaf_member(leaf, &domain.box_radii()[*off..*off + d]) {
            filler[*off..*off + d].copy_from_slice(&m);
        }
    }

    for (off, leaf) in &leaves {
        let d = leaf.dimension();
        let holes: Vec<usize> = domain
            .null_exclusions()
            .iter()
            .filter(|&&j| j >= *off && j < off + d)
            .map(|j| j - off)
            .collect();
        let member = |r: &[f64]| holes.iter().all(|&j| r[j] != 0.0) && leaf.contains(r);
        let counts: Vec<usize> = domain.box_radii()[*off..*off + d]
            .iter()
            .map(|r| (r / h).ceil() as usize + 2)
            .collect();
        let mut idx = vec![0usize; d];
        loop {
            grid_points += 1;
            let r: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
            if !member(&r) {
                let mut all_members = true;
                'nb: for j in 0..d {
                    for sign in [1.0, -1.0] {
                        let mut y = r.clone();
                        y[j] = (y[j] + sign * h).abs();
                        if !member(&y) {
                            all_members = false;
                            break 'nb;
                        }
                    }
                }
                if all_members {
                    let mut w = filler.clone();
                    w[*off..*off + d].copy_from_slice(&r);
                    witnesses.push(w);
                }
            }
            // odometer increment
            let mut j = 0;
            loop {
                if j == d {
                    break;
                }
                idx[j] += 1;
                if idx[j] < counts[j] {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == d {
                break;
            }
        }
    }
    ClosureProbe { resolution, grid_points, witnesses }
}

fn leaf_member(leaf: &RadialProfile, bounds: &[f64]) -> Option<Vec<f64>> {
    let d = leaf.dimension();
    let steps = 16;
    let mut idx = vec![1usize; d];
    loop {
        let r: Vec<f64> = idx.iter().zip(bounds).map(|(&i, b)| b * i as f64 / steps as f64).collect();
        if leaf.contains(&r) {
            return Some(r);
        }
        let mut j = 0;
        loop {
            if j == d {
                return None;
            }
            idx[j] += 1;
            if idx[j] < steps {
                break;
            }
            idx[j] = 1;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use num_complex::Complex64 as C;

    fn pt(xs: &[f64]) -> Vec<C> {
        xs.iter().map(|&x| C::new(x, 0.0)).collect()
    }

    #[test]
    fn disc_center_distance() {
        let d = BoundedDomain::disc(1.0).unwrap();
        let r = boundary_distance(&d, &pt(&[0.0]), 1e-7);
        assert!(r.inside);
        assert!((r.distance - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cusp_origin_is_on_boundary() {
        let d = BoundedDomain::new(DomainSpec::FkBallPrime { k: 3 }).unwrap();
        let r = boundary_distance(&d, &pt(&[0.0, 0.0]), 1e-7);
        assert!(!r.inside);
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn polydisc_distance() {
        let d = BoundedDomain::new(DomainSpec::Polydisc { radii: vec![1.0, 1.0] }).unwrap();
        let r = boundary_distance(&d, &pt(&[0.5, 0.5]), 1e-7);
        assert!((r.distance - 0.5).abs() < 1e-6);
    }

    #[test]
    fn phases_do_not_matter() {
        let d = BoundedDomain::parse("ball(2)").unwrap();
        let a = boundary_distance(&d, &pt(&[0.3, 0.4]), 1e-8);
        let b = boundary_distance(&d, &[C::from_polar(0.3, 1.0), C::from_polar(0.4, -2.0)], 1e-8);
        assert!((a.distance - 0.5).abs() < 1e-5);
        assert_eq!(a, b);
    }

    #[test]
    fn outside_point_reports_distance_to_domain() {
        let d = BoundedDomain::disc(1.0).unwrap();
        let r = boundary_distance(&d, &pt(&[1.5]), 1e-8);
        assert!(!r.inside);
        assert!((r.distance - 0.5).abs() < 1e-6);
    }

    #[test]
    fn puncture_distance_is_exact() {
        let d = BoundedDomain::parse("punctured_disc").unwrap();
        let r = boundary_distance(&d, &pt(&[0.2]), 1e-9);
        assert!((r.distance - 0.2).abs() < 1e-8);
    }

    #[test]
    fn closure_probe_catalog() {
        let disc = BoundedDomain::disc(1.0).unwrap();
        assert!(!interior_closure_probe(&disc, 0.05).violation_found());
        let punct = BoundedDomain::parse("punctured_disc").unwrap();
        let probe = interior_closure_probe(&punct, 0.05);
        assert!(probe.violation_found());
        assert!(probe.witnesses.iter().all(|w| w[0] < 0.05 + 1e-12));
        let hart = BoundedDomain::parse("hartogs(3)").unwrap();
        assert!(!interior_closure_probe(&hart, 0.02).violation_found());
    }

    #[test]
    fn closure_probe_lifts_product_witnesses() {
        let d = BoundedDomain::parse("ball(2)*punctured_disc").unwrap();
        let probe = interior_closure_probe(&d, 0.1);
        assert!(probe.violation_found());
        let w = &probe.witnesses[0];
        assert_eq!(w.len(), 3);
        assert!(d.without_exclusions().contains_moduli(w));
    }
}
