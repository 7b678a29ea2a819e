//! Bounded domains in ℂⁿ.
//!
//! Every domain in the catalog is a Reinhardt domain: membership depends only
//! on the modulus vector `(|z_1|, …, |z_n|)`. This is what makes the exact
//! radial reductions in [`crate::integrate`] possible and lets the boundary and
//! closure probes work in the real modulus space instead of ℝ²ⁿ.

mod probe;
mod sample;

pub use probe::{boundary_distance, interior_closure_probe, BoundaryDistance, ClosureProbe};
pub(crate) use sample::box_point;
pub use sample::{sample, SampleBatch};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of ℂⁿ.
pub type Point = Vec<Complex64>;

/// Catalog descriptor of a domain. Serializes as `{"kind": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum DomainSpec {
    /// `{|z| < r}`
    Disc { r: f64 },
    /// `{0 < |z| < r}`
    PuncturedDisc { r: f64 },
    /// `{|z_j| < r_j for all j}`
    Polydisc { radii: Vec<f64> },
    /// Unit ball of ℂⁿ.
    Ball { n: usize },
    /// `{|w_2| < |w_1|^k < 1}`, the image of Δ*×Δ under `(z_1, z_2) ↦ (z_1, z_1^k z_2)`.
    Hartogs { k: u32 },
    /// `{|w_2| < |w_1|^k √(1−|w_1|²)}`, the image of the ball minus `{z_1 = 0}` under the same map.
    FkBallPrime { k: u32 },
    /// Cartesian product, coordinates concatenated in order.
    Product { factors: Vec<DomainSpec> },
    /// `base` with the coordinate hyperplanes `{z_j = 0}` removed.
    Punctured { base: Box<DomainSpec>, coords: Vec<usize> },
}

impl DomainSpec {
    /// Parses either inline JSON or a short label such as `disc`, `disc(2)`,
    /// `ball(2)*hartogs(3)`, `polydisc(1,0.5)`, `d1(3)` or `d2(3)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            return serde_json::from_str(text)
                .map_err(|e| Error::InvalidDomain(format!("malformed domain JSON: {e}")));
        }
        let factors: Vec<&str> = text.split('*').collect();
        if factors.len() > 1 {
            let factors = factors
                .into_iter()
                .map(Self::parse_atom)
                .collect::<Result<Vec<_>>>()?;
            return Ok(DomainSpec::Product { factors });
        }
        Self::parse_atom(text)
    }

    fn parse_atom(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            Some(open) => {
                if !text.ends_with(')') {
                    return Err(Error::InvalidDomain(format!("unbalanced parentheses in `{text}`")));
                }
                let inner = &text[open + 1..text.len() - 1];
                let args = inner
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidDomain(format!("bad number `{s}` in `{text}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (&text[..open], args)
            }
            None => (text, Vec::new()),
        };
        let one = |default: f64| -> Result<f64> {
            match args.as_slice() {
                [] => Ok(default),
                [x] => Ok(*x),
                _ => Err(Error::InvalidDomain(format!("`{name}` takes one argument"))),
            }
        };
        let int = |x: f64| -> Result<u32> {
            if x.fract() != 0.0 || x < 0.0 {
                return Err(Error::InvalidDomain(format!("`{name}` needs a nonnegative integer, got {x}")));
            }
            Ok(x as u32)
        };
        match name.trim() {
            "disc" => Ok(DomainSpec::Disc { r: one(1.0)? }),
            "punctured_disc" => Ok(DomainSpec::PuncturedDisc { r: one(1.0)? }),
            "polydisc" => {
                if args.is_empty() {
                    return Err(Error::InvalidDomain("polydisc needs radii".into()));
                }
                Ok(DomainSpec::Polydisc { radii: args })
            }
            "ball" => Ok(DomainSpec::Ball { n: int(one(2.0)?)? as usize }),
            "hartogs" => Ok(DomainSpec::Hartogs { k: int(one(3.0)?)? }),
            "fk_ball_prime" => Ok(DomainSpec::FkBallPrime { k: int(one(3.0)?)? }),
            "d1" => Ok(Self::counterexample_source(int(one(3.0)?)?)),
            "d2" => Ok(Self::counterexample_target(int(one(3.0)?)?)),
            other => Err(Error::InvalidDomain(format!("unknown domain label `{other}`"))),
        }
    }

    /// `ball(2) × hartogs(k)`.
    pub fn counterexample_source(k: u32) -> Self {
        DomainSpec::Product {
            factors: vec![DomainSpec::Ball { n: 2 }, DomainSpec::Hartogs { k }],
        }
    }

    /// `fk_ball_prime(k) × Δ²`.
    pub fn counterexample_target(k: u32) -> Self {
        DomainSpec::Product {
            factors: vec![
                DomainSpec::FkBallPrime { k },
                DomainSpec::Polydisc { radii: vec![1.0, 1.0] },
            ],
        }
    }

    /// Stable text identifier.
    pub fn label(&self) -> String {
        fn num(x: f64) -> String {
            format!("{x}")
        }
        match self {
            DomainSpec::Disc { r } => format!("disc({})", num(*r)),
            DomainSpec::PuncturedDisc { r } => format!("punctured_disc({})", num(*r)),
            DomainSpec::Polydisc { radii } => format!(
                "polydisc({})",
                radii.iter().map(|r| num(*r)).collect::<Vec<_>>().join(",")
            ),
            DomainSpec::Ball { n } => format!("ball({n})"),
            DomainSpec::Hartogs { k } => format!("hartogs({k})"),
            DomainSpec::FkBallPrime { k } => format!("fk_ball_prime({k})"),
            DomainSpec::Product { factors } => factors
                .iter()
                .map(|f| match f {
                    DomainSpec::Product { .. } | DomainSpec::Punctured { .. } => format!("[{}]", f.label()),
                    _ => f.label(),
                })
                .collect::<Vec<_>>()
                .join("*"),
            DomainSpec::Punctured { base, coords } => {
                let holes: Vec<String> = coords.iter().map(|j| format!("z{}=0", j + 1)).collect();
                format!("{}\\{{{}}}", base.label(), holes.join(","))
            }
        }
    }
}

/// Region of moduli describing a Reinhardt domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialProfile {
    Polydisc { radii: Vec<f64> },
    Ball { n: usize },
    /// `r_2 < r_1^k < 1`
    HartogsGraph { k: u32 },
    /// `r_2 < r_1^k √(1 − r_1²)`
    GraphWithFactor { k: u32 },
    Product(Vec<RadialProfile>),
}

impl RadialProfile {
    pub fn dimension(&self) -> usize {
        match self {
            RadialProfile::Polydisc { radii } => radii.len(),
            RadialProfile::Ball { n } => *n,
            RadialProfile::HartogsGraph { .. } | RadialProfile::GraphWithFactor { .. } => 2,
            RadialProfile::Product(parts) => parts.iter().map(|p| p.dimension()).sum(),
        }
    }

    /// Membership of a modulus vector. Entries are taken in absolute value.
    pub fn contains(&self, r: &[f64]) -> bool {
        match self {
            RadialProfile::Polydisc { radii } => r.iter().zip(radii).all(|(x, rad)| x.abs() < *rad),
            RadialProfile::Ball { .. } => r.iter().map(|x| x * x).sum::<f64>() < 1.0,
            RadialProfile::HartogsGraph { k } => {
                let lead = r[0].abs().powi(*k as i32);
                r[1].abs() < lead && lead < 1.0
            }
            RadialProfile::GraphWithFactor { k } => {
                let r1 = r[0].abs();
                if r1 >= 1.0 {
                    return false;
                }
                r[1].abs() < r1.powi(*k as i32) * (1.0 - r1 * r1).sqrt()
            }
            RadialProfile::Product(parts) => {
                let mut offset = 0;
                for part in parts {
                    let d = part.dimension();
                    if !part.contains(&r[offset..offset + d]) {
                        return false;
                    }
                    offset += d;
                }
                true
            }
        }
    }

    /// Per-coordinate modulus bound, i.e. the half width of the bounding box.
    pub fn modulus_bounds(&self) -> Vec<f64> {
        match self {
            RadialProfile::Polydisc { radii } => radii.clone(),
            RadialProfile::Ball { n } => vec![1.0; *n],
            RadialProfile::HartogsGraph { .. } => vec![1.0, 1.0],
            RadialProfile::GraphWithFactor { k } => {
                // max of t^k √(1−t²) on [0,1] is attained at t² = k/(k+1)
                let k = *k as f64;
                let t2 = k / (k + 1.0);
                vec![1.0, t2.powf(k / 2.0) * (1.0 - t2).sqrt()]
            }
            RadialProfile::Product(parts) => parts.iter().flat_map(|p| p.modulus_bounds()).collect(),
        }
    }

    /// Leaf profiles with their first coordinate index.
    pub fn leaves(&self) -> Vec<(usize, &RadialProfile)> {
        let mut out = Vec::new();
        self.collect_leaves(0, &mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, offset: usize, out: &mut Vec<(usize, &'a RadialProfile)>) {
        match self {
            RadialProfile::Product(parts) => {
                let mut off = offset;
                for part in parts {
                    part.collect_leaves(off, out);
                    off += part.dimension();
                }
            }
            leaf => out.push((offset, leaf)),
        }
    }

    /// Coordinates that cannot vanish anywhere on the region.
    fn nonvanishing(&self) -> Vec<usize> {
        self.leaves()
            .into_iter()
            .filter_map(|(off, leaf)| match leaf {
                RadialProfile::HartogsGraph { .. } | RadialProfile::GraphWithFactor { .. } => Some(off),
                _ => None,
            })
            .collect()
    }
}

/// A bounded domain of the catalog, possibly with coordinate hyperplanes removed.
///
/// Values are immutable after construction and can be shared across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedDomain {
    spec: DomainSpec,
    dimension: usize,
    profile: RadialProfile,
    box_radii: Vec<f64>,
    null_exclusions: Vec<usize>,
    label: String,
}

impl BoundedDomain {
    /// Builds a catalog domain, validating its parameters.
    pub fn new(spec: DomainSpec) -> Result<Self> {
        let (profile, exclusions) = Self::profile_of(&spec)?;
        let dimension = profile.dimension();
        if dimension == 0 {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        for &j in &exclusions {
            if j >= dimension {
                return Err(Error::InvalidDomain(format!("excluded coordinate {j} out of range")));
            }
        }
        let mut null_exclusions = exclusions;
        null_exclusions.sort_unstable();
        null_exclusions.dedup();
        let box_radii = profile.modulus_bounds();
        let label = spec.label();
        Ok(Self { spec, dimension, profile, box_radii, null_exclusions, label })
    }

    fn profile_of(spec: &DomainSpec) -> Result<(RadialProfile, Vec<usize>)> {
        let positive = |r: f64, what: &str| -> Result<()> {
            if r.is_finite() && r > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidDomain(format!("{what} must be a positive radius, got {r}")))
            }
        };
        let k_ok = |k: u32| -> Result<()> {
            if k >= 1 {
                Ok(())
            } else {
                Err(Error::InvalidDomain("k must be at least 1".into()))
            }
        };
        Ok(match spec {
            DomainSpec::Disc { r } => {
                positive(*r, "disc")?;
                (RadialProfile::Polydisc { radii: vec![*r] }, vec![])
            }
            DomainSpec::PuncturedDisc { r } => {
                positive(*r, "punctured disc")?;
                (RadialProfile::Polydisc { radii: vec![*r] }, vec![0])
            }
            DomainSpec::Polydisc { radii } => {
                if radii.is_empty() {
                    return Err(Error::InvalidDomain("polydisc needs n >= 1".into()));
                }
                for r in radii {
                    positive(*r, "polydisc")?;
                }
                (RadialProfile::Polydisc { radii: radii.clone() }, vec![])
            }
            DomainSpec::Ball { n } => {
                if *n < 1 {
                    return Err(Error::InvalidDomain("ball needs n >= 1".into()));
                }
                (RadialProfile::Ball { n: *n }, vec![])
            }
            DomainSpec::Hartogs { k } => {
                k_ok(*k)?;
                (RadialProfile::HartogsGraph { k: *k }, vec![])
            }
            DomainSpec::FkBallPrime { k } => {
                k_ok(*k)?;
                (RadialProfile::GraphWithFactor { k: *k }, vec![])
            }
            DomainSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidDomain("empty product".into()));
                }
                let mut parts = Vec::new();
                let mut excl = Vec::new();
                let mut offset = 0;
                for f in factors {
                    let (p, e) = Self::profile_of(f)?;
                    let d = p.dimension();
                    excl.extend(e.into_iter().map(|j| j + offset));
                    match p {
                        RadialProfile::Product(inner) => parts.extend(inner),
                        leaf => parts.push(leaf),
                    }
                    offset += d;
                }
                (RadialProfile::Product(parts), excl)
            }
            DomainSpec::Punctured { base, coords } => {
                let (p, mut e) = Self::profile_of(base)?;
                e.extend(coords.iter().copied());
                (p, e)
            }
        })
    }

    /// Shorthand for [`DomainSpec::parse`] followed by [`BoundedDomain::new`].
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(DomainSpec::parse(text)?)
    }

    pub fn disc(r: f64) -> Result<Self> {
        Self::new(DomainSpec::Disc { r })
    }

    pub fn product(factors: &[&BoundedDomain]) -> Result<Self> {
        Self::new(DomainSpec::Product { factors: factors.iter().map(|d| d.spec.clone()).collect() })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn null_exclusions(&self) -> &[usize] {
        &self.null_exclusions
    }

    /// Half widths of the axis-aligned box `∏ [−R_j, R_j]²`.
    pub fn box_radii(&self) -> &[f64] {
        &self.box_radii
    }

    /// Lebesgue measure of the bounding box in ℝ²ⁿ.
    pub fn box_volume(&self) -> f64 {
        self.box_radii.iter().map(|r| 4.0 * r * r).product()
    }

    /// The same domain with additional coordinate hyperplanes removed.
    pub fn with_exclusions(&self, coords: &[usize]) -> Result<Self> {
        let mut all = self.null_exclusions.clone();
        all.extend_from_slice(coords);
        let base = self.without_exclusions();
        Self::new(DomainSpec::Punctured { base: Box::new(base.spec), coords: all })
    }

    /// The parent domain with every puncture filled in.
    pub fn without_exclusions(&self) -> Self {
        fn strip(spec: &DomainSpec) -> DomainSpec {
            match spec {
                DomainSpec::PuncturedDisc { r } => DomainSpec::Disc { r: *r },
                DomainSpec::Punctured { base, .. } => strip(base),
                DomainSpec::Product { factors } => {
                    DomainSpec::Product { factors: factors.iter().map(strip).collect() }
                }
                other => other.clone(),
            }
        }
        Self::new(strip(&self.spec)).expect("stripping punctures keeps a valid spec")
    }

    /// Membership test; all catalog domains are open.
    pub fn contains(&self, z: &[Complex64]) -> bool {
        if z.len() != self.dimension {
            return false;
        }
        let r: Vec<f64> = z.iter().map(|c| c.norm()).collect();
        self.contains_moduli(&r)
    }

    /// Membership of the torus orbit with the given moduli (absolute values taken).
    pub fn contains_moduli(&self, r: &[f64]) -> bool {
        if self.null_exclusions.iter().any(|&j| r[j] == 0.0) {
            return false;
        }
        self.profile.contains(r)
    }

    /// Coordinates `j` with `z_j ≠ 0` everywhere on the domain. Monomials may
    /// carry negative exponents exactly on these coordinates and stay holomorphic.
    pub fn nonvanishing_coords(&self) -> Vec<usize> {
        let mut out = self.profile.nonvanishing();
        out.extend_from_slice(&self.null_exclusions);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Euclidean diameter of the bounding box.
    pub fn box_diameter(&self) -> f64 {
        2.0 * self.box_radii.iter().map(|r| 2.0 * r * r).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn pt(xs: &[f64]) -> Point {
        xs.iter().map(|&x| C::new(x, 0.0)).collect()
    }

    #[test]
    fn hartogs_membership() {
        let d = BoundedDomain::new(DomainSpec::Hartogs { k: 3 }).unwrap();
        assert!(d.contains(&pt(&[0.5, 0.1])));
        assert!(!d.contains(&pt(&[0.5, 0.2])));
    }

    #[test]
    fn fk_ball_prime_excludes_origin() {
        let d = BoundedDomain::new(DomainSpec::FkBallPrime { k: 3 }).unwrap();
        assert!(!d.contains(&pt(&[0.0, 0.0])));
        assert!(d.contains(&pt(&[0.5, 0.01])));
    }

    #[test]
    fn product_membership() {
        let d = BoundedDomain::parse("ball(2)*hartogs(3)").unwrap();
        assert_eq!(d.dimension(), 4);
        assert!(d.contains(&pt(&[0.3, 0.2, 0.5, 0.05])));
        assert!(!d.contains(&pt(&[0.9, 0.5, 0.5, 0.05])));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BoundedDomain::new(DomainSpec::Hartogs { k: 0 }).is_err());
        assert!(BoundedDomain::new(DomainSpec::Disc { r: 0.0 }).is_err());
        assert!(BoundedDomain::new(DomainSpec::Disc { r: -1.0 }).is_err());
        assert!(BoundedDomain::new(DomainSpec::Ball { n: 0 }).is_err());
        assert!(BoundedDomain::new(DomainSpec::Polydisc { radii: vec![] }).is_err());
        assert!(DomainSpec::parse("torus(1)").is_err());
        assert!(DomainSpec::parse("{not json").is_err());
    }

    #[test]
    fn punctured_disc_rejects_center() {
        let d = BoundedDomain::parse("punctured_disc").unwrap();
        assert!(!d.contains(&pt(&[0.0])));
        assert!(d.contains(&pt(&[1e-9])));
        assert_eq!(d.without_exclusions().label(), "disc(1)");
    }

    #[test]
    fn json_shape() {
        let spec = DomainSpec::Hartogs { k: 3 };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"hartogs","params":{"k":3}}"#);
        let back = DomainSpec::parse(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn fk_ball_prime_box_is_tight() {
        let d = BoundedDomain::new(DomainSpec::FkBallPrime { k: 3 }).unwrap();
        let b = d.box_radii()[1];
        // brute-force max of t^3 sqrt(1-t^2)
        let brute = (0..=100_000)
            .map(|i| {
                let t = i as f64 / 100_000.0;
                t.powi(3) * (1.0 - t * t).sqrt()
            })
            .fold(0.0, f64::max);
        assert!((b - brute).abs() < 1e-8);
    }

    #[test]
    fn nonvanishing_coordinates() {
        let d = BoundedDomain::parse("ball(2)*hartogs(3)").unwrap();
        assert_eq!(d.nonvanishing_coords(), vec![2]);
        let d = d.with_exclusions(&[0]).unwrap();
        assert_eq!(d.nonvanishing_coords(), vec![0, 2]);
        assert_eq!(d.null_exclusions(), &[0]);
    }
}
