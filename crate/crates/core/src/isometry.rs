//! Weighted composition isometries `T(φ) = λ·(φ∘G)·g` between `A^p`
//! spaces, and the equimeasurability checks of the ratio maps.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{
    compose, counterexample, weight_branch, HoloFn, HoloMapExpr, Holomorphic, LaurentPolynomial, MultiIndex,
    Weight,
};
use crate::geometry::{sample, BoundedDomain, DomainSpec};
use crate::integrate::{laurent_norm_closed, mc_norm_fn, random_admissible_monomials};
use crate::rng::{chunk_sizes, derive_seed, substream};
use crate::verdict::Verdict;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `T: A^p(source) → A^p(target)`, `T(φ)(w) = λ·φ(G(w))·g(w)` with
/// `G: target → source` and `|g|^p = |J_G|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionIsometry {
    pub source: BoundedDomain,
    pub target: BoundedDomain,
    pub map: HoloMapExpr,
    pub weight: Weight,
    pub p: f64,
    pub lambda: Complex64,
}

impl CompositionIsometry {
    /// Builds the operator with the canonical weight: the Laurent branch of
    /// `J_G^{2/p}` when `G` is monomial, the principal-branch product otherwise.
    pub fn new(
        source: BoundedDomain,
        target: BoundedDomain,
        map: HoloMapExpr,
        p: f64,
        lambda: Complex64,
    ) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Config(format!("p must be a positive real, got {p}")));
        }
        if (lambda.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("|λ| must be 1, got {}", lambda.norm())));
        }
        for d in [&source, &target] {
            if d.dimension() != map.dim {
                return Err(Error::DimensionMismatch { expected: map.dim, got: d.dimension() });
            }
        }
        let weight = match map.as_monomial() {
            Some(_) => Weight::Laurent { poly: weight_branch(&map, p)? },
            None => Weight::JacobianPower { map: map.clone(), exponent: 2.0 / p },
        };
        Ok(Self { source, target, map, weight, p, lambda })
    }

    /// The identity operator on `A^p(domain)`.
    pub fn identity(domain: BoundedDomain, p: f64) -> Result<Self> {
        let map = HoloMapExpr::identity(domain.dimension());
        Self::new(domain.clone(), domain, map, p, ONE)
    }

    /// The operator between the punctured domains
    /// `ball(2) × hartogs(k) \ {z₁ = 0}` and `fk_ball_prime(k) × Δ² \ {w₃ = 0}`
    /// with `p = 2k/m`, which must not be an even integer.
    pub fn counterexample(k: u32, m: u32) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::Config("k and m must be positive integers".into()));
        }
        let p = 2.0 * k as f64 / m as f64;
        if k.is_multiple_of(m) {
            return Err(Error::Precondition(format!(
                "p = 2k/m = 2·{k}/{m} = {} is an even integer",
                2 * k / m
            )));
        }
        let source = BoundedDomain::new(DomainSpec::Punctured {
            base: Box::new(DomainSpec::counterexample_source(k)),
            coords: vec![0],
        })?;
        let target = BoundedDomain::new(DomainSpec::Punctured {
            base: Box::new(DomainSpec::counterexample_target(k)),
            coords: vec![2],
        })?;
        let map = HoloMapExpr::monomial(counterexample::backward(k as i64));
        Self::new(source, target, map, p, ONE)
    }

    /// The same operator with its weight replaced, for mutation tests.
    pub fn with_weight(&self, weight: Weight) -> Self {
        Self { weight, ..self.clone() }
    }

    /// Whether [`apply`](Self::apply) yields Laurent polynomials.
    pub fn is_symbolic(&self) -> bool {
        self.map.as_monomial().is_some() && self.weight.as_laurent().is_some()
    }

    /// `T(φ)`, symbolic when the map is monomial and the weight is Laurent.
    pub fn apply(&self, phi: &LaurentPolynomial) -> Result<HoloFn> {
        if self.is_symbolic() {
            return self.apply_laurent(phi).map(HoloFn::Laurent);
        }
        Ok(self.apply_fn(&HoloFn::Laurent(phi.clone())))
    }

    /// Exact `λ·compose(φ, G)·g`.
    pub fn apply_laurent(&self, phi: &LaurentPolynomial) -> Result<LaurentPolynomial> {
        let (Some(m), Some(g)) = (self.map.as_monomial(), self.weight.as_laurent()) else {
            return Err(Error::Unsupported("the operator has no symbolic form".into()));
        };
        Ok(compose(phi, &m)?.mul(g)?.scale(self.lambda))
    }

    /// Lazy `T(φ)` for any function.
    pub fn apply_fn(&self, phi: &HoloFn) -> HoloFn {
        if let (true, HoloFn::Laurent(p)) = (self.is_symbolic(), phi) {
            if let Ok(out) = self.apply_laurent(p) {
                return HoloFn::Laurent(out);
            }
        }
        HoloFn::Composed {
            inner: Box::new(phi.clone()),
            map: self.map.clone(),
            weight: self.weight.clone(),
            lambda: self.lambda,
        }
    }

    /// `T⁻¹`, with map `F = G⁻¹`, canonical weight for `F`, and the unimodular
    /// constant chosen so that `T⁻¹(T(φ)) = φ`.
    pub fn inverse(&self) -> Result<Self> {
        let f = self.map.inverse()?;
        let mut inv = Self::new(self.target.clone(), self.source.clone(), f, self.p, ONE)?;
        let c = match (self.weight.as_laurent(), inv.weight.as_laurent(), inv.map.as_monomial()) {
            (Some(g), Some(gf), Some(fm)) => {
                let prod = compose(g, &fm)?.mul(gf)?;
                match prod.as_monomial() {
                    Some((a, c)) if a.is_zero() || a.dim() == 0 => c,
                    _ => {
                        return Err(Error::NotInvertible(format!(
                            "g(F)·g_F = {prod} is not a constant"
                        )))
                    }
                }
            }
            _ => {
                let z0 = sample(&self.source, 0, 1)?.points.remove(0);
                let w0 = inv.map.apply(&z0)?;
                self.weight.eval(&w0)? * inv.weight.eval(&z0)?
            }
        };
        if (c.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::NotInvertible(format!("|g(F)·g_F| = {} is not 1", c.norm())));
        }
        inv.lambda = (self.lambda * c).inv();
        inv.lambda /= inv.lambda.norm();
        Ok(inv)
    }
}

/// Norm method for [`verify_isometry`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum VerifyMethod {
    Closed,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryRow {
    pub test: String,
    pub source_norm: f64,
    /// Infinite when `T(φ)` is not `p`-integrable on the target.
    pub target_norm: f64,
    /// `|‖Tφ‖ − ‖φ‖| / ‖φ‖`.
    pub discrepancy: f64,
    /// Combined standard error of the two norms, relative to `‖φ‖`.
    pub relative_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryVerification {
    pub max_discrepancy: f64,
    pub rows: Vec<IsometryRow>,
}

/// Compares `‖T(φ)‖_p` on the target with `‖φ‖_p` on the source.
///
/// A test outside `A^p(source)` is an error. A divergent target norm is
/// reported as an infinite discrepancy, which is what a broken weight produces.
pub fn verify_isometry(
    t: &CompositionIsometry,
    tests: &[LaurentPolynomial],
    method: VerifyMethod,
) -> Result<IsometryVerification> {
    let rows = tests
        .par_iter()
        .enumerate()
        .map(|(i, phi)| -> Result<IsometryRow> {
            let (src, tgt) = match method {
                VerifyMethod::Closed => {
                    let image = t.apply_laurent(phi)?;
                    let src = laurent_norm_closed(&t.source, phi, t.p)?;
                    let tgt = match laurent_norm_closed(&t.target, &image, t.p) {
                        Ok(r) => (r.value, r.std_error),
                        Err(Error::DivergentIntegral(_)) => (f64::INFINITY, 0.0),
                        Err(e) => return Err(e),
                    };
                    ((src.value, src.std_error), tgt)
                }
                VerifyMethod::MonteCarlo { samples, seed } => {
                    let s = derive_seed(seed, i as u64);
                    let src = mc_norm_fn(&t.source, phi, t.p, samples, s)?;
                    let image = t.apply(phi)?;
                    let tgt = mc_norm_fn(&t.target, &image, t.p, samples, derive_seed(s, 1))?;
                    ((src.value, src.std_error), (tgt.value, tgt.std_error))
                }
            };
            let discrepancy = if src.0 == 0.0 && tgt.0 == 0.0 { 0.0 } else { (tgt.0 - src.0).abs() / src.0 };
            Ok(IsometryRow {
                test: phi.to_string(),
                source_norm: src.0,
                target_norm: tgt.0,
                discrepancy,
                relative_std_error: src.1.hypot(tgt.1) / src.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_discrepancy = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
    Ok(IsometryVerification { max_discrepancy, rows })
}

/// `count` random monomials in `A^p(source)` with exponents in `[−3, 3]`.
pub fn monomial_battery(t: &CompositionIsometry, count: usize, seed: u64) -> Result<Vec<LaurentPolynomial>> {
    Ok(random_admissible_monomials(&t.source, &[t.p], count, 3, seed)?
        .into_iter()
        .map(|a| LaurentPolynomial::monomial(a, ONE))
        .collect())
}

/// `φ₀, φ₁, …, φ_N` with `φ₀` not identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily {
    pub members: Vec<HoloFn>,
}

impl FunctionFamily {
    pub fn new(members: Vec<HoloFn>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::DegenerateFamily("the family needs φ₀ and at least one more member".into()));
        }
        if let Some(p) = members[0].as_laurent() {
            if p.is_zero() {
                return Err(Error::DegenerateFamily("φ₀ is identically zero".into()));
            }
        }
        Ok(Self { members })
    }

    pub fn from_laurent(members: Vec<LaurentPolynomial>) -> Result<Self> {
        Self::new(members.into_iter().map(HoloFn::Laurent).collect())
    }

    /// `N`, the number of ratios.
    pub fn ratio_count(&self) -> usize {
        self.members.len() - 1
    }

    /// `(φ₁/φ₀, …, φ_N/φ₀)(z)` together with `φ₀(z)`.
    pub fn ratios(&self, z: &[Complex64]) -> Result<(Complex64, Vec<Complex64>)> {
        let f0 = self.members[0].eval(z)?;
        let mut out = Vec::with_capacity(self.ratio_count());
        for f in &self.members[1..] {
            out.push(f.eval(z)? / f0);
        }
        Ok((f0, out))
    }

    /// `T(φ_j)` for every member.
    pub fn image(&self, t: &CompositionIsometry) -> FunctionFamily {
        FunctionFamily { members: self.members.iter().map(|f| t.apply_fn(f)).collect() }
    }
}

/// Coordinate bound standing in for "unbounded" (finite so it survives JSON).
pub const UNBOUNDED: f64 = f64::MAX;

/// A test function `u ≥ 0` on the ratio space `ℂ^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestRegion {
    /// `u ≡ 1`.
    Everything,
    /// Indicator of `∏ [re_lo, re_hi) × [im_lo, im_hi)`.
    Box { re_lo: Vec<f64>, re_hi: Vec<f64>, im_lo: Vec<f64>, im_hi: Vec<f64> },
    /// `exp(−|ζ − center|² / (2 width²))`.
    Gaussian { center: Vec<Complex64>, width: f64 },
    /// `∏ 1/(1 + exp(−sharpness·(Re ζ_j − center_j)))`.
    Sigmoid { center: Vec<f64>, sharpness: f64 },
}

impl TestRegion {
    /// The ball `{|ζ_j − c_j| < r}` is not a box, so this is the box
    /// of half width `r` around `center`.
    pub fn square(center: &[Complex64], half_width: f64) -> Self {
        TestRegion::Box {
            re_lo: center.iter().map(|c| c.re - half_width).collect(),
            re_hi: center.iter().map(|c| c.re + half_width).collect(),
            im_lo: center.iter().map(|c| c.im - half_width).collect(),
            im_hi: center.iter().map(|c| c.im + half_width).collect(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            TestRegion::Everything => "everything".into(),
            TestRegion::Box { .. } => "box".into(),
            TestRegion::Gaussian { .. } => "gaussian bump".into(),
            TestRegion::Sigmoid { .. } => "sigmoid".into(),
        }
    }

    pub fn eval(&self, zeta: &[Complex64]) -> f64 {
        match self {
            TestRegion::Everything => 1.0,
            TestRegion::Box { re_lo, re_hi, im_lo, im_hi } => {
                let inside = zeta.iter().enumerate().all(|(j, z)| {
                    z.re >= re_lo[j] && z.re < re_hi[j] && z.im >= im_lo[j] && z.im < im_hi[j]
                });
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            TestRegion::Gaussian { center, width } => {
                let d2: f64 = zeta.iter().zip(center).map(|(a, b)| (a - b).norm_sqr()).sum();
                (-d2 / (2.0 * width * width)).exp()
            }
            TestRegion::Sigmoid { center, sharpness } => zeta
                .iter()
                .zip(center)
                .map(|(z, c)| 1.0 / (1.0 + (-sharpness * (z.re - c)).exp()))
                .product(),
        }
    }
}

/// Monte Carlo estimate of a weighted pushforward mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassEstimate {
    pub mass: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Least samples per side accepted by the equimeasurability check.
pub const MIN_SAMPLES: usize = 100_000;

/// Estimates `∫_D u(φ₁/φ₀, …, φ_N/φ₀)·|φ₀|^p dλ` for each region `u`.
///
/// Proposals are drawn independently per coordinate with modulus `R·U²` and
/// uniform phase, which oversamples the coordinate axes; every sample carries
/// the inverse proposal density `∏ 4π R^{1/2} r^{3/2}`. Weights such as
/// `|z₁/z₃|^p` on graph domains then have finite variance, which plain
/// uniform sampling does not give. All regions share one sample set.
pub fn pushforward_masses(
    domain: &BoundedDomain,
    family: &FunctionFamily,
    regions: &[TestRegion],
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<MassEstimate>> {
    if samples < 2 {
        return Err(Error::Config("at least two samples are needed".into()));
    }
    let radii = domain.box_radii().to_vec();
    let k = regions.len();
    let parts: Vec<Result<Vec<(f64, f64)>>> = chunk_sizes(samples)
        .par_iter()
        .enumerate()
        .map(|(chunk, &size)| {
            let mut rng = substream(seed, chunk as u64);
            let mut acc = vec![(0.0, 0.0); k];
            let mut z = vec![Complex64::new(0.0, 0.0); radii.len()];
            for _ in 0..size {
                let mut w = 1.0;
                for (zj, &r_max) in z.iter_mut().zip(&radii) {
                    let u: f64 = rng.random();
                    let theta = 2.0 * PI * rng.random::<f64>();
                    let r = r_max * u * u;
                    *zj = Complex64::from_polar(r, theta);
                    w *= 4.0 * PI * r_max.sqrt() * r.powf(1.5);
                }
                if w == 0.0 || !domain.contains(&z) {
                    continue;
                }
                let (f0, zeta) = family.ratios(&z)?;
                if f0.norm() == 0.0 {
                    continue;
                }
                let base = f0.norm().powf(p) * w;
                for (slot, region) in acc.iter_mut().zip(regions) {
                    let y = base * region.eval(&zeta);
                    slot.0 += y;
                    slot.1 += y * y;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![(0.0, 0.0); k];
    for part in parts {
        for (t, (a, b)) in total.iter_mut().zip(part?) {
            t.0 += a;
            t.1 += b;
        }
    }
    let n = samples as f64;
    Ok(total
        .into_iter()
        .map(|(s, s2)| {
            let mean = s / n;
            let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
            MassEstimate { mass: mean, std_error: (var / n).sqrt(), samples }
        })
        .collect())
}

/// Single-region form of [`pushforward_masses`].
pub fn pushforward_mass(
    domain: &BoundedDomain,
    family: &FunctionFamily,
    region: &TestRegion,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<MassEstimate> {
    Ok(pushforward_masses(domain, family, std::slice::from_ref(region), p, samples, seed)?.remove(0))
}

/// One compared region of an [`EquimeasureReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionComparison {
    pub region: TestRegion,
    pub source: MassEstimate,
    pub target: MassEstimate,
    /// `|difference| / combined σ`.
    pub z_score: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquimeasureReport {
    /// Exact comparison of `‖φ₀‖_p^p` and `‖ψ₀‖_p^p` when both are monomials.
    pub total_mass: Option<(f64, f64)>,
    pub total_mass_verdict: Option<Verdict>,
    pub regions: Vec<RegionComparison>,
    pub samples: usize,
    pub seed: u64,
    pub verdict: Verdict,
}

/// Compares the pushforward masses of the source family under
/// `|φ₀|^p dλ` with those of `ψ_j = T(φ_j)` under `|ψ₀|^p dλ`.
///
/// A region fails when the masses differ by at least 3 combined standard
/// errors, and is inconclusive when that error exceeds half the larger mass.
/// The two sides use independent streams derived from `seed`.
pub fn equimeasure_check(
    t: &CompositionIsometry,
    family: &FunctionFamily,
    regions: &[TestRegion],
    samples: usize,
    seed: u64,
) -> Result<EquimeasureReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::Config(format!("equimeasurability needs at least {MIN_SAMPLES} samples per side")));
    }
    let image = family.image(t);
    if let Some(p) = image.members[0].as_laurent() {
        if p.is_zero() {
            return Err(Error::DegenerateFamily("ψ₀ = T(φ₀) is identically zero".into()));
        }
    }
    let src = pushforward_masses(&t.source, family, regions, t.p, samples, derive_seed(seed, 1))?;
    let tgt = pushforward_masses(&t.target, &image, regions, t.p, samples, derive_seed(seed, 2))?;

    let (total_mass, total_mass_verdict) = match (family.members[0].as_laurent(), image.members[0].as_laurent()) {
        (Some(f0), Some(g0)) if f0.as_monomial().is_some() && g0.as_monomial().is_some() => {
            let mass = |d: &BoundedDomain, f: &LaurentPolynomial| match laurent_norm_closed(d, f, t.p) {
                Ok(r) => Ok(r.integral),
                Err(Error::DivergentIntegral(_)) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            };
            let a = mass(&t.source, f0)?;
            let b = mass(&t.target, g0)?;
            let ok = a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
            (Some((a, b)), Some(Verdict::from_bool(ok)))
        }
        _ => (None, None),
    };

    let rows: Vec<RegionComparison> = regions
        .iter()
        .zip(src.into_iter().zip(tgt))
        .map(|(region, (a, b))| {
            let diff = (a.mass - b.mass).abs();
            let sigma = a.std_error.hypot(b.std_error);
            let z_score = if sigma > 0.0 { diff / sigma } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
            let verdict = if !a.mass.is_finite() || !b.mass.is_finite() || z_score >= 3.0 {
                Verdict::Fail
            } else if sigma > 0.5 * a.mass.abs().max(b.mass.abs()) {
                Verdict::Inconclusive
            } else {
                Verdict::Pass
            };
            RegionComparison { region: region.clone(), source: a, target: b, z_score, verdict }
        })
        .collect();
    let verdict = Verdict::combine(rows.iter().map(|r| r.verdict).chain(total_mass_verdict));
    Ok(EquimeasureReport { total_mass, total_mass_verdict, regions: rows, samples, seed, verdict })
}

/// `count` random boxes in the ratio space of `family` on `domain`, plus a
/// Gaussian bump and a sigmoid. Ranges come from a pilot sample: each
/// real or imaginary coordinate is left unbounded with probability 1/2 and
/// otherwise restricted to a random interval covering at least half of the
/// pilot range.
pub fn equimeasure_regions(
    domain: &BoundedDomain,
    family: &FunctionFamily,
    count: usize,
    seed: u64,
) -> Result<Vec<TestRegion>> {
    let n = family.ratio_count();
    let pilot = sample(domain, derive_seed(seed, 3), 4096)?;
    let mut lo = vec![f64::INFINITY; 2 * n];
    let mut hi = vec![f64::NEG_INFINITY; 2 * n];
    let mut sum = vec![Complex64::new(0.0, 0.0); n];
    let mut used = 0.0;
    for z in &pilot.points {
        let (f0, zeta) = family.ratios(z)?;
        if f0.norm() == 0.0 || zeta.iter().any(|c| !c.is_finite()) {
            continue;
        }
        used += 1.0;
        for (j, c) in zeta.iter().enumerate() {
            lo[j] = lo[j].min(c.re);
            hi[j] = hi[j].max(c.re);
            lo[n + j] = lo[n + j].min(c.im);
            hi[n + j] = hi[n + j].max(c.im);
            sum[j] += c;
        }
    }
    if used == 0.0 {
        return Err(Error::DegenerateFamily("φ₀ vanishes on every pilot point".into()));
    }
    let mut rng = substream(seed, 4);
    let mut regions = Vec::with_capacity(count + 2);
    for _ in 0..count {
        let mut bounds = vec![(-UNBOUNDED, UNBOUNDED); 2 * n];
        for (j, b) in bounds.iter_mut().enumerate() {
            let range = hi[j] - lo[j];
            if range <= 0.0 || rng.random::<f64>() < 0.5 {
                continue;
            }
            let len = range * (0.5 + 0.5 * rng.random::<f64>());
            let start = lo[j] + (range - len) * rng.random::<f64>();
            *b = (start, start + len);
        }
        regions.push(TestRegion::Box {
            re_lo: bounds[..n].iter().map(|b| b.0).collect(),
            re_hi: bounds[..n].iter().map(|b| b.1).collect(),
            im_lo: bounds[n..].iter().map(|b| b.0).collect(),
            im_hi: bounds[n..].iter().map(|b| b.1).collect(),
        });
    }
    let center: Vec<Complex64> = sum.iter().map(|s| s / used).collect();
    let spread = (0..2 * n).map(|j| hi[j] - lo[j]).fold(0.0, f64::max).max(1e-12);
    regions.push(TestRegion::Gaussian { center: center.clone(), width: 0.5 * spread });
    regions.push(TestRegion::Sigmoid { center: center.iter().map(|c| c.re).collect(), sharpness: 4.0 / spread });
    Ok(regions)
}

/// The source family `φ_j = T⁻¹(ψ_j)` for `ψ = (1, w₁, …, w_n)`, so that the
/// target ratios are the coordinates themselves.
pub fn coordinate_family(t: &CompositionIsometry) -> Result<FunctionFamily> {
    let n = t.target.dimension();
    let inv = t.inverse()?;
    let mut members = vec![inv.apply(&LaurentPolynomial::one(n))?];
    for j in 0..n {
        members.push(inv.apply(&LaurentPolynomial::coordinate(n, j))?);
    }
    FunctionFamily::new(members)
}

/// `z^α` for every `α` in `indices`.
pub fn monomials(indices: &[MultiIndex]) -> Vec<LaurentPolynomial> {
    indices.iter().map(|a| LaurentPolynomial::monomial(a.clone(), ONE)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t3() -> CompositionIsometry {
        CompositionIsometry::counterexample(3, 2).unwrap()
    }

    #[test]
    fn counterexample_weight_and_images() {
        let t = t3();
        assert_eq!(t.p, 3.0);
        let g = t.weight.as_laurent().unwrap();
        assert_eq!(g, &LaurentPolynomial::monomial_unit(&[-2, 0, 2, 0]));
        let img = t.apply_laurent(&LaurentPolynomial::monomial_unit(&[2, 0, 0, 0])).unwrap();
        assert_eq!(img, LaurentPolynomial::monomial_unit(&[0, 0, 2, 0]));
        let one = t.apply_laurent(&LaurentPolynomial::one(4)).unwrap();
        assert_eq!(one.monomial_zero_set().unwrap(), vec![2]);
    }

    #[test]
    fn even_p_rejected() {
        assert!(matches!(CompositionIsometry::counterexample(1, 1), Err(Error::Precondition(_))));
        assert!(matches!(CompositionIsometry::counterexample(4, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn worked_norm_identity() {
        let t = t3();
        let phi = LaurentPolynomial::monomial_unit(&[2, 0, 0, 0]);
        let v = verify_isometry(&t, &[phi], VerifyMethod::Closed).unwrap();
        let expected = (PI.powi(4) / 80.0).powf(1.0 / 3.0);
        assert!((v.rows[0].source_norm - expected).abs() < 1e-13);
        assert!((v.rows[0].target_norm - expected).abs() < 1e-13);
    }

    #[test]
    fn inverse_roundtrip() {
        let t = t3();
        let inv = t.inverse().unwrap();
        assert_eq!(inv.weight.as_laurent().unwrap(), &LaurentPolynomial::monomial_unit(&[2, 0, -2, 0]));
        assert_eq!(inv.inverse().unwrap(), t);
        let phi = LaurentPolynomial::monomial_unit(&[1, 2, -1, 3]);
        let back = inv.apply_laurent(&t.apply_laurent(&phi).unwrap()).unwrap();
        assert!(back.approx_eq(&phi, 1e-15));
    }

    #[test]
    fn identity_operator_is_trivial() {
        let d = BoundedDomain::parse("ball(2)").unwrap();
        let t = CompositionIsometry::identity(d, 1.5).unwrap();
        let phi = LaurentPolynomial::monomial_unit(&[1, 2]);
        assert_eq!(t.apply_laurent(&phi).unwrap(), phi);
        assert_eq!(t.inverse().unwrap(), t);
        let v = verify_isometry(&t, &[phi], VerifyMethod::Closed).unwrap();
        assert_eq!(v.max_discrepancy, 0.0);
    }

    #[test]
    fn mobius_inverse_composes_to_identity() {
        let d = BoundedDomain::disc(1.0).unwrap();
        let map = HoloMapExpr::mobius(1, 0, Complex64::new(0.3, 0.0)).unwrap();
        let t = CompositionIsometry::new(d.clone(), d, map, 1.0, ONE).unwrap();
        let inv = t.inverse().unwrap();
        let phi = HoloFn::Laurent(LaurentPolynomial::monomial_unit(&[2]).add(&LaurentPolynomial::one(1)).unwrap());
        let back = inv.apply_fn(&t.apply_fn(&phi));
        for x in [0.1, -0.4, 0.7] {
            let z = [Complex64::new(x, 0.2)];
            assert!((back.eval(&z).unwrap() - phi.eval(&z).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn dropped_weight_diverges() {
        let t = t3().with_weight(Weight::Laurent { poly: LaurentPolynomial::one(4) });
        let phi = LaurentPolynomial::monomial_unit(&[2, 0, 0, 0]);
        let v = verify_isometry(&t, &[phi], VerifyMethod::Closed).unwrap();
        assert!(v.max_discrepancy > 1e-3);
    }

    #[test]
    fn disc_masses() {
        let d = BoundedDomain::disc(1.0).unwrap();
        let fam = FunctionFamily::from_laurent(vec![LaurentPolynomial::one(1), LaurentPolynomial::coordinate(1, 0)]).unwrap();
        let regions = [TestRegion::Everything, TestRegion::square(&[Complex64::new(0.0, 0.0)], 0.5)];
        let m = pushforward_masses(&d, &fam, &regions, 2.0, 400_000, 5).unwrap();
        assert!((m[0].mass - PI).abs() < 3.0 * m[0].std_error, "{:?}", m[0]);
        assert!((m[1].mass - 1.0).abs() < 3.0 * m[1].std_error, "{:?}", m[1]);
        let again = pushforward_masses(&d, &fam, &regions, 2.0, 400_000, 5).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn box_and_smooth_regions() {
        let z = [Complex64::new(0.2, -0.1)];
        let b = TestRegion::square(&[Complex64::new(0.0, 0.0)], 0.25);
        assert_eq!(b.eval(&z), 1.0);
        assert_eq!(b.eval(&[Complex64::new(0.3, 0.0)]), 0.0);
        let s = TestRegion::Sigmoid { center: vec![0.2], sharpness: 3.0 };
        assert!((s.eval(&z) - 0.5).abs() < 1e-15);
    }
}
