//! Recovering the point map `F` of an isometry from the ratio maps
//! `I_N = (φ₁/φ₀, …, φ_N/φ₀)` and `J_N = (ψ₁/ψ₀, …, ψ_N/ψ₀)` via
//! `F(z) = J_N⁻¹(I_N(z))`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{HoloFn, Holomorphic, LaurentPolynomial, MultiIndex};
use crate::geometry::{sample, BoundedDomain, Point};
use crate::isometry::{CompositionIsometry, FunctionFamily};

/// An isometry known only through its action on functions.
pub trait IsometryOracle: Sync {
    fn source(&self) -> &BoundedDomain;
    fn target(&self) -> &BoundedDomain;
    fn apply(&self, phi: &HoloFn) -> Result<HoloFn>;

    fn image(&self, family: &FunctionFamily) -> Result<FunctionFamily> {
        let members = family.members.iter().map(|f| self.apply(f)).collect::<Result<Vec<_>>>()?;
        Ok(FunctionFamily { members })
    }
}

impl IsometryOracle for CompositionIsometry {
    fn source(&self) -> &BoundedDomain {
        &self.source
    }

    fn target(&self) -> &BoundedDomain {
        &self.target
    }

    fn apply(&self, phi: &HoloFn) -> Result<HoloFn> {
        Ok(self.apply_fn(phi))
    }
}

/// Evaluators for `I_N` on the source and `J_N` on the target.
#[derive(Debug, Clone)]
pub struct RatioMaps {
    pub source_family: FunctionFamily,
    pub target_family: FunctionFamily,
    /// Coordinates whose hyperplanes make up `φ₀⁻¹(0)`, when `φ₀` is a monomial.
    pub source_zero_set: Option<Vec<usize>>,
}

impl RatioMaps {
    pub fn n(&self) -> usize {
        self.source_family.ratio_count()
    }

    /// `I_N(z)`, or `None` where `φ₀(z) = 0`.
    pub fn i_n(&self, z: &[Complex64]) -> Result<Option<Vec<Complex64>>> {
        ratios_or_none(&self.source_family, z)
    }

    /// When `ψ_j = w_j·ψ₀` for every target coordinate, `J_N` reads `w` off
    /// directly and the goal itself is a start.
    pub fn coordinate_start(&self, goal: &[Complex64]) -> Option<Point> {
        let members = &self.target_family.members;
        let base = members.first()?.as_laurent()?;
        let dim = base.dim();
        if members.len() <= dim {
            return None;
        }
        let coords = (0..dim).all(|j| {
            let want = base.mul(&LaurentPolynomial::coordinate(dim, j));
            match (members[j + 1].as_laurent(), want) {
                (Some(p), Ok(q)) => p.approx_eq(&q, 1e-14),
                _ => false,
            }
        });
        coords.then(|| goal[..dim].to_vec())
    }

    /// `J_N(w)`, or `None` where `ψ₀(w) = 0`.
    pub fn j_n(&self, w: &[Complex64]) -> Result<Option<Vec<Complex64>>> {
        ratios_or_none(&self.target_family, w)
    }
}

fn ratios_or_none(family: &FunctionFamily, z: &[Complex64]) -> Result<Option<Vec<Complex64>>> {
    let (f0, r) = family.ratios(z)?;
    Ok(if f0.norm() == 0.0 { None } else { Some(r) })
}

/// Pairs `family` with its image under the oracle.
pub fn build_ratio_maps<T: IsometryOracle + ?Sized>(t: &T, family: &FunctionFamily) -> Result<RatioMaps> {
    let image = t.image(family)?;
    let degenerate = match image.members[0].as_laurent() {
        Some(p) => p.is_zero(),
        None => {
            let probe = sample(t.target(), 0, 64)?;
            probe.points.iter().all(|w| image.members[0].eval(w).map(|v| v.norm() == 0.0).unwrap_or(true))
        }
    };
    if degenerate {
        return Err(Error::DegenerateFamily("ψ₀ = T(φ₀) vanishes identically".into()));
    }
    let source_zero_set = family.members[0].as_laurent().and_then(|p| p.monomial_zero_set());
    Ok(RatioMaps { source_family: family.clone(), target_family: image, source_zero_set })
}

/// The family `φ₀ = T⁻¹(1)`, `T⁻¹(w_j)` for every target coordinate, then
/// every source monomial of total degree `1..=degree`.
pub fn default_family(t: &CompositionIsometry, degree: u32) -> Result<FunctionFamily> {
    let inv = t.inverse()?;
    let n = t.target.dimension();
    let mut members = vec![inv.apply(&LaurentPolynomial::one(n))?];
    for j in 0..n {
        members.push(inv.apply(&LaurentPolynomial::coordinate(n, j))?);
    }
    for a in MultiIndex::total_degree(t.source.dimension(), degree) {
        if !a.is_zero() {
            members.push(HoloFn::Laurent(LaurentPolynomial::monomial(a, Complex64::new(1.0, 0.0))));
        }
    }
    FunctionFamily::new(members)
}

/// Settings for [`solve_point`] and [`reconstruct_map`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Accept a solution when `sqrt(Σ|J_N(w) − I_N(z)|²)` is below this.
    pub tol: f64,
    /// Local solves per point, started from the best-matching pool points.
    pub starts: usize,
    pub max_iter: usize,
    /// Target points screened for starting values.
    pub pool: usize,
    pub seed: u64,
    /// Absolute `|φ₀|` threshold; `1e-8 ×` the grid median when absent.
    pub exclusion_threshold: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-8, starts: 6, max_iter: 100, pool: 4096, seed: 0, exclusion_threshold: None }
    }
}

/// Outcome for one source point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PointStatus {
    Mapped { w: Point, residual: f64 },
    /// `|φ₀(z)|` is below the exclusion threshold: `z` is a candidate point of `A₁`.
    ExcludedZeroWeight { phi0_abs: f64 },
    /// Every local solve stalled above tolerance.
    ExcludedNoPreimage { best_residual: f64 },
    /// The iteration budget ran out while the residual was still decreasing.
    Unresolved { best_residual: f64 },
}

impl PointStatus {
    pub fn mapped(&self) -> Option<&Point> {
        match self {
            PointStatus::Mapped { w, .. } => Some(w),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PointStatus::Mapped { .. } => "mapped",
            PointStatus::ExcludedZeroWeight { .. } => "excluded_zero_weight",
            PointStatus::ExcludedNoPreimage { .. } => "excluded_no_preimage",
            PointStatus::Unresolved { .. } => "unresolved",
        }
    }

    pub fn residual(&self) -> Option<f64> {
        match self {
            PointStatus::Mapped { residual, .. } => Some(*residual),
            PointStatus::ExcludedNoPreimage { best_residual } | PointStatus::Unresolved { best_residual } => {
                Some(*best_residual)
            }
            PointStatus::ExcludedZeroWeight { .. } => None,
        }
    }
}

/// Target points with precomputed `J_N` values, used to seed local solves.
#[derive(Debug, Clone)]
pub struct StartPool {
    points: Vec<(Point, Vec<Complex64>)>,
}

impl StartPool {
    pub fn new(maps: &RatioMaps, target: &BoundedDomain, cfg: &SolverConfig) -> Result<Self> {
        let batch = sample(target, cfg.seed, cfg.pool.max(1))?;
        let mut points = Vec::with_capacity(batch.points.len());
        for w in batch.points {
            if let Some(j) = maps.j_n(&w)? {
                if j.iter().all(|c| c.is_finite()) {
                    points.push((w, j));
                }
            }
        }
        if points.is_empty() {
            return Err(Error::DegenerateFamily("ψ₀ vanishes on the whole start pool".into()));
        }
        Ok(Self { points })
    }

    fn best(&self, goal: &[Complex64], count: usize) -> Vec<&Point> {
        let mut scored: Vec<(f64, &Point)> =
            self.points.iter().map(|(w, j)| (dist2(j, goal), w)).collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        scored.into_iter().take(count.max(1)).map(|(_, w)| w).collect()
    }
}

fn dist2(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Solves `J_N(w) = I_N(z)` for `w` in the target.
///
/// Points with `|φ₀(z)| < threshold` are excluded without solving. Each
/// start runs Levenberg–Marquardt with a finite-difference complex Jacobian;
/// steps leaving the target are rejected.
pub fn solve_point(
    maps: &RatioMaps,
    target: &BoundedDomain,
    pool: &StartPool,
    z: &[Complex64],
    threshold: f64,
    cfg: &SolverConfig,
) -> Result<PointStatus> {
    let phi0 = maps.source_family.members[0].eval(z)?.norm();
    if phi0 < threshold {
        return Ok(PointStatus::ExcludedZeroWeight { phi0_abs: phi0 });
    }
    let goal = maps.i_n(z)?.expect("φ₀(z) is above the threshold");
    let mut best: Option<(f64, Point, bool)> = None;
    let direct = maps.coordinate_start(&goal).filter(|w| target.contains(w));
    let starts = direct.into_iter().chain(pool.best(&goal, cfg.starts).into_iter().cloned());
    for start in starts {
        let (w, res, stalled) = levenberg_marquardt(maps, target, &goal, start, cfg)?;
        if res < cfg.tol {
            return Ok(PointStatus::Mapped { w, residual: res });
        }
        if best.as_ref().is_none_or(|b| res < b.0) {
            best = Some((res, w, stalled));
        }
    }
    let (res, _, stalled) = best.expect("at least one start");
    Ok(if stalled {
        PointStatus::ExcludedNoPreimage { best_residual: res }
    } else {
        PointStatus::Unresolved { best_residual: res }
    })
}

fn residual_vec(maps: &RatioMaps, w: &[Complex64], goal: &[Complex64]) -> Option<Vec<Complex64>> {
    let j = maps.j_n(w).ok()??;
    let r: Vec<Complex64> = j.iter().zip(goal).map(|(a, b)| a - b).collect();
    r.iter().all(|c| c.is_finite()).then_some(r)
}

/// Returns `(w, residual, stalled)`; `stalled` is false only when the
/// iteration budget ran out.
fn levenberg_marquardt(
    maps: &RatioMaps,
    target: &BoundedDomain,
    goal: &[Complex64],
    mut w: Point,
    cfg: &SolverConfig,
) -> Result<(Point, f64, bool)> {
    let n = w.len();
    let Some(mut r) = residual_vec(maps, &w, goal) else {
        return Ok((w, f64::INFINITY, true));
    };
    let mut cost = r.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let mut mu = 1e-3;
    let scale = target.box_radii().iter().cloned().fold(0.0, f64::max);
    for _ in 0..cfg.max_iter {
        if cost.sqrt() < 1e-3 * cfg.tol {
            return Ok((w, cost.sqrt(), true));
        }
        let h = 1e-6 * scale;
        let mut jac = DMatrix::<Complex64>::zeros(r.len(), n);
        for j in 0..n {
            let mut col = vec![Complex64::new(0.0, 0.0); r.len()];
            let mut ok = true;
            for (t, c) in [(h, 8.0), (-h, -8.0), (2.0 * h, -1.0), (-2.0 * h, 1.0)] {
                let mut y = w.clone();
                y[j] += Complex64::new(t, 0.0);
                match maps.j_n(&y)? {
                    Some(v) => col.iter_mut().zip(v).for_each(|(acc, x)| *acc += x * c),
                    None => ok = false,
                }
            }
            if !ok {
                return Ok((w, cost.sqrt(), true));
            }
            for (i, v) in col.into_iter().enumerate() {
                jac[(i, j)] = v / (12.0 * h);
            }
        }
        let jh = jac.adjoint();
        let jtj = &jh * &jac;
        let rhs = -(&jh * DVector::from_vec(r.clone()));
        let mut improved = false;
        while mu < 1e12 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += Complex64::new(mu * (1.0 + jtj[(k, k)].re), 0.0);
            }
            let Some(step) = a.lu().solve(&rhs) else {
                mu *= 10.0;
                continue;
            };
            let cand: Point = w.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            if target.contains(&cand) {
                if let Some(rc) = residual_vec(maps, &cand, goal) {
                    let cc = rc.iter().map(|c| c.norm_sqr()).sum::<f64>();
                    if cc < cost {
                        let small = step.norm() <= 1e-15 * (1.0 + DVector::from_vec(w.clone()).norm());
                        w = cand;
                        r = rc;
                        cost = cc;
                        mu = (mu * 0.1).max(1e-12);
                        improved = true;
                        if small {
                            return Ok((w, cost.sqrt(), true));
                        }
                        break;
                    }
                }
            }
            mu *= 10.0;
        }
        if !improved {
            return Ok((w, cost.sqrt(), true));
        }
    }
    Ok((w, cost.sqrt(), false))
}

/// One grid point of a [`ReconstructionResult`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub z: Point,
    #[serde(flatten)]
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionDiagnostics {
    pub mapped: usize,
    pub excluded_zero_weight: usize,
    pub excluded_no_preimage: usize,
    pub unresolved: usize,
    pub max_residual: f64,
    /// Pairs of distinct grid points mapped to the same `w`.
    pub collisions: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionResult {
    pub points: Vec<GridPoint>,
    /// Grid indices flagged as candidate points of `A₁`.
    pub excluded_set: Vec<usize>,
    pub diagnostics: ReconstructionDiagnostics,
}

/// Runs [`solve_point`] over `grid` in parallel.
pub fn reconstruct_map<T: IsometryOracle + ?Sized>(
    t: &T,
    family: &FunctionFamily,
    grid: &[Point],
    cfg: &SolverConfig,
) -> Result<ReconstructionResult> {
    if grid.is_empty() {
        return Err(Error::Config("the grid is empty".into()));
    }
    let maps = build_ratio_maps(t, family)?;
    let threshold = match cfg.exclusion_threshold {
        Some(v) => v,
        None => {
            let mut mags = grid
                .iter()
                .map(|z| family.members[0].eval(z).map(|v| v.norm()))
                .collect::<Result<Vec<_>>>()?;
            mags.sort_by(f64::total_cmp);
            1e-8 * mags[mags.len() / 2]
        }
    };
    let pool = StartPool::new(&maps, t.target(), cfg)?;
    let statuses = grid
        .par_iter()
        .map(|z| solve_point(&maps, t.target(), &pool, z, threshold, cfg))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<GridPoint> =
        grid.iter().cloned().zip(statuses).map(|(z, status)| GridPoint { z, status }).collect();

    let count = |label: &str| points.iter().filter(|g| g.status.label() == label).count();
    let mapped: Vec<(&Point, &Point)> =
        points.iter().filter_map(|g| g.status.mapped().map(|w| (&g.z, w))).collect();
    let mut collisions = 0;
    for (i, (za, wa)) in mapped.iter().enumerate() {
        for (zb, wb) in &mapped[i + 1..] {
            if distance(wa, wb) < 10.0 * cfg.tol && distance(za, zb) > 1e-9 {
                collisions += 1;
            }
        }
    }
    let diagnostics = ReconstructionDiagnostics {
        mapped: mapped.len(),
        excluded_zero_weight: count("excluded_zero_weight"),
        excluded_no_preimage: count("excluded_no_preimage"),
        unresolved: count("unresolved"),
        max_residual: points
            .iter()
            .filter_map(|g| g.status.mapped().and(g.status.residual()))
            .fold(0.0, f64::max),
        collisions,
        threshold,
    };
    let excluded_set = points
        .iter()
        .enumerate()
        .filter(|(_, g)| matches!(g.status, PointStatus::ExcludedZeroWeight { .. }))
        .map(|(i, _)| i)
        .collect();
    Ok(ReconstructionResult { points, excluded_set, diagnostics })
}

/// Euclidean distance in ℂⁿ.
pub fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    dist2(a, b).sqrt()
}

/// Grid of the closure-free parent domain: moduli at the cell midpoints
/// `(i + ½)/n · R_j`, plus the modulus 0 on every excluded coordinate so the
/// slices `{z_j = 0}` are present, with fixed irrational phases. Points
/// outside the parent domain are dropped.
pub fn modulus_grid(domain: &BoundedDomain, n_per_dim: usize) -> Vec<Point> {
    let parent = domain.without_exclusions();
    let dim = domain.dimension();
    let levels: Vec<Vec<f64>> = (0..dim)
        .map(|j| {
            let r = domain.box_radii()[j];
            let mut v: Vec<f64> = (0..n_per_dim).map(|i| (i as f64 + 0.5) / n_per_dim as f64 * r).collect();
            if domain.null_exclusions().contains(&j) {
                v.insert(0, 0.0);
            }
            v
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    if levels.iter().any(|l| l.is_empty()) {
        return out;
    }
    loop {
        let z: Point = (0..dim)
            .map(|j| {
                let theta = 0.618_033_988_749_895 * (1 + idx[j] + 3 * j) as f64 * std::f64::consts::TAU;
                Complex64::from_polar(levels[j][idx[j]], theta)
            })
            .collect();
        if parent.contains(&z) {
            out.push(z);
        }
        let mut j = 0;
        while j < dim {
            idx[j] += 1;
            if idx[j] < levels[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == dim {
            return out;
        }
    }
}

/// Determinant of the 4th-order central-difference Jacobian of `f` at `z`
/// with real step `h`.
pub fn stencil_jacobian<F>(f: F, z: &[Complex64], h: f64) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Point>,
{
    let n = z.len();
    let mut jac = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let at = |t: f64| {
            let mut y = z.to_vec();
            y[j] += Complex64::new(t, 0.0);
            f(&y)
        };
        let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
        for i in 0..n {
            jac[(i, j)] = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
        }
    }
    Ok(jac.determinant())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusCheck {
    pub max_relative_error: f64,
    pub comparisons: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Max over tests and pairs `(z, w = F(z))` of
/// `| |Tφ(w)|·|J_F(z)|^{2/p} − |φ(z)| | / |φ(z)|`.
///
/// `jacobian` supplies `J_F(z)`, either from a known map or from
/// [`stencil_jacobian`] of the reconstructed `F`. Pairs where every test is
/// tiny are skipped with a warning.
pub fn verify_modulus_identity<T, J>(
    t: &T,
    pairs: &[(Point, Point)],
    tests: &[LaurentPolynomial],
    p: f64,
    jacobian: J,
) -> Result<ModulusCheck>
where
    T: IsometryOracle + ?Sized,
    J: Fn(&[Complex64]) -> Result<Complex64>,
{
    let images = tests
        .iter()
        .map(|f| t.apply(&HoloFn::Laurent(f.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut max_err: f64 = 0.0;
    let mut comparisons = 0;
    let mut warnings = Vec::new();
    for (z, w) in pairs {
        let jf = jacobian(z)?.norm().powf(2.0 / p);
        let mut any = false;
        for (f, tf) in tests.iter().zip(&images) {
            let rhs = f.evaluate(z)?.norm();
            if rhs < 1e-300 {
                continue;
            }
            any = true;
            let lhs = tf.eval(w)?.norm() * jf;
            max_err = max_err.max((lhs - rhs).abs() / rhs);
            comparisons += 1;
        }
        if !any {
            warnings.push(format!("every test vanishes at {z:?}"));
        }
    }
    Ok(ModulusCheck { max_relative_error: max_err, comparisons, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportionality {
    /// Mean of `Tφ(w)/φ(z)` over the usable tests.
    pub lambda: Complex64,
    /// Largest pairwise difference of the ratios relative to `|λ|`.
    pub spread: f64,
    pub used_tests: usize,
}

/// Ratios `Tφ(w)/φ(z)` over tests with `|φ(z)|` above `1e-10·max|φ(z)|`.
/// A small spread certifies `(z, w)` as a point of the graph of `F`.
pub fn verify_proportionality<T: IsometryOracle + ?Sized>(
    t: &T,
    z: &[Complex64],
    w: &[Complex64],
    tests: &[LaurentPolynomial],
) -> Result<Proportionality> {
    let vals = tests.iter().map(|f| f.evaluate(z)).collect::<Result<Vec<_>>>()?;
    let top = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return Err(Error::AllTestsVanish);
    }
    let mut ratios = Vec::new();
    for (f, v) in tests.iter().zip(&vals) {
        if v.norm() > 1e-10 * top {
            ratios.push(t.apply(&HoloFn::Laurent(f.clone()))?.eval(w)? / v);
        }
    }
    let lambda = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    let mut spread: f64 = 0.0;
    for (i, a) in ratios.iter().enumerate() {
        for b in &ratios[i + 1..] {
            spread = spread.max((a - b).norm());
        }
    }
    Ok(Proportionality { lambda, spread: spread / lambda.norm().max(f64::MIN_POSITIVE), used_tests: ratios.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::HoloMapExpr;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn power_family(n: i64) -> FunctionFamily {
        FunctionFamily::from_laurent((0..=n).map(|j| LaurentPolynomial::monomial_unit(&[j])).collect()).unwrap()
    }

    #[test]
    fn identity_on_disc() {
        let d = BoundedDomain::disc(1.0).unwrap();
        let t = CompositionIsometry::identity(d, 2.0).unwrap();
        let fam = power_family(1);
        let maps = build_ratio_maps(&t, &fam).unwrap();
        let z = [c(0.3, 0.0)];
        assert_eq!(maps.i_n(&z).unwrap().unwrap(), maps.j_n(&z).unwrap().unwrap());
        let res = reconstruct_map(&t, &fam, &[z.to_vec()], &SolverConfig::default()).unwrap();
        let w = res.points[0].status.mapped().unwrap();
        assert!(distance(w, &z) < 1e-10);
    }

    #[test]
    fn mobius_reconstruction() {
        let d = BoundedDomain::disc(1.0).unwrap();
        let a = c(0.3, 0.0);
        let t = CompositionIsometry::new(d.clone(), d, HoloMapExpr::mobius(1, 0, a).unwrap(), 1.0, c(1.0, 0.0)).unwrap();
        let grid: Vec<Point> = (0..10).map(|i| vec![Complex64::from_polar(0.08 * i as f64, 0.7 * i as f64)]).collect();
        let res = reconstruct_map(&t, &power_family(3), &grid, &SolverConfig::default()).unwrap();
        assert_eq!(res.diagnostics.mapped, 10);
        for g in &res.points {
            let truth = (a - g.z[0]) / (1.0 - a.conj() * g.z[0]);
            assert!((g.status.mapped().unwrap()[0] - truth).norm() < 1e-9);
        }
    }

    #[test]
    fn counterexample_point_and_exclusion() {
        let t = CompositionIsometry::counterexample(3, 2).unwrap();
        let fam = default_family(&t, 2).unwrap();
        let z = vec![c(0.3, 0.0), c(0.2, 0.0), c(0.5, 0.0), c(0.05, 0.0)];
        let on_a1 = vec![c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.1, 0.0)];
        let cfg = SolverConfig { exclusion_threshold: Some(1e-10), ..SolverConfig::default() };
        let res = reconstruct_map(&t, &fam, &[z, on_a1], &cfg).unwrap();
        let w = res.points[0].status.mapped().unwrap();
        let truth = [c(0.3, 0.0), c(0.0054, 0.0), c(0.5, 0.0), c(0.4, 0.0)];
        assert!(distance(w, &truth) < 1e-9, "{w:?}");
        assert_eq!(res.excluded_set, vec![1]);
        assert_eq!(res.diagnostics.collisions, 0);
    }

    #[test]
    fn modulus_identity_and_proportionality() {
        let t = CompositionIsometry::counterexample(3, 2).unwrap();
        let f = t.map.inverse().unwrap();
        let z = vec![c(0.3, 0.0), c(0.2, 0.0), c(0.5, 0.0), c(0.05, 0.0)];
        let w = f.apply(&z).unwrap();
        let tests = vec![LaurentPolynomial::monomial_unit(&[2, 0, -2, 0]), LaurentPolynomial::monomial_unit(&[1, 1, 0, 0])];
        let m = verify_modulus_identity(&t, &[(z.clone(), w.clone())], &tests, 3.0, |x| f.jacobian_det(x)).unwrap();
        assert!(m.max_relative_error < 1e-12);
        let s = verify_modulus_identity(
            &t,
            &[(z.clone(), w.clone())],
            &tests,
            3.0,
            |x| stencil_jacobian(|y| f.apply(y), x, 1e-3),
        )
        .unwrap();
        assert!(s.max_relative_error < 1e-8, "{s:?}");
        let tests = crate::isometry::monomials(&MultiIndex::total_degree(4, 2));
        let ok = verify_proportionality(&t, &z, &w, &tests).unwrap();
        assert!(ok.spread < 1e-10);
        let mut off = w.clone();
        off[1] += c(0.05, 0.0);
        assert!(verify_proportionality(&t, &z, &off, &tests).unwrap().spread > 1e-2);
    }

    #[test]
    fn grid_contains_excluded_slices() {
        let t = CompositionIsometry::counterexample(3, 2).unwrap();
        let g = modulus_grid(&t.source, 5);
        assert!(g.iter().any(|z| z[0].norm() == 0.0));
        assert!(g.iter().all(|z| t.source.without_exclusions().contains(z)));
    }
}
