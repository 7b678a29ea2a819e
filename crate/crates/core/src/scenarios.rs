//! Packaged end-to-end experiments with structured reports.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{HoloFn, HoloMapExpr, Holomorphic, LaurentPolynomial, MultiIndex, Weight};
use crate::geometry::{boundary_distance, interior_closure_probe, sample, BoundedDomain, Point};
use crate::integrate::{laurent_norm_closed, monomial_integral};
use crate::isometry::{
    coordinate_family, equimeasure_check, equimeasure_regions, monomial_battery, monomials, verify_isometry,
    CompositionIsometry, VerifyMethod,
};
use crate::kernel::{boundary_probe, BasisSpec, OptimizerConfig};
use crate::reconstruct::{default_family, distance, modulus_grid, reconstruct_map, SolverConfig};
use crate::rng::derive_seed;
use crate::verdict::Verdict;

/// Minimum grid size for [`roundtrip_scenario`].
pub const ROUNDTRIP_POINTS: usize = 50;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// One line of a [`Report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The mathematical statement being tested.
    pub statement: String,
    pub expected: String,
    pub observed: String,
    pub tolerance: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub samples: usize,
    pub version: String,
}

/// Outcome of a scenario; `pass` holds iff every check passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub label: String,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub provenance: Provenance,
}

impl Report {
    fn new(label: String, checks: Vec<Check>, cfg: &ScenarioConfig) -> Self {
        let pass = checks.iter().all(|c| c.verdict.is_pass());
        Self {
            label,
            checks,
            pass,
            provenance: Provenance {
                seed: cfg.seed,
                samples: cfg.samples,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs `body`, turning an error into a failed check that carries the message.
fn run_check(name: &str, statement: &str, body: impl FnOnce() -> Result<(String, String, String, Verdict)>) -> Check {
    let (expected, observed, tolerance, verdict) = match body() {
        Ok(v) => v,
        Err(e) => ("no error".into(), format!("error: {e}"), "-".into(), Verdict::Fail),
    };
    Check {
        name: name.into(),
        statement: statement.into(),
        expected,
        observed,
        tolerance,
        verdict,
    }
}

/// Knobs shared by all scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Monte Carlo samples per side for the equimeasurability check.
    pub samples: usize,
    pub boxes: usize,
    pub battery: usize,
    /// Modulus levels per coordinate of the reconstruction grid.
    pub grid: usize,
    /// Total degree of the extra monomials in the reconstruction family.
    pub family_degree: u32,
    pub closure_resolution: f64,
    pub solver: SolverConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 1_000_000,
            boxes: 20,
            battery: 30,
            grid: 5,
            family_degree: 3,
            closure_resolution: 0.02,
            solver: SolverConfig::default(),
        }
    }
}

/// Deliberate defects that a sound harness must detect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Replace the weight by 1.
    DropWeight,
    /// Raise the weight exponent from `m` to `m + 1`.
    WeightExponentShift,
}

fn fmt_e(x: f64) -> String {
    format!("{x:.3e}")
}

/// The counterexample between `ball(2) × hartogs(k)` and
/// `fk_ball_prime(k) × Δ²` with `p = 2k/m`.
///
/// Fails with [`Error::Precondition`] when `p` is an even integer.
pub fn counterexample_scenario(k: u32, m: u32, mutation: Option<Mutation>, cfg: &ScenarioConfig) -> Result<Report> {
    let truth = CompositionIsometry::counterexample(k, m)?;
    let p = truth.p;
    let t = match mutation {
        None => truth.clone(),
        Some(Mutation::DropWeight) => truth.with_weight(Weight::Laurent { poly: LaurentPolynomial::one(4) }),
        Some(Mutation::WeightExponentShift) => {
            let e = m as i64 + 1;
            truth.with_weight(Weight::Laurent { poly: LaurentPolynomial::monomial_unit(&[-e, 0, e, 0]) })
        }
    };
    let f_map = truth.map.inverse()?;
    let ki = k as i64;
    let mi = m as i64;
    let mut checks = Vec::new();

    checks.push(run_check(
        "a_isometry_battery",
        "‖Tφ‖_p on the target equals ‖φ‖_p on the source for every monomial of the battery (closed forms)",
        || {
            let tests = monomial_battery(&truth, cfg.battery, derive_seed(cfg.seed, 1))?;
            let v = verify_isometry(&t, &tests, VerifyMethod::Closed)?;
            Ok((
                "max relative discrepancy 0".into(),
                fmt_e(v.max_discrepancy),
                "< 1e-9".into(),
                Verdict::from_bool(v.max_discrepancy < 1e-9),
            ))
        },
    ));
    if (k, m) == (3, 2) {
        checks.push(run_check(
            "a_worked_instance",
            "for φ = z₁² both ‖φ‖₃³ and ‖Tφ‖₃³ equal (π²/20)·(π²/4) = π⁴/80",
            || {
                let phi = LaurentPolynomial::monomial_unit(&[2, 0, 0, 0]);
                let src = laurent_norm_closed(&t.source, &phi, p)?.integral;
                let tgt = match laurent_norm_closed(&t.target, &t.apply_laurent(&phi)?, p) {
                    Ok(r) => r.integral,
                    Err(Error::DivergentIntegral(_)) => f64::INFINITY,
                    Err(e) => return Err(e),
                };
                let want = PI.powi(4) / 80.0;
                let err = ((src - want).abs()).max((tgt - want).abs()) / want;
                Ok((format!("{want:.12}"), format!("{src:.12} / {tgt:.12}"), "relative 1e-12".into(), Verdict::from_bool(err < 1e-12)))
            },
        ));
    }

    checks.push(run_check(
        "b_jacobian_formula",
        "J_F(z) = (z₁/z₃)^k, checked against the exact determinant and a 4th-order finite-difference Jacobian",
        || {
            let pts = sample(&truth.source, derive_seed(cfg.seed, 2), 100)?.points;
            let mut worst: f64 = 0.0;
            for z in &pts {
                let formula = (z[0] / z[2]).powi(ki as i32);
                let exact = f_map.jacobian_det(z)?;
                let fd = f_map.jacobian_matrix_fd(z, 1e-4)?.determinant();
                worst = worst.max(((exact - formula) / formula).norm()).max(((fd - formula) / formula).norm());
            }
            Ok(("relative error 0".into(), fmt_e(worst), "< 1e-6".into(), Verdict::from_bool(worst < 1e-6)))
        },
    ));

    checks.push(run_check(
        "c_weight_branch",
        "the weight g = (w₁⁻¹w₃)^m is a branch of J_G^{2/p}: |g|^p = |J_G|² pointwise",
        || {
            let g = t.weight.clone();
            let pts = sample(&truth.target, derive_seed(cfg.seed, 3), 100)?.points;
            let mut worst: f64 = 0.0;
            for w in &pts {
                let lhs = g.eval(w)?.norm().powf(p);
                let rhs = truth.map.jacobian_det(w)?.norm_sqr();
                worst = worst.max((lhs - rhs).abs() / rhs);
            }
            Ok(("relative error 0".into(), fmt_e(worst), "< 1e-12".into(), Verdict::from_bool(worst < 1e-12)))
        },
    ));

    checks.push(run_check(
        "d_exceptional_sets",
        "T⁻¹(1) = λ̄(z₁/z₃)^m with zero set A₁ = {z₁ = 0}, and T(1) = λ(w₁⁻¹w₃)^m with zero set A₂ = {w₃ = 0}",
        || {
            let inv = t.inverse()?;
            let t_inv_one = inv.apply_laurent(&LaurentPolynomial::one(4))?;
            let t_one = t.apply_laurent(&LaurentPolynomial::one(4))?;
            let want_inv = LaurentPolynomial::monomial(MultiIndex(vec![mi, 0, -mi, 0]), truth.lambda.conj());
            let want_one = LaurentPolynomial::monomial(MultiIndex(vec![-mi, 0, mi, 0]), truth.lambda);
            let ok = t_inv_one.approx_eq(&want_inv, 1e-15)
                && t_one.approx_eq(&want_one, 1e-15)
                && t_inv_one.monomial_zero_set() == Some(vec![0])
                && t_one.monomial_zero_set() == Some(vec![2]);
            Ok((
                "A₁ = {z₁=0}, A₂ = {w₃=0}".into(),
                format!("T⁻¹(1) = {t_inv_one}, T(1) = {t_one}"),
                "exact".into(),
                Verdict::from_bool(ok),
            ))
        },
    ));

    if p >= 2.0 {
        checks.push(run_check(
            "d_extension",
            "for p ≥ 2 the functions z₁⁻¹ and w₃⁻¹ are not p-integrable, so A^p of the punctured domains equals A^p of the full ones",
            || {
                let a = monomial_integral(&truth.source, &[-1, 0, 0, 0], p);
                let b = monomial_integral(&truth.target, &[0, 0, -1, 0], p);
                let ok = matches!(a, Err(Error::DivergentIntegral(_))) && matches!(b, Err(Error::DivergentIntegral(_)));
                Ok(("both integrals diverge".into(), format!("{:?} / {:?}", a.is_err(), b.is_err()), "exact".into(), Verdict::from_bool(ok)))
            },
        ));
    }

    checks.push(run_check(
        "e_boundary_blow_down",
        "F maps the hypersurface A₁ = {z₁ = 0} into the boundary of D₂: F(0, z₂, z₃, z₄) = (0, 0, z₃, z₃⁻ᵏz₄) ∈ ∂D₂",
        || {
            let parent = truth.source.without_exclusions();
            let pts = sample(&parent, derive_seed(cfg.seed, 4), 20)?.points;
            let mut worst: f64 = 0.0;
            for mut z in pts {
                z[0] = Complex64::new(0.0, 0.0);
                let w = f_map.apply(&z)?;
                let d = boundary_distance(&truth.target, &w, 1e-9);
                worst = worst.max(if d.inside { f64::INFINITY } else { d.distance });
            }
            Ok(("distance 0 for 20 points".into(), fmt_e(worst), "< 1e-6".into(), Verdict::from_bool(worst < 1e-6)))
        },
    ));

    checks.push(run_check(
        "f_closure_probe",
        "D₁ and D₂ equal the interiors of their closures (sufficient for A^p-completeness); finite-resolution probe finds no violation",
        || {
            let a = interior_closure_probe(&truth.source.without_exclusions(), cfg.closure_resolution);
            let b = interior_closure_probe(&truth.target.without_exclusions(), cfg.closure_resolution);
            let n = a.witnesses.len() + b.witnesses.len();
            Ok((
                "0 witnesses".into(),
                format!("{n} witnesses over {} grid points", a.grid_points + b.grid_points),
                format!("resolution {}", cfg.closure_resolution),
                Verdict::from_bool(n == 0),
            ))
        },
    ));

    checks.push(run_check(
        "g_automorphism_dimensions",
        "dim Aut(𝔹²) + dim Aut(Δ*) + dim Aut(Δ) = 8 + 1 + 3 = 12 exceeds the bound dim Aut(𝔹') + 2·dim Aut(Δ) ≤ 4 + 3 + 3 = 10, so D₁ and D₂ are not biholomorphic (recorded arithmetic, not computed)",
        || {
            let (ball, punctured, disc, ball_prime_bound) = (8, 1, 3, 2 + 2);
            let left = ball + punctured + disc;
            let right = ball_prime_bound + disc + disc;
            Ok((
                "12 vs ≤ 10".into(),
                format!("{left} vs ≤ {right}"),
                "exact".into(),
                Verdict::from_bool(left == 12 && right == 10 && left > right),
            ))
        },
    ));

    checks.push(run_check(
        "h_equimeasurability",
        "the ratio maps push |φ₀|^p dλ on D₁ and |ψ₀|^p dλ on D₂ forward to the same measure (random boxes, a Gaussian bump and a sigmoid)",
        || {
            let family = coordinate_family(&truth)?;
            let regions = equimeasure_regions(&truth.target, &family.image(&truth), cfg.boxes, derive_seed(cfg.seed, 5))?;
            let r = equimeasure_check(&t, &family, &regions, cfg.samples, derive_seed(cfg.seed, 6))?;
            let fails = r.regions.iter().filter(|c| c.verdict == Verdict::Fail).count();
            let worst = r.regions.iter().map(|c| c.z_score).fold(0.0, f64::max);
            let total = match r.total_mass {
                Some((a, b)) => format!("; total mass {a:.6} vs {b:.6}"),
                None => String::new(),
            };
            Ok((
                "every region within 3σ".into(),
                format!("{} regions, {fails} failed, max z-score {worst:.2}{total}", r.regions.len()),
                "3 combined σ".into(),
                r.verdict,
            ))
        },
    ));

    let grid = modulus_grid(&truth.source, cfg.grid);
    checks.push(run_check(
        "i_reconstruction",
        "F(z) = J_N⁻¹(I_N(z)) recovers (z₁, z₁ᵏz₂, z₃, z₃⁻ᵏz₄) off A₁, and the grid slice {z₁ = 0} is exactly the excluded set",
        || {
            let family = default_family(&truth, cfg.family_degree)?;
            let res = reconstruct_map(&t, &family, &grid, &cfg.solver)?;
            let mut worst: f64 = 0.0;
            for g in &res.points {
                if let Some(w) = g.status.mapped() {
                    worst = worst.max(distance(w, &f_map.apply(&g.z)?));
                }
            }
            let on_slice: Vec<usize> = grid.iter().enumerate().filter(|(_, z)| z[0].norm() == 0.0).map(|(i, _)| i).collect();
            let d = &res.diagnostics;
            let ok = worst < 1e-4
                && res.excluded_set == on_slice
                && d.mapped + on_slice.len() == grid.len()
                && d.collisions == 0;
            Ok((
                format!("{} mapped with error < 1e-4, {} excluded", grid.len() - on_slice.len(), on_slice.len()),
                format!(
                    "{} mapped (max error {}), {} excluded, {} no preimage, {} unresolved, {} collisions",
                    d.mapped,
                    fmt_e(worst),
                    d.excluded_zero_weight,
                    d.excluded_no_preimage,
                    d.unresolved,
                    d.collisions
                ),
                "1e-4".into(),
                Verdict::from_bool(ok),
            ))
        },
    ));

    checks.push(run_check(
        "i_inverse_roundtrip",
        "reconstructing with T⁻¹ on the mapped points returns the original grid: the recovered F is biholomorphic off A₁",
        || {
            let family = default_family(&truth, cfg.family_degree)?;
            let res = reconstruct_map(&t, &family, &grid, &cfg.solver)?;
            let pairs: Vec<(&Point, &Point)> = res.points.iter().filter_map(|g| g.status.mapped().map(|w| (&g.z, w))).collect();
            let inv = t.inverse()?;
            let back_family = default_family(&inv, cfg.family_degree)?;
            let ws: Vec<Point> = pairs.iter().map(|(_, w)| (*w).clone()).collect();
            let back = reconstruct_map(&inv, &back_family, &ws, &cfg.solver)?;
            let mut worst: f64 = 0.0;
            for ((z, _), g) in pairs.iter().zip(&back.points) {
                worst = worst.max(g.status.mapped().map(|b| distance(b, z)).unwrap_or(f64::INFINITY));
            }
            let tol = 10.0 * cfg.solver.tol;
            Ok(("max |F⁻¹(F(z)) − z| ≈ 0".into(), fmt_e(worst), format!("< {tol:e}"), Verdict::from_bool(worst < tol)))
        },
    ));

    let label = match mutation {
        None => format!("counterexample k={k} m={m} p={p}"),
        Some(Mutation::DropWeight) => format!("counterexample k={k} m={m} p={p} [mutation: drop-weight]"),
        Some(Mutation::WeightExponentShift) => format!("counterexample k={k} m={m} p={p} [mutation: weight exponent m+1]"),
    };
    Ok(Report::new(label, checks, cfg))
}

/// Restriction from `Δ` to `Δ* = Δ \ {0}` for `p ∈ {1, 2}`.
pub fn punctured_disc_scenario(p: f64, cfg: &ScenarioConfig) -> Result<Report> {
    if p != 1.0 && p != 2.0 {
        return Err(Error::Precondition(format!("the packaged punctured-disc checks need p = 1 or p = 2, got {p}")));
    }
    let disc = BoundedDomain::disc(1.0)?;
    let punctured = BoundedDomain::parse("punctured_disc")?;
    let mut checks = Vec::new();
    if p == 2.0 {
        checks.push(run_check(
            "restriction_isometry",
            "restriction A²(Δ) → A²(Δ*) preserves norms because {0} is null, so Δ* is not A²-complete (witness Δ)",
            || {
                let mut worst: f64 = 0.0;
                for j in 0..=10 {
                    let f = LaurentPolynomial::monomial_unit(&[j]);
                    let a = laurent_norm_closed(&disc, &f, 2.0)?.value;
                    let b = laurent_norm_closed(&punctured, &f, 2.0)?.value;
                    worst = worst.max((a - b).abs() / a);
                }
                Ok(("0".into(), format!("{worst:e}"), "exact".into(), Verdict::from_bool(worst == 0.0)))
            },
        ));
        checks.push(run_check(
            "no_pole_in_a2",
            "z⁻¹ is not square integrable on Δ*, so every A²(Δ*) function extends across 0",
            || {
                let r = monomial_integral(&punctured, &[-1], 2.0);
                Ok(("divergent".into(), format!("{r:?}"), "exact".into(), Verdict::from_bool(matches!(r, Err(Error::DivergentIntegral(_))))))
            },
        ));
    } else {
        checks.push(run_check(
            "pole_norm",
            "‖z⁻¹‖₁ on Δ* equals ∫₀¹∫₀^{2π} r⁻¹·r dθ dr = 2π",
            || {
                let v = laurent_norm_closed(&punctured, &LaurentPolynomial::monomial_unit(&[-1]), 1.0)?.value;
                let err = (v - 2.0 * PI).abs();
                Ok((format!("{:.15}", 2.0 * PI), format!("{v:.15}"), "1e-12".into(), Verdict::from_bool(err < 1e-12)))
            },
        ));
        checks.push(run_check(
            "pole_does_not_extend",
            "z⁻¹ ∈ A¹(Δ*) is not the restriction of any holomorphic function on Δ",
            || {
                let r = BasisSpec::new(&disc, vec![MultiIndex(vec![-1])], 1.0);
                Ok(("rejected on Δ".into(), if r.is_err() { "rejected".into() } else { "accepted".into() }, "exact".into(), Verdict::from_bool(r.is_err())))
            },
        ));
        checks.push(run_check(
            "kernel_blow_up",
            "the p = 1 kernel estimate on Δ* dominates the certificate |z|⁻²/(2π)² from φ = z⁻¹ along z → 0",
            || {
                let basis = BasisSpec::new(&punctured, (-1..=2).map(|j| MultiIndex(vec![j])).collect(), 1.0)?;
                let path: Vec<Point> = [0.1, 0.05, 0.01].iter().map(|&x| vec![Complex64::new(x, 0.0)]).collect();
                let ocfg = OptimizerConfig { seed: cfg.seed, ..OptimizerConfig::default() };
                let probe = boundary_probe(&punctured, &path, &basis, 1.0, &ocfg)?;
                let mut ok = true;
                let mut parts = Vec::new();
                for (z, pt) in path.iter().zip(&probe) {
                    let bound = z[0].norm().powi(-2) / (4.0 * PI * PI);
                    ok &= pt.estimate.value >= bound;
                    parts.push(format!("{:.4}≥{:.4}", pt.estimate.value, bound));
                }
                Ok(("value ≥ |z|⁻²/(2π)² at 0.1, 0.05, 0.01".into(), parts.join(", "), "inequality".into(), Verdict::from_bool(ok)))
            },
        ));
    }
    checks.push(run_check(
        "closure_probe",
        "Δ* is not the interior of its closure; the probe finds witnesses at the puncture",
        || {
            let probe = interior_closure_probe(&punctured, cfg.closure_resolution);
            Ok(("witness near 0".into(), probe.verdict(), format!("resolution {}", cfg.closure_resolution), Verdict::from_bool(probe.violation_found())))
        },
    ));
    Ok(Report::new(format!("punctured disc p={p}"), checks, cfg))
}

/// Maps for [`roundtrip_scenario`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum RoundtripMap {
    /// Identity on the unit disc.
    Identity,
    /// `z ↦ (a − z)/(1 − āz)` on the unit disc.
    Mobius { a: f64 },
    /// Rotation by `theta` of the unit ball in ℂ².
    Unitary { theta: f64 },
    /// The counterexample operator, with `p = 2k/m`.
    Counterexample { k: u32, m: u32 },
}

/// The operator `T` whose point map `F` is the given map.
pub fn roundtrip_operator(map: RoundtripMap, p: f64) -> Result<CompositionIsometry> {
    match map {
        RoundtripMap::Identity => CompositionIsometry::identity(BoundedDomain::disc(1.0)?, p),
        RoundtripMap::Mobius { a } => {
            let d = BoundedDomain::disc(1.0)?;
            let g = HoloMapExpr::mobius(1, 0, Complex64::new(a, 0.0))?;
            CompositionIsometry::new(d.clone(), d, g, p, ONE)
        }
        RoundtripMap::Unitary { theta } => {
            let d = BoundedDomain::parse("ball(2)")?;
            let (s, c) = theta.sin_cos();
            let r = |x: f64| Complex64::new(x, 0.0);
            // G is the inverse rotation, so F rotates by +theta
            let g = HoloMapExpr::linear(vec![vec![r(c), r(s)], vec![r(-s), r(c)]])?;
            CompositionIsometry::new(d.clone(), d, g, p, ONE)
        }
        RoundtripMap::Counterexample { k, m } => CompositionIsometry::counterexample(k, m),
    }
}

/// Reconstructs `F` from `T` and checks `Tφ(F(z))·J_F(z)^{2/p} = λ·φ(z)`
/// pointwise with one unimodular `λ` for every test and point.
/// `drop_jacobian` replaces `J_F^{2/p}` by 1 as a mutation.
pub fn roundtrip_scenario(map: RoundtripMap, p: f64, drop_jacobian: bool, cfg: &ScenarioConfig) -> Result<Report> {
    let t = roundtrip_operator(map, p)?;
    let p = t.p;
    let inv = t.inverse()?;
    let f_true = inv.map.clone();
    let family = default_family(&t, cfg.family_degree)?;
    let mut n = cfg.grid.max(2);
    let mut grid: Vec<Point> = modulus_grid(&t.source, n);
    while grid.len() < ROUNDTRIP_POINTS {
        n += 1;
        grid = modulus_grid(&t.source, n);
    }
    let tests = monomials(&MultiIndex::total_degree(t.source.dimension(), 2));
    let res = reconstruct_map(&t, &family, &grid, &cfg.solver)?;
    let mut checks = Vec::new();

    checks.push(run_check(
        "reconstruction",
        "the reconstructed F agrees with the known map on every grid point off the exceptional set",
        || {
            let mut worst: f64 = 0.0;
            for g in &res.points {
                if let Some(w) = g.status.mapped() {
                    worst = worst.max(distance(w, &f_true.apply(&g.z)?));
                }
            }
            let d = &res.diagnostics;
            let ok = worst < 1e-6 && d.excluded_no_preimage == 0 && d.unresolved == 0 && d.mapped > 0;
            Ok(("max error < 1e-6".into(), format!("{} mapped, max error {}", d.mapped, fmt_e(worst)), "1e-6".into(), Verdict::from_bool(ok)))
        },
    ));

    let mut ratios = Vec::new();
    let mut failure = None;
    for g in &res.points {
        let Some(w) = g.status.mapped() else { continue };
        let jac = if drop_jacobian { Ok(ONE) } else { inv.weight.eval(&g.z) };
        let jac = match jac {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let vals: Vec<Complex64> = match tests.iter().map(|f| f.evaluate(&g.z)).collect::<Result<_>>() {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let top = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (f, v) in tests.iter().zip(vals) {
            if v.norm() <= 1e-8 * top {
                continue;
            }
            match t.apply(f).and_then(|tf| tf.eval(w)) {
                Ok(tw) => ratios.push(tw * jac / v),
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
    }
    let lambda = if ratios.is_empty() { Complex64::new(f64::NAN, 0.0) } else { ratios.iter().sum::<Complex64>() / ratios.len() as f64 };
    let spread = ratios.iter().map(|r| (r - lambda).norm()).fold(0.0, f64::max) / lambda.norm();

    checks.push(run_check(
        "constant_phase",
        "Tφ(F(z))·J_F(z)^{2/p} / φ(z) is one constant λ across tests and points",
        || {
            if let Some(e) = failure.clone() {
                return Err(e);
            }
            Ok((
                "spread 0".into(),
                format!("{} ratios, λ = {:.12}{:+.12}i, spread {}", ratios.len(), lambda.re, lambda.im, fmt_e(spread)),
                "< 1e-8".into(),
                Verdict::from_bool(!ratios.is_empty() && spread < 1e-8),
            ))
        },
    ));
    checks.push(run_check(
        "unimodular",
        "the constant λ has modulus 1",
        || {
            let dev = (lambda.norm() - 1.0).abs();
            Ok(("|λ| = 1".into(), format!("||λ| − 1| = {}", fmt_e(dev)), "< 1e-10".into(), Verdict::from_bool(dev < 1e-10)))
        },
    ));

    let name = match map {
        RoundtripMap::Identity => "identity".to_string(),
        RoundtripMap::Mobius { a } => format!("mobius a={a}"),
        RoundtripMap::Unitary { theta } => format!("unitary theta={theta}"),
        RoundtripMap::Counterexample { k, m } => format!("counterexample k={k} m={m}"),
    };
    let suffix = if drop_jacobian { " [mutation: drop-jacobian]" } else { "" };
    Ok(Report::new(format!("roundtrip {name} p={p}{suffix}"), checks, cfg))
}

/// A scenario as it appears in JSON files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSpec {
    Counterexample {
        k: u32,
        m: u32,
        #[serde(default)]
        mutation: Option<Mutation>,
    },
    PuncturedDisc {
        p: f64,
    },
    Mobius {
        a: f64,
        p: f64,
    },
    Identity {
        #[serde(default = "default_domain")]
        domain: String,
        p: f64,
    },
    Unitary {
        theta: f64,
        p: f64,
    },
}

fn default_domain() -> String {
    "disc".into()
}

impl ScenarioSpec {
    /// The operator the scenario is about, if it has one.
    pub fn operator(&self) -> Result<CompositionIsometry> {
        match self {
            ScenarioSpec::Counterexample { k, m, mutation } => {
                let t = CompositionIsometry::counterexample(*k, *m)?;
                Ok(match mutation {
                    None => t,
                    Some(Mutation::DropWeight) => t.with_weight(Weight::Laurent { poly: LaurentPolynomial::one(4) }),
                    Some(Mutation::WeightExponentShift) => {
                        let e = *m as i64 + 1;
                        t.with_weight(Weight::Laurent { poly: LaurentPolynomial::monomial_unit(&[-e, 0, e, 0]) })
                    }
                })
            }
            ScenarioSpec::PuncturedDisc { p } => CompositionIsometry::identity(BoundedDomain::parse("punctured_disc")?, *p),
            ScenarioSpec::Mobius { a, p } => roundtrip_operator(RoundtripMap::Mobius { a: *a }, *p),
            ScenarioSpec::Identity { domain, p } => CompositionIsometry::identity(BoundedDomain::parse(domain)?, *p),
            ScenarioSpec::Unitary { theta, p } => roundtrip_operator(RoundtripMap::Unitary { theta: *theta }, *p),
        }
    }

    /// Runs the packaged report for this scenario.
    pub fn run(&self, cfg: &ScenarioConfig) -> Result<Report> {
        match self {
            ScenarioSpec::Counterexample { k, m, mutation } => counterexample_scenario(*k, *m, *mutation, cfg),
            ScenarioSpec::PuncturedDisc { p } => punctured_disc_scenario(*p, cfg),
            ScenarioSpec::Mobius { a, p } => roundtrip_scenario(RoundtripMap::Mobius { a: *a }, *p, false, cfg),
            ScenarioSpec::Identity { domain, p } => {
                if domain != "disc" {
                    return Err(Error::Unsupported("the identity round trip runs on the unit disc".into()));
                }
                roundtrip_scenario(RoundtripMap::Identity, *p, false, cfg)
            }
            ScenarioSpec::Unitary { theta, p } => roundtrip_scenario(RoundtripMap::Unitary { theta: *theta }, *p, false, cfg),
        }
    }
}

/// `T` applied to a holomorphic function, kept for callers that hold a spec.
pub fn apply_spec(spec: &ScenarioSpec, phi: &HoloFn) -> Result<HoloFn> {
    Ok(spec.operator()?.apply_fn(phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ScenarioConfig {
        ScenarioConfig { samples: 100_000, boxes: 5, grid: 4, family_degree: 2, ..ScenarioConfig::default() }
    }

    #[test]
    fn even_p_is_a_precondition_error() {
        assert!(matches!(counterexample_scenario(1, 1, None, &quick()), Err(Error::Precondition(_))));
    }

    #[test]
    fn dimension_arithmetic_line() {
        let r = counterexample_scenario(3, 2, None, &quick()).unwrap();
        let g = r.check("g_automorphism_dimensions").unwrap();
        assert_eq!(g.observed, "12 vs ≤ 10");
        assert!(r.pass, "{:#?}", r.checks.iter().filter(|c| !c.verdict.is_pass()).collect::<Vec<_>>());
    }

    #[test]
    fn mutation_fails_battery() {
        let r = counterexample_scenario(3, 2, Some(Mutation::WeightExponentShift), &quick()).unwrap();
        assert_eq!(r.check("a_isometry_battery").unwrap().verdict, Verdict::Fail);
        assert!(!r.pass);
    }

    #[test]
    fn punctured_disc_reports() {
        assert!(punctured_disc_scenario(2.0, &quick()).unwrap().pass);
        assert!(punctured_disc_scenario(3.0, &quick()).is_err());
    }

    #[test]
    fn roundtrips() {
        for map in [RoundtripMap::Identity, RoundtripMap::Mobius { a: 0.3 }, RoundtripMap::Unitary { theta: 0.4 }] {
            let r = roundtrip_scenario(map, 1.0, false, &quick()).unwrap();
            assert!(r.pass, "{r:#?}");
        }
        let bad = roundtrip_scenario(RoundtripMap::Mobius { a: 0.3 }, 1.0, true, &quick()).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn spec_json_roundtrip() {
        let s: ScenarioSpec = serde_json::from_str(r#"{"kind":"counterexample","k":3,"m":2}"#).unwrap();
        assert_eq!(s, ScenarioSpec::Counterexample { k: 3, m: 2, mutation: None });
        let s: ScenarioSpec = serde_json::from_str(r#"{"kind":"mobius","a":0.3,"p":1}"#).unwrap();
        assert_eq!(s.operator().unwrap().p, 1.0);
    }
}
