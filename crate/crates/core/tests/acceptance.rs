//! Acceptance criteria, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::time::Instant;

use aplab_core::functions::Weight;
use aplab_core::integrate::{laurent_norm_closed, mc_norm, quadrature_norm, random_admissible_monomials};
use aplab_core::isometry::{
    coordinate_family, equimeasure_check, equimeasure_regions, monomial_battery, verify_isometry,
    CompositionIsometry, VerifyMethod,
};
use aplab_core::kernel::{bergman2_gram, pbergman_min_norm, BasisSpec, OptimizerConfig};
use aplab_core::reconstruct::{default_family, modulus_grid, reconstruct_map, verify_modulus_identity, SolverConfig};
use aplab_core::scenarios::{
    counterexample_scenario, punctured_disc_scenario, roundtrip_scenario, Mutation, RoundtripMap, ScenarioConfig,
};
use aplab_core::{BoundedDomain, Complex64, LaurentPolynomial, MultiIndex, Point, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn norm_agreement() -> Outcome {
    let labels = ["disc", "polydisc(1,1)", "ball(2)", "hartogs(3)", "fk_ball_prime(3)"];
    let mut worst: f64 = 0.0;
    let mut where_worst = String::new();
    let mut count = 0;
    for label in labels {
        let d = BoundedDomain::parse(label).map_err(|e| e.to_string())?;
        for (pi, p) in [2.0 / 3.0, 1.0, 3.0].into_iter().enumerate() {
            let alphas = random_admissible_monomials(&d, &[p, 2.0 * p], 20, 4, 100 + pi as u64).map_err(|e| e.to_string())?;
            for a in alphas {
                let f = LaurentPolynomial::monomial(a.clone(), c(1.0, 0.0));
                let closed = laurent_norm_closed(&d, &f, p).map_err(|e| e.to_string())?;
                let quad = quadrature_norm(&d, &f, p, 64, 64).map_err(|e| e.to_string())?;
                let mc = mc_norm(&d, &f, p, 1_000_000, 0).map_err(|e| e.to_string())?;
                for (name, z) in [("closed/quad", closed.z_score(&quad)), ("closed/mc", closed.z_score(&mc)), ("quad/mc", quad.z_score(&mc))] {
                    count += 1;
                    if z > worst {
                        worst = z;
                        where_worst = format!("{label} p={p:.3} α={a} {name}");
                    }
                }
            }
        }
    }
    ensure(worst <= 3.0, format!("{count} comparisons, max z = {worst:.2} ({where_worst})"))
}

fn isometry_exactness() -> Outcome {
    let t = CompositionIsometry::counterexample(3, 2).map_err(|e| e.to_string())?;
    let tests = monomial_battery(&t, 30, 1).map_err(|e| e.to_string())?;
    let v = verify_isometry(&t, &tests, VerifyMethod::Closed).map_err(|e| e.to_string())?;
    let phi = LaurentPolynomial::monomial_unit(&[2, 0, 0, 0]);
    let want = (PI.powi(4) / 80.0).powf(1.0 / 3.0);
    let src = laurent_norm_closed(&t.source, &phi, 3.0).map_err(|e| e.to_string())?.value;
    let tphi = t.apply_laurent(&phi).map_err(|e| e.to_string())?;
    let tgt = laurent_norm_closed(&t.target, &tphi, 3.0).map_err(|e| e.to_string())?.value;
    let worked = ((src - want).abs().max((tgt - want).abs())) / want;
    let dropped = t.with_weight(Weight::Laurent { poly: LaurentPolynomial::one(4) });
    let vd = verify_isometry(&dropped, &tests, VerifyMethod::Closed).map_err(|e| e.to_string())?;
    ensure(
        tests.len() == 30 && v.max_discrepancy < 1e-9 && worked < 1e-12 && vd.max_discrepancy.partial_cmp(&1e-9) != Some(std::cmp::Ordering::Less),
        format!(
            "battery max rel {:.2e}; z₁² sides {src:.12}, {tgt:.12} vs (π⁴/80)^(1/3) = {want:.12}; drop-weight max rel {:e}",
            v.max_discrepancy, vd.max_discrepancy
        ),
    )
}

fn bergman_p2() -> Outcome {
    let d = BoundedDomain::disc(1.0).map_err(|e| e.to_string())?;
    let basis = BasisSpec::tensor(&d, 20, 2.0).map_err(|e| e.to_string())?;
    let cfg = OptimizerConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for (x, want, tol) in [(0.0, 1.0 / PI, 0.005), (0.5, 16.0 / (9.0 * PI), 0.01)] {
        let z = [c(x, 0.0)];
        let g = bergman2_gram(&d, &basis, &z).map_err(|e| e.to_string())?.value;
        let m = pbergman_min_norm(&d, &basis, &z, 2.0, &cfg).map_err(|e| e.to_string())?.value;
        let eg = (g - want).abs() / want;
        let em = (m - want).abs() / want;
        ok &= eg < tol && em < tol;
        parts.push(format!("B({x}) gram rel {eg:.2e}, min-norm rel {em:.2e} (tol {tol})"));
    }
    ensure(ok, parts.join("; "))
}

fn p1_extremal() -> Outcome {
    let d = BoundedDomain::disc(1.0).map_err(|e| e.to_string())?;
    let basis = BasisSpec::tensor(&d, 10, 1.0).map_err(|e| e.to_string())?;
    let est = pbergman_min_norm(&d, &basis, &[c(0.0, 0.0)], 1.0, &OptimizerConfig::default()).map_err(|e| e.to_string())?;
    let want = 1.0 / (PI * PI);
    let rel = (est.value - want).abs() / want;
    ensure(rel < 0.01, format!("value {:.10} vs 1/π² = {want:.10}, rel {rel:.2e}", est.value))
}

fn scaling_and_monotonicity() -> Outcome {
    let d1 = BoundedDomain::disc(1.0).map_err(|e| e.to_string())?;
    let d2 = BoundedDomain::disc(2.0).map_err(|e| e.to_string())?;
    let cfg = OptimizerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_scale: f64 = 0.0;
    for p in [1.0, 2.0] {
        let b1 = BasisSpec::tensor(&d1, 8, p).map_err(|e| e.to_string())?;
        let b2 = BasisSpec::tensor(&d2, 8, p).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let z = Complex64::from_polar(0.8 * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>());
            let small = pbergman_min_norm(&d1, &b1, &[z], p, &cfg).map_err(|e| e.to_string())?.value;
            let big = pbergman_min_norm(&d2, &b2, &[2.0 * z], p, &cfg).map_err(|e| e.to_string())?.value;
            let want = 2f64.powf(-4.0 / p) * small;
            worst_scale = worst_scale.max((big - want).abs() / want);
        }
    }
    let small_basis = BasisSpec::tensor(&d1, 4, 1.0).map_err(|e| e.to_string())?;
    let large_basis = BasisSpec::tensor(&d1, 8, 1.0).map_err(|e| e.to_string())?;
    let outer_basis = BasisSpec::tensor(&d2, 8, 1.0).map_err(|e| e.to_string())?;
    let mut basis_violations = 0;
    let mut domain_violations = 0;
    for _ in 0..50 {
        let z = [Complex64::from_polar(0.9 * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>())];
        let s = pbergman_min_norm(&d1, &small_basis, &z, 1.0, &cfg).map_err(|e| e.to_string())?.value;
        let l = pbergman_min_norm(&d1, &large_basis, &z, 1.0, &cfg).map_err(|e| e.to_string())?.value;
        let o = pbergman_min_norm(&d2, &outer_basis, &z, 1.0, &cfg).map_err(|e| e.to_string())?.value;
        // relative slack at the optimizer tolerance
        if s > l * (1.0 + 1e-8) {
            basis_violations += 1;
        }
        if o > l * (1.0 + 1e-8) {
            domain_violations += 1;
        }
    }
    ensure(
        worst_scale < 0.01 && basis_violations == 0 && domain_violations == 0,
        format!("scaling max rel {worst_scale:.2e}; basis violations {basis_violations}/50; domain violations {domain_violations}/50"),
    )
}

fn reconstruction() -> Outcome {
    let cfg = ScenarioConfig::default();
    let mob = roundtrip_scenario(RoundtripMap::Mobius { a: 0.3 }, 1.0, false, &cfg).map_err(|e| e.to_string())?;
    let mob_line = mob.check("reconstruction").map(|c| c.observed.clone()).unwrap_or_default();

    let t = CompositionIsometry::counterexample(3, 2).map_err(|e| e.to_string())?;
    let f = t.map.inverse().map_err(|e| e.to_string())?;
    let family = default_family(&t, 3).map_err(|e| e.to_string())?;
    let grid = modulus_grid(&t.source, 5);
    let res = reconstruct_map(&t, &family, &grid, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut pairs: Vec<(Point, Point)> = Vec::new();
    for g in &res.points {
        if let Some(w) = g.status.mapped() {
            let exact = f.apply(&g.z).map_err(|e| e.to_string())?;
            worst = worst.max(aplab_core::reconstruct::distance(w, &exact));
            pairs.push((g.z.clone(), w.clone()));
        }
    }
    let slice: Vec<usize> = grid.iter().enumerate().filter(|(_, z)| z[0].norm() == 0.0).map(|(i, _)| i).collect();
    let exact_exclusion = res.excluded_set == slice;

    // analytic path s ↦ (0.3, 0.2, 0.5, 0.05)·e^{is}·(1 − s/4)
    let path: Vec<(Point, Point)> = (0..40)
        .map(|i| {
            let s = i as f64 / 40.0;
            let scale = Complex64::from_polar(1.0 - s / 4.0, s);
            let z: Point = [c(0.3, 0.0), c(0.2, 0.1), c(0.5, 0.0), c(0.05, 0.0)].iter().map(|v| v * scale).collect();
            let w = f.apply(&z).expect("path stays in the domain");
            (z, w)
        })
        .collect();
    let tests: Vec<LaurentPolynomial> =
        MultiIndex::total_degree(4, 2).into_iter().map(|a| LaurentPolynomial::monomial(a, c(1.0, 0.0))).collect();
    let modulus = verify_modulus_identity(&t, &path, &tests, 3.0, |z| f.jacobian_det(z)).map_err(|e| e.to_string())?;
    let on_grid = verify_modulus_identity(&t, &pairs, &tests, 3.0, |z| f.jacobian_det(z)).map_err(|e| e.to_string())?;
    let mod_err = modulus.max_relative_error.max(on_grid.max_relative_error);
    ensure(
        mob.pass && pairs.len() >= 100 && worst < 1e-4 && exact_exclusion && mod_err < 1e-8,
        format!(
            "Möbius: {mob_line}; counterexample: {} mapped, max error {worst:.2e}, excluded slice exact: {exact_exclusion}; modulus identity max rel {mod_err:.2e}",
            pairs.len()
        ),
    )
}

fn equimeasurability() -> Outcome {
    let t = CompositionIsometry::counterexample(3, 2).map_err(|e| e.to_string())?;
    let family = coordinate_family(&t).map_err(|e| e.to_string())?;
    let regions = equimeasure_regions(&t.target, &family.image(&t), 20, 11).map_err(|e| e.to_string())?;
    let boxes = regions.iter().filter(|r| matches!(r, aplab_core::isometry::TestRegion::Box { .. })).count();
    let r = equimeasure_check(&t, &family, &regions, 1_000_000, 0).map_err(|e| e.to_string())?;
    let dropped = t.with_weight(Weight::Laurent { poly: LaurentPolynomial::one(4) });
    let rd = equimeasure_check(&dropped, &family, &regions, 1_000_000, 0).map_err(|e| e.to_string())?;
    let failed_regions = rd.regions.iter().filter(|c| c.verdict == Verdict::Fail).count();
    let total_failed = rd.total_mass_verdict == Some(Verdict::Fail);
    let worst = r.regions.iter().map(|c| c.z_score).fold(0.0, f64::max);
    ensure(
        boxes >= 20 && r.verdict == Verdict::Pass && (failed_regions > 0 || total_failed),
        format!(
            "{boxes} boxes + smooth tests, max z {worst:.2}; drop-weight: {failed_regions} bounded regions FAIL, whole-space region FAIL: {total_failed}"
        ),
    )
}

fn counterexample_report() -> Outcome {
    let r = counterexample_scenario(3, 2, None, &ScenarioConfig::default()).map_err(|e| e.to_string())?;
    let dims = r.check("g_automorphism_dimensions").map(|c| c.observed.clone()).unwrap_or_default();
    let blow = r.check("e_boundary_blow_down").map(|c| c.verdict).unwrap_or(Verdict::Fail);
    let rejected = counterexample_scenario(1, 1, None, &ScenarioConfig::default()).is_err();
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.verdict.is_pass()).map(|c| c.name.as_str()).collect();
    ensure(
        r.pass && dims == "12 vs ≤ 10" && blow == Verdict::Pass && rejected,
        format!("{} checks, failed {failed:?}; dimensions \"{dims}\"; k=1,m=1 rejected: {rejected}", r.checks.len()),
    )
}

fn punctured_disc() -> Outcome {
    let cfg = ScenarioConfig::default();
    let r2 = punctured_disc_scenario(2.0, &cfg).map_err(|e| e.to_string())?;
    let r1 = punctured_disc_scenario(1.0, &cfg).map_err(|e| e.to_string())?;
    let disc = r2.check("restriction_isometry").map(|c| c.observed.clone()).unwrap_or_default();
    let pole = r1.check("pole_norm").map(|c| c.observed.clone()).unwrap_or_default();
    let kern = r1.check("kernel_blow_up").map(|c| c.observed.clone()).unwrap_or_default();
    ensure(r2.pass && r1.pass, format!("p=2 discrepancy {disc}; ‖z⁻¹‖₁ = {pole}; kernel {kern}"))
}

fn determinism() -> Outcome {
    let quick = ScenarioConfig { samples: 200_000, ..ScenarioConfig::default() };
    let run = |threads: usize| -> Result<(String, String, String), String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        pool.install(|| {
            let report = counterexample_scenario(3, 2, None, &quick).map_err(|e| e.to_string())?;
            let d = BoundedDomain::parse("fk_ball_prime(3)").map_err(|e| e.to_string())?;
            let f = LaurentPolynomial::monomial_unit(&[-1, 2]);
            let mc = mc_norm(&d, &f, 1.0, 1_000_000, 0).map_err(|e| e.to_string())?;
            let mob = roundtrip_scenario(RoundtripMap::Mobius { a: 0.3 }, 1.0, false, &quick).map_err(|e| e.to_string())?;
            Ok((
                serde_json::to_string(&report).map_err(|e| e.to_string())?,
                serde_json::to_string(&mc).map_err(|e| e.to_string())?,
                serde_json::to_string(&mob).map_err(|e| e.to_string())?,
            ))
        })
    };
    let a = run(1)?;
    let b = run(4)?;
    let c2 = run(4)?;
    let mutated = counterexample_scenario(3, 2, Some(Mutation::DropWeight), &quick).map_err(|e| e.to_string())?;
    ensure(
        a == b && b == c2 && !mutated.pass,
        format!("report, MC norm and round trip byte-identical across 1/4/4 threads: {}", a == b && b == c2),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 norm oracle agreement", norm_agreement),
        ("2 isometry exactness", isometry_exactness),
        ("3 Bergman p=2 oracle", bergman_p2),
        ("4 p=1 extremal", p1_extremal),
        ("5 scaling and monotonicity", scaling_and_monotonicity),
        ("6 reconstruction fidelity", reconstruction),
        ("7 equimeasurability", equimeasurability),
        ("8 counterexample report", counterexample_report),
        ("9 punctured-disc contrast", punctured_disc),
        ("10 determinism", determinism),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
