//! `aplab`: batch front end for the numerical experiments in `aplab-core`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aplab_core::integrate::{laurent_norm_closed, mc_norm, quadrature_norm};
use aplab_core::isometry::{
    coordinate_family, equimeasure_check, equimeasure_regions, monomial_battery, verify_isometry, VerifyMethod,
};
use aplab_core::kernel::{boundary_probe, BasisSpec, OptimizerConfig};
use aplab_core::reconstruct::{default_family, modulus_grid, reconstruct_map, PointStatus, SolverConfig};
use aplab_core::rng::derive_seed;
use aplab_core::scenarios::{Mutation, Report, ScenarioConfig, ScenarioSpec};
use aplab_core::{BoundedDomain, Complex64, Error, LaurentPolynomial, MultiIndex, Point, Verdict};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "aplab", version, about = "Weighted composition isometries between Bergman spaces")]
struct Cli {
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// p-norm of a Laurent monomial.
    Norm(NormArgs),
    /// p-Bergman kernel estimates as CSV.
    Kernel(KernelArgs),
    /// Norm battery and pushforward comparison for an operator.
    VerifyIsometry(VerifyArgs),
    /// Pushforward-measure comparison only.
    Equimeasure(EquimeasureArgs),
    /// Recover the point map on a grid, as CSV.
    ReconstructMap(ReconstructArgs),
    /// Packaged scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Summarize a saved report.
    Report(ReportArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Method {
    Closed,
    Quad,
    Mc,
}

#[derive(Args, Debug)]
struct NormArgs {
    /// Domain label or inline JSON.
    #[arg(long)]
    domain: String,
    /// Comma-separated exponents.
    #[arg(long, allow_hyphen_values = true)]
    exp: String,
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value = "closed")]
    method: Method,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 64)]
    radial: usize,
    #[arg(long, default_value_t = 64)]
    angular: usize,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long)]
    domain: String,
    #[arg(long)]
    p: f64,
    /// One point as `re,im;re,im;...`.
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// CSV of points, one per line in the same `re,im;...` form.
    #[arg(long)]
    path: Option<PathBuf>,
    /// Tensor basis with exponents `0..=degree` per coordinate.
    #[arg(long, default_value_t = 10)]
    degree: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Whitespace-separated `distance value scaled` columns for plotting.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MutateArg {
    DropWeight,
    WeightExponentShift,
}

impl From<MutateArg> for Mutation {
    fn from(m: MutateArg) -> Self {
        match m {
            MutateArg::DropWeight => Mutation::DropWeight,
            MutateArg::WeightExponentShift => Mutation::WeightExponentShift,
        }
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Scenario JSON file or inline JSON.
    #[arg(long)]
    scenario: String,
    #[arg(long, value_enum)]
    mutate: Option<MutateArg>,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 20)]
    boxes: usize,
    #[arg(long, default_value_t = 30)]
    battery: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EquimeasureArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, value_enum)]
    mutate: Option<MutateArg>,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 20)]
    boxes: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 5)]
    grid: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 6)]
    starts: usize,
    /// Total degree of the extra family monomials.
    #[arg(long, default_value_t = 3)]
    degree: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ScenarioAction {
    /// Run `counterexample`, `punctured-disc`, `mobius`, `identity` or `unitary`.
    Run(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    name: String,
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(long, default_value_t = 2)]
    m: u32,
    /// Exponent for scenarios other than the counterexample, where it is `2k/m`.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0.3)]
    a: f64,
    #[arg(long, default_value_t = 0.4)]
    theta: f64,
    #[arg(long, value_enum)]
    mutate: Option<MutateArg>,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 5)]
    grid: usize,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    /// Also write the checks as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Report JSON written by `scenario run`.
    input: PathBuf,
    #[arg(long)]
    csv: bool,
}

/// A failure to report with the given exit code.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(2, e.to_string())
    }
}

fn config(msg: impl Into<String>) -> Failure {
    Failure(2, msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("{}", line.trim());
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {}", msg.replace('\n', " "));
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let seed = cli.seed;
    match cli.command {
        Command::Norm(a) => norm(a, seed),
        Command::Kernel(a) => kernel(a, seed),
        Command::VerifyIsometry(a) => verify(a, seed),
        Command::Equimeasure(a) => equimeasure(a, seed),
        Command::ReconstructMap(a) => reconstruct(a, seed),
        Command::Scenario { action: ScenarioAction::Run(a) } => scenario(a, seed),
        Command::Report(a) => report(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure(2, e.to_string()))
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn parse_exponents(text: &str) -> Result<Vec<i64>, Failure> {
    text.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| config(format!("bad exponent list `{text}`"))))
        .collect()
}

fn parse_point(text: &str) -> Result<Point, Failure> {
    text.trim()
        .split(';')
        .map(|c| {
            let parts: Vec<&str> = c.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [re, im] => match (re.parse::<f64>(), im.parse::<f64>()) {
                    (Ok(a), Ok(b)) => Ok(Complex64::new(a, b)),
                    _ => Err(config(format!("bad point `{text}`"))),
                },
                _ => Err(config(format!("bad point `{text}`: expected re,im;re,im;..."))),
            }
        })
        .collect()
}

fn fmt_point(z: &[Complex64]) -> String {
    z.iter().map(|c| format!("{},{}", c.re, c.im)).collect::<Vec<_>>().join(";")
}

fn load_scenario(text: &str) -> Result<ScenarioSpec, Failure> {
    let body = if text.trim_start().starts_with('{') {
        text.to_string()
    } else {
        fs::read_to_string(text).map_err(|e| config(format!("cannot read {text}: {e}")))?
    };
    serde_json::from_str(&body).map_err(|e| config(format!("malformed scenario JSON: {e}")))
}

fn with_mutation(spec: ScenarioSpec, mutate: Option<MutateArg>) -> Result<ScenarioSpec, Failure> {
    match (spec, mutate) {
        (s, None) => Ok(s),
        (ScenarioSpec::Counterexample { k, m, .. }, Some(mu)) => {
            Ok(ScenarioSpec::Counterexample { k, m, mutation: Some(mu.into()) })
        }
        (_, Some(_)) => Err(config("--mutate applies to the counterexample scenario")),
    }
}

fn norm(a: NormArgs, seed: u64) -> Result<u8, Failure> {
    let domain = BoundedDomain::parse(&a.domain)?;
    let exps = parse_exponents(&a.exp)?;
    if exps.len() != domain.dimension() {
        return Err(Error::DimensionMismatch { expected: domain.dimension(), got: exps.len() }.into());
    }
    let f = LaurentPolynomial::monomial(MultiIndex(exps), Complex64::new(1.0, 0.0));
    let r = match a.method {
        Method::Closed => laurent_norm_closed(&domain, &f, a.p)?,
        Method::Quad => quadrature_norm(&domain, &f, a.p, a.radial, a.angular)?,
        Method::Mc => mc_norm(&domain, &f, a.p, a.samples, seed)?,
    };
    emit(None, &to_json(&r))?;
    Ok(0)
}

fn kernel(a: KernelArgs, seed: u64) -> Result<u8, Failure> {
    let domain = BoundedDomain::parse(&a.domain)?;
    let mut points = Vec::new();
    if let Some(z) = &a.z {
        points.push(parse_point(z)?);
    }
    if let Some(path) = &a.path {
        let body = fs::read_to_string(path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
        for line in body.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            points.push(parse_point(line.trim_matches('"'))?);
        }
    }
    if points.is_empty() {
        return Err(config("give --z or --path"));
    }
    let basis = BasisSpec::tensor(&domain, a.degree, a.p)?;
    let cfg = OptimizerConfig { seed, ..OptimizerConfig::default() };
    let probe = boundary_probe(&domain, &points, &basis, a.p, &cfg)?;
    let mut csv = String::from("z,value,grad_norm,iterations\n");
    let mut plot = String::from("# boundary_distance value scaled\n");
    for pt in &probe {
        let e = &pt.estimate;
        let _ = writeln!(
            csv,
            "\"{}\",{},{},{}",
            fmt_point(&e.z),
            e.value,
            e.optimizer_report.final_gradient_norm,
            e.optimizer_report.iterations
        );
        let _ = writeln!(plot, "{} {} {}", pt.boundary_distance, e.value, pt.scaled);
    }
    emit(a.out.as_deref(), &csv)?;
    if let Some(path) = &a.gnuplot {
        emit(Some(path), &plot)?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct VerifyOutput {
    max_discrepancy: f64,
    battery: usize,
    boxes: Vec<aplab_core::isometry::RegionComparison>,
    total_mass: Option<(f64, f64)>,
    samples: usize,
    seed: u64,
    verdict: Verdict,
}

fn verify(a: VerifyArgs, seed: u64) -> Result<u8, Failure> {
    let spec = with_mutation(load_scenario(&a.scenario)?, a.mutate)?;
    let clean = with_mutation(spec.clone(), None).map(|s| match s {
        ScenarioSpec::Counterexample { k, m, .. } => ScenarioSpec::Counterexample { k, m, mutation: None },
        other => other,
    })?;
    let truth = clean.operator()?;
    let t = spec.operator()?;
    let tests = monomial_battery(&truth, a.battery, derive_seed(seed, 1))?;
    let method = if t.is_symbolic() { VerifyMethod::Closed } else { VerifyMethod::MonteCarlo { samples: a.samples, seed } };
    let v = verify_isometry(&t, &tests, method)?;
    let family = coordinate_family(&truth)?;
    let regions = equimeasure_regions(&truth.target, &family.image(&truth), a.boxes, derive_seed(seed, 5))?;
    let eq = equimeasure_check(&t, &family, &regions, a.samples, derive_seed(seed, 6))?;
    let battery_ok = if t.is_symbolic() { v.max_discrepancy < 1e-9 } else { v.max_discrepancy.is_finite() };
    let verdict = Verdict::combine([Verdict::from_bool(battery_ok), eq.verdict]);
    let out = VerifyOutput {
        max_discrepancy: v.max_discrepancy,
        battery: tests.len(),
        boxes: eq.regions,
        total_mass: eq.total_mass,
        samples: a.samples,
        seed,
        verdict,
    };
    emit(a.out.as_deref(), &to_json(&out))?;
    Ok(exit_for(verdict))
}

fn exit_for(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => 0,
        _ => 1,
    }
}

fn equimeasure(a: EquimeasureArgs, seed: u64) -> Result<u8, Failure> {
    let spec = with_mutation(load_scenario(&a.scenario)?, a.mutate)?;
    let truth = match &spec {
        ScenarioSpec::Counterexample { k, m, .. } => ScenarioSpec::Counterexample { k: *k, m: *m, mutation: None },
        other => other.clone(),
    }
    .operator()?;
    let t = spec.operator()?;
    let family = coordinate_family(&truth)?;
    let regions = equimeasure_regions(&truth.target, &family.image(&truth), a.boxes, derive_seed(seed, 5))?;
    let r = equimeasure_check(&t, &family, &regions, a.samples, derive_seed(seed, 6))?;
    emit(a.out.as_deref(), &to_json(&r))?;
    Ok(exit_for(r.verdict))
}

fn reconstruct(a: ReconstructArgs, seed: u64) -> Result<u8, Failure> {
    let t = load_scenario(&a.scenario)?.operator()?;
    let family = default_family(&t, a.degree)?;
    let grid = modulus_grid(&t.source, a.grid);
    let cfg = SolverConfig { tol: a.tol, starts: a.starts, seed, ..SolverConfig::default() };
    let res = reconstruct_map(&t, &family, &grid, &cfg)?;
    let n = t.source.dimension();
    let m = t.target.dimension();
    let mut header: Vec<String> = Vec::new();
    for j in 1..=n {
        header.push(format!("z{j}_re"));
        header.push(format!("z{j}_im"));
    }
    for j in 1..=m {
        header.push(format!("w{j}_re"));
        header.push(format!("w{j}_im"));
    }
    header.push("residual".into());
    header.push("status".into());
    let mut csv = header.join(",");
    csv.push('\n');
    for g in &res.points {
        let mut row: Vec<String> = g.z.iter().flat_map(|c| [c.re.to_string(), c.im.to_string()]).collect();
        match g.status.mapped() {
            Some(w) => row.extend(w.iter().flat_map(|c| [c.re.to_string(), c.im.to_string()])),
            None => row.extend(std::iter::repeat_n(String::new(), 2 * m)),
        }
        let residual = match &g.status {
            PointStatus::ExcludedZeroWeight { .. } => String::new(),
            s => s.residual().map(|r| r.to_string()).unwrap_or_default(),
        };
        row.push(residual);
        row.push(g.status.label().into());
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    emit(a.out.as_deref(), &csv)?;
    let d = &res.diagnostics;
    Ok(if d.unresolved == 0 && d.collisions == 0 { 0 } else { 1 })
}

fn scenario(a: RunArgs, seed: u64) -> Result<u8, Failure> {
    let need_p = |name: &str| a.p.ok_or_else(|| config(format!("scenario `{name}` needs --p")));
    let spec = match a.name.as_str() {
        "counterexample" => {
            if let Some(p) = a.p {
                let implied = 2.0 * a.k as f64 / a.m as f64;
                if (p - implied).abs() > 1e-12 {
                    return Err(config(format!("--p {p} contradicts 2k/m = {implied}")));
                }
            }
            ScenarioSpec::Counterexample { k: a.k, m: a.m, mutation: a.mutate.map(Into::into) }
        }
        "punctured-disc" => ScenarioSpec::PuncturedDisc { p: need_p("punctured-disc")? },
        "mobius" => ScenarioSpec::Mobius { a: a.a, p: need_p("mobius")? },
        "identity" => ScenarioSpec::Identity { domain: "disc".into(), p: need_p("identity")? },
        "unitary" => ScenarioSpec::Unitary { theta: a.theta, p: need_p("unitary")? },
        other => return Err(config(format!("unknown scenario `{other}`"))),
    };
    if a.mutate.is_some() && !matches!(spec, ScenarioSpec::Counterexample { .. }) {
        return Err(config("--mutate applies to the counterexample scenario"));
    }
    let cfg = ScenarioConfig { seed, samples: a.samples, grid: a.grid, ..ScenarioConfig::default() };
    let report = spec.run(&cfg)?;
    emit(Some(&a.out), &to_json(&report))?;
    if let Some(path) = &a.csv {
        emit(Some(path), &report_csv(&report))?;
    }
    print!("{}", summary(&report));
    Ok(if report.pass { 0 } else { 1 })
}

fn csv_field(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn report_csv(r: &Report) -> String {
    let mut out = String::from("name,verdict,expected,observed,tolerance\n");
    for c in &r.checks {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.name,
            c.verdict,
            csv_field(&c.expected),
            csv_field(&c.observed),
            csv_field(&c.tolerance)
        );
    }
    out
}

fn summary(r: &Report) -> String {
    let mut out = format!("{}\n", r.label);
    for c in &r.checks {
        let _ = writeln!(out, "  {:<13} {:<28} {}", c.verdict.to_string(), c.name, c.observed);
    }
    let _ = writeln!(out, "{}", if r.pass { "PASS" } else { "FAIL" });
    out
}

fn report(a: ReportArgs) -> Result<u8, Failure> {
    let body = fs::read_to_string(&a.input).map_err(|e| config(format!("cannot read {}: {e}", a.input.display())))?;
    let r: Report = serde_json::from_str(&body).map_err(|e| config(format!("malformed report JSON: {e}")))?;
    let text = if a.csv { report_csv(&r) } else { summary(&r) };
    emit(None, &text)?;
    Ok(if r.pass { 0 } else { 1 })
}
