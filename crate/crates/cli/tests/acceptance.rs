//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#[path = "../../core/tests/support/fd.rs"]
mod fd;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nfcert::corpus::job_files;
use nfcert::JobSpec;
use nfcert_core::certify::oracle::{self, OracleError};
use nfcert_core::certify::{self, Sample, LIPSCHITZ_SLACK};
use nfcert_core::expr::Var;
use nfcert_core::normalform::{NormSpec, DEFAULT_SAFETY};
use nfcert_core::pipeline::{self, Normalization, Options, Stage};
use nfcert_core::{classify, parse, Expr, NormalKind};
use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

const IDENTITY_TIME: Duration = Duration::from_secs(1);
const RESIDUAL_TOL: f64 = 1e-8;
const RESIDUAL_GRID: usize = 41;
const CORPUS_TIME: Duration = Duration::from_secs(60);
const CORPUS_PER_TYPE: usize = 10;
const PERTURBATION_BOUND: f64 = 0.1;
const C_E: f64 = 0.4;
const C_A: f64 = 0.93;
const MONOTONICITY_PAIRS: usize = 10_000;
const INCREMENT_SLACK: f64 = 1e-9;
const INCREMENT_POINTS: usize = 1000;
const DISK_TARGETS: usize = 100;
const ORACLE_TOL: f64 = 1e-13;
const ORACLE_GRID: usize = 21;
const LINEAR_MAPS: usize = 50;
const JET_EXPRESSIONS: usize = 20;
const JET_ORDER: usize = 4;
const JET_TOL: f64 = 1e-5;

struct Entry {
    name: String,
    f: Expr,
    n: Normalization,
    samples: Vec<Sample>,
    seed: u64,
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    fn error(e: impl std::fmt::Display) -> Self {
        Self::new(false, format!("error: {e}"))
    }
}

fn unit(rng: &mut Pcg64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn normalize(f: &Expr, p: [f64; 2], opts: &Options) -> Result<Normalization, String> {
    match pipeline::run(f, p, opts).map_err(|e| e.to_string())?.stage {
        Stage::Normalized(n) => Ok(*n),
        Stage::Skipped { reason } => Err(reason.to_string()),
    }
}

fn identity_case() -> Outcome {
    let start = Instant::now();
    for src in ["x^3 + y^4", "x^3 + y^5"] {
        let f = parse(src).unwrap();
        let n = match normalize(&f, [0.0, 0.0], &Options::default()) {
            Ok(n) => n,
            Err(e) => return Outcome::error(e),
        };
        let c = &n.certificate;
        if c.m_bound != 0.0 || c.r != 1.0 {
            return Outcome::new(false, format!("{src}: M = {}, R = {}", c.m_bound, c.r));
        }
        let samples = match certify::grid_samples(&n.map, c, RESIDUAL_GRID) {
            Ok(s) => s,
            Err(e) => return Outcome::error(e),
        };
        for s in &samples {
            let j = n.map.phi_jacobian([s.x, s.y]).unwrap();
            if j != [[1.0, 0.0], [0.0, 1.0]] || s.residual != 0.0 || s.xt != s.x || s.yt != s.y {
                return Outcome::new(
                    false,
                    format!("{src}: not the identity at ({}, {})", s.x, s.y),
                );
            }
        }
    }
    let t = start.elapsed();
    Outcome::new(
        t < IDENTITY_TIME,
        format!("M = 0, R = 1, exact identity on {RESIDUAL_GRID}x{RESIDUAL_GRID} grid, {t:.2?}"),
    )
}

fn corpus_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// Corpus germs write perturbation coefficients, and nothing else, as decimal literals.
fn perturbation_coefficients_bounded(src: &str) -> bool {
    src.split(|c: char| !(c.is_ascii_digit() || c == '.'))
        .filter(|t| t.contains('.'))
        .filter_map(|t| t.parse::<f64>().ok())
        .all(|v| v <= PERTURBATION_BOUND)
}

fn load_corpus() -> Result<(Vec<Entry>, Duration, Vec<String>), String> {
    let mut entries = Vec::new();
    let mut problems = Vec::new();
    let mut counts = std::collections::BTreeMap::<String, usize>::new();
    let files = job_files(&corpus_dir()).map_err(|e| e.to_string())?;
    let start = Instant::now();
    for path in files {
        let spec = JobSpec::load(&path).map_err(|e| e.to_string())?;
        let name = spec.name.clone().unwrap_or_default();
        if !perturbation_coefficients_bounded(&spec.function) {
            problems.push(format!(
                "{name}: perturbation coefficient above {PERTURBATION_BOUND}"
            ));
        }
        let f = parse(&spec.function).map_err(|e| format!("{name}: {e}"))?;
        let opts = Options {
            r0: spec.r0,
            norms: NormSpec::Grid {
                grid: spec.grid,
                safety: DEFAULT_SAFETY,
            },
            ..Options::default()
        };
        let report = classify(&f, spec.point, opts.tol).map_err(|e| format!("{name}: {e}"))?;
        let label = report.kind.label();
        if spec.expect.as_deref() != Some(label.as_str()) {
            problems.push(format!(
                "{name}: classified {label}, expected {:?}",
                spec.expect
            ));
        }
        *counts.entry(label).or_default() += 1;
        let n = normalize(&f, spec.point, &opts).map_err(|e| format!("{name}: {e}"))?;
        let samples = certify::grid_samples(&n.map, &n.certificate, RESIDUAL_GRID)
            .map_err(|e| format!("{name}: {e}"))?;
        entries.push(Entry {
            name,
            f,
            n,
            samples,
            seed: spec.seed,
        });
    }
    let elapsed = start.elapsed();
    for t in ["E6", "E8", "A2", "A3", "A4", "A5"] {
        let c = counts.get(t).copied().unwrap_or(0);
        if c != CORPUS_PER_TYPE {
            problems.push(format!("{c} germs of type {t}, expected {CORPUS_PER_TYPE}"));
        }
    }
    Ok((entries, elapsed, problems))
}

fn residual(corpus: &[Entry], elapsed: Duration, problems: &[String]) -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = problems.to_vec();
    for e in corpus {
        let (res, scale, ..) = certify::grid_stats(&e.samples);
        worst = worst.max(res / scale);
        if res > RESIDUAL_TOL * scale {
            failures.push(format!("{}: residual {res:e}", e.name));
        }
    }
    if elapsed >= CORPUS_TIME {
        failures.push(format!("runtime {elapsed:.2?}"));
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{} germs, max residual / max(1, |f|) = {worst:.2e}, {elapsed:.2?}{}",
            corpus.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {}", failures.join("; "))
            }
        ),
    )
}

fn pinned_c(kind: NormalKind) -> f64 {
    match kind {
        NormalKind::E { .. } => C_E,
        NormalKind::A { .. } => C_A,
    }
}

fn jacobian(corpus: &[Entry]) -> Outcome {
    let (mut worst_e, mut worst_a) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for e in corpus {
        let c = pinned_c(e.n.kind);
        if e.n.certificate.c_bound != c {
            failures.push(format!("{}: C = {}", e.name, e.n.certificate.c_bound));
        }
        let d = e.samples.iter().map(|s| s.jac_dev).fold(0.0, f64::max);
        match e.n.kind {
            NormalKind::E { .. } => worst_e = worst_e.max(d),
            NormalKind::A { .. } => worst_a = worst_a.max(d),
        }
        if !(d < c) {
            failures.push(format!("{}: {d}", e.name));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "max |phi' - I|_F: E {worst_e:.3e} (< {C_E}), A {worst_a:.3e} (< {C_A}){}",
            fail_list(&failures)
        ),
    )
}

fn fail_list(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", failures.join(", "))
    }
}

fn monotonicity(corpus: &[Entry]) -> Outcome {
    let mut slack = f64::INFINITY;
    let mut failures = Vec::new();
    for e in corpus {
        let c = pinned_c(e.n.kind);
        match certify::check_monotonicity(&e.n.map, &e.n.certificate, MONOTONICITY_PAIRS, e.seed) {
            Ok(ratio) => {
                slack = slack.min(ratio - (1.0 - c));
                if !(ratio >= 1.0 - c) {
                    failures.push(format!("{}: {ratio}", e.name));
                }
            }
            Err(err) => failures.push(format!("{}: {err}", e.name)),
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{MONOTONICITY_PAIRS} pairs per germ, min(ratio - (1 - C)) = {slack:.3}{}",
            fail_list(&failures)
        ),
    )
}

fn derivative_increments(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    if LIPSCHITZ_SLACK != INCREMENT_SLACK {
        failures.push(format!("slack {LIPSCHITZ_SLACK}"));
    }
    let (mut checked, mut violations) = (0, 0);
    for e in corpus {
        match certify::check_derivative_increments(
            &e.n.map.function,
            &e.n.certificate,
            INCREMENT_POINTS,
        ) {
            Ok(r) => {
                if r.checked < INCREMENT_POINTS * r.indices.len() || r.indices.is_empty() {
                    failures.push(format!("{}: only {} checks", e.name, r.checked));
                }
                if r.violations > 0 {
                    failures.push(format!("{}: {} violations", e.name, r.violations));
                }
                checked += r.checked;
                violations += r.violations;
            }
            Err(err) => failures.push(format!("{}: {err}", e.name)),
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{violations} violations in {checked} checks, slack {INCREMENT_SLACK:e}{}",
            fail_list(&failures)
        ),
    )
}

fn disk(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    for e in corpus {
        let cert = &e.n.certificate;
        let cov =
            certify::check_disk_coverage(&e.n.map, cert, DISK_TARGETS, e.seed.wrapping_add(1));
        if cov != 1.0 {
            failures.push(format!("{}: coverage {cov}", e.name));
        }
        let far = 2.0 * cert.r;
        for q in [[far, 0.0], [0.0, -far]] {
            if certify::invert_phi(&e.n.map, cert, q).is_some() {
                failures.push(format!("{}: target at 2R inverted", e.name));
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{DISK_TARGETS} targets per germ in radius (1 - C) R all inverted; targets at 2R rejected{}",
            fail_list(&failures)
        ),
    )
}

fn oracle_equivalence(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let (mut compared, mut worst) = (0, 0.0f64);
    for e in corpus.iter().filter(|e| e.f.is_polynomial()) {
        match oracle::oracle_exact(&e.f, &e.n.chain, e.n.kind, e.n.signs) {
            Ok(exact) => match oracle::compare(&e.n.map, &exact, e.n.certificate.r, ORACLE_GRID) {
                Ok(cmp) => {
                    compared += 1;
                    worst = worst.max(cmp.max());
                    if !(cmp.max() <= ORACLE_TOL) {
                        failures.push(format!("{}: {:e}", e.name, cmp.max()));
                    }
                }
                Err(err) => failures.push(format!("{}: {err}", e.name)),
            },
            Err(OracleError::NotDivisible { .. }) => {}
            Err(err) => failures.push(format!("{}: {err}", e.name)),
        }
    }
    if compared == 0 {
        failures.push("no entry with a rational chain".into());
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{compared} polynomial germs, {ORACLE_GRID}x{ORACLE_GRID} grid, max relative deviation {worst:.2e}{}",
            fail_list(&failures)
        ),
    )
}

fn radius_spot_checks() -> Outcome {
    let cases = [
        (NormalKind::E { k: 6 }, 1.0, 2.0, 0.5),
        (NormalKind::A { n: 3 }, 1.0, 3.0, 0.2),
        (NormalKind::E { k: 8 }, 0.1, 0.0, 0.1),
        (NormalKind::A { n: 2 }, 0.1, 0.0, 0.1),
    ];
    let germs = [
        (NormalKind::E { k: 6 }, "x^3 + y^4"),
        (NormalKind::A { n: 3 }, "x^2 + x*y^2 + y^5"),
        (NormalKind::E { k: 8 }, "x^3 + y^5"),
        (NormalKind::A { n: 2 }, "x^2 + y^3"),
    ];
    let mut failures = Vec::new();
    for ((kind, r0, m, expect), (_, src)) in cases.into_iter().zip(germs) {
        let direct = kind.radius(r0, m);
        let table = kind.norm_indices().into_iter().map(|i| (i, m)).collect();
        let opts = Options {
            r0,
            norms: NormSpec::Table(table),
            ..Options::default()
        };
        let piped = normalize(&parse(src).unwrap(), [0.0, 0.0], &opts).map(|n| n.certificate.r);
        if direct != expect || piped != Ok(expect) {
            failures.push(format!(
                "{}: R0 = {r0}, M = {m}: {direct}, {piped:?}",
                kind.label()
            ));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "E(1, 2) = 0.5, A(1, 3) = 0.2, (0.1, 0) = 0.1 exactly{}",
            fail_list(&failures)
        ),
    )
}

fn compose_linear(f: &Expr, m: [[f64; 2]; 2]) -> Expr {
    let (x, y) = (Expr::var(Var::X), Expr::var(Var::Y));
    let c = |v: f64| Expr::constant(v).unwrap();
    let u = c(m[0][0]) * x.clone() + c(m[0][1]) * y.clone();
    let v = c(m[1][0]) * x + c(m[1][1]) * y;
    f.substitute(&u, &v)
}

fn classification() -> Outcome {
    let germs = [
        ("x^2 + y^3", "A2"),
        ("x^2 + x*y^2 + y^5", "A3"),
        ("x^2 - y^6", "A5"),
        ("x^3 + y^4", "E6"),
        ("x^3 + x*y^3", "E7"),
        ("x^3 + y^5", "E8"),
    ];
    let mut rng = Pcg64::seed_from_u64(9);
    let mut failures = Vec::new();
    let mut total = 0;
    for (src, expect) in germs {
        let f = parse(src).unwrap();
        let mut variants = vec![f.clone()];
        while variants.len() <= LINEAR_MAPS {
            let m = [
                [4.0 * unit(&mut rng) - 2.0, 4.0 * unit(&mut rng) - 2.0],
                [4.0 * unit(&mut rng) - 2.0, 4.0 * unit(&mut rng) - 2.0],
            ];
            if (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs() >= 0.25 {
                variants.push(compose_linear(&f, m));
            }
        }
        for g in &variants {
            total += 1;
            let got = classify(g, [0.0, 0.0], nfcert_core::classifier::DEFAULT_TOL)
                .map(|r| r.kind.label());
            if got.as_deref() != Ok(expect) {
                failures.push(format!("{src}: {got:?}"));
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{total} germs (6 canonical x (1 + {LINEAR_MAPS} linear maps)){}",
            fail_list(&failures)
        ),
    )
}

fn jet_oracle() -> Outcome {
    let mut rng = Pcg64::seed_from_u64(2024);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..JET_EXPRESSIONS {
        let src = fd::random_expr(&mut || unit(&mut rng), 3);
        let z = [unit(&mut rng) - 0.5, unit(&mut rng) - 0.5];
        let e = parse(&src).unwrap();
        let jet = match e.eval_jet(z, JET_ORDER) {
            Ok(j) => j,
            Err(err) => {
                failures.push(format!("{src}: {err}"));
                continue;
            }
        };
        let f = |x: f64, y: f64| e.eval_scalar([x, y]).unwrap();
        for order in 0..=JET_ORDER {
            for a in 0..=order {
                let b = order - a;
                let approx = fd::partial(&f, z, a, b);
                let rel = (jet.derivative(a, b).unwrap() - approx).abs() / approx.abs().max(1.0);
                worst = worst.max(rel);
                if !(rel <= JET_TOL) {
                    failures.push(format!("{src} d({a},{b}): {rel:e}"));
                }
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!("{JET_EXPRESSIONS} expressions, orders <= {JET_ORDER}, max relative deviation {worst:.2e}{}", fail_list(&failures)),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |n: usize, title: &'static str, o: Outcome| {
        println!(
            "criterion {n:>2} {title:<24} {} {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, title, o));
    };
    report(1, "identity case", identity_case());
    match load_corpus() {
        Ok((corpus, elapsed, problems)) => {
            report(
                2,
                "normal-form residual",
                residual(&corpus, elapsed, &problems),
            );
            report(3, "jacobian bound", jacobian(&corpus));
            report(4, "monotonicity", monotonicity(&corpus));
            report(5, "derivative increments", derivative_increments(&corpus));
            report(6, "disk coverage", disk(&corpus));
            report(7, "oracle equivalence", oracle_equivalence(&corpus));
        }
        Err(e) => {
            for (n, title) in [
                (2, "normal-form residual"),
                (3, "jacobian bound"),
                (4, "monotonicity"),
                (5, "derivative increments"),
                (6, "disk coverage"),
                (7, "oracle equivalence"),
            ] {
                report(n, title, Outcome::error(&e));
            }
        }
    }
    report(8, "radius spot checks", radius_spot_checks());
    report(9, "classification", classification());
    report(10, "jet oracle", jet_oracle());
    let failed = results.iter().filter(|(_, _, o)| !o.pass).count();
    println!(
        "acceptance: {} of {} criteria pass",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
