//! Batch front-end for `nfcert-core`: runs job specifications end to end and
//! emits versioned JSON reports and CSV sample dumps.

pub mod corpus;
pub mod job;
pub mod report;

use std::path::Path;

use nfcert_core::certify::oracle::{self, OracleError};
use nfcert_core::certify::{Sample, VerifyOptions};
use nfcert_core::normalform::NormSpec;
use nfcert_core::pipeline::{self, Normalization, Options};
use nfcert_core::{parse, Error};

pub use job::JobSpec;
pub use report::{Report, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CLASSIFICATION: i32 = 3;
pub const EXIT_CHAIN_SOLVE: i32 = 4;
pub const EXIT_VERIFICATION: i32 = 5;

/// Oracle agreement required for a PASS.
pub const ORACLE_TOLERANCE: f64 = 1e-13;
/// Points per axis of the oracle comparison grid.
pub const ORACLE_GRID: usize = 21;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("invalid job file: {0}")]
    SpecSyntax(String),
    #[error("invalid job: {0}")]
    InvalidSpec(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(..) | CliError::Csv(_) => EXIT_IO,
            CliError::SpecSyntax(_) | CliError::InvalidSpec(_) => EXIT_PARSE,
            CliError::Core(e) => core_exit_code(e),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io(..) | CliError::Csv(_) => "io",
            CliError::SpecSyntax(_) | CliError::InvalidSpec(_) => "invalid_spec",
            CliError::Core(e) => core_error_kind(e),
        }
    }
}

pub fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Domain(_)
        | Error::InvalidArgument(_)
        | Error::MissingNorm { .. } => EXIT_PARSE,
        Error::Frame(_) | Error::OrderBudgetExceeded { .. } => EXIT_CLASSIFICATION,
        Error::ChainSolveDiverged { .. } => EXIT_CHAIN_SOLVE,
        _ => EXIT_VERIFICATION,
    }
}

fn core_error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) => "parse",
        Error::Domain(_) => "domain",
        Error::InvalidArgument(_) | Error::MissingNorm { .. } => "invalid_spec",
        Error::Frame(_) | Error::OrderBudgetExceeded { .. } => "classification",
        Error::ChainSolveDiverged { .. } => "chain_solve",
        _ => "verification",
    }
}

/// Overrides applied on top of a job specification.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub classify_only: bool,
    pub verify: Option<VerifyOptions>,
}

/// Everything produced by one job.
#[derive(Clone, Debug)]
pub struct JobOutput {
    pub report: Report,
    pub samples: Vec<Sample>,
    pub normalization: Option<Normalization>,
}

impl JobOutput {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

fn error_report(report: &mut Report, err: &CliError) {
    let offset = match err {
        CliError::Core(Error::Parse(p)) => Some(p.offset),
        _ => None,
    };
    report.status = Status::Error;
    report.exit_code = err.exit_code();
    report.error = Some(report::ErrorJson {
        kind: err.kind(),
        message: err.to_string(),
        offset,
    });
}

fn oracle_section(
    spec_fn: &nfcert_core::Expr,
    n: &Normalization,
) -> Result<(report::OracleJson, Option<bool>), Error> {
    if !spec_fn.is_polynomial() {
        return Ok((
            report::OracleJson::not_applicable("function is not a polynomial".into()),
            None,
        ));
    }
    match oracle::oracle_exact(spec_fn, &n.chain, n.kind, n.signs) {
        Ok(exact) => {
            let cmp = oracle::compare(&n.map, &exact, n.certificate.r, ORACLE_GRID)?;
            Ok((
                report::OracleJson::compared(&cmp),
                Some(cmp.max() <= ORACLE_TOLERANCE),
            ))
        }
        Err(e @ OracleError::NotDivisible { .. }) => Ok((
            report::OracleJson::not_applicable(format!("chain is not exactly rational: {e}")),
            None,
        )),
        Err(e) => Ok((report::OracleJson::not_applicable(e.to_string()), None)),
    }
}

/// Output for a job whose specification could not be loaded.
pub fn failed_job(name: Option<String>, err: &CliError) -> JobOutput {
    let mut report = Report::new(name, String::new(), [0.0, 0.0], 0);
    error_report(&mut report, err);
    JobOutput {
        report,
        samples: Vec::new(),
        normalization: None,
    }
}

/// Runs one job; errors are folded into the report.
pub fn run_job(spec: &JobSpec, opts: &RunOptions) -> JobOutput {
    let mut report = Report::new(
        spec.name.clone(),
        spec.function.clone(),
        spec.point,
        spec.seed,
    );
    report.expected = spec.expect.clone();
    let mut samples = Vec::new();
    let mut normalization = None;
    if let Err(e) = run_job_inner(spec, opts, &mut report, &mut samples, &mut normalization) {
        error_report(&mut report, &e);
    }
    JobOutput {
        report,
        samples,
        normalization,
    }
}

fn run_job_inner(
    spec: &JobSpec,
    opts: &RunOptions,
    report: &mut Report,
    samples: &mut Vec<Sample>,
    normalization: &mut Option<Normalization>,
) -> Result<(), CliError> {
    spec.validate()?;
    let f = parse(&spec.function).map_err(Error::from)?;
    report.function = f.to_string();
    let norms = match &spec.norms {
        Some(table) => {
            NormSpec::Table(table.iter().map(|e| ((e.alpha, e.beta), e.value)).collect())
        }
        None => NormSpec::Grid {
            grid: spec.grid,
            safety: nfcert_core::normalform::DEFAULT_SAFETY,
        },
    };
    let options = Options {
        r0: spec.r0,
        norms,
        ..Options::default()
    };
    let classify = nfcert_core::classify(&f, spec.point, options.tol)?;
    report.singularity = Some((&classify).into());
    if let Some(expected) = &spec.expect {
        let found = classify.kind.label();
        if !expected.eq_ignore_ascii_case(&found) {
            report.status = Status::Fail;
            report.exit_code = EXIT_CLASSIFICATION;
            report.error = Some(report::ErrorJson {
                kind: "classification",
                message: format!("expected {expected}, classified as {found}"),
                offset: None,
            });
            return Ok(());
        }
    }
    if opts.classify_only || spec.classify_only {
        report.status = Status::Classified;
        report.exit_code = EXIT_OK;
        return Ok(());
    }
    let kind = match pipeline::normal_kind(&classify.kind) {
        Ok(kind) => kind,
        Err(reason) => {
            report.normalization_skipped = Some(reason.to_string());
            report.status = Status::Classified;
            report.exit_code = EXIT_CLASSIFICATION;
            return Ok(());
        }
    };
    let n = pipeline::normalize(&f, &classify, kind, &options)?;
    report.chain = Some((&n.chain).into());
    report.certificate = Some(report::CertificateJson::new(
        &n.certificate,
        n.map.is_identity(),
    ));
    let verify = opts.verify.unwrap_or(VerifyOptions {
        seed: spec.seed,
        ..VerifyOptions::default()
    });
    let (stats, s, verdicts) = n.verify(&verify)?;
    let (oracle_json, oracle_ok) = oracle_section(&f, &n)?;
    let v = report::VerdictsJson::new(&verdicts, oracle_ok);
    report.verification = Some((&stats).into());
    report.oracle = Some(oracle_json);
    let pass = v.all_pass();
    report.verdicts = Some(v);
    report.status = if pass { Status::Pass } else { Status::Fail };
    report.exit_code = if pass { EXIT_OK } else { EXIT_VERIFICATION };
    *samples = s;
    *normalization = Some(n);
    Ok(())
}

/// Writes samples as CSV with columns `x,y,xt,yt,residual,jac_dev`.
pub fn write_csv<W: std::io::Write>(out: W, samples: &[Sample]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "xt", "yt", "residual", "jac_dev"])?;
    for s in samples {
        w.serialize((s.x, s.y, s.xt, s.yt, s.residual, s.jac_dev))?;
    }
    w.flush().map_err(|e| CliError::Io("csv".into(), e))?;
    Ok(())
}

pub fn write_csv_file(path: &Path, samples: &[Sample]) -> Result<(), CliError> {
    let file =
        std::fs::File::create(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    write_csv(std::io::BufWriter::new(file), samples)
}

pub fn write_report(path: &Path, report: &Report) -> Result<(), CliError> {
    std::fs::write(path, report.to_json()).map_err(|e| CliError::Io(path.display().to_string(), e))
}
