//! Corpus runs over a directory of job files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::report::Status;
use crate::{failed_job, run_job, write_report, CliError, JobOutput, JobSpec, RunOptions};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: Option<String>,
    pub expected: Option<String>,
    pub status: Status,
    pub exit_code: i32,
    pub max_residual: Option<f64>,
    pub max_jac_deviation: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub jobs: usize,
    pub pass: usize,
    pub fail: usize,
    pub classified: usize,
    pub errors: BTreeMap<String, usize>,
    pub types: BTreeMap<String, usize>,
    pub max_residual: f64,
    pub max_jac_deviation: f64,
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    /// 0 when every job succeeded, otherwise the largest job exit code.
    pub fn exit_code(&self) -> i32 {
        self.rows.iter().map(|r| r.exit_code).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Sorted `*.json` files of `dir`.
pub fn job_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |e| CliError::Io(dir.display().to_string(), e);
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn run_file(path: &Path, opts: &RunOptions) -> JobOutput {
    match JobSpec::load(path) {
        Ok(spec) => run_job(&spec, opts),
        Err(e) => failed_job(
            path.file_stem().map(|s| s.to_string_lossy().into_owned()),
            &e,
        ),
    }
}

fn row(out: &JobOutput) -> SummaryRow {
    let r = &out.report;
    SummaryRow {
        name: r.name.clone().unwrap_or_default(),
        kind: r.singularity.as_ref().map(|s| s.kind.clone()),
        expected: r.expected.clone(),
        status: r.status,
        exit_code: r.exit_code,
        max_residual: r.verification.as_ref().map(|v| v.max_residual),
        max_jac_deviation: r.verification.as_ref().map(|v| v.max_jac_deviation),
        error: r.error.as_ref().map(|e| e.message.clone()),
    }
}

/// Runs every job file in `dir` on a pool of `jobs` workers.
///
/// Per-job failures are recorded in the summary. Reports are written to
/// `out_dir` (one `<name>.json` per job) when given.
pub fn run_corpus(
    dir: &Path,
    jobs: usize,
    opts: &RunOptions,
    out_dir: Option<&Path>,
) -> Result<(Summary, Vec<JobOutput>), CliError> {
    let files = job_files(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::InvalidSpec(e.to_string()))?;
    let outputs: Vec<JobOutput> =
        pool.install(|| files.par_iter().map(|f| run_file(f, opts)).collect());

    if let Some(out) = out_dir {
        std::fs::create_dir_all(out).map_err(|e| CliError::Io(out.display().to_string(), e))?;
        for o in &outputs {
            let name = o.report.name.clone().unwrap_or_else(|| "job".into());
            write_report(&out.join(format!("{name}.json")), &o.report)?;
        }
    }

    let mut summary = Summary {
        schema: crate::report::SCHEMA,
        jobs: outputs.len(),
        ..Summary::default()
    };
    for o in &outputs {
        let r = &o.report;
        match r.status {
            Status::Pass => summary.pass += 1,
            Status::Fail => summary.fail += 1,
            Status::Classified => summary.classified += 1,
            Status::Error => {
                let kind = r.error.as_ref().map(|e| e.kind).unwrap_or("unknown");
                *summary.errors.entry(kind.to_string()).or_default() += 1;
            }
        }
        if let Some(s) = &r.singularity {
            *summary.types.entry(s.kind.clone()).or_default() += 1;
        }
        if let Some(v) = &r.verification {
            summary.max_residual = summary.max_residual.max(v.max_residual);
            summary.max_jac_deviation = summary.max_jac_deviation.max(v.max_jac_deviation);
        }
        summary.rows.push(row(o));
    }
    Ok((summary, outputs))
}
