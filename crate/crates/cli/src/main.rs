use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use nfcert::corpus::{run_corpus, Summary};
use nfcert::report::Status;
use nfcert::{
    failed_job, run_job, write_csv_file, write_report, CliError, JobSpec, RunOptions, EXIT_IO,
};

/// Classify a degenerate critical point, build its normal-form coordinate
/// change and certify a radius.
#[derive(Debug, Parser)]
#[command(name = "nfcert", version)]
struct Args {
    /// Function in the expression language, e.g. "x^3 + y^4".
    #[arg(short, long, conflicts_with_all = ["spec", "corpus"])]
    function: Option<String>,
    /// JSON job file.
    #[arg(long, conflicts_with = "corpus")]
    spec: Option<PathBuf>,
    /// Directory of JSON job files.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Critical point "x,y" [default: 0,0].
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    point: Option<[f64; 2]>,
    /// Half-width R0 of the square on which sup-norms are taken.
    #[arg(long)]
    r0: Option<f64>,
    /// Points per axis of the sup-norm estimation grid.
    #[arg(long)]
    grid: Option<usize>,
    /// Seed for the sampled checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Write grid samples as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the JSON report (or, with --corpus, one report per job into this directory).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Stop after classification.
    #[arg(long)]
    classify_only: bool,
    /// Worker threads for --corpus.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (x, y) = s.split_once(',').ok_or("expected \"x,y\"")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([num(x)?, num(y)?])
}

fn paint(text: &str, code: &str) -> String {
    let color = std::env::var_os("NO_COLOR").is_none() && std::io::stderr().is_terminal();
    if color {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn status_label(s: Status) -> String {
    match s {
        Status::Pass => paint("PASS", "32"),
        Status::Fail => paint("FAIL", "31"),
        Status::Classified => paint("CLASSIFIED", "36"),
        Status::Error => paint("ERROR", "31"),
    }
}

fn print_summary(summary: &Summary) {
    let mut err = std::io::stderr().lock();
    for r in &summary.rows {
        let _ = writeln!(
            err,
            "{:<24} {:<12} {:<10} {}",
            r.name,
            r.kind.as_deref().unwrap_or("-"),
            status_label(r.status),
            r.error.as_deref().unwrap_or("")
        );
    }
    let _ = writeln!(
        err,
        "{} jobs: {} pass, {} fail, {} classified, {} errors",
        summary.jobs,
        summary.pass,
        summary.fail,
        summary.classified,
        summary.errors.values().sum::<usize>()
    );
}

fn single(args: &Args) -> Result<i32, CliError> {
    let mut spec = match (&args.function, &args.spec) {
        (Some(f), _) => JobSpec::new(f.clone()),
        (None, Some(path)) => match JobSpec::load(path) {
            Ok(s) => s,
            Err(e) => {
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
                let out = failed_job(name, &e);
                match &args.out {
                    Some(p) => write_report(p, &out.report)?,
                    None => print!("{}", out.report.to_json()),
                }
                eprintln!("{}: {e}", status_label(Status::Error));
                return Ok(e.exit_code());
            }
        },
        (None, None) => {
            return Err(CliError::InvalidSpec(
                "one of --function, --spec or --corpus is required".into(),
            ))
        }
    };
    if let Some(p) = args.point {
        spec.point = p;
    }
    if let Some(r0) = args.r0 {
        spec.r0 = r0;
    }
    if let Some(g) = args.grid {
        spec.grid = g;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    let opts = RunOptions {
        classify_only: args.classify_only,
        verify: None,
    };
    let out = run_job(&spec, &opts);
    let report_path = args.out.clone().or_else(|| spec.outputs.report.clone());
    match report_path {
        Some(p) => write_report(&p, &out.report)?,
        None => print!("{}", out.report.to_json()),
    }
    if let Some(p) = args.csv.clone().or_else(|| spec.outputs.csv.clone()) {
        write_csv_file(&p, &out.samples)?;
    }
    if let Some(e) = &out.report.error {
        eprintln!("{}: {}", status_label(Status::Error), e.message);
    }
    Ok(out.exit_code())
}

fn corpus(args: &Args, dir: &Path) -> Result<i32, CliError> {
    let opts = RunOptions {
        classify_only: args.classify_only,
        verify: None,
    };
    let (summary, _) = run_corpus(dir, args.jobs, &opts, args.out.as_deref())?;
    print!("{}", summary.to_json());
    print_summary(&summary);
    Ok(summary.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match &args.corpus {
        Some(dir) => corpus(&args, dir),
        None => single(&args),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::InvalidSpec(_) => 2,
                _ => EXIT_IO,
            }
        }
    };
    ExitCode::from(code as u8)
}
