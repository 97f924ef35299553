//! JSON report, schema `nfcert/1`.

use serde::Serialize;

use nfcert_core::certify::oracle::OracleComparison;
use nfcert_core::certify::{Verdicts, VerificationStats};
use nfcert_core::chain::{ChainConstants, ChangeChain, Step};
use nfcert_core::classifier::{SingularityReport, SingularityType};
use nfcert_core::normalform::{Certificate, NormSource};

pub const SCHEMA: &str = "nfcert/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Normal form built and every check passed.
    Pass,
    /// Normal form built but a check failed.
    Fail,
    /// Classified only.
    Classified,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessJson {
    pub alpha: usize,
    pub beta: usize,
    pub derivative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularityJson {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_x: Option<i8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_y: Option<i8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<&'static str>,
    pub point: [f64; 2],
    pub linear_map: [[f64; 2]; 2],
    pub critical_value: f64,
    pub witnesses: Vec<WitnessJson>,
}

impl From<&SingularityReport> for SingularityJson {
    fn from(r: &SingularityReport) -> Self {
        let (n, sign_x, sign_y, reason) = match r.kind {
            SingularityType::A { n, sign_x, sign_y } => (Some(n), Some(sign_x), Some(sign_y), None),
            SingularityType::E6 { sign_y } | SingularityType::E8 { sign_y } => {
                (None, Some(1), Some(sign_y), None)
            }
            SingularityType::NonDegenerateUnknown { reason } => (None, None, None, Some(reason)),
            _ => (None, None, None, None),
        };
        Self {
            kind: r.kind.label(),
            n,
            sign_x,
            sign_y,
            reason,
            point: r.point,
            linear_map: r.linear_map,
            critical_value: r.critical_value,
            witnesses: r
                .witnesses
                .iter()
                .map(|w| WitnessJson {
                    alpha: w.alpha,
                    beta: w.beta,
                    derivative: w.derivative,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepJson {
    Linear { matrix: [[f64; 2]; 2] },
    ShearX { poly: Vec<f64> },
    ShearY { poly: Vec<f64> },
    Scale { lambda: f64, mu: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainJson {
    pub origin: [f64; 2],
    pub steps: Vec<StepJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shear_constants: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<[f64; 2]>,
}

impl From<&ChangeChain> for ChainJson {
    fn from(c: &ChangeChain) -> Self {
        let (shear_constants, q) = match &c.constants {
            ChainConstants::None => (None, None),
            ChainConstants::Shears { d } => (Some(*d), None),
            ChainConstants::CompletingSquare { q } => (None, Some(q.clone())),
        };
        Self {
            origin: c.origin,
            steps: c
                .steps
                .iter()
                .map(|s| match s {
                    Step::Linear { matrix } => StepJson::Linear { matrix: *matrix },
                    Step::ShearX { poly } => StepJson::ShearX { poly: poly.clone() },
                    Step::ShearY { poly } => StepJson::ShearY { poly: poly.clone() },
                    Step::Scale { lambda, mu } => StepJson::Scale {
                        lambda: *lambda,
                        mu: *mu,
                    },
                })
                .collect(),
            shear_constants,
            q,
            scale: c.scale.map(|(l, m)| [l, m]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormJson {
    pub alpha: usize,
    pub beta: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSourceJson {
    UserSupplied,
    GridEstimated { grid: usize, safety: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateJson {
    pub normal_form: String,
    pub r0: f64,
    pub c_table: Vec<NormJson>,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub c_bound: f64,
    pub norms_source: NormSourceJson,
    pub identity: bool,
}

impl CertificateJson {
    pub fn new(c: &Certificate, identity: bool) -> Self {
        Self {
            normal_form: c.kind.label(),
            r0: c.r0,
            c_table: c
                .c_table
                .iter()
                .map(|&((alpha, beta), value)| NormJson { alpha, beta, value })
                .collect(),
            m: c.m_bound,
            r: c.r,
            c_bound: c.c_bound,
            norms_source: match c.source {
                NormSource::UserSupplied => NormSourceJson::UserSupplied,
                NormSource::GridEstimated { grid, safety } => {
                    NormSourceJson::GridEstimated { grid, safety }
                }
            },
            identity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationJson {
    pub grid_size: usize,
    pub max_residual: f64,
    pub residual_scale: f64,
    pub max_jac_deviation: f64,
    pub h_range: [f64; 2],
    pub monotonicity_pairs: usize,
    pub min_monotonicity_ratio: f64,
    pub lipschitz_checked: usize,
    pub lipschitz_violations: usize,
    pub disk_probes: usize,
    pub disk_coverage: f64,
    pub seed: u64,
}

impl From<&VerificationStats> for VerificationJson {
    fn from(s: &VerificationStats) -> Self {
        Self {
            grid_size: s.grid_size,
            max_residual: s.max_residual,
            residual_scale: s.f_scale,
            max_jac_deviation: s.max_jac_deviation,
            h_range: [s.min_h, s.max_h],
            monotonicity_pairs: s.monotonicity_pairs,
            min_monotonicity_ratio: s.min_monotonicity_ratio,
            lipschitz_checked: s.lipschitz_checked,
            lipschitz_violations: s.lipschitz_violations,
            disk_probes: s.disk_probes,
            disk_coverage: s.disk_coverage,
            seed: s.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictsJson {
    pub residual: Verdict,
    pub jacobian: Verdict,
    pub h_range: Verdict,
    pub monotonicity: Verdict,
    pub lipschitz: Verdict,
    pub disk_coverage: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Verdict>,
}

impl VerdictsJson {
    pub fn new(v: &Verdicts, oracle: Option<bool>) -> Self {
        Self {
            residual: Verdict::from_bool(v.residual),
            jacobian: Verdict::from_bool(v.jacobian),
            h_range: Verdict::from_bool(v.h_range),
            monotonicity: Verdict::from_bool(v.monotonicity),
            lipschitz: Verdict::from_bool(v.lipschitz),
            disk_coverage: Verdict::from_bool(v.disk_coverage),
            oracle: oracle.map(Verdict::from_bool),
        }
    }

    pub fn all_pass(&self) -> bool {
        [
            self.residual,
            self.jacobian,
            self.h_range,
            self.monotonicity,
            self.lipschitz,
            self.disk_coverage,
        ]
        .iter()
        .chain(self.oracle.iter())
        .all(|v| *v == Verdict::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleJson {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_rel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_rel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_rel: Option<f64>,
}

impl OracleJson {
    pub fn compared(c: &OracleComparison) -> Self {
        Self {
            applicable: true,
            reason: None,
            points: Some(c.points),
            h_rel: Some(c.h_rel),
            g_rel: Some(c.g_rel),
            grad_rel: Some(c.grad_rel),
        }
    }

    pub fn not_applicable(reason: String) -> Self {
        Self {
            applicable: false,
            reason: Some(reason),
            points: None,
            h_rel: None,
            g_rel: None,
            grad_rel: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorJson {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub function: String,
    pub point: [f64; 2],
    pub seed: u64,
    pub status: Status,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singularity: Option<SingularityJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization_skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<VerdictsJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorJson>,
}

impl Report {
    pub fn new(name: Option<String>, function: String, point: [f64; 2], seed: u64) -> Self {
        Self {
            schema: SCHEMA,
            name,
            function,
            point,
            seed,
            status: Status::Error,
            exit_code: 1,
            expected: None,
            singularity: None,
            normalization_skipped: None,
            chain: None,
            certificate: None,
            verification: None,
            oracle: None,
            verdicts: None,
            error: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
