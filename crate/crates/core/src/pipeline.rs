//! End-to-end run: classify, pre-normalize, build `φ`, certify, verify.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::certify::{self, Sample, Verdicts, VerificationStats, VerifyOptions};
use crate::chain::{ChangeChain, FramedFunction};
use crate::classifier::{self, jet_in_frame, SingularityReport, SingularityType};
use crate::expr::Expr;
use crate::jet::MAX_ORDER;
use crate::normalform::{
    certify_radius, decompose, Certificate, NormSpec, NormalFormMap, NormalKind,
};
use crate::prenormalize::{self, Signs};
use crate::quadrature::DEFAULT_NODES;
use crate::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub tol: f64,
    pub r0: f64,
    pub norms: NormSpec,
    pub quadrature_nodes: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tol: classifier::DEFAULT_TOL,
            r0: 1.0,
            norms: NormSpec::default(),
            quadrature_nodes: DEFAULT_NODES,
        }
    }
}

/// A constructed normal form with its certificate.
#[derive(Clone, Debug)]
pub struct Normalization {
    pub kind: NormalKind,
    pub signs: Signs,
    pub chain: ChangeChain,
    pub map: NormalFormMap,
    pub certificate: Certificate,
}

impl Normalization {
    pub fn verify(
        &self,
        opts: &VerifyOptions,
    ) -> Result<(VerificationStats, Vec<Sample>, Verdicts), Error> {
        let (stats, samples) = certify::verify(&self.map, &self.certificate, opts)?;
        let verdicts = stats.verdicts(&self.certificate);
        Ok((stats, samples, verdicts))
    }
}

#[derive(Clone, Debug)]
pub enum Stage {
    Normalized(Box<Normalization>),
    /// Classified, but no normal-form construction is available.
    Skipped {
        reason: &'static str,
    },
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: SingularityReport,
    pub stage: Stage,
}

/// Normal-form family for a classified type, or the reason there is none.
pub fn normal_kind(kind: &SingularityType) -> Result<NormalKind, &'static str> {
    match *kind {
        SingularityType::E6 { .. } => Ok(NormalKind::E { k: 6 }),
        SingularityType::E8 { .. } => Ok(NormalKind::E { k: 8 }),
        SingularityType::E7 => Err("no explicit construction for E7"),
        SingularityType::A { n: 1, .. } => Err("Morse point (A1): normalization out of scope"),
        SingularityType::A { n, .. } if n + 3 > MAX_ORDER => {
            Err("A_n with n > 9 exceeds the jet order budget")
        }
        SingularityType::A { n, .. } => Ok(NormalKind::A { n }),
        SingularityType::NonCritical => Err("not a critical point"),
        SingularityType::NonDegenerateUnknown { reason } => Err(reason),
    }
}

/// Builds the full change chain and `φ` for a classified point.
pub fn normalize(
    f: &Expr,
    report: &SingularityReport,
    kind: NormalKind,
    opts: &Options,
) -> Result<Normalization, Error> {
    let jet = f.eval_jet(report.point, MAX_ORDER)?;
    let framed = jet_in_frame(&jet, report.linear_map)?;
    let mut chain = report.frame_chain();
    let sheared = match kind {
        NormalKind::E { k } => {
            let (c, j) = prenormalize::shear_chain_e(&framed, k, opts.tol)?;
            chain.extend(c);
            j
        }
        NormalKind::A { n } => {
            let (c, j, found) = prenormalize::shear_a(&framed, opts.tol)?;
            if found != n {
                return Err(Error::InvalidArgument("A-type order changed during shear"));
            }
            chain.extend(c);
            j
        }
    };
    let (scale, _, signs) = prenormalize::normalize_assumption(&sheared, kind)?;
    chain.extend(scale);
    let function = FramedFunction::new(f.clone(), chain.clone());
    let certificate = certify_radius(&function, kind, opts.r0, &opts.norms)?;
    let mut map = decompose(function, kind, signs, opts.quadrature_nodes)?;
    map.set_identity(certificate.m_bound == 0.0);
    Ok(Normalization {
        kind,
        signs,
        chain,
        map,
        certificate,
    })
}

/// Classifies `f` at `p` and, when possible, constructs the normal form.
pub fn run(f: &Expr, p: [f64; 2], opts: &Options) -> Result<Outcome, Error> {
    let report = classifier::classify(f, p, opts.tol)?;
    let stage = match normal_kind(&report.kind) {
        Ok(kind) => Stage::Normalized(Box::new(normalize(f, &report, kind, opts)?)),
        Err(reason) => Stage::Skipped { reason },
    };
    Ok(Outcome { report, stage })
}
