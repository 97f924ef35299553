//! Classification and explicit normal-form reduction of degenerate critical
//! points of smooth functions of two variables.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`classifier`] decides the singularity type (`A_n`, `E6`, `E7`, `E8`)
//!    and a linear frame in which the leading form is `±x^2` or `x^3`;
//! 2. [`prenormalize`] builds the polynomial shears and scalings that clear
//!    the low-order Taylor coefficients;
//! 3. [`normalform`] constructs the nonlinear change `φ` bringing the
//!    function to `f(P) ± x̃^m ± ỹ^p` together with a certified radius;
//! 4. [`certify`] checks the claimed properties of `φ` by sampling, and
//!    provides an exact rational oracle for polynomial inputs.
//!
//! The crate is `no_std` (with `alloc`); IO lives in the `nfcert` binary.
//!
//! ```
//! use nfcert_core::certify::VerifyOptions;
//! use nfcert_core::parse;
//! use nfcert_core::pipeline::{run, Options, Stage};
//!
//! let f = parse("x^3 + y^4 + 0.1*x*y^3")?;
//! let out = run(&f, [0.0, 0.0], &Options::default())?;
//! assert_eq!(out.report.kind.label(), "E6");
//! if let Stage::Normalized(n) = out.stage {
//!     let [xt, yt] = n.map.phi([0.01, 0.02])?;
//!     let (_, _, verdicts) = n.verify(&VerifyOptions::default())?;
//!     assert!(verdicts.all());
//!     println!("R = {}, phi = ({xt}, {yt})", n.certificate.r);
//! }
//! # Ok::<(), nfcert_core::Error>(())
//! ```
#![no_std]

extern crate alloc;

pub mod certify;
pub mod chain;
pub mod classifier;
pub mod expr;
pub mod jet;
pub mod normalform;
pub mod pipeline;
pub mod prenormalize;
pub mod program;
pub mod quadrature;

use core::fmt;

pub use chain::{ChangeChain, FramedFunction, Step};
pub use classifier::{classify, SingularityReport, SingularityType};
pub use expr::{parse, Expr};
pub use jet::{Jet, Truncation};
pub use normalform::{Certificate, NormalFormMap, NormalKind};

/// Crate-wide error.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    Parse(expr::ParseError),
    Domain(expr::DomainError),
    Jet(jet::JetError),
    Frame(classifier::FrameError),
    ChainSolveDiverged { iterations: usize, residual: f64 },
    OrderBudgetExceeded { budget: usize },
    OutsideCertifiedRegion { which: &'static str, value: f64 },
    QuadratureOrder(usize),
    InvalidArgument(&'static str),
    MissingNorm { alpha: usize, beta: usize },
    Oracle(certify::oracle::OracleError),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(e) => write!(f, "parse error {e}"),
            Error::Domain(e) => write!(f, "domain error: {e}"),
            Error::Jet(e) => write!(f, "jet error: {e}"),
            Error::Frame(e) => write!(f, "{e}"),
            Error::ChainSolveDiverged {
                iterations,
                residual,
            } => write!(
                f,
                "chain solve diverged after {iterations} iterations (residual {residual:e})"
            ),
            Error::OrderBudgetExceeded { budget } => {
                write!(
                    f,
                    "order budget exceeded: no leading term up to order {budget}"
                )
            }
            Error::OutsideCertifiedRegion { which, value } => {
                write!(f, "outside certified region: {which} = {value}")
            }
            Error::QuadratureOrder(n) => {
                write!(f, "quadrature order {n} is below the minimum of 4")
            }
            Error::InvalidArgument(s) => write!(f, "invalid argument: {s}"),
            Error::MissingNorm { alpha, beta } => {
                write!(f, "norm table is missing C_{{{alpha},{beta}}}")
            }
            Error::Oracle(e) => write!(f, "exact oracle: {e}"),
        }
    }
}

impl core::error::Error for Error {}

impl From<expr::ParseError> for Error {
    fn from(e: expr::ParseError) -> Self {
        Error::Parse(e)
    }
}

impl From<expr::DomainError> for Error {
    fn from(e: expr::DomainError) -> Self {
        Error::Domain(e)
    }
}

impl From<jet::JetError> for Error {
    fn from(e: jet::JetError) -> Self {
        Error::Jet(e)
    }
}

impl From<classifier::FrameError> for Error {
    fn from(e: classifier::FrameError) -> Self {
        Error::Frame(e)
    }
}

impl From<certify::oracle::OracleError> for Error {
    fn from(e: certify::oracle::OracleError) -> Self {
        Error::Oracle(e)
    }
}
