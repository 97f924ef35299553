//! Singularity type detection at a critical point.
//!
//! The classifier works on the Taylor jet at `P`. A rank-1 Hessian leads to
//! the `A_n` branch (frame with `d²f = ±(dx)²`), a vanishing Hessian with a
//! cubic that is a perfect cube leads to the `E` branch (frame with
//! `d³f = (dx)³`). Rank decisions use thresholds relative to the size of the
//! jet, with an absolute floor of `tol`.

use alloc::vec::Vec;
use core::fmt;

use crate::chain::{invert2, ChangeChain, Step};
use crate::expr::Expr;
use crate::jet::{Jet, Truncation, MAX_ORDER};
use crate::prenormalize;
use crate::Error;

/// Default relative tolerance for rank and vanishing decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum FrameError {
    /// Rank-2 Hessian: a Morse point.
    Morse,
    /// Hessian vanishes: try the E family.
    RankZero,
    /// Third differential vanishes: more degenerate than E.
    ZeroCubic,
    /// The cubic form has distinct roots.
    NotPerfectCube { discriminant: f64 },
    /// Nonzero Hessian where the cubic frame was requested.
    NonzeroHessian,
}

impl fmt::Display for FrameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameError::Morse => write!(f, "Morse (A1 nondegenerate)"),
            FrameError::RankZero => write!(f, "Hessian vanishes, try E family"),
            FrameError::ZeroCubic => write!(f, "more degenerate than E (third differential vanishes)"),
            FrameError::NotPerfectCube { discriminant } => write!(
                f,
                "third differential is not a perfect cube (normalized discriminant {discriminant:e})"
            ),
            FrameError::NonzeroHessian => write!(f, "second differential does not vanish"),
        }
    }
}

impl core::error::Error for FrameError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SingularityType {
    NonCritical,
    /// `±x² ± y^{n+1}`; `n = 1` is the Morse case.
    A {
        n: usize,
        sign_x: i8,
        sign_y: i8,
    },
    E6 {
        sign_y: i8,
    },
    E7,
    E8 {
        sign_y: i8,
    },
    NonDegenerateUnknown {
        reason: &'static str,
    },
}

impl SingularityType {
    pub fn label(&self) -> alloc::string::String {
        use alloc::format;
        match self {
            SingularityType::NonCritical => "noncritical".into(),
            SingularityType::A { n, .. } => format!("A{n}"),
            SingularityType::E6 { .. } => "E6".into(),
            SingularityType::E7 => "E7".into(),
            SingularityType::E8 { .. } => "E8".into(),
            SingularityType::NonDegenerateUnknown { .. } => "unclassified".into(),
        }
    }
}

/// Derivative value examined by a classification test, in the report frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub alpha: usize,
    pub beta: usize,
    pub derivative: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityReport {
    pub kind: SingularityType,
    pub point: [f64; 2],
    /// `L` with `(x, y) = L (u - P)`.
    pub linear_map: [[f64; 2]; 2],
    pub critical_value: f64,
    pub witnesses: Vec<Witness>,
}

impl SingularityReport {
    /// Translation to `P` followed by the linear frame.
    pub fn frame_chain(&self) -> ChangeChain {
        let mut c = ChangeChain::at(self.point);
        c.push(Step::Linear {
            matrix: self.linear_map,
        });
        c
    }
}

fn sign_of(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

/// Scale used to make thresholds relative: at least 1.
pub(crate) fn jet_scale(j: &Jet, lo: usize, hi: usize) -> f64 {
    j.max_abs_in(lo..=hi.min(j.order())).max(1.0)
}

/// `true` iff both first partials are at most `tol` in absolute value.
pub fn is_critical(f: &Expr, p: [f64; 2], tol: f64) -> Result<bool, Error> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive"));
    }
    let j = f.eval_jet(p, 1)?;
    Ok(libm::fabs(j.coeff(1, 0)) <= tol && libm::fabs(j.coeff(0, 1)) <= tol)
}

/// Eigenpairs of a symmetric 2×2 matrix `[[a, b], [b, c]]`, larger magnitude first.
fn sym_eigen(a: f64, b: f64, c: f64) -> ((f64, [f64; 2]), (f64, [f64; 2])) {
    if b == 0.0 {
        let (ex, ey) = ((a, [1.0, 0.0]), (c, [0.0, 1.0]));
        return if libm::fabs(a) >= libm::fabs(c) {
            (ex, ey)
        } else {
            (ey, ex)
        };
    }
    let mean = 0.5 * (a + c);
    let r = libm::hypot(0.5 * (a - c), b);
    let big = if mean >= 0.0 { mean + r } else { mean - r };
    let small = (a * c - b * b) / big;
    let vec_for = |lam: f64| {
        let v1 = [b, lam - a];
        let v2 = [lam - c, b];
        let n1 = libm::hypot(v1[0], v1[1]);
        let n2 = libm::hypot(v2[0], v2[1]);
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        let mut v = [v[0] / n, v[1] / n];
        let lead = if libm::fabs(v[0]) >= libm::fabs(v[1]) {
            v[0]
        } else {
            v[1]
        };
        if lead < 0.0 {
            v = [-v[0], -v[1]];
        }
        v
    };
    ((big, vec_for(big)), (small, vec_for(small)))
}

/// Completes the covector `ell` to an invertible frame with a coordinate axis.
fn frame_from_covector(ell: [f64; 2]) -> [[f64; 2]; 2] {
    if libm::fabs(ell[0]) >= libm::fabs(ell[1]) {
        [ell, [0.0, 1.0]]
    } else {
        [ell, [1.0, 0.0]]
    }
}

/// Jet of `f` in the frame `z = L u`, from the jet at `P` in displacement coordinates.
pub fn jet_in_frame(j: &Jet, linear_map: [[f64; 2]; 2]) -> Result<Jet, Error> {
    let inv = invert2(linear_map).ok_or(Error::InvalidArgument("singular linear map"))?;
    let t = Truncation::total(j.order());
    let x = Jet::variable([0.0, 0.0], t, 0)?;
    let y = Jet::variable([0.0, 0.0], t, 1)?;
    let sx = &x.scale(inv[0][0]) + &y.scale(inv[0][1]);
    let sy = &x.scale(inv[1][0]) + &y.scale(inv[1][1]);
    Ok(j.compose_substitution(&sx, &sy)?)
}

/// Frame with `d²f = ±(dx)²` for a rank-1 Hessian; returns the map and the sign.
pub fn quadratic_perfect_square_frame(
    j: &Jet,
    tol: f64,
) -> Result<([[f64; 2]; 2], i8), FrameError> {
    let (a, b, c) = (2.0 * j.coeff(2, 0), j.coeff(1, 1), 2.0 * j.coeff(0, 2));
    let ((big, v), (small, _)) = sym_eigen(a, b, c);
    let scale = jet_scale(j, 2, 5);
    if libm::fabs(big) <= tol * scale {
        return Err(FrameError::RankZero);
    }
    if libm::fabs(small) > tol * libm::fabs(big).max(1.0) {
        return Err(FrameError::Morse);
    }
    // d²f = big (v·du)², so x = sqrt(|big|/2) v·du gives f''_{xx} = ±2.
    let k = libm::sqrt(libm::fabs(big) / 2.0);
    Ok((frame_from_covector([k * v[0], k * v[1]]), sign_of(big)))
}

/// Frame with `d³f = (dx)³` when the cubic form is a perfect cube.
pub fn cubic_perfect_cube_frame(j: &Jet, tol: f64) -> Result<[[f64; 2]; 2], FrameError> {
    let raw = [j.coeff(3, 0), j.coeff(2, 1), j.coeff(1, 2), j.coeff(0, 3)];
    let s = raw.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    if s <= tol * jet_scale(j, 3, 5) {
        return Err(FrameError::ZeroCubic);
    }
    let [a, b, c, d] = raw.map(|v| v / s);
    // Hessian covariant of the binary cubic; it vanishes iff the cubic is a cube.
    let hess = [
        b * b - 3.0 * a * c,
        b * c - 9.0 * a * d,
        c * c - 3.0 * b * d,
    ];
    let disc = b * b * c * c - 4.0 * a * c * c * c - 4.0 * b * b * b * d - 27.0 * a * a * d * d
        + 18.0 * a * b * c * d;
    let hmax = hess.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    if hmax > tol || libm::fabs(disc) > tol {
        return Err(FrameError::NotPerfectCube { discriminant: disc });
    }
    let [a, b, c, d] = raw;
    let ell = if libm::fabs(a) >= libm::fabs(d) {
        let k = libm::cbrt(a);
        [k, k * b / (3.0 * a)]
    } else {
        let k = libm::cbrt(d);
        [k * c / (3.0 * d), k]
    };
    Ok(frame_from_covector(ell))
}

fn witness(j: &Jet, alpha: usize, beta: usize) -> Witness {
    Witness {
        alpha,
        beta,
        derivative: j.derivative(alpha, beta).unwrap_or(0.0),
    }
}

/// Determines the singularity type of `f` at `p`.
pub fn classify(f: &Expr, p: [f64; 2], tol: f64) -> Result<SingularityReport, Error> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive"));
    }
    let jet = f.eval_jet(p, MAX_ORDER)?;
    let mut report = SingularityReport {
        kind: SingularityType::NonCritical,
        point: p,
        linear_map: [[1.0, 0.0], [0.0, 1.0]],
        critical_value: jet.value(),
        witnesses: Vec::new(),
    };
    if libm::fabs(jet.coeff(1, 0)) > tol || libm::fabs(jet.coeff(0, 1)) > tol {
        report.witnesses = alloc::vec![witness(&jet, 1, 0), witness(&jet, 0, 1)];
        return Ok(report);
    }

    match quadratic_perfect_square_frame(&jet, tol) {
        Ok((l, sign_x)) => {
            report.linear_map = l;
            let framed = jet_in_frame(&jet, l)?;
            match prenormalize::shear_a(&framed, tol) {
                Ok((_, sheared, n)) => {
                    let lead = sheared.coeff(0, n + 1);
                    report.kind = SingularityType::A {
                        n,
                        sign_x,
                        sign_y: sign_of(lead),
                    };
                    report.witnesses =
                        alloc::vec![witness(&sheared, 2, 0), witness(&sheared, 0, n + 1)];
                }
                Err(Error::OrderBudgetExceeded { .. }) => {
                    report.kind = SingularityType::NonDegenerateUnknown {
                        reason: "A-type order budget exceeded",
                    };
                    report.witnesses = alloc::vec![witness(&framed, 2, 0)];
                }
                Err(e) => return Err(e),
            }
            return Ok(report);
        }
        Err(FrameError::Morse) => {
            let (a, b, c) = (
                2.0 * jet.coeff(2, 0),
                jet.coeff(1, 1),
                2.0 * jet.coeff(0, 2),
            );
            let ((l1, v1), (l2, v2)) = sym_eigen(a, b, c);
            let k1 = libm::sqrt(libm::fabs(l1) / 2.0);
            let k2 = libm::sqrt(libm::fabs(l2) / 2.0);
            report.linear_map = [[k1 * v1[0], k1 * v1[1]], [k2 * v2[0], k2 * v2[1]]];
            report.kind = SingularityType::A {
                n: 1,
                sign_x: sign_of(l1),
                sign_y: sign_of(l2),
            };
            report.witnesses = alloc::vec![
                witness(&jet, 2, 0),
                witness(&jet, 1, 1),
                witness(&jet, 0, 2)
            ];
            return Ok(report);
        }
        Err(FrameError::RankZero) => {}
        Err(e) => return Err(e.into()),
    }

    let l = match cubic_perfect_cube_frame(&jet, tol) {
        Ok(l) => l,
        Err(FrameError::ZeroCubic) => {
            report.kind = SingularityType::NonDegenerateUnknown {
                reason: "third differential vanishes",
            };
            return Ok(report);
        }
        Err(FrameError::NotPerfectCube { .. }) => {
            report.kind = SingularityType::NonDegenerateUnknown {
                reason: "third differential is not a perfect cube",
            };
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    report.linear_map = l;
    let framed = jet_in_frame(&jet, l)?;
    let thr = tol * jet_scale(&framed, 3, 5);
    report.witnesses = alloc::vec![
        witness(&framed, 3, 0),
        witness(&framed, 0, 4),
        witness(&framed, 1, 3),
        witness(&framed, 0, 5),
    ];
    let (c04, c13, c05) = (framed.coeff(0, 4), framed.coeff(1, 3), framed.coeff(0, 5));
    report.kind = if libm::fabs(c04) > thr {
        SingularityType::E6 {
            sign_y: sign_of(c04),
        }
    } else if libm::fabs(c13) > thr {
        SingularityType::E7
    } else if libm::fabs(c05) > thr {
        SingularityType::E8 {
            sign_y: sign_of(c05),
        }
    } else {
        SingularityType::NonDegenerateUnknown {
            reason: "E family beyond E8",
        }
    };
    Ok(report)
}
