//! Polynomial pre-changes: the four-shear chain for `E6`/`E8`, the
//! completing-the-square shear `x1 = x + y² Q(y)` for `A_n`, and the final
//! rescaling that normalizes the leading coefficients.
//!
//! All functions take a jet in displacement coordinates around the critical
//! point (already in the classifier's linear frame) and return the change
//! together with the jet expressed in the new coordinates.

use alloc::vec;
use alloc::vec::Vec;

use crate::chain::{ChainConstants, ChangeChain, Step};
use crate::classifier::jet_scale;
use crate::jet::{Jet, Truncation};
use crate::normalform::NormalKind;
use crate::Error;

/// Newton iteration cap for the shear constants.
pub const MAX_NEWTON_ITERATIONS: usize = 100;
/// Acceptance threshold on the targeted coefficients (relative to the jet scale).
pub const NEWTON_TOLERANCE: f64 = 1e-10;
const FD_STEP: f64 = 1e-6;

/// Pulls a jet back through `steps`: returns the jet of `f` in the
/// coordinates produced by applying `steps` in order.
pub fn pull_back(j: &Jet, steps: &[Step], order: usize) -> Result<Jet, Error> {
    let t = Truncation::total(order.min(j.order()));
    let mut x = Jet::variable([0.0, 0.0], t, 0)?;
    let mut y = Jet::variable([0.0, 0.0], t, 1)?;
    for s in steps.iter().rev() {
        (x, y) = s.inverse_jets(&x, &y);
    }
    Ok(j.compose_substitution(&x, &y)?)
}

fn monomial(coeff: f64, degree: usize) -> Vec<f64> {
    let mut p = vec![0.0; degree + 1];
    p[degree] = coeff;
    p
}

/// `(x,y) → (x + d1 y², y) → (x, y + d2 x) → (x + d3 y^{k/2-1}, y) → (x, y + d4 x²)`.
pub fn e_chain_steps(k: usize, d: [f64; 4]) -> Vec<Step> {
    vec![
        Step::ShearX {
            poly: monomial(d[0], 2),
        },
        Step::ShearY {
            poly: monomial(d[1], 1),
        },
        Step::ShearX {
            poly: monomial(d[2], k / 2 - 1),
        },
        Step::ShearY {
            poly: monomial(d[3], 2),
        },
    ]
}

/// Indices `(a, b)` with `a < 3`, `b < 1 + k/2`, `a + b > 0`.
pub fn e_target_indices(k: usize) -> Vec<(usize, usize)> {
    let p = 1 + k / 2;
    (0..3)
        .flat_map(|a| (0..p).map(move |b| (a, b)))
        .filter(|&(a, b)| a + b > 0)
        .collect()
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let pivot = a[col].clone();
        for row in col + 1..n {
            let factor = a[row][col] / pivot[col];
            for (dst, src) in a[row][col..].iter_mut().zip(&pivot[col..]) {
                *dst -= factor * src;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Finds the shear constants `d1..d4` killing every Taylor coefficient
/// `(a, b)` with `a < 3`, `b < 1 + k/2` (`k = 6, 8`).
///
/// The constants solve a small polynomial system; the solve is a damped
/// Gauss-Newton iteration from `d = 0` with a central-difference Jacobian.
/// For `k = 6` the first shear is absent (`d1 = 0`).
pub fn shear_chain_e(j: &Jet, k: usize, tol: f64) -> Result<(ChangeChain, Jet), Error> {
    if k != 6 && k != 8 {
        return Err(Error::InvalidArgument("E shear chain needs k = 6 or 8"));
    }
    let p = 1 + k / 2;
    let work_order = p + 1;
    if j.order() < work_order {
        return Err(Error::InvalidArgument(
            "jet order too small for the E shear chain",
        ));
    }
    let targets = e_target_indices(k);
    let free: Vec<usize> = if k == 6 {
        vec![1, 2, 3]
    } else {
        vec![0, 1, 2, 3]
    };
    let scale = jet_scale(j, 3, work_order);
    let accept = tol.min(NEWTON_TOLERANCE) * scale;

    let residual = |d: [f64; 4]| -> Result<Vec<f64>, Error> {
        let jd = pull_back(j, &e_chain_steps(k, d), work_order)?;
        Ok(targets.iter().map(|&(a, b)| jd.coeff(a, b)).collect())
    };
    let norm = |r: &[f64]| libm::sqrt(r.iter().map(|v| v * v).sum::<f64>());
    let max_abs = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut d = [0.0; 4];
    let mut r = residual(d)?;
    let mut iterations = 0;
    while max_abs(&r) >= accept {
        if iterations == MAX_NEWTON_ITERATIONS {
            return Err(Error::ChainSolveDiverged {
                iterations,
                residual: max_abs(&r),
            });
        }
        iterations += 1;
        // Jacobian columns by central differences.
        let mut cols = Vec::with_capacity(free.len());
        for &fi in &free {
            let (mut dp, mut dm) = (d, d);
            dp[fi] += FD_STEP;
            dm[fi] -= FD_STEP;
            let (rp, rm) = (residual(dp)?, residual(dm)?);
            cols.push(
                rp.iter()
                    .zip(&rm)
                    .map(|(a, b)| (a - b) / (2.0 * FD_STEP))
                    .collect::<Vec<_>>(),
            );
        }
        let n = free.len();
        let normal: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|l| cols[i].iter().zip(&cols[l]).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect();
        let rhs: Vec<f64> = (0..n)
            .map(|i| -cols[i].iter().zip(&r).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let Some(step) = solve_dense(normal, rhs) else {
            return Err(Error::ChainSolveDiverged {
                iterations,
                residual: max_abs(&r),
            });
        };
        let mut alpha = 1.0;
        let current = norm(&r);
        loop {
            let mut trial = d;
            for (i, &fi) in free.iter().enumerate() {
                trial[fi] += alpha * step[i];
            }
            let rt = residual(trial)?;
            if norm(&rt) < current || alpha < 1e-6 {
                d = trial;
                r = rt;
                break;
            }
            alpha *= 0.5;
        }
        if !d.iter().all(|v| v.is_finite()) {
            return Err(Error::ChainSolveDiverged {
                iterations,
                residual: f64::INFINITY,
            });
        }
    }

    let steps = e_chain_steps(k, d);
    let out = pull_back(j, &steps, j.order())?;
    let mut chain = ChangeChain::at([0.0, 0.0]);
    chain.steps = steps;
    chain.constants = ChainConstants::Shears { d };
    Ok((chain, out))
}

/// Completes the square: finds `Q` so that in `x1 = x + y² Q(y)` every
/// coefficient `(1, b)`, `2 <= b <= n`, vanishes, and returns `n`, the
/// smallest integer with a nonvanishing pure `y^{n+1}` coefficient.
///
/// The jet must be in a frame with `f''_{xx} = ±2` and vanishing `(1,1)`,
/// `(0,2)` coefficients. The search is limited to the jet's order.
pub fn shear_a(j: &Jet, tol: f64) -> Result<(ChangeChain, Jet, usize), Error> {
    let order = j.order();
    let c20 = j.coeff(2, 0);
    if c20 == 0.0 {
        return Err(Error::InvalidArgument(
            "A shear needs a nonzero x² coefficient",
        ));
    }
    let thr = tol * jet_scale(j, 2, order);
    let mut jet = j.clone();
    let mut poly = vec![0.0; order + 1];
    let lowest_pure_y =
        |jet: &Jet, below: usize| (2..below.min(order + 1)).find(|&b| jet.coeff(0, b).abs() > thr);

    let mut m = 2;
    loop {
        if let Some(b) = lowest_pure_y(&jet, 2 * m) {
            if m > b - 1 {
                break;
            }
        }
        if m + 1 > order {
            break;
        }
        let c = jet.coeff(1, m);
        if c != 0.0 {
            // x = x1 - q y^m turns c20 x² into -2 c20 q x1 y^m.
            let q = c / (2.0 * c20);
            poly[m] += q;
            jet = pull_back(
                &jet,
                &[Step::ShearX {
                    poly: monomial(q, m),
                }],
                order,
            )?;
        }
        m += 1;
    }
    let Some(b) = lowest_pure_y(&jet, order + 1) else {
        return Err(Error::OrderBudgetExceeded { budget: order });
    };
    let n = b - 1;
    while poly.len() > 3 && *poly.last().unwrap() == 0.0 {
        poly.pop();
    }
    let q = poly[2..].to_vec();
    let mut chain = ChangeChain::at([0.0, 0.0]);
    chain.push(Step::ShearX { poly });
    chain.constants = ChainConstants::CompletingSquare { q };
    Ok((chain, jet, n))
}

/// Signs of the leading `x^m` and `y^p` coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signs {
    pub x: i8,
    pub y: i8,
}

/// Rescales `x ← λx`, `y ← μy` (`λ, μ > 0`) so that the leading
/// coefficients become `±1`, i.e. `f_{x^m} = ±m!` and `f_{y^p} = ±p!`.
pub fn normalize_assumption(j: &Jet, kind: NormalKind) -> Result<(ChangeChain, Jet, Signs), Error> {
    let (m, p) = (kind.m(), kind.p());
    let (cm, cp) = (j.coeff(m, 0), j.coeff(0, p));
    if cm == 0.0 || cp == 0.0 {
        return Err(Error::InvalidArgument("leading coefficient vanishes"));
    }
    let lambda = libm::pow(cm.abs(), 1.0 / m as f64);
    let mu = libm::pow(cp.abs(), 1.0 / p as f64);
    let mut out = j.clone();
    for (a, b) in j.truncation().indices() {
        let s = libm::pow(lambda, a as f64) * libm::pow(mu, b as f64);
        out.set_coeff(a, b, j.coeff(a, b) / s)?;
    }
    let mut chain = ChangeChain::at([0.0, 0.0]);
    chain.push(Step::Scale { lambda, mu });
    chain.scale = Some((lambda, mu));
    let signs = Signs {
        x: if cm < 0.0 { -1 } else { 1 },
        y: if cp < 0.0 { -1 } else { 1 },
    };
    Ok((chain, out, signs))
}
