//! The nonlinear normalizing change `φ(x, y) = (x h^{1/m}, y g^{1/p})` and
//! its certified radius.
//!
//! After the pre-changes every Taylor coefficient `(a, b)` with `a < m`,
//! `b < p`, `(a, b) ≠ (0, 0)` of `F` vanishes at the origin, so
//! `F − F(0) = sign_x x^m h + sign_y y^p g` with
//!
//! ```text
//! g(x, y) = sign_y p ∫₀¹ c_{0,p}(x, s y) (1 − s)^{p−1} ds
//! h(x, y) = sign_x m Σ_{i<p} y^i ∫₀¹ c_{m,i}(s x, 0) (1 − s)^{m−1} ds
//! ```
//!
//! where `c_{a,b}(z)` is the Taylor coefficient of `F` at `z`. Both integrals
//! are evaluated by Gauss-Legendre quadrature on jets of `F`.

use alloc::vec;
use alloc::vec::Vec;

use crate::chain::FramedFunction;
use crate::jet::Truncation;
use crate::prenormalize::Signs;
use crate::program::JetView;
use crate::quadrature::{GaussLegendre, DEFAULT_NODES};
use crate::Error;

/// Normal form family: `x³ ± y^{1+k/2}` or `±x² ± y^{n+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalKind {
    E { k: usize },
    A { n: usize },
}

impl NormalKind {
    /// Exponent of `x̃`.
    pub fn m(self) -> usize {
        match self {
            NormalKind::E { .. } => 3,
            NormalKind::A { .. } => 2,
        }
    }

    /// Exponent of `ỹ`.
    pub fn p(self) -> usize {
        match self {
            NormalKind::E { k } => 1 + k / 2,
            NormalKind::A { n } => n + 1,
        }
    }

    /// Bound `C` on `‖φ′ − I‖` over the certified square.
    pub fn c_bound(self) -> f64 {
        match self {
            NormalKind::E { .. } => 0.4,
            NormalKind::A { .. } => 0.93,
        }
    }

    /// Derivative indices whose sup-norms enter `M`.
    pub fn norm_indices(self) -> Vec<(usize, usize)> {
        match self {
            NormalKind::E { k: 6 } => vec![
                (0, 5),
                (1, 4),
                (3, 1),
                (3, 2),
                (3, 3),
                (4, 0),
                (4, 1),
                (4, 2),
                (4, 3),
            ],
            NormalKind::E { .. } => vec![
                (0, 6),
                (1, 5),
                (3, 1),
                (3, 2),
                (3, 3),
                (3, 4),
                (4, 0),
                (4, 1),
                (4, 2),
                (4, 3),
                (4, 4),
            ],
            NormalKind::A { n } => {
                let mut v = vec![(0, n + 2), (0, n + 1)];
                v.extend((0..=n).map(|i| (2, i)));
                v.extend((0..=n).map(|i| (3, i)));
                v
            }
        }
    }

    /// `min(R0, 2/(M+2))` for E, `min(R0, 3/(4M+3))` for A.
    pub fn radius(self, r0: f64, m: f64) -> f64 {
        let r = match self {
            NormalKind::E { .. } => 2.0 / (m + 2.0),
            NormalKind::A { .. } => 3.0 / (4.0 * m + 3.0),
        };
        r0.min(r)
    }

    pub fn label(self) -> alloc::string::String {
        match self {
            NormalKind::E { k } => alloc::format!("E{k}"),
            NormalKind::A { n } => alloc::format!("A{n}"),
        }
    }

    fn check(self) -> Result<(), Error> {
        match self {
            NormalKind::E { k: 6 | 8 } => Ok(()),
            NormalKind::E { .. } => Err(Error::InvalidArgument("normal form needs k = 6 or 8")),
            NormalKind::A { n } if n < 2 => Err(Error::InvalidArgument("normal form needs n >= 2")),
            NormalKind::A { n } if n + 3 > crate::jet::MAX_ORDER => {
                Err(Error::OrderBudgetExceeded {
                    budget: crate::jet::MAX_ORDER,
                })
            }
            NormalKind::A { .. } => Ok(()),
        }
    }
}

/// `[[∂x̃/∂x, ∂x̃/∂y], [∂ỹ/∂x, ∂ỹ/∂y]]`.
pub type Jacobian = [[f64; 2]; 2];

/// `h`, `g` and (optionally) their first partials at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HgValues {
    pub h: f64,
    pub g: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub g_x: f64,
    pub g_y: f64,
}

/// Quadratures of `h` that depend on `x` only; see [`NormalFormMap::h_line`].
#[derive(Clone, Debug, PartialEq)]
pub struct HLine {
    x: f64,
    derivatives: bool,
    a: [f64; 16],
    b: [f64; 16],
}

#[derive(Clone, Debug)]
struct NodeFactors {
    s: f64,
    /// `w (1−s)^{m−1}` and `s w (1−s)^{m−1}`.
    hx0: f64,
    hx1: f64,
    /// `w (1−s)^{p−1}` and `s w (1−s)^{p−1}`.
    gy0: f64,
    gy1: f64,
}

/// The change `φ` together with the function it normalizes.
#[derive(Clone, Debug)]
pub struct NormalFormMap {
    pub kind: NormalKind,
    pub sign_x: i8,
    pub sign_y: i8,
    pub f_critical: f64,
    pub function: FramedFunction,
    identity: bool,
    factors: Vec<NodeFactors>,
}

/// Builds `h` and `g` for `function`, whose pre-changes are already applied.
pub fn decompose(
    function: FramedFunction,
    kind: NormalKind,
    signs: Signs,
    quadrature_order: usize,
) -> Result<NormalFormMap, Error> {
    kind.check()?;
    let quad = GaussLegendre::new(quadrature_order)?;
    let (m, p) = (kind.m() as i32, kind.p() as i32);
    let factors = quad
        .nodes()
        .iter()
        .zip(quad.weights())
        .map(|(&s, &w)| {
            let hx0 = w * libm::pow(1.0 - s, (m - 1) as f64);
            let gy0 = w * libm::pow(1.0 - s, (p - 1) as f64);
            NodeFactors {
                s,
                hx0,
                hx1: s * hx0,
                gy0,
                gy1: s * gy0,
            }
        })
        .collect();
    let f_critical = function.value([0.0, 0.0])?;
    Ok(NormalFormMap {
        kind,
        sign_x: signs.x,
        sign_y: signs.y,
        f_critical,
        function,
        identity: false,
        factors,
    })
}

/// [`decompose`] with the default 32-node rule.
pub fn decompose_default(
    function: FramedFunction,
    kind: NormalKind,
    signs: Signs,
) -> Result<NormalFormMap, Error> {
    decompose(function, kind, signs, DEFAULT_NODES)
}

fn root(v: f64, k: usize) -> f64 {
    match k {
        2 => libm::sqrt(v),
        3 => libm::cbrt(v),
        _ => libm::pow(v, 1.0 / k as f64),
    }
}

impl NormalFormMap {
    /// Marks `φ` as the identity (all certified norms vanish).
    pub fn set_identity(&mut self, identity: bool) {
        self.identity = identity;
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn m(&self) -> usize {
        self.kind.m()
    }

    pub fn p(&self) -> usize {
        self.kind.p()
    }

    /// Number of quadrature nodes.
    pub fn quadrature_order(&self) -> usize {
        self.factors.len()
    }

    /// The `y`-independent part of `h` on the vertical line through `x`.
    pub fn h_line(&self, x: f64, derivatives: bool) -> Result<HLine, Error> {
        let (m, p) = (self.m(), self.p());
        let d = derivatives as usize;
        // Integrals of c_{m,i} and c_{m+1,i} along (s x, 0).
        let th = Truncation::new(m + p - 1 + d, m + d, p - 1);
        let mut ws = self.function.program().workspace(th)?;
        let mut line = HLine {
            x,
            derivatives,
            a: [0.0; 16],
            b: [0.0; 16],
        };
        let mut acc = |jet: JetView<'_>, w0: f64, w1: f64| {
            for i in 0..p {
                line.a[i] += w0 * jet.coeff(m, i);
                if derivatives {
                    line.b[i] += w1 * jet.coeff(m + 1, i);
                }
            }
        };
        if x == 0.0 {
            let jet = self.function.jet_in(&mut ws, [0.0, 0.0])?;
            let (w0, w1) = self
                .factors
                .iter()
                .fold((0.0, 0.0), |(u, v), f| (u + f.hx0, v + f.hx1));
            acc(jet, w0, w1);
        } else {
            for f in &self.factors {
                let jet = self.function.jet_in(&mut ws, [f.s * x, 0.0])?;
                acc(jet, f.hx0, f.hx1);
            }
        }
        Ok(line)
    }

    /// `h`, `g` at `(line.x, y)`; partials are filled only when the line carries them.
    pub fn hg_on(&self, line: &HLine, y: f64) -> Result<HgValues, Error> {
        let (m, p) = (self.m(), self.p());
        let (x, derivatives) = (line.x, line.derivatives);
        let d = derivatives as usize;
        let mut out = HgValues::default();
        let sx = self.sign_x as f64;
        let (mf, pf) = (m as f64, p as f64);
        let mut ypow = 1.0;
        for i in 0..p {
            out.h += ypow * line.a[i];
            out.h_x += ypow * line.b[i];
            if i + 1 < p {
                out.h_y += (i + 1) as f64 * ypow * line.a[i + 1];
            }
            ypow *= y;
        }
        out.h *= sx * mf;
        out.h_x *= sx * mf * (mf + 1.0);
        out.h_y *= sx * mf;

        // g: integrals of c_{0,p}, c_{1,p}, c_{0,p+1} along (x, s y).
        let tg = Truncation::new(p + d, d, p + d);
        let mut ws = self.function.program().workspace(tg)?;
        let (mut g0, mut gx, mut gy) = (0.0, 0.0, 0.0);
        let mut acc_g = |jet: JetView<'_>, w0: f64, w1: f64| {
            g0 += w0 * jet.coeff(0, p);
            if derivatives {
                gx += w0 * jet.coeff(1, p);
                gy += w1 * jet.coeff(0, p + 1);
            }
        };
        if y == 0.0 {
            let jet = self.function.jet_in(&mut ws, [x, 0.0])?;
            let (w0, w1) = self
                .factors
                .iter()
                .fold((0.0, 0.0), |(u, v), f| (u + f.gy0, v + f.gy1));
            acc_g(jet, w0, w1);
        } else {
            for f in &self.factors {
                let jet = self.function.jet_in(&mut ws, [x, f.s * y])?;
                acc_g(jet, f.gy0, f.gy1);
            }
        }
        let sy = self.sign_y as f64;
        out.g = sy * pf * g0;
        out.g_x = sy * pf * gx;
        out.g_y = sy * pf * (pf + 1.0) * gy;
        Ok(out)
    }

    /// `h`, `g` at `z`; partials are filled only when `derivatives` is set.
    pub fn hg(&self, z: [f64; 2], derivatives: bool) -> Result<HgValues, Error> {
        self.hg_on(&self.h_line(z[0], derivatives)?, z[1])
    }

    pub fn h(&self, z: [f64; 2]) -> Result<f64, Error> {
        Ok(self.hg(z, false)?.h)
    }

    pub fn g(&self, z: [f64; 2]) -> Result<f64, Error> {
        Ok(self.hg(z, false)?.g)
    }

    fn checked_roots(&self, v: &HgValues) -> Result<(f64, f64), Error> {
        if !(v.h > 0.0) {
            return Err(Error::OutsideCertifiedRegion {
                which: "h",
                value: v.h,
            });
        }
        if !(v.g > 0.0) {
            return Err(Error::OutsideCertifiedRegion {
                which: "g",
                value: v.g,
            });
        }
        Ok((root(v.h, self.m()), root(v.g, self.p())))
    }

    /// `(x̃, ỹ) = (x h^{1/m}, y g^{1/p})`.
    pub fn phi(&self, z: [f64; 2]) -> Result<[f64; 2], Error> {
        if self.identity {
            return Ok(z);
        }
        let v = self.hg(z, false)?;
        let (hm, gp) = self.checked_roots(&v)?;
        Ok([z[0] * hm, z[1] * gp])
    }

    /// Jacobian of `φ`, rows `(x̃, ỹ)`, columns `(x, y)`.
    pub fn phi_jacobian(&self, z: [f64; 2]) -> Result<[[f64; 2]; 2], Error> {
        Ok(self.phi_with_jacobian(z)?.1)
    }

    pub fn phi_with_jacobian(&self, z: [f64; 2]) -> Result<([f64; 2], [[f64; 2]; 2]), Error> {
        if self.identity {
            return Ok((z, [[1.0, 0.0], [0.0, 1.0]]));
        }
        let v = self.hg(z, true)?;
        self.assemble(z, &v)
    }

    /// `φ`, `φ′` and `h` at `(line.x, y)` for a line built with derivatives.
    pub fn phi_on(&self, line: &HLine, y: f64) -> Result<([f64; 2], Jacobian, f64), Error> {
        let z = [line.x, y];
        if self.identity {
            return Ok((z, [[1.0, 0.0], [0.0, 1.0]], 1.0));
        }
        let v = self.hg_on(line, y)?;
        let (phi, jac) = self.assemble(z, &v)?;
        Ok((phi, jac, v.h))
    }

    fn assemble(&self, z: [f64; 2], v: &HgValues) -> Result<([f64; 2], [[f64; 2]; 2]), Error> {
        let [x, y] = z;
        let (hm, gp) = self.checked_roots(v)?;
        let (mf, pf) = (self.m() as f64, self.p() as f64);
        let kx = x / mf * hm / v.h;
        let ky = y / pf * gp / v.g;
        Ok((
            [x * hm, y * gp],
            [[hm + kx * v.h_x, kx * v.h_y], [ky * v.g_x, gp + ky * v.g_y]],
        ))
    }

    /// `F(z) − f(P) − sign_x x̃^m − sign_y ỹ^p` for a precomputed `φ(z)`.
    pub fn residual_at(&self, z: [f64; 2], phi: [f64; 2]) -> Result<f64, Error> {
        let f = self.function.value(z)?;
        let nf = (self.f_critical + self.sign_x as f64 * libm::pow(phi[0], self.m() as f64))
            + self.sign_y as f64 * libm::pow(phi[1], self.p() as f64);
        Ok(libm::fabs(f - nf))
    }

    pub fn residual(&self, z: [f64; 2]) -> Result<f64, Error> {
        self.residual_at(z, self.phi(z)?)
    }
}

/// Where the sup-norms came from.
#[derive(Clone, Debug, PartialEq)]
pub enum NormSource {
    UserSupplied,
    GridEstimated { grid: usize, safety: f64 },
}

/// How to obtain the sup-norms `C_{αβ}`.
#[derive(Clone, Debug, PartialEq)]
pub enum NormSpec {
    /// Maximum over a `grid × grid` uniform grid of `U0`, times `safety`.
    Grid {
        grid: usize,
        safety: f64,
    },
    Table(Vec<((usize, usize), f64)>),
}

pub const DEFAULT_NORM_GRID: usize = 64;
pub const DEFAULT_SAFETY: f64 = 1.1;

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec::Grid {
            grid: DEFAULT_NORM_GRID,
            safety: DEFAULT_SAFETY,
        }
    }
}

/// Radius certificate on the square `U = {max(|x|, |y|) < R}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub kind: NormalKind,
    pub r0: f64,
    pub c_table: Vec<((usize, usize), f64)>,
    pub m_bound: f64,
    pub r: f64,
    pub c_bound: f64,
    pub source: NormSource,
}

impl Certificate {
    pub fn norm(&self, alpha: usize, beta: usize) -> Option<f64> {
        self.c_table
            .iter()
            .find(|(i, _)| *i == (alpha, beta))
            .map(|&(_, c)| c)
    }

    /// `true` iff `z` lies in the open square of half-width `R`.
    pub fn contains(&self, z: [f64; 2]) -> bool {
        libm::fabs(z[0]) < self.r && libm::fabs(z[1]) < self.r
    }

    /// Copy with every `C_{αβ}` multiplied by `factor` (radius unchanged).
    pub fn with_scaled_norms(&self, factor: f64) -> Certificate {
        let mut c = self.clone();
        for (_, v) in &mut c.c_table {
            *v *= factor;
        }
        c.m_bound *= factor;
        c
    }
}

/// Fills the sup-norm table, `M` and `R`.
pub fn certify_radius(
    function: &FramedFunction,
    kind: NormalKind,
    r0: f64,
    norms: &NormSpec,
) -> Result<Certificate, Error> {
    kind.check()?;
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::InvalidArgument("R0 must be positive and finite"));
    }
    let indices = kind.norm_indices();
    let (c_table, source) = match norms {
        NormSpec::Table(table) => {
            let mut out = Vec::with_capacity(indices.len());
            for &(a, b) in &indices {
                let c = table
                    .iter()
                    .find(|(i, _)| *i == (a, b))
                    .map(|&(_, c)| c)
                    .ok_or(Error::MissingNorm { alpha: a, beta: b })?;
                if !(c >= 0.0) || !c.is_finite() {
                    return Err(Error::InvalidArgument(
                        "norms must be finite and nonnegative",
                    ));
                }
                out.push(((a, b), c));
            }
            (out, NormSource::UserSupplied)
        }
        &NormSpec::Grid { grid, safety } => {
            if grid < 2 {
                return Err(Error::InvalidArgument(
                    "norm grid needs at least 2 points per axis",
                ));
            }
            if !(safety >= 1.0) || !safety.is_finite() {
                return Err(Error::InvalidArgument("safety factor must be at least 1"));
            }
            let trunc = Truncation::new(
                indices.iter().map(|&(a, b)| a + b).max().unwrap_or(0),
                indices.iter().map(|&(a, _)| a).max().unwrap_or(0),
                indices.iter().map(|&(_, b)| b).max().unwrap_or(0),
            );
            let mut sup = vec![0.0f64; indices.len()];
            for i in 0..grid {
                for j in 0..grid {
                    let z = [grid_point(r0, grid, i), grid_point(r0, grid, j)];
                    let jet = function.jet(z, trunc)?;
                    for (s, &(a, b)) in sup.iter_mut().zip(&indices) {
                        *s = s.max(libm::fabs(jet.derivative(a, b)?));
                    }
                }
            }
            (
                indices
                    .iter()
                    .zip(sup)
                    .map(|(&i, s)| (i, safety * s))
                    .collect(),
                NormSource::GridEstimated { grid, safety },
            )
        }
    };
    let m_bound = c_table.iter().fold(0.0f64, |m, &(_, c)| m.max(c));
    Ok(Certificate {
        kind,
        r0,
        r: kind.radius(r0, m_bound),
        c_table,
        m_bound,
        c_bound: kind.c_bound(),
        source,
    })
}

/// `i`-th point of the `n`-point uniform grid on `[−r, r]`.
pub fn grid_point(r: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        return 0.0;
    }
    -r + 2.0 * r * i as f64 / (n - 1) as f64
}
