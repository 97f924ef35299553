//! Exact rational reference for polynomial inputs.
//!
//! The polynomial `f` is pushed through the change chain in rational
//! arithmetic (every `f64` is an exact dyadic rational) and split as
//! `F − F(0) = sign_x x^m h + sign_y y^p g` by exact division. For the `A`
//! family the completing-the-square shear is re-derived exactly instead of
//! using its rounded coefficients.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::chain::{ChainConstants, ChangeChain, Step};
use crate::expr::{Expr, Var};
use crate::normalform::{NormalFormMap, NormalKind};
use crate::prenormalize::Signs;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    NotPolynomial,
    NonFinite,
    SingularLinearStep,
    /// A coefficient that the pre-changes should have removed is nonzero.
    NotDivisible {
        alpha: u32,
        beta: u32,
    },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::NotPolynomial => f.write_str("function is not a polynomial"),
            OracleError::NonFinite => f.write_str("chain holds a non-finite coefficient"),
            OracleError::SingularLinearStep => f.write_str("linear step is singular"),
            OracleError::NotDivisible { alpha, beta } => {
                write!(f, "coefficient ({alpha},{beta}) does not vanish exactly")
            }
        }
    }
}

impl core::error::Error for OracleError {}

fn rat(v: f64) -> Result<BigRational, OracleError> {
    BigRational::from_float(v).ok_or(OracleError::NonFinite)
}

/// Bivariate polynomial with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatPoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl RatPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: BigRational, a: u32, b: u32) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert((a, b), c);
        }
        p
    }

    pub fn var(v: Var) -> Self {
        match v {
            Var::X => Self::monomial(BigRational::one(), 1, 0),
            Var::Y => Self::monomial(BigRational::one(), 0, 1),
        }
    }

    pub fn coeff(&self, a: u32, b: u32) -> BigRational {
        self.terms
            .get(&(a, b))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(a, b)| a + b).max().unwrap_or(0)
    }

    fn add_term(&mut self, key: (u32, u32), c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.add_term(*k, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (&(a, b), c) in &self.terms {
            for (&(a2, b2), c2) in &o.terms {
                r.add_term((a + a2, b + b2), c * c2);
            }
        }
        r
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(BigRational::one());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `p(sx(x, y), sy(x, y))`.
    pub fn substitute(&self, sx: &Self, sy: &Self) -> Self {
        let (da, db) = self
            .terms
            .keys()
            .fold((0, 0), |(m, n), &(a, b)| (m.max(a), n.max(b)));
        let mut xp = Vec::with_capacity(da as usize + 1);
        xp.push(Self::constant(BigRational::one()));
        for i in 0..da as usize {
            xp.push(xp[i].mul(sx));
        }
        let mut yp = Vec::with_capacity(db as usize + 1);
        yp.push(Self::constant(BigRational::one()));
        for i in 0..db as usize {
            yp.push(yp[i].mul(sy));
        }
        let mut r = Self::zero();
        for (&(a, b), c) in &self.terms {
            r = r.add(&xp[a as usize].mul(&yp[b as usize]).scale(c));
        }
        r
    }

    pub fn dx(&self) -> Self {
        let mut r = Self::zero();
        for (&(a, b), c) in &self.terms {
            if a > 0 {
                r.add_term((a - 1, b), c * BigRational::from_integer(BigInt::from(a)));
            }
        }
        r
    }

    pub fn dy(&self) -> Self {
        let mut r = Self::zero();
        for (&(a, b), c) in &self.terms {
            if b > 0 {
                r.add_term((a, b - 1), c * BigRational::from_integer(BigInt::from(b)));
            }
        }
        r
    }

    /// Converts a polynomial expression, reading literals exactly.
    pub fn from_expr(e: &Expr) -> Result<Self, OracleError> {
        Ok(match e {
            Expr::Const(c) => Self::constant(c.exact().clone()),
            Expr::Var(v) => Self::var(*v),
            Expr::Neg(a) => Self::from_expr(a)?.neg(),
            Expr::Add(a, b) => Self::from_expr(a)?.add(&Self::from_expr(b)?),
            Expr::Sub(a, b) => Self::from_expr(a)?.sub(&Self::from_expr(b)?),
            Expr::Mul(a, b) => Self::from_expr(a)?.mul(&Self::from_expr(b)?),
            Expr::Pow(a, n) => Self::from_expr(a)?.pow(*n),
            Expr::Call(..) => return Err(OracleError::NotPolynomial),
        })
    }

    /// Exact value at a rational point.
    pub fn eval(&self, x: &BigRational, y: &BigRational) -> BigRational {
        // Horner in y over Horner in x.
        let (_, db) = self
            .terms
            .keys()
            .fold((0, 0), |(m, n), &(a, b)| (m.max(a), n.max(b)));
        let mut rows: Vec<Vec<(u32, &BigRational)>> = (0..=db).map(|_| Vec::new()).collect();
        for (&(a, b), c) in &self.terms {
            rows[b as usize].push((a, c));
        }
        let mut acc = BigRational::zero();
        for row in rows.iter().rev() {
            let mut inner = BigRational::zero();
            let mut deg = row.last().map(|&(a, _)| a).unwrap_or(0);
            for &(a, c) in row.iter().rev() {
                while deg > a {
                    inner *= x;
                    deg -= 1;
                }
                inner += c;
            }
            for _ in 0..deg {
                inner *= x;
            }
            acc = acc * y + inner;
        }
        acc
    }

    /// Exact value at a double point, rounded once.
    pub fn eval_f64(&self, z: [f64; 2]) -> f64 {
        match (BigRational::from_float(z[0]), BigRational::from_float(z[1])) {
            (Some(x), Some(y)) => self.eval(&x, &y).to_f64().unwrap_or(f64::NAN),
            _ => f64::NAN,
        }
    }
}

/// Exact `h`, `g` and the data they were derived from.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDecomposition {
    /// `F` in chain coordinates.
    pub framed: RatPoly,
    pub f_critical: BigRational,
    pub h: RatPoly,
    pub g: RatPoly,
    /// Exact completing-the-square coefficients (`A` family only).
    pub q: Option<Vec<BigRational>>,
}

fn horner_poly(coeffs: &[f64], v: Var) -> Result<RatPoly, OracleError> {
    let mut r = RatPoly::zero();
    for (i, &c) in coeffs.iter().enumerate() {
        r = r.add(&RatPoly::var(v).pow(i as u32).scale(&rat(c)?));
    }
    Ok(r)
}

/// Exact decomposition of a polynomial `f` through `chain`.
pub fn oracle_exact(
    f: &Expr,
    chain: &ChangeChain,
    kind: NormalKind,
    signs: Signs,
) -> Result<ExactDecomposition, OracleError> {
    let x = RatPoly::var(Var::X);
    let y = RatPoly::var(Var::Y);
    let mut poly = RatPoly::from_expr(f)?;
    poly = poly.substitute(
        &x.add(&RatPoly::constant(rat(chain.origin[0])?)),
        &y.add(&RatPoly::constant(rat(chain.origin[1])?)),
    );
    let rederive = matches!(chain.constants, ChainConstants::CompletingSquare { .. });
    let mut q_exact = None;
    for step in &chain.steps {
        poly = match step {
            Step::Linear { matrix } => {
                let m = matrix.map(|r| r.map(rat));
                let [[a, b], [c, d]] = [
                    [m[0][0].clone()?, m[0][1].clone()?],
                    [m[1][0].clone()?, m[1][1].clone()?],
                ];
                let det = &a * &d - &b * &c;
                if det.is_zero() {
                    return Err(OracleError::SingularLinearStep);
                }
                let sx = x.scale(&(&d / &det)).add(&y.scale(&(-&b / &det)));
                let sy = x.scale(&(-&c / &det)).add(&y.scale(&(&a / &det)));
                poly.substitute(&sx, &sy)
            }
            Step::ShearX { .. } if rederive => {
                let NormalKind::A { n } = kind else {
                    return Err(OracleError::NotDivisible { alpha: 1, beta: 2 });
                };
                let c20 = poly.coeff(2, 0);
                if c20.is_zero() {
                    return Err(OracleError::NotDivisible { alpha: 2, beta: 0 });
                }
                let mut qs = Vec::new();
                for m in 2..=n as u32 {
                    let q = poly.coeff(1, m) / (BigRational::from_integer(BigInt::from(2)) * &c20);
                    if !q.is_zero() {
                        let sx = x.sub(&RatPoly::monomial(q.clone(), 0, m));
                        poly = poly.substitute(&sx, &y);
                    }
                    qs.push(q);
                }
                q_exact = Some(qs);
                poly
            }
            Step::ShearX { poly: p } => poly.substitute(&x.sub(&horner_poly(p, Var::Y)?), &y),
            Step::ShearY { poly: p } => poly.substitute(&x, &y.sub(&horner_poly(p, Var::X)?)),
            Step::Scale { lambda, mu } => {
                let (l, u) = (rat(*lambda)?, rat(*mu)?);
                let mut r = RatPoly::zero();
                for (&(a, b), c) in poly.terms() {
                    let s = num_traits::pow(l.clone(), a as usize)
                        * num_traits::pow(u.clone(), b as usize);
                    r.add_term((a, b), c / s);
                }
                r
            }
        };
    }

    let (m, p) = (kind.m() as u32, kind.p() as u32);
    let (sx, sy) = (
        BigRational::from_integer(BigInt::from(signs.x)),
        BigRational::from_integer(BigInt::from(signs.y)),
    );
    let mut h = RatPoly::zero();
    let mut g = RatPoly::zero();
    for (&(a, b), c) in poly.terms() {
        if b >= p {
            g.add_term((a, b - p), c * &sy);
        } else if a >= m {
            h.add_term((a - m, b), c * &sx);
        } else if (a, b) != (0, 0) {
            return Err(OracleError::NotDivisible { alpha: a, beta: b });
        }
    }
    Ok(ExactDecomposition {
        f_critical: poly.coeff(0, 0),
        framed: poly,
        h,
        g,
        q: q_exact,
    })
}

/// Largest deviation between the quadrature factors and the exact ones.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OracleComparison {
    /// `max |h − h_exact| / |h_exact|` and likewise for `g`.
    pub h_rel: f64,
    pub g_rel: f64,
    /// Partials, relative to `max(1, |exact|)`.
    pub grad_rel: f64,
    pub points: usize,
}

impl OracleComparison {
    pub fn max(&self) -> f64 {
        self.h_rel.max(self.g_rel).max(self.grad_rel)
    }
}

/// Compares `map` against `exact` on an `n × n` grid of `[−r, r]²`.
pub fn compare(
    map: &NormalFormMap,
    exact: &ExactDecomposition,
    r: f64,
    n: usize,
) -> Result<OracleComparison, crate::Error> {
    let (hx, hy, gx, gy) = (exact.h.dx(), exact.h.dy(), exact.g.dx(), exact.g.dy());
    let mut out = OracleComparison::default();
    let rel = |num: f64, ex: f64, floor: f64| libm::fabs(num - ex) / libm::fabs(ex).max(floor);
    for i in 0..n {
        for j in 0..n {
            let z = [
                crate::normalform::grid_point(r, n, i),
                crate::normalform::grid_point(r, n, j),
            ];
            let v = map.hg(z, true)?;
            out.h_rel = out
                .h_rel
                .max(rel(v.h, exact.h.eval_f64(z), f64::MIN_POSITIVE));
            out.g_rel = out
                .g_rel
                .max(rel(v.g, exact.g.eval_f64(z), f64::MIN_POSITIVE));
            for (num, ex) in [(v.h_x, &hx), (v.h_y, &hy), (v.g_x, &gx), (v.g_y, &gy)] {
                out.grad_rel = out.grad_rel.max(rel(num, ex.eval_f64(z), 1.0));
            }
            out.points += 1;
        }
    }
    Ok(out)
}
