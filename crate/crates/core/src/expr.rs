//! A small expression language for smooth functions of two variables.
//!
//! Grammar (see `docs/grammar.md` for the full description):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' INTEGER)*
//! atom    := NUMBER ['/' NUMBER] | IDENT | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables are `x`/`u1` and `y`/`u2`; functions are `sin`, `cos`, `exp`,
//! `log1p` and `sqrt1p` (`sqrt1p(t) = sqrt(1 + t)`).

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::jet::{factorial, Jet, Truncation, MAX_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log1p,
    Sqrt1p,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log1p => "log1p",
            Func::Sqrt1p => "sqrt1p",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log1p" => Func::Log1p,
            "sqrt1p" => Func::Sqrt1p,
            _ => return None,
        })
    }

    /// Value at `t`, or `None` outside the domain.
    pub fn eval(self, t: f64) -> Option<f64> {
        match self {
            Func::Sin => Some(libm::sin(t)),
            Func::Cos => Some(libm::cos(t)),
            Func::Exp => Some(libm::exp(t)),
            Func::Log1p => (t > -1.0).then(|| libm::log1p(t)),
            Func::Sqrt1p => (t > -1.0).then(|| libm::sqrt(1.0 + t)),
        }
    }

    /// Taylor coefficients `g^{(k)}(t) / k!` for `k = 0..=order`.
    pub fn taylor(self, t: f64, order: usize) -> Option<[f64; MAX_ORDER + 1]> {
        let mut out = [0.0; MAX_ORDER + 1];
        match self {
            Func::Sin | Func::Cos => {
                let (s, c) = (libm::sin(t), libm::cos(t));
                let cycle = if self == Func::Sin {
                    [s, c, -s, -c]
                } else {
                    [c, -s, -c, s]
                };
                for (k, o) in out.iter_mut().enumerate().take(order + 1) {
                    *o = cycle[k % 4] / factorial(k);
                }
            }
            Func::Exp => {
                let e = libm::exp(t);
                for (k, o) in out.iter_mut().enumerate().take(order + 1) {
                    *o = e / factorial(k);
                }
            }
            Func::Log1p => {
                if t <= -1.0 {
                    return None;
                }
                let base = 1.0 + t;
                out[0] = libm::log1p(t);
                let mut pow = 1.0;
                for (k, o) in out.iter_mut().enumerate().take(order + 1).skip(1) {
                    pow *= base;
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    *o = sign / (k as f64 * pow);
                }
            }
            Func::Sqrt1p => {
                if t <= -1.0 {
                    return None;
                }
                let base = 1.0 + t;
                // binom(1/2, k) * base^(1/2 - k)
                let mut c = libm::sqrt(base);
                out[0] = c;
                for (k, o) in out.iter_mut().enumerate().take(order + 1).skip(1) {
                    c *= (0.5 - (k - 1) as f64) / (k as f64 * base);
                    *o = c;
                }
            }
        }
        Some(out)
    }
}

/// Exact nonnegative literal together with its nearest double.
#[derive(Clone, Debug)]
pub struct Literal {
    exact: BigRational,
    approx: f64,
}

impl Literal {
    pub fn new(exact: BigRational) -> Self {
        let approx = exact.to_f64().unwrap_or(f64::NAN);
        Self { exact, approx }
    }

    /// Exact value of a finite double.
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Self::new)
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn value(&self) -> f64 {
        self.approx
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

/// Parsed expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Literal),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    EmptyInput,
    UnexpectedChar(char),
    UnexpectedEnd,
    UnknownIdentifier(String),
    NegativeExponent,
    FractionalExponent,
    ExponentTooLarge,
    DivisionUnsupported,
    ZeroDenominator,
    BadNumber,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    /// Byte offset into the source.
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: ", self.offset)?;
        match &self.kind {
            ParseErrorKind::EmptyInput => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "syntax error, unexpected '{c}'"),
            ParseErrorKind::UnexpectedEnd => write!(f, "syntax error, unexpected end of input"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier '{s}'"),
            ParseErrorKind::NegativeExponent => write!(f, "negative exponents are not allowed"),
            ParseErrorKind::FractionalExponent => {
                write!(f, "fractional exponents are not allowed")
            }
            ParseErrorKind::ExponentTooLarge => write!(f, "exponent too large"),
            ParseErrorKind::DivisionUnsupported => {
                write!(f, "division is only allowed between two numeric literals")
            }
            ParseErrorKind::ZeroDenominator => write!(f, "zero denominator"),
            ParseErrorKind::BadNumber => write!(f, "malformed number"),
        }
    }
}

impl core::error::Error for ParseError {}

/// Evaluation left the domain of an analytic primitive.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainError {
    pub func: Func,
    pub argument: f64,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}) is outside its domain",
            self.func.name(),
            self.argument
        )
    }
}

impl core::error::Error for DomainError {}

/// Powers `v^1, v^2, …` of the two variables, grown on demand.
struct Powers<T> {
    x: Vec<T>,
    y: Vec<T>,
}

impl<T: Analytic> Powers<T> {
    fn get(&mut self, v: Var, n: usize) -> T {
        let list = match v {
            Var::X => &mut self.x,
            Var::Y => &mut self.y,
        };
        while list.len() < n {
            let next = list[list.len() - 1].clone().mul(&list[0]);
            list.push(next);
        }
        list[n - 1].clone()
    }
}

/// Values an [`Expr`] can be evaluated over.
pub trait Analytic: Clone {
    /// Whether integer powers of the variables are shared across a single evaluation.
    const CACHE_POWERS: bool;
    fn lift(&self, c: f64) -> Self;
    fn add(self, o: &Self) -> Self;
    fn sub(self, o: &Self) -> Self;
    fn mul(self, o: &Self) -> Self;
    fn neg(self) -> Self;
    fn scale(self, c: f64) -> Self;
    fn powi(&self, n: u32) -> Self;
    fn apply(&self, func: Func) -> Result<Self, DomainError>;
}

impl Analytic for f64 {
    const CACHE_POWERS: bool = false;
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn add(self, o: &Self) -> Self {
        self + o
    }
    fn sub(self, o: &Self) -> Self {
        self - o
    }
    fn mul(self, o: &Self) -> Self {
        self * o
    }
    fn neg(self) -> Self {
        -self
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
    fn powi(&self, n: u32) -> Self {
        libm::pow(*self, n as f64)
    }
    fn apply(&self, func: Func) -> Result<Self, DomainError> {
        func.eval(*self).ok_or(DomainError {
            func,
            argument: *self,
        })
    }
}

impl Analytic for Jet {
    const CACHE_POWERS: bool = true;
    fn lift(&self, c: f64) -> Self {
        Jet::lift(self, c)
    }
    fn add(mut self, o: &Self) -> Self {
        self += o;
        self
    }
    fn sub(mut self, o: &Self) -> Self {
        self -= o;
        self
    }
    fn mul(self, o: &Self) -> Self {
        &self * o
    }
    fn neg(mut self) -> Self {
        self.scale_in_place(-1.0);
        self
    }
    fn scale(mut self, c: f64) -> Self {
        self.scale_in_place(c);
        self
    }
    fn powi(&self, n: u32) -> Self {
        Jet::powi(self, n)
    }
    fn apply(&self, func: Func) -> Result<Self, DomainError> {
        let t = self.value();
        let taylor = func
            .taylor(t, self.order())
            .ok_or(DomainError { func, argument: t })?;
        Ok(self.compose_univariate(&taylor[..=self.order()]))
    }
}

impl Expr {
    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    /// Constant node; negative values become `Neg(Const)`.
    pub fn constant(v: f64) -> Option<Self> {
        let lit = Literal::from_f64(libm::fabs(v))?;
        let c = Expr::Const(lit);
        Some(if v.is_sign_negative() && v != 0.0 {
            Expr::Neg(Box::new(c))
        } else {
            c
        })
    }

    pub fn rational(exact: BigRational) -> Self {
        if exact.is_negative() {
            Expr::Neg(Box::new(Expr::Const(Literal::new(-exact))))
        } else {
            Expr::Const(Literal::new(exact))
        }
    }

    /// Evaluates with `x`, `y` bound to the given values.
    pub fn eval_with<T: Analytic>(&self, x: &T, y: &T) -> Result<T, DomainError> {
        let mut powers = Powers {
            x: vec![x.clone()],
            y: vec![y.clone()],
        };
        self.eval_cached(&mut powers)
    }

    fn eval_cached<T: Analytic>(&self, p: &mut Powers<T>) -> Result<T, DomainError> {
        Ok(match self {
            Expr::Const(c) => p.x[0].lift(c.value()),
            Expr::Var(v) => p.get(*v, 1),
            Expr::Neg(e) => e.eval_cached(p)?.neg(),
            Expr::Add(a, b) => a.eval_cached(p)?.add(&b.eval_cached(p)?),
            Expr::Sub(a, b) => a.eval_cached(p)?.sub(&b.eval_cached(p)?),
            Expr::Mul(a, b) => match (a.as_constant(), b.as_constant()) {
                (Some(c), _) => b.eval_cached(p)?.scale(c),
                (_, Some(c)) => a.eval_cached(p)?.scale(c),
                _ => a.eval_cached(p)?.mul(&b.eval_cached(p)?),
            },
            Expr::Pow(a, n) => match **a {
                Expr::Var(v) if T::CACHE_POWERS && *n >= 1 => p.get(v, *n as usize),
                _ => a.eval_cached(p)?.powi(*n),
            },
            Expr::Call(func, a) => a.eval_cached(p)?.apply(*func)?,
        })
    }

    /// Value of a constant node, possibly negated.
    pub(crate) fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(c.value()),
            Expr::Neg(e) => e.as_constant().map(|v| -v),
            _ => None,
        }
    }

    /// `f(p)`.
    pub fn eval_scalar(&self, p: [f64; 2]) -> Result<f64, DomainError> {
        self.eval_with(&p[0], &p[1])
    }

    /// Taylor jet of `f` at `center` up to total degree `order`.
    pub fn eval_jet(&self, center: [f64; 2], order: usize) -> Result<Jet, crate::Error> {
        self.eval_jet_truncated(center, Truncation::total(order))
    }

    pub fn eval_jet_truncated(
        &self,
        center: [f64; 2],
        trunc: Truncation,
    ) -> Result<Jet, crate::Error> {
        let x = Jet::variable(center, trunc, 0)?;
        let y = Jet::variable(center, trunc, 1)?;
        Ok(self.eval_with(&x, &y)?)
    }

    /// Replaces `x` and `y` by the given expressions.
    pub fn substitute(&self, x: &Expr, y: &Expr) -> Expr {
        let rec = |e: &Expr| Box::new(e.substitute(x, y));
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(Var::X) => x.clone(),
            Expr::Var(Var::Y) => y.clone(),
            Expr::Neg(e) => Expr::Neg(rec(e)),
            Expr::Add(a, b) => Expr::Add(rec(a), rec(b)),
            Expr::Sub(a, b) => Expr::Sub(rec(a), rec(b)),
            Expr::Mul(a, b) => Expr::Mul(rec(a), rec(b)),
            Expr::Pow(a, n) => Expr::Pow(rec(a), *n),
            Expr::Call(f, a) => Expr::Call(*f, rec(a)),
        }
    }

    /// True if the tree uses no analytic primitive.
    pub fn is_polynomial(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Neg(e) | Expr::Pow(e, _) => e.is_polynomial(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.is_polynomial() && b.is_polynomial()
            }
            Expr::Call(..) => false,
        }
    }
}

impl core::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl core::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl core::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

// Printing parenthesizes every compound node so the output reparses to the
// same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.exact.denom().is_one() {
                    write!(f, "{}", c.exact.numer())
                } else {
                    write!(f, "{}/{}", c.exact.numer(), c.exact.denom())
                }
            }
            Expr::Var(Var::X) => write!(f, "x"),
            Expr::Var(Var::Y) => write!(f, "y"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Pow(a, n) => write!(f, "({a})^{n}"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Parses an expression.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src, pos: 0 };
    p.skip_ws();
    if p.pos == src.len() {
        return Err(p.err(ParseErrorKind::EmptyInput));
    }
    let e = p.expr()?;
    p.skip_ws();
    match p.peek() {
        None => Ok(e),
        Some(c) => Err(p.err(ParseErrorKind::UnexpectedChar(c))),
    }
}

impl core::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.pos,
            kind,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += c.len_utf8();
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(c) => self.err(ParseErrorKind::UnexpectedChar(c)),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.bump();
                    lhs = lhs + self.term()?;
                }
                Some('-') => {
                    self.bump();
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.bump();
                    lhs = lhs * self.unary()?;
                }
                Some('/') => return Err(self.err(ParseErrorKind::DivisionUnsupported)),
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.peek() == Some('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.atom()?;
        loop {
            self.skip_ws();
            if self.peek() != Some('^') {
                return Ok(base);
            }
            self.bump();
            self.skip_ws();
            let n = self.exponent()?;
            base = Expr::Pow(Box::new(base), n);
        }
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        match self.peek() {
            Some('-') => return Err(self.err(ParseErrorKind::NegativeExponent)),
            Some(c) if c.is_ascii_digit() => {}
            _ => return Err(self.unexpected()),
        }
        let start = self.pos;
        let (value, integral) = self.number()?;
        if !integral || !value.is_integer() {
            return Err(ParseError {
                offset: start,
                kind: ParseErrorKind::FractionalExponent,
            });
        }
        value
            .to_integer()
            .to_u32()
            .filter(|&n| n <= 64)
            .ok_or(ParseError {
                offset: start,
                kind: ParseErrorKind::ExponentTooLarge,
            })
    }

    /// Decimal literal `d+[.d*][e[+-]d+]`; returns the exact value and
    /// whether it was written without fraction or exponent.
    fn number(&mut self) -> Result<(BigRational, bool), ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let int_end = i;
        let mut frac = "";
        if i < bytes.len() && bytes[i] == b'.' {
            let fs = i + 1;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            frac = &self.src[fs..i];
        }
        let mut exp: i64 = 0;
        let mut has_exp = false;
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            let neg = j < bytes.len() && bytes[j] == b'-';
            if j < bytes.len() && (bytes[j] == b'-' || bytes[j] == b'+') {
                j += 1;
            }
            let ds = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if ds == j {
                self.pos = j;
                return Err(self.err(ParseErrorKind::BadNumber));
            }
            exp = self.src[ds..j].parse::<i64>().map_err(|_| ParseError {
                offset: ds,
                kind: ParseErrorKind::BadNumber,
            })?;
            if exp > 400 {
                return Err(ParseError {
                    offset: ds,
                    kind: ParseErrorKind::BadNumber,
                });
            }
            if neg {
                exp = -exp;
            }
            has_exp = true;
            i = j;
        }
        if int_end == start && frac.is_empty() {
            return Err(self.err(ParseErrorKind::BadNumber));
        }
        let mut digits = String::from(&self.src[start..int_end]);
        digits.push_str(frac);
        let mantissa: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| ParseError {
                offset: start,
                kind: ParseErrorKind::BadNumber,
            })?
        };
        let scale = exp - frac.len() as i64;
        let ten = BigInt::from(10u32);
        let value = if scale >= 0 {
            BigRational::from_integer(mantissa * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(mantissa, num_traits::pow(ten, (-scale) as usize))
        };
        self.pos = i;
        let integral = frac.is_empty() && !has_exp && !self.src[start..i].contains('.');
        Ok((value, integral))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let (num, _) = self.number()?;
                let save = self.pos;
                self.skip_ws();
                if self.peek() == Some('/') {
                    let slash = self.pos;
                    self.bump();
                    self.skip_ws();
                    if !matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
                        return Err(ParseError {
                            offset: slash,
                            kind: ParseErrorKind::DivisionUnsupported,
                        });
                    }
                    let dstart = self.pos;
                    let (den, _) = self.number()?;
                    if den.is_zero() {
                        return Err(ParseError {
                            offset: dstart,
                            kind: ParseErrorKind::ZeroDenominator,
                        });
                    }
                    return Ok(Expr::Const(Literal::new(num / den)));
                }
                self.pos = save;
                Ok(Expr::Const(Literal::new(num)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.bump();
                }
                let name = &self.src[start..self.pos];
                match name {
                    "x" | "u1" => return Ok(Expr::Var(Var::X)),
                    "y" | "u2" => return Ok(Expr::Var(Var::Y)),
                    _ => {}
                }
                let Some(func) = Func::from_name(name) else {
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
                    });
                };
                self.skip_ws();
                if self.peek() != Some('(') {
                    return Err(self.unexpected());
                }
                self.bump();
                let arg = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.unexpected());
                }
                self.bump();
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.unexpected());
                }
                self.bump();
                Ok(e)
            }
            _ => Err(self.unexpected()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn int(n: i64) -> Expr {
        Expr::Const(Literal::new(BigRational::from_integer(n.into())))
    }

    #[test]
    fn canonical_e6_germ() {
        let x = Box::new(Expr::Var(Var::X));
        let y = Box::new(Expr::Var(Var::Y));
        assert_eq!(
            p("x^3 + y^4"),
            Expr::Add(Box::new(Expr::Pow(x, 3)), Box::new(Expr::Pow(y, 4)))
        );
    }

    #[test]
    fn e7_germ_has_product() {
        match p("x^3 + x*y^3") {
            Expr::Add(_, rhs) => assert!(matches!(*rhs, Expr::Mul(..))),
            other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn double_caret_is_a_syntax_error_at_offset_two() {
        let e = parse("x^^3").unwrap_err();
        assert_eq!(e.offset, 2);
        assert_eq!(e.kind, ParseErrorKind::UnexpectedChar('^'));
    }

    #[test]
    fn error_kinds() {
        assert_eq!(parse("").unwrap_err().kind, ParseErrorKind::EmptyInput);
        assert_eq!(
            parse("x^-2").unwrap_err().kind,
            ParseErrorKind::NegativeExponent
        );
        assert_eq!(
            parse("x^1.5").unwrap_err().kind,
            ParseErrorKind::FractionalExponent
        );
        assert_eq!(
            parse("z + 1").unwrap_err().kind,
            ParseErrorKind::UnknownIdentifier("z".into())
        );
        assert_eq!(
            parse("x/2").unwrap_err().kind,
            ParseErrorKind::DivisionUnsupported
        );
        assert_eq!(
            parse("3/0").unwrap_err().kind,
            ParseErrorKind::ZeroDenominator
        );
        assert_eq!(
            parse("(x + y").unwrap_err().kind,
            ParseErrorKind::UnexpectedEnd
        );
        assert_eq!(parse("sin x").unwrap_err().offset, 4);
    }

    #[test]
    fn rational_and_decimal_literals_are_exact() {
        let three_quarters = BigRational::new(3.into(), 4.into());
        assert_eq!(p("3/4"), Expr::Const(Literal::new(three_quarters.clone())));
        assert_eq!(p("0.75"), Expr::Const(Literal::new(three_quarters)));
        assert_eq!(p("1e2"), int(100));
        assert_eq!(p("2.5e-1").to_string(), "1/4");
    }

    #[test]
    fn aliases() {
        assert_eq!(p("u1 * u2"), p("x*y"));
    }

    #[test]
    fn scalar_evaluation() {
        assert_eq!(p("x^3+y^4").eval_scalar([0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(p("x^3+y^4").eval_scalar([1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(p("x^3+y^5").eval_scalar([2.0, 1.0]).unwrap(), 9.0);
        assert_eq!(p("-x^2").eval_scalar([3.0, 0.0]).unwrap(), -9.0);
        assert_eq!(p("2 - 3/4*y").eval_scalar([0.0, 4.0]).unwrap(), -1.0);
    }

    #[test]
    fn domain_violation() {
        let err = p("log1p(x)").eval_scalar([-1.0, 0.0]).unwrap_err();
        assert_eq!(err.func, Func::Log1p);
        assert!(p("sqrt1p(x - 3)").eval_scalar([0.0, 0.0]).is_err());
        assert!(p("sqrt1p(x - 3)").eval_jet([0.0, 0.0], 3).is_err());
    }

    #[test]
    fn polynomial_jets() {
        let j = p("x^3+y^4").eval_jet([0.0, 0.0], 5).unwrap();
        for (a, b) in Truncation::total(5).indices() {
            let want = if (a, b) == (3, 0) || (a, b) == (0, 4) {
                1.0
            } else {
                0.0
            };
            assert_eq!(j.coeff(a, b), want, "({a},{b})");
        }
        let j = p("x*y^3").eval_jet([0.0, 0.0], 4).unwrap();
        for (a, b) in Truncation::total(4).indices() {
            let want = if (a, b) == (1, 3) { 1.0 } else { 0.0 };
            assert_eq!(j.coeff(a, b), want);
        }
    }

    #[test]
    fn sin_times_quartic() {
        let j = p("sin(x)*y^4").eval_jet([0.0, 0.0], 6).unwrap();
        assert_eq!(j.coeff(1, 4), 1.0);
        assert_eq!(j.coeff(0, 4), 0.0);
        // (3,4) has total degree 7 and is not stored.
        assert!(j.derivative(3, 4).is_err());
    }

    #[test]
    fn print_reparses_to_same_tree() {
        for s in [
            "x^3 + y^4",
            "-(x - 2*y)^2 * sin(3/7*x) + exp(-y)",
            "log1p(x*y) - sqrt1p(0.25*x^2)^3",
            "--x",
            "1e-3*cos(u1)",
        ] {
            let e = p(s);
            assert_eq!(p(&format!("{e}")), e, "{s}");
        }
    }

    #[test]
    fn constant_from_negative_float() {
        let c = Expr::constant(-0.5).unwrap();
        assert_eq!(c.eval_scalar([0.0, 0.0]).unwrap(), -0.5);
        assert_eq!(p(&c.to_string()), c);
    }
}
