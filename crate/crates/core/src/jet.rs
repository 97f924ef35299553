//! Truncated bivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients `f^{(a+b)}_{x^a y^b}(c) / (a! b!)`
//! of a function around a center `c`, for every index `(a, b)` kept by its
//! [`Truncation`]. The usual truncation is triangular (`a + b <= order`);
//! an additional per-variable cap gives rectangular-ish shapes which are
//! much cheaper when only a few mixed partials are needed.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

/// Largest total order supported by a [`Jet`].
pub const MAX_ORDER: usize = 12;
const DIM: usize = MAX_ORDER + 1;

const FACTORIAL: [f64; DIM] = {
    let mut out = [1.0; DIM];
    let mut i = 1;
    while i < DIM {
        out[i] = out[i - 1] * i as f64;
        i += 1;
    }
    out
};

/// `n!` as a float, for `n <= MAX_ORDER`.
pub fn factorial(n: usize) -> f64 {
    FACTORIAL[n]
}

/// Which coefficients a jet keeps: `a + b <= order`, `a <= max_x`, `b <= max_y`.
///
/// The kept index set is always downward closed, so products and analytic
/// compositions computed coefficientwise are exact on the kept set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Truncation {
    pub order: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl Truncation {
    /// Triangular truncation `a + b <= order`.
    pub const fn total(order: usize) -> Self {
        Self {
            order,
            max_x: order,
            max_y: order,
        }
    }

    pub const fn new(order: usize, max_x: usize, max_y: usize) -> Self {
        Self {
            order,
            max_x,
            max_y,
        }
    }

    #[inline]
    pub fn keeps(&self, a: usize, b: usize) -> bool {
        a <= self.max_x && b <= self.max_y && a + b <= self.order
    }

    pub(crate) fn is_valid(&self) -> bool {
        self.order <= MAX_ORDER
    }

    /// Rows and columns of the coefficient block.
    pub(crate) fn layout(&self) -> (usize, usize) {
        (
            self.max_x.min(self.order) + 1,
            self.max_y.min(self.order) + 1,
        )
    }

    /// Iterates over kept indices in graded order.
    pub fn indices(self) -> impl Iterator<Item = (usize, usize)> {
        (0..=self.order).flat_map(move |deg| {
            (0..=deg)
                .rev()
                .map(move |a| (a, deg - a))
                .filter(move |&(a, b)| self.keeps(a, b))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum JetError {
    /// Operands differ in center or truncation.
    Mismatch,
    /// Requested index is not stored in the jet.
    IndexOutOfRange { a: usize, b: usize },
    /// Order above [`MAX_ORDER`].
    OrderTooLarge(usize),
    /// A substitution component has a nonzero constant term.
    SubstitutionMovesOrigin,
}

impl fmt::Display for JetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JetError::Mismatch => write!(f, "jets differ in center or truncation"),
            JetError::IndexOutOfRange { a, b } => {
                write!(f, "coefficient ({a},{b}) is outside the jet's truncation")
            }
            JetError::OrderTooLarge(n) => {
                write!(f, "jet order {n} exceeds the maximum of {MAX_ORDER}")
            }
            JetError::SubstitutionMovesOrigin => {
                write!(f, "substitution does not fix the origin")
            }
        }
    }
}

impl core::error::Error for JetError {}

/// Truncated Taylor expansion of a bivariate function at a point.
///
/// Coefficients live in a row-major `rows × cols` block (`rows = min(max_x, order) + 1`,
/// `cols = min(max_y, order) + 1`); entries of the block with `a + b > order` are always zero.
#[derive(Clone)]
pub struct Jet {
    center: [f64; 2],
    trunc: Truncation,
    rows: usize,
    cols: usize,
    coeffs: Vec<f64>,
}

/// `dst += lhs * rhs` on coefficient blocks of truncation `t`.
pub(crate) fn mul_acc(lhs: &[f64], rhs: &[f64], dst: &mut [f64], t: Truncation) {
    let (rows, cols) = t.layout();
    for a1 in 0..rows {
        let lrow = &lhs[a1 * cols..(a1 + 1) * cols];
        if lrow.iter().all(|&c| c == 0.0) {
            continue;
        }
        for a2 in 0..rows - a1 {
            let Some(lim) = t.order.checked_sub(a1 + a2) else {
                break;
            };
            let len = cols.min(lim + 1);
            let start = (a1 + a2) * cols;
            convolve(
                &lrow[..len],
                &rhs[a2 * cols..a2 * cols + len],
                &mut dst[start..start + len],
            );
        }
    }
}

/// `d[b] += Σ_{i ≤ b} l[i] r[b − i]` for slices of one common length.
#[inline]
fn convolve(l: &[f64], r: &[f64], d: &mut [f64]) {
    macro_rules! fixed {
        ($($n:literal)*) => {
            match d.len() {
                $($n => convolve_n::<$n>(l.try_into().unwrap(), r.try_into().unwrap(), d.try_into().unwrap()),)*
                _ => {
                    for b in 0..d.len() {
                        d[b] += l[..=b].iter().zip(r[..=b].iter().rev()).map(|(x, y)| x * y).sum::<f64>();
                    }
                }
            }
        };
    }
    fixed!(1 2 3 4 5 6 7 8 9 10 11 12 13);
}

#[inline(always)]
fn convolve_n<const N: usize>(l: &[f64; N], r: &[f64; N], d: &mut [f64; N]) {
    for b in 0..N {
        let mut acc = 0.0;
        for i in 0..=b {
            acc += l[i] * r[b - i];
        }
        d[b] += acc;
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (a, b) in self.trunc.indices() {
            let c = self.coeff(a, b);
            if c != 0.0 {
                map.entry(&(a, b), &c);
            }
        }
        map.finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center && self.trunc == other.trunc && self.live() == other.live()
    }
}

impl Jet {
    pub fn zero(center: [f64; 2], trunc: Truncation) -> Result<Self, JetError> {
        if !trunc.is_valid() {
            return Err(JetError::OrderTooLarge(trunc.order));
        }
        let (rows, cols) = trunc.layout();
        Ok(Self {
            center,
            trunc,
            rows,
            cols,
            coeffs: vec![0.0; rows * cols],
        })
    }

    pub fn constant(center: [f64; 2], trunc: Truncation, value: f64) -> Result<Self, JetError> {
        let mut j = Self::zero(center, trunc)?;
        j.coeffs[0] = value;
        Ok(j)
    }

    /// The coordinate function `x` (`axis = 0`) or `y` (`axis = 1`) expanded at `center`.
    pub fn variable(center: [f64; 2], trunc: Truncation, axis: usize) -> Result<Self, JetError> {
        let mut j = Self::constant(center, trunc, center[axis])?;
        let (a, b) = if axis == 0 { (1, 0) } else { (0, 1) };
        if trunc.keeps(a, b) {
            let k = j.idx(a, b);
            j.coeffs[k] = 1.0;
        }
        Ok(j)
    }

    /// Builds a jet from `(a, b, coefficient)` triples; unlisted entries are zero.
    pub fn from_coeffs(
        center: [f64; 2],
        trunc: Truncation,
        entries: &[(usize, usize, f64)],
    ) -> Result<Self, JetError> {
        let mut j = Self::zero(center, trunc)?;
        for &(a, b, c) in entries {
            j.set_coeff(a, b, c)?;
        }
        Ok(j)
    }

    /// A jet with the same center and truncation holding the constant `value`.
    pub fn lift(&self, value: f64) -> Self {
        let mut j = Self {
            center: self.center,
            trunc: self.trunc,
            rows: self.rows,
            cols: self.cols,
            coeffs: vec![0.0; self.coeffs.len()],
        };
        j.coeffs[0] = value;
        j
    }

    #[inline]
    fn idx(&self, a: usize, b: usize) -> usize {
        a * self.cols + b
    }

    #[inline]
    fn live(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    fn live_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn order(&self) -> usize {
        self.trunc.order
    }

    /// Constant term, i.e. the function value at the center.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient of `x^a y^b`; zero when the index is not kept.
    #[inline]
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if self.trunc.keeps(a, b) {
            self.coeffs[self.idx(a, b)]
        } else {
            0.0
        }
    }

    pub fn set_coeff(&mut self, a: usize, b: usize, c: f64) -> Result<(), JetError> {
        if !self.trunc.keeps(a, b) {
            return Err(JetError::IndexOutOfRange { a, b });
        }
        let k = self.idx(a, b);
        self.coeffs[k] = c;
        Ok(())
    }

    /// Partial derivative `f^{(a+b)}_{x^a y^b}` at the center.
    pub fn derivative(&self, a: usize, b: usize) -> Result<f64, JetError> {
        if !self.trunc.keeps(a, b) {
            return Err(JetError::IndexOutOfRange { a, b });
        }
        Ok(self.coeffs[self.idx(a, b)] * FACTORIAL[a] * FACTORIAL[b])
    }

    /// Largest coefficient magnitude over the kept indices of total degree in `degrees`.
    pub fn max_abs_in(&self, degrees: core::ops::RangeInclusive<usize>) -> f64 {
        self.trunc
            .indices()
            .filter(|(a, b)| degrees.contains(&(a + b)))
            .map(|(a, b)| libm::fabs(self.coeff(a, b)))
            .fold(0.0, f64::max)
    }

    /// Same jet re-truncated to a smaller index set.
    pub fn truncate(&self, trunc: Truncation) -> Self {
        let mut j = Self::zero(self.center, trunc).expect("smaller truncation is valid");
        for (a, b) in trunc.indices() {
            let k = j.idx(a, b);
            j.coeffs[k] = self.coeff(a, b);
        }
        j
    }

    fn compatible(&self, other: &Self) -> bool {
        self.center == other.center && self.trunc == other.trunc
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, JetError> {
        if !self.compatible(other) {
            return Err(JetError::Mismatch);
        }
        let mut out = self.clone();
        out.add_assign_unchecked(other);
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, JetError> {
        if !self.compatible(other) {
            return Err(JetError::Mismatch);
        }
        let mut out = self.clone();
        out.sub_assign_unchecked(other);
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, JetError> {
        if !self.compatible(other) {
            return Err(JetError::Mismatch);
        }
        Ok(self.mul_unchecked(other))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(s);
        out
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for c in self.live_mut() {
            *c *= s;
        }
    }

    /// Adds a constant to the value.
    pub fn add_constant(&mut self, c: f64) {
        self.coeffs[0] += c;
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Self) -> Result<(), JetError> {
        if !self.compatible(other) {
            return Err(JetError::Mismatch);
        }
        for (c, o) in self.live_mut().iter_mut().zip(other.live()) {
            *c += s * o;
        }
        Ok(())
    }

    fn add_assign_unchecked(&mut self, other: &Self) {
        for (c, o) in self.live_mut().iter_mut().zip(other.live()) {
            *c += o;
        }
    }

    fn sub_assign_unchecked(&mut self, other: &Self) {
        for (c, o) in self.live_mut().iter_mut().zip(other.live()) {
            *c -= o;
        }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = self.lift(0.0);
        self.mul_into(other, &mut out);
        out
    }

    /// Accumulates `self * other` into `out`, which must share the layout.
    fn mul_into(&self, other: &Self, out: &mut Self) {
        mul_acc(&self.coeffs, &other.coeffs, &mut out.coeffs, self.trunc);
    }

    /// Jet with the given coefficient block, laid out as [`Truncation::layout`].
    pub(crate) fn from_block(center: [f64; 2], trunc: Truncation, coeffs: Vec<f64>) -> Self {
        let (rows, cols) = trunc.layout();
        debug_assert_eq!(coeffs.len(), rows * cols);
        Self {
            center,
            trunc,
            rows,
            cols,
            coeffs,
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.lift(1.0);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// Composes a univariate function with this jet given its Taylor
    /// coefficients `taylor[k] = g^{(k)}(v) / k!` at `v = self.value()`.
    ///
    /// Missing high-order coefficients are treated as zero, so `taylor`
    /// should have at least `order + 1` entries.
    pub fn compose_univariate(&self, taylor: &[f64]) -> Self {
        let mut nil = self.clone();
        nil.coeffs[0] = 0.0;
        let top = taylor.len().min(self.trunc.order + 1);
        if top == 0 {
            return self.lift(0.0);
        }
        let mut acc = self.lift(taylor[top - 1]);
        for k in (0..top - 1).rev() {
            acc = acc.mul_unchecked(&nil);
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    /// Polynomial `Σ poly[i] t^i` evaluated at this jet by Horner's rule.
    pub fn horner(&self, poly: &[f64]) -> Self {
        let low = poly.iter().position(|&c| c != 0.0).unwrap_or(poly.len());
        let Some((&top, rest)) = poly[low..].split_last() else {
            return self.lift(0.0);
        };
        let mut acc = self.lift(top);
        for &c in rest.iter().rev() {
            acc = acc.mul_unchecked(self);
            acc.coeffs[0] += c;
        }
        for _ in 0..low {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Jet of `g(x, y) = f(x'(x, y), y'(x, y))` where `self` is the jet of
    /// `f` in displacement coordinates around its own center and
    /// `(subst_x, subst_y)` express those displacements as jets in the new
    /// variables. Both substitution jets must vanish at their center.
    ///
    /// The result carries the substitution's center and truncation; it is
    /// exact on its kept set as long as `self` is triangular of order at
    /// least the result's order.
    pub fn compose_substitution(&self, subst_x: &Jet, subst_y: &Jet) -> Result<Jet, JetError> {
        if !subst_x.compatible(subst_y) {
            return Err(JetError::Mismatch);
        }
        if subst_x.value() != 0.0 || subst_y.value() != 0.0 {
            return Err(JetError::SubstitutionMovesOrigin);
        }
        let order = subst_x.trunc.order.min(self.trunc.order);
        // Powers of the x-substitution; y-powers are accumulated on the fly.
        let mut px = Vec::with_capacity(order + 1);
        px.push(subst_x.lift(1.0));
        for k in 1..=order {
            let next = px[k - 1].mul_unchecked(subst_x);
            px.push(next);
        }
        let mut out = subst_x.lift(0.0);
        let mut py = subst_x.lift(1.0);
        for b in 0..=order {
            if b > 0 {
                py = py.mul_unchecked(subst_y);
            }
            let mut inner = subst_x.lift(0.0);
            let mut any = false;
            for (a, pxa) in px.iter().enumerate().take(order - b + 1) {
                let c = self.coeff(a, b);
                if c == 0.0 {
                    continue;
                }
                any = true;
                for (o, p) in inner.live_mut().iter_mut().zip(pxa.live()) {
                    *o += c * p;
                }
            }
            if any {
                inner.mul_into(&py, &mut out);
            }
        }
        Ok(out)
    }

    /// Shifts the center label without touching coefficients.
    pub fn with_center(mut self, center: [f64; 2]) -> Self {
        self.center = center;
        self
    }
}

impl core::ops::AddAssign<&Jet> for Jet {
    /// Panics if the operands are incompatible.
    fn add_assign(&mut self, rhs: &Jet) {
        assert!(self.compatible(rhs), "jet add");
        self.add_assign_unchecked(rhs);
    }
}

impl core::ops::SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        assert!(self.compatible(rhs), "jet sub");
        self.sub_assign_unchecked(rhs);
    }
}

impl Add for &Jet {
    type Output = Jet;
    /// Panics if the operands are incompatible; see [`Jet::checked_add`].
    fn add(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert!(self.compatible(rhs), "jet mul");
        self.mul_unchecked(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const O: [f64; 2] = [0.0, 0.0];

    fn x(t: Truncation) -> Jet {
        Jet::variable(O, t, 0).unwrap()
    }
    fn y(t: Truncation) -> Jet {
        Jet::variable(O, t, 1).unwrap()
    }

    #[test]
    fn product_of_coordinates() {
        let t = Truncation::total(2);
        let p = &x(t) * &y(t);
        assert_eq!(p.coeff(1, 1), 1.0);
        assert_eq!(p.coeff(0, 0), 0.0);
        assert_eq!(p.coeff(2, 0), 0.0);
    }

    #[test]
    fn add_zero_is_identity() {
        let t = Truncation::total(4);
        let j = Jet::from_coeffs(O, t, &[(0, 0, 1.5), (2, 1, -3.0), (0, 4, 2.0)]).unwrap();
        let z = Jet::zero(O, t).unwrap();
        assert_eq!(&j + &z, j);
    }

    #[test]
    fn difference_of_squares() {
        let t = Truncation::total(2);
        let s = &x(t) + &y(t);
        let d = &x(t) - &y(t);
        let p = &s * &d;
        assert_eq!(p.coeff(2, 0), 1.0);
        assert_eq!(p.coeff(0, 2), -1.0);
        assert_eq!(p.coeff(1, 1), 0.0);
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = Jet::zero(O, Truncation::total(2)).unwrap();
        let b = Jet::zero(O, Truncation::total(3)).unwrap();
        assert_eq!(a.checked_add(&b), Err(JetError::Mismatch));
        let c = Jet::zero([1.0, 0.0], Truncation::total(2)).unwrap();
        assert_eq!(a.checked_mul(&c), Err(JetError::Mismatch));
    }

    #[test]
    fn derivatives_multiply_back_factorials() {
        let t = Truncation::total(6);
        assert_eq!(y(t).powi(4).derivative(0, 4).unwrap(), 24.0);
        assert_eq!(y(t).powi(5).derivative(0, 5).unwrap(), 120.0);
        assert_eq!(x(t).powi(3).derivative(3, 0).unwrap(), 6.0);
        assert_eq!(
            x(t).derivative(7, 0),
            Err(JetError::IndexOutOfRange { a: 7, b: 0 })
        );
    }

    #[test]
    fn order_limit() {
        assert_eq!(
            Jet::zero(O, Truncation::total(13)).unwrap_err(),
            JetError::OrderTooLarge(13)
        );
    }

    #[test]
    fn substitution_binomial() {
        // f = x^2 with x' = x + y^2
        let t = Truncation::total(4);
        let f = x(t).powi(2);
        let sx = &x(t) + &y(t).powi(2);
        let g = f.compose_substitution(&sx, &y(t)).unwrap();
        assert_eq!(g.coeff(2, 0), 1.0);
        assert_eq!(g.coeff(1, 2), 2.0);
        assert_eq!(g.coeff(0, 4), 1.0);
        assert_eq!(g.coeff(1, 1), 0.0);
    }

    #[test]
    fn identity_substitution() {
        let t = Truncation::total(5);
        let f = Jet::from_coeffs(O, t, &[(3, 0, 1.0), (1, 3, 2.5), (0, 5, -1.0)]).unwrap();
        assert_eq!(f.compose_substitution(&x(t), &y(t)).unwrap(), f);
    }

    #[test]
    fn substitution_must_fix_origin() {
        let t = Truncation::total(3);
        let f = x(t);
        let moved = &x(t) + &x(t).lift(1.0);
        assert_eq!(
            f.compose_substitution(&moved, &y(t)),
            Err(JetError::SubstitutionMovesOrigin)
        );
    }

    #[test]
    fn shear_of_e7_germ() {
        // x^3 + x (y + x)^3: the x^4 coefficient collects 1 from x * x^3.
        let t = Truncation::total(4);
        let f = &x(t).powi(3) + &(&x(t) * &y(t).powi(3));
        let g = f.compose_substitution(&x(t), &(&y(t) + &x(t))).unwrap();
        assert_eq!(g.coeff(4, 0), 1.0);
        assert_eq!(g.coeff(3, 0), 1.0);
        assert_eq!(g.coeff(3, 1), 3.0);
        assert_eq!(g.coeff(2, 2), 3.0);
        assert_eq!(g.coeff(1, 3), 1.0);
    }

    #[test]
    fn anisotropic_truncation_matches_triangular() {
        let full = Truncation::total(6);
        let thin = Truncation::new(6, 2, 4);
        let f = |t| {
            let a = &x(t) + &y(t).scale(0.5);
            let b = &(&x(t) * &y(t)) - &y(t).powi(2);
            let e = a.lift(0.3);
            &(&a + &e).powi(3) * &(&b + &e)
        };
        let (big, small) = (f(full), f(thin));
        for (a, b) in thin.indices() {
            assert!((big.coeff(a, b) - small.coeff(a, b)).abs() < 1e-15);
        }
    }

    #[test]
    fn univariate_composition_exp() {
        // exp(x) at 0: coefficients 1/k!
        let t = Truncation::total(8);
        let taylor: alloc::vec::Vec<f64> = (0..=8).map(|k| 1.0 / factorial(k)).collect();
        let e = x(t).compose_univariate(&taylor);
        for k in 0..=8 {
            assert!((e.coeff(k, 0) - 1.0 / factorial(k)).abs() < 1e-16);
        }
    }
}
