//! Straight-line jet evaluation of a framed function.
//!
//! A [`Program`] flattens the inverse change chain and the expression into a
//! list of register operations. Integer powers are shared, constant factors
//! become scalings, and evaluation reuses one [`Workspace`] buffer, so hot
//! loops that need many jets of the same shape allocate nothing per jet.

use alloc::vec;
use alloc::vec::Vec;

use crate::chain::{invert2, ChangeChain, Step};
use crate::expr::{DomainError, Expr, Func, Var};
use crate::jet::{mul_acc, Jet, JetError, Truncation};

type Reg = usize;

#[derive(Clone, Debug, PartialEq)]
enum Op {
    /// Coordinate `axis` of the evaluation point.
    Var {
        axis: usize,
    },
    Const(f64),
    Add(Reg, Reg),
    Sub(Reg, Reg),
    Mul(Reg, Reg),
    Scale(Reg, f64),
    Shift(Reg, f64),
    Call(Func, Reg),
}

/// Compiled `F(z) = f(chain⁻¹(z))`; register `i` holds the result of `ops[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    out: Reg,
}

struct Builder {
    ops: Vec<Op>,
    /// `(base, n, reg)` with `reg = base^n`.
    powers: Vec<(Reg, u32, Reg)>,
}

impl Builder {
    fn push(&mut self, op: Op) -> Reg {
        self.ops.push(op);
        self.ops.len() - 1
    }

    fn scale(&mut self, r: Reg, c: f64) -> Reg {
        if c == 1.0 {
            r
        } else {
            self.push(Op::Scale(r, c))
        }
    }

    fn shift(&mut self, r: Reg, c: f64) -> Reg {
        if c == 0.0 {
            r
        } else {
            self.push(Op::Shift(r, c))
        }
    }

    fn pow(&mut self, base: Reg, n: u32) -> Reg {
        if n == 1 {
            return base;
        }
        if let Some(&(_, _, r)) = self.powers.iter().find(|&&(b, k, _)| b == base && k == n) {
            return r;
        }
        let lower = self.pow(base, n - 1);
        let r = self.push(Op::Mul(lower, base));
        self.powers.push((base, n, r));
        r
    }

    /// `Σ poly[i] t^i`, or `None` when every coefficient vanishes.
    fn poly(&mut self, poly: &[f64], t: Reg) -> Option<Reg> {
        let mut acc: Option<Reg> = None;
        for (i, &c) in poly.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let term = if i == 0 {
                self.push(Op::Const(c))
            } else {
                let p = self.pow(t, i as u32);
                self.scale(p, c)
            };
            acc = Some(match acc {
                Some(a) => self.push(Op::Add(a, term)),
                None => term,
            });
        }
        acc
    }

    fn linear(&mut self, x: Reg, y: Reg, a: f64, b: f64) -> Reg {
        match (a == 0.0, b == 0.0) {
            (_, true) => self.scale(x, a),
            (true, false) => self.scale(y, b),
            (false, false) => {
                let u = self.scale(x, a);
                let v = self.scale(y, b);
                self.push(Op::Add(u, v))
            }
        }
    }

    fn chain(&mut self, chain: &ChangeChain) -> (Reg, Reg) {
        let mut x = self.push(Op::Var { axis: 0 });
        let mut y = self.push(Op::Var { axis: 1 });
        for step in chain.steps.iter().rev() {
            match step {
                Step::Linear { matrix } => {
                    if *matrix == [[1.0, 0.0], [0.0, 1.0]] {
                        continue;
                    }
                    let m = invert2(*matrix).expect("linear step is invertible");
                    (x, y) = (
                        self.linear(x, y, m[0][0], m[0][1]),
                        self.linear(x, y, m[1][0], m[1][1]),
                    );
                }
                Step::ShearX { poly } => {
                    if let Some(q) = self.poly(poly, y) {
                        x = self.push(Op::Sub(x, q));
                    }
                }
                Step::ShearY { poly } => {
                    if let Some(q) = self.poly(poly, x) {
                        y = self.push(Op::Sub(y, q));
                    }
                }
                Step::Scale { lambda, mu } => {
                    x = self.scale(x, 1.0 / lambda);
                    y = self.scale(y, 1.0 / mu);
                }
            }
        }
        (
            self.shift(x, chain.origin[0]),
            self.shift(y, chain.origin[1]),
        )
    }

    fn expr(&mut self, e: &Expr, x: Reg, y: Reg) -> Reg {
        if let Some(c) = e.as_constant() {
            return self.push(Op::Const(c));
        }
        match e {
            Expr::Const(_) => unreachable!("constants are folded above"),
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Neg(a) => {
                let r = self.expr(a, x, y);
                self.push(Op::Scale(r, -1.0))
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let sign = if matches!(e, Expr::Sub(..)) {
                    -1.0
                } else {
                    1.0
                };
                match (a.as_constant(), b.as_constant()) {
                    (_, Some(c)) => {
                        let r = self.expr(a, x, y);
                        self.shift(r, sign * c)
                    }
                    (Some(c), _) => {
                        let r = self.expr(b, x, y);
                        let r = self.scale(r, sign);
                        self.shift(r, c)
                    }
                    _ => {
                        let (ra, rb) = (self.expr(a, x, y), self.expr(b, x, y));
                        self.push(if sign > 0.0 {
                            Op::Add(ra, rb)
                        } else {
                            Op::Sub(ra, rb)
                        })
                    }
                }
            }
            Expr::Mul(a, b) => match (a.as_constant(), b.as_constant()) {
                (Some(c), _) => {
                    let r = self.expr(b, x, y);
                    self.push(Op::Scale(r, c))
                }
                (_, Some(c)) => {
                    let r = self.expr(a, x, y);
                    self.push(Op::Scale(r, c))
                }
                _ => {
                    let (ra, rb) = (self.expr(a, x, y), self.expr(b, x, y));
                    self.push(Op::Mul(ra, rb))
                }
            },
            Expr::Pow(a, 0) => {
                let _ = a;
                self.push(Op::Const(1.0))
            }
            Expr::Pow(a, n) => {
                let r = self.expr(a, x, y);
                self.pow(r, *n)
            }
            Expr::Call(func, a) => {
                let r = self.expr(a, x, y);
                self.push(Op::Call(*func, r))
            }
        }
    }
}

/// Scratch registers for one truncation.
#[derive(Clone, Debug)]
pub struct Workspace {
    trunc: Truncation,
    len: usize,
    cols: usize,
    regs: Vec<f64>,
    scratch: [Vec<f64>; 2],
}

impl Workspace {
    pub fn truncation(&self) -> Truncation {
        self.trunc
    }
}

/// Result of [`Program::eval`], borrowing the workspace.
#[derive(Clone, Copy, Debug)]
pub struct JetView<'a> {
    trunc: Truncation,
    cols: usize,
    coeffs: &'a [f64],
}

impl JetView<'_> {
    /// Taylor coefficient of `x^a y^b`; zero when the index is not kept.
    #[inline]
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if self.trunc.keeps(a, b) {
            self.coeffs[a * self.cols + b]
        } else {
            0.0
        }
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn to_jet(&self, center: [f64; 2]) -> Jet {
        Jet::from_block(center, self.trunc, self.coeffs.to_vec())
    }
}

impl Program {
    pub fn compile(expr: &Expr, chain: &ChangeChain) -> Self {
        let mut b = Builder {
            ops: Vec::new(),
            powers: Vec::new(),
        };
        let (x, y) = b.chain(chain);
        let out = b.expr(expr, x, y);
        Self { ops: b.ops, out }
    }

    /// Number of operations.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn workspace(&self, trunc: Truncation) -> Result<Workspace, JetError> {
        if !trunc.is_valid() {
            return Err(JetError::OrderTooLarge(trunc.order));
        }
        let (rows, cols) = trunc.layout();
        let len = rows * cols;
        Ok(Workspace {
            trunc,
            len,
            cols,
            regs: vec![0.0; len * self.ops.len()],
            scratch: [vec![0.0; len], vec![0.0; len]],
        })
    }

    /// Jet of `F` at `z` in the workspace's truncation.
    pub fn eval<'w>(&self, ws: &'w mut Workspace, z: [f64; 2]) -> Result<JetView<'w>, DomainError> {
        let (len, t) = (ws.len, ws.trunc);
        for (i, op) in self.ops.iter().enumerate() {
            let (done, rest) = ws.regs.split_at_mut(i * len);
            let dst = &mut rest[..len];
            let reg = |r: Reg| &done[r * len..(r + 1) * len];
            match *op {
                Op::Var { axis } => {
                    dst.fill(0.0);
                    dst[0] = z[axis];
                    let (a, b) = if axis == 0 { (1, 0) } else { (0, 1) };
                    if t.keeps(a, b) {
                        dst[a * ws.cols + b] = 1.0;
                    }
                }
                Op::Const(c) => {
                    dst.fill(0.0);
                    dst[0] = c;
                }
                Op::Add(a, b) => {
                    for ((d, u), v) in dst.iter_mut().zip(reg(a)).zip(reg(b)) {
                        *d = u + v;
                    }
                }
                Op::Sub(a, b) => {
                    for ((d, u), v) in dst.iter_mut().zip(reg(a)).zip(reg(b)) {
                        *d = u - v;
                    }
                }
                Op::Mul(a, b) => {
                    dst.fill(0.0);
                    mul_acc(reg(a), reg(b), dst, t);
                }
                Op::Scale(a, c) => {
                    for (d, u) in dst.iter_mut().zip(reg(a)) {
                        *d = c * u;
                    }
                }
                Op::Shift(a, c) => {
                    dst.copy_from_slice(reg(a));
                    dst[0] += c;
                }
                Op::Call(func, a) => {
                    let arg = reg(a);
                    let v = arg[0];
                    let taylor = func
                        .taylor(v, t.order)
                        .ok_or(DomainError { func, argument: v })?;
                    let [acc, tmp] = &mut ws.scratch;
                    // Horner in the nilpotent part `arg − v`.
                    acc.fill(0.0);
                    acc[0] = taylor[t.order];
                    for k in (0..t.order).rev() {
                        tmp.fill(0.0);
                        mul_acc(acc, arg, tmp, t);
                        for (w, u) in tmp.iter_mut().zip(acc.iter()) {
                            *w -= v * u;
                        }
                        tmp[0] += taylor[k];
                        core::mem::swap(acc, tmp);
                    }
                    dst.copy_from_slice(acc);
                }
            }
        }
        let o = self.out * len;
        Ok(JetView {
            trunc: t,
            cols: ws.cols,
            coeffs: &ws.regs[o..o + len],
        })
    }
}
