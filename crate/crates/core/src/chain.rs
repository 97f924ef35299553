//! Composed polynomial coordinate changes.
//!
//! Every [`Step`] maps old coordinates to new ones and fixes the origin.
//! A [`ChangeChain`] additionally records the base point `P` of the original
//! coordinates: the first step is applied to `u - P`.

use alloc::vec::Vec;

use crate::expr::{DomainError, Expr};
use crate::jet::{Jet, Truncation};
use crate::program::{JetView, Program, Workspace};

/// One primitive change `old -> new`.
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// `new = matrix * old`.
    Linear { matrix: [[f64; 2]; 2] },
    /// `x_new = x + sum poly[i] * y^i`, `y_new = y`.
    ShearX { poly: Vec<f64> },
    /// `y_new = y + sum poly[i] * x^i`, `x_new = x`.
    ShearY { poly: Vec<f64> },
    /// `x_new = lambda * x`, `y_new = mu * y`.
    Scale { lambda: f64, mu: f64 },
}

fn horner(poly: &[f64], t: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

pub(crate) fn invert2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

impl Step {
    pub fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        let [x, y] = p;
        match self {
            Step::Linear { matrix: m } => [m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y],
            Step::ShearX { poly } => [x + horner(poly, y), y],
            Step::ShearY { poly } => [x, y + horner(poly, x)],
            Step::Scale { lambda, mu } => [lambda * x, mu * y],
        }
    }

    pub fn inverse(&self, p: [f64; 2]) -> [f64; 2] {
        let [x, y] = p;
        match self {
            Step::Linear { matrix } => {
                let m = invert2(*matrix).expect("linear step is invertible");
                [m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y]
            }
            Step::ShearX { poly } => [x - horner(poly, y), y],
            Step::ShearY { poly } => [x, y - horner(poly, x)],
            Step::Scale { lambda, mu } => [x / lambda, y / mu],
        }
    }

    /// Old coordinates as jets of the new ones.
    pub fn inverse_jets(&self, x: &Jet, y: &Jet) -> (Jet, Jet) {
        match self {
            Step::Linear { matrix } => {
                let m = invert2(*matrix).expect("linear step is invertible");
                let mut u = x.scale(m[0][0]);
                let mut v = x.scale(m[1][0]);
                u.axpy(m[0][1], y).expect("same layout");
                v.axpy(m[1][1], y).expect("same layout");
                (u, v)
            }
            Step::ShearX { poly } => (x - &y.horner(poly), y.clone()),
            Step::ShearY { poly } => (x.clone(), y - &x.horner(poly)),
            Step::Scale { lambda, mu } => (x.scale(1.0 / lambda), y.scale(1.0 / mu)),
        }
    }

    fn is_identity(&self) -> bool {
        match self {
            Step::Linear { matrix } => *matrix == [[1.0, 0.0], [0.0, 1.0]],
            Step::ShearX { poly } | Step::ShearY { poly } => poly.iter().all(|&c| c == 0.0),
            Step::Scale { lambda, mu } => *lambda == 1.0 && *mu == 1.0,
        }
    }
}

/// Constants produced while building the pre-changes.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum ChainConstants {
    #[default]
    None,
    /// Shear constants `d1..d4` of the E-family chain.
    Shears { d: [f64; 4] },
    /// Coefficients of `Q(y)`, lowest degree first, for `x1 = x + y^2 Q(y)`.
    CompletingSquare { q: Vec<f64> },
}

/// Composition of primitive changes, applied in order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChangeChain {
    pub origin: [f64; 2],
    pub steps: Vec<Step>,
    pub constants: ChainConstants,
    /// Scale factors `(lambda, mu)` of the normalizing rescale, if applied.
    pub scale: Option<(f64, f64)>,
}

impl ChangeChain {
    pub fn at(origin: [f64; 2]) -> Self {
        Self {
            origin,
            ..Self::default()
        }
    }

    pub fn push(&mut self, step: Step) {
        self.steps.push(step);
    }

    /// Appends the steps of `other` (whose origin is ignored).
    pub fn extend(&mut self, other: ChangeChain) {
        self.steps.extend(other.steps);
        if other.constants != ChainConstants::None {
            self.constants = other.constants;
        }
        if other.scale.is_some() {
            self.scale = other.scale;
        }
    }

    /// Original coordinates `u` to chain coordinates.
    pub fn forward(&self, u: [f64; 2]) -> [f64; 2] {
        let p = [u[0] - self.origin[0], u[1] - self.origin[1]];
        self.steps.iter().fold(p, |p, s| s.forward(p))
    }

    /// Chain coordinates back to original coordinates.
    pub fn inverse(&self, z: [f64; 2]) -> [f64; 2] {
        let p = self.steps.iter().rev().fold(z, |p, s| s.inverse(p));
        [p[0] + self.origin[0], p[1] + self.origin[1]]
    }

    /// Original coordinates as jets in the chain coordinates around `z`.
    pub fn inverse_jets(&self, z: [f64; 2], trunc: Truncation) -> Result<(Jet, Jet), crate::Error> {
        let mut x = Jet::variable(z, trunc, 0)?;
        let mut y = Jet::variable(z, trunc, 1)?;
        for s in self.steps.iter().rev() {
            if s.is_identity() {
                continue;
            }
            (x, y) = s.inverse_jets(&x, &y);
        }
        x.add_constant(self.origin[0]);
        y.add_constant(self.origin[1]);
        Ok((x, y))
    }

    pub fn is_identity(&self) -> bool {
        self.origin == [0.0, 0.0] && self.steps.iter().all(Step::is_identity)
    }
}

/// A function expressed in the coordinates of a change chain:
/// `F(z) = f(chain^{-1}(z))`.
#[derive(Clone, Debug)]
pub struct FramedFunction {
    expr: Expr,
    chain: ChangeChain,
    program: Program,
}

impl FramedFunction {
    pub fn new(expr: Expr, chain: ChangeChain) -> Self {
        let program = Program::compile(&expr, &chain);
        Self {
            expr,
            chain,
            program,
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn chain(&self) -> &ChangeChain {
        &self.chain
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn value(&self, z: [f64; 2]) -> Result<f64, DomainError> {
        self.expr.eval_scalar(self.chain.inverse(z))
    }

    pub fn jet(&self, z: [f64; 2], trunc: Truncation) -> Result<Jet, crate::Error> {
        let mut ws = self.program.workspace(trunc)?;
        Ok(self.program.eval(&mut ws, z)?.to_jet(z))
    }

    /// Jet at `z` evaluated in a reusable workspace (see [`Program::workspace`]).
    pub fn jet_in<'w>(
        &self,
        ws: &'w mut Workspace,
        z: [f64; 2],
    ) -> Result<JetView<'w>, crate::Error> {
        Ok(self.program.eval(ws, z)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample_chain() -> ChangeChain {
        let mut c = ChangeChain::at([0.3, -0.2]);
        c.push(Step::Linear {
            matrix: [[1.5, 0.4], [-0.3, 0.9]],
        });
        c.push(Step::ShearX {
            poly: vec![0.0, 0.0, 0.7, -0.2],
        });
        c.push(Step::ShearY {
            poly: vec![0.0, 0.5],
        });
        c.push(Step::ShearX {
            poly: vec![0.0, 0.0, 0.0, 1.1],
        });
        c.push(Step::ShearY {
            poly: vec![0.0, 0.0, -0.8],
        });
        c.push(Step::Scale {
            lambda: 1.3,
            mu: 0.6,
        });
        c
    }

    #[test]
    fn forward_then_inverse_is_identity() {
        let c = sample_chain();
        for i in 0..10 {
            for j in 0..10 {
                let u = [i as f64 / 9.0, j as f64 / 9.0];
                let back = c.inverse(c.forward(u));
                assert!((back[0] - u[0]).abs() < 1e-12 && (back[1] - u[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_jets_agree_with_pointwise_inverse() {
        let c = sample_chain();
        let z = [0.1, -0.05];
        let (x, y) = c.inverse_jets(z, Truncation::total(3)).unwrap();
        let u = c.inverse(z);
        assert!((x.value() - u[0]).abs() < 1e-14);
        assert!((y.value() - u[1]).abs() < 1e-14);
        // first derivatives by central differences
        let h = 1e-6;
        let du = |dz: [f64; 2]| {
            let a = c.inverse([z[0] + dz[0], z[1] + dz[1]]);
            let b = c.inverse([z[0] - dz[0], z[1] - dz[1]]);
            [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
        };
        let dx = du([h, 0.0]);
        assert!((x.coeff(1, 0) - dx[0]).abs() < 1e-7);
        assert!((y.coeff(1, 0) - dx[1]).abs() < 1e-7);
    }
}
