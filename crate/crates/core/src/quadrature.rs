//! Gauss-Legendre quadrature on `[0, 1]`.

use alloc::vec::Vec;

use crate::Error;

/// Node count used by the normal-form construction.
pub const DEFAULT_NODES: usize = 32;
/// Smallest accepted node count.
pub const MIN_NODES: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// `(P_n(t), P_n'(t))` by the three-term recurrence.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    /// `n`-point rule on `[0, 1]`; exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Result<Self, Error> {
        if n < MIN_NODES {
            return Err(Error::QuadratureOrder(n));
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut t = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            for _ in 0..100 {
                let (p, dp) = legendre(n, t);
                let dt = p / dp;
                t -= dt;
                if libm::fabs(dt) < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, t);
            let w = 2.0 / ((1.0 - t * t) * dp * dp);
            nodes.push(0.5 * (1.0 - t));
            weights.push(0.5 * w);
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫₀¹ f(s) ds`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_order() {
        assert_eq!(
            GaussLegendre::new(3).unwrap_err(),
            Error::QuadratureOrder(3)
        );
        assert!(GaussLegendre::new(4).is_ok());
    }

    #[test]
    fn weights_sum_to_one_and_nodes_inside() {
        let q = GaussLegendre::new(DEFAULT_NODES).unwrap();
        let total: f64 = q.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(q.nodes().iter().all(|&s| s > 0.0 && s < 1.0));
    }

    #[test]
    fn exact_for_high_degree_polynomials() {
        let q = GaussLegendre::new(DEFAULT_NODES).unwrap();
        for k in [0, 1, 5, 20, 40, 63] {
            let v = q.integrate(|s| libm::pow(s, k as f64));
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-15, "degree {k}");
        }
        // (1-s)^3 * s^10 integrates to 3! 10! / 14!
        let v = q.integrate(|s| libm::pow(1.0 - s, 3.0) * libm::pow(s, 10.0));
        assert!((v - 6.0 * 3628800.0 / 87178291200.0).abs() < 1e-17);
    }

    #[test]
    fn smooth_integrand() {
        let q = GaussLegendre::new(DEFAULT_NODES).unwrap();
        let v = q.integrate(libm::exp);
        assert!((v - (core::f64::consts::E - 1.0)).abs() < 1e-14);
    }
}
