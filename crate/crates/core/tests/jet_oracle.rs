#[path = "support/fd.rs"]
mod fd;

use nfcert_core::parse;
use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

fn unit(rng: &mut Pcg64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn fornberg_matches_textbook_stencils() {
    let w = fd::fornberg(0.0, &[-1.0, 0.0, 1.0], 2);
    assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
    assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    let w = fd::fornberg(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 4);
    let expect = [1.0, -4.0, 6.0, -4.0, 1.0];
    for (a, b) in w[4].iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn finite_differences_recover_polynomial_derivatives() {
    let f = |x: f64, y: f64| x.powi(3) * y.powi(2) - 2.0 * x * y.powi(4);
    let z = [0.3, -0.2];
    let d32 = fd::partial(&f, z, 3, 2);
    assert!((d32 - 12.0).abs() < 1e-7, "{d32}");
    let d14 = fd::partial(&f, z, 1, 3);
    assert!((d14 - (-48.0 * z[1])).abs() < 1e-7, "{d14}");
}

fn compare(src: &str, z: [f64; 2], max_order: usize, tol: f64) {
    let e = parse(src).unwrap();
    let jet = e.eval_jet(z, max_order).unwrap();
    let f = |x: f64, y: f64| e.eval_scalar([x, y]).unwrap();
    for order in 0..=max_order {
        for a in 0..=order {
            let b = order - a;
            let fd = fd::partial(&f, z, a, b);
            let got = jet.derivative(a, b).unwrap();
            assert!(
                (got - fd).abs() <= tol * fd.abs().max(1.0),
                "{src} at {z:?}: d({a},{b}) jet {got} fd {fd}"
            );
        }
    }
}

#[test]
fn jets_match_finite_differences_on_elementary_functions() {
    for src in [
        "sin(x + 2*y)",
        "cos(x*y)",
        "exp(x - y^2)",
        "log1p(0.5*x + 0.25*y)",
        "sqrt1p(x*y + 0.3*x)",
        "x^3*sin(y) - exp(x)*y^2",
    ] {
        compare(src, [0.1, -0.2], 4, 1e-6);
    }
}

#[test]
fn jets_match_finite_differences_on_random_expressions() {
    let mut rng = Pcg64::seed_from_u64(7);
    for _ in 0..40 {
        let src = fd::random_expr(&mut || unit(&mut rng), 3);
        let z = [unit(&mut rng) - 0.5, unit(&mut rng) - 0.5];
        compare(&src, z, 4, 1e-5);
    }
}

#[test]
fn jet_center_is_respected() {
    let e = parse("(x - 1)^3 + (y + 2)^2").unwrap();
    let jet = e.eval_jet([1.0, -2.0], 3).unwrap();
    assert_eq!(jet.value(), 0.0);
    assert_eq!(jet.derivative(3, 0).unwrap(), 6.0);
    assert_eq!(jet.derivative(0, 2).unwrap(), 2.0);
    assert_eq!(jet.derivative(1, 0).unwrap(), 0.0);
}
