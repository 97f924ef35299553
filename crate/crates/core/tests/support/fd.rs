//! Finite-difference derivatives and random analytic expressions.

#![allow(dead_code)]

/// Fornberg weights: `w[k][j]` approximates the `k`-th derivative at `z`
/// from samples at `nodes[j]`.
pub fn fornberg(z: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

pub const HALF_WIDTH: i32 = 6;
pub const STEP: f64 = 0.05;

/// Central tensor-product approximation of `∂^{a+b} f / ∂x^a ∂y^b` at `z`.
pub fn partial(f: &dyn Fn(f64, f64) -> f64, z: [f64; 2], a: usize, b: usize) -> f64 {
    let nodes: Vec<f64> = (-HALF_WIDTH..=HALF_WIDTH).map(f64::from).collect();
    let w = fornberg(0.0, &nodes, a.max(b));
    let mut s = 0.0;
    for (i, xi) in nodes.iter().enumerate() {
        let wa = w[a][i];
        if wa == 0.0 {
            continue;
        }
        for (j, yj) in nodes.iter().enumerate() {
            let wb = w[b][j];
            if wb != 0.0 {
                s += wa * wb * f(z[0] + STEP * xi, z[1] + STEP * yj);
            }
        }
    }
    s / STEP.powi((a + b) as i32)
}

/// Random expression over `x`, `y` using every function of the language,
/// with arguments kept inside the function domains.
pub fn random_expr(next: &mut dyn FnMut() -> f64, depth: usize) -> String {
    let pick = |next: &mut dyn FnMut() -> f64, n: usize| ((next() * n as f64) as usize).min(n - 1);
    let coef = |next: &mut dyn FnMut() -> f64| format!("({:.2})", 2.0 * next() - 1.0);
    if depth == 0 {
        return match pick(next, 3) {
            0 => "x".into(),
            1 => "y".into(),
            _ => coef(next),
        };
    }
    let a = random_expr(next, depth - 1);
    match pick(next, 9) {
        0 => format!("({a} + {})", random_expr(next, depth - 1)),
        1 => format!("({a} - {})", random_expr(next, depth - 1)),
        2 => format!("({a} * {})", random_expr(next, depth - 1)),
        3 => format!("sin({a})"),
        4 => format!("cos({a})"),
        5 => format!("exp(0.5*{a})"),
        6 => format!("log1p(0.3*sin({a}))"),
        7 => format!("sqrt1p(0.3*cos({a}))"),
        _ => format!("({a})^{}", 2 + pick(next, 2)),
    }
}
