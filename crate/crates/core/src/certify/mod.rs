//! Sampled verification of a normal-form change.
//!
//! Every check certifies "no counterexample found at the sampled
//! resolution", not a proof. All sampling is driven by a seeded PCG
//! generator, so results are reproducible.

pub mod oracle;

use alloc::vec::Vec;

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::chain::FramedFunction;
use crate::jet::Truncation;
use crate::normalform::{grid_point, Certificate, NormalFormMap};
use crate::Error;

/// Slack added to the right-hand side of the derivative-increment bound.
pub const LIPSCHITZ_SLACK: f64 = 1e-9;
/// Newton iteration cap for inverting `φ`.
pub const MAX_INVERSION_ITERATIONS: usize = 50;
/// Residual accepted by the inversion.
pub const INVERSION_TOLERANCE: f64 = 1e-10;
/// Normal-form residual bound relative to `max(1, sup |F|)`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Uniform double in `[0, 1)`.
fn unit(rng: &mut Pcg64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn in_square(rng: &mut Pcg64, r: f64) -> [f64; 2] {
    [r * (2.0 * unit(rng) - 1.0), r * (2.0 * unit(rng) - 1.0)]
}

/// One grid sample of `φ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub xt: f64,
    pub yt: f64,
    pub residual: f64,
    /// `‖φ′ − I‖_F`.
    pub jac_dev: f64,
    pub h: f64,
    pub f: f64,
}

/// Frobenius norm of `J − I`.
pub fn jacobian_deviation(j: &[[f64; 2]; 2]) -> f64 {
    let d = [j[0][0] - 1.0, j[0][1], j[1][0], j[1][1] - 1.0];
    libm::sqrt(d.iter().map(|v| v * v).sum())
}

/// Evaluates `φ`, `φ′`, the residual and `h` on an `n × n` grid of the closed square `[−R, R]²`.
pub fn grid_samples(
    map: &NormalFormMap,
    cert: &Certificate,
    n: usize,
) -> Result<Vec<Sample>, Error> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let line = map.h_line(grid_point(cert.r, n, i), true)?;
        for j in 0..n {
            let z = [grid_point(cert.r, n, i), grid_point(cert.r, n, j)];
            let (phi, jac, h) = map.phi_on(&line, z[1])?;
            out.push(Sample {
                x: z[0],
                y: z[1],
                xt: phi[0],
                yt: phi[1],
                residual: map.residual_at(z, phi)?,
                jac_dev: jacobian_deviation(&jac),
                h,
                f: map.function.value(z)?,
            });
        }
    }
    Ok(out)
}

/// Minimum of `⟨φ(a) − φ(b), a − b⟩ / |a − b|²` over `trials` random pairs in `U`.
pub fn check_monotonicity(
    map: &NormalFormMap,
    cert: &Certificate,
    trials: usize,
    seed: u64,
) -> Result<f64, Error> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    let mut done = 0;
    while done < trials {
        let a = in_square(&mut rng, cert.r);
        let b = in_square(&mut rng, cert.r);
        let d = [a[0] - b[0], a[1] - b[1]];
        let n2 = d[0] * d[0] + d[1] * d[1];
        if n2 == 0.0 {
            continue;
        }
        let (pa, pb) = (map.phi(a)?, map.phi(b)?);
        let ratio = ((pa[0] - pb[0]) * d[0] + (pa[1] - pb[1]) * d[1]) / n2;
        min = min.min(ratio);
        done += 1;
    }
    Ok(min)
}

/// Outcome of the derivative-increment check.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LipschitzReport {
    /// Indices `(k, l)` with both `(k+1, l)` and `(k, l+1)` in the norm table.
    pub indices: Vec<(usize, usize)>,
    pub checked: usize,
    pub violations: usize,
}

/// Indices `(k, l)` whose increment is bounded by the norm table.
pub fn lipschitz_indices(cert: &Certificate) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = Vec::new();
    for &((a, b), _) in &cert.c_table {
        for (k, l) in [(a.wrapping_sub(1), b), (a, b.wrapping_sub(1))] {
            if k == usize::MAX || l == usize::MAX || v.contains(&(k, l)) {
                continue;
            }
            if cert.norm(k + 1, l).is_some() && cert.norm(k, l + 1).is_some() {
                v.push((k, l));
            }
        }
    }
    v.sort_unstable();
    v
}

/// Checks `|F^{(k+l)}_{x^k y^l}(z) − F^{(k+l)}_{x^k y^l}(0)| ≤ R (C_{k+1,l} + C_{k,l+1})`
/// at about `samples` cell-centred grid points of `U`, for every applicable index.
pub fn check_derivative_increments(
    function: &FramedFunction,
    cert: &Certificate,
    samples: usize,
) -> Result<LipschitzReport, Error> {
    let indices = lipschitz_indices(cert);
    let mut report = LipschitzReport {
        indices: indices.clone(),
        ..LipschitzReport::default()
    };
    if indices.is_empty() {
        return Ok(report);
    }
    let trunc = Truncation::new(
        indices.iter().map(|&(k, l)| k + l).max().unwrap_or(0),
        indices.iter().map(|&(k, _)| k).max().unwrap_or(0),
        indices.iter().map(|&(_, l)| l).max().unwrap_or(0),
    );
    let at0 = function.jet([0.0, 0.0], trunc)?;
    let bounds: Vec<f64> = indices
        .iter()
        .map(|&(k, l)| {
            let c = cert.norm(k + 1, l).unwrap_or(0.0) + cert.norm(k, l + 1).unwrap_or(0.0);
            cert.r * c + LIPSCHITZ_SLACK
        })
        .collect();
    let side = (libm::ceil(libm::sqrt(samples as f64)) as usize).max(1);
    for i in 0..side {
        for j in 0..side {
            let cell = |t: usize| cert.r * (2.0 * (t as f64 + 0.5) / side as f64 - 1.0);
            let jet = function.jet([cell(i), cell(j)], trunc)?;
            for (&(k, l), &bound) in indices.iter().zip(&bounds) {
                let diff = libm::fabs(jet.derivative(k, l)? - at0.derivative(k, l)?);
                report.checked += 1;
                if !(diff <= bound) {
                    report.violations += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Damped Newton solve of `φ(z) = q` from `z = q`; `None` unless the residual
/// drops below [`INVERSION_TOLERANCE`] with every iterate inside `U`.
pub fn invert_phi(map: &NormalFormMap, cert: &Certificate, q: [f64; 2]) -> Option<[f64; 2]> {
    let norm = |v: [f64; 2]| libm::hypot(v[0], v[1]);
    let mut z = q;
    if !cert.contains(z) {
        return None;
    }
    let (mut phi, mut jac) = map.phi_with_jacobian(z).ok()?;
    let mut res = [phi[0] - q[0], phi[1] - q[1]];
    for _ in 0..=MAX_INVERSION_ITERATIONS {
        if norm(res) < INVERSION_TOLERANCE {
            return Some(z);
        }
        let inv = crate::chain::invert2(jac)?;
        let step = [
            inv[0][0] * res[0] + inv[0][1] * res[1],
            inv[1][0] * res[0] + inv[1][1] * res[1],
        ];
        let mut alpha = 1.0;
        loop {
            let trial = [z[0] - alpha * step[0], z[1] - alpha * step[1]];
            if cert.contains(trial) {
                if let Ok((p, j)) = map.phi_with_jacobian(trial) {
                    let r = [p[0] - q[0], p[1] - q[1]];
                    if norm(r) < norm(res) {
                        (z, phi, jac, res) = (trial, p, j, r);
                        break;
                    }
                }
            }
            alpha *= 0.5;
            if alpha < 1e-4 {
                return None;
            }
        }
    }
    let _ = phi;
    None
}

/// Fraction of `probes` random targets in the open disk of radius `(1 − C) R`
/// that [`invert_phi`] recovers.
pub fn check_disk_coverage(
    map: &NormalFormMap,
    cert: &Certificate,
    probes: usize,
    seed: u64,
) -> f64 {
    if probes == 0 {
        return 1.0;
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let rho = (1.0 - cert.c_bound) * cert.r;
    let mut ok = 0;
    for _ in 0..probes {
        let r = rho * libm::sqrt(unit(&mut rng));
        let t = 2.0 * core::f64::consts::PI * unit(&mut rng);
        let q = [r * libm::cos(t), r * libm::sin(t)];
        if invert_phi(map, cert, q).is_some() {
            ok += 1;
        }
    }
    ok as f64 / probes as f64
}

/// Sample counts and seed for [`verify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub grid: usize,
    pub pairs: usize,
    pub lipschitz_samples: usize,
    pub probes: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid: 41,
            pairs: 10_000,
            lipschitz_samples: 1000,
            probes: 100,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationStats {
    pub grid_size: usize,
    pub max_residual: f64,
    /// `max(1, sup |F|)` over the grid.
    pub f_scale: f64,
    pub max_jac_deviation: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub monotonicity_pairs: usize,
    pub min_monotonicity_ratio: f64,
    pub lipschitz_checked: usize,
    pub lipschitz_violations: usize,
    pub disk_probes: usize,
    pub disk_coverage: f64,
    pub seed: u64,
}

/// Pass/fail outcome of each check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Verdicts {
    pub residual: bool,
    pub jacobian: bool,
    pub h_range: bool,
    pub monotonicity: bool,
    pub lipschitz: bool,
    pub disk_coverage: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.residual
            && self.jacobian
            && self.h_range
            && self.monotonicity
            && self.lipschitz
            && self.disk_coverage
    }
}

impl VerificationStats {
    pub fn verdicts(&self, cert: &Certificate) -> Verdicts {
        Verdicts {
            residual: self.max_residual <= RESIDUAL_TOLERANCE * self.f_scale,
            jacobian: self.max_jac_deviation < cert.c_bound,
            h_range: self.min_h > 0.5 && self.max_h < 1.5,
            monotonicity: self.min_monotonicity_ratio >= 1.0 - cert.c_bound,
            lipschitz: self.lipschitz_violations == 0,
            disk_coverage: self.disk_coverage == 1.0,
        }
    }
}

/// Summarizes grid samples.
pub fn grid_stats(samples: &[Sample]) -> (f64, f64, f64, f64, f64) {
    samples.iter().fold(
        (0.0f64, 1.0f64, 0.0f64, f64::INFINITY, f64::NEG_INFINITY),
        |(res, fs, jd, lo, hi), s| {
            (
                res.max(s.residual),
                fs.max(libm::fabs(s.f)),
                jd.max(s.jac_dev),
                lo.min(s.h),
                hi.max(s.h),
            )
        },
    )
}

/// Runs every sampled check; returns the statistics and the grid samples.
pub fn verify(
    map: &NormalFormMap,
    cert: &Certificate,
    opts: &VerifyOptions,
) -> Result<(VerificationStats, Vec<Sample>), Error> {
    let samples = grid_samples(map, cert, opts.grid)?;
    let (max_residual, f_scale, max_jac_deviation, min_h, max_h) = grid_stats(&samples);
    let lip = check_derivative_increments(&map.function, cert, opts.lipschitz_samples)?;
    let stats = VerificationStats {
        grid_size: opts.grid,
        max_residual,
        f_scale,
        max_jac_deviation,
        min_h,
        max_h,
        monotonicity_pairs: opts.pairs,
        min_monotonicity_ratio: check_monotonicity(map, cert, opts.pairs, opts.seed)?,
        lipschitz_checked: lip.checked,
        lipschitz_violations: lip.violations,
        disk_probes: opts.probes,
        disk_coverage: check_disk_coverage(map, cert, opts.probes, opts.seed.wrapping_add(1)),
        seed: opts.seed,
    };
    Ok((stats, samples))
}
