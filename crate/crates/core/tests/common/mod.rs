//! Shared test oracles, independent of the library's computational paths.
//!
//! The matrix exponential here is a plain Taylor series under scaling and
//! squaring on raw 2x2 arrays, refined by step halving until the result stops
//! changing; it shares no code with the closed-form propagator it checks.

#![allow(dead_code)]

use num_complex::Complex64;
use qflip_core::Operator2;

pub type Mat = [[Complex64; 2]; 2];

pub fn mat_identity() -> Mat {
    [
        [Complex64::ONE, Complex64::ZERO],
        [Complex64::ZERO, Complex64::ONE],
    ]
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[Complex64::ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat_max_diff(a: &Mat, b: &Mat) -> f64 {
    let mut d = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

/// Taylor-series exponential, summed to machine saturation.
fn expm_taylor(m: &Mat) -> Mat {
    let mut sum = mat_identity();
    let mut term = mat_identity();
    for k in 1..60 {
        term = mat_mul(&term, m);
        let scale = Complex64::new(1.0 / k as f64, 0.0);
        for row in term.iter_mut() {
            for e in row.iter_mut() {
                *e *= scale;
            }
        }
        let mut next = sum;
        for i in 0..2 {
            for j in 0..2 {
                next[i][j] += term[i][j];
            }
        }
        if mat_max_diff(&next, &sum) == 0.0 {
            return next;
        }
        sum = next;
    }
    sum
}

/// `exp(M)` by scaling and squaring, halving the step until the result
/// changes by less than 1e-13 entrywise.
pub fn expm(m: &Mat) -> Mat {
    let mut halvings = 0u32;
    let mut prev = expm_scaled(m, halvings);
    loop {
        halvings += 1;
        let next = expm_scaled(m, halvings);
        if mat_max_diff(&prev, &next) < 1e-13 || halvings > 40 {
            return next;
        }
        prev = next;
    }
}

fn expm_scaled(m: &Mat, halvings: u32) -> Mat {
    let scale = Complex64::new(1.0 / f64::powi(2.0, halvings as i32), 0.0);
    let mut reduced = *m;
    for row in reduced.iter_mut() {
        for e in row.iter_mut() {
            *e *= scale;
        }
    }
    let mut out = expm_taylor(&reduced);
    for _ in 0..halvings {
        out = mat_mul(&out, &out);
    }
    out
}

/// Oracle propagator `exp(-i (a sx + eta sz) dt / 2)` as an [`Operator2`].
pub fn oracle_step(a: f64, eta: f64, dt: f64) -> Operator2 {
    let scale = Complex64::new(0.0, -dt / 2.0);
    let generator: Mat = [
        [
            Complex64::new(eta, 0.0) * scale,
            Complex64::new(a, 0.0) * scale,
        ],
        [
            Complex64::new(a, 0.0) * scale,
            Complex64::new(-eta, 0.0) * scale,
        ],
    ];
    to_operator(&expm(&generator))
}

pub fn to_operator(m: &Mat) -> Operator2 {
    Operator2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

pub fn from_operator(op: &Operator2) -> Mat {
    [
        [op.entry(0, 0), op.entry(0, 1)],
        [op.entry(1, 0), op.entry(1, 1)],
    ]
}

/// Central finite differences of `objective` around `amplitudes`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(objective: F, amplitudes: &[f64], delta: f64) -> Vec<f64> {
    let mut grad = Vec::with_capacity(amplitudes.len());
    let mut work = amplitudes.to_vec();
    for m in 0..amplitudes.len() {
        work[m] = amplitudes[m] + delta;
        let plus = objective(&work);
        work[m] = amplitudes[m] - delta;
        let minus = objective(&work);
        work[m] = amplitudes[m];
        grad.push((plus - minus) / (2.0 * delta));
    }
    grad
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn relative_l2_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    l2_norm(&diff) / l2_norm(b)
}

/// Upper quantile of the chi-square distribution by the Wilson-Hilferty
/// approximation; `z` is the standard-normal quantile of the same level.
pub fn chi_square_quantile(dof: f64, z: f64) -> f64 {
    let c = 2.0 / (9.0 * dof);
    dof * (1.0 - c + z * c.sqrt()).powi(3)
}

/// Poisson probability mass function, computed by direct recursion.
pub fn poisson_pmf(mean: f64, k: usize) -> f64 {
    let mut p = (-mean).exp();
    for i in 1..=k {
        p *= mean / i as f64;
    }
    p
}
