//! Fundamental solution of the Laplacian in R^n, n >= 3.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Area of the unit sphere in R^n: `2 π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// `Γ(n/2)` for a positive integer `n`.
fn gamma_half(n: usize) -> f64 {
    assert!(n > 0);
    if n % 2 == 0 {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        // Γ(1/2) = √π, Γ(k + 1/2) = (k - 1/2) Γ(k - 1/2)
        (0..n / 2).fold(PI.sqrt(), |g, k| g * (k as f64 + 0.5))
    }
}

/// `S_n(x) = 1 / ((2 - n) s_n |x|^{n-2})`.
pub fn fundamental_solution(n: usize, x: &[f64]) -> Result<f64> {
    assert!(n >= 3 && x.len() == n, "dimension mismatch");
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::OriginEvaluation);
    }
    Ok(1.0 / ((2.0 - n as f64) * unit_sphere_area(n) * r.powi(n as i32 - 2)))
}

/// `∇S_n(x) = x / (s_n |x|^n)`.
pub fn grad_fundamental_solution(n: usize, x: &[f64]) -> Result<Vec<f64>> {
    assert!(n >= 3 && x.len() == n, "dimension mismatch");
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::OriginEvaluation);
    }
    let c = 1.0 / (unit_sphere_area(n) * r.powi(n as i32));
    Ok(x.iter().map(|v| c * v).collect())
}

const INV_4PI: f64 = 0.25 / PI;

/// `S_3(d)` without the origin check.
#[inline]
pub(crate) fn s3(d: &[f64; 3]) -> f64 {
    -INV_4PI / (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// `ν · ∇S_3(d)` without the origin check.
#[inline]
pub(crate) fn dn_s3(nu: &[f64; 3], d: &[f64; 3]) -> f64 {
    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    INV_4PI * (nu[0] * d[0] + nu[1] * d[1] + nu[2] * d[2]) / (r2 * r2.sqrt())
}
