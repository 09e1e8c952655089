//! Polar quadrature about a point of the parameter sphere.
//!
//! The parameter sphere is rotated so that the singular (or near-singular)
//! point sits at the pole. In the rotated coordinates `(θ', φ')` the solid
//! angle element `sin θ' dθ' dφ'` cancels the `1/|x - y|` behaviour of both
//! weakly singular kernels, leaving a smooth integrand that is integrated by
//! Gauss–Legendre in `θ'` and the trapezoid rule in `φ'`. Densities are
//! evaluated off the node grid through their spherical-harmonic projection.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::geometry::harmonics::{self, Angles};
use crate::geometry::quadrature::gauss_legendre_on;
use crate::geometry::{Point, Surface};

/// Discrete spherical-harmonic analysis on a surface's node grid.
#[derive(Debug, Clone)]
pub struct Projector {
    pub degree: usize,
    /// `(degree + 1)^2 × N`: row `lm`, column `k` holds `W_k Y_lm(p_k)`.
    pub analysis: DMatrix<f64>,
}

impl Projector {
    pub fn new(surface: &Surface) -> Self {
        let degree = surface.band_limit();
        let nb = harmonics::basis_len(degree);
        let n = surface.len();
        let mut analysis = DMatrix::zeros(nb, n);
        let mut y = vec![0.0; nb];
        let mut basis = harmonics::Basis::new(degree);
        for k in 0..n {
            basis.eval(&surface.angles[k], &mut y);
            for (i, v) in y.iter().enumerate() {
                analysis[(i, k)] = surface.sphere_weights[k] * v;
            }
        }
        Projector { degree, analysis }
    }

    pub fn coefficients(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let nb = self.analysis.nrows();
        let mut c = vec![0.0; nb];
        for k in 0..n {
            let v = values[k];
            if v == 0.0 {
                continue;
            }
            let col = self.analysis.column(k);
            for i in 0..nb {
                c[i] += col[i] * v;
            }
        }
        c
    }

    pub fn synthesize(&self, basis: &mut harmonics::Basis, coeffs: &[f64], a: &Angles, scratch: &mut [f64]) -> f64 {
        basis.eval(a, scratch);
        scratch.iter().zip(coeffs).map(|(y, c)| y * c).sum()
    }
}

/// Nodes in the rotated polar angle `θ'` and the number of azimuthal nodes.
#[derive(Debug, Clone)]
pub struct PolarRule {
    pub theta: Vec<f64>,
    /// Gauss weight times `sin θ'`.
    pub theta_weights: Vec<f64>,
    pub n_phi: usize,
}

impl PolarRule {
    /// Rule for on-surface (singular) integrals over a grid of the given order.
    pub fn singular(order: usize) -> Self {
        let n_theta = order + order / 2 + 4;
        let (t, w) = gauss_legendre_on(n_theta, 0.0, PI);
        PolarRule {
            theta_weights: t.iter().zip(&w).map(|(t, w)| w * t.sin()).collect(),
            theta: t,
            n_phi: 2 * order + 4,
        }
    }

    /// Rule resolving a near-singularity of angular width `scale` at the pole:
    /// geometrically graded panels `[0, s], [s, 2s], ...` followed by uniform
    /// panels up to `π`.
    pub fn graded(order: usize, scale: f64) -> Self {
        let per_panel = 12;
        let mut breaks = vec![0.0];
        let mut b = scale.clamp(1e-10, PI / 8.0);
        while b < PI / 8.0 {
            breaks.push(b);
            b *= 2.0;
        }
        let uniform = ((order as f64 / 4.0).ceil() as usize).max(8);
        let start = PI / 8.0;
        for i in 0..=uniform {
            breaks.push(start + (PI - start) * i as f64 / uniform as f64);
        }
        let mut theta = Vec::new();
        let mut theta_weights = Vec::new();
        for w in breaks.windows(2) {
            let (t, g) = gauss_legendre_on(per_panel, w[0], w[1]);
            for (t, g) in t.into_iter().zip(g) {
                theta_weights.push(g * t.sin());
                theta.push(t);
            }
        }
        PolarRule {
            theta,
            theta_weights,
            n_phi: 2 * order + 4,
        }
    }

    /// Visit every rotated node about the pole `pole` with its solid-angle weight.
    pub fn for_each(&self, pole: &Point, f: impl FnMut(&Angles, f64)) {
        let (e1, e2) = frame(pole);
        self.for_each_in_frame(pole, &e1, &e2, f)
    }

    /// As [`PolarRule::for_each`] with an explicit tangent frame.
    pub fn for_each_in_frame(&self, pole: &Point, e1: &Point, e2: &Point, mut f: impl FnMut(&Angles, f64)) {
        let dphi = 2.0 * PI / self.n_phi as f64;
        let trig: Vec<(f64, f64)> = (0..self.n_phi).map(|j| (j as f64 * dphi).sin_cos()).collect();
        for (t, wt) in self.theta.iter().zip(&self.theta_weights) {
            let (st, ct) = t.sin_cos();
            for &(sp, cp) in &trig {
                let d = [
                    st * (cp * e1[0] + sp * e2[0]) + ct * pole[0],
                    st * (cp * e1[1] + sp * e2[1]) + ct * pole[1],
                    st * (cp * e1[2] + sp * e2[2]) + ct * pole[2],
                ];
                f(&Angles::from_direction(d), wt * dphi);
            }
        }
    }
}

/// Orthonormal pair spanning the tangent plane of the unit sphere at `p`.
fn frame(p: &Point) -> (Point, Point) {
    let a = if p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = a[0] * p[0] + a[1] * p[1] + a[2] * p[2];
    let mut e1 = [a[0] - d * p[0], a[1] - d * p[1], a[2] - d * p[2]];
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for c in e1.iter_mut() {
        *c /= n;
    }
    let e2 = [
        p[1] * e1[2] - p[2] * e1[1],
        p[2] * e1[0] - p[0] * e1[2],
        p[0] * e1[1] - p[1] * e1[0],
    ];
    (e1, e2)
}
