//! Orthonormal real spherical harmonics.
//!
//! Index layout: `l * l + l + m` for `-l <= m <= l`. Positive `m` carries
//! `cos(m phi)`, negative `m` carries `sin(|m| phi)`. No Condon–Shortley
//! phase.

use std::f64::consts::{FRAC_1_PI, SQRT_2};

pub fn index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

/// Number of basis functions of degree at most `degree`.
pub fn basis_len(degree: usize) -> usize {
    (degree + 1) * (degree + 1)
}

/// A unit direction in spherical coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Angles {
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub phi: f64,
}

impl Angles {
    pub fn from_direction(d: [f64; 3]) -> Self {
        let rho = d[0].hypot(d[1]);
        let norm = rho.hypot(d[2]);
        Angles {
            cos_theta: d[2] / norm,
            sin_theta: rho / norm,
            phi: d[1].atan2(d[0]),
        }
    }

    pub fn from_theta_phi(theta: f64, phi: f64) -> Self {
        Angles {
            cos_theta: theta.cos(),
            sin_theta: theta.sin(),
            phi,
        }
    }

    pub fn direction(&self) -> [f64; 3] {
        [
            self.sin_theta * self.phi.cos(),
            self.sin_theta * self.phi.sin(),
            self.cos_theta,
        ]
    }
}

/// Precomputed recurrence coefficients for all harmonics up to a degree.
///
/// Evaluation is allocation-free apart from the scratch tables owned by the
/// basis, so one `Basis` per thread is the intended use.
#[derive(Debug, Clone)]
pub struct Basis {
    degree: usize,
    // a_lm, b_lm of the fixed-m recurrence, row-major in (l, m).
    a: Vec<f64>,
    b: Vec<f64>,
    diag: Vec<f64>,
    // sqrt((2l+1)/(2l-1) (l-m)(l+m)) for the theta derivative.
    lower: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    cos_m: Vec<f64>,
    sin_m: Vec<f64>,
}

impl Basis {
    pub fn new(degree: usize) -> Self {
        let stride = degree + 1;
        let mut a = vec![0.0; stride * stride];
        let mut b = vec![0.0; stride * stride];
        let mut lower = vec![0.0; stride * stride];
        for m in 0..=degree {
            for l in m..=degree {
                let (lf, mf) = (l as f64, m as f64);
                if l >= m + 2 {
                    a[l * stride + m] = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    b[l * stride + m] =
                        (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
                }
                if l > m {
                    lower[l * stride + m] = ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf - mf) * (lf + mf)).sqrt();
                }
            }
        }
        let diag = (0..=degree)
            .map(|m| if m == 0 { 0.0 } else { ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() })
            .collect();
        Basis {
            degree,
            a,
            b,
            diag,
            lower,
            p: vec![0.0; stride * stride],
            q: vec![0.0; stride * stride],
            cos_m: vec![0.0; stride],
            sin_m: vec![0.0; stride],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        basis_len(self.degree)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fill `Pbar_l^m(cos θ)` and, if asked, `Pbar_l^m / sin θ` for `m >= 1`.
    fn legendre(&mut self, x: f64, s: f64, with_q: bool) {
        let mut diag = 0.5 * FRAC_1_PI.sqrt();
        let mut diag_q = 0.0;
        for m in 0..=self.degree {
            if m > 0 {
                let f = self.diag[m];
                diag_q = if m == 1 { f * diag } else { f * s * diag_q };
                diag *= f * s;
            }
            fill_column(&mut self.p, &self.a, &self.b, self.degree, m, x, diag);
            if with_q {
                fill_column(&mut self.q, &self.a, &self.b, self.degree, m, x, diag_q);
            }
        }
    }

    fn trig(&mut self, phi: f64) {
        let (s1, c1) = phi.sin_cos();
        self.cos_m[0] = 1.0;
        self.sin_m[0] = 0.0;
        for m in 1..=self.degree {
            self.cos_m[m] = self.cos_m[m - 1] * c1 - self.sin_m[m - 1] * s1;
            self.sin_m[m] = self.sin_m[m - 1] * c1 + self.cos_m[m - 1] * s1;
        }
    }

    /// Values of all harmonics at one direction.
    pub fn eval(&mut self, a: &Angles, out: &mut [f64]) {
        debug_assert!(out.len() >= self.len());
        self.legendre(a.cos_theta, a.sin_theta, false);
        self.trig(a.phi);
        let stride = self.degree + 1;
        for l in 0..=self.degree {
            let base = l * l + l;
            out[base] = self.p[l * stride];
            for m in 1..=l {
                let v = SQRT_2 * self.p[l * stride + m];
                out[base + m] = v * self.cos_m[m];
                out[base - m] = v * self.sin_m[m];
            }
        }
    }

    /// Value, θ-derivative and `(1/sin θ)·φ`-derivative of each harmonic,
    /// all finite at the poles.
    pub fn eval_with_gradient(&mut self, a: &Angles, val: &mut [f64], d_theta: &mut [f64], d_phi_over_sin: &mut [f64]) {
        self.legendre(a.cos_theta, a.sin_theta, true);
        self.trig(a.phi);
        let stride = self.degree + 1;
        let x = a.cos_theta;
        for l in 0..=self.degree {
            let base = l * l + l;
            let lf = l as f64;
            val[base] = self.p[l * stride];
            d_theta[base] = if l >= 1 {
                -(lf * (lf + 1.0)).sqrt() * self.q[l * stride + 1] * a.sin_theta
            } else {
                0.0
            };
            d_phi_over_sin[base] = 0.0;
            for m in 1..=l {
                let i = l * stride + m;
                let below = if l > m { self.lower[i] * self.q[i - stride] } else { 0.0 };
                let dp = lf * x * self.q[i] - below;
                let (cm, sm) = (self.cos_m[m], self.sin_m[m]);
                let v = SQRT_2 * self.p[i];
                let dv = SQRT_2 * dp;
                let qm = SQRT_2 * self.q[i] * m as f64;
                val[base + m] = v * cm;
                val[base - m] = v * sm;
                d_theta[base + m] = dv * cm;
                d_theta[base - m] = dv * sm;
                d_phi_over_sin[base + m] = -qm * sm;
                d_phi_over_sin[base - m] = qm * cm;
            }
        }
    }
}

fn fill_column(table: &mut [f64], a: &[f64], b: &[f64], degree: usize, m: usize, x: f64, seed: f64) {
    let stride = degree + 1;
    table[m * stride + m] = seed;
    if m < degree {
        table[(m + 1) * stride + m] = ((2 * m + 3) as f64).sqrt() * x * seed;
    }
    for l in (m + 2)..=degree {
        let i = l * stride + m;
        table[i] = a[i] * (x * table[i - stride] - b[i] * table[i - 2 * stride]);
    }
}

/// Values of all real harmonics of degree `<= degree` at one direction.
pub fn eval(degree: usize, a: &Angles, out: &mut [f64]) {
    Basis::new(degree).eval(a, out)
}

/// See [`Basis::eval_with_gradient`].
pub fn eval_with_gradient(
    degree: usize,
    a: &Angles,
    val: &mut [f64],
    d_theta: &mut [f64],
    d_phi_over_sin: &mut [f64],
) {
    Basis::new(degree).eval_with_gradient(a, val, d_theta, d_phi_over_sin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::quadrature::gauss_legendre;
    use std::f64::consts::PI;

    fn grid(order: usize) -> Vec<(Angles, f64)> {
        let (x, w) = gauss_legendre(order);
        let nphi = 2 * order;
        let mut out = Vec::new();
        for (xi, wi) in x.iter().zip(&w) {
            for j in 0..nphi {
                let phi = 2.0 * PI * j as f64 / nphi as f64;
                out.push((
                    Angles {
                        cos_theta: *xi,
                        sin_theta: (1.0 - xi * xi).sqrt(),
                        phi,
                    },
                    wi * 2.0 * PI / nphi as f64,
                ));
            }
        }
        out
    }

    #[test]
    fn index_layout() {
        assert_eq!(index(0, 0), 0);
        assert_eq!(index(1, -1), 1);
        assert_eq!(index(1, 0), 2);
        assert_eq!(index(1, 1), 3);
        assert_eq!(index(2, -2), 4);
        assert_eq!(index(8, 8), 80);
    }

    #[test]
    fn orthonormal_on_tensor_grid() {
        let degree = 6;
        let n = basis_len(degree);
        let g = grid(degree + 1);
        let mut gram = vec![0.0; n * n];
        let mut y = vec![0.0; n];
        for (a, w) in &g {
            eval(degree, a, &mut y);
            for i in 0..n {
                for j in 0..n {
                    gram[i * n + j] += w * y[i] * y[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * n + j] - e).abs() < 1e-12, "({i},{j}) = {}", gram[i * n + j]);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let degree = 8;
        let n = basis_len(degree);
        let (mut v, mut dt, mut dp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let (mut vp, mut vm) = (vec![0.0; n], vec![0.0; n]);
        let h = 1e-5;
        for &(theta, phi) in &[(0.3, 1.1), (1.7, -2.0), (2.9, 0.4)] {
            eval_with_gradient(degree, &Angles::from_theta_phi(theta, phi), &mut v, &mut dt, &mut dp);
            eval(degree, &Angles::from_theta_phi(theta + h, phi), &mut vp);
            eval(degree, &Angles::from_theta_phi(theta - h, phi), &mut vm);
            for k in 0..n {
                let fd = (vp[k] - vm[k]) / (2.0 * h);
                assert!((fd - dt[k]).abs() < 1e-7, "theta-derivative k = {k}: {fd} vs {}", dt[k]);
            }
            eval(degree, &Angles::from_theta_phi(theta, phi + h), &mut vp);
            eval(degree, &Angles::from_theta_phi(theta, phi - h), &mut vm);
            for k in 0..n {
                let fd = (vp[k] - vm[k]) / (2.0 * h) / theta.sin();
                assert!((fd - dp[k]).abs() < 1e-7, "phi-derivative k = {k}: {fd} vs {}", dp[k]);
            }
        }
    }

    #[test]
    fn finite_at_the_pole() {
        let degree = 5;
        let n = basis_len(degree);
        let (mut v, mut dt, mut dp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let pole = Angles {
            cos_theta: 1.0,
            sin_theta: 0.0,
            phi: 0.0,
        };
        eval_with_gradient(degree, &pole, &mut v, &mut dt, &mut dp);
        assert!(v.iter().chain(&dt).chain(&dp).all(|x| x.is_finite()));
        // Y_00 is the constant 1/sqrt(4 pi).
        assert!((v[0] - 0.5 / PI.sqrt()).abs() < 1e-15);
    }
}
