//! Smooth closed star-shaped surfaces in R³ and their tensor-product
//! quadrature.
//!
//! A surface is the image of the unit sphere under `p ↦ scale · r(p) · p`,
//! where `r` is a constant or a finite real spherical-harmonic expansion.
//! Nodes sit on a Gauss–Legendre grid in `cos θ` times a uniform grid in
//! `φ`, so densities on the surface are functions of the direction `p` and
//! can be projected onto spherical harmonics exactly up to degree
//! `order - 1`.

pub mod harmonics;
pub mod quadrature;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use harmonics::Angles;

pub type Point = [f64; 3];

/// Highest spherical-harmonic degree accepted in a radial expansion.
pub const MAX_SHAPE_DEGREE: usize = 8;

/// Smallest radius tolerated anywhere on a star-shaped surface.
pub const MIN_RADIUS: f64 = 1e-3;

type RadialScratch = (harmonics::Basis, Vec<f64>, Vec<f64>, Vec<f64>);

thread_local! {
    static RADIAL_SCRATCH: std::cell::RefCell<RadialScratch> =
        std::cell::RefCell::new((harmonics::Basis::new(0), vec![0.0], vec![0.0], vec![0.0]));
}

/// Shape of a closed surface, star-shaped about the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceSpec {
    UnitSphere,
    ScaledSphere {
        radius: f64,
    },
    StarShaped {
        #[serde(default = "one")]
        radius: f64,
        /// `(l, m, coefficient)` triples of the radial perturbation.
        #[serde(default)]
        harmonics: Vec<(usize, i64, f64)>,
    },
}

fn one() -> f64 {
    1.0
}

impl SurfaceSpec {
    pub fn star(radius: f64, harmonics: &[(usize, i64, f64)]) -> Self {
        SurfaceSpec::StarShaped {
            radius,
            harmonics: harmonics.to_vec(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SurfaceSpec::UnitSphere => Ok(()),
            SurfaceSpec::ScaledSphere { radius } => {
                if *radius > 0.0 && radius.is_finite() {
                    Ok(())
                } else {
                    Err(Error::NonPositiveRadius {
                        radius: *radius,
                        theta: 0.0,
                        phi: 0.0,
                    })
                }
            }
            SurfaceSpec::StarShaped { radius, harmonics } => {
                if !radius.is_finite() {
                    return Err(Error::NonFinite("base radius"));
                }
                for &(l, m, c) in harmonics {
                    if l > MAX_SHAPE_DEGREE {
                        return Err(Error::HarmonicDegree(l));
                    }
                    if m.unsigned_abs() as usize > l {
                        return Err(Error::config("harmonics", format!("|m| = {} exceeds l = {l}", m.abs())));
                    }
                    if !c.is_finite() {
                        return Err(Error::NonFinite("harmonic coefficient"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Radial function and its angular derivatives `(r, ∂θ r, ∂φ r / sin θ)`.
    pub fn radial(&self, a: &Angles) -> (f64, f64, f64) {
        match self {
            SurfaceSpec::UnitSphere => (1.0, 0.0, 0.0),
            SurfaceSpec::ScaledSphere { radius } => (*radius, 0.0, 0.0),
            SurfaceSpec::StarShaped { radius, harmonics } => {
                if harmonics.is_empty() {
                    return (*radius, 0.0, 0.0);
                }
                let degree = harmonics.iter().map(|h| h.0).max().unwrap_or(0);
                RADIAL_SCRATCH.with(|cell| {
                    let mut scratch = cell.borrow_mut();
                    if scratch.0.degree() != degree {
                        let n = harmonics::basis_len(degree);
                        *scratch = (harmonics::Basis::new(degree), vec![0.0; n], vec![0.0; n], vec![0.0; n]);
                    }
                    let (basis, v, dt, dp) = &mut *scratch;
                    basis.eval_with_gradient(a, v, dt, dp);
                    harmonics.iter().fold((*radius, 0.0, 0.0), |(r, rt, rp), &(l, m, c)| {
                        let k = harmonics::index(l, m);
                        (r + c * v[k], rt + c * dt[k], rp + c * dp[k])
                    })
                })
            }
        }
    }

    pub fn is_sphere(&self) -> bool {
        match self {
            SurfaceSpec::UnitSphere | SurfaceSpec::ScaledSphere { .. } => true,
            SurfaceSpec::StarShaped { harmonics, .. } => harmonics.iter().all(|h| h.2 == 0.0),
        }
    }

    /// Radius of a spherical spec.
    pub fn sphere_radius(&self) -> Option<f64> {
        if !self.is_sphere() {
            return None;
        }
        Some(match self {
            SurfaceSpec::UnitSphere => 1.0,
            SurfaceSpec::ScaledSphere { radius } => *radius,
            SurfaceSpec::StarShaped { radius, .. } => *radius,
        })
    }
}

/// Geometry of the parameterization at one direction.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub position: Point,
    pub normal: Point,
    /// Area element relative to the solid-angle measure of the unit sphere.
    pub jacobian: f64,
}

/// Evaluate the parameterization of `spec` (dilated by `scale`) at a direction.
pub fn surface_point(spec: &SurfaceSpec, scale: f64, a: &Angles) -> SurfacePoint {
    let (r, rt, rp) = spec.radial(a);
    let (sp, cp) = a.phi.sin_cos();
    let (st, ct) = (a.sin_theta, a.cos_theta);
    let er = [st * cp, st * sp, ct];
    let et = [ct * cp, ct * sp, -st];
    let ef = [-sp, cp, 0.0];
    let mut n = [0.0; 3];
    for i in 0..3 {
        n[i] = r * er[i] - rt * et[i] - rp * ef[i];
    }
    let len = norm(&n);
    SurfacePoint {
        position: [scale * r * er[0], scale * r * er[1], scale * r * er[2]],
        normal: [n[0] / len, n[1] / len, n[2] / len],
        jacobian: scale * scale * r * len,
    }
}

/// Quadrature discretization of a closed surface.
#[derive(Debug, Clone)]
pub struct Surface {
    pub nodes: Vec<Point>,
    pub normals: Vec<Point>,
    /// Area element times quadrature weight.
    pub weights: Vec<f64>,
    /// `(i_theta, j_phi)` grid index of each node.
    pub param: Vec<(usize, usize)>,
    /// Solid-angle quadrature weight of each node on the parameter sphere.
    pub sphere_weights: Vec<f64>,
    pub angles: Vec<Angles>,
    pub spec: SurfaceSpec,
    pub order: usize,
    /// Dilation applied to the spec (1 unless rescaled).
    pub scale: f64,
}

pub fn build_surface(spec: &SurfaceSpec, order: usize) -> Result<Surface> {
    build_scaled(spec, order, 1.0)
}

fn build_scaled(spec: &SurfaceSpec, order: usize, scale: f64) -> Result<Surface> {
    if order < 4 {
        return Err(Error::InvalidOrder(order));
    }
    spec.validate()?;
    let (x, w) = quadrature::gauss_legendre(order);
    let nphi = 2 * order;
    let dphi = 2.0 * PI / nphi as f64;
    let n = order * nphi;
    let mut s = Surface {
        nodes: Vec::with_capacity(n),
        normals: Vec::with_capacity(n),
        weights: Vec::with_capacity(n),
        param: Vec::with_capacity(n),
        sphere_weights: Vec::with_capacity(n),
        angles: Vec::with_capacity(n),
        spec: spec.clone(),
        order,
        scale,
    };
    // theta ascending means cos(theta) descending.
    for i in 0..order {
        let ct = x[order - 1 - i];
        let wt = w[order - 1 - i];
        for j in 0..nphi {
            let a = Angles {
                cos_theta: ct,
                sin_theta: (1.0 - ct * ct).sqrt(),
                phi: j as f64 * dphi,
            };
            let r = spec.radial(&a).0;
            if r < MIN_RADIUS {
                return Err(Error::NonPositiveRadius {
                    radius: r,
                    theta: ct.acos(),
                    phi: a.phi,
                });
            }
            let p = surface_point(spec, scale, &a);
            s.nodes.push(p.position);
            s.normals.push(p.normal);
            s.weights.push(wt * dphi * p.jacobian);
            s.sphere_weights.push(wt * dphi);
            s.param.push((i, j));
            s.angles.push(a);
        }
    }
    Ok(s)
}

/// Dilate a surface about the origin.
pub fn rescale_surface(s: &Surface, eps: f64) -> Result<Surface> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::NonPositiveEps(eps));
    }
    let mut out = s.clone();
    for p in &mut out.nodes {
        for c in p.iter_mut() {
            *c *= eps;
        }
    }
    for w in &mut out.weights {
        *w *= eps * eps;
    }
    out.scale *= eps;
    Ok(out)
}

/// A point interior to a surface that is star-shaped about the origin.
pub fn interior_point(_s: &Surface) -> Point {
    [0.0; 3]
}

impl Surface {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Maximum spherical-harmonic degree resolved by the node grid.
    pub fn band_limit(&self) -> usize {
        self.order - 1
    }

    /// Characteristic node spacing: largest radius times the polar step `π / order`.
    pub fn mesh_size(&self) -> f64 {
        self.max_radius() * PI / self.order as f64
    }

    pub fn max_radius(&self) -> f64 {
        self.nodes.iter().map(norm).fold(0.0, f64::max)
    }

    /// Distance from `x` to the radial surface point in the direction of `x`.
    pub fn radius_towards(&self, x: &Point) -> f64 {
        let a = Angles::from_direction(*x);
        self.scale * self.spec.radial(&a).0
    }

    /// True when `x` lies strictly inside the surface.
    pub fn contains(&self, x: &Point) -> bool {
        let r = norm(x);
        r == 0.0 || r < self.radius_towards(x)
    }

    /// Evaluate the parameterization at an arbitrary direction.
    pub fn point_at(&self, a: &Angles) -> SurfacePoint {
        surface_point(&self.spec, self.scale, a)
    }

    /// Rebuild the same shape on a finer grid.
    pub fn refined(&self, order: usize) -> Result<Surface> {
        build_scaled(&self.spec, order, self.scale)
    }

    /// Smallest distance from `x` to a quadrature node.
    pub fn node_distance(&self, x: &Point) -> f64 {
        self.nodes.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min)
    }

    /// Quadrature of a nodal function.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

pub fn norm(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

pub fn dist(x: &Point, y: &Point) -> f64 {
    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    norm(&d)
}

pub fn dot(x: &Point, y: &Point) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

pub fn scaled(x: &Point, s: f64) -> Point {
    [x[0] * s, x[1] * s, x[2] * s]
}

pub fn sub(x: &Point, y: &Point) -> Point {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

pub fn add(x: &Point, y: &Point) -> Point {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perturbed() -> SurfaceSpec {
        SurfaceSpec::star(1.0, &[(2, 0, 0.1), (3, 1, 0.05), (4, -2, 0.03)])
    }

    #[test]
    fn unit_sphere_node_count_and_area() {
        let s = build_surface(&SurfaceSpec::UnitSphere, 16).unwrap();
        assert_eq!(s.len(), 512);
        assert!((s.area() - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn scaled_sphere_area() {
        let s = build_surface(&SurfaceSpec::ScaledSphere { radius: 2.0 }, 16).unwrap();
        assert!((s.area() - 16.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn degenerate_star_is_unit_sphere() {
        let a = build_surface(&SurfaceSpec::UnitSphere, 8).unwrap();
        let b = build_surface(&SurfaceSpec::star(1.0, &[(2, 1, 0.0)]), 8).unwrap();
        for (p, q) in a.nodes.iter().zip(&b.nodes) {
            assert!(dist(p, q) < 1e-15);
        }
    }

    #[test]
    fn invalid_order_and_radius() {
        assert!(matches!(
            build_surface(&SurfaceSpec::UnitSphere, 3),
            Err(Error::InvalidOrder(3))
        ));
        assert!(matches!(
            build_surface(&SurfaceSpec::ScaledSphere { radius: -1.0 }, 8),
            Err(Error::NonPositiveRadius { .. })
        ));
        assert!(matches!(
            build_surface(&SurfaceSpec::star(0.1, &[(2, 0, 1.0)]), 8),
            Err(Error::NonPositiveRadius { .. })
        ));
        assert!(matches!(
            build_surface(&SurfaceSpec::star(1.0, &[(9, 0, 0.01)]), 8),
            Err(Error::HarmonicDegree(9))
        ));
    }

    #[test]
    fn rescale_scales_nodes_and_weights() {
        let s = build_surface(&SurfaceSpec::UnitSphere, 16).unwrap();
        let half = rescale_surface(&s, 0.5).unwrap();
        assert!((half.area() - PI).abs() < 1e-10);
        let same = rescale_surface(&s, 1.0).unwrap();
        assert_eq!(same.nodes, s.nodes);
        assert_eq!(same.weights, s.weights);
        let small = rescale_surface(&s, 0.1).unwrap();
        for k in 0..s.len() {
            assert!(dist(&small.nodes[k], &scaled(&s.nodes[k], 0.1)) < 1e-16);
            assert_eq!(small.normals[k], s.normals[k]);
        }
        assert!(matches!(rescale_surface(&s, 0.0), Err(Error::NonPositiveEps(_))));
        assert!(matches!(rescale_surface(&s, -2.0), Err(Error::NonPositiveEps(_))));
    }

    #[test]
    fn normals_unit_and_outward() {
        let s = build_surface(&perturbed(), 16).unwrap();
        for (n, x) in s.normals.iter().zip(&s.nodes) {
            assert!((norm(n) - 1.0).abs() < 1e-12);
            assert!(dot(n, x) > 0.0);
        }
        assert!(s.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn normals_match_finite_difference_tangents() {
        let spec = perturbed();
        let h = 1e-6;
        for &(theta, phi) in &[(0.4, 0.3), (1.2, 2.5), (2.7, -1.0)] {
            let p = surface_point(&spec, 1.0, &Angles::from_theta_phi(theta, phi));
            let f = |t: f64, f: f64| surface_point(&spec, 1.0, &Angles::from_theta_phi(t, f)).position;
            let tt = scaled(&sub(&f(theta + h, phi), &f(theta - h, phi)), 0.5 / h);
            let tp = scaled(&sub(&f(theta, phi + h), &f(theta, phi - h)), 0.5 / h);
            assert!(dot(&tt, &p.normal).abs() < 1e-8);
            assert!(dot(&tp, &p.normal).abs() < 1e-8);
            // |t_theta x t_phi| = jacobian * sin(theta)
            let c = [
                tt[1] * tp[2] - tt[2] * tp[1],
                tt[2] * tp[0] - tt[0] * tp[2],
                tt[0] * tp[1] - tt[1] * tp[0],
            ];
            assert!((norm(&c) - p.jacobian * theta.sin()).abs() < 1e-7);
        }
    }

    #[test]
    fn interior_point_is_origin() {
        let s = build_surface(&perturbed(), 8).unwrap();
        assert_eq!(interior_point(&s), [0.0; 3]);
        assert!(s.contains(&[0.0, 0.0, 0.0]));
        assert!(!s.contains(&[0.0, 0.0, 1.5]));
    }
}
