//! Layer potentials of the three-dimensional Laplacian.
//!
//! Self-interaction blocks use the rotated polar rule in [`singular`];
//! interactions between disjoint surfaces and far-field evaluation use the
//! plain node quadrature; evaluation close to a surface goes through
//! [`LayerField`].

mod field;
pub mod kernel;
pub mod singular;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::harmonics::{self, Angles};
use crate::geometry::{add, scaled, Point, Surface};
pub use field::LayerField;
pub use kernel::{fundamental_solution, grad_fundamental_solution, unit_sphere_area};
use kernel::{dn_s3, s3};
use singular::{PolarRule, Projector};

/// Off-surface plain quadrature is allowed beyond this many node spacings.
pub const SEPARATION_FACTOR: f64 = 3.0;

/// Nodal values of a density on a surface.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub values: Vec<f64>,
}

impl Density {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("density"));
        }
        Ok(Density { values })
    }

    pub fn zeros(surface: &Surface) -> Self {
        Density {
            values: vec![0.0; surface.len()],
        }
    }

    pub fn constant(surface: &Surface, c: f64) -> Self {
        Density {
            values: vec![c; surface.len()],
        }
    }

    /// Sample a function of the parameter direction at every node.
    pub fn from_fn(surface: &Surface, f: impl FnMut(&harmonics::Angles) -> f64) -> Self {
        Density {
            values: surface.angles.iter().map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check(&self, surface: &Surface) -> Result<()> {
        if self.values.len() != surface.len() {
            return Err(Error::LengthMismatch {
                expected: surface.len(),
                got: self.values.len(),
            });
        }
        Ok(())
    }

    /// Surface integral with the surface's quadrature.
    pub fn integral(&self, surface: &Surface) -> f64 {
        surface.integrate(&self.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    SingleLayer,
    AdjointDoubleLayer,
}

/// Dense Nyström matrix mapping source nodal values to target nodal values.
#[derive(Debug, Clone)]
pub struct OperatorBlock {
    pub matrix: DMatrix<f64>,
    pub kind: BlockKind,
    pub source_scale: f64,
    pub target_scale: f64,
}

impl OperatorBlock {
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.matrix.ncols(), "density length mismatch");
        let v = DVector::from_column_slice(values);
        (&self.matrix * v).as_slice().to_vec()
    }
}

/// Single-layer and adjoint double-layer self-interaction blocks of a surface.
#[derive(Debug, Clone)]
pub struct SelfBlocks {
    pub single: OperatorBlock,
    pub adjoint: OperatorBlock,
}

/// Assemble both weakly singular self-interaction blocks in one pass.
///
/// Nodes on one latitude ring differ only by a rotation about the polar
/// axis. With the rule oriented along `(e_θ, e_φ)` the harmonics at the
/// rotated nodes of the whole ring follow from one evaluation, so each ring
/// reduces to a dense product followed by a rotation of the `±m` pairs.
pub fn self_blocks(src: &Surface) -> SelfBlocks {
    let proj = Projector::new(src);
    let rule = PolarRule::singular(src.order);
    let degree = proj.degree;
    let nb = proj.analysis.nrows();
    let n = src.len();
    let nphi = 2 * src.order;
    let rings: Vec<(DMatrix<f64>, DMatrix<f64>)> = (0..src.order)
        .into_par_iter()
        .map(|i| {
            let a0 = src.angles[i * nphi];
            let (st, ct) = (a0.sin_theta, a0.cos_theta);
            let pole = [st, 0.0, ct];
            let e_theta = [ct, 0.0, -st];
            let e_phi = [0.0, 1.0, 0.0];
            let mut pts = Vec::new();
            rule.for_each_in_frame(&pole, &e_theta, &e_phi, |a, w| pts.push((*a, w)));
            let q = pts.len();
            let mut basis = harmonics::Basis::new(degree);
            let mut y = vec![0.0; nb];
            let mut y0 = DMatrix::zeros(q, nb);
            for (k, (a, _)) in pts.iter().enumerate() {
                basis.eval(a, &mut y);
                for (c, v) in y.iter().enumerate() {
                    y0[(k, c)] = *v;
                }
            }
            let mut kern = DMatrix::zeros(2 * nphi, q);
            for j in 0..nphi {
                let t = i * nphi + j;
                let x = src.nodes[t];
                let nu = src.normals[t];
                let shift = src.angles[t].phi;
                for (k, (a, w)) in pts.iter().enumerate() {
                    let b = Angles { phi: a.phi + shift, ..*a };
                    let sp = src.point_at(&b);
                    let d = [x[0] - sp.position[0], x[1] - sp.position[1], x[2] - sp.position[2]];
                    let w = w * sp.jacobian;
                    kern[(j, k)] = s3(&d) * w;
                    kern[(nphi + j, k)] = dn_s3(&nu, &d) * w;
                }
            }
            let r = &kern * &y0;
            let mut vs = DMatrix::zeros(nphi, nb);
            let mut vd = DMatrix::zeros(nphi, nb);
            for j in 0..nphi {
                let shift = src.angles[i * nphi + j].phi;
                for (out, row) in [(&mut vs, j), (&mut vd, nphi + j)] {
                    for l in 0..=degree {
                        let base = l * l + l;
                        out[(j, base)] = r[(row, base)];
                        for m in 1..=l {
                            let (sm, cm) = (m as f64 * shift).sin_cos();
                            let (p, q) = (r[(row, base + m)], r[(row, base - m)]);
                            out[(j, base + m)] = cm * p - sm * q;
                            out[(j, base - m)] = cm * q + sm * p;
                        }
                    }
                }
            }
            (vs, vd)
        })
        .collect();
    let mut ms = DMatrix::zeros(n, nb);
    let mut md = DMatrix::zeros(n, nb);
    for (i, (vs, vd)) in rings.iter().enumerate() {
        ms.rows_mut(i * nphi, nphi).copy_from(vs);
        md.rows_mut(i * nphi, nphi).copy_from(vd);
    }
    let scale = src.scale;
    SelfBlocks {
        single: OperatorBlock {
            matrix: &ms * &proj.analysis,
            kind: BlockKind::SingleLayer,
            source_scale: scale,
            target_scale: scale,
        },
        adjoint: OperatorBlock {
            matrix: &md * &proj.analysis,
            kind: BlockKind::AdjointDoubleLayer,
            source_scale: scale,
            target_scale: scale,
        },
    }
}

/// Trace of the single layer potential on its own surface.
pub fn single_layer_onsurface(src: &Surface) -> OperatorBlock {
    self_blocks(src).single
}

/// `W*[μ](x) = ∫ ν(x)·∇S₃(x − y) μ(y) dσ_y` on the surface itself.
pub fn adjoint_double_layer(src: &Surface) -> OperatorBlock {
    self_blocks(src).adjoint
}

/// Interaction between two disjoint surfaces dilated by `src_scale` and
/// `tgt_scale`. The integral runs over the source surface in its own
/// (undilated) measure; no power of the scale is applied to the entries.
///
/// When targets come closer than three node spacings, the source density is
/// interpolated onto the coarsest finer grid that restores the separation.
pub fn cross_block(
    kind: BlockKind,
    src: &Surface,
    src_scale: f64,
    tgt: &Surface,
    tgt_scale: f64,
) -> Result<OperatorBlock> {
    for s in [src_scale, tgt_scale] {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NonPositiveEps(s));
        }
    }
    let tgt_nodes: Vec<Point> = tgt.nodes.iter().map(|x| scaled(x, tgt_scale)).collect();
    let min_dist = tgt_nodes
        .par_iter()
        .map(|x| {
            src.nodes
                .iter()
                .map(|y| crate::geometry::dist(x, &scaled(y, src_scale)))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    let spacing = src_scale * src.max_radius() * std::f64::consts::PI;
    let needed = (SEPARATION_FACTOR * spacing / min_dist).ceil();
    if !needed.is_finite() || needed > MAX_CROSS_ORDER as f64 {
        return Err(Error::SurfacesOverlap {
            distance: min_dist,
            threshold: SEPARATION_FACTOR * spacing / MAX_CROSS_ORDER as f64,
        });
    }
    let matrix = if needed as usize <= src.order {
        kernel_matrix(kind, src, src_scale, &tgt_nodes, &tgt.normals)
    } else {
        let fine = src.refined(needed as usize)?;
        let proj = Projector::new(src);
        let mut basis = harmonics::Basis::new(proj.degree);
        let nb = proj.analysis.nrows();
        let mut y = vec![0.0; nb];
        let mut synth = DMatrix::zeros(fine.len(), nb);
        for (k, a) in fine.angles.iter().enumerate() {
            basis.eval(a, &mut y);
            for (c, v) in y.iter().enumerate() {
                synth[(k, c)] = *v;
            }
        }
        let interp = synth * &proj.analysis;
        kernel_matrix(kind, &fine, src_scale, &tgt_nodes, &tgt.normals) * interp
    };
    Ok(OperatorBlock {
        matrix,
        kind,
        source_scale: src_scale,
        target_scale: tgt_scale,
    })
}

/// Largest grid order used to resolve close cross interactions.
pub const MAX_CROSS_ORDER: usize = 96;

fn kernel_matrix(kind: BlockKind, src: &Surface, src_scale: f64, tgt: &[Point], normals: &[Point]) -> DMatrix<f64> {
    let src_nodes: Vec<Point> = src.nodes.iter().map(|y| scaled(y, src_scale)).collect();
    let ns = src.len();
    let rows: Vec<Vec<f64>> = tgt
        .par_iter()
        .zip(normals)
        .map(|(x, nu)| {
            (0..ns)
                .map(|j| {
                    let y = src_nodes[j];
                    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
                    let kern = match kind {
                        BlockKind::SingleLayer => s3(&d),
                        BlockKind::AdjointDoubleLayer => dn_s3(nu, &d),
                    };
                    kern * src.weights[j]
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(tgt.len(), ns, |i, j| rows[i][j])
}

/// Plain node quadrature of the single layer potential away from the surface.
pub fn single_layer_offsurface(src: &Surface, mu: &Density, x: &Point) -> Result<f64> {
    mu.check(src)?;
    let threshold = SEPARATION_FACTOR * src.mesh_size();
    let distance = src.node_distance(x);
    if distance <= threshold {
        return Err(Error::TooCloseToSurface { distance, threshold });
    }
    Ok(plain_sum(src, &mu.values, x))
}

pub(crate) fn plain_sum(src: &Surface, values: &[f64], x: &Point) -> f64 {
    src.nodes
        .iter()
        .zip(&src.weights)
        .zip(values)
        .map(|((y, w), m)| {
            let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
            s3(&d) * w * m
        })
        .sum()
}

/// One-sided second-order finite-difference normal derivatives of the single
/// layer potential at a node, `(interior, exterior)`, each taken in the
/// direction of the outward normal. Test helper for the jump relation.
pub fn jump_check(src: &Surface, mu: &Density, node_index: usize, h: f64) -> Result<(f64, f64)> {
    mu.check(src)?;
    let x = src.nodes[node_index];
    let nu = src.normals[node_index];
    let reach = 0.25 * crate::geometry::norm(&x);
    if !(h > 0.0) || 2.0 * h > reach {
        return Err(Error::TooCloseToSurface {
            distance: h,
            threshold: reach,
        });
    }
    if mu.values.iter().all(|v| *v == 0.0) {
        return Ok((0.0, 0.0));
    }
    let field = LayerField::new(src, mu)?;
    let center = src.angles[node_index];
    let grade = h / crate::geometry::norm(&x);
    let at = |s: f64| field.value_near(&add(&x, &scaled(&nu, s)), &center, grade);
    let u0 = at(0.0);
    let interior = (3.0 * u0 - 4.0 * at(-h) + at(-2.0 * h)) / (2.0 * h);
    let exterior = (-3.0 * u0 + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h);
    Ok((interior, exterior))
}
