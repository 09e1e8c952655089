//! The nonlinear boundary integral system on the two surfaces and its
//! `ε = 0` limit.
//!
//! Unknowns are the outer density `μ^o` (zero weighted mean), the inner
//! density `μ^i` (on the undilated hole surface) and the scalar `ξ`. The
//! equations are, for `n = 3`,
//!
//! ```text
//! Λ^o = (-½ + W*_o) μ^o + A_oi μ^i - g^o
//! Λ^i = (½ + W*_i) μ^i + ε² K_io μ^o - F̃(τ, γ₂) - γ₃ g^i
//! τ   = ε γ₁ V_io μ^o + γ₁ V_i μ^i + ξ
//! ```
//!
//! with `A_oi[x, s] = ν_o(x)·∇S(x - εs)`, `K_io[t, y] = ν_i(t)·∇S(εt - y)`
//! and `V_io[t, y] = S(εt - y)`, closed by `Σ w μ^o / Σ w = 0`.

mod family;
mod newton;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{harmonics, norm, Surface};
use crate::potential::kernel::dn_s3;
use crate::potential::{cross_block, self_blocks, BlockKind, Density, SelfBlocks, SEPARATION_FACTOR};

pub use family::{EpsFamily, Nonlinearity, PowerLaw};
pub use newton::{NewtonOptions, NewtonReport};

/// Boundary datum: a constant plus a real spherical-harmonic expansion in the
/// parameter direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Datum {
    Constant(f64),
    Expansion {
        #[serde(default)]
        constant: f64,
        /// `(l, m, coefficient)` triples.
        #[serde(default)]
        harmonics: Vec<(usize, i64, f64)>,
    },
}

impl Datum {
    pub fn validate(&self, field: &str) -> Result<()> {
        match self {
            Datum::Constant(c) if !c.is_finite() => Err(Error::config(field, "value must be finite")),
            Datum::Expansion { constant, harmonics } => {
                if !constant.is_finite() {
                    return Err(Error::config(field, "constant must be finite"));
                }
                for &(l, m, c) in harmonics {
                    if m.unsigned_abs() as usize > l || !c.is_finite() {
                        return Err(Error::config(field, format!("bad harmonic term ({l}, {m}, {c})")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, surface: &Surface) -> Density {
        match self {
            Datum::Constant(c) => Density::constant(surface, *c),
            Datum::Expansion { constant, harmonics } => {
                let degree = harmonics.iter().map(|h| h.0).max().unwrap_or(0);
                let mut basis = harmonics::Basis::new(degree);
                let mut y = vec![0.0; basis.len()];
                let values = surface
                    .angles
                    .iter()
                    .map(|a| {
                        basis.eval(a, &mut y);
                        constant + harmonics.iter().map(|&(l, m, c)| c * y[harmonics::index(l, m)]).sum::<f64>()
                    })
                    .collect();
                Density { values }
            }
        }
    }
}

/// `(μ^o, μ^i, ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnknownTriple {
    pub mu_o: Density,
    pub mu_i: Density,
    pub xi: f64,
}

impl UnknownTriple {
    pub fn zeros(outer: &Surface, inner: &Surface) -> Self {
        UnknownTriple {
            mu_o: Density::zeros(outer),
            mu_i: Density::zeros(inner),
            xi: 0.0,
        }
    }

    fn pack(&self) -> DVector<f64> {
        let no = self.mu_o.len();
        let ni = self.mu_i.len();
        let mut x = DVector::zeros(no + ni + 1);
        x.rows_mut(0, no).copy_from_slice(&self.mu_o.values);
        x.rows_mut(no, ni).copy_from_slice(&self.mu_i.values);
        x[no + ni] = self.xi;
        x
    }

    fn unpack(x: &DVector<f64>, no: usize, ni: usize) -> Self {
        UnknownTriple {
            mu_o: Density {
                values: x.rows(0, no).iter().copied().collect(),
            },
            mu_i: Density {
                values: x.rows(no, ni).iter().copied().collect(),
            },
            xi: x[no + ni],
        }
    }
}

/// Pointwise residuals of the two boundary equations and the mean constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub outer: Vec<f64>,
    pub inner: Vec<f64>,
    /// Weighted mean of `μ^o`.
    pub mean: f64,
}

impl Residual {
    pub fn sup_norm(&self) -> f64 {
        self.outer
            .iter()
            .chain(&self.inner)
            .chain(std::iter::once(&self.mean))
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone)]
pub struct ProblemData {
    pub outer: Surface,
    /// Hole shape at unit scale.
    pub inner: Surface,
    pub g_o: Density,
    pub g_i: Density,
    pub nonlinearity: Nonlinearity,
    pub family: EpsFamily,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Eps(f64),
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    pub integral_nonzero: bool,
    pub sign_ok: bool,
    /// `Σ w ∂_τF̃` over the inner surface.
    pub integral: f64,
    pub min_derivative: f64,
}

impl SolvabilityReport {
    pub fn passed(&self) -> bool {
        self.integral_nonzero && self.sign_ok
    }
}

#[derive(Debug, Clone)]
pub struct LimitSolution {
    pub triple: UnknownTriple,
    pub report: NewtonReport,
    pub solvability: SolvabilityReport,
}

impl LimitSolution {
    /// The root, or `SolvabilityViolated` if the post-check failed.
    pub fn require_solvable(&self) -> Result<&UnknownTriple> {
        if self.solvability.passed() {
            Ok(&self.triple)
        } else {
            Err(Error::SolvabilityViolated {
                integral_nonzero: self.solvability.integral_nonzero,
                sign_ok: self.solvability.sign_ok,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpsSolution {
    pub eps: f64,
    pub triple: UnknownTriple,
    pub report: NewtonReport,
}

/// Tolerance of the solvability post-check, relative to the hole area.
pub const SOLVABILITY_TOL: f64 = 1e-8;

/// Matrices of one regime, with every power of `ε` applied.
struct Stage {
    coupling_oi: DMatrix<f64>,
    coupling_io: Option<DMatrix<f64>>,
    tau_o: Option<DMatrix<f64>>,
    tau_i: f64,
    eta: f64,
    robin: f64,
}

/// Problem data with the `ε`-independent self-interaction blocks.
#[derive(Debug, Clone)]
pub struct Problem {
    pub data: ProblemData,
    outer_blocks: SelfBlocks,
    inner_blocks: SelfBlocks,
    pub(crate) outer_op: DMatrix<f64>,
    pub(crate) inner_op: DMatrix<f64>,
    outer_area: f64,
}

impl Problem {
    pub fn new(data: ProblemData) -> Result<Self> {
        data.g_o.check(&data.outer)?;
        data.g_i.check(&data.inner)?;
        for g in [&data.g_o, &data.g_i] {
            if g.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("boundary datum"));
            }
        }
        if data.inner.scale != 1.0 {
            return Err(Error::config("inner", "hole surface must be given at unit scale"));
        }
        data.nonlinearity.validate()?;
        data.family.validate()?;
        let outer_blocks = self_blocks(&data.outer);
        let inner_blocks = if data.inner.spec == data.outer.spec && data.inner.order == data.outer.order {
            outer_blocks.clone()
        } else {
            self_blocks(&data.inner)
        };
        let no = data.outer.len();
        let ni = data.inner.len();
        let outer_op = &outer_blocks.adjoint.matrix - DMatrix::identity(no, no) * 0.5;
        let inner_op = &inner_blocks.adjoint.matrix + DMatrix::identity(ni, ni) * 0.5;
        let outer_area = data.outer.area();
        Ok(Problem {
            data,
            outer_blocks,
            inner_blocks,
            outer_op,
            inner_op,
            outer_area,
        })
    }

    pub fn outer_blocks(&self) -> &SelfBlocks {
        &self.outer_blocks
    }

    pub fn inner_blocks(&self) -> &SelfBlocks {
        &self.inner_blocks
    }

    /// Supremum of admissible `ε`: the dilated hole must stay inside the
    /// outer surface.
    pub fn max_eps(&self) -> f64 {
        let inner_max = self.data.inner.max_radius();
        let outer_min = self.data.outer.nodes.iter().map(norm).fold(f64::INFINITY, f64::min);
        outer_min / inner_max
    }

    pub(crate) fn check_eps(&self, eps: f64) -> Result<()> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::NonPositiveEps(eps));
        }
        let bound = self.max_eps();
        if eps >= bound {
            let gap = (bound - eps) * self.data.inner.max_radius();
            return Err(Error::SurfacesOverlap {
                distance: gap,
                threshold: SEPARATION_FACTOR * eps * self.data.inner.mesh_size(),
            });
        }
        Ok(())
    }

    fn stage(&self, regime: Regime) -> Result<Stage> {
        let d = &self.data;
        match regime {
            Regime::Eps(eps) => {
                self.check_eps(eps)?;
                let f = &d.family;
                let a_oi = cross_block(BlockKind::AdjointDoubleLayer, &d.inner, eps, &d.outer, 1.0)?;
                let k_io = cross_block(BlockKind::AdjointDoubleLayer, &d.outer, 1.0, &d.inner, eps)?;
                let v_io = cross_block(BlockKind::SingleLayer, &d.outer, 1.0, &d.inner, eps)?;
                let g1 = f.gamma1(eps);
                Ok(Stage {
                    coupling_oi: a_oi.matrix,
                    coupling_io: Some(k_io.matrix * (eps * eps)),
                    tau_o: Some(v_io.matrix * (eps * g1)),
                    tau_i: g1,
                    eta: f.gamma2(eps),
                    robin: f.gamma3(eps),
                })
            }
            Regime::Limit => {
                let no = d.outer.len();
                let ni = d.inner.len();
                let dipole: Vec<f64> = (0..no).map(|k| dn_s3(&d.outer.normals[k], &d.outer.nodes[k])).collect();
                let coupling_oi = DMatrix::from_fn(no, ni, |i, j| dipole[i] * d.inner.weights[j]);
                Ok(Stage {
                    coupling_oi,
                    coupling_io: None,
                    tau_o: None,
                    tau_i: d.family.d0(),
                    eta: d.family.eta0(),
                    robin: d.family.r0(),
                })
            }
        }
    }

    fn sizes(&self) -> (usize, usize) {
        (self.data.outer.len(), self.data.inner.len())
    }

    fn tau(&self, st: &Stage, mu_o: &DVector<f64>, mu_i: &DVector<f64>, xi: f64) -> DVector<f64> {
        let mut tau = &self.inner_blocks.single.matrix * mu_i * st.tau_i;
        if let Some(t) = &st.tau_o {
            tau += t * mu_o;
        }
        tau.add_scalar_mut(xi);
        tau
    }

    fn residual_vec(&self, st: &Stage, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (no, ni) = self.sizes();
        let d = &self.data;
        let mu_o = x.rows(0, no).into_owned();
        let mu_i = x.rows(no, ni).into_owned();
        let xi = x[no + ni];
        let ro = &self.outer_op * &mu_o + &st.coupling_oi * &mu_i - DVector::from_column_slice(&d.g_o.values);
        let tau = self.tau(st, &mu_o, &mu_i, xi);
        let mut ri = &self.inner_op * &mu_i;
        if let Some(c) = &st.coupling_io {
            ri += c * &mu_o;
        }
        for k in 0..ni {
            ri[k] -= d.nonlinearity.value(tau[k], st.eta) + st.robin * d.g_i.values[k];
        }
        let mean = d.outer.integrate(mu_o.as_slice()) / self.outer_area;
        let mut r = DVector::zeros(no + ni + 1);
        r.rows_mut(0, no).copy_from(&ro);
        r.rows_mut(no, ni).copy_from(&ri);
        r[no + ni] = mean;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteResidual);
        }
        Ok(r)
    }

    fn jacobian_mat(&self, st: &Stage, x: &DVector<f64>) -> DMatrix<f64> {
        let (no, ni) = self.sizes();
        let d = &self.data;
        let n = no + ni + 1;
        let mu_o = x.rows(0, no).into_owned();
        let mu_i = x.rows(no, ni).into_owned();
        let tau = self.tau(st, &mu_o, &mu_i, x[no + ni]);
        let fp: Vec<f64> = tau.iter().map(|t| d.nonlinearity.d_tau(*t, st.eta)).collect();
        let mut j = DMatrix::zeros(n, n);
        j.view_mut((0, 0), (no, no)).copy_from(&self.outer_op);
        j.view_mut((0, no), (no, ni)).copy_from(&st.coupling_oi);
        let v_i = &self.inner_blocks.single.matrix;
        for r in 0..ni {
            for c in 0..ni {
                j[(no + r, no + c)] = self.inner_op[(r, c)] - fp[r] * st.tau_i * v_i[(r, c)];
            }
            j[(no + r, n - 1)] = -fp[r];
        }
        if let Some(k) = &st.coupling_io {
            let t = st.tau_o.as_ref().expect("eps stage carries both couplings");
            for r in 0..ni {
                for c in 0..no {
                    j[(no + r, c)] = k[(r, c)] - fp[r] * t[(r, c)];
                }
            }
        }
        for c in 0..no {
            j[(n - 1, c)] = d.outer.weights[c] / self.outer_area;
        }
        j
    }

    fn split(&self, r: DVector<f64>) -> Residual {
        let (no, ni) = self.sizes();
        Residual {
            outer: r.rows(0, no).iter().copied().collect(),
            inner: r.rows(no, ni).iter().copied().collect(),
            mean: r[no + ni],
        }
    }

    fn check_triple(&self, u: &UnknownTriple) -> Result<()> {
        u.mu_o.check(&self.data.outer)?;
        u.mu_i.check(&self.data.inner)?;
        if !u.xi.is_finite() || u.mu_o.values.iter().chain(&u.mu_i.values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("unknowns"));
        }
        Ok(())
    }

    pub fn residual(&self, regime: Regime, u: &UnknownTriple) -> Result<Residual> {
        self.check_triple(u)?;
        let st = self.stage(regime)?;
        Ok(self.split(self.residual_vec(&st, &u.pack())?))
    }

    pub fn residual_eps(&self, eps: f64, u: &UnknownTriple) -> Result<Residual> {
        self.residual(Regime::Eps(eps), u)
    }

    pub fn residual_limit(&self, u: &UnknownTriple) -> Result<Residual> {
        self.residual(Regime::Limit, u)
    }

    /// Analytic Jacobian of `(Λ^o, Λ^i, mean)` with respect to `(μ^o, μ^i, ξ)`.
    pub fn jacobian(&self, regime: Regime, u: &UnknownTriple) -> Result<DMatrix<f64>> {
        self.check_triple(u)?;
        let st = self.stage(regime)?;
        Ok(self.jacobian_mat(&st, &u.pack()))
    }

    fn project(&self, x: &mut DVector<f64>) {
        let no = self.data.outer.len();
        let mean = self.data.outer.integrate(&x.as_slice()[..no]) / self.outer_area;
        for v in x.rows_mut(0, no).iter_mut() {
            *v -= mean;
        }
    }

    fn solve(&self, regime: Regime, init: &UnknownTriple, opts: &NewtonOptions) -> Result<(UnknownTriple, NewtonReport)> {
        self.check_triple(init)?;
        let st = self.stage(regime)?;
        let frozen = self.data.nonlinearity.is_linear().then(|| self.jacobian_mat(&st, &init.pack()));
        let (x, report) = newton::newton(
            init.pack(),
            |x| self.residual_vec(&st, x),
            |x| Ok(frozen.clone().unwrap_or_else(|| self.jacobian_mat(&st, x))),
            |x| self.project(x),
            opts,
        )?;
        let (no, ni) = self.sizes();
        Ok((UnknownTriple::unpack(&x, no, ni), report))
    }

    /// Default starting point: `μ^o = 0`, `μ^i` constant with the compatible
    /// total charge, and `ξ` chosen so that the limit `τ` has zero mean.
    pub fn default_init(&self) -> UnknownTriple {
        let d = &self.data;
        let charge = d.g_o.integral(&d.outer) / d.inner.area();
        let mu_i = Density::constant(&d.inner, charge);
        let v = self.inner_blocks.single.apply(&mu_i.values);
        let xi = -d.family.d0() * d.inner.integrate(&v) / d.inner.area();
        UnknownTriple {
            mu_o: Density::zeros(&d.outer),
            mu_i,
            xi,
        }
    }

    /// Newton solve of the limiting system followed by the solvability check.
    pub fn solve_limit(&self, init: Option<&UnknownTriple>, opts: &NewtonOptions) -> Result<LimitSolution> {
        let start = init.cloned().unwrap_or_else(|| self.default_init());
        let (triple, report) = self.solve(Regime::Limit, &start, opts)?;
        let solvability = self.solvability_check(&triple);
        if !solvability.passed() {
            log::warn!(
                "limit root violates the solvability conditions (integral {:.3e}, min derivative {:.3e})",
                solvability.integral,
                solvability.min_derivative
            );
        }
        Ok(LimitSolution {
            triple,
            report,
            solvability,
        })
    }

    pub fn solve_at_eps(&self, eps: f64, init: &UnknownTriple, opts: &NewtonOptions) -> Result<EpsSolution> {
        let (triple, report) = self.solve(Regime::Eps(eps), init, opts)?;
        Ok(EpsSolution { eps, triple, report })
    }

    pub fn solvability_check(&self, u: &UnknownTriple) -> SolvabilityReport {
        self.solvability_check_with(u, SOLVABILITY_TOL)
    }

    pub fn solvability_check_with(&self, u: &UnknownTriple, tol: f64) -> SolvabilityReport {
        let d = &self.data;
        let mu_i = DVector::from_column_slice(&u.mu_i.values);
        let d0 = d.family.d0();
        let tau = &self.inner_blocks.single.matrix * &mu_i * d0;
        let fp: Vec<f64> = tau.iter().map(|t| d.nonlinearity.d_tau(t + u.xi, d.family.eta0())).collect();
        let integral = d.inner.integrate(&fp);
        let min_derivative = fp.iter().copied().fold(f64::INFINITY, f64::min);
        SolvabilityReport {
            integral_nonzero: integral.abs() > tol * d.inner.area(),
            sign_ok: d0 == 0.0 || min_derivative >= -tol,
            integral,
            min_derivative,
        }
    }

    /// Solve along a decreasing `ε` ladder, warm-starting each point from the
    /// previous one. Failures carry the `ε` and the Newton log.
    pub fn continuation(&self, ladder: &[f64], start: &UnknownTriple, opts: &NewtonOptions) -> Result<Vec<EpsSolution>> {
        let mut out: Vec<EpsSolution> = Vec::with_capacity(ladder.len());
        for &eps in ladder {
            let init = out.last().map(|s| &s.triple).unwrap_or(start);
            out.push(self.solve_at_eps(eps, init, opts).map_err(|e| wrap(eps, e))?);
        }
        Ok(out)
    }

    /// Independent solves of every ladder point, each started from `start`.
    pub fn solve_many(&self, ladder: &[f64], start: &UnknownTriple, opts: &NewtonOptions) -> Result<Vec<EpsSolution>> {
        ladder
            .par_iter()
            .map(|&eps| self.solve_at_eps(eps, start, opts).map_err(|e| wrap(eps, e)))
            .collect()
    }
}

fn wrap(eps: f64, e: Error) -> Error {
    let log = match &e {
        Error::NewtonDiverged { log, .. } => log.clone(),
        _ => Vec::new(),
    };
    Error::SolveFailed {
        eps,
        source: Box::new(e),
        log,
    }
}

/// Geometric ladder from `start` down to `end` inclusive with at least
/// `per_decade` points per decade.
pub fn eps_ladder(start: f64, end: f64, per_decade: f64) -> Result<Vec<f64>> {
    if !(start > end && end > 0.0) || !start.is_finite() {
        return Err(Error::config("sweep", format!("need eps_start > eps_end > 0, got {start} and {end}")));
    }
    if !(per_decade > 0.0) || !per_decade.is_finite() {
        return Err(Error::config("sweep.points_per_decade", "must be positive"));
    }
    let decades = (start / end).log10();
    let steps = ((decades * per_decade - 1e-9).ceil() as usize).max(1);
    Ok((0..=steps)
        .map(|i| {
            if i == steps {
                end
            } else {
                start * (end / start).powf(i as f64 / steps as f64)
            }
        })
        .collect())
}
