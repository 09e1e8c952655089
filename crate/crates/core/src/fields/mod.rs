//! The solution `u(ε, ·)` rebuilt from a solved triple, its rescaled and
//! limiting forms, the Dirichlet energy and log-log scaling fits.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, scaled, Point};
use crate::potential::kernel::s3;
use crate::potential::{cross_block, jump_check, BlockKind, LayerField};
use crate::system::{Problem, UnknownTriple};

/// Relative distance to a boundary below which point evaluation is refused.
pub const BOUNDARY_GAP: f64 = 1e-6;

/// Relative tolerance of the constant-term cancellation in [`SolutionFields::energy`].
pub const CANCELLATION_TOL: f64 = 1e-8;

/// Boundary-flux evaluation of `∫ |∇u|²` split into its pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub energy: f64,
    /// `∫_{∂Ω^o} (u - c) ∂_ν u`.
    pub outer_term: f64,
    /// `ε² ∫_{∂ω^i} (u(εt) - c) ∂_ν u(εt)`, entering with a minus sign.
    pub inner_term: f64,
    /// `c (∫ ∂_ν u over ∂Ω^o - ∫ over ε∂ω^i)`, zero up to discretization.
    pub constant_term: f64,
    pub cancellation_ok: bool,
}

/// `u(ε, ·)` for a solved triple.
#[derive(Debug, Clone)]
pub struct SolutionFields<'p> {
    problem: &'p Problem,
    pub eps: f64,
    pub triple: UnknownTriple,
    /// `ξ / (δ(ε) ε²)`.
    pub xi_scaled: f64,
    outer: LayerField<'p>,
    inner: LayerField<'p>,
}

impl<'p> SolutionFields<'p> {
    pub fn new(problem: &'p Problem, eps: f64, triple: UnknownTriple) -> Result<Self> {
        problem.check_eps(eps)?;
        let d = &problem.data;
        let xi_scaled = triple.xi / d.family.xi_divisor(eps);
        if !xi_scaled.is_finite() {
            return Err(Error::NonFinite("xi_scaled"));
        }
        let outer = LayerField::new(&d.outer, &triple.mu_o)?;
        let inner = LayerField::new(&d.inner, &triple.mu_i)?;
        Ok(SolutionFields {
            problem,
            eps,
            triple,
            xi_scaled,
            outer,
            inner,
        })
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        let d = &self.problem.data;
        let r = norm(x);
        if !x.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("evaluation point"));
        }
        let ro = d.outer.radius_towards(x);
        let ri = self.eps * d.inner.radius_towards(x);
        if r >= ro || r <= ri {
            return Err(Error::OutsideDomain);
        }
        let gap = (ro - r).min(r - ri);
        let threshold = BOUNDARY_GAP * ro;
        if gap < threshold {
            return Err(Error::TooCloseToSurface { distance: gap, threshold });
        }
        Ok(())
    }

    /// The two single layers at `x`: `(∫ S(x-y) μ^o dσ_y, ∫ S(x-εs) μ^i dσ_s)`.
    pub fn layers(&self, x: &Point) -> Result<(f64, f64)> {
        self.check_point(x)?;
        let e = self.eps;
        Ok((self.outer.value(x), self.inner.value(&scaled(x, 1.0 / e)) / e))
    }

    pub fn eval_u(&self, x: &Point) -> Result<f64> {
        let (o, i) = self.layers(x)?;
        Ok(o + i + self.xi_scaled)
    }

    /// `u(ε, εt)` with the inner layer evaluated at `t` directly.
    pub fn eval_u_rescaled(&self, t: &Point) -> Result<f64> {
        let (o, i) = self.rescaled_parts(t)?;
        Ok(o + i / self.eps + self.xi_scaled)
    }

    /// `ε (u(ε, εt) - ξ/(δ ε²))`, which tends to the limiting microscopic field.
    pub fn microscopic(&self, t: &Point) -> Result<f64> {
        let (o, i) = self.rescaled_parts(t)?;
        Ok(self.eps * o + i)
    }

    fn rescaled_parts(&self, t: &Point) -> Result<(f64, f64)> {
        let d = &self.problem.data;
        let x = scaled(t, self.eps);
        if d.inner.contains(t) || !d.outer.contains(&x) {
            return Err(Error::OutsideDomain);
        }
        Ok((self.outer.value(&x), self.inner.value(t)))
    }

    /// Dirichlet energy from boundary fluxes given by the jump relations.
    pub fn energy(&self) -> Result<EnergyBreakdown> {
        let p = self.problem;
        let d = &p.data;
        let e = self.eps;
        let mu_o = DVector::from_column_slice(&self.triple.mu_o.values);
        let mu_i = DVector::from_column_slice(&self.triple.mu_i.values);
        let a_oi = cross_block(BlockKind::AdjointDoubleLayer, &d.inner, e, &d.outer, 1.0)?;
        let b_oi = cross_block(BlockKind::SingleLayer, &d.inner, e, &d.outer, 1.0)?;
        let k_io = cross_block(BlockKind::AdjointDoubleLayer, &d.outer, 1.0, &d.inner, e)?;
        let v_io = cross_block(BlockKind::SingleLayer, &d.outer, 1.0, &d.inner, e)?;
        let q_o = &p.outer_op * &mu_o + &a_oi.matrix * &mu_i;
        let q_i = &p.inner_op * &mu_i + &k_io.matrix * &mu_o * (e * e);
        let u_o = &p.outer_blocks().single.matrix * &mu_o + &b_oi.matrix * &mu_i;
        let u_i = &v_io.matrix * &mu_o + &p.inner_blocks().single.matrix * &mu_i / e;
        let pair = |s: &crate::geometry::Surface, a: &DVector<f64>, b: &DVector<f64>| {
            s.weights.iter().zip(a.iter().zip(b.iter())).map(|(w, (x, y))| w * x * y).sum::<f64>()
        };
        let outer_term = pair(&d.outer, &u_o, &q_o);
        let inner_term = pair(&d.inner, &u_i, &q_i);
        let flux_o = d.outer.integrate(q_o.as_slice());
        let flux_i = d.inner.integrate(q_i.as_slice());
        let c = self.xi_scaled;
        let constant_term = c * (flux_o - flux_i);
        let flux_scale = d.outer.integrate(&q_o.iter().map(|v| v.abs()).collect::<Vec<_>>())
            + d.inner.integrate(&q_i.iter().map(|v| v.abs()).collect::<Vec<_>>());
        let cancellation_ok = constant_term.abs() <= CANCELLATION_TOL * c.abs() * flux_scale.max(f64::MIN_POSITIVE);
        if !cancellation_ok {
            log::warn!(
                "energy constant term {constant_term:.3e} does not cancel (ε = {e}, c = {c:.3e}, flux scale {flux_scale:.3e})"
            );
        }
        Ok(EnergyBreakdown {
            energy: outer_term - inner_term + constant_term,
            outer_term,
            inner_term,
            constant_term,
            cancellation_ok,
        })
    }
}

/// Fields of the limiting system: `ũ_M` on `Ω^o` and `ũ_m` outside `ω^i`.
#[derive(Debug, Clone)]
pub struct LimitFields<'p> {
    problem: &'p Problem,
    pub triple: UnknownTriple,
    outer: LayerField<'p>,
    inner: LayerField<'p>,
    /// `∫ g^o dσ`.
    pub outer_flux: f64,
}

impl<'p> LimitFields<'p> {
    pub fn new(problem: &'p Problem, triple: UnknownTriple) -> Result<Self> {
        let d = &problem.data;
        let outer = LayerField::new(&d.outer, &triple.mu_o)?;
        let inner = LayerField::new(&d.inner, &triple.mu_i)?;
        Ok(LimitFields {
            problem,
            triple,
            outer,
            inner,
            outer_flux: d.g_o.integral(&d.outer),
        })
    }

    /// `ũ_M(x) + S(x) ∫ g^o dσ`.
    pub fn macroscopic_limit(&self, x: &Point) -> Result<f64> {
        let d = &self.problem.data;
        let r = norm(x);
        if r <= BOUNDARY_GAP * d.outer.max_radius() {
            return Err(Error::TooCloseToOrigin);
        }
        if !d.outer.contains(x) {
            return Err(Error::OutsideDomain);
        }
        Ok(self.outer.value(x) + s3(x) * self.outer_flux)
    }

    /// `ũ_m(t) = ∫ S(t-s) μ̃^i dσ_s`.
    pub fn microscopic_limit(&self, t: &Point) -> Result<f64> {
        if self.problem.data.inner.contains(t) {
            return Err(Error::InsideInnerDomain);
        }
        Ok(self.inner.value(t))
    }

    /// Total charge of `μ̃^i`.
    pub fn inner_charge(&self) -> f64 {
        self.inner.charge()
    }

    /// `∂_ν ũ_m - F̃(d₀ ũ_m + ξ̃, η₀) - r₀ g^i` at an inner node, with the
    /// exterior normal derivative from one-sided finite differences of step `h`.
    pub fn robin_residual(&self, node: usize, h: f64) -> Result<f64> {
        let p = self.problem;
        let d = &p.data;
        let (_, exterior) = jump_check(&d.inner, &self.triple.mu_i, node, h)?;
        let trace: f64 = (0..d.inner.len())
            .map(|k| p.inner_blocks().single.matrix[(node, k)] * self.triple.mu_i.values[k])
            .sum();
        let f = &d.family;
        let rhs = d.nonlinearity.value(f.d0() * trace + self.triple.xi, f.eta0()) + f.r0() * d.g_i.values[node];
        Ok(exterior - rhs)
    }

    /// Outward normal derivative of the macroscopic limit at an outer node,
    /// extrapolated from three interior points at spacing `h`.
    pub fn macroscopic_normal_derivative(&self, node: usize, h: f64) -> Result<f64> {
        let d = &self.problem.data;
        let x = d.outer.nodes[node];
        let nu = d.outer.normals[node];
        let at = |s: f64| self.macroscopic_limit(&crate::geometry::add(&x, &scaled(&nu, -s)));
        Ok((2.5 * at(h)? - 4.0 * at(2.0 * h)? + 1.5 * at(3.0 * h)?) / h)
    }
}

/// Least-squares fit of `log value = slope · log ε + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Minimum span of a scaling fit, in decades of `ε`.
pub const MIN_FIT_DECADES: f64 = 0.9;

pub fn fit_scaling(samples: &[(f64, f64)]) -> Result<ScalingFit> {
    for &(e, v) in samples {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveValue(v));
        }
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::NonPositiveEps(e));
        }
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let decades = if samples.is_empty() { 0.0 } else { (hi / lo).log10() };
    if samples.len() < 4 || decades < MIN_FIT_DECADES {
        return Err(Error::InsufficientSamples {
            count: samples.len(),
            decades,
        });
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(ScalingFit { slope, intercept, r2 })
}

/// `n` points on the sphere of radius `radius`, spread along a golden-angle spiral.
pub fn probe_points(n: usize, radius: f64) -> Vec<Point> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2 * k + 1) as f64 / n as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            [radius * s * phi.cos(), radius * s * phi.sin(), radius * z]
        })
        .collect()
}
