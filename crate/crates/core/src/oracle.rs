//! Closed-form references: the radial annulus problem in `R^n` and the
//! limiting system on concentric unit spheres.

use crate::error::{Error, Result};
use crate::potential::unit_sphere_area;
use crate::system::Nonlinearity;

/// Largest `|ξ - ξ_lin|` searched for a sign change of the radial equation.
pub const BRACKET_LIMIT: f64 = 1e6;

fn check_n(n: usize) {
    assert!(n >= 3, "dimension must be at least 3, got {n}");
}

/// Radial solution of `Δu = 0` in `ε < |x| < 1` with `∂_r u = a` at `|x| = 1`
/// and `∂_r u = δ u + b/ρ` at `|x| = ε`.
pub fn annulus_solution(n: usize, a: f64, b: f64, delta: f64, rho: f64, eps: f64, r: f64) -> Result<f64> {
    check_n(n);
    if !(eps > 0.0) {
        return Err(Error::NonPositiveEps(eps));
    }
    if !(eps..=1.0).contains(&r) {
        return Err(Error::RadiusOutOfRange { r, lo: eps, hi: 1.0 });
    }
    let nf = n as f64;
    let en1 = eps.powi(n as i32 - 1);
    Ok(a / ((2.0 - nf) * r.powi(n as i32 - 2)) + (a - b * en1 / rho + a * delta * eps / (nf - 2.0)) / (delta * en1))
}

/// `∂_r` of [`annulus_solution`]: `a r^{1-n}`.
pub fn annulus_radial_derivative(n: usize, a: f64, r: f64) -> f64 {
    check_n(n);
    a * r.powi(1 - n as i32)
}

/// Dirichlet energy of the annulus solution: `a² s_n/(n-2) · ε^{2-n} (1 - ε^{n-2})`.
pub fn annulus_energy(n: usize, a: f64, eps: f64) -> Result<f64> {
    check_n(n);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    let e = eps.powi(n as i32 - 2);
    Ok(a * a * unit_sphere_area(n) / (n as f64 - 2.0) / e * (1.0 - e))
}

/// Limit constant of the linear problem: `a - b r0 + a d0/(n-2)`.
pub fn linear_limit_xi(n: usize, a: f64, b: f64, d0: f64, r0: f64) -> f64 {
    check_n(n);
    a - b * r0 + a * d0 / (n as f64 - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialRoot {
    pub xi: f64,
    pub mu_i_const: f64,
    pub converged: bool,
}

/// Root of `a = F̃(ξ - a d0/(n-2), η0) + b r0`, the limiting system on
/// concentric unit spheres where `μ^i ≡ a`. The sign change closest to the
/// linear root is taken.
pub fn radial_limit_root(
    n: usize,
    a: f64,
    b: f64,
    d0: f64,
    r0: f64,
    f: Nonlinearity,
    eta0: f64,
) -> Result<RadialRoot> {
    check_n(n);
    let shift = a * d0 / (n as f64 - 2.0);
    let g = |xi: f64| f.value(xi - shift, eta0) + b * r0 - a;
    let dg = |xi: f64| f.d_tau(xi - shift, eta0);
    let center = linear_limit_xi(n, a, b, d0, r0);
    let found = |xi: f64| RadialRoot {
        xi,
        mu_i_const: a,
        converged: true,
    };
    if g(center) == 0.0 {
        return Ok(found(center));
    }
    let steps = 64;
    let mut reach = 1.0;
    while reach <= BRACKET_LIMIT {
        let h = reach / steps as f64;
        for k in 0..steps {
            for side in [1.0, -1.0] {
                let lo = center + side * k as f64 * h;
                let hi = center + side * (k + 1) as f64 * h;
                let (glo, ghi) = (g(lo), g(hi));
                if ghi == 0.0 {
                    return Ok(found(hi));
                }
                if glo.signum() != ghi.signum() {
                    let (xi, converged) = refine(&g, &dg, lo.min(hi), lo.max(hi));
                    return Ok(RadialRoot {
                        xi,
                        mu_i_const: a,
                        converged,
                    });
                }
            }
        }
        reach *= 4.0;
    }
    Err(Error::NoBracketFound(BRACKET_LIMIT))
}

/// Safeguarded Newton on a bracket: Newton steps that leave the bracket are
/// replaced by bisection.
fn refine(g: &impl Fn(f64) -> f64, dg: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, bool) {
    let glo = g(lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return (x, true);
        }
        if gx.signum() == glo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let d = dg(x);
        let newton = x - gx / d;
        let next = if d != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return (next, true);
        }
        x = next;
    }
    (x, (hi - lo) <= 1e-12 * x.abs().max(1.0))
}
