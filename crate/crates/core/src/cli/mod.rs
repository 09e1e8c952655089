//! Batch driver: a configured limit solve, an `ε` sweep by continuation,
//! field evaluation at probes, scaling fits and oracle comparisons.

pub mod config;
pub mod report;

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{fit_scaling, probe_points, ScalingFit, SolutionFields};
use crate::geometry::{build_surface, harmonics, norm, Point, Surface, SurfaceSpec};
use crate::oracle::{annulus_energy, annulus_solution, radial_limit_root};
use crate::potential::kernel::dn_s3;
use crate::potential::{jump_check, self_blocks, Density};
use crate::system::{eps_ladder, Datum, Problem, Regime, UnknownTriple};

pub use config::{Format, RunConfig, MIN_RUN_ORDER};
pub use report::{Check, Fits, LimitRow, OracleDeltas, SweepReport, SweepRow, VerifyReport};

/// Smallest quadrature order accepted by `verify`.
pub const MIN_VERIFY_ORDER: usize = 4;

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub quad_order: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    /// Solve sweep points independently from the limit root.
    pub parallel: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(o) = self.quad_order {
            cfg.quad_order = o;
        }
        if let Some(d) = &self.output_dir {
            cfg.outputs.directory = d.clone();
        }
    }
}

/// Exit status for an error: 2 for configuration problems, 3 for solver failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SolveFailed { .. }
        | Error::NewtonDiverged { .. }
        | Error::SingularJacobian
        | Error::NonFiniteResidual
        | Error::SolvabilityViolated { .. } => 3,
        _ => 2,
    }
}

fn inradius(s: &Surface) -> f64 {
    s.nodes.iter().map(norm).fold(f64::INFINITY, f64::min)
}

fn probes_for(cfg: &RunConfig, problem: &Problem) -> Result<Vec<Point>> {
    let probes = match &cfg.probes {
        Some(p) => p.clone(),
        None => probe_points(5, 0.5 * inradius(&problem.data.outer)),
    };
    let eps = cfg.sweep.eps_start;
    for p in &probes {
        let r = norm(p);
        if !problem.data.outer.contains(p) || r <= eps * problem.data.inner.radius_towards(p) {
            return Err(Error::config("probes", format!("{p:?} is not inside the perforated domain at eps = {eps}")));
        }
    }
    Ok(probes)
}

/// Constant `(a, b)` when both surfaces are unit spheres and both data are constant.
fn concentric_constants(cfg: &RunConfig) -> Option<(f64, f64)> {
    let constant = |d: &Datum| match d {
        Datum::Constant(c) => Some(*c),
        Datum::Expansion { constant, harmonics } if harmonics.iter().all(|h| h.2 == 0.0) => Some(*constant),
        _ => None,
    };
    let sphere = |s: &SurfaceSpec| s.sphere_radius() == Some(1.0);
    (sphere(&cfg.outer) && sphere(&cfg.inner)).then_some(())?;
    Some((constant(&cfg.g_o)?, constant(&cfg.g_i)?))
}

fn signed_fit(samples: &[(f64, f64)]) -> Option<ScalingFit> {
    let sign = samples.first()?.1.signum();
    if sign == 0.0 || samples.iter().any(|s| s.1.signum() != sign) {
        return None;
    }
    let abs: Vec<(f64, f64)> = samples.iter().map(|&(e, v)| (e, v.abs())).collect();
    fit_scaling(&abs).ok()
}

/// Runs the configured sweep. The report is returned, not written.
pub fn run(cfg: &RunConfig, parallel: bool) -> Result<SweepReport> {
    cfg.validate(MIN_RUN_ORDER)?;
    let problem = cfg.problem(cfg.quad_order)?;
    let probes = probes_for(cfg, &problem)?;
    let ladder = eps_ladder(cfg.sweep.eps_start, cfg.sweep.eps_end, cfg.sweep.points_per_decade)?;
    if cfg.sweep.eps_start >= problem.max_eps() {
        return Err(Error::config(
            "sweep.eps_start",
            format!("the dilated hole must fit inside the outer surface (eps < {:.4})", problem.max_eps()),
        ));
    }
    let opts = cfg.newton_options();
    let limit = problem.solve_limit(None, &opts).map_err(|e| wrap_limit(e))?;
    let d = &problem.data;
    let compatibility = (limit.triple.mu_i.integral(&d.inner) - d.g_o.integral(&d.outer)).abs();
    let solutions = if parallel {
        problem.solve_many(&ladder, &limit.triple, &opts)?
    } else {
        problem.continuation(&ladder, &limit.triple, &opts)?
    };
    let mut rows = Vec::with_capacity(solutions.len());
    for s in solutions {
        let f = SolutionFields::new(&problem, s.eps, s.triple)?;
        let values = probes.iter().map(|p| f.eval_u(p)).collect::<Result<Vec<_>>>()?;
        let energy = f.energy()?.energy;
        rows.push(SweepRow {
            eps: s.eps,
            xi: f.triple.xi,
            xi_scaled: f.xi_scaled,
            probes: values,
            energy,
            eps_pow_scaled_energy: s.eps * energy,
            iters: s.report.iterations,
            residual: s.report.residual,
        });
    }
    let fits = Fits {
        value: signed_fit(&rows.iter().map(|r| (r.eps, r.probes[0])).collect::<Vec<_>>()),
        energy: signed_fit(&rows.iter().map(|r| (r.eps, r.energy)).collect::<Vec<_>>()),
    };
    let oracle = oracle_deltas(cfg, &problem, &rows, &probes, limit.triple.xi)?;
    Ok(SweepReport {
        probes,
        rows,
        limit: LimitRow {
            xi_tilde: limit.triple.xi,
            compatibility_residual: compatibility,
            integral_nonzero: limit.solvability.integral_nonzero,
            sign_ok: limit.solvability.sign_ok,
            iters: limit.report.iterations,
            residual: limit.report.residual,
        },
        fits,
        oracle,
        provenance: report::provenance(cfg),
    })
}

fn wrap_limit(e: Error) -> Error {
    match e {
        Error::NewtonDiverged { ref log, .. } => Error::SolveFailed {
            eps: 0.0,
            log: log.clone(),
            source: Box::new(e),
        },
        e => e,
    }
}

fn oracle_deltas(
    cfg: &RunConfig,
    problem: &Problem,
    rows: &[SweepRow],
    probes: &[Point],
    xi_tilde: f64,
) -> Result<Option<OracleDeltas>> {
    let Some((a, b)) = concentric_constants(cfg) else {
        return Ok(None);
    };
    let fam = &problem.data.family;
    let root = match radial_limit_root(3, a, b, fam.d0(), fam.r0(), cfg.nonlinearity, fam.eta0()) {
        Ok(r) => r.xi,
        Err(Error::NoBracketFound(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let (mut probe_max, mut energy_max) = (None, None);
    if cfg.nonlinearity.is_linear() {
        let (mut pm, mut em) = (0.0f64, 0.0f64);
        for r in rows {
            let (delta, rho) = (fam.delta.eval(r.eps), fam.rho.eval(r.eps));
            for (p, u) in probes.iter().zip(&r.probes) {
                let exact = annulus_solution(3, a, b, delta, rho, r.eps, norm(p))?;
                pm = pm.max((u - exact).abs() / exact.abs().max(1.0));
            }
            let exact = annulus_energy(3, a, r.eps)?;
            em = em.max((r.energy - exact).abs() / exact.max(1.0));
        }
        probe_max = Some(pm);
        energy_max = Some(em);
    }
    Ok(Some(OracleDeltas {
        xi_tilde: xi_tilde - root,
        probe_max,
        energy_max,
    }))
}

/// Runs the invariant suites at the configured order.
pub fn verify(cfg: &RunConfig, seed: u64) -> Result<VerifyReport> {
    cfg.validate(MIN_VERIFY_ORDER)?;
    let order = cfg.quad_order;
    let tol = cfg.tolerances.quadrature_check;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let sphere = build_surface(&SurfaceSpec::UnitSphere, order)?;
    let blocks = self_blocks(&sphere);
    let one = vec![1.0; sphere.len()];
    let sup = |v: &[f64], target: f64| v.iter().fold(0.0f64, |m, x| m.max((x - target).abs()));
    checks.push(Check::new("sphere single layer = -1", sup(&blocks.single.apply(&one), -1.0), tol));
    checks.push(Check::new("sphere adjoint layer = 1/2", sup(&blocks.adjoint.apply(&one), 0.5), tol));
    checks.push(Check::new("sphere area = 4pi", (sphere.area() - 4.0 * PI).abs(), 1e-10 * 4.0 * PI));

    let problem = cfg.problem(order)?;
    let d = &problem.data;
    for (name, s) in [("outer Gauss flux = 1", &d.outer), ("inner Gauss flux = 1", &d.inner)] {
        let flux: f64 = (0..s.len()).map(|k| s.weights[k] * dn_s3(&s.normals[k], &s.nodes[k])).sum();
        checks.push(Check::new(name, (flux - 1.0).abs(), 1e-8));
    }

    let w1 = problem.inner_blocks().adjoint.apply(&vec![1.0; d.inner.len()]);
    let half_area = (d.inner.integrate(&w1) - 0.5 * d.inner.area()).abs();
    checks.push(Check::new("inner adjoint flux = area/2", half_area, tol));

    let degree = 4.min(d.inner.band_limit());
    let coeffs: Vec<f64> = (0..harmonics::basis_len(degree)).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut basis = harmonics::Basis::new(degree);
    let mut y = vec![0.0; coeffs.len()];
    let mu = Density::from_fn(&d.inner, |a| {
        basis.eval(a, &mut y);
        y.iter().zip(&coeffs).map(|(y, c)| y * c).sum()
    });
    let mut jump = 0.0f64;
    for _ in 0..10 {
        let k = rng.random_range(0..d.inner.len());
        let (interior, exterior) = jump_check(&d.inner, &mu, k, 1e-3)?;
        jump = jump.max((exterior - interior - mu.values[k]).abs());
    }
    checks.push(Check::new("jump relation", jump, 1e-3));

    let eps = cfg.sweep.eps_start.min(0.5 * problem.max_eps());
    let u = random_triple(&problem, &mut rng);
    let mut fd = 0.0f64;
    for regime in [Regime::Eps(eps), Regime::Limit] {
        let j = problem.jacobian(regime, &u)?;
        let r0 = flatten(&problem.residual(regime, &u)?);
        for _ in 0..5 {
            let dir = random_triple(&problem, &mut rng);
            let h = 1e-6;
            let shifted = UnknownTriple {
                mu_o: add_scaled(&u.mu_o, &dir.mu_o, h),
                mu_i: add_scaled(&u.mu_i, &dir.mu_i, h),
                xi: u.xi + h * dir.xi,
            };
            let r1 = flatten(&problem.residual(regime, &shifted)?);
            let jd = &j * flatten_triple(&dir);
            let diff = (r1 - &r0) / h - jd;
            fd = fd.max(diff.amax());
        }
    }
    checks.push(Check::new("jacobian vs finite differences", fd, 1e-5));

    let opts = cfg.newton_options();
    let limit = problem.solve_limit(None, &opts).map_err(wrap_limit)?;
    let flux = d.g_o.integral(&d.outer);
    let compat = (limit.triple.mu_i.integral(&d.inner) - flux).abs();
    checks.push(Check::new("limit compatibility", compat, 1e-6 * (1.0 + flux.abs())));
    if let Some((a, b)) = concentric_constants(cfg) {
        let fam = &d.family;
        if let Ok(root) = radial_limit_root(3, a, b, fam.d0(), fam.r0(), cfg.nonlinearity, fam.eta0()) {
            checks.push(Check::new("limit root vs radial oracle", (limit.triple.xi - root.xi).abs(), 1e-6));
        }
    }

    Ok(VerifyReport {
        checks,
        seed,
        provenance: report::provenance(cfg),
    })
}

fn random_triple(p: &Problem, rng: &mut ChaCha8Rng) -> UnknownTriple {
    let d = &p.data;
    let mut mu_o: Vec<f64> = (0..d.outer.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = d.outer.integrate(&mu_o) / d.outer.area();
    mu_o.iter_mut().for_each(|v| *v -= mean);
    UnknownTriple {
        mu_o: Density { values: mu_o },
        mu_i: Density {
            values: (0..d.inner.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        },
        xi: rng.random_range(-1.0..1.0),
    }
}

fn add_scaled(a: &Density, b: &Density, h: f64) -> Density {
    Density {
        values: a.values.iter().zip(&b.values).map(|(x, y)| x + h * y).collect(),
    }
}

fn flatten(r: &crate::system::Residual) -> DVector<f64> {
    DVector::from_iterator(
        r.outer.len() + r.inner.len() + 1,
        r.outer.iter().chain(&r.inner).copied().chain(std::iter::once(r.mean)),
    )
}

fn flatten_triple(u: &UnknownTriple) -> DVector<f64> {
    DVector::from_iterator(
        u.mu_o.len() + u.mu_i.len() + 1,
        u.mu_o.values.iter().chain(&u.mu_i.values).copied().chain(std::iter::once(u.xi)),
    )
}
