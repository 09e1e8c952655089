//! The eps = 0 limiting system on a star-shaped hole: root, solvability
//! post-check, compatibility, and the limiting macroscopic and microscopic
//! fields.

use perforated_bem::fields::LimitFields;
use perforated_bem::geometry::{build_surface, SurfaceSpec};
use perforated_bem::system::{Datum, EpsFamily, NewtonOptions, Nonlinearity, Problem, ProblemData};

fn main() -> perforated_bem::Result<()> {
    let outer = build_surface(&SurfaceSpec::UnitSphere, 12)?;
    let inner = build_surface(&SurfaceSpec::star(1.0, &[(2, 0, 0.1)]), 12)?;
    let g_o = Datum::Expansion {
        constant: 1.0,
        harmonics: vec![(1, 0, 0.3)],
    }
    .sample(&outer);
    let g_i = Datum::Constant(0.5).sample(&inner);
    let problem = Problem::new(ProblemData {
        outer,
        inner,
        g_o,
        g_i,
        nonlinearity: Nonlinearity::PowerPerturbation { m: 3 },
        family: EpsFamily::with_limits(0.5, 1.0, 0.2),
    })?;

    let limit = problem.solve_limit(None, &NewtonOptions::default())?;
    let d = &problem.data;
    println!("xi_tilde = {:.12}", limit.triple.xi);
    println!("newton residuals {:?}", limit.report.log);
    println!("solvability {:?}", limit.solvability);
    let flux = d.g_o.integral(&d.outer);
    println!(
        "compatibility: int mu_i = {:.12}, int g_o = {:.12}",
        limit.triple.mu_i.integral(&d.inner),
        flux
    );

    let fields = LimitFields::new(&problem, limit.require_solvable()?.clone())?;
    for x in [[0.3, 0.0, 0.0], [0.0, 0.6, 0.0], [0.0, 0.0, -0.8]] {
        println!("U_M({x:?}) = {:.8}", fields.macroscopic_limit(&x)?);
    }
    for t in [[2.0, 0.0, 0.0], [0.0, 10.0, 0.0], [0.0, 0.0, 100.0]] {
        println!("U_m({t:?}) = {:.8}", fields.microscopic_limit(&t)?);
    }
    println!("charge of the microscopic field {:.8}", fields.inner_charge());
    for node in [0, 100, 200] {
        println!(
            "node {node}: Robin residual {:.2e}, outer Neumann {:.6} vs g_o {:.6}",
            fields.robin_residual(node, 1e-3)?,
            fields.macroscopic_normal_derivative(node, 1e-3)?,
            d.g_o.values[node]
        );
    }
    Ok(())
}
