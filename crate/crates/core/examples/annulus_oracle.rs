//! Concentric unit spheres with a linear Robin law: the solver against the
//! closed-form radial solution and energy.

use std::f64::consts::PI;

use perforated_bem::fields::SolutionFields;
use perforated_bem::geometry::{build_surface, SurfaceSpec};
use perforated_bem::oracle::{annulus_energy, annulus_solution};
use perforated_bem::potential::Density;
use perforated_bem::system::{EpsFamily, NewtonOptions, Nonlinearity, Problem, ProblemData};

fn main() -> perforated_bem::Result<()> {
    let (a, b) = (1.0, 1.0);
    let outer = build_surface(&SurfaceSpec::UnitSphere, 16)?;
    let inner = build_surface(&SurfaceSpec::UnitSphere, 16)?;
    let problem = Problem::new(ProblemData {
        g_o: Density::constant(&outer, a),
        g_i: Density::constant(&inner, b),
        outer,
        inner,
        nonlinearity: Nonlinearity::Linear,
        // delta = 1/eps, rho = eps^2
        family: EpsFamily::critical(1.0, 1.0, 0.0),
    })?;
    let opts = NewtonOptions::default();
    let limit = problem.solve_limit(None, &opts)?;

    println!("{:>6} {:>5} {:>18} {:>18} {:>10}", "eps", "|x|", "u", "exact", "rel err");
    for eps in [0.2, 0.1, 0.05] {
        let sol = problem.solve_at_eps(eps, &limit.triple, &opts)?;
        let fields = SolutionFields::new(&problem, eps, sol.triple)?;
        for r in [0.4, 0.5, 0.7] {
            let u = fields.eval_u(&[0.0, r, 0.0])?;
            let exact = annulus_solution(3, a, b, 1.0 / eps, eps * eps, eps, r)?;
            println!("{eps:>6} {r:>5} {u:>18.12} {exact:>18.12} {:>10.2e}", ((u - exact) / exact).abs());
        }
        let e = fields.energy()?;
        println!(
            "       energy {:.10} (exact {:.10}, 36pi at eps = 0.1 is {:.10})",
            e.energy,
            annulus_energy(3, a, eps)?,
            36.0 * PI
        );
    }
    Ok(())
}
