//! Cubic Robin perturbation on concentric spheres: the limit constant against
//! the scalar radial equation as the perturbation strength grows, then a
//! star-shaped hole solved at finite eps, warm-started from its limit.

use perforated_bem::fields::LimitFields;
use perforated_bem::geometry::{build_surface, SurfaceSpec};
use perforated_bem::oracle::radial_limit_root;
use perforated_bem::potential::Density;
use perforated_bem::system::{EpsFamily, NewtonOptions, Nonlinearity, Problem, ProblemData};

fn main() -> perforated_bem::Result<()> {
    let f = Nonlinearity::PowerPerturbation { m: 3 };
    let opts = NewtonOptions {
        armijo: true,
        ..Default::default()
    };
    println!("{:>6} {:>16} {:>16} {:>6} {:>10}", "eta0", "xi_tilde", "radial root", "iters", "robin");
    for eta0 in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let family = EpsFamily::with_limits(0.0, 0.0, eta0);
        let problem = build(f, family, SurfaceSpec::UnitSphere, 1.0, 0.0)?;
        let limit = problem.solve_limit(None, &opts)?;
        let root = radial_limit_root(3, 1.0, 0.0, 0.0, 0.0, f, eta0)?;
        let xi = limit.triple.xi;
        let lf = LimitFields::new(&problem, limit.triple)?;
        println!(
            "{eta0:>6} {xi:>16.12} {:>16.12} {:>6} {:>10.2e}",
            root.xi,
            limit.report.iterations,
            lf.robin_residual(0, 1e-3)?
        );
    }

    let star = SurfaceSpec::star(1.0, &[(2, 0, 0.1), (3, 2, 0.04)]);
    let problem = build(f, EpsFamily::critical(1.0, 1.0, 1.0), star, 1.0, 0.5)?;
    let limit = problem.solve_limit(None, &opts)?;
    for eps in [0.1, 0.05, 0.02] {
        let s = problem.solve_at_eps(eps, &limit.triple, &opts)?;
        println!(
            "eps {eps}: xi {:.10} (limit {:.10}), {} newton steps",
            s.triple.xi, limit.triple.xi, s.report.iterations
        );
    }
    Ok(())
}

fn build(f: Nonlinearity, family: EpsFamily, hole: SurfaceSpec, a: f64, b: f64) -> perforated_bem::Result<Problem> {
    let outer = build_surface(&SurfaceSpec::UnitSphere, 12)?;
    let inner = build_surface(&hole, 12)?;
    Problem::new(ProblemData {
        g_o: Density::constant(&outer, a),
        g_i: Density::constant(&inner, b),
        outer,
        inner,
        nonlinearity: f,
        family,
    })
}
