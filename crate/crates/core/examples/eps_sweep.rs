//! Continuation along a geometric eps ladder and log-log fits of the energy
//! and a probe value.

use perforated_bem::fields::{fit_scaling, SolutionFields};
use perforated_bem::geometry::{build_surface, SurfaceSpec};
use perforated_bem::potential::Density;
use perforated_bem::system::{eps_ladder, EpsFamily, NewtonOptions, Nonlinearity, Problem, ProblemData};

fn main() -> perforated_bem::Result<()> {
    let outer = build_surface(&SurfaceSpec::UnitSphere, 16)?;
    let inner = build_surface(&SurfaceSpec::UnitSphere, 16)?;
    let problem = Problem::new(ProblemData {
        g_o: Density::constant(&outer, 1.0),
        g_i: Density::constant(&inner, -1.0),
        outer,
        inner,
        nonlinearity: Nonlinearity::Linear,
        family: EpsFamily::critical(1.0, 1.0, 0.0),
    })?;
    let opts = NewtonOptions::default();
    let limit = problem.solve_limit(None, &opts)?;
    let ladder = eps_ladder(0.1, 0.0125, 4.0)?;
    let sols = problem.continuation(&ladder, &limit.triple, &opts)?;

    let probe = [0.5, 0.0, 0.0];
    let (mut energy, mut value) = (Vec::new(), Vec::new());
    println!("xi_tilde {:.10}", limit.triple.xi);
    println!("{:>10} {:>14} {:>14} {:>14} {:>5}", "eps", "xi", "u(probe)", "eps * E", "iters");
    for s in sols {
        let f = SolutionFields::new(&problem, s.eps, s.triple)?;
        let e = f.energy()?.energy;
        let u = f.eval_u(&probe)?;
        println!("{:>10.6} {:>14.10} {:>14.6} {:>14.8} {:>5}", s.eps, f.triple.xi, u, s.eps * e, s.report.iterations);
        energy.push((s.eps, e));
        value.push((s.eps, u.abs()));
    }
    let fe = fit_scaling(&energy)?;
    let fv = fit_scaling(&value)?;
    println!("energy slope {:.4} (r2 {:.8})", fe.slope, fe.r2);
    println!("value slope  {:.4} (r2 {:.8})", fv.slope, fv.r2);
    Ok(())
}
