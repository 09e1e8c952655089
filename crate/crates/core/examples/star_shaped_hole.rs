//! Spectral convergence of the quadrature on a perturbed sphere, measured by
//! the discrete Gauss flux and the adjoint double-layer flux.

use perforated_bem::geometry::{build_surface, SurfaceSpec};
use perforated_bem::potential::self_blocks;

fn main() -> perforated_bem::Result<()> {
    let spec = SurfaceSpec::star(1.0, &[(2, 0, 0.1)]);
    println!("{:>5} {:>6} {:>18} {:>12} {:>12}", "order", "nodes", "area", "gauss", "W*[1] flux");
    for order in [4, 6, 8, 12, 16, 24] {
        let s = build_surface(&spec, order)?;
        let gauss: f64 = (0..s.len())
            .map(|k| {
                let (x, n) = (s.nodes[k], s.normals[k]);
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                -s.weights[k] * (n[0] * x[0] + n[1] * x[1] + n[2] * x[2]) / (4.0 * std::f64::consts::PI * r.powi(3))
            })
            .sum();
        let w = self_blocks(&s).adjoint.apply(&vec![1.0; s.len()]);
        let half = s.integrate(&w) - 0.5 * s.area();
        println!("{order:>5} {:>6} {:>18.14} {:>12.2e} {:>12.2e}", s.len(), s.area(), (gauss.abs() - 1.0).abs(), half.abs());
    }
    Ok(())
}
