//! Layer operators on a sphere and a star-shaped surface: the constant-density
//! identities, Newton's theorem off the surface, and the jump of the normal
//! derivative across the surface.

use perforated_bem::geometry::{build_surface, SurfaceSpec};
use perforated_bem::potential::{jump_check, self_blocks, Density, LayerField};

fn main() -> perforated_bem::Result<()> {
    let sphere = build_surface(&SurfaceSpec::UnitSphere, 12)?;
    let blocks = self_blocks(&sphere);
    let one = vec![1.0; sphere.len()];
    let v = blocks.single.apply(&one);
    let w = blocks.adjoint.apply(&one);
    println!("unit sphere, {} nodes, area {:.15}", sphere.len(), sphere.area());
    println!("  V[1] ranges over [{:.15}, {:.15}]", min(&v), max(&v));
    println!("  W*[1] ranges over [{:.15}, {:.15}]", min(&w), max(&w));

    let mu = Density::constant(&sphere, 1.0);
    let field = LayerField::new(&sphere, &mu)?;
    for r in [0.3, 0.9, 1.1, 5.0] {
        let u = field.value(&[0.0, 0.0, r]);
        let exact = if r < 1.0 { -1.0 } else { -1.0 / r };
        println!("  potential at |x| = {r}: {u:.12} (Newton's theorem {exact:.12})");
    }

    let star = build_surface(&SurfaceSpec::star(1.0, &[(2, 0, 0.1), (3, 1, 0.05)]), 12)?;
    let mu = Density::from_fn(&star, |a| 1.0 + 0.5 * a.cos_theta);
    println!("star surface, {} nodes, area {:.12}", star.len(), star.area());
    for node in [0, star.len() / 3, star.len() / 2] {
        let (interior, exterior) = jump_check(&star, &mu, node, 1e-3)?;
        println!(
            "  node {node:>4}: exterior - interior = {:.6}, density {:.6}",
            exterior - interior,
            mu.values[node]
        );
    }
    Ok(())
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
