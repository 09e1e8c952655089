use crate::error::Result;
use crate::geometry::harmonics::{self, Angles};
use crate::geometry::{norm, Point, Surface};

use super::kernel::s3;
use super::singular::{PolarRule, Projector};
use super::{plain_sum, Density, SEPARATION_FACTOR};

/// Largest grid order used for far-field upsampling.
const MAX_FINE_ORDER: usize = 96;

/// Single layer potential of one density, evaluable anywhere in space.
///
/// Far from the surface the density is resampled on a grid four times finer
/// and summed with plain quadrature; closer than three fine node spacings
/// the graded polar rule centered at the radial projection is used.
#[derive(Debug, Clone)]
pub struct LayerField<'s> {
    surface: &'s Surface,
    degree: usize,
    coeffs: Vec<f64>,
    fine: Surface,
    fine_values: Vec<f64>,
    threshold: f64,
}

impl<'s> LayerField<'s> {
    pub fn new(surface: &'s Surface, mu: &Density) -> Result<Self> {
        mu.check(surface)?;
        let proj = Projector::new(surface);
        let coeffs = proj.coefficients(&mu.values);
        let fine = surface.refined((4 * surface.order).min(MAX_FINE_ORDER).max(surface.order))?;
        let mut scratch = vec![0.0; coeffs.len()];
        let mut basis = harmonics::Basis::new(proj.degree);
        let fine_values = fine
            .angles
            .iter()
            .map(|a| proj.synthesize(&mut basis, &coeffs, a, &mut scratch))
            .collect();
        let threshold = SEPARATION_FACTOR * fine.mesh_size();
        Ok(LayerField {
            surface,
            degree: proj.degree,
            coeffs,
            fine,
            fine_values,
            threshold,
        })
    }

    pub fn surface(&self) -> &Surface {
        self.surface
    }

    /// Density value at an arbitrary parameter direction.
    pub fn density_at(&self, a: &Angles) -> f64 {
        let mut y = vec![0.0; self.coeffs.len()];
        harmonics::eval(self.degree, a, &mut y);
        y.iter().zip(&self.coeffs).map(|(y, c)| y * c).sum()
    }

    /// Total charge `∫ μ dσ`.
    pub fn charge(&self) -> f64 {
        self.fine.integrate(&self.fine_values)
    }

    /// Distance below which the near rule takes over.
    pub fn near_threshold(&self) -> f64 {
        self.threshold
    }

    pub fn value(&self, x: &Point) -> f64 {
        if self.fine.node_distance(x) > self.threshold {
            return plain_sum(&self.fine, &self.fine_values, x);
        }
        let center = Angles::from_direction(*x);
        let foot = self.surface.point_at(&center).position;
        let r = norm(&foot);
        let gap = crate::geometry::dist(x, &foot);
        self.value_near(x, &center, (gap / r).max(1e-9))
    }

    /// Graded polar quadrature about the parameter direction `center`, with
    /// angular grading scale `grade`.
    pub fn value_near(&self, x: &Point, center: &Angles, grade: f64) -> f64 {
        let rule = PolarRule::graded(self.surface.order, grade);
        let mut y = vec![0.0; self.coeffs.len()];
        let mut basis = harmonics::Basis::new(self.degree);
        let mut acc = 0.0;
        rule.for_each(&center.direction(), |a, w| {
            let sp = self.surface.point_at(a);
            let d = [x[0] - sp.position[0], x[1] - sp.position[1], x[2] - sp.position[2]];
            basis.eval(a, &mut y);
            let mu: f64 = y.iter().zip(&self.coeffs).map(|(y, c)| y * c).sum();
            acc += s3(&d) * w * sp.jacobian * mu;
        });
        acc
    }
}
