use std::f64::consts::PI;

use perforated_bem::fields::fit_scaling;
use perforated_bem::geometry::{build_surface, SurfaceSpec};
use perforated_bem::potential::{fundamental_solution, grad_fundamental_solution, Density, LayerField};
use perforated_bem::system::{eps_ladder, Nonlinearity};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-3.0f64..3.0).prop_filter("away from the origin", |x| {
        x.iter().map(|v| v * v).sum::<f64>() > 1e-4
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_radial_and_gradient_matches(x in point(), s in 0.2f64..5.0) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let s0 = fundamental_solution(3, &x).unwrap();
        prop_assert!((s0 + 1.0 / (4.0 * PI * r)).abs() <= 1e-14 / r);
        let y: Vec<f64> = x.iter().map(|v| v * s).collect();
        prop_assert!((fundamental_solution(3, &y).unwrap() - s0 / s).abs() <= 1e-13 * s0.abs() / s);
        let g = grad_fundamental_solution(3, &x).unwrap();
        let h = 1e-6 * r;
        for k in 0..3 {
            let (mut p, mut m) = (x, x);
            p[k] += h;
            m[k] -= h;
            let fd = (fundamental_solution(3, &p).unwrap() - fundamental_solution(3, &m).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[k]).abs() <= 1e-6 / (r * r));
        }
    }

    #[test]
    fn uniform_sphere_obeys_newtons_theorem(radius in 0.3f64..3.0, x in point()) {
        let s = build_surface(&SurfaceSpec::ScaledSphere { radius }, 8).unwrap();
        let mu = Density::constant(&s, 1.0);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!((r - radius).abs() > 0.05 * radius);
        let field = LayerField::new(&s, &mu).unwrap();
        let exact = -radius * radius / r.max(radius);
        prop_assert!((field.value(&x) - exact).abs() <= 1e-8 * exact.abs());
    }

    #[test]
    fn ladder_is_geometric(start in 0.01f64..0.5, ratio in 1.5f64..100.0, per_decade in 1.0f64..8.0) {
        let end = start / ratio;
        let l = eps_ladder(start, end, per_decade).unwrap();
        prop_assert_eq!(l[0], start);
        prop_assert_eq!(*l.last().unwrap(), end);
        prop_assert!(l.windows(2).all(|w| w[0] > w[1]));
        let q: Vec<f64> = l.windows(2).map(|w| w[1] / w[0]).collect();
        prop_assert!(q.iter().all(|v| (v - q[0]).abs() <= 1e-12));
        prop_assert!(q[0] >= 10f64.powf(-1.0 / per_decade) - 1e-12);
    }

    #[test]
    fn fit_recovers_power_laws(slope in -3.0f64..3.0, c in 0.1f64..10.0, k in 4usize..10) {
        let samples: Vec<(f64, f64)> = (0..k)
            .map(|i| {
                let e = 0.1 * 0.5f64.powi(i as i32);
                (e, c * e.powf(slope))
            })
            .collect();
        let fit = fit_scaling(&samples).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() <= 1e-9);
    }

    #[test]
    fn nonlinearity_derivative_matches(m in 2u32..6, eta in 0.0f64..3.0, tau in -2.0f64..2.0) {
        let f = Nonlinearity::PowerPerturbation { m };
        let h = 1e-6;
        let fd = (f.value(tau + h, eta) - f.value(tau - h, eta)) / (2.0 * h);
        prop_assert!((fd - f.d_tau(tau, eta)).abs() <= 1e-6 * (1.0 + fd.abs()));
        prop_assert_eq!(f.value(tau, 0.0), tau);
        prop_assert_eq!(Nonlinearity::Linear.d_tau(tau, eta), 1.0);
    }
}
