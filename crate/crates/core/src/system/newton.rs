use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonOptions {
    /// Residual sup-norm at which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Backtrack on the residual norm (Armijo rule).
    pub armijo: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 50,
            armijo: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
    /// Residual sup-norm of the initial guess and after each step.
    pub log: Vec<f64>,
}

fn sup(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Plain or damped Newton iteration. `project` is applied to every iterate,
/// including the initial guess.
pub(crate) fn newton(
    mut x: DVector<f64>,
    residual: impl Fn(&DVector<f64>) -> Result<DVector<f64>>,
    jacobian: impl Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
    project: impl Fn(&mut DVector<f64>),
    opts: &NewtonOptions,
) -> Result<(DVector<f64>, NewtonReport)> {
    project(&mut x);
    let mut r = residual(&x)?;
    let mut norm = sup(&r);
    let mut log = vec![norm];
    let diverged = |iterations, residual, log: &Vec<f64>| Error::NewtonDiverged {
        iterations,
        residual,
        log: log.clone(),
    };
    if !norm.is_finite() {
        return Err(diverged(0, norm, &log));
    }
    let mut iterations = 0;
    while norm >= opts.tol {
        if iterations >= opts.max_iter {
            return Err(diverged(iterations, norm, &log));
        }
        let j = jacobian(&x)?;
        let step = j.lu().solve(&(-&r)).ok_or(Error::SingularJacobian)?;
        if step.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        let mut t = 1.0;
        let (next, next_r) = loop {
            let mut cand = &x + &step * t;
            project(&mut cand);
            let cr = residual(&cand)?;
            let cn = sup(&cr);
            let accept = !opts.armijo || (cn.is_finite() && cn <= (1.0 - 1e-4 * t) * norm) || t < 1e-6;
            if accept {
                break (cand, cr);
            }
            t *= 0.5;
        };
        x = next;
        r = next_r;
        let prev = norm;
        norm = sup(&r);
        iterations += 1;
        log.push(norm);
        if !norm.is_finite() {
            return Err(diverged(iterations, norm, &log));
        }
        if prev > 0.0 && log.len() >= 3 {
            let before = log[log.len() - 3];
            if before > 0.0 && prev < 1.0 && before < 1.0 {
                log::debug!(
                    "newton {iterations}: residual {norm:.3e}, order estimate {:.2}",
                    (norm.max(1e-300) / prev).ln() / (prev / before).ln()
                );
            }
        } else {
            log::debug!("newton {iterations}: residual {norm:.3e}");
        }
    }
    Ok((x, NewtonReport {
        iterations,
        residual: norm,
        log,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_scalar_cubic() {
        let (x, rep) = newton(
            DVector::from_element(1, 0.0),
            |x| Ok(DVector::from_element(1, x[0] + x[0].powi(3) - 1.0)),
            |x| Ok(DMatrix::from_element(1, 1, 1.0 + 3.0 * x[0] * x[0])),
            |_| {},
            &NewtonOptions::default(),
        )
        .unwrap();
        assert!((x[0] - 0.682_327_803_828_019_3).abs() < 1e-12);
        assert!(rep.iterations < 10 && rep.residual < 1e-10);
        assert_eq!(rep.log.len(), rep.iterations + 1);
    }

    #[test]
    fn reports_divergence_with_log() {
        let err = newton(
            DVector::from_element(1, 1.0),
            |x| Ok(DVector::from_element(1, x[0] * x[0] + 1.0)),
            |x| Ok(DMatrix::from_element(1, 1, 2.0 * x[0])),
            |_| {},
            &NewtonOptions {
                max_iter: 5,
                ..Default::default()
            },
        )
        .unwrap_err();
        match err {
            Error::NewtonDiverged { iterations, log, .. } => {
                assert_eq!(iterations, 5);
                assert_eq!(log.len(), 6);
            }
            Error::SingularJacobian => {}
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn armijo_damps_overshoot() {
        let f = |x: f64| x.atan();
        let opts = NewtonOptions {
            armijo: true,
            ..Default::default()
        };
        let (x, _) = newton(
            DVector::from_element(1, 3.0),
            |x| Ok(DVector::from_element(1, f(x[0]))),
            |x| Ok(DMatrix::from_element(1, 1, 1.0 / (1.0 + x[0] * x[0]))),
            |_| {},
            &opts,
        )
        .unwrap();
        assert!(x[0].abs() < 1e-10);
    }
}
