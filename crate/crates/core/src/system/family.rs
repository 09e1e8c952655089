//! The nonlinearity `F̃(τ, η)` and the power-law families `δ(ε)`, `ρ(ε)`,
//! `η(ε)` with their `ε → 0` limits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `F̃(τ, η) = τ` or `F̃(τ, η) = τ + η τ^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum Nonlinearity {
    Linear,
    PowerPerturbation { m: u32 },
}

impl Nonlinearity {
    pub fn validate(&self) -> Result<()> {
        match self {
            Nonlinearity::PowerPerturbation { m } if *m < 2 => {
                Err(Error::config("nonlinearity.m", format!("exponent must be at least 2, got {m}")))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, tau: f64, eta: f64) -> f64 {
        match self {
            Nonlinearity::Linear => tau,
            Nonlinearity::PowerPerturbation { m } => tau + eta * tau.powi(*m as i32),
        }
    }

    /// `∂_τ F̃(τ, η)`.
    pub fn d_tau(&self, tau: f64, eta: f64) -> f64 {
        match self {
            Nonlinearity::Linear => 1.0,
            Nonlinearity::PowerPerturbation { m } => 1.0 + *m as f64 * eta * tau.powi(*m as i32 - 1),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Nonlinearity::Linear)
    }
}

/// `c · ε^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub coefficient: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn new(coefficient: f64, exponent: f64) -> Self {
        PowerLaw { coefficient, exponent }
    }

    pub fn constant(c: f64) -> Self {
        PowerLaw::new(c, 0.0)
    }

    pub fn eval(&self, eps: f64) -> f64 {
        self.coefficient * eps.powf(self.exponent)
    }
}

/// Degeneracy parameters `δ(ε)`, `ρ(ε)`, `η(ε)` of the hole condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsFamily {
    pub delta: PowerLaw,
    pub rho: PowerLaw,
    pub eta: PowerLaw,
}

impl EpsFamily {
    pub fn new(delta: PowerLaw, rho: PowerLaw, eta: PowerLaw) -> Self {
        EpsFamily { delta, rho, eta }
    }

    /// `δ = c_δ ε^{-1}`, `ρ = c_ρ ε²`, `η = c_η`: every limit is nonzero.
    pub fn critical(c_delta: f64, c_rho: f64, c_eta: f64) -> Self {
        EpsFamily::new(
            PowerLaw::new(c_delta, -1.0),
            PowerLaw::new(c_rho, 2.0),
            PowerLaw::constant(c_eta),
        )
    }

    /// Family whose limits are exactly `(d0, r0, eta0)`; zero limits use
    /// the next power.
    pub fn with_limits(d0: f64, r0: f64, eta0: f64) -> Self {
        let delta = if d0 > 0.0 { PowerLaw::new(d0, -1.0) } else { PowerLaw::new(1.0, 0.0) };
        let rho = if r0 > 0.0 { PowerLaw::new(1.0 / r0, 2.0) } else { PowerLaw::new(1.0, 1.0) };
        EpsFamily::new(delta, rho, PowerLaw::constant(eta0))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, law) in [("delta", &self.delta), ("rho", &self.rho)] {
            if !(law.coefficient > 0.0) || !law.coefficient.is_finite() {
                return Err(Error::config(
                    format!("{name}.coefficient"),
                    format!("must be positive and finite, got {}", law.coefficient),
                ));
            }
        }
        for (name, v) in [
            ("delta.exponent", self.delta.exponent),
            ("rho.exponent", self.rho.exponent),
            ("eta.exponent", self.eta.exponent),
            ("eta.coefficient", self.eta.coefficient),
        ] {
            if !v.is_finite() {
                return Err(Error::config(name, format!("must be finite, got {v}")));
            }
        }
        if self.delta.exponent < -1.0 {
            return Err(Error::config(
                "delta.exponent",
                format!(
                    "d₀ ≡ lim ε δ(ε) must be finite, which needs exponent >= -1 (got {})",
                    self.delta.exponent
                ),
            ));
        }
        if self.rho.exponent > 2.0 {
            return Err(Error::config(
                "rho.exponent",
                format!(
                    "r₀ ≡ lim ε^{{n-1}}/ρ(ε) must be finite, which needs exponent <= 2 for n = 3 (got {})",
                    self.rho.exponent
                ),
            ));
        }
        if self.eta.exponent < 0.0 && self.eta.coefficient != 0.0 {
            return Err(Error::config(
                "eta.exponent",
                format!("η₀ ≡ lim η(ε) must be finite, which needs exponent >= 0 (got {})", self.eta.exponent),
            ));
        }
        Ok(())
    }

    pub fn d0(&self) -> f64 {
        if self.delta.exponent == -1.0 {
            self.delta.coefficient
        } else {
            0.0
        }
    }

    pub fn r0(&self) -> f64 {
        if self.rho.exponent == 2.0 {
            1.0 / self.rho.coefficient
        } else {
            0.0
        }
    }

    pub fn eta0(&self) -> f64 {
        if self.eta.exponent == 0.0 {
            self.eta.coefficient
        } else {
            0.0
        }
    }

    /// `γ₁ = ε δ(ε)`.
    pub fn gamma1(&self, eps: f64) -> f64 {
        self.delta.coefficient * eps.powf(1.0 + self.delta.exponent)
    }

    /// `γ₂ = η(ε)`.
    pub fn gamma2(&self, eps: f64) -> f64 {
        self.eta.eval(eps)
    }

    /// `γ₃ = ε²/ρ(ε)`.
    pub fn gamma3(&self, eps: f64) -> f64 {
        eps.powf(2.0 - self.rho.exponent) / self.rho.coefficient
    }

    /// `δ(ε) ε²`, the divisor turning `ξ` into the additive constant of `u`.
    pub fn xi_divisor(&self, eps: f64) -> f64 {
        self.delta.coefficient * eps.powf(self.delta.exponent + 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_by_exponent() {
        let f = EpsFamily::critical(2.0, 4.0, 0.5);
        assert_eq!((f.d0(), f.r0(), f.eta0()), (2.0, 0.25, 0.5));
        let f = EpsFamily::new(PowerLaw::new(3.0, 0.0), PowerLaw::new(1.0, 1.0), PowerLaw::new(1.0, 1.0));
        assert_eq!((f.d0(), f.r0(), f.eta0()), (0.0, 0.0, 0.0));
        let f = EpsFamily::with_limits(1.5, 0.5, -0.25);
        assert_eq!((f.d0(), f.r0(), f.eta0()), (1.5, 0.5, -0.25));
        let f = EpsFamily::with_limits(0.0, 0.0, 0.0);
        assert_eq!((f.d0(), f.r0(), f.eta0()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn gammas_converge_to_limits() {
        let f = EpsFamily::critical(2.0, 4.0, 0.5);
        for eps in [0.1, 1e-3, 1e-6] {
            assert!((f.gamma1(eps) - 2.0).abs() < 1e-12);
            assert!((f.gamma3(eps) - 0.25).abs() < 1e-12);
        }
        let f = EpsFamily::new(PowerLaw::new(1.0, -0.5), PowerLaw::new(1.0, 1.5), PowerLaw::new(1.0, 1.0));
        assert!((f.gamma1(1e-4) - 1e-2).abs() < 1e-14);
        assert!((f.gamma3(1e-4) - 1e-2).abs() < 1e-14);
        assert!((f.xi_divisor(0.01) - 0.01f64.powf(1.5)).abs() < 1e-16);
    }

    #[test]
    fn validation_names_the_violated_limit() {
        let bad = EpsFamily::new(PowerLaw::new(1.0, -1.5), PowerLaw::new(1.0, 2.0), PowerLaw::constant(0.0));
        match bad.validate() {
            Err(Error::ConfigInvalid { field, message }) => {
                assert_eq!(field, "delta.exponent");
                assert!(message.contains("d₀ ≡ lim ε δ(ε)"));
            }
            other => panic!("{other:?}"),
        }
        let bad = EpsFamily::new(PowerLaw::new(1.0, -1.0), PowerLaw::new(1.0, 2.5), PowerLaw::constant(0.0));
        match bad.validate() {
            Err(Error::ConfigInvalid { field, message }) => {
                assert_eq!(field, "rho.exponent");
                assert!(message.contains("ε^{n-1}/ρ(ε)"));
            }
            other => panic!("{other:?}"),
        }
        let bad = EpsFamily::new(PowerLaw::new(-1.0, -1.0), PowerLaw::new(1.0, 2.0), PowerLaw::constant(0.0));
        assert!(bad.validate().is_err());
        assert!(EpsFamily::critical(1.0, 1.0, 0.0).validate().is_ok());
    }

    #[test]
    fn power_perturbation_derivative() {
        let f = Nonlinearity::PowerPerturbation { m: 3 };
        let (tau, eta, h) = (0.7, -0.4, 1e-6);
        let fd = (f.value(tau + h, eta) - f.value(tau - h, eta)) / (2.0 * h);
        assert!((fd - f.d_tau(tau, eta)).abs() < 1e-9);
        assert!(Nonlinearity::PowerPerturbation { m: 1 }.validate().is_err());
        assert_eq!(Nonlinearity::Linear.d_tau(3.0, 9.0), 1.0);
    }
}
