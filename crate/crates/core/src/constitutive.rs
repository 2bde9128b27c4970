//! Energy densities `e1..e4` and the pressure potential `p` with their derivatives.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A scalar `C¹` function `e(r)` of a nonnegative argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Law {
    /// `e = μ r`
    Linear { mu: f64 },
    /// `e = μ (r + β r²/2)`
    Quadratic { mu: f64, beta: f64 },
    /// `e = μ (δ + r)^m`
    Power { mu: f64, exponent: f64, delta: f64 },
}

impl Law {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Law::Linear { mu } => mu * r,
            Law::Quadratic { mu, beta } => mu * (r + 0.5 * beta * r * r),
            Law::Power { mu, exponent, delta } => mu * (delta + r).powf(exponent),
        }
    }

    pub fn deriv(&self, r: f64) -> f64 {
        match *self {
            Law::Linear { mu } => mu,
            Law::Quadratic { mu, beta } => mu * (1.0 + beta * r),
            Law::Power { mu, exponent, delta } => mu * exponent * (delta + r).powf(exponent - 1.0),
        }
    }

    /// Second derivative, used for step-size bounds.
    pub fn deriv2(&self, r: f64) -> f64 {
        match *self {
            Law::Linear { .. } => 0.0,
            Law::Quadratic { mu, beta } => mu * beta,
            Law::Power { mu, exponent, delta } => {
                mu * exponent * (exponent - 1.0) * (delta + r).powf(exponent - 2.0)
            }
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let ok = match *self {
            Law::Linear { mu } => mu.is_finite(),
            Law::Quadratic { mu, beta } => mu.is_finite() && beta.is_finite(),
            Law::Power { mu, exponent, delta } => {
                mu.is_finite() && exponent.is_finite() && delta > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(field, "law parameters must be finite (power law needs delta > 0)"))
        }
    }
}

/// Pressure potential `p(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Pressure {
    Zero,
    /// `p = κ ρ^γ`
    Power { kappa: f64, gamma: f64 },
}

impl Pressure {
    pub fn value(&self, rho: f64) -> f64 {
        match *self {
            Pressure::Zero => 0.0,
            Pressure::Power { kappa, gamma } => kappa * rho.powf(gamma),
        }
    }

    pub fn deriv(&self, rho: f64) -> f64 {
        match *self {
            Pressure::Zero => 0.0,
            Pressure::Power { kappa, gamma } => kappa * gamma * rho.powf(gamma - 1.0),
        }
    }

    pub fn deriv2(&self, rho: f64) -> f64 {
        match *self {
            Pressure::Zero => 0.0,
            Pressure::Power { kappa, gamma } => {
                kappa * gamma * (gamma - 1.0) * rho.powf(gamma - 2.0)
            }
        }
    }

    /// Effective pressure `𝔭 = ρ p'(ρ) − p(ρ)`.
    pub fn effective(&self, rho: f64) -> f64 {
        rho * self.deriv(rho) - self.value(rho)
    }

    /// `d𝔭/dρ = ρ p''(ρ)`, the squared sound speed.
    pub fn effective_deriv(&self, rho: f64) -> f64 {
        rho * self.deriv2(rho)
    }
}

/// The functions `e1..e4` and `p` that close the fluid systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstitutiveSet {
    #[serde(default)]
    pub name: String,
    pub e1: Law,
    pub e2: Law,
    pub e3: Law,
    pub e4: Law,
    pub p: Pressure,
}

/// Sampled consistency of a constitutive set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstitutiveAudit {
    /// Largest `|FD(e_j) − e'_j|` over samples and `j`, including `p`.
    pub max_derivative_error: f64,
    /// All `e'_j ≥ 0` on the sampled range.
    pub dissipative: bool,
}

impl ConstitutiveSet {
    pub fn linear(mu: [f64; 4], p: Pressure) -> Self {
        ConstitutiveSet {
            name: "linear".into(),
            e1: Law::Linear { mu: mu[0] },
            e2: Law::Linear { mu: mu[1] },
            e3: Law::Linear { mu: mu[2] },
            e4: Law::Linear { mu: mu[3] },
            p,
        }
    }

    pub fn laws(&self) -> [&Law; 4] {
        [&self.e1, &self.e2, &self.e3, &self.e4]
    }

    /// `e_j(r)` for `j = 1..=4`.
    pub fn e(&self, j: usize, r: f64) -> f64 {
        self.laws()[j - 1].value(r)
    }

    /// `e'_j(r)` for `j = 1..=4`.
    pub fn de(&self, j: usize, r: f64) -> f64 {
        self.laws()[j - 1].deriv(r)
    }

    /// `e''_j(r)` for `j = 1..=4`.
    pub fn de2(&self, j: usize, r: f64) -> f64 {
        self.laws()[j - 1].deriv2(r)
    }

    /// Zero viscosity and diffusivity with the given pressure.
    pub fn inviscid(p: Pressure) -> Self {
        ConstitutiveSet {
            name: "inviscid".into(),
            ..ConstitutiveSet::linear([0.0; 4], p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (j, l) in self.laws().iter().enumerate() {
            l.validate(&format!("constitutive.e{}", j + 1))?;
        }
        if let Pressure::Power { kappa, gamma } = self.p {
            if !(kappa.is_finite() && gamma.is_finite()) {
                return Err(Error::config("constitutive.p", "parameters must be finite"));
            }
        }
        Ok(())
    }

    /// Central-difference check of every derivative and the sign of every `e'_j`
    /// on `samples` points of `[0, r_max]` (and `[ρ_min, ρ_max]` for `p`).
    pub fn audit(&self, r_max: f64, rho_range: [f64; 2], samples: usize) -> ConstitutiveAudit {
        let d = 1e-4;
        let mut err = 0.0_f64;
        let mut dissipative = true;
        for k in 0..samples {
            let s = k as f64 / (samples.max(2) - 1) as f64;
            let r = d + s * r_max;
            for l in self.laws() {
                let fd = (l.value(r + d) - l.value(r - d)) / (2.0 * d);
                err = err.max((fd - l.deriv(r)).abs() / l.deriv(r).abs().max(1.0));
                if l.deriv(r - d) < 0.0 || l.deriv(r) < 0.0 {
                    dissipative = false;
                }
            }
            let rho = rho_range[0] + s * (rho_range[1] - rho_range[0]);
            let fd = (self.p.value(rho + d) - self.p.value(rho - d)) / (2.0 * d);
            err = err.max((fd - self.p.deriv(rho)).abs() / self.p.deriv(rho).abs().max(1.0));
        }
        ConstitutiveAudit {
            max_derivative_error: err,
            dissipative,
        }
    }

    /// Built-in constitutive sets.
    pub fn catalog() -> Vec<ConstitutiveSet> {
        let rho2 = Pressure::Power {
            kappa: 1.0,
            gamma: 2.0,
        };
        vec![
            ConstitutiveSet {
                name: "newtonian".into(),
                ..ConstitutiveSet::linear([1.0, 1.0, 1.0, 1.0], rho2)
            },
            ConstitutiveSet {
                name: "boussinesq-scriven".into(),
                ..ConstitutiveSet::linear([0.8, 0.3, 0.5, 0.25], rho2)
            },
            ConstitutiveSet {
                name: "shear-thickening".into(),
                e1: Law::Quadratic { mu: 1.0, beta: 1.0 },
                e2: Law::Quadratic { mu: 0.5, beta: 0.5 },
                e3: Law::Quadratic { mu: 1.0, beta: 1.0 },
                e4: Law::Quadratic { mu: 1.0, beta: 1.0 },
                p: rho2,
            },
            ConstitutiveSet {
                name: "power-law".into(),
                e1: Law::Power {
                    mu: 1.0,
                    exponent: 0.75,
                    delta: 0.1,
                },
                e2: Law::Power {
                    mu: 0.5,
                    exponent: 0.75,
                    delta: 0.1,
                },
                e3: Law::Power {
                    mu: 1.0,
                    exponent: 1.5,
                    delta: 0.1,
                },
                e4: Law::Power {
                    mu: 1.0,
                    exponent: 1.5,
                    delta: 0.1,
                },
                p: Pressure::Power {
                    kappa: 1.0,
                    gamma: 1.4,
                },
            },
            ConstitutiveSet {
                name: "negative-bulk".into(),
                ..ConstitutiveSet::linear([1.0, -0.5, 1.0, 1.0], rho2)
            },
        ]
    }

    pub fn by_name(name: &str) -> Option<ConstitutiveSet> {
        Self::catalog().into_iter().find(|c| c.name == name)
    }
}

/// Either a catalog name or an inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstitutiveChoice {
    Named(String),
    Inline(ConstitutiveSet),
}

impl Default for ConstitutiveChoice {
    fn default() -> Self {
        ConstitutiveChoice::Named("newtonian".into())
    }
}

impl ConstitutiveChoice {
    pub fn resolve(&self, field: &str) -> Result<ConstitutiveSet> {
        match self {
            ConstitutiveChoice::Named(n) => ConstitutiveSet::by_name(n).ok_or_else(|| {
                Error::config(field, format!("unknown constitutive set '{n}'"))
            }),
            ConstitutiveChoice::Inline(c) => {
                c.validate()?;
                Ok(c.clone())
            }
        }
    }
}
