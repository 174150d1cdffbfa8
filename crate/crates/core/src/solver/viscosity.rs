use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PhysicalField, Shape, SpectralField};
use crate::scalar::Real;

/// Temperature-dependent viscosity `θ ↦ ν(θ) > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ViscosityLaw {
    Constant,
    /// `ν(θ) = 1 + δ tanh θ`, `|δ| < 1`.
    TanhPerturbation { delta: f64 },
    /// Piecewise-linear interpolation of sorted samples, clamped outside.
    UserTable { theta: Vec<f64>, nu: Vec<f64> },
}

impl Default for ViscosityLaw {
    fn default() -> Self {
        ViscosityLaw::Constant
    }
}

impl ViscosityLaw {
    pub fn tanh(delta: f64) -> Result<Self> {
        let law = ViscosityLaw::TanhPerturbation { delta };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ViscosityLaw::Constant => Ok(()),
            ViscosityLaw::TanhPerturbation { delta } => {
                if !(delta.abs() < 1.0) {
                    return Err(Error::InvalidArgument(format!("tanh viscosity needs |delta| < 1, got {delta}")));
                }
                Ok(())
            }
            ViscosityLaw::UserTable { theta, nu } => {
                let mut errs = Vec::new();
                if theta.len() < 2 || theta.len() != nu.len() {
                    errs.push(format!("table needs >= 2 matching samples (theta {}, nu {})", theta.len(), nu.len()));
                }
                if theta.windows(2).any(|w| !(w[1] > w[0])) {
                    errs.push("table theta must be strictly increasing".into());
                }
                if nu.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    errs.push("table nu must be positive and finite".into());
                }
                if errs.is_empty() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(errs.join("; ")))
                }
            }
        }
    }

    pub fn eval(&self, th: f64) -> f64 {
        match self {
            ViscosityLaw::Constant => 1.0,
            ViscosityLaw::TanhPerturbation { delta } => 1.0 + delta * th.tanh(),
            ViscosityLaw::UserTable { theta, nu } => {
                if th <= theta[0] {
                    return nu[0];
                }
                let last = theta.len() - 1;
                if th >= theta[last] {
                    return nu[last];
                }
                let i = theta.partition_point(|&x| x <= th) - 1;
                let s = (th - theta[i]) / (theta[i + 1] - theta[i]);
                nu[i] + s * (nu[i + 1] - nu[i])
            }
        }
    }

    pub fn nu_min(&self) -> f64 {
        match self {
            ViscosityLaw::Constant => 1.0,
            ViscosityLaw::TanhPerturbation { delta } => 1.0 - delta.abs(),
            ViscosityLaw::UserTable { nu, .. } => nu.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    /// `‖ν − 1‖_∞` over all temperatures.
    pub fn deviation(&self) -> f64 {
        match self {
            ViscosityLaw::Constant => 0.0,
            ViscosityLaw::TanhPerturbation { delta } => delta.abs(),
            ViscosityLaw::UserTable { nu, .. } => nu.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.deviation() == 0.0
    }

    /// `ν(θ) − 1` sampled on the lattice, returned dealiased.
    pub fn minus_one<T: Real>(&self, theta: &SpectralField<T>) -> Result<SpectralField<T>> {
        if theta.shape() != Shape::Scalar {
            return Err(Error::Shape("viscosity needs a scalar temperature".into()));
        }
        if self.is_constant() {
            return Ok(SpectralField::zeros(theta.grid(), Shape::Scalar));
        }
        let phys = theta.dealiased().to_physical();
        let vals = phys.values().iter().map(|&v| T::of(self.eval(v.to64()) - 1.0)).collect();
        Ok(PhysicalField::from_values(theta.grid(), Shape::Scalar, vals)?.to_spectral().dealiased())
    }
}
