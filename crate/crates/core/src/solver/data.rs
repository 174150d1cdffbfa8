use serde::{Deserialize, Serialize};

use crate::besov::{partial_sum, BesovIndex, DyadicLadder, besov_norm_dyadic, chi};
use crate::error::{Error, Result};
use crate::exponents::Regime;
use crate::field::{divergence, gradient, multiply, PhysicalField, Shape, SpectralField};
use crate::harmonic::leray_project;
use crate::scalar::Real;

use super::viscosity::ViscosityLaw;

/// Prepared initial temperature and velocity.
#[derive(Clone, Debug)]
pub struct InitialData<T: Real> {
    pub theta0: SpectralField<T>,
    pub u0: SpectralField<T>,
    pub trunc_level: Option<i32>,
    pub cutoff: Option<f64>,
    /// `‖θ̄_n‖_∞`, refined between lattice points.
    pub theta_sup: f64,
    /// Largest sample of the raw temperature.
    pub theta_raw_sup: f64,
    /// `‖div ū‖₂ / ‖∇ū‖₂`.
    pub divergence: f64,
}

fn relative_divergence<T: Real>(u: &SpectralField<T>) -> Result<f64> {
    let div = divergence(u)?.energy().to64().sqrt();
    let grad = gradient(u)?.energy().to64().sqrt();
    Ok(if grad == 0.0 { div } else { div / grad })
}

/// Tolerance on relative divergence for the scalar type.
pub fn divergence_tolerance<T: Real>() -> f64 {
    (T::epsilon().to64() * 1e3).max(1e-8)
}

impl<T: Real> InitialData<T> {
    /// Wraps already band-limited data without truncation; `u0` must be
    /// divergence-free.
    pub fn from_prepared(theta0: SpectralField<T>, u0: SpectralField<T>) -> Result<Self> {
        if theta0.shape() != Shape::Scalar || u0.shape() != Shape::Vector {
            return Err(Error::Shape("initial data must be (scalar, vector)".into()));
        }
        if theta0.grid() != u0.grid() {
            return Err(Error::GridMismatch);
        }
        let divergence = relative_divergence(&u0)?;
        if divergence > divergence_tolerance::<T>() {
            return Err(Error::Divergence(divergence));
        }
        let theta_sup = theta0.sup_norm_refined()?.to64();
        let theta_raw_sup = theta0.to_physical().lp_norm(f64::INFINITY)?.to64();
        Ok(Self { theta0, u0, trunc_level: None, cutoff: None, theta_sup, theta_raw_sup, divergence })
    }

    pub fn zeros(grid: &crate::field::Grid<T>) -> Self {
        Self {
            theta0: SpectralField::zeros(grid, Shape::Scalar),
            u0: SpectralField::zeros(grid, Shape::Vector),
            trunc_level: None,
            cutoff: None,
            theta_sup: 0.0,
            theta_raw_sup: 0.0,
            divergence: 0.0,
        }
    }

    pub fn grid(&self) -> &crate::field::Grid<T> {
        self.u0.grid()
    }

    /// `(ū^h, ū^d)` as vector fields with the other components zeroed.
    pub fn split_velocity(&self) -> (SpectralField<T>, SpectralField<T>) {
        split_velocity(&self.u0)
    }

    /// `(‖ū^h‖, ‖ū^d‖)` in `Ḃ^{d/p−1}_{p,r}`.
    pub fn velocity_besov(&self, p: f64, r: f64) -> Result<(f64, f64)> {
        let idx = BesovIndex::critical(self.grid().dim(), p, r)?;
        let (h, v) = self.split_velocity();
        Ok((besov_norm_dyadic(&h, &idx)?, besov_norm_dyadic(&v, &idx)?))
    }

    /// Same data with the horizontal velocity scaled by `s`; the result is
    /// divergence-free only when the horizontal part is by itself.
    pub fn with_horizontal_scaled(&self, s: T) -> Result<Self> {
        let (h, v) = self.split_velocity();
        let u0 = h.scaled(s).add(&v)?;
        let mut out = self.clone();
        out.divergence = relative_divergence(&u0)?;
        if out.divergence > divergence_tolerance::<T>() {
            return Err(Error::Divergence(out.divergence));
        }
        out.u0 = u0;
        Ok(out)
    }

    /// `(θ̄(λx), λū(λx))` on a box `λ` times smaller.
    pub fn rescaled(&self, lambda: T) -> Result<Self> {
        let grid = self.grid().rescaled(T::one() / lambda)?;
        let mut out = self.clone();
        out.theta0 = self.theta0.on_grid(&grid)?;
        out.u0 = self.u0.on_grid(&grid)?.scaled(lambda);
        Ok(out)
    }
}

/// `(u^h, u^d)` of a vector field, each kept as a full vector field.
pub fn split_velocity<T: Real>(u: &SpectralField<T>) -> (SpectralField<T>, SpectralField<T>) {
    let npts = u.grid().npts();
    let d = u.grid().dim();
    let zero = rustfft::num_complex::Complex::new(T::zero(), T::zero());
    let mut h = u.clone();
    let mut v = u.clone();
    for (j, z) in h.coefficients_mut().iter_mut().enumerate() {
        if j / npts == d - 1 {
            *z = zero;
        }
    }
    for (j, z) in v.coefficients_mut().iter_mut().enumerate() {
        if j / npts != d - 1 {
            *z = zero;
        }
    }
    (h, v)
}

/// Smooth radial cutoff about the box centre: 1 inside `¾R`, 0 beyond `(4/3)R`.
pub fn radial_cutoff<T: Real>(grid: &crate::field::Grid<T>, radius: f64) -> PhysicalField<T> {
    let c = 0.5 * grid.box_length().to64();
    let d = grid.dim();
    PhysicalField::scalar_fn(grid, |x| {
        let r2: f64 = (0..d).map(|a| (x[a].to64() - c).powi(2)).sum();
        T::of(chi(r2.sqrt() / radius))
    })
}

/// `θ̄_n = χ Σ_{|j|≤n} Δ̇_j θ̄` and `ū_n = P Σ_{|j|≤n} Δ̇_j ū`, both dealiased
/// with spatial means kept.
pub fn prepare_data<T: Real>(
    theta_raw: &PhysicalField<T>,
    u_raw: &SpectralField<T>,
    n: i32,
    cutoff: Option<f64>,
) -> Result<InitialData<T>> {
    if theta_raw.shape() != Shape::Scalar || u_raw.shape() != Shape::Vector {
        return Err(Error::Shape("initial data must be (scalar, vector)".into()));
    }
    if theta_raw.grid() != u_raw.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = u_raw.grid().clone();
    let ladder = DyadicLadder::for_grid(&grid)?;
    if n < 0 || n > ladder.j_max {
        return Err(Error::InvalidArgument(format!(
            "truncation level {n} outside [0, {}] for this grid",
            ladder.j_max
        )));
    }
    if let Some(r) = cutoff {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("cutoff radius {r} must be positive")));
        }
    }
    let theta_raw_sup = theta_raw.lp_norm(f64::INFINITY)?.to64();
    if !theta_raw_sup.is_finite() {
        return Err(Error::NonFinite("raw temperature".into()));
    }
    let th = theta_raw.to_spectral();
    let mut theta = with_mean(partial_sum(&th, -n, n)?, &th);
    if let Some(r) = cutoff {
        theta = multiply(&radial_cutoff(&grid, r).to_spectral(), &theta)?;
    }
    let theta0 = theta.dealiased();
    let u0 = with_mean(leray_project(&partial_sum(u_raw, -n, n)?)?, u_raw).dealiased();
    let divergence = relative_divergence(&u0)?;
    let theta_sup = theta0.sup_norm_refined()?.to64();
    Ok(InitialData { theta0, u0, trunc_level: Some(n), cutoff, theta_sup, theta_raw_sup, divergence })
}

fn with_mean<T: Real>(mut f: SpectralField<T>, src: &SpectralField<T>) -> SpectralField<T> {
    let npts = f.grid().npts();
    for c in 0..f.components() {
        f.coefficients_mut()[c * npts] = src.coefficients()[c * npts];
    }
    f
}

/// Inputs and value of the smallness quantity
/// `η = (‖ν−1‖_∞ + ‖ū^h‖) exp{c_r ‖ū^d‖^κ}`, `κ = 4r` or `2r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallnessReport {
    pub nu_dev: f64,
    pub uh_besov: f64,
    pub ud_besov: f64,
    pub c_r: f64,
    pub c_0: f64,
    pub eta: f64,
    pub regime: Regime,
    pub p: f64,
    pub r: f64,
    pub below_threshold: bool,
}

pub fn eta_value(nu_dev: f64, uh: f64, ud: f64, c_r: f64, r: f64, regime: Regime) -> f64 {
    let base = nu_dev + uh;
    if base == 0.0 {
        return 0.0;
    }
    base * (c_r * ud.powf(regime.smallness_power(r))).exp()
}

pub fn eta<T: Real>(
    data: &InitialData<T>,
    law: &ViscosityLaw,
    p: f64,
    r: f64,
    regime: Regime,
    c_r: f64,
    c_0: f64,
) -> Result<SmallnessReport> {
    crate::exponents::admissibility(regime, data.grid().dim(), p, r).into_result()?;
    law.validate()?;
    let (uh, ud) = data.velocity_besov(p, r)?;
    let nu_dev = law.deviation();
    let eta = eta_value(nu_dev, uh, ud, c_r, r, regime);
    Ok(SmallnessReport { nu_dev, uh_besov: uh, ud_besov: ud, c_r, c_0, eta, regime, p, r, below_threshold: eta <= c_0 })
}
