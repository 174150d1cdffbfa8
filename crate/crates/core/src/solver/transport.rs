use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::duhamel::Timeline;
use crate::error::{Error, Result};
use crate::field::{PhysicalField, Shape, SpectralField};
use crate::scalar::Real;

use super::data::divergence_tolerance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportOptions {
    /// `max|u|·dt_sub ≤ cfl·(L/N)`.
    pub cfl: f64,
    pub max_substeps: usize,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { cfl: 0.5, max_substeps: 20_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransportStats {
    pub substeps: usize,
    pub max_speed: f64,
}

/// `−div(θ u)` with dealiased inputs and output.
fn advection<T: Real>(theta: &SpectralField<T>, u: &PhysicalField<T>) -> SpectralField<T> {
    let grid = theta.grid();
    let d = grid.dim();
    let npts = grid.npts();
    let th = theta.dealiased().to_physical();
    let tv = th.values();
    let mut flux = u.clone();
    for (j, v) in flux.values_mut().iter_mut().enumerate() {
        *v = *v * tv[j % npts];
    }
    let flux = flux.to_spectral().dealiased();
    let mut out = SpectralField::zeros(grid, Shape::Scalar);
    let z = out.coefficients_mut();
    for a in 0..d {
        let fa = flux.component_coefficients(a);
        for (i, zi) in z.iter_mut().enumerate() {
            if grid.is_nyquist(i, a) {
                continue;
            }
            let k = grid.wavevector(i)[a];
            // −i k f
            *zi = *zi + Complex::new(fa[i].im * k, -fa[i].re * k);
        }
    }
    out
}

fn blend<T: Real>(a: &PhysicalField<T>, b: &PhysicalField<T>, s: T) -> PhysicalField<T> {
    let vals = a.values().iter().zip(b.values()).map(|(&x, &y)| x + (y - x) * s).collect();
    PhysicalField::from_values(a.grid(), a.shape(), vals).expect("same shape")
}

fn max_speed<T: Real>(u: &PhysicalField<T>) -> f64 {
    u.magnitude().into_iter().fold(T::zero(), |a, b| a.max(b)).to64()
}

/// `∂_t θ − εΔθ + div(θu) = 0` on the nodes of `u`, by integrating-factor
/// RK4 with `u` linear in time between nodes.
pub fn transport_step<T: Real>(theta_init: &SpectralField<T>, u: &Timeline<T>, eps: f64) -> Result<Timeline<T>> {
    transport_step_with(theta_init, u, eps, &TransportOptions::default()).map(|(t, _)| t)
}

pub fn transport_step_with<T: Real>(
    theta_init: &SpectralField<T>,
    u: &Timeline<T>,
    eps: f64,
    opts: &TransportOptions,
) -> Result<(Timeline<T>, TransportStats)> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("diffusivity {eps} must be >= 0")));
    }
    if theta_init.shape() != Shape::Scalar || u.shape() != Shape::Vector {
        return Err(Error::Shape("transport needs scalar theta and vector u".into()));
    }
    if theta_init.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = u.grid().clone();
    let tol = divergence_tolerance::<T>();
    for s in u.snapshots() {
        let div = crate::field::divergence(s)?.energy().to64().sqrt();
        let grad = crate::field::gradient(s)?.energy().to64().sqrt();
        if div > tol * grad.max(f64::MIN_POSITIVE) && div > 0.0 {
            return Err(Error::Divergence(if grad == 0.0 { div } else { div / grad }));
        }
    }
    let moving = u.snapshots().iter().any(|s| s.coefficients().iter().any(|z| z.norm() != T::zero()));
    let phys: Vec<PhysicalField<T>> = if moving {
        u.snapshots().iter().map(|s| s.dealiased().to_physical()).collect()
    } else {
        Vec::new()
    };
    let dx = grid.spacing().to64();
    let times = u.times();
    let mut theta = theta_init.clone();
    let mut out = vec![theta.clone()];
    let mut stats = TransportStats::default();
    let k2 = grid.k2_all().to_vec();
    let npts = grid.npts();
    for i in 0..times.len() - 1 {
        let hh = times[i + 1] - times[i];
        if !moving {
            let f = (-eps * hh).exp();
            theta = theta.apply_real_multiplier(|j| T::of(f.powf(k2[j].to64())));
            out.push(theta.clone());
            continue;
        }
        let speed = max_speed(&phys[i]).max(max_speed(&phys[i + 1]));
        stats.max_speed = stats.max_speed.max(speed);
        let sub = ((hh * speed / (opts.cfl * dx)).ceil() as usize).max(1);
        if sub > opts.max_substeps {
            return Err(Error::CflFailure { t: times[i], max: opts.max_substeps });
        }
        stats.substeps += sub;
        let h = hh / sub as f64;
        let half: Vec<T> = (0..npts).map(|j| T::of((-eps * k2[j].to64() * h / 2.0).exp())).collect();
        let e = |f: &SpectralField<T>| f.apply_real_multiplier(|j| half[j]);
        let vel = |s: f64| blend(&phys[i], &phys[i + 1], T::of(s / hh));
        for m in 0..sub {
            let s0 = m as f64 * h;
            let (ua, ub, uc) = (vel(s0), vel(s0 + h / 2.0), vel(s0 + h));
            let hf = T::of(h);
            let two = T::of(2.0);
            let k1 = advection(&theta, &ua);
            let mut y = theta.clone();
            y.axpy(hf / two, &k1)?;
            let k2s = advection(&e(&y), &ub);
            let mut y = e(&theta);
            y.axpy(hf / two, &k2s)?;
            let k3 = advection(&y, &ub);
            let ee = e(&e(&theta));
            let mut y = ee.clone();
            y.axpy(hf, &e(&k3))?;
            let k4 = advection(&y, &uc);
            let mut next = ee;
            next.axpy(hf / T::of(6.0), &e(&e(&k1)))?;
            next.axpy(hf / T::of(3.0), &e(&k2s.add(&k3)?))?;
            next.axpy(hf / T::of(6.0), &k4)?;
            theta = next;
        }
        if !theta.is_finite() {
            return Err(Error::NonFinite(format!("temperature at t={}", times[i + 1])));
        }
        out.push(theta.clone());
    }
    Ok((Timeline::new(times.to_vec(), out)?, stats))
}
