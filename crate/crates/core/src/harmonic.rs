//! Heat semigroup, heat-kernel norms, Riesz operators and the Leray projection.

use rustfft::num_complex::Complex;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::field::{Shape, SpectralField};
use crate::scalar::Real;

/// `e^{tΔ}` as the multiplier `e^{−|k|²t}`.
pub fn heat_propagate<T: Real>(field: &SpectralField<T>, t: T) -> Result<SpectralField<T>> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidArgument(format!("negative heat time {t}")));
    }
    if t == T::zero() {
        return Ok(field.clone());
    }
    let g = field.grid().clone();
    Ok(field.apply_real_multiplier(|i| (-g.k2(i) * t).exp()))
}

/// Closed-form `L^q` norms of `K(1,·)` and `Ω(1,·) = ∇K(1,·)` for the kernel
/// `K(t,x) = (4πt)^{−d/2} e^{−|x|²/(4t)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelNormTable {
    pub dim: usize,
    pub q: f64,
    pub kernel: f64,
    pub grad_kernel: f64,
}

impl KernelNormTable {
    pub fn new(dim: usize, q: f64) -> Result<Self> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidArgument(format!("kernel norm exponent {q} outside [1,∞)")));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension 0".into()));
        }
        let d = dim as f64;
        let four_pi = 4.0 * std::f64::consts::PI;
        // ∫ K^q = (4π)^{−dq/2} (4π/q)^{d/2}
        let ln_kq = -d * q / 2.0 * four_pi.ln() + d / 2.0 * (four_pi / q).ln();
        // |Ω| = |x|/2 · K, and ∫|x|^q e^{−a|x|²} = π^{d/2} Γ((q+d)/2) / (Γ(d/2) a^{(q+d)/2}), a = q/4
        let a = q / 4.0;
        let ln_moment = d / 2.0 * std::f64::consts::PI.ln() + ln_gamma((q + d) / 2.0)
            - ln_gamma(d / 2.0)
            - (q + d) / 2.0 * a.ln();
        let ln_oq = -q * 2f64.ln() - d * q / 2.0 * four_pi.ln() + ln_moment;
        Ok(Self { dim, q, kernel: (ln_kq / q).exp(), grad_kernel: (ln_oq / q).exp() })
    }

    /// `d/(2q′)` with `1/q′ = 1 − 1/q`.
    pub fn decay_exponent(&self) -> f64 {
        self.dim as f64 / 2.0 * (1.0 - 1.0 / self.q)
    }
}

/// `‖K(t,·)‖_{L^q} = ‖K(1,·)‖_{L^q} t^{−d/(2q′)}`.
pub fn heat_kernel_norm(t: f64, q: f64, dim: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel time {t} must be positive")));
    }
    let tab = KernelNormTable::new(dim, q)?;
    Ok(tab.kernel * t.powf(-tab.decay_exponent()))
}

/// `‖Ω(t,·)‖_{L^q} = ‖Ω(1,·)‖_{L^q} t^{−d/(2q′)−1/2}`.
pub fn grad_heat_kernel_norm(t: f64, q: f64, dim: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel time {t} must be positive")));
    }
    let tab = KernelNormTable::new(dim, q)?;
    Ok(tab.grad_kernel * t.powf(-tab.decay_exponent() - 0.5))
}

/// `R_j` with multiplier `−i k_j/|k|`; zero mode and Nyquist plane along `j` map to 0.
pub fn riesz_transform<T: Real>(field: &SpectralField<T>, j: usize) -> Result<SpectralField<T>> {
    let g = field.grid().clone();
    if j >= g.dim() {
        return Err(Error::InvalidArgument(format!("Riesz index {j} >= dim {}", g.dim())));
    }
    Ok(field.map_modes(|i, z| {
        let k2 = g.k2(i);
        if k2 == T::zero() || g.is_nyquist(i, j) {
            Complex::new(T::zero(), T::zero())
        } else {
            let m = g.wavevector(i)[j] / k2.sqrt();
            // −i m z
            Complex::new(z.im * m, -z.re * m)
        }
    }))
}

/// `R·v = Σ_j R_j v_j` for a vector field.
pub fn riesz_divergence<T: Real>(v: &SpectralField<T>) -> Result<SpectralField<T>> {
    if v.shape() != Shape::Vector {
        return Err(Error::Shape("R· needs a vector field".into()));
    }
    let d = v.grid().dim();
    let mut acc = riesz_transform(&v.component(0), 0)?;
    for j in 1..d {
        acc = acc.add(&riesz_transform(&v.component(j), j)?)?;
    }
    Ok(acc)
}

/// `R·R·M = Σ_{ij} R_i R_j M_ij` for a matrix field.
pub fn riesz_double_contraction<T: Real>(m: &SpectralField<T>) -> Result<SpectralField<T>> {
    if m.shape() != Shape::Matrix {
        return Err(Error::Shape("R·R· needs a matrix field".into()));
    }
    let d = m.grid().dim();
    let mut acc = SpectralField::zeros(m.grid(), Shape::Scalar);
    for i in 0..d {
        for j in 0..d {
            let t = riesz_transform(&riesz_transform(&m.component(i * d + j), j)?, i)?;
            acc = acc.add(&t)?;
        }
    }
    Ok(acc)
}

/// `(√−Δ)^{−1}` with multiplier `1/|k|`; the zero mode is dropped.
pub fn riesz_potential<T: Real>(field: &SpectralField<T>) -> SpectralField<T> {
    let g = field.grid().clone();
    let npts = g.npts();
    for c in 0..field.components() {
        let z0 = field.coefficients()[c * npts];
        if z0.norm() > T::tiny() * field.energy().sqrt().max(T::one()) {
            log::debug!("riesz_potential: dropping zero mode {:?} of component {c}", z0);
        }
    }
    field.apply_real_multiplier(|i| {
        let k2 = g.k2(i);
        if k2 == T::zero() {
            T::zero()
        } else {
            T::one() / k2.sqrt()
        }
    })
}

/// `(−Δ)^{−1}` with multiplier `1/|k|²`; the zero mode is dropped.
pub fn inverse_laplacian<T: Real>(field: &SpectralField<T>) -> SpectralField<T> {
    let g = field.grid().clone();
    field.apply_real_multiplier(|i| {
        let k2 = g.k2(i);
        if k2 == T::zero() {
            T::zero()
        } else {
            T::one() / k2
        }
    })
}

/// Leray projection `I − kkᵀ/|k|²`; the zero mode passes through and
/// Nyquist-carrying modes are zeroed.
pub fn leray_project<T: Real>(field: &SpectralField<T>) -> Result<SpectralField<T>> {
    if field.shape() != Shape::Vector {
        return Err(Error::Shape(format!(
            "Leray projection needs {} components",
            field.grid().dim()
        )));
    }
    let g = field.grid().clone();
    let d = g.dim();
    let npts = g.npts();
    let src = field.coefficients();
    let mut out = src.to_vec();
    for i in 0..npts {
        let k2 = g.k2(i);
        if k2 == T::zero() {
            continue;
        }
        if g.has_nyquist(i) {
            // the Nyquist partner of k is not −k, so the projector would break symmetry
            for a in 0..d {
                out[a * npts + i] = Complex::new(T::zero(), T::zero());
            }
            continue;
        }
        let k = g.wavevector(i);
        let mut dot = Complex::new(T::zero(), T::zero());
        for a in 0..d {
            dot = dot + src[a * npts + i] * k[a];
        }
        let dot = dot / k2;
        for a in 0..d {
            out[a * npts + i] = src[a * npts + i] - dot * k[a];
        }
    }
    SpectralField::from_coefficients(&g, Shape::Vector, out)
}
