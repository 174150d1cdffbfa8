use serde::{Deserialize, Serialize};

use super::timeline::Timeline;
use crate::error::{Error, Result};
use crate::field::{gradient, Grid, SpectralField};
use crate::scalar::Real;

/// Which heat-semigroup convolution: `A` (Laplacian), `B` (gradient), `C` (plain).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DuhamelKind {
    A,
    B,
    C,
}

impl DuhamelKind {
    pub fn name(self) -> &'static str {
        match self {
            DuhamelKind::A => "A",
            DuhamelKind::B => "B",
            DuhamelKind::C => "C",
        }
    }
}

/// `h(s,t) = exp{−λ(H(t) − H(s))}` with `H` the trapezoidal primitive of a
/// nonnegative per-node integrand, linear between nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct DampingWeight {
    pub lambda: f64,
    times: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DampingWeight {
    pub fn new(times: &[f64], integrand: &[f64], lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("damping lambda {lambda} must be >= 0")));
        }
        if times.len() != integrand.len() {
            return Err(Error::InvalidArgument("integrand length differs from node count".into()));
        }
        if integrand.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::NonFinite("damping integrand".into()));
        }
        let mut cumulative = vec![0.0; times.len()];
        for i in 1..times.len() {
            cumulative[i] = cumulative[i - 1] + 0.5 * (times[i] - times[i - 1]) * (integrand[i] + integrand[i - 1]);
        }
        Ok(Self { lambda, times: times.to_vec(), cumulative })
    }

    pub fn undamped(times: &[f64]) -> Self {
        Self { lambda: 0.0, times: times.to_vec(), cumulative: vec![0.0; times.len()] }
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("damping lambda {lambda} must be >= 0")));
        }
        Ok(Self { lambda, ..self.clone() })
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `h(t_i, t_j)` between nodes.
    pub fn h(&self, i: usize, j: usize) -> f64 {
        (-self.lambda * (self.cumulative[j] - self.cumulative[i])).exp()
    }

    /// `λ · dH/dt` on interval `i`.
    pub fn rate(&self, i: usize) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        self.lambda * (self.cumulative[i + 1] - self.cumulative[i]) / (self.times[i + 1] - self.times[i])
    }
}

/// Per-interval weights of the exponentially weighted trapezoid rule for
/// `∫_0^h e^{−a(h−τ)} f(τ) dτ` with `f` linear: returns
/// `(e^{−ah}, weight of f(0), weight of f(h))`.
pub fn etd_weights(a: f64, h: f64) -> (f64, f64, f64) {
    let z = a * h;
    let (e1, g) = if z.abs() < 1e-3 {
        (
            1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0,
            0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0,
        )
    } else {
        let em = (-z).exp();
        (-(-z).exp_m1() / z, (1.0 - em * (1.0 + z)) / (z * z))
    };
    ((-z).exp(), h * g, h * (e1 - g))
}

/// Precomputed per-mode exponential-integrator weights on a fixed node grid.
pub struct ExpIntegrator<T: Real> {
    grid: Grid<T>,
    times: Vec<f64>,
    decay: Vec<Vec<T>>,
    w_old: Vec<Vec<T>>,
    w_new: Vec<Vec<T>>,
}

impl<T: Real> ExpIntegrator<T> {
    pub fn new(grid: &Grid<T>, times: &[f64], damping: Option<&DampingWeight>) -> Result<Self> {
        if let Some(d) = damping {
            if d.times() != times {
                return Err(Error::InvalidArgument("damping weight on different nodes".into()));
            }
        }
        let npts = grid.npts();
        let m = times.len() - 1;
        let mut decay = Vec::with_capacity(m);
        let mut w_old = Vec::with_capacity(m);
        let mut w_new = Vec::with_capacity(m);
        for i in 0..m {
            let h = times[i + 1] - times[i];
            let extra = damping.map_or(0.0, |d| d.rate(i));
            let (mut dv, mut wo, mut wn) = (Vec::with_capacity(npts), Vec::with_capacity(npts), Vec::with_capacity(npts));
            for idx in 0..npts {
                let (e, a, b) = etd_weights(grid.k2(idx).to64() + extra, h);
                dv.push(T::of(e));
                wo.push(T::of(a));
                wn.push(T::of(b));
            }
            decay.push(dv);
            w_old.push(wo);
            w_new.push(wn);
        }
        Ok(Self { grid: grid.clone(), times: times.to_vec(), decay, w_old, w_new })
    }

    /// `∫_0^{t_i} h(s,t_i) e^{(t_i−s)Δ} f(s) ds` at every node.
    pub fn convolve(&self, f: &Timeline<T>) -> Result<Timeline<T>> {
        if f.times() != self.times.as_slice() {
            return Err(Error::InvalidArgument("forcing on different nodes".into()));
        }
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let npts = self.grid.npts();
        let mut out = Vec::with_capacity(f.len());
        let mut u = SpectralField::zeros(&self.grid, f.shape());
        out.push(u.clone());
        for i in 0..self.times.len() - 1 {
            let fa = f.snapshot(i).coefficients();
            let fb = f.snapshot(i + 1).coefficients();
            let (dv, wo, wn) = (&self.decay[i], &self.w_old[i], &self.w_new[i]);
            for (j, z) in u.coefficients_mut().iter_mut().enumerate() {
                let idx = j % npts;
                *z = *z * dv[idx] + fa[j] * wo[idx] + fb[j] * wn[idx];
            }
            out.push(u.clone());
        }
        Timeline::new(self.times.clone(), out)
    }
}

fn step_modes<T: Real>(
    u: &mut SpectralField<T>,
    fa: &SpectralField<T>,
    fb: &SpectralField<T>,
    h: f64,
    extra: f64,
) {
    let g = u.grid().clone();
    let npts = g.npts();
    let (a, b) = (fa.coefficients(), fb.coefficients());
    for (j, z) in u.coefficients_mut().iter_mut().enumerate() {
        let (e, wo, wn) = etd_weights(g.k2(j % npts).to64() + extra, h);
        *z = *z * T::of(e) + a[j] * T::of(wo) + b[j] * T::of(wn);
    }
}

/// Plain convolution `∫_0^t h(s,t) e^{(t−s)Δ} f(s) ds` at an arbitrary time.
pub fn convolve_at<T: Real>(f: &Timeline<T>, t: f64, damping: Option<&DampingWeight>) -> Result<SpectralField<T>> {
    let i_end = f.locate(t)?;
    let times = f.times();
    let mut u = SpectralField::zeros(f.grid(), f.shape());
    for i in 0..i_end {
        let extra = damping.map_or(0.0, |d| d.rate(i));
        step_modes(&mut u, f.snapshot(i), f.snapshot(i + 1), times[i + 1] - times[i], extra);
    }
    let h = t - times[i_end];
    if h > 0.0 {
        let extra = damping.map_or(0.0, |d| d.rate(i_end));
        let ft = f.at(t)?;
        step_modes(&mut u, f.snapshot(i_end), &ft, h, extra);
    }
    Ok(u)
}

/// Applies the operator's spatial multiplier to a plain convolution.
pub fn apply_kind<T: Real>(kind: DuhamelKind, u: &SpectralField<T>) -> Result<SpectralField<T>> {
    match kind {
        DuhamelKind::C => Ok(u.clone()),
        DuhamelKind::B => gradient(u),
        DuhamelKind::A => {
            let g = u.grid().clone();
            Ok(u.map_modes(|i, z| z * (-g.k2(i))))
        }
    }
}

/// `Cf(t) = ∫_0^t e^{(t−s)Δ} f(s) ds`.
pub fn duhamel_c<T: Real>(f: &Timeline<T>, t: f64) -> Result<SpectralField<T>> {
    convolve_at(f, t, None)
}

/// `Bf(t) = ∫_0^t ∇e^{(t−s)Δ} f(s) ds`.
pub fn duhamel_b<T: Real>(f: &Timeline<T>, t: f64) -> Result<SpectralField<T>> {
    apply_kind(DuhamelKind::B, &convolve_at(f, t, None)?)
}

/// `Af(t) = ∫_0^t Δe^{(t−s)Δ} f(s) ds`.
pub fn duhamel_a<T: Real>(f: &Timeline<T>, t: f64) -> Result<SpectralField<T>> {
    apply_kind(DuhamelKind::A, &convolve_at(f, t, None)?)
}

/// The operator evaluated at every node, optionally damped.
pub fn duhamel_timeline<T: Real>(
    kind: DuhamelKind,
    f: &Timeline<T>,
    damping: Option<&DampingWeight>,
) -> Result<Timeline<T>> {
    let plan = ExpIntegrator::new(f.grid(), f.times(), damping)?;
    let u = plan.convolve(f)?;
    if kind == DuhamelKind::C {
        return Ok(u);
    }
    u.try_map(|_, s| apply_kind(kind, s))
}
