use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duhamel::{ExpIntegrator, Timeline};
use crate::error::{Error, Result};
use crate::field::{derivative, divergence, symmetric_gradient, multiply, PhysicalField, Shape, SpectralField};
use crate::harmonic::{heat_propagate, leray_project, riesz_divergence, riesz_double_contraction, riesz_potential};
use crate::monitor::NormContext;
use crate::scalar::Real;

use super::data::InitialData;
use super::viscosity::ViscosityLaw;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesOptions {
    /// Relative update in the damped inner norm at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StokesOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 50 }
    }
}

#[derive(Clone, Debug)]
pub struct StokesOutput<T: Real> {
    pub u: Timeline<T>,
    pub pi: Timeline<T>,
    /// `g_{n+1}` at the converged inner iterate.
    pub g: Timeline<T>,
    pub iterations: usize,
    /// Relative inner updates in the undamped norm, one per iteration.
    pub updates: Vec<f64>,
    /// Ratios of successive undamped updates.
    pub factors: Vec<f64>,
    /// Ratios of successive updates in the `h_λ`-damped norm.
    pub damped_factors: Vec<f64>,
}

/// `u_n`-dependent parts of the forcing at one node.
struct Background<T: Real> {
    ud: Vec<T>,
    /// `∂_j u_n^d` for horizontal `j`.
    dud: Vec<Vec<T>>,
    /// `−u_n^h·∇^h u_n^h` in the horizontal components.
    advective: SpectralField<T>,
    /// `div{(ν(θ)−1) M_n}`.
    viscous: SpectralField<T>,
}

fn phys<T: Real>(f: &SpectralField<T>) -> PhysicalField<T> {
    f.dealiased().to_physical()
}

/// `(ν(θ) − 1) M` with `M = ∇u + ᵗ∇u`.
pub fn viscous_stress<T: Real>(u: &SpectralField<T>, theta: &SpectralField<T>, law: &ViscosityLaw) -> Result<SpectralField<T>> {
    if law.is_constant() {
        return Ok(SpectralField::zeros(u.grid(), Shape::Matrix));
    }
    multiply(&law.minus_one(theta)?, &symmetric_gradient(u)?)
}

fn background<T: Real>(un: &SpectralField<T>, theta: &SpectralField<T>, law: &ViscosityLaw) -> Result<Background<T>> {
    let grid = un.grid();
    let d = grid.dim();
    let npts = grid.npts();
    let dv = d - 1;
    let up = phys(un);
    let ud = up.component(dv).to_vec();
    let vert = un.component(dv);
    let dud = (0..dv)
        .map(|j| Ok(phys(&derivative(&vert, j)?).into_values()))
        .collect::<Result<Vec<_>>>()?;
    // horizontal transport of the horizontal components
    let mut adv = vec![T::zero(); d * npts];
    for h in 0..dv {
        let comp = un.component(h);
        for j in 0..dv {
            let dj = phys(&derivative(&comp, j)?);
            let uj = up.component(j);
            for (i, v) in dj.values().iter().enumerate() {
                adv[h * npts + i] = adv[h * npts + i] - uj[i] * *v;
            }
        }
    }
    let advective = PhysicalField::from_values(grid, Shape::Vector, adv)?.to_spectral().dealiased();
    let viscous = divergence(&viscous_stress(un, theta, law)?)?;
    Ok(Background { ud, dud, advective, viscous })
}

/// `w`-dependent part of `g`: `−u_n^d ∂_d w^h` and `−∇^h u_n^d·w^h + u_n^d div^h w^h`.
fn coupling<T: Real>(bg: &Background<T>, w: &SpectralField<T>) -> Result<SpectralField<T>> {
    let grid = w.grid();
    let d = grid.dim();
    let npts = grid.npts();
    let dv = d - 1;
    let wp = phys(w);
    let mut out = vec![T::zero(); d * npts];
    let mut divh = vec![T::zero(); npts];
    for h in 0..dv {
        let comp = w.component(h);
        let ddw = phys(&derivative(&comp, dv)?);
        for (i, v) in ddw.values().iter().enumerate() {
            out[h * npts + i] = -bg.ud[i] * *v;
        }
        let dhw = phys(&derivative(&comp, h)?);
        for (i, v) in dhw.values().iter().enumerate() {
            divh[i] = divh[i] + *v;
        }
        let wh = wp.component(h);
        for i in 0..npts {
            out[dv * npts + i] = out[dv * npts + i] - bg.dud[h][i] * wh[i];
        }
    }
    for i in 0..npts {
        out[dv * npts + i] = out[dv * npts + i] + bg.ud[i] * divh[i];
    }
    Ok(PhysicalField::from_values(grid, Shape::Vector, out)?.to_spectral().dealiased())
}

fn check_inputs<T: Real>(u_prev: &Timeline<T>, theta: &Timeline<T>, data: &InitialData<T>) -> Result<()> {
    if !u_prev.same_nodes(theta) {
        return Err(Error::InvalidArgument("velocity and temperature on different time nodes".into()));
    }
    if u_prev.grid() != theta.grid() || u_prev.grid() != data.grid() {
        return Err(Error::GridMismatch);
    }
    if u_prev.shape() != Shape::Vector || theta.shape() != Shape::Scalar {
        return Err(Error::Shape("Stokes solve needs vector u_prev and scalar theta".into()));
    }
    Ok(())
}

/// `g_{n+1}` for a given candidate `w = u_{n+1}`.
pub fn momentum_forcing<T: Real>(u_prev: &Timeline<T>, w: &Timeline<T>) -> Result<Timeline<T>> {
    let law = ViscosityLaw::Constant;
    let zero = SpectralField::zeros(u_prev.grid(), Shape::Scalar);
    u_prev.try_map(|i, un| {
        let bg = background(un, &zero, &law)?;
        bg.advective.add(&coupling(&bg, w.snapshot(i))?)
    })
}

/// `Π = (√−Δ)^{−1} R·g − R·R·{(ν(θ)−1) M_n}`, written with `R_j = −i k_j/|k|`
/// so that `∇Π` is the gradient part of `g + div{(ν−1)M_n}`.
pub fn recover_pressure<T: Real>(
    g: &Timeline<T>,
    theta: &Timeline<T>,
    u_prev: &Timeline<T>,
    law: &ViscosityLaw,
) -> Result<Timeline<T>> {
    if !g.same_nodes(theta) || !g.same_nodes(u_prev) {
        return Err(Error::InvalidArgument("pressure inputs on different time nodes".into()));
    }
    let snaps = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let a = riesz_potential(&riesz_divergence(g.snapshot(i))?);
            if law.is_constant() {
                return Ok(a);
            }
            let m = viscous_stress(u_prev.snapshot(i), theta.snapshot(i), law)?;
            a.sub(&riesz_double_contraction(&m)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Timeline::new(g.times().to_vec(), snaps)
}

/// `u_{n+1}` and `Π_{n+1}` with default options, the regime's inner norm
/// and the given damping `λ`.
pub fn linear_stokes_solve<T: Real>(
    u_prev: &Timeline<T>,
    theta_new: &Timeline<T>,
    data: &InitialData<T>,
    law: &ViscosityLaw,
    lambda: f64,
    ctx: &NormContext,
) -> Result<(Timeline<T>, Timeline<T>)> {
    let out = linear_stokes_solve_with(u_prev, theta_new, data, law, lambda, ctx, &StokesOptions::default(), None)?;
    Ok((out.u, out.pi))
}

/// Solves `u = e^{tΔ}ū + ∫e^{(t−s)Δ} P[g(u) + div{(ν(θ)−1)M_n}] ds` by
/// fixed-point iteration in `u`, measured in the `h_λ`-damped inner norm.
#[allow(clippy::too_many_arguments)]
pub fn linear_stokes_solve_with<T: Real>(
    u_prev: &Timeline<T>,
    theta_new: &Timeline<T>,
    data: &InitialData<T>,
    law: &ViscosityLaw,
    lambda: f64,
    ctx: &NormContext,
    opts: &StokesOptions,
    warm: Option<&Timeline<T>>,
) -> Result<StokesOutput<T>> {
    check_inputs(u_prev, theta_new, data)?;
    let grid = data.grid().clone();
    let times = u_prev.times().to_vec();
    let bgs = (0..times.len())
        .into_par_iter()
        .map(|i| background(u_prev.snapshot(i), theta_new.snapshot(i), law))
        .collect::<Result<Vec<_>>>()?;
    let heat = Timeline::try_from_fn(times.clone(), |_, t| heat_propagate(&data.u0, T::of(t)))?;
    let plan = ExpIntegrator::new(&grid, &times, None)?;
    let damping = ctx.damping(u_prev, lambda)?;
    let tol = opts.tol.max(T::epsilon().to64() * 10.0);
    let mut w = match warm {
        Some(w) => w.clone(),
        None => heat.clone(),
    };
    let mut updates = Vec::new();
    let mut factors = Vec::new();
    let mut damped_updates: Vec<f64> = Vec::new();
    let mut damped_factors = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let forcing = (0..times.len())
            .into_par_iter()
            .map(|i| {
                let bg = &bgs[i];
                let g = bg.advective.add(&coupling(bg, w.snapshot(i))?)?;
                leray_project(&g.add(&bg.viscous)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let next = heat.add(&plan.convolve(&Timeline::new(times.clone(), forcing)?)?)?;
        if !next.is_finite() {
            return Err(Error::NonFinite(format!("inner Stokes iterate {iterations}")));
        }
        let (diff, diff_l) = ctx.y_norms(&next.sub(&w)?, &damping)?;
        let (size, size_l) = ctx.y_norms(&next, &damping)?;
        let upd = if size == 0.0 { diff } else { diff / size };
        let upd_l = if size_l == 0.0 { diff_l } else { diff_l / size_l };
        if let Some(&last) = damped_updates.last() {
            let last: f64 = last;
            damped_factors.push(if last == 0.0 { 0.0 } else { upd_l / last });
        }
        damped_updates.push(upd_l);
        if let Some(&last) = updates.last() {
            let last: f64 = last;
            factors.push(if last == 0.0 { 0.0 } else { upd / last });
        }
        updates.push(upd);
        w = next;
        if upd <= tol || diff == 0.0 {
            break;
        }
        if iterations >= opts.max_iter {
            let factor = factors.last().copied().unwrap_or(f64::INFINITY);
            if factor >= 1.0 || upd > tol.sqrt() {
                return Err(Error::InnerStagnation { iterations, factor });
            }
            log::warn!("inner Stokes loop stopped at {iterations} iterations with update {upd:.3e}");
            break;
        }
    }
    let g = Timeline::new(
        times.clone(),
        (0..times.len())
            .into_par_iter()
            .map(|i| bgs[i].advective.add(&coupling(&bgs[i], w.snapshot(i))?))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let pi = recover_pressure(&g, theta_new, u_prev, law)?;
    Ok(StokesOutput { u: w, pi, g, iterations, updates, factors, damped_factors })
}
