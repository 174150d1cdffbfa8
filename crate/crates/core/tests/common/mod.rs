#![allow(dead_code)]

use std::f64::consts::TAU;

use boussinesq_core::config::{RunConfig, TemperatureGen, VelocityGen};
use boussinesq_core::duhamel::{etd_weights, Timeline};
use boussinesq_core::exponents::Regime;
use boussinesq_core::field::{derivative, multiply, Grid, PhysicalField, Shape, SpectralField};
use boussinesq_core::harmonic::leray_project;
use boussinesq_core::solver::{InitialData, SolverConfig, ViscosityLaw};

pub fn grid(dim: usize, n: usize) -> Grid<f64> {
    Grid::new(dim, n, TAU).unwrap()
}

/// `θ̄ = th·cos(x₁+x₂)`, `ū = (a sin x₂, b sin x₁)` on the 2π box.
pub fn shear_data(n: usize, a: f64, b: f64, th: f64) -> InitialData<f64> {
    let g = grid(2, n);
    let u = PhysicalField::from_fn(&g, Shape::Vector, |x, c| if c == 0 { a * x[1].sin() } else { b * x[0].sin() });
    let t = PhysicalField::scalar_fn(&g, |x| th * (x[0] + x[1]).cos());
    InitialData::from_prepared(t.to_spectral().dealiased(), u.to_spectral().dealiased()).unwrap()
}

pub fn theorem1(eps: f64) -> SolverConfig {
    SolverConfig { eps, c_r: 1e-7, ..SolverConfig::default() }
}

pub fn theorem2(eps: f64) -> SolverConfig {
    SolverConfig { regime: Regime::Theorem2, p: 1.6, r: 16.0, shift: 0.02, eps, c_r: 1e-12, ..SolverConfig::default() }
}

pub struct Case {
    pub name: &'static str,
    pub data: InitialData<f64>,
    pub law: ViscosityLaw,
    pub cfg: SolverConfig,
}

pub fn manifest(temp: TemperatureGen, vel: VelocityGen, truncation: Option<i32>) -> InitialData<f64> {
    let mut c = RunConfig::default();
    c.data.temperature = temp;
    c.data.velocity = vel;
    c.data.truncation = truncation;
    c.seed = 11;
    c.initial_data().unwrap()
}

/// Six small-data configurations across both regimes and both `ε` cases.
pub fn regression_corpus() -> Vec<Case> {
    let tanh = ViscosityLaw::tanh(0.02).unwrap();
    let table = ViscosityLaw::UserTable { theta: vec![-1.0, 0.0, 1.0], nu: vec![0.98, 1.0, 1.03] };
    vec![
        Case { name: "theorem1 shear eps=0.1", data: shear_data(64, 0.001, 0.3, 0.5), law: tanh.clone(), cfg: theorem1(0.1) },
        Case { name: "theorem1 shear eps=0", data: shear_data(64, 0.001, 0.3, 0.5), law: tanh.clone(), cfg: theorem1(0.0) },
        Case {
            name: "theorem1 interface table eps=0.05",
            data: manifest(
                TemperatureGen::Interface { amplitude: 0.4 },
                VelocityGen::Shear { horizontal: 0.001, vertical: 0.2, mode: 1 },
                Some(1),
            ),
            law: table,
            cfg: theorem1(0.05),
        },
        Case { name: "theorem2 shear eps=0.1", data: shear_data(64, 0.001, 0.3, 0.5), law: tanh.clone(), cfg: theorem2(0.1) },
        Case { name: "theorem2 shear eps=0", data: shear_data(64, 0.001, 0.3, 0.5), law: tanh.clone(), cfg: theorem2(0.0) },
        Case {
            name: "theorem2 random eps=0.1",
            data: manifest(
                TemperatureGen::RandomBandLimited { max_mode: 3, terms: 4, amplitude: 0.2 },
                VelocityGen::RandomBandLimited { max_mode: 2, terms: 3, amplitude: 0.005 },
                None,
            ),
            law: tanh,
            cfg: theorem2(0.1),
        },
    ]
}

/// Mild Navier–Stokes `u = e^{tΔ}ū − ∫ e^{(t−s)Δ} P div(u⊗u) ds` on the given
/// nodes with piecewise-linear forcing, iterated to a fixed point.
pub fn navier_stokes_mild(u0: &SpectralField<f64>, times: &[f64], tol: f64, max_iter: usize) -> Timeline<f64> {
    let g = u0.grid().clone();
    let d = g.dim();
    let npts = g.npts();
    let forcing = |u: &SpectralField<f64>| -> SpectralField<f64> {
        let comps: Vec<SpectralField<f64>> = (0..d)
            .map(|i| {
                let ui = u.component(i);
                let mut acc = SpectralField::zeros(&g, Shape::Scalar);
                for j in 0..d {
                    let prod = multiply(&ui, &u.component(j)).unwrap();
                    acc = acc.add(&derivative(&prod, j).unwrap()).unwrap();
                }
                acc.scaled(-1.0)
            })
            .collect();
        leray_project(&SpectralField::from_components(comps).unwrap()).unwrap()
    };
    let heat: Vec<SpectralField<f64>> = times
        .iter()
        .map(|&t| u0.apply_real_multiplier(|i| (-g.k2(i) * t).exp()))
        .collect();
    let mut u = heat.clone();
    for _ in 0..max_iter {
        let f: Vec<_> = u.iter().map(&forcing).collect();
        let mut next = vec![heat[0].clone()];
        let mut acc = SpectralField::zeros(&g, Shape::Vector);
        for i in 0..times.len() - 1 {
            let h = times[i + 1] - times[i];
            let (fa, fb) = (f[i].coefficients(), f[i + 1].coefficients());
            for (j, z) in acc.coefficients_mut().iter_mut().enumerate() {
                let (e, wa, wb) = etd_weights(g.k2(j % npts), h);
                *z = *z * e + fa[j] * wa + fb[j] * wb;
            }
            next.push(heat[i + 1].add(&acc).unwrap());
        }
        let change = next
            .iter()
            .zip(&u)
            .map(|(a, b)| a.sub(b).unwrap().lp_norm(2.0).unwrap())
            .fold(0.0, f64::max);
        let scale = next.iter().map(|a| a.lp_norm(2.0).unwrap()).fold(0.0, f64::max);
        u = next;
        if change <= tol * scale.max(1e-300) {
            break;
        }
    }
    Timeline::new(times.to_vec(), u).unwrap()
}

/// Largest nodewise `‖a − b‖₂ / max_t ‖b‖₂`.
pub fn timeline_distance(a: &Timeline<f64>, b: &Timeline<f64>) -> f64 {
    let scale = b.snapshots().iter().map(|s| s.lp_norm(2.0).unwrap()).fold(0.0, f64::max);
    let err = a
        .snapshots()
        .iter()
        .zip(b.snapshots())
        .map(|(x, y)| x.sub(y).unwrap().lp_norm(2.0).unwrap())
        .fold(0.0, f64::max);
    if scale > 0.0 { err / scale } else { err }
}

/// Uniform samples in `[−1, 1]` on every lattice point.
pub fn random_physical(g: &Grid<f64>, shape: Shape, seed: u64) -> PhysicalField<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = shape.components(g.dim()) * g.npts();
    PhysicalField::from_values(g, shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Dealiased, Nyquist-free, mean-zero random field.
pub fn random_smooth(g: &Grid<f64>, shape: Shape, seed: u64) -> SpectralField<f64> {
    let f = random_physical(g, shape, seed).to_spectral().dealiased().without_nyquist();
    f.map_modes(|i, z| if g.k2(i) == 0.0 { z * 0.0 } else { z })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
