//! Homogeneous Besov norms by Littlewood–Paley blocks and by heat flow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, SpectralField};
use crate::harmonic::heat_propagate;
use crate::scalar::Real;

/// Inner and outer radii of the bump's transition, in units of `2^j`.
pub const BUMP_INNER: f64 = 3.0 / 4.0;
pub const BUMP_OUTER: f64 = 4.0 / 3.0;
/// Geometric quadrature density of the heat characterization.
pub const HEAT_POINTS_PER_DECADE: usize = 32;

/// Exponents `(p, r, s)` of `Ḃ^s_{p,r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    pub p: f64,
    pub r: f64,
    pub s: f64,
}

impl BesovIndex {
    pub fn new(p: f64, r: f64, s: f64) -> Result<Self> {
        if !(p >= 1.0) || !(r >= 1.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!("Besov index p={p}, r={r}, s={s}")));
        }
        Ok(Self { p, r, s })
    }

    /// Critical index `Ḃ^{d/p−1}_{p,r}`.
    pub fn critical(dim: usize, p: f64, r: f64) -> Result<Self> {
        Self::new(p, r, s_crit(dim, p))
    }
}

pub fn s_crit(dim: usize, p: f64) -> f64 {
    dim as f64 / p - 1.0
}

fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Radial plateau: 1 on `[0, 3/4]`, 0 beyond `4/3`.
pub fn chi(rho: f64) -> f64 {
    1.0 - smooth_step((rho - BUMP_INNER) / (BUMP_OUTER - BUMP_INNER))
}

/// Annulus bump `φ(ξ) = χ(ξ/2) − χ(ξ)`, supported in `[3/4, 8/3]`.
pub fn phi(rho: f64) -> f64 {
    chi(rho / 2.0) - chi(rho)
}

/// Block range of a grid and its partition-of-unity multipliers.
#[derive(Clone, Debug)]
pub struct DyadicLadder {
    pub j_min: i32,
    pub j_max: i32,
    /// Lattice modes whose raw partition sum falls short of 1 and are
    /// therefore carried by the absorbing end blocks.
    pub absorbed_modes: usize,
}

impl DyadicLadder {
    pub fn for_grid<T: Real>(grid: &crate::field::Grid<T>) -> Result<Self> {
        let l = grid.box_length().to64();
        let n = grid.n_per_axis() as f64;
        let j_min = ((std::f64::consts::TAU / l).log2() - 1e-12).ceil() as i32;
        let j_max = ((std::f64::consts::PI * n / (3.0 * l)).log2() + 1.0 + 1e-12).floor() as i32;
        if j_min > j_max {
            return Err(Error::InvalidGrid(format!("empty dyadic ladder [{j_min}, {j_max}]")));
        }
        let mut absorbed = 0;
        for i in 0..grid.npts() {
            let k = grid.k2(i).to64().sqrt();
            if k == 0.0 {
                continue;
            }
            let raw: f64 = (j_min..=j_max).map(|j| phi(k / 2f64.powi(j))).sum();
            if (raw - 1.0).abs() > 1e-12 {
                absorbed += 1;
            }
        }
        Ok(Self { j_min, j_max, absorbed_modes: absorbed })
    }

    pub fn blocks(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    /// Multiplier of block `j` at wavenumber magnitude `k`; the end blocks
    /// absorb all lower and higher frequencies.
    pub fn multiplier(&self, j: i32, k: f64) -> f64 {
        if k == 0.0 {
            return 0.0;
        }
        if self.j_min == self.j_max {
            return 1.0;
        }
        let lo = chi(k / 2f64.powi(j + 1));
        let hi = chi(k / 2f64.powi(j));
        if j == self.j_min {
            lo
        } else if j == self.j_max {
            1.0 - hi
        } else {
            lo - hi
        }
    }

    /// Heat-quadrature window `[½·2^{−2 j_max}, 8·2^{−2 j_min}]`.
    pub fn heat_window(&self) -> (f64, f64) {
        (0.5 * 2f64.powi(-2 * self.j_max), 8.0 * 2f64.powi(-2 * self.j_min))
    }
}

/// `Δ̇_j f`.
pub fn dyadic_block<T: Real>(field: &SpectralField<T>, j: i32) -> Result<SpectralField<T>> {
    let ladder = DyadicLadder::for_grid(field.grid())?;
    block_with(&ladder, field, j)
}

fn block_with<T: Real>(ladder: &DyadicLadder, field: &SpectralField<T>, j: i32) -> Result<SpectralField<T>> {
    if j < ladder.j_min || j > ladder.j_max {
        return Err(Error::InvalidArgument(format!(
            "block {j} outside ladder [{}, {}]",
            ladder.j_min, ladder.j_max
        )));
    }
    let g = field.grid().clone();
    Ok(field.apply_real_multiplier(|i| T::of(ladder.multiplier(j, g.k2(i).to64().sqrt()))))
}

/// `Σ_{j=lo}^{hi} Δ̇_j f` clipped to the ladder (zero mode excluded).
pub fn partial_sum<T: Real>(field: &SpectralField<T>, lo: i32, hi: i32) -> Result<SpectralField<T>> {
    let ladder = DyadicLadder::for_grid(field.grid())?;
    let g = field.grid().clone();
    let (lo, hi) = (lo.max(ladder.j_min), hi.min(ladder.j_max));
    Ok(field.apply_real_multiplier(|i| {
        let k = g.k2(i).to64().sqrt();
        let m: f64 = (lo..=hi).map(|j| ladder.multiplier(j, k)).sum();
        T::of(m)
    }))
}

fn lr_sum(terms: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|x| x.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// `(Σ_j (2^{js}‖Δ̇_j f‖_{L^p})^r)^{1/r}`.
pub fn besov_norm_dyadic<T: Real>(field: &SpectralField<T>, idx: &BesovIndex) -> Result<f64> {
    let ladder = DyadicLadder::for_grid(field.grid())?;
    let mut terms = Vec::new();
    for j in ladder.blocks() {
        let b = block_with(&ladder, field, j)?;
        terms.push(2f64.powf(j as f64 * idx.s) * b.lp_norm(idx.p)?.to64());
    }
    Ok(lr_sum(terms.into_iter(), idx.r))
}

/// Geometric nodes covering `[lo, hi]` with at least `per_decade` points per decade.
pub fn geometric_nodes(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let m = ((decades * per_decade as f64).ceil() as usize).max(1);
    (0..=m).map(|i| lo * (hi / lo).powf(i as f64 / m as f64)).collect()
}

/// `(∫ (t^{−s/2}‖e^{tΔ}f‖_{L^p})^r dt/t)^{1/r}` over the ladder's heat window.
pub fn besov_norm_heat<T: Real>(field: &SpectralField<T>, idx: &BesovIndex) -> Result<f64> {
    if !(idx.s < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "heat characterization needs s < 0, got {}",
            idx.s
        )));
    }
    let ladder = DyadicLadder::for_grid(field.grid())?;
    let (lo, hi) = ladder.heat_window();
    let ts = geometric_nodes(lo, hi, HEAT_POINTS_PER_DECADE);
    let mut vals = Vec::with_capacity(ts.len());
    for &t in &ts {
        let n = heat_propagate(field, T::of(t))?.lp_norm(idx.p)?.to64();
        vals.push(t.powf(-idx.s / 2.0) * n);
    }
    if idx.r.is_infinite() {
        return Ok(vals.into_iter().fold(0.0, f64::max));
    }
    // trapezoid in log t
    let mut acc = 0.0;
    for i in 0..ts.len() - 1 {
        let du = (ts[i + 1] / ts[i]).ln();
        acc += 0.5 * du * (vals[i].powf(idx.r) + vals[i + 1].powf(idx.r));
    }
    Ok(acc.powf(1.0 / idx.r))
}

/// `‖f‖_{Ḃ^{s−d(1/p1−1/p2)}_{p2,r2}} / ‖f‖_{Ḃ^s_{p1,r1}}`.
pub fn embedding_ratio<T: Real>(
    field: &SpectralField<T>,
    p1: f64,
    r1: f64,
    p2: f64,
    r2: f64,
    s: f64,
) -> Result<f64> {
    if p1 > p2 || r1 > r2 {
        return Err(Error::InvalidArgument(format!(
            "embedding needs p1 <= p2 and r1 <= r2 (got p1={p1}, p2={p2}, r1={r1}, r2={r2})"
        )));
    }
    let d = field.grid().dim() as f64;
    let num = besov_norm_dyadic(field, &BesovIndex::new(p2, r2, s - d * (1.0 / p1 - 1.0 / p2))?)?;
    let den = besov_norm_dyadic(field, &BesovIndex::new(p1, r1, s)?)?;
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

/// Seeded corpus of real fields with random energy in every dyadic shell
/// the grid resolves below the dealiasing cutoff.
pub fn random_corpus<T: Real>(grid: &Grid<T>, seed: u64, count: usize) -> Result<Vec<SpectralField<T>>> {
    let ladder = DyadicLadder::for_grid(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmin = grid.k_min().to64();
    let by_shell: Vec<Vec<usize>> = ladder
        .blocks()
        .map(|j| {
            (0..grid.npts())
                .filter(|&i| {
                    let k = grid.k2(i).to64().sqrt();
                    grid.kept(i) && k > 0.0 && k >= 2f64.powi(j).max(kmin) && k < 2f64.powi(j + 1)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let decay: f64 = rng.gen_range(0.0..1.5);
        let mut f = SpectralField::zeros(grid, crate::field::Shape::Scalar);
        for (s, modes) in ladder.blocks().zip(&by_shell) {
            if modes.is_empty() {
                continue;
            }
            let amp = 2f64.powf(-decay * s as f64);
            for _ in 0..3 {
                let i = modes[rng.gen_range(0..modes.len())];
                let m = grid.mode(i);
                let j = grid.index_of_mode([-m[0], -m[1], -m[2]]).expect("mirror");
                let c = Complex::new(T::of(amp * rng.gen_range(-1.0..1.0)), T::of(amp * rng.gen_range(-1.0..1.0)));
                let z = f.coefficients_mut();
                z[i] = z[i] + c;
                z[j] = z[j] + c.conj();
            }
        }
        out.push(f);
    }
    Ok(out)
}

/// Heat and dyadic norms of one corpus field at one index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub field: usize,
    pub p: f64,
    pub r: f64,
    pub s: f64,
    pub dyadic: f64,
    pub heat: f64,
    pub ratio: f64,
}

/// `‖f‖_heat / ‖f‖_dyadic` for every field and every index.
pub fn equivalence_table<T: Real>(fields: &[SpectralField<T>], indices: &[BesovIndex]) -> Result<Vec<EquivalenceRow>> {
    let rows = fields
        .par_iter()
        .enumerate()
        .map(|(n, f)| {
            indices
                .iter()
                .map(|idx| {
                    let dyadic = besov_norm_dyadic(f, idx)?;
                    let heat = besov_norm_heat(f, idx)?;
                    Ok(EquivalenceRow { field: n, p: idx.p, r: idx.r, s: idx.s, dyadic, heat, ratio: heat / dyadic })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}
