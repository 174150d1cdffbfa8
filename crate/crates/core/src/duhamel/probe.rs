//! Empirical operator-norm probes over seeded band-limited ensembles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::ops::{duhamel_timeline, DampingWeight, DuhamelKind};
use super::timeline::{graded_times, Timeline};
use crate::error::{Error, Result};
use crate::exponents::{admissibility, gradient_gain_exponent, plain_gain_exponent, sobolev_star, Regime, Theorem2Family};
use crate::field::{multiply, Grid, Shape, SpectralField};
use crate::monitor::{node_norms, spacetime_norm, time_norm, SpaceTimeNormSpec};
use crate::scalar::Real;

/// Ensemble size used by the operator probes.
pub const ENSEMBLE_SIZE: usize = 32;
/// Largest mode index of the standard probe ensembles.
pub const PROBE_MAX_MODE: i64 = 4;

/// One term `Re[c e^{ik·x}] (1 + ½ sin(ωt + φ))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeTerm {
    pub mode: [i64; 3],
    pub amplitude: (f64, f64),
    pub omega: f64,
    pub phase: f64,
}

/// Grid-independent random band-limited scalar field of `(t, x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandLimitedMember {
    pub terms: Vec<ModeTerm>,
}

impl BandLimitedMember {
    pub fn random<R: Rng>(rng: &mut R, dim: usize, max_mode: i64, n_terms: usize) -> Self {
        let mut terms = Vec::with_capacity(n_terms);
        while terms.len() < n_terms {
            let mut m = [0i64; 3];
            for a in m.iter_mut().take(dim) {
                *a = rng.gen_range(-max_mode..=max_mode);
            }
            if m == [0, 0, 0] {
                continue;
            }
            terms.push(ModeTerm {
                mode: m,
                amplitude: (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                omega: rng.gen_range(0.5..3.0),
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            });
        }
        Self { terms }
    }

    pub fn field_at<T: Real>(&self, grid: &Grid<T>, t: f64) -> Result<SpectralField<T>> {
        let mut f = SpectralField::zeros(grid, Shape::Scalar);
        for term in &self.terms {
            let a = 1.0 + 0.5 * (term.omega * t + term.phase).sin();
            let c = Complex::new(T::of(0.5 * a * term.amplitude.0), T::of(0.5 * a * term.amplitude.1));
            let m = term.mode;
            let i = grid
                .index_of_mode(m)
                .ok_or_else(|| Error::InvalidArgument(format!("mode {m:?} not resolved")))?;
            let j = grid.index_of_mode([-m[0], -m[1], -m[2]]).expect("mirror");
            let z = f.coefficients_mut();
            z[i] = z[i] + c;
            z[j] = z[j] + c.conj();
        }
        Ok(f)
    }

    pub fn timeline<T: Real>(&self, grid: &Grid<T>, times: &[f64]) -> Result<Timeline<T>> {
        Timeline::try_from_fn(times.to_vec(), |_, t| self.field_at(grid, t))
    }
}

pub fn ensemble(seed: u64, dim: usize, size: usize, max_mode: i64, n_terms: usize) -> Vec<BandLimitedMember> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| BandLimitedMember::random(&mut rng, dim, max_mode, n_terms)).collect()
}

/// Weighted input and output norms of one operator application.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormPair {
    pub input: f64,
    pub output: f64,
    pub ratio: f64,
}

/// `‖t^{a_out} Op f‖ / ‖t^{a_in} f‖` for the chosen operator.
pub fn duhamel_weighted<T: Real>(
    kind: DuhamelKind,
    f: &Timeline<T>,
    input: &SpaceTimeNormSpec,
    output: &SpaceTimeNormSpec,
) -> Result<WeightedNormPair> {
    input.validate()?;
    output.validate()?;
    let out = duhamel_timeline(kind, f, None)?;
    let i = spacetime_norm(f, input)?;
    let o = spacetime_norm(&out, output)?;
    Ok(WeightedNormPair { input: i, output: o, ratio: if i == 0.0 { 0.0 } else { o / i } })
}

/// A named operator bound to probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub name: String,
    pub kind: DuhamelKind,
    pub input: SpaceTimeNormSpec,
    pub output: SpaceTimeNormSpec,
}

impl ProbeSpec {
    fn new(name: &str, kind: DuhamelKind, input: SpaceTimeNormSpec, output: SpaceTimeNormSpec) -> Self {
        Self { name: name.to_string(), kind, input, output }
    }

    pub fn exponents_label(&self) -> String {
        format!("{} -> {}", self.input.label(), self.output.label())
    }
}

/// Unweighted bounds: maximal regularity of `A`, and the space-time gains of `B` and `C`.
pub fn unweighted_probes(dim: usize, r: f64) -> Result<Vec<ProbeSpec>> {
    let d = dim as f64;
    let st = SpaceTimeNormSpec::unweighted;
    let mut v = vec![
        ProbeSpec::new("A maximal regularity L2", DuhamelKind::A, st(2.0, 2.0)?, st(2.0, 2.0)?),
        ProbeSpec::new("A maximal regularity L4/3", DuhamelKind::A, st(r, 4.0 / 3.0)?, st(r, 4.0 / 3.0)?),
    ];
    let p_sob = 0.75 * d;
    v.push(ProbeSpec::new("B Sobolev gain", DuhamelKind::B, st(r, p_sob)?, st(r, sobolev_star(dim, p_sob))?));
    let p_b = 2.0;
    v.push(ProbeSpec::new(
        "B time-space gain",
        DuhamelKind::B,
        st(r, p_b)?,
        st(2.0 * r, gradient_gain_exponent(dim, p_b, r))?,
    ));
    let p_c = 1.2_f64.min(0.9 * d * r / (2.0 * r - 1.0));
    v.push(ProbeSpec::new(
        "C time-space gain",
        DuhamelKind::C,
        st(r, p_c)?,
        st(2.0 * r, plain_gain_exponent(dim, p_c, r))?,
    ));
    Ok(v)
}

/// Time-weighted bounds of the weighted framework for an admissible `(d, p, r)`.
pub fn weighted_probes(dim: usize, p: f64, r: f64) -> Result<Vec<ProbeSpec>> {
    admissibility(Regime::Theorem2, dim, p, r).into_result()?;
    let fam = Theorem2Family::spatial(dim, p);
    let w = Theorem2Family::weights(dim, p, r);
    let rr = 2.0 * r;
    let s = SpaceTimeNormSpec::new;
    Ok(vec![
        ProbeSpec::new("C weighted p->p3", DuhamelKind::C, s(rr, p, w.alpha)?, s(rr, fam.p3, w.gamma1)?),
        ProbeSpec::new("C weighted p->p3 sup", DuhamelKind::C, s(rr, p, w.alpha)?, s(f64::INFINITY, fam.p3, w.gamma2)?),
        ProbeSpec::new("B weighted p->p2", DuhamelKind::B, s(rr, p, w.alpha)?, s(rr, fam.p2, w.beta)?),
        ProbeSpec::new("B weighted p2->p3", DuhamelKind::B, s(rr, fam.p2, w.beta)?, s(rr, fam.p3, w.gamma1)?),
        ProbeSpec::new("B weighted p2->p3 sup", DuhamelKind::B, s(rr, fam.p2, w.beta)?, s(f64::INFINITY, fam.p3, w.gamma2)?),
        ProbeSpec::new("A weighted maximal regularity", DuhamelKind::A, s(rr, p, w.alpha)?, s(rr, p, w.alpha)?),
        ProbeSpec::new("B weighted p->p*", DuhamelKind::B, s(rr, p, w.alpha)?, s(rr, fam.p_star, w.alpha)?),
    ])
}

/// Discretization of a probe run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub dim: usize,
    pub n: usize,
    pub box_length: f64,
    pub horizon: f64,
    pub intervals: usize,
}

impl ProbeGrid {
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n, intervals: 2 * self.intervals, ..*self }
    }

    pub fn label(&self) -> String {
        format!("d{}-N{}-M{}", self.dim, self.n, self.intervals)
    }
}

/// CSV row of a probe: coarse and refined ensemble maxima.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub operator: String,
    pub exponents: String,
    pub grid: String,
    pub ensemble_size: usize,
    pub ratio: f64,
    pub refinement_ratio: f64,
    /// Largest relative change of any single member's ratio under refinement.
    pub max_member_change: f64,
}

pub fn member_ratios(spec: &ProbeSpec, members: &[BandLimitedMember], pg: &ProbeGrid) -> Result<Vec<f64>> {
    let grid = Grid::<f64>::new(pg.dim, pg.n, pg.box_length)?;
    let times = graded_times(pg.horizon, pg.intervals)?;
    members
        .par_iter()
        .map(|m| {
            let f = m.timeline(&grid, &times)?;
            duhamel_weighted(spec.kind, &f, &spec.input, &spec.output).map(|w| w.ratio)
        })
        .collect()
}

/// Ensemble ratios on `pg` and on its 2× refinement.
pub fn run_probe(spec: &ProbeSpec, members: &[BandLimitedMember], pg: &ProbeGrid) -> Result<ProbeReport> {
    let coarse = member_ratios(spec, members, pg)?;
    let fine = member_ratios(spec, members, &pg.refined())?;
    let cmax = coarse.iter().cloned().fold(0.0, f64::max);
    let fmax = fine.iter().cloned().fold(0.0, f64::max);
    let change = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| if *c == 0.0 { 0.0 } else { (f / c - 1.0).abs() })
        .fold(0.0, f64::max);
    Ok(ProbeReport {
        operator: spec.name.clone(),
        exponents: spec.exponents_label(),
        grid: pg.label(),
        ensemble_size: members.len(),
        ratio: fmax,
        refinement_ratio: if cmax == 0.0 { 1.0 } else { fmax / cmax },
        max_member_change: change,
    })
}

/// Which decay the damped bound predicts: `λ^{−1/(4r)}` or `λ^{−1/(2r)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DampedShape {
    Unweighted,
    Weighted,
}

impl DampedShape {
    pub fn predicted_slope(self, r: f64) -> f64 {
        match self {
            DampedShape::Unweighted => -1.0 / (4.0 * r),
            DampedShape::Weighted => -1.0 / (2.0 * r),
        }
    }
}

/// Norm choices of a damped probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampedExponents {
    pub shape: DampedShape,
    pub r: f64,
    pub v: SpaceTimeNormSpec,
    pub omega: SpaceTimeNormSpec,
    /// Summed output norms.
    pub outputs: Vec<SpaceTimeNormSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampedNormPair {
    pub lambda: f64,
    pub output: f64,
    pub bound: f64,
}

/// Damping weight of the unweighted shape: integrand `‖v‖_{L^{q}}^{2r}`.
pub fn damping_from_velocity<T: Real>(v: &Timeline<T>, q: f64, r: f64, lambda: f64) -> Result<DampingWeight> {
    let n = node_norms(v, q)?;
    let integrand: Vec<f64> = n.iter().map(|x| x.powf(2.0 * r)).collect();
    DampingWeight::new(v.times(), &integrand, lambda)
}

/// Damping weight of the weighted shape:
/// `τ^{2rγ₁}‖v‖_{L^{q_v}}^{2r} + τ^{2rβ}‖ω‖_{L^{q_ω}}^{2r}`.
pub fn damping_weighted<T: Real>(
    v: &Timeline<T>,
    v_spec: &SpaceTimeNormSpec,
    omega: &Timeline<T>,
    omega_spec: &SpaceTimeNormSpec,
    r: f64,
    lambda: f64,
) -> Result<DampingWeight> {
    let nv = node_norms(v, v_spec.space_exponent)?;
    let nw = node_norms(omega, omega_spec.space_exponent)?;
    let integrand: Vec<f64> = v
        .times()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            t.powf(2.0 * r * v_spec.weight) * nv[i].powf(2.0 * r)
                + t.powf(2.0 * r * omega_spec.weight) * nw[i].powf(2.0 * r)
        })
        .collect();
    DampingWeight::new(v.times(), &integrand, lambda)
}

/// `‖Op_λ(vω)‖` and the bound side of the matching damped estimate.
pub fn duhamel_damped<T: Real>(
    kind: DuhamelKind,
    v: &Timeline<T>,
    omega: &Timeline<T>,
    weight: &DampingWeight,
    exps: &DampedExponents,
) -> Result<DampedNormPair> {
    if !(weight.lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("damped probe needs lambda > 0, got {}", weight.lambda)));
    }
    if kind == DuhamelKind::A {
        return Err(Error::InvalidArgument("damped probes cover B and C only".into()));
    }
    let f = v.try_map(|i, vs| multiply(vs, omega.snapshot(i)))?;
    let out = duhamel_timeline(kind, &f, Some(weight))?;
    let mut output = 0.0;
    for spec in &exps.outputs {
        output += spacetime_norm(&out, spec)?;
    }
    let lam = weight.lambda;
    let bound = match exps.shape {
        DampedShape::Unweighted => {
            let nv = spacetime_norm(v, &exps.v)?;
            let nw = spacetime_norm(omega, &exps.omega)?;
            lam.powf(-1.0 / (4.0 * exps.r)) * nv.sqrt() * nw
        }
        DampedShape::Weighted => {
            // ω_λ = h(0,t) ω
            let n = node_norms(omega, exps.omega.space_exponent)?;
            let damped: Vec<f64> = n.iter().enumerate().map(|(i, x)| weight.h(0, i) * x).collect();
            let nw = time_norm(omega.times(), &damped, exps.omega.time_exponent, exps.omega.weight);
            lam.powf(-1.0 / (2.0 * exps.r)) * nw
        }
    };
    Ok(DampedNormPair { lambda: lam, output, bound })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Admissible weighted-framework exponents used by the probes.
pub fn weighted_exponents(dim: usize) -> (f64, f64) {
    match dim {
        2 => (1.6, 16.0),
        _ => (2.4, 16.0),
    }
}

/// Unweighted and weighted catalogs over one seeded ensemble.
pub fn standard_suite(seed: u64, pg: &ProbeGrid, size: usize) -> Result<Vec<ProbeReport>> {
    let members = ensemble(seed, pg.dim, size, PROBE_MAX_MODE, 4);
    let (p, r) = weighted_exponents(pg.dim);
    let mut specs = unweighted_probes(pg.dim, 2.0)?;
    specs.extend(weighted_probes(pg.dim, p, r)?);
    specs.iter().map(|s| run_probe(s, &members, pg)).collect()
}

/// Decay of a damped operator over a λ sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub operator: String,
    pub shape: DampedShape,
    pub r: f64,
    pub lambdas: Vec<f64>,
    /// Ensemble maximum of the output over its λ-free normalization.
    pub ratios: Vec<f64>,
    pub slope: f64,
    pub predicted: f64,
    /// Largest `output / bound` seen over members and λ.
    pub max_bound_ratio: f64,
}

fn scaled_member<T: Real>(m: &BandLimitedMember, grid: &Grid<T>, times: &[f64], q: f64, rr: f64, a: f64, target: f64) -> Result<Timeline<T>> {
    let f = m.timeline(grid, times)?;
    let n = node_norms(&f, q)?;
    let integrand: Vec<f64> = times.iter().zip(&n).map(|(t, x)| t.powf(rr * a) * x.powf(rr)).collect();
    let h = DampingWeight::new(times, &integrand, 1.0)?;
    let total = *h.cumulative().last().expect("nodes");
    let s = if total > 0.0 { (target / total).powf(1.0 / rr) } else { 1.0 };
    f.scaled(T::of(s))
}

fn slope_case(
    name: &str,
    kind: DuhamelKind,
    exps: &DampedExponents,
    members: &[BandLimitedMember],
    pg: &ProbeGrid,
    lambdas: &[f64],
) -> Result<SlopeReport> {
    let grid = Grid::<f64>::new(pg.dim, pg.n, pg.box_length)?;
    let times = graded_times(pg.horizon, pg.intervals)?;
    let rr = 2.0 * exps.r;
    let pairs: Vec<(usize, usize)> = (0..members.len()).map(|i| (i, (i + 1) % members.len())).collect();
    let per_member = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<Vec<(f64, f64)>> {
            let (v, w, weight) = match exps.shape {
                DampedShape::Unweighted => {
                    let v = scaled_member(&members[a], &grid, &times, exps.v.space_exponent, rr, 0.0, 1.0)?;
                    let w = members[b].timeline(&grid, &times)?;
                    let base = damping_from_velocity(&v, exps.v.space_exponent, exps.r, 1.0)?;
                    (v, w, base)
                }
                DampedShape::Weighted => {
                    let v = scaled_member(&members[a], &grid, &times, exps.v.space_exponent, rr, exps.v.weight, 0.5)?;
                    let w = scaled_member(&members[b], &grid, &times, exps.omega.space_exponent, rr, exps.omega.weight, 0.5)?;
                    let base = damping_weighted(&v, &exps.v, &w, &exps.omega, exps.r, 1.0)?;
                    (v, w, base)
                }
            };
            let norm = match exps.shape {
                DampedShape::Unweighted => spacetime_norm(&v, &exps.v)?.sqrt() * spacetime_norm(&w, &exps.omega)?,
                DampedShape::Weighted => spacetime_norm(&w, &exps.omega)?,
            };
            lambdas
                .iter()
                .map(|&l| {
                    let pair = duhamel_damped(kind, &v, &w, &weight.with_lambda(l)?, exps)?;
                    Ok((pair.output / norm, pair.output / pair.bound))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = (0..lambdas.len())
        .map(|k| per_member.iter().map(|m| m[k].0).fold(0.0, f64::max))
        .collect();
    let max_bound_ratio = per_member.iter().flatten().map(|x| x.1).fold(0.0, f64::max);
    Ok(SlopeReport {
        operator: name.into(),
        shape: exps.shape,
        r: exps.r,
        lambdas: lambdas.to_vec(),
        slope: loglog_slope(lambdas, &ratios),
        predicted: exps.shape.predicted_slope(exps.r),
        ratios,
        max_bound_ratio,
    })
}

/// Damped probes of both shapes over `λ ∈ lambdas`.
pub fn damped_slope_suite(seed: u64, pg: &ProbeGrid, size: usize, lambdas: &[f64]) -> Result<Vec<SlopeReport>> {
    let members = ensemble(seed ^ 0x5eed, pg.dim, size, PROBE_MAX_MODE, 4);
    let d = pg.dim as f64;
    let r = 2.0;
    // 1/q = 1/q1 + 1/q2 inside ((2r−1)/(dr), 1), 1/q3 = 1/q − (2r−1)/(dr)
    let (q1, q2) = (4.0, 1.6);
    let q = 1.0 / (1.0 / q1 + 1.0 / q2);
    let q3 = 1.0 / (1.0 / q - (2.0 * r - 1.0) / (d * r));
    let st = SpaceTimeNormSpec::unweighted;
    let unweighted = DampedExponents {
        shape: DampedShape::Unweighted,
        r,
        v: st(2.0 * r, q1)?,
        omega: st(2.0 * r, q2)?,
        outputs: vec![st(2.0 * r, q3)?],
    };
    let (p, rw) = weighted_exponents(pg.dim);
    let fam = Theorem2Family::spatial(pg.dim, p);
    let w = Theorem2Family::weights(pg.dim, p, rw);
    let rr = 2.0 * rw;
    let s = SpaceTimeNormSpec::new;
    let v_spec = s(rr, fam.p3, w.gamma1)?;
    let o_spec = s(rr, fam.p2, w.beta)?;
    let weighted_b = DampedExponents {
        shape: DampedShape::Weighted,
        r: rw,
        v: v_spec,
        omega: o_spec,
        outputs: vec![s(rr, fam.p2, w.beta)?],
    };
    let weighted_c = DampedExponents {
        shape: DampedShape::Weighted,
        r: rw,
        v: v_spec,
        omega: o_spec,
        outputs: vec![s(rr, fam.p3, w.gamma1)?, s(f64::INFINITY, fam.p3, w.gamma2)?],
    };
    Ok(vec![
        slope_case("C damped product", DuhamelKind::C, &unweighted, &members, pg, lambdas)?,
        slope_case("B damped weighted product", DuhamelKind::B, &weighted_b, &members, pg, lambdas)?,
        slope_case("C damped weighted product", DuhamelKind::C, &weighted_c, &members, pg, lambdas)?,
    ])
}
