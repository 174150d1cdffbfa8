//! JSON run manifests: grid, data generators, viscosity, solver settings and
//! the optional sweep, probe and Besov sections.

use std::f64::consts::TAU;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::besov::BesovIndex;
use crate::duhamel::probe::{ProbeGrid, PROBE_MAX_MODE};
use crate::error::{Error, Result};
use crate::field::{io::read_binary, Grid, PhysicalField, Shape, SpectralField};
use crate::harmonic::leray_project;
use crate::scalar::Real;
use crate::solver::{prepare_data, radial_cutoff, InitialData, SolverConfig, ViscosityLaw};

pub const SCHEMA: &str = "boussinesq-run/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub box_length: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { dim: 2, n: 64, box_length: TAU }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TemperatureGen {
    Zero,
    /// `a·sign(x₁ − L/2)`.
    Interface { amplitude: f64 },
    /// `a·cos(k·x)`.
    SingleMode { mode: [i64; 3], amplitude: f64 },
    RandomBandLimited { max_mode: i64, terms: usize, amplitude: f64 },
    /// Scalar snapshot in the binary field format.
    File { path: PathBuf },
}

impl Default for TemperatureGen {
    fn default() -> Self {
        TemperatureGen::SingleMode { mode: [1, 1, 0], amplitude: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityGen {
    Zero,
    /// `u^j = a sin(m x_{j+1})` for horizontal `j`, `u^d = b sin(m x₁)`.
    Shear { horizontal: f64, vertical: f64, mode: i64 },
    /// Leray projection of `a·e·sin(k·x)`.
    SingleMode { mode: [i64; 3], direction: [f64; 3], amplitude: f64 },
    RandomBandLimited { max_mode: i64, terms: usize, amplitude: f64 },
    /// Vector snapshot in the binary field format; projected on load.
    File { path: PathBuf },
}

impl Default for VelocityGen {
    fn default() -> Self {
        VelocityGen::Shear { horizontal: 0.002, vertical: 0.3, mode: 1 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSpec {
    pub temperature: TemperatureGen,
    pub velocity: VelocityGen,
    /// Dyadic truncation level; `None` keeps the dealiased data as is.
    pub truncation: Option<i32>,
    /// Radius of the spatial cutoff applied to the temperature.
    pub cutoff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSpec {
    Epsilon { values: Vec<f64> },
    /// Scales applied to `ū^h` with `ū^d` held fixed.
    HorizontalScale { values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub n: usize,
    pub horizon: f64,
    pub intervals: usize,
    pub ensemble: usize,
    pub lambdas: Vec<f64>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { n: 32, horizon: 1.0, intervals: 16, ensemble: 32, lambdas: vec![1.0, 2.0, 4.0, 8.0, 16.0] }
    }
}

impl ProbeConfig {
    pub fn grid(&self, g: &GridSpec) -> ProbeGrid {
        ProbeGrid { dim: g.dim, n: self.n, box_length: g.box_length, horizon: self.horizon, intervals: self.intervals }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BesovConfig {
    pub corpus: usize,
    pub p: f64,
    pub r: f64,
    /// Regularity indices; empty means `{−1/2, −1, d/p − 1}`.
    pub s: Vec<f64>,
}

impl Default for BesovConfig {
    fn default() -> Self {
        Self { corpus: 20, p: 3.0, r: 2.0, s: Vec::new() }
    }
}

impl BesovConfig {
    pub fn indices(&self, dim: usize) -> Result<Vec<BesovIndex>> {
        let s = if self.s.is_empty() { vec![-0.5, -1.0, dim as f64 / self.p - 1.0] } else { self.s.clone() };
        s.into_iter().map(|s| BesovIndex::new(self.p, self.r, s)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub viscosity: ViscosityLaw,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub probes: ProbeConfig,
    #[serde(default)]
    pub besov: BesovConfig,
}

fn default_seed() -> u64 {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA.into(),
            grid: GridSpec::default(),
            data: DataSpec::default(),
            viscosity: ViscosityLaw::TanhPerturbation { delta: 0.05 },
            // c_r = 1 overflows η for O(1) vertical data on a 2π box
            solver: SolverConfig { c_r: 1e-7, ..SolverConfig::default() },
            seed: default_seed(),
            output: None,
            sweep: None,
            probes: ProbeConfig::default(),
            besov: BesovConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Every violated requirement with both sides evaluated; empty when valid.
    pub fn problems(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.schema != SCHEMA {
            errs.push(format!("schema \"{}\" is not \"{SCHEMA}\"", self.schema));
        }
        let g = &self.grid;
        if let Err(e) = Grid::<f64>::new(g.dim, g.n, g.box_length) {
            errs.push(e.to_string());
        }
        if !(2..=3).contains(&g.dim) {
            // remaining checks need a usable dimension
            return errs;
        }
        errs.extend(self.solver.problems(g.dim));
        if let Err(e) = self.viscosity.validate() {
            errs.push(e.to_string());
        }
        errs.extend(self.data_problems());
        match &self.sweep {
            Some(SweepSpec::Epsilon { values }) => {
                if values.len() < 2 {
                    errs.push(format!("epsilon sweep needs >= 2 values, got {}", values.len()));
                }
                if values.iter().any(|e| !(*e >= 0.0)) || values.windows(2).any(|w| w[1] > w[0]) {
                    errs.push(format!("epsilon sweep {values:?} must be non-increasing and >= 0"));
                }
            }
            Some(SweepSpec::HorizontalScale { values }) => {
                if values.is_empty() || values.iter().any(|s| !s.is_finite()) {
                    errs.push(format!("horizontal scales {values:?} must be finite and non-empty"));
                }
            }
            None => {}
        }
        let p = &self.probes;
        if p.ensemble == 0 || p.intervals == 0 || !(p.horizon > 0.0) {
            errs.push(format!(
                "probes need ensemble > 0, intervals > 0, horizon > 0 (got {}, {}, {})",
                p.ensemble, p.intervals, p.horizon
            ));
        }
        if let Err(e) = Grid::<f64>::new(g.dim, p.n, g.box_length) {
            errs.push(format!("probe grid: {e}"));
        } else if (p.n as i64) <= 3 * PROBE_MAX_MODE {
            errs.push(format!("probe grid n = {} cannot resolve ensemble modes up to {PROBE_MAX_MODE}", p.n));
        }
        if p.lambdas.len() < 2 || p.lambdas.iter().any(|l| !(*l > 0.0)) {
            errs.push(format!("probe lambdas {:?} need >= 2 positive values", p.lambdas));
        }
        if self.besov.corpus == 0 {
            errs.push("besov corpus must be non-empty".into());
        }
        if let Err(e) = self.besov.indices(g.dim) {
            errs.push(format!("besov: {e}"));
        }
        errs
    }

    fn data_problems(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let d = &self.data;
        let modes = |m: &[i64; 3], what: &str, errs: &mut Vec<String>| {
            let lim = self.grid.n as i64 / 3;
            if m.iter().skip(self.grid.dim).any(|&x| x != 0) {
                errs.push(format!("{what} mode {m:?} has components beyond dim {}", self.grid.dim));
            }
            if m.iter().any(|&x| x.abs() >= lim) {
                errs.push(format!("{what} mode {m:?} not below the dealiasing limit {lim}"));
            }
        };
        match &d.temperature {
            TemperatureGen::SingleMode { mode, amplitude } => {
                modes(mode, "temperature", &mut errs);
                if !amplitude.is_finite() {
                    errs.push("temperature amplitude must be finite".into());
                }
            }
            TemperatureGen::RandomBandLimited { max_mode, terms, .. } => {
                modes(&[*max_mode, 0, 0], "temperature", &mut errs);
                if *terms == 0 || *max_mode < 1 {
                    errs.push("temperature generator needs terms >= 1 and max_mode >= 1".into());
                }
            }
            TemperatureGen::File { path } if !path.exists() => {
                errs.push(format!("temperature file {} does not exist", path.display()));
            }
            _ => {}
        }
        match &d.velocity {
            VelocityGen::Shear { mode, .. } => modes(&[*mode, 0, 0], "velocity", &mut errs),
            VelocityGen::SingleMode { mode, direction, .. } => {
                modes(mode, "velocity", &mut errs);
                if direction.iter().all(|&x| x == 0.0) {
                    errs.push("velocity direction must be nonzero".into());
                }
            }
            VelocityGen::RandomBandLimited { max_mode, terms, .. } => {
                modes(&[*max_mode, 0, 0], "velocity", &mut errs);
                if *terms == 0 || *max_mode < 1 {
                    errs.push("velocity generator needs terms >= 1 and max_mode >= 1".into());
                }
            }
            VelocityGen::File { path } if !path.exists() => {
                errs.push(format!("velocity file {} does not exist", path.display()));
            }
            _ => {}
        }
        if let Some(r) = d.cutoff {
            if !(r > 0.0) {
                errs.push(format!("cutoff radius {r} must be > 0"));
            }
        }
        if let Some(n) = d.truncation {
            if n < 0 {
                errs.push(format!("truncation level {n} must be >= 0"));
            }
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.problems();
        if e.is_empty() {
            Ok(())
        } else {
            Err(Error::Inadmissible(e))
        }
    }

    pub fn make_grid<T: Real>(&self) -> Result<Grid<T>> {
        Grid::new(self.grid.dim, self.grid.n, T::of(self.grid.box_length))
    }

    /// Generates, projects and (optionally) truncates the initial data.
    pub fn initial_data<T: Real>(&self) -> Result<InitialData<T>> {
        let grid = self.make_grid::<T>()?;
        let theta = temperature::<T>(&grid, &self.data.temperature, self.seed)?;
        let u = velocity::<T>(&grid, &self.data.velocity, self.seed)?;
        match self.data.truncation {
            Some(n) => prepare_data(&theta, &u, n, self.data.cutoff),
            None => {
                let mut th = theta.to_spectral();
                if let Some(r) = self.data.cutoff {
                    th = crate::field::multiply(&radial_cutoff(&grid, r).to_spectral(), &th)?;
                }
                InitialData::from_prepared(th.dealiased(), leray_project(&u)?.dealiased())
            }
        }
    }
}

fn load<T: Real>(grid: &Grid<T>, path: &PathBuf, shape: Shape) -> Result<PhysicalField<T>> {
    let f: PhysicalField<T> = read_binary(std::fs::File::open(path).map(std::io::BufReader::new)?)?;
    if f.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if f.shape() != shape {
        return Err(Error::Shape(format!("{} holds {:?}, expected {shape:?}", path.display(), f.shape())));
    }
    Ok(f)
}

fn phase(m: &[i64; 3], x: [f64; 3], k0: f64) -> f64 {
    k0 * (m[0] as f64 * x[0] + m[1] as f64 * x[1] + m[2] as f64 * x[2])
}

fn random_modes(rng: &mut ChaCha8Rng, dim: usize, max_mode: i64, terms: usize) -> Vec<([i64; 3], f64, f64)> {
    (0..terms)
        .map(|_| {
            let mut m = [0i64; 3];
            while m == [0; 3] {
                for c in m.iter_mut().take(dim) {
                    *c = rng.gen_range(-max_mode..=max_mode);
                }
            }
            (m, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TAU))
        })
        .collect()
}

fn temperature<T: Real>(grid: &Grid<T>, gen: &TemperatureGen, seed: u64) -> Result<PhysicalField<T>> {
    let l = grid.box_length().to64();
    let k0 = TAU / l;
    let x64 = |x: [T; 3]| [x[0].to64(), x[1].to64(), x[2].to64()];
    Ok(match gen {
        TemperatureGen::Zero => PhysicalField::zeros(grid, Shape::Scalar),
        TemperatureGen::Interface { amplitude } => PhysicalField::scalar_fn(grid, |x| {
            let s = x[0].to64() - 0.5 * l;
            T::of(amplitude * if s > 0.0 { 1.0 } else if s < 0.0 { -1.0 } else { 0.0 })
        }),
        TemperatureGen::SingleMode { mode, amplitude } => {
            PhysicalField::scalar_fn(grid, |x| T::of(amplitude * phase(mode, x64(x), k0).cos()))
        }
        TemperatureGen::RandomBandLimited { max_mode, terms, amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_modes(&mut rng, grid.dim(), *max_mode, *terms);
            PhysicalField::scalar_fn(grid, |x| {
                let v: f64 = t.iter().map(|(m, c, ph)| c * (phase(m, x64(x), k0) + ph).cos()).sum();
                T::of(amplitude * v)
            })
        }
        TemperatureGen::File { path } => load(grid, path, Shape::Scalar)?,
    })
}

fn velocity<T: Real>(grid: &Grid<T>, gen: &VelocityGen, seed: u64) -> Result<SpectralField<T>> {
    let d = grid.dim();
    let k0 = TAU / grid.box_length().to64();
    let x64 = |x: [T; 3]| [x[0].to64(), x[1].to64(), x[2].to64()];
    let f = match gen {
        VelocityGen::Zero => PhysicalField::zeros(grid, Shape::Vector),
        VelocityGen::Shear { horizontal, vertical, mode } => {
            let m = *mode as f64 * k0;
            PhysicalField::from_fn(grid, Shape::Vector, |x, c| {
                let x = x64(x);
                T::of(if c + 1 < d { horizontal * (m * x[c + 1]).sin() } else { vertical * (m * x[0]).sin() })
            })
        }
        VelocityGen::SingleMode { mode, direction, amplitude } => PhysicalField::from_fn(grid, Shape::Vector, |x, c| {
            T::of(amplitude * direction[c] * phase(mode, x64(x), k0).sin())
        }),
        VelocityGen::RandomBandLimited { max_mode, terms, amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
            let comps: Vec<_> = (0..d).map(|_| random_modes(&mut rng, d, *max_mode, *terms)).collect();
            PhysicalField::from_fn(grid, Shape::Vector, |x, c| {
                let v: f64 = comps[c].iter().map(|(m, a, ph)| a * (phase(m, x64(x), k0) + ph).sin()).sum();
                T::of(amplitude * v)
            })
        }
        VelocityGen::File { path } => load(grid, path, Shape::Vector)?,
    };
    leray_project(&f.to_spectral())
}
