//! Periodic-box fields in spectral and physical representation.
//!
//! Coefficients are stored component-major, each component a row-major
//! `N^d` block in FFT ordering. The forward transform is normalized so the
//! zero mode holds the spatial mean.

mod fft;
mod grid;
pub mod io;
mod ops;
mod peak;

pub use grid::{make_grid, Grid};
pub use ops::{derivative, divergence, gradient, lp_norm, multiply, symmetric_gradient};

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of components carried by a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Scalar,
    Vector,
    Matrix,
}

impl Shape {
    pub fn components(self, dim: usize) -> usize {
        match self {
            Shape::Scalar => 1,
            Shape::Vector => dim,
            Shape::Matrix => dim * dim,
        }
    }

    pub fn from_components(c: usize, dim: usize) -> Option<Self> {
        if c == 1 {
            Some(Shape::Scalar)
        } else if c == dim {
            Some(Shape::Vector)
        } else if c == dim * dim {
            Some(Shape::Matrix)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectralField<T: Real> {
    grid: Grid<T>,
    shape: Shape,
    data: Vec<Complex<T>>,
}

#[derive(Clone, Debug)]
pub struct PhysicalField<T: Real> {
    grid: Grid<T>,
    shape: Shape,
    data: Vec<T>,
}

#[inline]
fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Real> PhysicalField<T> {
    pub fn zeros(grid: &Grid<T>, shape: Shape) -> Self {
        let len = shape.components(grid.dim()) * grid.npts();
        Self { grid: grid.clone(), shape, data: vec![T::zero(); len] }
    }

    pub fn from_values(grid: &Grid<T>, shape: Shape, data: Vec<T>) -> Result<Self> {
        let len = shape.components(grid.dim()) * grid.npts();
        if data.len() != len {
            return Err(Error::Shape(format!("expected {len} samples, got {}", data.len())));
        }
        Ok(Self { grid: grid.clone(), shape, data })
    }

    /// Samples `f(x, component)` on the lattice.
    pub fn from_fn(grid: &Grid<T>, shape: Shape, f: impl Fn([T; 3], usize) -> T) -> Self {
        let nc = shape.components(grid.dim());
        let npts = grid.npts();
        let mut data = Vec::with_capacity(nc * npts);
        for c in 0..nc {
            for idx in 0..npts {
                data.push(f(grid.point(idx), c));
            }
        }
        Self { grid: grid.clone(), shape, data }
    }

    pub fn scalar_fn(grid: &Grid<T>, f: impl Fn([T; 3]) -> T) -> Self {
        Self::from_fn(grid, Shape::Scalar, |x, _| f(x))
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn components(&self) -> usize {
        self.shape.components(self.grid.dim())
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<T> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[T] {
        let npts = self.grid.npts();
        &self.data[c * npts..(c + 1) * npts]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Pointwise Euclidean (Frobenius) magnitude.
    pub fn magnitude(&self) -> Vec<T> {
        let npts = self.grid.npts();
        let nc = self.components();
        if nc == 1 {
            return self.data.iter().map(|v| v.abs()).collect();
        }
        (0..npts)
            .map(|i| {
                let mut s = T::zero();
                for c in 0..nc {
                    let v = self.data[c * npts + i];
                    s = s + v * v;
                }
                s.sqrt()
            })
            .collect()
    }

    /// Lebesgue norm with the rectangle rule; `p = ∞` is the max over samples.
    pub fn lp_norm(&self, p: f64) -> Result<T> {
        if !(p >= 1.0) {
            return Err(Error::InvalidArgument(format!("L^p exponent {p} < 1")));
        }
        let mag = self.magnitude();
        Ok(lp_of_magnitudes(&mag, p, self.grid.cell_volume()))
    }

    pub fn to_spectral(&self) -> SpectralField<T> {
        let npts = self.grid.npts();
        let scale = T::one() / T::of(npts as f64);
        let mut data: Vec<Complex<T>> = self.data.iter().map(|&v| Complex::new(v, T::zero())).collect();
        for chunk in data.chunks_mut(npts) {
            fft::transform(&self.grid, chunk, false);
            for z in chunk.iter_mut() {
                *z = *z * scale;
            }
        }
        SpectralField { grid: self.grid.clone(), shape: self.shape, data }
    }
}

/// `(Σ m^p · dV)^{1/p}`, or the max for `p = ∞`.
pub(crate) fn lp_of_magnitudes<T: Real>(mag: &[T], p: f64, cell: T) -> T {
    if p.is_infinite() {
        return mag.iter().fold(T::zero(), |a, &b| a.max(b));
    }
    if p == 2.0 {
        let s: T = mag.iter().map(|&m| m * m).sum();
        return (s * cell).sqrt();
    }
    // scale by the max to keep large p from overflowing
    let top = mag.iter().fold(T::zero(), |a, &b| a.max(b));
    if top == T::zero() {
        return T::zero();
    }
    let pt = T::of(p);
    let s: T = mag.iter().map(|&m| (m / top).powf(pt)).sum();
    top * (s * cell).powf(T::one() / pt)
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(grid: &Grid<T>, shape: Shape) -> Self {
        let len = shape.components(grid.dim()) * grid.npts();
        Self { grid: grid.clone(), shape, data: vec![czero(); len] }
    }

    pub fn from_coefficients(grid: &Grid<T>, shape: Shape, data: Vec<Complex<T>>) -> Result<Self> {
        let len = shape.components(grid.dim()) * grid.npts();
        if data.len() != len {
            return Err(Error::Shape(format!("expected {len} coefficients, got {}", data.len())));
        }
        Ok(Self { grid: grid.clone(), shape, data })
    }

    /// Stacks scalar fields into a vector or matrix field.
    pub fn from_components(parts: Vec<SpectralField<T>>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Shape("no components".into()))?;
        let grid = first.grid.clone();
        let shape = Shape::from_components(parts.len(), grid.dim())
            .ok_or_else(|| Error::Shape(format!("{} components", parts.len())))?;
        let mut data = Vec::with_capacity(parts.len() * grid.npts());
        for p in &parts {
            if p.grid != grid {
                return Err(Error::GridMismatch);
            }
            if p.shape != Shape::Scalar {
                return Err(Error::Shape("components must be scalar".into()));
            }
            data.extend_from_slice(&p.data);
        }
        Ok(Self { grid, shape, data })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn components(&self) -> usize {
        self.shape.components(self.grid.dim())
    }

    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn component_coefficients(&self, c: usize) -> &[Complex<T>] {
        let npts = self.grid.npts();
        &self.data[c * npts..(c + 1) * npts]
    }

    pub fn component(&self, c: usize) -> SpectralField<T> {
        SpectralField {
            grid: self.grid.clone(),
            shape: Shape::Scalar,
            data: self.component_coefficients(c).to_vec(),
        }
    }

    /// Coefficient at an integer mode of component `c`.
    pub fn coefficient(&self, c: usize, m: [i64; 3]) -> Option<Complex<T>> {
        self.grid.index_of_mode(m).map(|i| self.data[c * self.grid.npts() + i])
    }

    pub fn to_physical(&self) -> PhysicalField<T> {
        let npts = self.grid.npts();
        let mut buf = self.data.clone();
        for chunk in buf.chunks_mut(npts) {
            fft::transform(&self.grid, chunk, true);
        }
        PhysicalField {
            grid: self.grid.clone(),
            shape: self.shape,
            data: buf.into_iter().map(|z| z.re).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest violation of `f̂(−k) = conj f̂(k)` relative to the largest coefficient.
    pub fn conjugate_asymmetry(&self) -> T {
        let npts = self.grid.npts();
        let mut top = T::zero();
        let mut worst = T::zero();
        for c in 0..self.components() {
            let block = &self.data[c * npts..(c + 1) * npts];
            for idx in 0..npts {
                let m = self.grid.mode(idx);
                top = top.max(block[idx].norm());
                if self.grid.has_nyquist(idx) {
                    continue;
                }
                let j = self.grid.index_of_mode([-m[0], -m[1], -m[2]]).expect("mirror mode");
                worst = worst.max((block[idx] - block[j].conj()).norm());
            }
        }
        if top == T::zero() {
            T::zero()
        } else {
            worst / top
        }
    }

    /// Applies `f(idx, coefficient) -> coefficient` to every component.
    pub fn map_modes(&self, f: impl Fn(usize, Complex<T>) -> Complex<T>) -> Self {
        let npts = self.grid.npts();
        let data = self.data.iter().enumerate().map(|(i, &z)| f(i % npts, z)).collect();
        Self { grid: self.grid.clone(), shape: self.shape, data }
    }

    /// Applies a real per-mode multiplier.
    pub fn apply_real_multiplier(&self, m: impl Fn(usize) -> T) -> Self {
        self.map_modes(|i, z| z * m(i))
    }

    pub fn scaled(&self, a: T) -> Self {
        self.map_modes(|_, z| z * a)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid.clone(), shape: self.shape, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid.clone(), shape: self.shape, data })
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: T, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x = *x + y * a;
        }
        Ok(())
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.shape != other.shape {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.shape, other.shape)));
        }
        Ok(())
    }

    /// Zeroes the modes removed by the 2/3 rule.
    pub fn dealiased(&self) -> Self {
        let g = self.grid.clone();
        self.map_modes(|i, z| if g.kept(i) { z } else { czero() })
    }

    /// Zeroes every mode carrying a Nyquist index.
    pub fn without_nyquist(&self) -> Self {
        let g = self.grid.clone();
        self.map_modes(|i, z| if g.has_nyquist(i) { czero() } else { z })
    }

    /// `L^d Σ|f̂|²`, the squared `L²` norm by Parseval.
    pub fn energy(&self) -> T {
        let s: T = self.data.iter().map(|z| z.norm_sqr()).sum();
        s * self.grid.volume()
    }

    /// Mean over the box (zero-mode coefficient) of component `c`.
    pub fn mean(&self, c: usize) -> T {
        self.data[c * self.grid.npts()].re
    }

    pub fn lp_norm(&self, p: f64) -> Result<T> {
        self.to_physical().lp_norm(p)
    }

    /// Estimate of the continuum supremum of `|f|` for a scalar field.
    pub fn sup_norm_refined(&self) -> Result<T> {
        peak::sup_refined(self)
    }

    /// Max coefficient-wise distance, relative to the larger operand.
    pub fn relative_distance(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        let mut diff = T::zero();
        let mut top = T::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            diff = diff.max((a - b).norm());
            top = top.max(a.norm()).max(b.norm());
        }
        Ok(if top == T::zero() { T::zero() } else { diff / top })
    }

    /// Transform of a field re-sampled on a grid with a scaled box: same
    /// coefficients, new wavenumbers.
    pub fn on_grid(&self, grid: &Grid<T>) -> Result<Self> {
        if grid.dim() != self.grid.dim() || grid.n_per_axis() != self.grid.n_per_axis() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid: grid.clone(), shape: self.shape, data: self.data.clone() })
    }

    /// Zero-padded (or truncated) copy on a grid with a different `N` and same box.
    pub fn resampled(&self, grid: &Grid<T>) -> Result<Self> {
        if grid.dim() != self.grid.dim() || grid.box_length() != self.grid.box_length() {
            return Err(Error::GridMismatch);
        }
        let nc = self.components();
        let mut out = SpectralField::zeros(grid, self.shape);
        let (src, dst) = (self.grid.npts(), grid.npts());
        let small = self.grid.n_per_axis().min(grid.n_per_axis()) as i64;
        for idx in 0..src {
            let m = self.grid.mode(idx);
            if (0..self.grid.dim()).any(|a| m[a].abs() >= small / 2) {
                continue;
            }
            let j = grid.index_of_mode(m).expect("mode fits");
            for c in 0..nc {
                out.data[c * dst + j] = self.data[c * src + idx];
            }
        }
        Ok(out)
    }
}
