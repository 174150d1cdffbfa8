use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Periodic box `[0, L)^d` with `N` points per axis.
#[derive(Clone)]
pub struct Grid<T: Real> {
    inner: Arc<GridInner<T>>,
}

struct GridInner<T: Real> {
    dim: usize,
    n: usize,
    box_length: T,
    npts: usize,
    kvec: Vec<[T; 3]>,
    k2: Vec<T>,
    modes: Vec<[i64; 3]>,
    nyquist: Vec<u8>,
    kept: Vec<bool>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

/// Builds a validated grid.
pub fn make_grid<T: Real>(dim: usize, n_per_axis: usize, box_length: T) -> Result<Grid<T>> {
    Grid::new(dim, n_per_axis, box_length)
}

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, n: usize, box_length: T) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{2,3}}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {n} must be a power of two >= 8"
            )));
        }
        if !(box_length > T::zero()) || !box_length.is_finite() {
            return Err(Error::InvalidGrid(format!("box length {box_length} must be positive")));
        }
        let npts = n.pow(dim as u32);
        let dk = T::TAU() / box_length;
        let half = (n / 2) as i64;
        let cut = n as f64 / 3.0;
        let mut kvec = Vec::with_capacity(npts);
        let mut k2 = Vec::with_capacity(npts);
        let mut modes = Vec::with_capacity(npts);
        let mut nyquist = Vec::with_capacity(npts);
        let mut kept = Vec::with_capacity(npts);
        for idx in 0..npts {
            let mut m = [0i64; 3];
            let mut rem = idx;
            for a in (0..dim).rev() {
                let i = (rem % n) as i64;
                rem /= n;
                m[a] = if i < half { i } else { i - n as i64 };
            }
            let mut k = [T::zero(); 3];
            let mut mask = 0u8;
            let mut keep = true;
            for a in 0..dim {
                k[a] = dk * T::of(m[a] as f64);
                if m[a] == -half {
                    mask |= 1 << a;
                }
                if (m[a].abs() as f64) >= cut {
                    keep = false;
                }
            }
            k2.push(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
            kvec.push(k);
            modes.push(m);
            nyquist.push(mask);
            kept.push(keep);
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                box_length,
                npts,
                kvec,
                k2,
                modes,
                nyquist,
                kept,
                fwd,
                inv,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n_per_axis(&self) -> usize {
        self.inner.n
    }

    pub fn box_length(&self) -> T {
        self.inner.box_length
    }

    /// Number of lattice points, `N^d`.
    pub fn npts(&self) -> usize {
        self.inner.npts
    }

    /// Lattice spacing `L/N`.
    pub fn spacing(&self) -> T {
        self.inner.box_length / T::of(self.inner.n as f64)
    }

    /// Cell volume `(L/N)^d`.
    pub fn cell_volume(&self) -> T {
        self.spacing().powi(self.inner.dim as i32)
    }

    /// Box volume `L^d`.
    pub fn volume(&self) -> T {
        self.inner.box_length.powi(self.inner.dim as i32)
    }

    /// Smallest nonzero wavenumber `2π/L`.
    pub fn k_min(&self) -> T {
        T::TAU() / self.inner.box_length
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> [T; 3] {
        self.inner.kvec[idx]
    }

    #[inline]
    pub fn k2(&self, idx: usize) -> T {
        self.inner.k2[idx]
    }

    pub fn k2_all(&self) -> &[T] {
        &self.inner.k2
    }

    #[inline]
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        self.inner.modes[idx]
    }

    /// Flat index of an integer mode, if representable.
    pub fn index_of_mode(&self, m: [i64; 3]) -> Option<usize> {
        let n = self.inner.n as i64;
        let mut idx = 0usize;
        for a in 0..self.inner.dim {
            if m[a] < -n / 2 || m[a] >= n / 2 {
                return None;
            }
            idx = idx * self.inner.n + m[a].rem_euclid(n) as usize;
        }
        Some(idx)
    }

    #[inline]
    pub fn is_nyquist(&self, idx: usize, axis: usize) -> bool {
        self.inner.nyquist[idx] & (1 << axis) != 0
    }

    #[inline]
    pub fn has_nyquist(&self, idx: usize) -> bool {
        self.inner.nyquist[idx] != 0
    }

    /// Whether the mode survives the 2/3 truncation.
    #[inline]
    pub fn kept(&self, idx: usize) -> bool {
        self.inner.kept[idx]
    }

    /// Physical coordinates of lattice point `idx`.
    pub fn point(&self, idx: usize) -> [T; 3] {
        let n = self.inner.n;
        let h = self.spacing();
        let mut x = [T::zero(); 3];
        let mut rem = idx;
        for a in (0..self.inner.dim).rev() {
            x[a] = h * T::of((rem % n) as f64);
            rem /= n;
        }
        x
    }

    /// Same geometry, ignoring plan identity.
    pub fn same_as(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.n == other.inner.n
                && self.inner.box_length == other.inner.box_length)
    }

    /// Grid with the same `N` and a box scaled by `factor`.
    pub fn rescaled(&self, factor: T) -> Result<Self> {
        Self::new(self.inner.dim, self.inner.n, self.inner.box_length * factor)
    }

    pub(crate) fn plans(&self) -> (&Arc<dyn Fft<T>>, &Arc<dyn Fft<T>>) {
        (&self.inner.fwd, &self.inner.inv)
    }
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("n", &self.inner.n)
            .field("box_length", &self.inner.box_length)
            .finish()
    }
}
