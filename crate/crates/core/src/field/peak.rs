use rustfft::num_complex::Complex;

use super::{Shape, SpectralField};
use crate::error::{Error, Result};
use crate::scalar::Real;

const CANDIDATES: usize = 16;
const NEWTON_STEPS: usize = 40;

struct Modes<T> {
    k: Vec<[T; 3]>,
    c: Vec<Complex<T>>,
    dim: usize,
}

impl<T: Real> Modes<T> {
    fn eval(&self, x: [T; 3]) -> (T, [T; 3], [[T; 3]; 3]) {
        let mut f = T::zero();
        let mut g = [T::zero(); 3];
        let mut h = [[T::zero(); 3]; 3];
        for (k, c) in self.k.iter().zip(&self.c) {
            let ph = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
            let (s, co) = ph.sin_cos();
            let re = c.re * co - c.im * s;
            let im = c.re * s + c.im * co;
            f = f + re;
            for a in 0..self.dim {
                g[a] = g[a] - k[a] * im;
                for b in 0..self.dim {
                    h[a][b] = h[a][b] - k[a] * k[b] * re;
                }
            }
        }
        (f, g, h)
    }
}

fn solve<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3], n: usize) -> Option<[T; 3]> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < T::of(1e-300).max(T::min_positive_value()) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for cc in col..n {
                a[r][cc] = a[r][cc] - f * a[col][cc];
            }
            b[r] = b[r] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for r in (0..n).rev() {
        let mut s = b[r];
        for cc in r + 1..n {
            s = s - a[r][cc] * x[cc];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

/// Grid maximum of `|f|` polished by Newton ascent on the trigonometric interpolant.
pub(crate) fn sup_refined<T: Real>(field: &SpectralField<T>) -> Result<T> {
    if field.shape() != Shape::Scalar {
        return Err(Error::Shape("refined sup needs a scalar field".into()));
    }
    let grid = field.grid();
    let dim = grid.dim();
    let n = grid.n_per_axis();
    let phys = field.to_physical();
    let vals = phys.values();
    let grid_max = vals.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if grid_max == T::zero() {
        return Ok(T::zero());
    }

    let top = field.coefficients().iter().fold(T::zero(), |a, z| a.max(z.norm()));
    let mut modes = Modes { k: Vec::new(), c: Vec::new(), dim };
    for (i, z) in field.coefficients().iter().enumerate() {
        if z.norm() > top * T::of(1e-15) {
            modes.k.push(grid.wavevector(i));
            modes.c.push(*z);
        }
    }

    let neighbor = |idx: usize, a: usize, step: i64| -> usize {
        let stride = n.pow((dim - 1 - a) as u32);
        let i = (idx / stride) % n;
        let j = (i as i64 + step).rem_euclid(n as i64) as usize;
        idx - i * stride + j * stride
    };
    let mut cands: Vec<usize> = (0..grid.npts())
        .filter(|&idx| {
            let v = vals[idx].abs();
            v >= grid_max * T::of(0.5)
                && (0..dim).all(|a| vals[neighbor(idx, a, 1)].abs() <= v && vals[neighbor(idx, a, -1)].abs() <= v)
        })
        .collect();
    cands.sort_by(|&a, &b| vals[b].abs().partial_cmp(&vals[a].abs()).unwrap());
    cands.truncate(CANDIDATES);

    let h = grid.spacing();
    let mut best = grid_max;
    for idx in cands {
        let x0 = grid.point(idx);
        let sign = if vals[idx] >= T::zero() { T::one() } else { -T::one() };
        let mut x = x0;
        let (mut fx, _, _) = modes.eval(x);
        fx = fx * sign;
        for _ in 0..NEWTON_STEPS {
            let (_, g, hs) = modes.eval(x);
            let mut gs = [T::zero(); 3];
            let mut hh = [[T::zero(); 3]; 3];
            for a in 0..dim {
                gs[a] = g[a] * sign;
                for b in 0..dim {
                    hh[a][b] = -hs[a][b] * sign;
                }
            }
            // Newton on the maximum, (-H) dx = g; gradient ascent when -H is singular or indefinite
            let gnorm = (0..dim).fold(T::zero(), |a, i| a + gs[i] * gs[i]).sqrt();
            if gnorm == T::zero() {
                break;
            }
            let mut step = match solve(hh, gs, dim) {
                Some(s) if (0..dim).fold(T::zero(), |a, i| a + s[i] * gs[i]) > T::zero() => s,
                _ => {
                    let mut s = [T::zero(); 3];
                    for a in 0..dim {
                        s[a] = gs[a] * h / gnorm;
                    }
                    s
                }
            };
            let len = (0..dim).fold(T::zero(), |a, i| a + step[i] * step[i]).sqrt();
            if len > h {
                for s in step.iter_mut() {
                    *s = *s * h / len;
                }
            }
            let mut improved = false;
            let mut scale = T::one();
            for _ in 0..8 {
                let mut xn = x;
                for a in 0..dim {
                    xn[a] = x[a] + step[a] * scale;
                }
                let (fn_, _, _) = modes.eval(xn);
                if fn_ * sign >= fx {
                    x = xn;
                    fx = fn_ * sign;
                    improved = true;
                    break;
                }
                scale = scale * T::of(0.5);
            }
            if !improved || len * scale < h * T::of(1e-12) {
                break;
            }
        }
        best = best.max(fx);
    }
    Ok(best)
}
