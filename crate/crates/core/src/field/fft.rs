use rustfft::num_complex::Complex;

use super::grid::Grid;
use crate::scalar::Real;

/// In-place multidimensional FFT of one component (length `N^d`), unnormalized.
pub(crate) fn transform<T: Real>(grid: &Grid<T>, buf: &mut [Complex<T>], inverse: bool) {
    let n = grid.n_per_axis();
    let dim = grid.dim();
    debug_assert_eq!(buf.len(), grid.npts());
    let (fwd, inv) = grid.plans();
    let plan = if inverse { inv } else { fwd };

    // last axis is contiguous
    plan.process(buf);

    let mut scratch = vec![Complex::new(T::zero(), T::zero()); 0];
    for axis in (0..dim - 1).rev() {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = n * stride;
        if scratch.len() != block {
            scratch.resize(block, Complex::new(T::zero(), T::zero()));
        }
        for chunk in buf.chunks_mut(block) {
            // chunk is an n x stride matrix; transpose so lines become contiguous
            for i in 0..n {
                for o in 0..stride {
                    scratch[o * n + i] = chunk[i * stride + o];
                }
            }
            plan.process(&mut scratch);
            for i in 0..n {
                for o in 0..stride {
                    chunk[i * stride + o] = scratch[o * n + i];
                }
            }
        }
    }
}
