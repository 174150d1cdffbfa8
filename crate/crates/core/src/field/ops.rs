use rustfft::num_complex::Complex;

use super::{PhysicalField, Shape, SpectralField};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `∂_axis f` for every component; Nyquist plane along `axis` is zeroed.
pub fn derivative<T: Real>(field: &SpectralField<T>, axis: usize) -> Result<SpectralField<T>> {
    let g = field.grid().clone();
    if axis >= g.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} >= dim {}", g.dim())));
    }
    Ok(field.map_modes(|i, z| {
        if g.is_nyquist(i, axis) {
            Complex::new(T::zero(), T::zero())
        } else {
            let k = g.wavevector(i)[axis];
            Complex::new(-z.im * k, z.re * k)
        }
    }))
}

/// Scalar → vector, vector → matrix with entry `(i, j) = ∂_j u_i`.
pub fn gradient<T: Real>(field: &SpectralField<T>) -> Result<SpectralField<T>> {
    let d = field.grid().dim();
    let parts: Vec<_> = match field.shape() {
        Shape::Scalar => (0..d).map(|j| derivative(field, j)).collect::<Result<_>>()?,
        Shape::Vector => {
            let mut v = Vec::with_capacity(d * d);
            for i in 0..d {
                let ui = field.component(i);
                for j in 0..d {
                    v.push(derivative(&ui, j)?);
                }
            }
            v
        }
        Shape::Matrix => return Err(Error::Shape("gradient of a matrix field".into())),
    };
    SpectralField::from_components(parts)
}

/// Vector → scalar; matrix → vector with `(div M)_i = Σ_j ∂_j M_ij`.
pub fn divergence<T: Real>(field: &SpectralField<T>) -> Result<SpectralField<T>> {
    let d = field.grid().dim();
    match field.shape() {
        Shape::Vector => {
            let mut acc = derivative(&field.component(0), 0)?;
            for j in 1..d {
                acc = acc.add(&derivative(&field.component(j), j)?)?;
            }
            Ok(acc)
        }
        Shape::Matrix => {
            let mut rows = Vec::with_capacity(d);
            for i in 0..d {
                let mut acc = derivative(&field.component(i * d), 0)?;
                for j in 1..d {
                    acc = acc.add(&derivative(&field.component(i * d + j), j)?)?;
                }
                rows.push(acc);
            }
            SpectralField::from_components(rows)
        }
        Shape::Scalar => Err(Error::Shape("divergence of a scalar field".into())),
    }
}

/// `M = ∇u + ᵗ∇u`.
pub fn symmetric_gradient<T: Real>(u: &SpectralField<T>) -> Result<SpectralField<T>> {
    if u.shape() != Shape::Vector {
        return Err(Error::Shape("symmetric gradient needs a vector field".into()));
    }
    let d = u.grid().dim();
    let g = gradient(u)?;
    let parts = (0..d * d)
        .map(|c| {
            let (i, j) = (c / d, c % d);
            g.component(i * d + j).add(&g.component(j * d + i))
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralField::from_components(parts)
}

/// Dealiased pointwise product; one operand must be scalar.
pub fn multiply<T: Real>(a: &SpectralField<T>, b: &SpectralField<T>) -> Result<SpectralField<T>> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let (s, other) = match (a.shape(), b.shape()) {
        (Shape::Scalar, _) => (a, b),
        (_, Shape::Scalar) => (b, a),
        (x, y) => {
            return Err(Error::Shape(format!(
                "product of {x:?} and {y:?}; contract component-wise instead"
            )))
        }
    };
    let sp = s.dealiased().to_physical();
    let mut op = other.dealiased().to_physical();
    scale_by_scalar(&mut op, sp.values());
    Ok(op.to_spectral().dealiased())
}

pub(crate) fn scale_by_scalar<T: Real>(field: &mut PhysicalField<T>, s: &[T]) {
    let npts = s.len();
    for (i, v) in field.values_mut().iter_mut().enumerate() {
        *v = *v * s[i % npts];
    }
}

/// Lebesgue norm of a spectral field, evaluated on the physical lattice.
pub fn lp_norm<T: Real>(field: &SpectralField<T>, p: f64) -> Result<T> {
    field.lp_norm(p)
}
