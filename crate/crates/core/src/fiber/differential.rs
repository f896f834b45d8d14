use num_complex::Complex;

use super::{exp_map, hermitian_basis, hermitian_coords};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix, PosDefMatrix};
use crate::Real;

/// Smallest singular value of the central-difference Jacobian of
/// `v ↦ exp_h(v)` at `v`, in Frobenius-orthonormal coordinates on `Herm(r)`.
///
/// A strictly positive value certifies that the exponential map is a local
/// diffeomorphism at `v`.
pub fn exp_differential_min_singular<T: Real>(
    h: &PosDefMatrix<T>,
    v: &HermitianMatrix<T>,
    fd_step: T,
) -> Result<T> {
    if !(fd_step > T::zero()) {
        return Err(Error::InvalidArgument("fd_step must be positive".into()));
    }
    if h.dim() != v.dim() {
        return Err(Error::Dimension {
            expected: h.dim(),
            found: v.dim(),
        });
    }
    let basis = hermitian_basis::<T>(h.dim());
    let m = basis.len();
    let inv_two_step = (T::lit(2.0) * fd_step).recip();

    // columns[k] = ∂ exp_h / ∂ e_k
    let mut columns = Vec::with_capacity(m);
    for e in &basis {
        let plus = exp_map(h, &v.lin_comb(T::one(), e, fd_step)?)?;
        let minus = exp_map(h, &v.lin_comb(T::one(), e, -fd_step)?)?;
        let diff = (plus.matrix() - minus.matrix()).scale(inv_two_step);
        columns.push(hermitian_coords(&diff));
    }

    // Gram matrix JᵀJ, real symmetric of size r².
    let gram = CMatrix::from_fn(m, |i, j| {
        let dot = columns[i]
            .iter()
            .zip(&columns[j])
            .map(|(&a, &b)| a * b)
            .sum::<T>();
        Complex::new(dot, T::zero())
    });
    let eig = crate::linalg::eigen_unchecked(&gram)?;
    Ok(eig.min().max(T::zero()).sqrt())
}
