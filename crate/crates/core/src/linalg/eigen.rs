//! Cyclic complex Jacobi eigensolver for Hermitian matrices.
//!
//! Every rotation is a unitary `G = diag(1, e^{-iφ}) · R(θ)` acting on a
//! `(p, q)` plane: the phase turns `a_pq` real, the real rotation annihilates
//! it. Jacobi is chosen over tridiagonal QR because fibres are tiny
//! (`r ≤ 64`) and Jacobi keeps high relative accuracy on small eigenvalues,
//! which matters for `log` of nearly singular metrics.

use num_complex::Complex;

use super::{CMatrix, HermitianMatrix};
use crate::error::{Error, Result};
use crate::Real;

/// Sweep budget; quadratic convergence normally finishes in under 10.
pub const MAX_SWEEPS: usize = 64;

/// Spectral decomposition `A = U Λ U†` with ascending eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition<T> {
    pub(crate) eigenvalues: Vec<T>,
    /// Eigenvectors stored as columns.
    pub(crate) eigenvectors: CMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Unitary matrix whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &CMatrix<T> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U Λ U†`.
    pub fn reconstruct(&self) -> HermitianMatrix<T> {
        HermitianMatrix::from_computed(self.eigenvectors.congruence_diag(&self.eigenvalues))
    }

    /// `U f(Λ) U†`, the spectral calculus every matrix function reduces to.
    pub fn map(&self, f: impl Fn(T) -> T) -> HermitianMatrix<T> {
        let d: Vec<T> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        HermitianMatrix::from_computed(self.eigenvectors.congruence_diag(&d))
    }

    pub fn min(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }
}

fn off_diagonal_norm_sqr<T: Real>(a: &CMatrix<T>) -> T {
    let n = a.dim();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

pub(crate) fn jacobi<T: Real>(input: &CMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = input.dim();
    let mut a = input.clone();
    let mut v = CMatrix::identity(n);
    let total = a.frobenius_norm();
    let threshold = T::epsilon() * total;
    let threshold_sqr = threshold * threshold;

    let mut sweeps = 0;
    while off_diagonal_norm_sqr(&a) > threshold_sqr {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                norm: total.as_f64(),
                iterations: sweeps,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| {
        diag[i]
            .partial_cmp(&diag[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, |row, col| v[(row, order[col])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn rotate<T: Real>(a: &mut CMatrix<T>, v: &mut CMatrix<T>, p: usize, q: usize) {
    let b = a[(p, q)];
    let mag = b.norm();
    if mag == T::zero() {
        return;
    }
    let n = a.dim();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip entries already negligible against both diagonal entries.
    let hundred = T::lit(100.0);
    if hundred * mag + app.abs() == app.abs() && hundred * mag + aqq.abs() == aqq.abs() {
        a[(p, q)] = Complex::new(T::zero(), T::zero());
        a[(q, p)] = Complex::new(T::zero(), T::zero());
        return;
    }

    let phase = b.unscale(mag); // e^{iφ}
    let tau = (aqq - app) / (T::lit(2.0) * mag);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] in the (p, q) plane.
    let ph_conj = phase.conj();
    let g_pp = Complex::new(c, T::zero());
    let g_pq = Complex::new(s, T::zero());
    let g_qp = ph_conj.scale(-s);
    let g_qq = ph_conj.scale(c);

    // A <- A G (columns p, q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    // A <- G† A (rows p, q)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = Complex::new(T::zero(), T::zero());
    a[(q, p)] = Complex::new(T::zero(), T::zero());
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());

    // V <- V G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}
