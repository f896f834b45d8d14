//! Dense complex Hermitian linear algebra.
//!
//! Square roots, exponentials and logarithms all go through the Hermitian
//! eigendecomposition: every matrix handled here is normal, so the spectral
//! calculus `U f(Λ) U†` is exact up to the eigensolver's accuracy.

mod eigen;
mod matrix;

pub use eigen::{EigenDecomposition, MAX_SWEEPS};
pub use matrix::CMatrix;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::Real;

/// Largest supported fibre rank.
pub const MAX_RANK: usize = 64;

/// `expm_hermitian` refuses eigenvalues of larger magnitude.
pub const EXP_OVERFLOW_GUARD: f64 = 700.0;

/// `logm_posdef` refuses matrices with a larger condition number.
pub const LOG_CONDITION_GUARD: f64 = 1e14;

fn check_rank(n: usize) -> Result<()> {
    if n == 0 || n > MAX_RANK {
        return Err(Error::Rank(n));
    }
    Ok(())
}

/// An `r × r` complex matrix equal to its conjugate transpose.
///
/// Constructors symmetrize their input to `(A + A†)/2` after rejecting inputs
/// whose asymmetry exceeds [`Real::ASYMMETRY_TOL`] relative to the entry scale.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T> {
    m: CMatrix<T>,
}

impl<T: Real> HermitianMatrix<T> {
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        check_rank(m.dim())?;
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let asymmetry = m.hermitian_defect();
        let tolerance = T::lit(T::ASYMMETRY_TOL) * m.max_abs().max(T::one());
        if asymmetry > tolerance {
            return Err(Error::NotHermitian {
                asymmetry: asymmetry.as_f64(),
                tolerance: tolerance.as_f64(),
            });
        }
        Ok(Self {
            m: m.hermitian_part(),
        })
    }

    pub fn from_parts(re: &[Vec<T>], im: &[Vec<T>]) -> Result<Self> {
        Self::new(CMatrix::from_parts(re, im)?)
    }

    /// Real symmetric matrix from rows.
    pub fn from_real_rows(rows: &[Vec<T>]) -> Result<Self> {
        let im: Vec<Vec<T>> = rows.iter().map(|r| vec![T::zero(); r.len()]).collect();
        Self::from_parts(rows, &im)
    }

    /// Symmetrizes a matrix produced internally by an algebraically Hermitian
    /// expression, without the input-validation check.
    pub(crate) fn from_computed(m: CMatrix<T>) -> Self {
        Self {
            m: m.hermitian_part(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: CMatrix::zeros(n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: CMatrix::identity(n),
        }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        Self {
            m: CMatrix::from_real_diagonal(diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.m[(i, j)]
    }

    /// Real trace.
    pub fn trace(&self) -> T {
        self.m.trace().re
    }

    /// `tr(A B)`, real for Hermitian `A, B`.
    pub fn trace_product(&self, other: &Self) -> T {
        self.m.trace_of_product(&other.m).re
    }

    pub fn frobenius_norm(&self) -> T {
        self.m.frobenius_norm()
    }

    pub fn scale(&self, s: T) -> Self {
        Self { m: self.m.scale(s) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.m.check_same_dim(&other.m)?;
        Ok(Self {
            m: &self.m + &other.m,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.m.check_same_dim(&other.m)?;
        Ok(Self {
            m: &self.m - &other.m,
        })
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.m.check_same_dim(&other.m)?;
        Ok(Self {
            m: &self.m.scale(a) + &other.m.scale(b),
        })
    }

    /// `X† self X`, Hermitian for any square `X`.
    pub fn congruence(&self, x: &CMatrix<T>) -> Result<Self> {
        self.m.check_same_dim(x)?;
        Ok(Self::from_computed(&(&x.adjoint() * &self.m) * x))
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        self.m.check_same_dim(&other.m)
    }
}

/// A Hermitian matrix with strictly positive spectrum: a point of `Herm⁺(r)`.
///
/// The eigendecomposition is computed once at construction and reused by
/// every spectral function.
#[derive(Clone, Debug, PartialEq)]
pub struct PosDefMatrix<T> {
    h: HermitianMatrix<T>,
    eig: EigenDecomposition<T>,
}

impl<T: Real> PosDefMatrix<T> {
    pub fn new(h: HermitianMatrix<T>) -> Result<Self> {
        let eig = eig_hermitian(&h)?;
        if !(eig.min() > T::zero()) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: eig.min().as_f64(),
            });
        }
        Ok(Self { h, eig })
    }

    pub fn from_parts(re: &[Vec<T>], im: &[Vec<T>]) -> Result<Self> {
        Self::new(HermitianMatrix::from_parts(re, im)?)
    }

    pub fn from_real_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_rows(rows)?)
    }

    pub fn from_diagonal(diag: &[T]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(diag))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            h: HermitianMatrix::identity(n),
            eig: EigenDecomposition {
                eigenvalues: vec![T::one(); n],
                eigenvectors: CMatrix::identity(n),
            },
        }
    }

    /// Builds `U diag(values) U†` from a known unitary and positive values.
    pub(crate) fn from_spectrum(vectors: CMatrix<T>, values: Vec<T>) -> Result<Self> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| {
            values[i]
                .partial_cmp(&values[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let eig = EigenDecomposition {
            eigenvalues: order.iter().map(|&i| values[i]).collect(),
            eigenvectors: CMatrix::from_fn(vectors.dim(), |r, c| vectors[(r, order[c])]),
        };
        if !(eig.min() > T::zero()) || !eig.max().is_finite() {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: eig.min().as_f64(),
            });
        }
        Ok(Self {
            h: eig.reconstruct(),
            eig,
        })
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix<T> {
        &self.h
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        self.h.matrix()
    }

    pub fn eigen(&self) -> &EigenDecomposition<T> {
        &self.eig
    }

    pub fn det(&self) -> T {
        self.eig.eigenvalues.iter().fold(T::one(), |a, &b| a * b)
    }

    pub fn condition_number(&self) -> T {
        self.eig.max() / self.eig.min()
    }

    /// `c·P` for `c > 0`.
    pub fn scale(&self, c: T) -> Result<Self> {
        if !(c > T::zero()) {
            return Err(Error::InvalidArgument(
                "scale factor must be positive".into(),
            ));
        }
        Ok(Self {
            h: self.h.scale(c),
            eig: EigenDecomposition {
                eigenvalues: self.eig.eigenvalues.iter().map(|&x| x * c).collect(),
                eigenvectors: self.eig.eigenvectors.clone(),
            },
        })
    }

    fn map_spectrum(&self, f: impl Fn(T) -> T) -> Self {
        let eigenvalues: Vec<T> = self.eig.eigenvalues.iter().map(|&x| f(x)).collect();
        let eigenvectors = self.eig.eigenvectors.clone();
        let h = HermitianMatrix::from_computed(eigenvectors.congruence_diag(&eigenvalues));
        let mut out = Self {
            h,
            eig: EigenDecomposition {
                eigenvalues,
                eigenvectors,
            },
        };
        // f may be decreasing (inverse powers); keep the ascending invariant.
        if out.eig.eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            out.eig.eigenvalues.reverse();
            let n = out.dim();
            let v = &out.eig.eigenvectors;
            out.eig.eigenvectors = CMatrix::from_fn(n, |r, c| v[(r, n - 1 - c)]);
        }
        out
    }

    /// Principal square root `P^{1/2}`.
    pub fn sqrt(&self) -> Self {
        self.map_spectrum(|x| x.sqrt())
    }

    /// `P^{-1/2}`.
    pub fn inv_sqrt(&self) -> Self {
        self.map_spectrum(|x| x.sqrt().recip())
    }

    pub fn inverse(&self) -> Self {
        self.map_spectrum(|x| x.recip())
    }

    /// `P^{-1/2} X P^{-1/2}`, the symmetrized form of `P^{-1} X`.
    pub fn whiten(&self, x: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
        self.h.check_same_dim(x)?;
        let s = self.inv_sqrt();
        Ok(HermitianMatrix::from_computed(
            &(s.matrix() * x.matrix()) * s.matrix(),
        ))
    }

    /// `P^{1/2} X P^{1/2}`, inverse of [`whiten`](Self::whiten).
    pub fn unwhiten(&self, x: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
        self.h.check_same_dim(x)?;
        let s = self.sqrt();
        Ok(HermitianMatrix::from_computed(
            &(s.matrix() * x.matrix()) * s.matrix(),
        ))
    }

    /// `Φ† P Φ`; positive definite whenever `Φ` is invertible.
    pub fn congruence(&self, phi: &CMatrix<T>) -> Result<Self> {
        Self::new(self.h.congruence(phi)?)
    }
}

/// Eigendecomposition without the rank cap, for internal Gram matrices that
/// can exceed [`MAX_RANK`].
pub(crate) fn eigen_unchecked<T: Real>(m: &CMatrix<T>) -> Result<EigenDecomposition<T>> {
    eigen::jacobi(&m.hermitian_part())
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
pub fn eig_hermitian<T: Real>(a: &HermitianMatrix<T>) -> Result<EigenDecomposition<T>> {
    eigen::jacobi(a.matrix())
}

pub fn sqrtm_posdef<T: Real>(p: &PosDefMatrix<T>) -> PosDefMatrix<T> {
    p.sqrt()
}

/// Matrix exponential of a Hermitian matrix.
pub fn expm_hermitian<T: Real>(a: &HermitianMatrix<T>) -> Result<PosDefMatrix<T>> {
    let eig = eig_hermitian(a)?;
    let magnitude = eig.min().abs().max(eig.max().abs());
    if magnitude > T::lit(EXP_OVERFLOW_GUARD) {
        return Err(Error::Overflow {
            magnitude: magnitude.as_f64(),
            guard: EXP_OVERFLOW_GUARD,
        });
    }
    let values = eig.eigenvalues.iter().map(|&x| x.exp()).collect();
    PosDefMatrix::from_spectrum(eig.eigenvectors, values)
}

/// Principal logarithm of a positive definite matrix.
pub fn logm_posdef<T: Real>(p: &PosDefMatrix<T>) -> Result<HermitianMatrix<T>> {
    let condition = p.condition_number();
    if condition > T::lit(LOG_CONDITION_GUARD) {
        return Err(Error::IllConditioned {
            condition: condition.as_f64(),
            guard: LOG_CONDITION_GUARD,
        });
    }
    Ok(p.eigen().map(|x| x.ln()))
}

/// Eigenvalues of `P^{-1} Q`, ascending, computed from the Hermitian
/// `P^{-1/2} Q P^{-1/2}`.
pub fn relative_spectrum<T: Real>(p: &PosDefMatrix<T>, q: &PosDefMatrix<T>) -> Result<Vec<T>> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let c = p.whiten(q.as_hermitian())?;
    let eig = eig_hermitian(&c)?;
    if !(eig.min() > T::zero()) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig.min().as_f64(),
        });
    }
    Ok(eig.eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(re: &[&[f64]], im: &[&[f64]]) -> HermitianMatrix<f64> {
        let re: Vec<Vec<f64>> = re.iter().map(|r| r.to_vec()).collect();
        let im: Vec<Vec<f64>> = im.iter().map(|r| r.to_vec()).collect();
        HermitianMatrix::from_parts(&re, &im).unwrap()
    }

    /// Independent closed form for 2×2 Hermitian eigenvalues.
    fn eig2_closed_form(a: &HermitianMatrix<f64>) -> (f64, f64) {
        let p = a.get(0, 0).re;
        let s = a.get(1, 1).re;
        let b = a.get(0, 1).norm();
        let mid = 0.5 * (p + s);
        let rad = (0.25 * (p - s) * (p - s) + b * b).sqrt();
        (mid - rad, mid + rad)
    }

    fn rel_frob(a: &CMatrix<f64>, b: &CMatrix<f64>) -> f64 {
        (a - b).frobenius_norm() / b.frobenius_norm().max(1.0)
    }

    #[test]
    fn eig_diagonal_is_permutation() {
        let a = HermitianMatrix::from_real_diagonal(&[3.0, 1.0]);
        let e = eig_hermitian(&a).unwrap();
        assert_eq!(e.eigenvalues(), &[1.0, 3.0]);
        let u = e.eigenvectors();
        assert_eq!(u[(1, 0)].norm(), 1.0);
        assert_eq!(u[(0, 1)].norm(), 1.0);
        assert_eq!(u[(0, 0)].norm(), 0.0);
    }

    #[test]
    fn eig_pauli_x() {
        let a = herm(&[&[0.0, 1.0], &[1.0, 0.0]], &[&[0.0, 0.0], &[0.0, 0.0]]);
        let e = eig_hermitian(&a).unwrap();
        assert!((e.eigenvalues()[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eig_complex_two_by_two() {
        // [[2, i], [-i, 2]]: λ² − 4λ + 3 = 0.
        let a = herm(&[&[2.0, 0.0], &[0.0, 2.0]], &[&[0.0, 1.0], &[-1.0, 0.0]]);
        let e = eig_hermitian(&a).unwrap();
        let (lo, hi) = eig2_closed_form(&a);
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
        assert!((e.eigenvalues()[0] - lo).abs() < 1e-14);
        assert!((e.eigenvalues()[1] - hi).abs() < 1e-14);
        assert!(rel_frob(e.reconstruct().matrix(), a.matrix()) < 1e-14);
    }

    #[test]
    fn eig_empty_off_diagonal_converges_immediately() {
        let e = eig_hermitian(&HermitianMatrix::<f64>::zeros(3)).unwrap();
        assert_eq!(e.eigenvalues(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let m = CMatrix::from_parts(
            &[vec![1.0, 2.0], vec![2.1, 1.0]],
            &[vec![0.0; 2], vec![0.0; 2]],
        )
        .unwrap();
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn tiny_asymmetry_is_absorbed() {
        let m = CMatrix::from_parts(
            &[vec![1.0, 2.0], vec![2.0 + 1e-12, 1.0]],
            &[vec![1e-13, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.matrix().hermitian_defect(), 0.0);
        assert_eq!(h.get(0, 0).im, 0.0);
    }

    #[test]
    fn rank_bounds_are_enforced() {
        assert!(matches!(
            HermitianMatrix::new(CMatrix::<f64>::identity(65)),
            Err(Error::Rank(65))
        ));
        assert!(HermitianMatrix::new(CMatrix::<f64>::identity(64)).is_ok());
    }

    #[test]
    fn non_positive_matrix_is_not_posdef() {
        let h = HermitianMatrix::from_real_diagonal(&[1.0, -1e-3]);
        assert!(matches!(
            PosDefMatrix::new(h),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn sqrt_examples() {
        let i = PosDefMatrix::<f64>::identity(3);
        assert_eq!(sqrtm_posdef(&i).matrix(), i.matrix());

        let d = PosDefMatrix::from_diagonal(&[4.0, 9.0]).unwrap();
        let s = sqrtm_posdef(&d);
        assert!(
            rel_frob(
                s.matrix(),
                HermitianMatrix::from_real_diagonal(&[2.0, 3.0]).matrix()
            ) < 1e-15
        );

        let p = PosDefMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let r = sqrtm_posdef(&p);
        // multiplication oracle
        let sq = r.matrix() * r.matrix();
        assert!(rel_frob(&sq, p.matrix()) < 1e-10);
        assert!(r.eigen().min() > 0.0);
    }

    /// Truncated Taylor series, the independent oracle for `expm_hermitian`.
    fn expm_series(a: &CMatrix<f64>) -> CMatrix<f64> {
        let n = a.dim();
        let mut term = CMatrix::identity(n);
        let mut sum = CMatrix::identity(n);
        for k in 1..60 {
            term = (&term * a).scale(1.0 / k as f64);
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn expm_examples() {
        let z = expm_hermitian(&HermitianMatrix::<f64>::zeros(2)).unwrap();
        assert!(rel_frob(z.matrix(), &CMatrix::identity(2)) < 1e-15);

        let d = expm_hermitian(&HermitianMatrix::from_real_diagonal(&[1.0, -1.0])).unwrap();
        let e = std::f64::consts::E;
        assert!(
            rel_frob(
                d.matrix(),
                HermitianMatrix::from_real_diagonal(&[e, 1.0 / e]).matrix()
            ) < 1e-15
        );

        for &t in &[0.3, 1.0, 2.5] {
            let a = HermitianMatrix::from_real_rows(&[vec![0.0, t], vec![t, 0.0]]).unwrap();
            let got = expm_hermitian(&a).unwrap();
            let closed = HermitianMatrix::from_real_rows(&[
                vec![f64::cosh(t), f64::sinh(t)],
                vec![f64::sinh(t), f64::cosh(t)],
            ])
            .unwrap();
            let series = expm_series(a.matrix());
            assert!(rel_frob(closed.matrix(), &series) < 1e-13);
            assert!(rel_frob(got.matrix(), closed.matrix()) < 1e-13);
        }
    }

    #[test]
    fn expm_complex_matches_series() {
        let a = herm(
            &[&[0.5, 0.2, -0.1], &[0.2, -0.3, 0.4], &[-0.1, 0.4, 0.1]],
            &[&[0.0, 0.3, 0.2], &[-0.3, 0.0, -0.1], &[-0.2, 0.1, 0.0]],
        );
        let got = expm_hermitian(&a).unwrap();
        assert!(rel_frob(got.matrix(), &expm_series(a.matrix())) < 1e-13);
    }

    #[test]
    fn expm_overflow_guard() {
        let a = HermitianMatrix::from_real_diagonal(&[701.0, 0.0]);
        assert!(matches!(expm_hermitian(&a), Err(Error::Overflow { .. })));
        let a = HermitianMatrix::from_real_diagonal(&[-701.0, 0.0]);
        assert!(matches!(expm_hermitian(&a), Err(Error::Overflow { .. })));
    }

    #[test]
    fn logm_examples() {
        let z = logm_posdef(&PosDefMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);

        let e2 = (2.0f64).exp();
        let p = PosDefMatrix::from_diagonal(&[e2, (-1.0f64).exp()]).unwrap();
        let l = logm_posdef(&p).unwrap();
        assert!(
            rel_frob(
                l.matrix(),
                HermitianMatrix::from_real_diagonal(&[2.0, -1.0]).matrix()
            ) < 1e-15
        );
    }

    #[test]
    fn logm_condition_guard() {
        let p = PosDefMatrix::from_diagonal(&[1.0, 1e-15]).unwrap();
        assert!(matches!(logm_posdef(&p), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn relative_spectrum_examples() {
        let p = PosDefMatrix::<f64>::from_real_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        for x in relative_spectrum(&p, &p).unwrap() {
            assert!((x - 1.0).abs() < 1e-14);
        }
        let i = PosDefMatrix::<f64>::identity(2);
        let q = PosDefMatrix::from_diagonal(&[4.0, 0.25]).unwrap();
        let s = relative_spectrum(&i, &q).unwrap();
        assert!((s[0] - 0.25).abs() < 1e-15 && (s[1] - 4.0).abs() < 1e-15);

        let a = PosDefMatrix::<f64>::from_diagonal(&[1.0, 4.0]).unwrap();
        let b = PosDefMatrix::from_diagonal(&[1.0, 8.0]).unwrap();
        let s = relative_spectrum(&a, &b).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn relative_spectrum_rank_mismatch() {
        let a = PosDefMatrix::<f64>::identity(2);
        let b = PosDefMatrix::<f64>::identity(3);
        assert!(matches!(
            relative_spectrum(&a, &b),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn inverse_powers_keep_ascending_order() {
        let p = PosDefMatrix::from_diagonal(&[1.0, 4.0, 9.0]).unwrap();
        let inv = p.inverse();
        assert_eq!(inv.eigen().eigenvalues(), &[1.0 / 9.0, 0.25, 1.0]);
        let prod = p.matrix() * inv.matrix();
        assert!(rel_frob(&prod, &CMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let p = PosDefMatrix::<f32>::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = p.eigen().eigenvalues();
        assert!((e[0] - 1.0).abs() < 1e-6 && (e[1] - 3.0).abs() < 1e-6);
        let l = logm_posdef(&p).unwrap();
        let back = expm_hermitian(&l).unwrap();
        assert!((back.matrix() - p.matrix()).frobenius_norm() < 1e-5);
    }
}
