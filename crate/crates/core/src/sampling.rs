//! Seeded random instances for property sweeps.
//!
//! All randomness flows from a single `u64` through ChaCha8, a counter-based
//! stream cipher generator, so sweeps are reproducible across platforms.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fiber::{alpha_inner, gram_schmidt, AlphaParam};
use crate::linalg::{expm_hermitian, CMatrix, HermitianMatrix, PosDefMatrix};
use crate::section::{
    GaugeTransform, MeshPoint, MetricSection, QuadratureMesh, ScalarField, TangentSection,
};
use crate::Real;
use std::sync::Arc;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn pick<'a, X>(&mut self, xs: &'a [X]) -> &'a X {
        &xs[self.index(xs.len())]
    }

    pub fn seed(&mut self) -> u64 {
        self.rng.random()
    }

    /// Entries uniform in the square `[-1, 1] + i[-1, 1]`.
    pub fn complex_matrix<T: Real>(&mut self, n: usize) -> CMatrix<T> {
        CMatrix::from_fn(n, |_, _| {
            Complex::new(
                T::lit(self.uniform(-1.0, 1.0)),
                T::lit(self.uniform(-1.0, 1.0)),
            )
        })
    }

    /// Random Hermitian matrix rescaled to the given Frobenius norm.
    pub fn hermitian_with_norm<T: Real>(&mut self, n: usize, norm: f64) -> HermitianMatrix<T> {
        let g = self.complex_matrix::<T>(n);
        let h = HermitianMatrix::from_computed(g);
        let f = h.frobenius_norm();
        if f == T::zero() {
            return HermitianMatrix::identity(n).scale(T::lit(norm / (n as f64).sqrt()));
        }
        h.scale(T::lit(norm) / f)
    }

    /// Random Hermitian matrix with Frobenius norm uniform in `[0, max_norm]`.
    pub fn hermitian<T: Real>(&mut self, n: usize, max_norm: f64) -> HermitianMatrix<T> {
        let norm = self.uniform(0.0, max_norm);
        self.hermitian_with_norm(n, norm)
    }

    /// `exp(X)` for a random Hermitian `X` with `‖X‖_F ≤ log_spread`; the
    /// eigenvalues lie in `[e^{-log_spread}, e^{log_spread}]`.
    pub fn posdef<T: Real>(&mut self, n: usize, log_spread: f64) -> PosDefMatrix<T> {
        let x = self.hermitian::<T>(n, log_spread);
        expm_hermitian(&x).expect("bounded exponent cannot overflow")
    }

    /// `c I + G` with `G` random; condition numbers stay moderate.
    pub fn gauge<T: Real>(&mut self, n: usize) -> CMatrix<T> {
        loop {
            let g = self.complex_matrix::<T>(n);
            let shift = CMatrix::identity(n).scale(T::lit(self.uniform(1.0, 2.0) * n as f64));
            let phi = &g + &shift;
            if phi.inverse().is_ok() {
                return phi;
            }
        }
    }

    /// Alpha drawn from `choices`, each clamped to be admissible for `rank`.
    pub fn alpha<T: Real>(&mut self, rank: usize, choices: &[f64]) -> AlphaParam<T> {
        let bound = -1.0 / rank as f64;
        let a = self.pick(choices).max(bound + 1e-3);
        AlphaParam::new(T::lit(a), rank).expect("clamped alpha is admissible")
    }

    /// A pair orthonormal with respect to the α-metric at `h`.
    pub fn orthonormal_pair<T: Real>(
        &mut self,
        h: &PosDefMatrix<T>,
        alpha: &AlphaParam<T>,
    ) -> Result<(HermitianMatrix<T>, HermitianMatrix<T>)> {
        loop {
            let u = self.hermitian_with_norm::<T>(h.dim(), 1.0);
            let v = self.hermitian_with_norm::<T>(h.dim(), 1.0);
            let uu = alpha_inner(h, &u, &u, alpha)?;
            let vv = alpha_inner(h, &v, &v, alpha)?;
            let uv = alpha_inner(h, &u, &v, alpha)?;
            if let Ok(pair) = gram_schmidt(uu, vv, uv, &u, &v) {
                return Ok(pair);
            }
        }
    }

    /// Tangent vectors at `h` whose `h⁻¹`-images commute: both are
    /// `h^{1/2} D h^{1/2}` for real diagonal `D`.
    pub fn commuting_pair<T: Real>(
        &mut self,
        h: &PosDefMatrix<T>,
    ) -> Result<(HermitianMatrix<T>, HermitianMatrix<T>)> {
        let n = h.dim();
        let d1: Vec<T> = (0..n).map(|_| T::lit(self.uniform(-1.0, 1.0))).collect();
        let d2: Vec<T> = (0..n).map(|_| T::lit(self.uniform(-1.0, 1.0))).collect();
        Ok((
            h.unwhiten(&HermitianMatrix::from_real_diagonal(&d1))?,
            h.unwhiten(&HermitianMatrix::from_real_diagonal(&d2))?,
        ))
    }

    /// Positive diagonal matrix with log-entries in `[-log_spread, log_spread]`.
    pub fn diagonal_posdef<T: Real>(&mut self, n: usize, log_spread: f64) -> PosDefMatrix<T> {
        let d: Vec<T> = (0..n)
            .map(|_| T::lit(self.uniform(-log_spread, log_spread).exp()))
            .collect();
        PosDefMatrix::from_diagonal(&d).expect("positive diagonal")
    }

    /// `n` points with weights in `[0.1, 2)` and α drawn from `alphas`
    /// (clamped to be admissible).
    pub fn mesh<T: Real>(
        &mut self,
        rank: usize,
        n: usize,
        alphas: &[f64],
    ) -> Arc<QuadratureMesh<T>> {
        let bound = -1.0 / rank as f64 + 1e-3;
        let points = (0..n as u64)
            .map(|id| MeshPoint {
                id,
                weight: T::lit(self.uniform(0.1, 2.0)),
                alpha: T::lit(self.pick(alphas).max(bound)),
            })
            .collect();
        Arc::new(QuadratureMesh::new(rank, points).expect("sampled mesh is valid"))
    }

    pub fn metric_section<T: Real>(
        &mut self,
        mesh: &Arc<QuadratureMesh<T>>,
        log_spread: f64,
    ) -> MetricSection<T> {
        let values = (0..mesh.len())
            .map(|_| self.posdef(mesh.rank(), log_spread))
            .collect();
        MetricSection::new(mesh.clone(), values).expect("shapes match the mesh")
    }

    pub fn diagonal_section<T: Real>(
        &mut self,
        mesh: &Arc<QuadratureMesh<T>>,
        log_spread: f64,
    ) -> MetricSection<T> {
        let values = (0..mesh.len())
            .map(|_| self.diagonal_posdef(mesh.rank(), log_spread))
            .collect();
        MetricSection::new(mesh.clone(), values).expect("shapes match the mesh")
    }

    pub fn tangent_section<T: Real>(
        &mut self,
        mesh: &Arc<QuadratureMesh<T>>,
        max_norm: f64,
    ) -> TangentSection<T> {
        let values = (0..mesh.len())
            .map(|_| self.hermitian(mesh.rank(), max_norm))
            .collect();
        TangentSection::new(mesh.clone(), values).expect("shapes match the mesh")
    }

    pub fn gauge_transform<T: Real>(&mut self, mesh: &Arc<QuadratureMesh<T>>) -> GaugeTransform<T> {
        let values = (0..mesh.len()).map(|_| self.gauge(mesh.rank())).collect();
        GaugeTransform::new(mesh.clone(), values).expect("shifted gauges are well conditioned")
    }

    /// Values uniform in `[-bound, bound]`.
    pub fn scalar_field<T: Real>(
        &mut self,
        mesh: &Arc<QuadratureMesh<T>>,
        bound: f64,
    ) -> ScalarField<T> {
        let values = (0..mesh.len())
            .map(|_| T::lit(self.uniform(-bound, bound)))
            .collect();
        ScalarField::new(mesh.clone(), values).expect("finite values")
    }
}
