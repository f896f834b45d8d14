//! Sections of `Herm⁺` over a quadrature mesh and the L² geometry on them.
//!
//! Every operation works point by point; the per-point results are computed in
//! parallel and then reduced sequentially in id order, so sums are bit-stable
//! regardless of how rayon schedules the work.

mod mesh;

use std::sync::Arc;

use rayon::prelude::*;

pub use mesh::{MeshPoint, QuadratureMesh};

use crate::error::{Error, Result};
use crate::fiber::{alpha_inner, fiber_distance, log_map, FiberGeodesic};
use crate::linalg::{eigen_unchecked, CMatrix, HermitianMatrix, PosDefMatrix};
use crate::Real;

/// Largest condition number accepted for a gauge matrix.
pub const GAUGE_CONDITION_GUARD: f64 = 1e12;

/// Evaluates `f` at every mesh index in parallel. Errors are tagged with the
/// point id, and the one at the smallest id wins.
pub(crate) fn pointwise<T, R, F>(mesh: &QuadratureMesh<T>, f: F) -> Result<Vec<R>>
where
    T: Real,
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    let raw: Vec<Result<R>> = (0..mesh.len()).into_par_iter().map(&f).collect();
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| e.at(mesh.point(i).id)))
        .collect()
}

/// Σ wᵢ xᵢ in id order.
pub(crate) fn weighted_sum<T: Real>(mesh: &QuadratureMesh<T>, xs: &[T]) -> T {
    mesh.points()
        .iter()
        .zip(xs)
        .fold(T::zero(), |acc, (p, &x)| acc + p.weight * x)
}

fn check_len<T: Real, X>(mesh: &QuadratureMesh<T>, values: &[X]) -> Result<()> {
    if values.len() != mesh.len() {
        return Err(Error::InvalidArgument(format!(
            "{} values for a mesh of {} points",
            values.len(),
            mesh.len()
        )));
    }
    Ok(())
}

fn check_ranks<T: Real>(mesh: &QuadratureMesh<T>, dims: impl Iterator<Item = usize>) -> Result<()> {
    for (i, d) in dims.enumerate() {
        if d != mesh.rank() {
            return Err(Error::Dimension {
                expected: mesh.rank(),
                found: d,
            }
            .at(mesh.point(i).id));
        }
    }
    Ok(())
}

/// One positive definite matrix per mesh point.
#[derive(Clone, Debug)]
pub struct MetricSection<T> {
    mesh: Arc<QuadratureMesh<T>>,
    values: Vec<PosDefMatrix<T>>,
}

impl<T: Real> MetricSection<T> {
    pub fn new(mesh: Arc<QuadratureMesh<T>>, values: Vec<PosDefMatrix<T>>) -> Result<Self> {
        check_len(&mesh, &values)?;
        check_ranks(&mesh, values.iter().map(|v| v.dim()))?;
        Ok(Self { mesh, values })
    }

    pub fn from_fn(
        mesh: Arc<QuadratureMesh<T>>,
        f: impl Fn(&MeshPoint<T>) -> Result<PosDefMatrix<T>> + Sync + Send,
    ) -> Result<Self> {
        let values = pointwise(&mesh, |i| f(mesh.point(i)))?;
        Self::new(mesh, values)
    }

    pub fn constant(mesh: Arc<QuadratureMesh<T>>, value: &PosDefMatrix<T>) -> Result<Self> {
        let values = vec![value.clone(); mesh.len()];
        Self::new(mesh, values)
    }

    pub fn identity(mesh: Arc<QuadratureMesh<T>>) -> Self {
        let values = vec![PosDefMatrix::identity(mesh.rank()); mesh.len()];
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[PosDefMatrix<T>] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &PosDefMatrix<T> {
        &self.values[i]
    }

    /// `e^{f} h`, pointwise.
    pub fn conformal(&self, f: &ScalarField<T>) -> Result<Self> {
        self.mesh.check_same(&f.mesh)?;
        let values = pointwise(&self.mesh, |i| self.values[i].scale(f.values[i].exp()))?;
        Ok(Self {
            mesh: self.mesh.clone(),
            values,
        })
    }

    /// `self − other` as a tangent section.
    pub fn difference(&self, other: &Self) -> Result<TangentSection<T>> {
        self.mesh.check_same(&other.mesh)?;
        let values = pointwise(&self.mesh, |i| {
            self.values[i]
                .as_hermitian()
                .sub(other.values[i].as_hermitian())
        })?;
        Ok(TangentSection {
            mesh: self.mesh.clone(),
            values,
        })
    }
}

/// One Hermitian matrix per mesh point.
#[derive(Clone, Debug)]
pub struct TangentSection<T> {
    mesh: Arc<QuadratureMesh<T>>,
    values: Vec<HermitianMatrix<T>>,
}

impl<T: Real> TangentSection<T> {
    pub fn new(mesh: Arc<QuadratureMesh<T>>, values: Vec<HermitianMatrix<T>>) -> Result<Self> {
        check_len(&mesh, &values)?;
        check_ranks(&mesh, values.iter().map(|v| v.dim()))?;
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Arc<QuadratureMesh<T>>) -> Self {
        let values = vec![HermitianMatrix::zeros(mesh.rank()); mesh.len()];
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[HermitianMatrix<T>] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &HermitianMatrix<T> {
        &self.values[i]
    }
}

/// One invertible complex matrix per mesh point, acting on metrics by
/// `H ↦ Φ† H Φ`.
#[derive(Clone, Debug)]
pub struct GaugeTransform<T> {
    mesh: Arc<QuadratureMesh<T>>,
    values: Vec<CMatrix<T>>,
}

impl<T: Real> GaugeTransform<T> {
    pub fn new(mesh: Arc<QuadratureMesh<T>>, values: Vec<CMatrix<T>>) -> Result<Self> {
        check_len(&mesh, &values)?;
        check_ranks(&mesh, values.iter().map(|v| v.dim()))?;
        pointwise(&mesh, |i| check_condition(&values[i]))?;
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[CMatrix<T>] {
        &self.values
    }
}

/// Rejects non-finite or near-singular `Φ`. The condition number is the ratio
/// of extreme singular values, read off the spectrum of `Φ†Φ`.
fn check_condition<T: Real>(phi: &CMatrix<T>) -> Result<()> {
    if !phi.is_finite() {
        return Err(Error::NonFinite);
    }
    let gram = &phi.adjoint() * phi;
    let eig = eigen_unchecked(&gram)?;
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if lo > T::zero() {
        (hi / lo).sqrt().as_f64()
    } else {
        f64::INFINITY
    };
    if !(condition < GAUGE_CONDITION_GUARD) {
        return Err(Error::IllConditioned {
            condition,
            guard: GAUGE_CONDITION_GUARD,
        });
    }
    Ok(())
}

/// One finite real number per mesh point.
#[derive(Clone, Debug)]
pub struct ScalarField<T> {
    mesh: Arc<QuadratureMesh<T>>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(mesh: Arc<QuadratureMesh<T>>, values: Vec<T>) -> Result<Self> {
        check_len(&mesh, &values)?;
        for (p, v) in mesh.points().iter().zip(&values) {
            if !v.is_finite() {
                return Err(Error::NonFinite.at(p.id));
            }
        }
        Ok(Self { mesh, values })
    }

    pub fn from_fn(
        mesh: Arc<QuadratureMesh<T>>,
        f: impl FnMut(&MeshPoint<T>) -> T,
    ) -> Result<Self> {
        let values = mesh.points().iter().map(f).collect();
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(
            self.mesh.clone(),
            self.values.iter().map(|&x| f(x)).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.mesh.check_same(&other.mesh)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a - b)
            .collect();
        Self::new(self.mesh.clone(), values)
    }

    /// `(Σ wᵢ fᵢ²)^{1/2}`.
    pub fn l2_norm(&self) -> T {
        let sq: Vec<T> = self.values.iter().map(|&x| x * x).collect();
        weighted_sum(&self.mesh, &sq).sqrt()
    }
}

/// `Σ wᵢ ⟨vᵢ, wᵢ⟩_{hᵢ}` with the α of each point.
pub fn l2_inner<T: Real>(
    h: &MetricSection<T>,
    v: &TangentSection<T>,
    w: &TangentSection<T>,
) -> Result<T> {
    h.mesh.check_same(&v.mesh)?;
    h.mesh.check_same(&w.mesh)?;
    let mesh = &h.mesh;
    let local = pointwise(mesh, |i| {
        alpha_inner(&h.values[i], &v.values[i], &w.values[i], &mesh.alpha_at(i))
    })?;
    Ok(weighted_sum(mesh, &local))
}

fn fiber_distances<T: Real>(h1: &MetricSection<T>, h2: &MetricSection<T>) -> Result<Vec<T>> {
    h1.mesh.check_same(&h2.mesh)?;
    let mesh = &h1.mesh;
    pointwise(mesh, |i| {
        fiber_distance(&h1.values[i], &h2.values[i], &mesh.alpha_at(i))
    })
}

/// `(Σ wᵢ dᵢ(h1ᵢ, h2ᵢ)²)^{1/2}`: the L² distance realized pointwise by fiber
/// geodesics.
pub fn section_distance<T: Real>(h1: &MetricSection<T>, h2: &MetricSection<T>) -> Result<T> {
    let d = fiber_distances(h1, h2)?;
    let sq: Vec<T> = d.iter().map(|&x| x * x).collect();
    Ok(weighted_sum(&h1.mesh, &sq).sqrt())
}

/// `Σ wᵢ dᵢ(h1ᵢ, h2ᵢ)`.
pub fn theta_metric<T: Real>(h1: &MetricSection<T>, h2: &MetricSection<T>) -> Result<T> {
    let d = fiber_distances(h1, h2)?;
    Ok(weighted_sum(&h1.mesh, &d))
}

/// The section geodesic from `h1` (t = 0) to `h2` (t = 1), built once and
/// evaluated at arbitrary real times.
#[derive(Clone, Debug)]
pub struct SectionGeodesic<T> {
    mesh: Arc<QuadratureMesh<T>>,
    fibers: Vec<FiberGeodesic<T>>,
}

impl<T: Real> SectionGeodesic<T> {
    pub fn connecting(h1: &MetricSection<T>, h2: &MetricSection<T>) -> Result<Self> {
        h1.mesh.check_same(&h2.mesh)?;
        let fibers = pointwise(&h1.mesh, |i| {
            FiberGeodesic::new(h1.values[i].clone(), log_map(&h1.values[i], &h2.values[i])?)
        })?;
        Ok(Self {
            mesh: h1.mesh.clone(),
            fibers,
        })
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh<T>> {
        &self.mesh
    }

    pub fn velocity(&self) -> TangentSection<T> {
        TangentSection {
            mesh: self.mesh.clone(),
            values: self.fibers.iter().map(|g| g.velocity().clone()).collect(),
        }
    }

    pub fn eval(&self, t: T) -> Result<MetricSection<T>> {
        let values = pointwise(&self.mesh, |i| self.fibers[i].eval(t))?;
        Ok(MetricSection {
            mesh: self.mesh.clone(),
            values,
        })
    }
}

pub fn section_geodesic<T: Real>(
    h1: &MetricSection<T>,
    h2: &MetricSection<T>,
    t: T,
) -> Result<MetricSection<T>> {
    SectionGeodesic::connecting(h1, h2)?.eval(t)
}

/// `√(r(1 + αr)) ‖f − g‖₂`, the distance between `e^f h` and `e^g h`. Only
/// valid when α is constant over the mesh.
pub fn conformal_distance<T: Real>(
    h: &MetricSection<T>,
    f: &ScalarField<T>,
    g: &ScalarField<T>,
) -> Result<T> {
    h.mesh.check_same(&f.mesh)?;
    let alpha = h.mesh.constant_alpha()?;
    let r = T::lit(h.mesh.rank() as f64);
    let factor = (r * (T::one() + alpha.value() * r)).sqrt();
    Ok(factor * f.sub(g)?.l2_norm())
}

pub fn gauge_apply<T: Real>(
    phi: &GaugeTransform<T>,
    h: &MetricSection<T>,
) -> Result<MetricSection<T>> {
    phi.mesh.check_same(&h.mesh)?;
    let values = pointwise(&h.mesh, |i| h.values[i].congruence(&phi.values[i]))?;
    Ok(MetricSection {
        mesh: h.mesh.clone(),
        values,
    })
}

pub fn gauge_apply_tangent<T: Real>(
    phi: &GaugeTransform<T>,
    v: &TangentSection<T>,
) -> Result<TangentSection<T>> {
    phi.mesh.check_same(&v.mesh)?;
    let values = pointwise(&v.mesh, |i| v.values[i].congruence(&phi.values[i]))?;
    Ok(TangentSection {
        mesh: v.mesh.clone(),
        values,
    })
}

/// The L² inner product with its base frozen at `h0`.
pub fn flat_inner<T: Real>(
    h0: &MetricSection<T>,
    v: &TangentSection<T>,
    w: &TangentSection<T>,
) -> Result<T> {
    l2_inner(h0, v, w)
}

/// `‖h1 − h2‖_{h0}`.
pub fn flat_distance<T: Real>(
    h0: &MetricSection<T>,
    h1: &MetricSection<T>,
    h2: &MetricSection<T>,
) -> Result<T> {
    let d = h1.difference(h2)?;
    Ok(flat_inner(h0, &d, &d)?.max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests;
