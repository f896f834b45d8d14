//! Riemannian geometry of one fibre `Herm⁺(r)` under the α-metric
//! `⟨v, w⟩_h = tr(h⁻¹v h⁻¹w) + α tr(h⁻¹v) tr(h⁻¹w)`.
//!
//! Every `h⁻¹v` is realized through its Hermitian form `h^{-1/2} v h^{-1/2}`
//! (see [`PosDefMatrix::whiten`]), never as an explicit inverse times a
//! matrix. Only the inner product, the distance and the normalization of
//! sectional curvature depend on α; spray, curvature tensor, geodesics and the
//! logarithm map are the same for every admissible α.

mod differential;
mod oracle;

pub use differential::exp_differential_min_singular;
pub use oracle::{distance_oracle, OracleRun};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, expm_hermitian, logm_posdef, relative_spectrum, CMatrix, EigenDecomposition,
    HermitianMatrix, PosDefMatrix, EXP_OVERFLOW_GUARD,
};
use crate::Real;

/// The metric parameter α, admissible when `α > −1/r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaParam<T> {
    value: T,
    rank: usize,
}

impl<T: Real> AlphaParam<T> {
    pub fn new(value: T, rank: usize) -> Result<Self> {
        let bound = -T::one() / T::from_usize(rank).unwrap_or_else(T::one);
        if rank == 0 || !value.is_finite() || !(value > bound) {
            return Err(Error::InvalidAlpha {
                alpha: value.as_f64(),
                rank,
            });
        }
        Ok(Self { value, rank })
    }

    /// The unweighted metric `α = 0`.
    pub fn zero(rank: usize) -> Self {
        Self {
            value: T::zero(),
            rank,
        }
    }

    pub fn value(&self) -> T {
        self.value
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.rank != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: self.rank,
            });
        }
        Ok(())
    }
}

/// `tr(h⁻¹v h⁻¹w) + α tr(h⁻¹v) tr(h⁻¹w)`.
pub fn alpha_inner<T: Real>(
    h: &PosDefMatrix<T>,
    v: &HermitianMatrix<T>,
    w: &HermitianMatrix<T>,
    alpha: &AlphaParam<T>,
) -> Result<T> {
    alpha.check(h.dim())?;
    let vs = h.whiten(v)?;
    let ws = h.whiten(w)?;
    Ok(vs.trace_product(&ws) + alpha.value * vs.trace() * ws.trace())
}

/// The metric spray `B_h(v, w) = ½ v h⁻¹ w + ½ w h⁻¹ v`.
pub fn spray<T: Real>(
    h: &PosDefMatrix<T>,
    v: &HermitianMatrix<T>,
    w: &HermitianMatrix<T>,
) -> Result<HermitianMatrix<T>> {
    let vs = h.whiten(v)?;
    let ws = h.whiten(w)?;
    // v h⁻¹ w = h^{1/2} (vs ws) h^{1/2}; the symmetrized product is Hermitian.
    let sym = HermitianMatrix::from_computed(
        (&(vs.matrix() * ws.matrix()) + &(ws.matrix() * vs.matrix())).scale(T::lit(0.5)),
    );
    h.unwhiten(&sym)
}

/// `R_h(u, v) w`, with `h⁻¹R_h(u,v)w = −¼ [[U, V], W]` for `U = h⁻¹u` etc.
pub fn curvature_tensor<T: Real>(
    h: &PosDefMatrix<T>,
    u: &HermitianMatrix<T>,
    v: &HermitianMatrix<T>,
    w: &HermitianMatrix<T>,
) -> Result<HermitianMatrix<T>> {
    let us = h.whiten(u)?;
    let vs = h.whiten(v)?;
    let ws = h.whiten(w)?;
    // The similarity h^{-1/2}·h^{1/2} carries brackets of whitened forms to
    // brackets of U, V, W; the double bracket of Hermitian forms is Hermitian.
    let double = us.matrix().commutator(vs.matrix()).commutator(ws.matrix());
    let inner = HermitianMatrix::from_computed(double.scale(T::lit(-0.25)));
    h.unwhiten(&inner)
}

/// Sectional curvature of a tangent plane, together with whether the input
/// pair had to be orthonormalized first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionalCurvature<T> {
    pub value: T,
    /// True when `(u, v)` was not orthonormal within tolerance and was replaced
    /// by its Gram–Schmidt orthonormalization.
    pub orthonormalized: bool,
    /// Largest deviation of the input Gram matrix from the identity.
    pub gram_defect: T,
}

/// `¼ tr([U, V]²)` for an α-orthonormal pair spanning the plane of `(u, v)`.
pub fn sectional_curvature<T: Real>(
    h: &PosDefMatrix<T>,
    u: &HermitianMatrix<T>,
    v: &HermitianMatrix<T>,
    alpha: &AlphaParam<T>,
) -> Result<SectionalCurvature<T>> {
    let uu = alpha_inner(h, u, u, alpha)?;
    let vv = alpha_inner(h, v, v, alpha)?;
    let uv = alpha_inner(h, u, v, alpha)?;
    let gram_defect = (uu - T::one())
        .abs()
        .max((vv - T::one()).abs())
        .max(uv.abs());

    let (e1, e2, orthonormalized) = if gram_defect <= T::lit(T::ORTHONORMAL_TOL) {
        (u.clone(), v.clone(), false)
    } else {
        let (e1, e2) = gram_schmidt(uu, vv, uv, u, v)?;
        (e1, e2, true)
    };

    let us = h.whiten(&e1)?;
    let vs = h.whiten(&e2)?;
    let k = us.matrix().commutator(vs.matrix());
    let value = T::lit(0.25) * (&k * &k).trace().re;
    Ok(SectionalCurvature {
        value,
        orthonormalized,
        gram_defect,
    })
}

/// Gram–Schmidt on a pair given its Gram entries.
pub(crate) fn gram_schmidt<T: Real>(
    uu: T,
    vv: T,
    uv: T,
    u: &HermitianMatrix<T>,
    v: &HermitianMatrix<T>,
) -> Result<(HermitianMatrix<T>, HermitianMatrix<T>)> {
    if !(uu > T::zero()) || !(vv > T::zero()) {
        return Err(Error::DegeneratePlane);
    }
    let nu = uu.sqrt();
    let e1 = u.scale(nu.recip());
    let proj = uv / nu;
    let rest = vv - proj * proj;
    if !(rest > T::lit(1e-20) * vv) {
        return Err(Error::DegeneratePlane);
    }
    let e2 = v.lin_comb(T::one(), &e1, -proj)?.scale(rest.sqrt().recip());
    Ok((e1, e2))
}

/// The geodesic `γ(t) = H^{1/2} exp(t H^{-1/2} A H^{-1/2}) H^{1/2}`.
#[derive(Clone, Debug)]
pub struct FiberGeodesic<T> {
    start: PosDefMatrix<T>,
    velocity: HermitianMatrix<T>,
    root: PosDefMatrix<T>,
    direction: EigenDecomposition<T>,
}

impl<T: Real> FiberGeodesic<T> {
    pub fn new(start: PosDefMatrix<T>, velocity: HermitianMatrix<T>) -> Result<Self> {
        let whitened = start.whiten(&velocity)?;
        let direction = eig_hermitian(&whitened)?;
        let root = start.sqrt();
        Ok(Self {
            start,
            velocity,
            root,
            direction,
        })
    }

    /// The minimizing geodesic with `γ(0) = p`, `γ(1) = q`.
    pub fn connecting(p: &PosDefMatrix<T>, q: &PosDefMatrix<T>) -> Result<Self> {
        Self::new(p.clone(), log_map(p, q)?)
    }

    pub fn start(&self) -> &PosDefMatrix<T> {
        &self.start
    }

    pub fn velocity(&self) -> &HermitianMatrix<T> {
        &self.velocity
    }

    pub fn eval(&self, t: T) -> Result<PosDefMatrix<T>> {
        if t == T::zero() {
            return Ok(self.start.clone());
        }
        let lambdas = self.direction.eigenvalues();
        let magnitude = lambdas
            .iter()
            .map(|&x| (x * t).abs())
            .fold(T::zero(), T::max);
        if magnitude > T::lit(EXP_OVERFLOW_GUARD) {
            return Err(Error::Overflow {
                magnitude: magnitude.as_f64(),
                guard: EXP_OVERFLOW_GUARD,
            });
        }
        let moved = self.direction.map(|x| (x * t).exp());
        let s = self.root.matrix();
        PosDefMatrix::new(HermitianMatrix::from_computed(&(s * moved.matrix()) * s))
    }
}

pub fn geodesic_eval<T: Real>(g: &FiberGeodesic<T>, t: T) -> Result<PosDefMatrix<T>> {
    g.eval(t)
}

/// `√(Σ (log λᵢ)² + α (Σ log λᵢ)²)` over the relative spectrum of `(p, q)`.
pub fn fiber_distance<T: Real>(
    p: &PosDefMatrix<T>,
    q: &PosDefMatrix<T>,
    alpha: &AlphaParam<T>,
) -> Result<T> {
    alpha.check(p.dim())?;
    if p.matrix() == q.matrix() {
        return Ok(T::zero());
    }
    let lambdas = relative_spectrum(p, q)?;
    Ok(distance_from_spectrum(&lambdas, alpha.value))
}

pub(crate) fn distance_from_spectrum<T: Real>(lambdas: &[T], alpha: T) -> T {
    let logs = lambdas.iter().map(|&l| l.ln());
    let (sq, sum) = logs.fold((T::zero(), T::zero()), |(sq, sum), x| (sq + x * x, sum + x));
    (sq + alpha * sum * sum).max(T::zero()).sqrt()
}

/// The initial velocity `A = P^{1/2} log(P^{-1/2} Q P^{-1/2}) P^{1/2}` of the
/// geodesic from `p` reaching `q` at `t = 1`.
pub fn log_map<T: Real>(p: &PosDefMatrix<T>, q: &PosDefMatrix<T>) -> Result<HermitianMatrix<T>> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    if p.matrix() == q.matrix() {
        return Ok(HermitianMatrix::zeros(p.dim()));
    }
    let c = PosDefMatrix::new(p.whiten(q.as_hermitian())?)?;
    let l = logm_posdef(&c)?;
    p.unwhiten(&l)
}

/// Exponential map `exp_h(v)`, the geodesic at time one.
pub fn exp_map<T: Real>(h: &PosDefMatrix<T>, v: &HermitianMatrix<T>) -> Result<PosDefMatrix<T>> {
    let w = h.whiten(v)?;
    let e = expm_hermitian(&w)?;
    PosDefMatrix::new(h.unwhiten(e.as_hermitian())?)
}

/// Frobenius norm of a central-difference estimate of `d/dt (γ⁻¹ γ̇)` at `t`,
/// expanded as `γ⁻¹γ̈ − (γ⁻¹γ̇)²` with three-point stencils for `γ̇` and `γ̈`.
pub fn geodesic_residual<T: Real>(g: &FiberGeodesic<T>, t: T, step: T) -> Result<T> {
    if !(step > T::zero()) {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let minus = g.eval(t - step)?;
    let mid = g.eval(t)?;
    let plus = g.eval(t + step)?;
    let two = T::lit(2.0);
    let velocity = (plus.matrix() - minus.matrix()).scale((two * step).recip());
    let accel = (&(plus.matrix() - mid.matrix()) + &(minus.matrix() - mid.matrix()))
        .scale((step * step).recip());
    let inv = mid.inverse();
    let x = inv.matrix() * &velocity;
    let y = inv.matrix() * &accel;
    Ok((&y - &(&x * &x)).frobenius_norm())
}

/// Identity on the real `r²`-dimensional coordinates of Hermitian matrices
/// with respect to a Frobenius-orthonormal basis.
pub(crate) fn hermitian_basis<T: Real>(n: usize) -> Vec<HermitianMatrix<T>> {
    let mut basis = Vec::with_capacity(n * n);
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let zero = num_complex::Complex::new(T::zero(), T::zero());
    for i in 0..n {
        basis.push(HermitianMatrix::from_computed(CMatrix::from_fn(
            n,
            |a, b| {
                if a == i && b == i {
                    num_complex::Complex::new(T::one(), T::zero())
                } else {
                    zero
                }
            },
        )));
    }
    for i in 0..n {
        for j in i + 1..n {
            basis.push(HermitianMatrix::from_computed(CMatrix::from_fn(
                n,
                |a, b| {
                    if (a, b) == (i, j) || (a, b) == (j, i) {
                        num_complex::Complex::new(s, T::zero())
                    } else {
                        zero
                    }
                },
            )));
            basis.push(HermitianMatrix::from_computed(CMatrix::from_fn(
                n,
                |a, b| {
                    if (a, b) == (i, j) {
                        num_complex::Complex::new(T::zero(), s)
                    } else if (a, b) == (j, i) {
                        num_complex::Complex::new(T::zero(), -s)
                    } else {
                        zero
                    }
                },
            )));
        }
    }
    basis
}

/// Coordinates of `x` in [`hermitian_basis`].
pub(crate) fn hermitian_coords<T: Real>(x: &CMatrix<T>) -> Vec<T> {
    let n = x.dim();
    let r2 = T::lit(std::f64::consts::SQRT_2);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(x[(i, i)].re);
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(r2 * x[(i, j)].re);
            out.push(r2 * x[(i, j)].im);
        }
    }
    out
}
