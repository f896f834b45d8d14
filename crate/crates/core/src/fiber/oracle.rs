//! Brute-force distance oracle: discrete path relaxation.
//!
//! The oracle never touches the closed-form distance, the logarithm or the
//! relative spectrum. It relaxes a polygonal path `p = x₀, …, x_N = q` by
//! coordinate descent on the interior nodes, minimizing the discrete energy
//! `N Σ_k ∫₀¹ ‖Δ_k‖²_{x_k + sΔ_k} ds` and reporting the length
//! `Σ_k ∫₀¹ ‖Δ_k‖_{x_k + sΔ_k} ds` of the relaxed path. Segment integrals use
//! Simpson's rule, whose midpoint carries weight 4/6, and metric norms are
//! evaluated with a Cholesky factorization. Since the relaxed polygon is an
//! actual path, its length bounds the true distance from above up to the
//! (fifth-order) quadrature error.
//!
//! Descent proceeds coarse to fine: the path is relaxed with few segments,
//! subdivided, and relaxed again, which removes the slow low-frequency modes a
//! single fine level would need thousands of sweeps to kill.

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{hermitian_basis, AlphaParam};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, CMatrix, HermitianMatrix, PosDefMatrix};
use crate::Real;

/// Eigenvalue floor used to project the initial straight path into the cone.
const INIT_CLAMP: f64 = 1e-10;

/// Consecutive all-rejected sweeps tolerated before the oracle gives up.
const MAX_REJECTED_SWEEPS: usize = 20;

/// Outcome of one oracle relaxation.
#[derive(Clone, Debug)]
pub struct OracleRun<T> {
    /// Length of the relaxed discrete path.
    pub length: T,
    /// Discrete energy at the finest level.
    pub energy: T,
    /// Sweeps performed, summed over levels.
    pub sweeps: usize,
    /// Segment counts of the coarse-to-fine schedule.
    pub levels: Vec<usize>,
}

/// Length of a relaxed discrete path from `p` to `q`; an independent upper
/// estimate of the geodesic distance.
pub fn distance_oracle<T: Real>(
    p: &PosDefMatrix<T>,
    q: &PosDefMatrix<T>,
    alpha: &AlphaParam<T>,
    segments: usize,
    iterations: usize,
    seed: u64,
) -> Result<T> {
    OracleRun::run(p, q, alpha, segments, iterations, seed).map(|run| run.length)
}

impl<T: Real> OracleRun<T> {
    pub fn run(
        p: &PosDefMatrix<T>,
        q: &PosDefMatrix<T>,
        alpha: &AlphaParam<T>,
        segments: usize,
        iterations: usize,
        seed: u64,
    ) -> Result<Self> {
        if segments < 8 {
            return Err(Error::InvalidArgument(format!(
                "oracle needs at least 8 segments, got {segments}"
            )));
        }
        if p.dim() != q.dim() {
            return Err(Error::Dimension {
                expected: p.dim(),
                found: q.dim(),
            });
        }
        alpha.check(p.dim())?;

        let mut levels = vec![segments];
        while let Some(&n) = levels.last() {
            if n % 2 == 0 && n / 2 >= 8 {
                levels.push(n / 2);
            } else {
                break;
            }
        }
        levels.reverse();

        let mut relax = Relaxation::new(p, q, alpha.value(), levels[0], seed)?;
        let mut sweeps = relax.relax(iterations)?;
        for &n in &levels[1..] {
            relax.subdivide(n);
            sweeps += relax.relax(iterations)?;
        }
        Ok(Self {
            length: relax.length(),
            energy: relax.energy(),
            sweeps,
            levels,
        })
    }
}

struct Relaxation<T> {
    nodes: Vec<CMatrix<T>>,
    alpha: T,
    basis: Vec<CMatrix<T>>,
    steps: Vec<Vec<T>>,
    step_floor: T,
    rng: ChaCha8Rng,
}

impl<T: Real> Relaxation<T> {
    fn new(
        p: &PosDefMatrix<T>,
        q: &PosDefMatrix<T>,
        alpha: T,
        n: usize,
        seed: u64,
    ) -> Result<Self> {
        let scale = p
            .as_hermitian()
            .frobenius_norm()
            .max(q.as_hermitian().frobenius_norm());
        let mut nodes = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let s = T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
            let straight = p
                .as_hermitian()
                .lin_comb(T::one() - s, q.as_hermitian(), s)?;
            nodes.push(project_to_cone(&straight)?);
        }
        let basis: Vec<CMatrix<T>> = hermitian_basis::<T>(p.dim())
            .into_iter()
            .map(HermitianMatrix::into_matrix)
            .collect();
        let initial_step = T::lit(0.1) * scale / T::from_usize(n).unwrap();
        Ok(Self {
            steps: vec![vec![initial_step; basis.len()]; n + 1],
            nodes,
            alpha,
            basis,
            step_floor: T::lit(1e-13) * scale.max(T::one()),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn segments(&self) -> usize {
        self.nodes.len() - 1
    }

    fn subdivide(&mut self, n: usize) {
        debug_assert_eq!(n, 2 * self.segments());
        let half = T::lit(0.5);
        let mut nodes = Vec::with_capacity(n + 1);
        let mut steps = Vec::with_capacity(n + 1);
        for k in 0..self.segments() {
            nodes.push(self.nodes[k].clone());
            nodes.push((&self.nodes[k] + &self.nodes[k + 1]).scale(half));
            let s: Vec<T> = self.steps[k].iter().map(|&x| x * half).collect();
            steps.push(s.clone());
            steps.push(s);
        }
        nodes.push(self.nodes[self.segments()].clone());
        steps.push(steps[steps.len() - 1].clone());
        self.nodes = nodes;
        self.steps = steps;
    }

    fn energy(&self) -> T {
        let n = T::from_usize(self.segments()).unwrap();
        n * self
            .nodes
            .windows(2)
            .map(|w| segment(&w[0], &w[1], self.alpha).map_or(T::infinity(), |s| s.energy))
            .sum::<T>()
    }

    fn length(&self) -> T {
        self.nodes
            .windows(2)
            .map(|w| segment(&w[0], &w[1], self.alpha).map_or(T::infinity(), |s| s.length))
            .sum()
    }

    fn local(&self, i: usize, x: &CMatrix<T>) -> Option<T> {
        let a = segment(&self.nodes[i - 1], x, self.alpha)?;
        let b = segment(x, &self.nodes[i + 1], self.alpha)?;
        Some(a.energy + b.energy)
    }

    /// Runs up to `iterations` sweeps; returns the number performed.
    fn relax(&mut self, iterations: usize) -> Result<usize> {
        let mut order: Vec<usize> = (1..self.segments()).collect();
        let mut previous = self.energy();
        let mut quiet = 0;
        let mut rejected_run = 0;
        for sweep in 0..iterations {
            order.shuffle(&mut self.rng);
            let mut accepted_trials = 0usize;
            let mut rejected_trials = 0usize;
            for &i in &order {
                for k in 0..self.basis.len() {
                    match self.update(i, k) {
                        Some(()) => accepted_trials += 1,
                        None => rejected_trials += 1,
                    }
                }
            }
            if accepted_trials == 0 && rejected_trials > 0 {
                rejected_run += 1;
                if rejected_run >= MAX_REJECTED_SWEEPS {
                    return Err(Error::OracleFailure(format!(
                        "every descent step left the positive-definite cone for {MAX_REJECTED_SWEEPS} sweeps"
                    )));
                }
            } else {
                rejected_run = 0;
            }
            let current = self.energy();
            if !(previous - current > T::lit(1e-15) * previous.abs()) {
                quiet += 1;
                if quiet >= 3 {
                    return Ok(sweep + 1);
                }
            } else {
                quiet = 0;
            }
            previous = current;
        }
        Ok(iterations)
    }

    /// One coordinate update; `None` when a trial left the cone and the step
    /// was halved instead.
    fn update(&mut self, i: usize, k: usize) -> Option<()> {
        let delta = self.steps[i][k];
        let x = self.nodes[i].clone();
        let dir = &self.basis[k];
        let f0 = self.local(i, &x).unwrap_or_else(T::infinity);
        let xp = &x + &dir.scale(delta);
        let xm = &x - &dir.scale(delta);
        let (fp, fm) = match (self.local(i, &xp), self.local(i, &xm)) {
            (Some(fp), Some(fm)) => (fp, fm),
            _ => {
                self.steps[i][k] = (delta * T::lit(0.5)).max(self.step_floor);
                return None;
            }
        };

        let mut best = (T::zero(), f0);
        for cand in [(delta, fp), (-delta, fm)] {
            if cand.1 < best.1 {
                best = cand;
            }
        }
        let curvature = fp + fm - T::lit(2.0) * f0;
        if curvature > T::zero() {
            let limit = T::lit(8.0) * delta;
            let t = (delta * (fm - fp) / (T::lit(2.0) * curvature))
                .max(-limit)
                .min(limit);
            if let Some(ft) = self.local(i, &(&x + &dir.scale(t))) {
                if ft < best.1 {
                    best = (t, ft);
                }
            }
        }

        let (moved, _) = best;
        if moved != T::zero() {
            self.nodes[i] = &x + &dir.scale(moved);
            self.steps[i][k] = moved.abs().max(self.step_floor);
        } else {
            self.steps[i][k] = (delta * T::lit(0.5)).max(self.step_floor);
        }
        Some(())
    }
}

struct SegmentIntegrals<T> {
    energy: T,
    length: T,
}

/// Simpson integrals of `‖Δ‖²` and `‖Δ‖` along the straight segment `a → b`.
fn segment<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>, alpha: T) -> Option<SegmentIntegrals<T>> {
    let delta = b - a;
    let mid = (a + b).scale(T::lit(0.5));
    let n0 = sq_norm(a, &delta, alpha)?;
    let nm = sq_norm(&mid, &delta, alpha)?;
    let n1 = sq_norm(b, &delta, alpha)?;
    let sixth = T::lit(1.0 / 6.0);
    let four = T::lit(4.0);
    Some(SegmentIntegrals {
        energy: sixth * (n0 + four * nm + n1),
        length: sixth * (n0.sqrt() + four * nm.sqrt() + n1.sqrt()),
    })
}

/// `tr(x⁻¹Δ x⁻¹Δ) + α tr(x⁻¹Δ)²`, or `None` if `x` is not positive definite.
fn sq_norm<T: Real>(x: &CMatrix<T>, delta: &CMatrix<T>, alpha: T) -> Option<T> {
    let l = cholesky(x)?;
    // Y = L⁻¹ Δ L⁻†, Hermitian; then tr(x⁻¹Δx⁻¹Δ) = ‖Y‖²_F and tr(x⁻¹Δ) = tr Y.
    let z = forward_solve(&l, delta);
    let y = forward_solve(&l, &z.adjoint());
    let tr = y.trace().re;
    let v = y.frobenius_norm().powi(2) + alpha * tr * tr;
    Some(v.max(T::zero()))
}

fn cholesky<T: Real>(x: &CMatrix<T>) -> Option<CMatrix<T>> {
    let n = x.dim();
    let mut l = CMatrix::zeros(n);
    for j in 0..n {
        let mut d = x[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex::new(djj, T::zero());
        for i in j + 1..n {
            let mut s = x[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s.unscale(djj);
        }
    }
    Some(l)
}

/// Solves `L X = B` for lower-triangular `L`.
fn forward_solve<T: Real>(l: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let n = l.dim();
    let mut x = CMatrix::zeros(n);
    for col in 0..n {
        for i in 0..n {
            let mut s = b[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s.unscale(l[(i, i)].re);
        }
    }
    x
}

fn project_to_cone<T: Real>(h: &HermitianMatrix<T>) -> Result<CMatrix<T>> {
    let eig = eig_hermitian(h)?;
    let floor = T::lit(INIT_CLAMP);
    Ok(eig.map(|x| x.max(floor)).into_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_norm_matches_direct_formula() {
        let x = CMatrix::<f64>::from_parts(
            &[vec![2.0, 0.5], vec![0.5, 1.0]],
            &[vec![0.0, 0.3], vec![-0.3, 0.0]],
        )
        .unwrap();
        let d = CMatrix::<f64>::from_parts(
            &[vec![1.0, -0.2], vec![-0.2, 0.4]],
            &[vec![0.0, 0.1], vec![-0.1, 0.0]],
        )
        .unwrap();
        let inv = x.inverse().unwrap();
        let a = &inv * &d;
        let direct = (&a * &a).trace().re + 0.5 * a.trace().re.powi(2);
        let got = sq_norm(&x, &d, 0.5).unwrap();
        assert!((got - direct).abs() < 1e-13 * direct);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let x = CMatrix::from_parts(
            &[vec![1.0, 2.0], vec![2.0, 1.0]],
            &[vec![0.0; 2], vec![0.0; 2]],
        )
        .unwrap();
        assert!(cholesky(&x).is_none());
    }

    #[test]
    fn schedule_is_coarse_to_fine() {
        let p = PosDefMatrix::<f64>::identity(2);
        let q = PosDefMatrix::from_diagonal(&[2.0, 3.0]).unwrap();
        let run = OracleRun::run(&p, &q, &AlphaParam::zero(2), 64, 50, 3).unwrap();
        assert_eq!(run.levels, vec![8, 16, 32, 64]);
        let run = OracleRun::run(&p, &q, &AlphaParam::zero(2), 100, 50, 3).unwrap();
        assert_eq!(run.levels, vec![25, 50, 100]);
    }

    #[test]
    fn too_few_segments() {
        let p = PosDefMatrix::<f64>::identity(2);
        assert!(distance_oracle(&p, &p, &AlphaParam::zero(2), 4, 10, 0).is_err());
    }
}
