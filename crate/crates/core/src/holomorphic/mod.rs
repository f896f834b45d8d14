//! Case studies on the unit disk: a rank-two singular metric with
//! `det H = |z|⁴`, conformal line-bundle metrics, discrete sub-mean-value
//! tests, dual metrics and eigenvalue bounds.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::completion::{integrability_report, IntegrabilityReport, SingularSection};
use crate::error::{Error, Result};
use crate::linalg::{relative_spectrum, CMatrix, HermitianMatrix, PosDefMatrix};
use crate::section::{pointwise, MeshPoint, MetricSection, QuadratureMesh};

/// `∫_Δ (log |z|⁴)² dA`.
pub const RAUFI_LOG_DET_TARGET: f64 = 8.0 * PI;
/// `∫_Δ (log |z|²)² dA`.
pub const LINE_BUNDLE_TARGET: f64 = 2.0 * PI;
/// Angular samples per test circle in [`psh_check`].
pub const PSH_CIRCLE_SAMPLES: usize = 128;
/// Largest sub-mean-value violation still attributed to interpolation error.
pub const PSH_TOLERANCE: f64 = 1e-3;

/// Polar midpoint grid on the unit disk. Point `(i, j)` sits at radius
/// `(i + ½)Δr`, angle `(j + ½)Δθ`, has id `i·n_theta + j` and weight
/// `rᵢ Δr Δθ`, so the weights sum to π exactly and the origin is never a point.
#[derive(Clone, Debug)]
pub struct DiskMesh {
    n_r: usize,
    n_theta: usize,
    mesh: Arc<QuadratureMesh<f64>>,
}

impl DiskMesh {
    pub fn new(n_r: usize, n_theta: usize, rank: usize, alpha: f64) -> Result<Self> {
        if n_r == 0 || n_theta < 2 {
            return Err(Error::InvalidMesh(format!(
                "disk mesh needs n_r ≥ 1 and n_theta ≥ 2, got ({n_r}, {n_theta})"
            )));
        }
        let (dr, dt) = (1.0 / n_r as f64, TAU / n_theta as f64);
        let mut points = Vec::with_capacity(n_r * n_theta);
        for i in 0..n_r {
            let r = (i as f64 + 0.5) * dr;
            for j in 0..n_theta {
                points.push(MeshPoint {
                    id: (i * n_theta + j) as u64,
                    weight: r * dr * dt,
                    alpha,
                });
            }
        }
        let mesh = Arc::new(QuadratureMesh::new(rank, points)?);
        Ok(Self { n_r, n_theta, mesh })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh<f64>> {
        &self.mesh
    }

    pub fn dr(&self) -> f64 {
        1.0 / self.n_r as f64
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.n_theta as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr()
    }

    pub fn angle(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dtheta()
    }

    /// The complex coordinate of mesh index `k` (in id order).
    pub fn z(&self, k: usize) -> Complex64 {
        let (i, j) = (k / self.n_theta, k % self.n_theta);
        Complex64::from_polar(self.radius(i), self.angle(j))
    }

    /// Same grid with a different rank or α.
    pub fn with_rank(&self, rank: usize, alpha: f64) -> Result<Self> {
        Self::new(self.n_r, self.n_theta, rank, alpha)
    }
}

/// A real function sampled at the points of a [`DiskMesh`].
#[derive(Clone, Debug)]
pub struct GridFunction {
    disk: DiskMesh,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(disk: DiskMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != disk.mesh.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a disk mesh of {} points",
                values.len(),
                disk.mesh.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite.at(k as u64));
        }
        Ok(Self { disk, values })
    }

    pub fn from_fn(disk: DiskMesh, f: impl Fn(Complex64) -> f64) -> Result<Self> {
        let values = (0..disk.mesh.len()).map(|k| f(disk.z(k))).collect();
        Self::new(disk, values)
    }

    pub fn disk(&self) -> &DiskMesh {
        &self.disk
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ wᵢ uᵢ²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.disk
            .mesh
            .points()
            .iter()
            .zip(&self.values)
            .map(|(p, u)| p.weight * u * u)
            .sum()
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.disk.n_theta + j]
    }

    /// Bilinear interpolation in `(r, θ)`, periodic in θ. `None` outside the
    /// band of radii spanned by cell centers.
    pub fn interpolate(&self, z: Complex64) -> Option<f64> {
        let d = &self.disk;
        let x = z.norm() / d.dr() - 0.5;
        if !(x >= 0.0 && x <= (d.n_r - 1) as f64) {
            return None;
        }
        let i0 = (x.floor() as usize).min(d.n_r.saturating_sub(2));
        let fx = x - i0 as f64;
        let i1 = (i0 + 1).min(d.n_r - 1);
        let y = z.arg().rem_euclid(TAU) / d.dtheta() - 0.5;
        let y = y.rem_euclid(d.n_theta as f64);
        let j0 = (y.floor() as usize) % d.n_theta;
        let fy = y - y.floor();
        let j1 = (j0 + 1) % d.n_theta;
        let lo = (1.0 - fy) * self.at(i0, j0) + fy * self.at(i0, j1);
        let hi = (1.0 - fy) * self.at(i1, j0) + fy * self.at(i1, j1);
        Some((1.0 - fx) * lo + fx * hi)
    }
}

/// `[[1 + |z|², z], [z̄, |z|²]]`.
pub fn raufi_matrix(z: Complex64) -> Result<PosDefMatrix<f64>> {
    let t = z.norm_sqr();
    let m = CMatrix::from_row_major(vec![
        Complex64::new(1.0 + t, 0.0),
        z,
        z.conj(),
        Complex64::new(t, 0.0),
    ])?;
    PosDefMatrix::new(HermitianMatrix::new(m)?)
}

/// Exact eigenvalues `(1 + 2t ∓ √(1 + 4t))/2`, `t = |z|²`, from the
/// characteristic polynomial. The smaller one is computed as `t²/λ₊` to avoid
/// cancellation near the origin.
pub fn raufi_eigenvalues(z: Complex64) -> (f64, f64) {
    let t = z.norm_sqr();
    let plus = 0.5 * (1.0 + 2.0 * t + (1.0 + 4.0 * t).sqrt());
    (t * t / plus, plus)
}

/// The rank-two example on a disk mesh; the reference metric is the identity.
pub fn raufi_section(disk: &DiskMesh) -> Result<SingularSection<f64>> {
    let disk = disk.with_rank(2, disk.mesh.points()[0].alpha)?;
    let values = pointwise(&disk.mesh, |k| raufi_matrix(disk.z(k)).map(Some))?;
    SingularSection::new(disk.mesh.clone(), values, [])
}

#[derive(Clone, Debug, Serialize)]
pub struct RaufiReport {
    pub n_r: usize,
    pub n_theta: usize,
    pub alpha: f64,
    pub log_det_integral: f64,
    pub log_det_target: f64,
    pub log_det_relative_deviation: f64,
    /// `∫ d_z(H, I)² dA` from the closed-form eigenvalues.
    pub distance_integral: f64,
    /// Same integral from the numerical relative spectrum.
    pub distance_integral_numeric: f64,
    /// Largest `|λ − |z|²|` over both eigenvalues and all points: how far
    /// the spectrum is from a double eigenvalue `|z|²`.
    pub double_eigenvalue_discrepancy: f64,
    pub integrability: IntegrabilityReport,
    pub boundedness: f64,
    pub boundedness_at_unit_circle: f64,
}

pub fn raufi_integrability(disk: &DiskMesh, alpha: f64) -> Result<RaufiReport> {
    let disk = disk.with_rank(2, alpha)?;
    let sigma = raufi_section(&disk)?;
    let h0 = MetricSection::identity(disk.mesh.clone());
    let integrability = integrability_report(&sigma, &h0)?;

    let mut log_det = 0.0;
    let mut dist = 0.0;
    let mut discrepancy: f64 = 0.0;
    for (k, p) in disk.mesh.points().iter().enumerate() {
        let z = disk.z(k);
        let (lo, hi) = raufi_eigenvalues(z);
        let (a, b) = (lo.ln(), hi.ln());
        let ld = a + b;
        log_det += p.weight * ld * ld;
        dist += p.weight * (a * a + b * b + alpha * ld * ld);
        let t = z.norm_sqr();
        discrepancy = discrepancy.max((lo - t).abs()).max((hi - t).abs());
    }
    let boundedness = boundedness_bound(&sigma, &h0)?;
    Ok(RaufiReport {
        n_r: disk.n_r,
        n_theta: disk.n_theta,
        alpha,
        log_det_integral: log_det,
        log_det_target: RAUFI_LOG_DET_TARGET,
        log_det_relative_deviation: (log_det - RAUFI_LOG_DET_TARGET).abs() / RAUFI_LOG_DET_TARGET,
        distance_integral: dist,
        distance_integral_numeric: integrability.distance_to_reference.powi(2),
        double_eigenvalue_discrepancy: discrepancy,
        integrability,
        boundedness,
        boundedness_at_unit_circle: raufi_eigenvalues(Complex64::new(1.0, 0.0)).1,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LineBundleReport {
    pub n_r: usize,
    pub n_theta: usize,
    pub alpha: f64,
    /// `Σ wᵢ φᵢ²` for `φ = log |z|²`.
    pub phi_l2_sq: f64,
    pub target: f64,
    pub relative_deviation: f64,
    /// `d(e^φ, 1)² = (1 + α) ‖φ‖₂²`, from the section distance.
    pub distance_sq: f64,
    pub integrability: IntegrabilityReport,
}

/// The weight `log |z|²`, as a scalar field on the disk mesh.
pub fn line_bundle_weight(disk: &DiskMesh) -> Result<GridFunction> {
    GridFunction::from_fn(disk.clone(), |z| z.norm_sqr().ln())
}

pub fn line_bundle_example(disk: &DiskMesh, alpha: f64) -> Result<LineBundleReport> {
    let disk = disk.with_rank(1, alpha)?;
    let phi = line_bundle_weight(&disk)?;
    let h0 = MetricSection::identity(disk.mesh.clone());
    let values = pointwise(&disk.mesh, |k| {
        PosDefMatrix::from_diagonal(&[phi.values[k].exp()])
    })?;
    let h = MetricSection::new(disk.mesh.clone(), values)?;
    let distance = crate::section::section_distance(&h, &h0)?;
    let integrability = integrability_report(&SingularSection::from_metric(&h), &h0)?;
    let l2 = phi.l2_norm_sq();
    Ok(LineBundleReport {
        n_r: disk.n_r,
        n_theta: disk.n_theta,
        alpha,
        phi_l2_sq: l2,
        target: LINE_BUNDLE_TARGET,
        relative_deviation: (l2 - LINE_BUNDLE_TARGET).abs() / LINE_BUNDLE_TARGET,
        distance_sq: distance * distance,
        integrability,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PshReport {
    pub radii: Vec<f64>,
    pub circles_tested: usize,
    pub circles_skipped: usize,
    /// Largest `u(z₀) − mean_{|w − z₀| = ρ} u(w)`; negative means strict
    /// sub-mean-value everywhere.
    pub max_violation: f64,
    pub worst_center: Option<[f64; 2]>,
    pub worst_radius: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Default test centers: eight angles on each of the rings |z| = 0.3, 0.5, 0.7.
pub fn default_psh_centers() -> Vec<Complex64> {
    let mut out = Vec::new();
    for r in [0.3, 0.5, 0.7] {
        for k in 0..8 {
            out.push(Complex64::from_polar(r, (k as f64 + 0.25) * TAU / 8.0));
        }
    }
    out
}

/// Discrete sub-mean-value test. Circle means use [`PSH_CIRCLE_SAMPLES`]
/// equally spaced angles and bilinear interpolation; circles that leave the
/// interpolation band are skipped and counted.
pub fn psh_check(u: &GridFunction, radii: &[f64], centers: &[Complex64]) -> Result<PshReport> {
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    let (mut tested, mut skipped) = (0, 0);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = None;
    for &c in centers {
        let Some(center) = u.interpolate(c) else {
            skipped += radii.len();
            continue;
        };
        for &rho in radii {
            let mut sum = 0.0;
            let mut inside = true;
            for k in 0..PSH_CIRCLE_SAMPLES {
                let w = c + Complex64::from_polar(rho, k as f64 * TAU / PSH_CIRCLE_SAMPLES as f64);
                match u.interpolate(w) {
                    Some(v) => sum += v,
                    None => {
                        inside = false;
                        break;
                    }
                }
            }
            if !inside {
                skipped += 1;
                continue;
            }
            tested += 1;
            let violation = center - sum / PSH_CIRCLE_SAMPLES as f64;
            if violation > worst {
                worst = violation;
                worst_at = Some((c, rho));
            }
        }
    }
    let max_violation = if tested > 0 { worst } else { 0.0 };
    Ok(PshReport {
        radii: radii.to_vec(),
        circles_tested: tested,
        circles_skipped: skipped,
        max_violation,
        worst_center: worst_at.map(|(c, _)| [c.re, c.im]),
        worst_radius: worst_at.map(|(_, r)| r),
        tolerance: PSH_TOLERANCE,
        pass: tested > 0 && max_violation <= PSH_TOLERANCE,
    })
}

/// Pointwise `(H⁻¹)ᵀ`, the local matrix of the dual metric.
pub fn dual_section(sigma: &SingularSection<f64>) -> Result<SingularSection<f64>> {
    sigma.map_values(dual_matrix)
}

pub fn dual_matrix(h: &PosDefMatrix<f64>) -> Result<PosDefMatrix<f64>> {
    PosDefMatrix::new(HermitianMatrix::new(h.inverse().matrix().transpose())?)
}

/// `max λ_max` of the relative spectrum of `(h0, σ)` over the support.
pub fn boundedness_bound(sigma: &SingularSection<f64>, h0: &MetricSection<f64>) -> Result<f64> {
    sigma.mesh().check_same(h0.mesh())?;
    sigma.check_measure()?;
    let local = pointwise(sigma.mesh(), |i| match sigma.supported(i) {
        Some(s) => relative_spectrum(h0.value(i), s).map(|l| l[l.len() - 1]),
        None => Ok(f64::NEG_INFINITY),
    })?;
    Ok(local.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests;
