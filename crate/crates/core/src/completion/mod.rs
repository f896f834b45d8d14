//! Singular metrics, L² integrability, Cauchy sequences in the completion, and
//! CAT(0) comparison checks.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{relative_spectrum, PosDefMatrix};
use crate::section::{
    conformal_distance, pointwise, section_distance, MetricSection, QuadratureMesh, ScalarField,
    SectionGeodesic,
};
use crate::Real;

/// A norm sequence whose fitted growth exponent reaches this value is treated
/// as diverging under refinement.
pub const REFINEMENT_GROWTH_LIMIT: f64 = 0.05;

/// Vertices closer than this are reported as a degenerate triangle.
pub const DEGENERATE_TRIANGLE: f64 = 1e-12;

/// A metric that may be degenerate on a declared null set.
///
/// Null-set points are excluded from every integral, whatever their value.
/// A degenerate value outside the null set is a measure inconsistency and is
/// rejected by the operations that integrate.
#[derive(Clone, Debug)]
pub struct SingularSection<T> {
    mesh: Arc<QuadratureMesh<T>>,
    values: Vec<Option<PosDefMatrix<T>>>,
    excluded: Vec<bool>,
}

impl<T: Real> SingularSection<T> {
    pub fn new(
        mesh: Arc<QuadratureMesh<T>>,
        values: Vec<Option<PosDefMatrix<T>>>,
        nullset: impl IntoIterator<Item = u64>,
    ) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a mesh of {} points",
                values.len(),
                mesh.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = v {
                if v.dim() != mesh.rank() {
                    return Err(Error::Dimension {
                        expected: mesh.rank(),
                        found: v.dim(),
                    }
                    .at(mesh.point(i).id));
                }
            }
        }
        let mut excluded = vec![false; mesh.len()];
        for id in nullset {
            let i = mesh.index_of(id).ok_or_else(|| {
                Error::InvalidArgument(format!("null-set id {id} is not a mesh point"))
            })?;
            excluded[i] = true;
        }
        Ok(Self {
            mesh,
            values,
            excluded,
        })
    }

    pub fn from_metric(h: &MetricSection<T>) -> Self {
        Self {
            mesh: h.mesh().clone(),
            values: h.values().iter().cloned().map(Some).collect(),
            excluded: vec![false; h.mesh().len()],
        }
    }

    pub fn mesh(&self) -> &Arc<QuadratureMesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[Option<PosDefMatrix<T>>] {
        &self.values
    }

    pub fn is_excluded(&self, i: usize) -> bool {
        self.excluded[i]
    }

    pub fn nullset(&self) -> impl Iterator<Item = u64> + '_ {
        self.mesh
            .points()
            .iter()
            .zip(&self.excluded)
            .filter(|(_, &e)| e)
            .map(|(p, _)| p.id)
    }

    /// Errors on the first degenerate value that carries weight.
    pub fn check_measure(&self) -> Result<()> {
        for (i, v) in self.values.iter().enumerate() {
            if v.is_none() && !self.excluded[i] {
                return Err(Error::MeasureInconsistency {
                    id: self.mesh.point(i).id,
                });
            }
        }
        Ok(())
    }

    /// The value at `i` if it counts toward integrals.
    pub fn supported(&self, i: usize) -> Option<&PosDefMatrix<T>> {
        if self.excluded[i] {
            None
        } else {
            self.values[i].as_ref()
        }
    }

    /// Pointwise map over nondegenerate values; fails on any degenerate one.
    pub fn map_values(
        &self,
        f: impl Fn(&PosDefMatrix<T>) -> Result<PosDefMatrix<T>> + Sync + Send,
    ) -> Result<Self> {
        let values = pointwise(&self.mesh, |i| match &self.values[i] {
            Some(v) => f(v).map(Some),
            None => Err(Error::InvalidArgument("degenerate value".into())),
        })?;
        Ok(Self {
            mesh: self.mesh.clone(),
            values,
            excluded: self.excluded.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    pub l2_log_lambda_min: f64,
    pub l2_log_lambda_max: f64,
    pub l2_log_det: f64,
    /// `(Σ wᵢ dᵢ(h0ᵢ, σᵢ)²)^{1/2}`, the L² distance to the reference.
    pub distance_to_reference: f64,
    pub is_l2: bool,
    pub refinement_trend: Option<f64>,
}

struct LocalLogs<T> {
    min: T,
    max: T,
    det: T,
    dist_sq: T,
}

/// Quadrature L² norms of `log λ_min`, `log λ_max` and `log det` of the
/// relative spectrum of `(h0, σ)`, summed over the positive-weight support.
pub fn integrability_report<T: Real>(
    sigma: &SingularSection<T>,
    h0: &MetricSection<T>,
) -> Result<IntegrabilityReport> {
    sigma.mesh.check_same(h0.mesh())?;
    sigma.check_measure()?;
    let mesh = &sigma.mesh;
    let local = pointwise(mesh, |i| {
        let Some(s) = sigma.supported(i) else {
            return Ok(None);
        };
        let lambdas = relative_spectrum(h0.value(i), s)?;
        let logs: Vec<T> = lambdas.iter().map(|l| l.ln()).collect();
        let sum: T = logs.iter().copied().sum();
        let sq: T = logs.iter().map(|&x| x * x).sum();
        let alpha = mesh.alpha_at(i).value();
        Ok(Some(LocalLogs {
            min: logs[0],
            max: logs[logs.len() - 1],
            det: sum,
            dist_sq: (sq + alpha * sum * sum).max(T::zero()),
        }))
    })?;
    let (mut min, mut max, mut det, mut dist) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (p, l) in mesh.points().iter().zip(&local) {
        if let Some(l) = l {
            min += p.weight * l.min * l.min;
            max += p.weight * l.max * l.max;
            det += p.weight * l.det * l.det;
            dist += p.weight * l.dist_sq;
        }
    }
    let (min, max) = (min.sqrt().as_f64(), max.sqrt().as_f64());
    Ok(IntegrabilityReport {
        l2_log_lambda_min: min,
        l2_log_lambda_max: max,
        l2_log_det: det.sqrt().as_f64(),
        distance_to_reference: dist.sqrt().as_f64(),
        is_l2: min.is_finite() && max.is_finite(),
        refinement_trend: None,
    })
}

/// One member of a refinement family: a level parameter (cell count or
/// similar, increasing with resolution) with its section and reference.
#[derive(Clone, Debug)]
pub struct RefinementLevel<T> {
    pub level: f64,
    pub sigma: SingularSection<T>,
    pub reference: MetricSection<T>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementReport {
    pub levels: Vec<f64>,
    pub per_level: Vec<IntegrabilityReport>,
    /// The finest level's report, with the fitted trend filled in and `is_l2`
    /// cleared when the norms grow.
    pub finest: IntegrabilityReport,
    pub growth_limit: f64,
}

/// Runs [`integrability_report`] on every level and fits the growth exponent
/// of the extreme log-eigenvalue norms against the level parameter.
pub fn integrability_refinement<T: Real>(
    family: &[RefinementLevel<T>],
) -> Result<RefinementReport> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty refinement family".into()));
    }
    for w in family.windows(2) {
        if !(w[1].level > w[0].level) {
            return Err(Error::InvalidArgument(
                "refinement levels must increase".into(),
            ));
        }
    }
    let per_level: Vec<IntegrabilityReport> = family
        .par_iter()
        .map(|l| integrability_report(&l.sigma, &l.reference))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let levels: Vec<f64> = family.iter().map(|l| l.level).collect();
    let trend_min = growth_exponent(&levels, per_level.iter().map(|r| r.l2_log_lambda_min));
    let trend_max = growth_exponent(&levels, per_level.iter().map(|r| r.l2_log_lambda_max));
    let trend = trend_min.max(trend_max);
    let mut finest = per_level[per_level.len() - 1].clone();
    finest.refinement_trend = Some(trend);
    finest.is_l2 = finest.is_l2 && trend < REFINEMENT_GROWTH_LIMIT;
    Ok(RefinementReport {
        levels,
        per_level,
        finest,
        growth_limit: REFINEMENT_GROWTH_LIMIT,
    })
}

/// Least-squares slope of `ln norm` against `ln level`, over the levels with a
/// positive norm. Zero when fewer than two such levels exist.
pub fn growth_exponent(levels: &[f64], norms: impl Iterator<Item = f64>) -> f64 {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .zip(norms)
        .filter(|(_, n)| *n > 0.0)
        .map(|(&l, n)| (l.ln(), n.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    sxy / sxx
}

#[derive(Clone, Debug, Serialize)]
pub struct CauchyReport {
    /// `d(h_k, h_{k+1})`.
    pub step_distances: Vec<f64>,
    /// Running sums of `step_distances`.
    pub partial_sums: Vec<f64>,
    /// `d(h_k, h_∞)` from the section distance.
    pub limit_distances: Vec<f64>,
    /// `√(r(1+αr)) ‖f_k − f_∞‖₂`.
    pub formula_distances: Vec<f64>,
    /// Largest relative gap between the two previous columns.
    pub max_formula_gap: f64,
    /// Smallest `d(h_k,h_{k+1}) + d(h_{k+1},h_∞) − d(h_k,h_∞)`.
    pub min_triangle_slack: f64,
}

/// Follows `h_k = e^{f_k} h0` toward `e^{f_∞} h0` and tabulates the distances
/// that witness convergence in the completion.
pub fn cauchy_experiment<T: Real>(
    h0: &MetricSection<T>,
    f_sequence: &[ScalarField<T>],
    f_limit: &ScalarField<T>,
) -> Result<CauchyReport> {
    h0.mesh().constant_alpha()?;
    if f_sequence.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let limit = h0.conformal(f_limit)?;
    let hs: Vec<MetricSection<T>> = f_sequence
        .iter()
        .map(|f| h0.conformal(f))
        .collect::<Result<_>>()?;

    let mut step_distances = Vec::with_capacity(hs.len().saturating_sub(1));
    for w in hs.windows(2) {
        step_distances.push(section_distance(&w[0], &w[1])?.as_f64());
    }
    let partial_sums = step_distances
        .iter()
        .scan(0.0, |acc, d| {
            *acc += d;
            Some(*acc)
        })
        .collect();
    let limit_distances: Vec<f64> = hs
        .iter()
        .map(|h| section_distance(h, &limit).map(|d| d.as_f64()))
        .collect::<Result<_>>()?;
    let formula_distances: Vec<f64> = f_sequence
        .iter()
        .map(|f| conformal_distance(h0, f, f_limit).map(|d| d.as_f64()))
        .collect::<Result<_>>()?;
    let max_formula_gap = limit_distances
        .iter()
        .zip(&formula_distances)
        .map(|(&a, &b)| if b > 0.0 { (a - b).abs() / b } else { a.abs() })
        .fold(0.0, f64::max);
    let min_triangle_slack = (0..step_distances.len())
        .map(|k| step_distances[k] + limit_distances[k + 1] - limit_distances[k])
        .fold(f64::INFINITY, f64::min);
    Ok(CauchyReport {
        step_distances,
        partial_sums,
        limit_distances,
        formula_distances,
        max_formula_gap,
        min_triangle_slack: if min_triangle_slack.is_finite() {
            min_triangle_slack
        } else {
            0.0
        },
    })
}

/// `max(f, −level)`: the standard truncation of a profile unbounded below.
pub fn truncate_below<T: Real>(f: &ScalarField<T>, level: T) -> Result<ScalarField<T>> {
    f.map(|x| x.max(-level))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cat0Report {
    pub d_pq: f64,
    pub d_pr: f64,
    pub d_qr: f64,
    /// `½d(p,q)² + ½d(p,r)² − ¼d(q,r)² − d(p,m)²` for the midpoint `m` of `[q,r]`.
    pub cn_slack: f64,
    /// Planar comparison distance between the images of `γ_pq(s)` and `γ_pr(t)`.
    pub comparison_distance: f64,
    pub actual_distance: f64,
    /// `comparison_distance − actual_distance`.
    pub comparison_slack: f64,
    pub degenerate: bool,
}

/// CN inequality and two-parameter comparison for the triangle `(p, q, r)`.
/// Both slacks are nonnegative in a CAT(0) space.
pub fn cat0_check<T: Real>(
    p: &MetricSection<T>,
    q: &MetricSection<T>,
    r: &MetricSection<T>,
    s: T,
    t: T,
) -> Result<Cat0Report> {
    let unit = |x: T| x >= T::zero() && x <= T::one();
    if !(unit(s) && unit(t)) {
        return Err(Error::InvalidArgument("s and t must lie in [0, 1]".into()));
    }
    let d_pq = section_distance(p, q)?.as_f64();
    let d_pr = section_distance(p, r)?.as_f64();
    let d_qr = section_distance(q, r)?.as_f64();
    let m = SectionGeodesic::connecting(q, r)?.eval(T::lit(0.5))?;
    let d_pm = section_distance(p, &m)?.as_f64();
    let cn_slack = 0.5 * d_pq * d_pq + 0.5 * d_pr * d_pr - 0.25 * d_qr * d_qr - d_pm * d_pm;

    // Comparison triangle with p̄ at the origin and q̄ on the positive axis.
    let cos = if d_pq > 0.0 && d_pr > 0.0 {
        ((d_pq * d_pq + d_pr * d_pr - d_qr * d_qr) / (2.0 * d_pq * d_pr)).clamp(-1.0, 1.0)
    } else {
        1.0
    };
    let sin = (1.0 - cos * cos).max(0.0).sqrt();
    let (s, t) = (s.as_f64(), t.as_f64());
    let dx = s * d_pq - t * d_pr * cos;
    let dy = t * d_pr * sin;
    let comparison_distance = dx.hypot(dy);

    let a = SectionGeodesic::connecting(p, q)?.eval(T::lit(s))?;
    let b = SectionGeodesic::connecting(p, r)?.eval(T::lit(t))?;
    let actual_distance = section_distance(&a, &b)?.as_f64();

    let degenerate = d_pq.min(d_pr).min(d_qr) < DEGENERATE_TRIANGLE;
    Ok(Cat0Report {
        d_pq,
        d_pr,
        d_qr,
        cn_slack,
        comparison_distance,
        actual_distance,
        comparison_slack: comparison_distance - actual_distance,
        degenerate,
    })
}
