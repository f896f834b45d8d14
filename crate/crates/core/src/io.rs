//! JSON file formats for sections, gauge transforms and refinement manifests.
//!
//! A section file looks like
//!
//! ```json
//! {"rank": 2, "points": [{"id": 0, "weight": 1.0, "alpha": 0.0,
//!   "h": {"re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}}]}
//! ```
//!
//! Tangent sections use the key `"v"` and gauge transforms `"phi"` in place
//! of `"h"`. A singular section may carry `"h": null` together with
//! `"nullset": true`. Floats are written in shortest round-trip form, so
//! parse → serialize → parse is lossless.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::completion::SingularSection;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix, PosDefMatrix};
use crate::section::{GaugeTransform, MeshPoint, MetricSection, QuadratureMesh, TangentSection};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix<f64>) -> Self {
        Self {
            re: m.real_parts(),
            im: m.imag_parts(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix<f64>> {
        if self.im.is_empty() {
            let zeros: Vec<Vec<f64>> = self.re.iter().map(|r| vec![0.0; r.len()]).collect();
            return CMatrix::from_parts(&self.re, &zeros);
        }
        CMatrix::from_parts(&self.re, &self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub id: u64,
    pub weight: f64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub nullset: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionJson {
    pub rank: usize,
    pub points: Vec<PointJson>,
}

impl SectionJson {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Points sorted by id, matching the mesh order.
    fn sorted(&self) -> Vec<&PointJson> {
        let mut pts: Vec<&PointJson> = self.points.iter().collect();
        pts.sort_by_key(|p| p.id);
        pts
    }

    pub fn mesh(&self) -> Result<Arc<QuadratureMesh<f64>>> {
        let points = self
            .points
            .iter()
            .map(|p| MeshPoint {
                id: p.id,
                weight: p.weight,
                alpha: p.alpha,
            })
            .collect();
        Ok(Arc::new(QuadratureMesh::new(self.rank, points)?))
    }

    fn matrices<'a>(
        &'a self,
        key: &str,
        pick: impl Fn(&'a PointJson) -> Option<&'a MatrixJson>,
    ) -> Result<Vec<(u64, &'a MatrixJson)>> {
        self.sorted()
            .into_iter()
            .map(|p| {
                pick(p)
                    .map(|m| (p.id, m))
                    .ok_or_else(|| Error::Parse(format!("missing \"{key}\"")).at(p.id))
            })
            .collect()
    }

    pub fn metric_section(&self) -> Result<MetricSection<f64>> {
        let mesh = self.mesh()?;
        let values = self
            .matrices("h", |p| p.h.as_ref())?
            .into_iter()
            .map(|(id, m)| posdef(m).map_err(|e| e.at(id)))
            .collect::<Result<_>>()?;
        MetricSection::new(mesh, values)
    }

    pub fn tangent_section(&self) -> Result<TangentSection<f64>> {
        let mesh = self.mesh()?;
        let values = self
            .matrices("v", |p| p.v.as_ref())?
            .into_iter()
            .map(|(id, m)| hermitian(m).map_err(|e| e.at(id)))
            .collect::<Result<_>>()?;
        TangentSection::new(mesh, values)
    }

    pub fn gauge_transform(&self) -> Result<GaugeTransform<f64>> {
        let mesh = self.mesh()?;
        let values = self
            .matrices("phi", |p| p.phi.as_ref())?
            .into_iter()
            .map(|(id, m)| m.to_matrix().map_err(|e| e.at(id)))
            .collect::<Result<_>>()?;
        GaugeTransform::new(mesh, values)
    }

    pub fn singular_section(&self) -> Result<SingularSection<f64>> {
        let mesh = self.mesh()?;
        let mut values = Vec::with_capacity(self.points.len());
        let mut nullset = Vec::new();
        for p in self.sorted() {
            if p.nullset {
                nullset.push(p.id);
            }
            values.push(match &p.h {
                Some(m) => Some(posdef(m).map_err(|e| e.at(p.id))?),
                None => None,
            });
        }
        SingularSection::new(mesh, values, nullset)
    }

    fn skeleton(mesh: &QuadratureMesh<f64>) -> Self {
        Self {
            rank: mesh.rank(),
            points: mesh
                .points()
                .iter()
                .map(|p| PointJson {
                    id: p.id,
                    weight: p.weight,
                    alpha: p.alpha,
                    h: None,
                    v: None,
                    phi: None,
                    nullset: false,
                })
                .collect(),
        }
    }

    pub fn from_metric(h: &MetricSection<f64>) -> Self {
        let mut out = Self::skeleton(h.mesh());
        for (p, v) in out.points.iter_mut().zip(h.values()) {
            p.h = Some(MatrixJson::from_matrix(v.matrix()));
        }
        out
    }

    pub fn from_tangent(v: &TangentSection<f64>) -> Self {
        let mut out = Self::skeleton(v.mesh());
        for (p, x) in out.points.iter_mut().zip(v.values()) {
            p.v = Some(MatrixJson::from_matrix(x.matrix()));
        }
        out
    }

    pub fn from_gauge(phi: &GaugeTransform<f64>) -> Self {
        let mut out = Self::skeleton(phi.mesh());
        for (p, x) in out.points.iter_mut().zip(phi.values()) {
            p.phi = Some(MatrixJson::from_matrix(x));
        }
        out
    }

    pub fn from_singular(s: &SingularSection<f64>) -> Self {
        let mut out = Self::skeleton(s.mesh());
        for (i, (p, x)) in out.points.iter_mut().zip(s.values()).enumerate() {
            p.h = x.as_ref().map(|m| MatrixJson::from_matrix(m.matrix()));
            p.nullset = s.is_excluded(i);
        }
        out
    }
}

fn hermitian(m: &MatrixJson) -> Result<HermitianMatrix<f64>> {
    HermitianMatrix::new(m.to_matrix()?)
}

fn posdef(m: &MatrixJson) -> Result<PosDefMatrix<f64>> {
    PosDefMatrix::new(hermitian(m)?)
}

/// One entry of a refinement manifest: section and reference file paths,
/// relative to the manifest, with the level parameter (cell count or similar).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub level: f64,
    pub sigma: String,
    pub reference: String,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}
