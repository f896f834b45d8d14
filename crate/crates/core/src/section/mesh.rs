use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::fiber::AlphaParam;
use crate::linalg::MAX_RANK;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshPoint<T> {
    pub id: u64,
    pub weight: T,
    pub alpha: T,
}

/// Finite weighted point set standing in for a base manifold with its volume
/// form and a (possibly varying) α.
///
/// Points are kept sorted by id. Two meshes are interchangeable exactly when
/// their content hashes agree.
#[derive(Clone, Debug)]
pub struct QuadratureMesh<T> {
    rank: usize,
    points: Vec<MeshPoint<T>>,
    hash: u64,
}

impl<T: Real> QuadratureMesh<T> {
    pub fn new(rank: usize, mut points: Vec<MeshPoint<T>>) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::Rank(rank));
        }
        if points.is_empty() {
            return Err(Error::InvalidMesh("mesh has no points".into()));
        }
        points.sort_by_key(|p| p.id);
        for w in points.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::InvalidMesh(format!(
                    "duplicate point id {}",
                    w[0].id
                )));
            }
        }
        for p in &points {
            if !(p.weight.is_finite() && p.weight > T::zero()) {
                return Err(Error::InvalidMesh(format!(
                    "point {} has non-positive weight {}",
                    p.id, p.weight
                )));
            }
            AlphaParam::new(p.alpha, rank).map_err(|e| e.at(p.id))?;
        }
        let hash = content_hash(rank, &points);
        Ok(Self { rank, points, hash })
    }

    /// `n` points with ids `0..n`, equal weights summing to `volume`, constant α.
    pub fn uniform(rank: usize, n: usize, volume: T, alpha: T) -> Result<Self> {
        let w = volume / T::lit(n as f64);
        let points = (0..n as u64)
            .map(|id| MeshPoint {
                id,
                weight: w,
                alpha,
            })
            .collect();
        Self::new(rank, points)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[MeshPoint<T>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &MeshPoint<T> {
        &self.points[i]
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.points.iter().map(|p| p.id)
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.points.binary_search_by_key(&id, |p| p.id).ok()
    }

    pub fn content_hash(&self) -> u64 {
        self.hash
    }

    pub fn volume(&self) -> T {
        self.points.iter().map(|p| p.weight).sum()
    }

    pub fn alpha_at(&self, i: usize) -> AlphaParam<T> {
        AlphaParam::new(self.points[i].alpha, self.rank).expect("validated at construction")
    }

    /// The common α, or [`Error::NonConstantAlpha`] when points disagree.
    pub fn constant_alpha(&self) -> Result<AlphaParam<T>> {
        let first = self.points[0].alpha;
        let (mut lo, mut hi) = (first, first);
        for p in &self.points {
            lo = lo.min(p.alpha);
            hi = hi.max(p.alpha);
        }
        if lo != hi {
            return Err(Error::NonConstantAlpha {
                min: lo.as_f64(),
                max: hi.as_f64(),
            });
        }
        Ok(self.alpha_at(0))
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.hash != other.hash {
            return Err(Error::MeshMismatch {
                left: self.hash,
                right: other.hash,
            });
        }
        Ok(())
    }
}

impl<T: Real> PartialEq for QuadratureMesh<T> {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash && self.rank == other.rank && self.points == other.points
    }
}

fn content_hash<T: Real>(rank: usize, points: &[MeshPoint<T>]) -> u64 {
    let mut s = DefaultHasher::new();
    rank.hash(&mut s);
    for p in points {
        p.id.hash(&mut s);
        p.weight.as_f64().to_bits().hash(&mut s);
        p.alpha.as_f64().to_bits().hash(&mut s);
    }
    s.finish()
}
