use std::f64::consts::{E, SQRT_2};
use std::sync::Arc;

use super::*;
use crate::fiber::distance_oracle;
use crate::sampling::Sampler;

type Mesh = QuadratureMesh<f64>;

fn mesh(rank: usize, weights: &[f64], alpha: f64) -> Arc<Mesh> {
    let points = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| MeshPoint {
            id: i as u64,
            weight: w,
            alpha,
        })
        .collect();
    Arc::new(Mesh::new(rank, points).unwrap())
}

fn random_mesh(s: &mut Sampler, rank: usize, n: usize, alphas: &[f64]) -> Arc<Mesh> {
    let bound = -1.0 / rank as f64 + 1e-3;
    let points = (0..n as u64)
        .map(|id| MeshPoint {
            id: id * 3 + 1,
            weight: s.uniform(0.1, 2.0),
            alpha: s.pick(alphas).max(bound),
        })
        .collect();
    Arc::new(Mesh::new(rank, points).unwrap())
}

fn random_metric(s: &mut Sampler, m: &Arc<Mesh>, spread: f64) -> MetricSection<f64> {
    let values = (0..m.len()).map(|_| s.posdef(m.rank(), spread)).collect();
    MetricSection::new(m.clone(), values).unwrap()
}

fn random_tangent(s: &mut Sampler, m: &Arc<Mesh>) -> TangentSection<f64> {
    let values = (0..m.len()).map(|_| s.hermitian(m.rank(), 2.0)).collect();
    TangentSection::new(m.clone(), values).unwrap()
}

fn random_gauge(s: &mut Sampler, m: &Arc<Mesh>) -> GaugeTransform<f64> {
    let values = (0..m.len()).map(|_| s.gauge(m.rank())).collect();
    GaugeTransform::new(m.clone(), values).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn mesh_validation() {
    let p = |id, weight, alpha| MeshPoint { id, weight, alpha };
    assert!(Mesh::new(2, vec![]).is_err());
    assert!(Mesh::new(0, vec![p(0, 1.0, 0.0)]).is_err());
    assert!(Mesh::new(2, vec![p(0, 0.0, 0.0)]).is_err());
    assert!(Mesh::new(2, vec![p(0, 1.0, -0.5)]).is_err());
    assert!(Mesh::new(2, vec![p(0, 1.0, 0.0), p(0, 2.0, 0.0)]).is_err());

    let m = Mesh::new(2, vec![p(5, 1.0, 0.0), p(2, 3.0, 0.1)]).unwrap();
    assert_eq!(m.ids().collect::<Vec<_>>(), vec![2, 5]);
    assert_eq!(m.volume(), 4.0);
    assert_eq!(m.index_of(5), Some(1));
    assert!(matches!(
        m.constant_alpha(),
        Err(Error::NonConstantAlpha { .. })
    ));
}

#[test]
fn mesh_hash_identifies_content() {
    let a = mesh(2, &[1.0, 2.0], 0.0);
    let b = mesh(2, &[1.0, 2.0], 0.0);
    let c = mesh(2, &[1.0, 2.0 + 1e-15], 0.0);
    assert_eq!(a.content_hash(), b.content_hash());
    assert_ne!(a.content_hash(), c.content_hash());

    let h = MetricSection::identity(a.clone());
    let k = MetricSection::identity(c);
    assert!(matches!(
        section_distance(&h, &k),
        Err(Error::MeshMismatch { .. })
    ));
    // Structurally equal meshes built separately are interchangeable.
    assert_eq!(
        section_distance(&h, &MetricSection::identity(b)).unwrap(),
        0.0
    );
}

#[test]
fn construction_checks_rank_and_length() {
    let m = mesh(2, &[1.0, 1.0], 0.0);
    assert!(MetricSection::new(m.clone(), vec![PosDefMatrix::identity(2)]).is_err());
    let err = MetricSection::new(
        m.clone(),
        vec![PosDefMatrix::identity(2), PosDefMatrix::identity(3)],
    )
    .unwrap_err();
    assert!(matches!(err, Error::AtPoint { id: 1, .. }));
    assert!(ScalarField::new(m.clone(), vec![0.0, f64::NAN]).is_err());
    let singular = CMatrix::from_parts(
        &[vec![1.0, 1.0], vec![1.0, 1.0]],
        &[vec![0.0; 2], vec![0.0; 2]],
    )
    .unwrap();
    let err = GaugeTransform::new(m, vec![CMatrix::identity(2), singular]).unwrap_err();
    assert!(matches!(err, Error::AtPoint { id: 1, .. }));
}

#[test]
fn l2_inner_examples() {
    let m = mesh(2, &[1.0], 0.0);
    let h = MetricSection::identity(m.clone());
    let v = TangentSection::new(m.clone(), vec![HermitianMatrix::identity(2)]).unwrap();
    assert_eq!(l2_inner(&h, &v, &v).unwrap(), 2.0);
    assert_eq!(l2_inner(&h, &TangentSection::zeros(m), &v).unwrap(), 0.0);

    // Rank 1 at h = 1: each fiber inner product of v = 1 with itself is 1.
    let m = mesh(1, &[2.0, 3.0], 0.0);
    let h = MetricSection::identity(m.clone());
    let v = TangentSection::new(m, vec![HermitianMatrix::identity(1); 2]).unwrap();
    assert_eq!(l2_inner(&h, &v, &v).unwrap(), 5.0);
}

#[test]
fn l2_inner_symmetric_and_positive() {
    let mut s = Sampler::new(30);
    for _ in 0..30 {
        let m = random_mesh(&mut s, 3, 7, &[-0.3, 0.0, 1.0]);
        let h = random_metric(&mut s, &m, 1.0);
        let v = random_tangent(&mut s, &m);
        let w = random_tangent(&mut s, &m);
        let vw = l2_inner(&h, &v, &w).unwrap();
        assert!((vw - l2_inner(&h, &w, &v).unwrap()).abs() < 1e-12 * (1.0 + vw.abs()));
        assert!(l2_inner(&h, &v, &v).unwrap() > 0.0);
    }
}

#[test]
fn section_distance_examples() {
    let mut s = Sampler::new(31);
    let m = random_mesh(&mut s, 2, 5, &[0.0, 0.5]);
    let h = random_metric(&mut s, &m, 1.0);
    assert_eq!(section_distance(&h, &h).unwrap(), 0.0);

    // Rank 1, α = 0: fiber distance is |log(q/p)|.
    let m = mesh(1, &[1.0, 1.0], 0.0);
    let h1 = MetricSection::identity(m.clone());
    let h2 = MetricSection::new(
        m,
        vec![
            PosDefMatrix::from_diagonal(&[3f64.exp()]).unwrap(),
            PosDefMatrix::from_diagonal(&[(-4f64).exp()]).unwrap(),
        ],
    )
    .unwrap();
    assert!((section_distance(&h1, &h2).unwrap() - 5.0).abs() < 1e-14);
    assert!((theta_metric(&h1, &h2).unwrap() - 7.0).abs() < 1e-14);
}

#[test]
fn section_distance_is_a_metric() {
    let mut s = Sampler::new(32);
    for _ in 0..500 {
        let n = 1 + s.index(6);
        let m = random_mesh(&mut s, 2, n, &[-0.4, 0.0, 1.0]);
        let a = random_metric(&mut s, &m, 2.0);
        let b = random_metric(&mut s, &m, 2.0);
        let c = random_metric(&mut s, &m, 2.0);
        let ab = section_distance(&a, &b).unwrap();
        let bc = section_distance(&b, &c).unwrap();
        let ac = section_distance(&a, &c).unwrap();
        assert!(ac <= ab + bc + 1e-10);
        assert!(rel(ab, section_distance(&b, &a).unwrap()) < 1e-10);
    }
}

#[test]
fn section_distance_agrees_with_pointwise_oracle() {
    let mut s = Sampler::new(33);
    let m = random_mesh(&mut s, 2, 3, &[0.0, 1.0]);
    let a = random_metric(&mut s, &m, 1.0);
    let b = random_metric(&mut s, &m, 1.0);
    let mut sq = 0.0;
    for i in 0..m.len() {
        let d = distance_oracle(a.value(i), b.value(i), &m.alpha_at(i), 32, 300, i as u64).unwrap();
        sq += m.point(i).weight * d * d;
    }
    let closed = section_distance(&a, &b).unwrap();
    let oracle = sq.sqrt();
    assert!(
        oracle >= closed - 1e-6 && oracle <= closed * 1.01,
        "{oracle} vs {closed}"
    );
}

#[test]
fn section_geodesic_examples() {
    let mut s = Sampler::new(34);
    let m = random_mesh(&mut s, 3, 4, &[0.0]);
    let a = random_metric(&mut s, &m, 2.0);
    let b = random_metric(&mut s, &m, 2.0);
    let g = SectionGeodesic::connecting(&a, &b).unwrap();
    let at0 = g.eval(0.0).unwrap();
    let at1 = g.eval(1.0).unwrap();
    for i in 0..m.len() {
        assert_eq!(at0.value(i).matrix(), a.value(i).matrix());
        let gap = (at1.value(i).matrix() - b.value(i).matrix()).frobenius_norm();
        assert!(gap <= 1e-8 * b.value(i).matrix().frobenius_norm());
    }

    let m = mesh(2, &[1.0, 0.5], 0.0);
    let id = MetricSection::identity(m.clone());
    let e2 =
        MetricSection::constant(m, &PosDefMatrix::from_diagonal(&[E * E, E * E]).unwrap()).unwrap();
    let mid = section_geodesic(&id, &e2, 0.5).unwrap();
    for v in mid.values() {
        let gap =
            (v.matrix() - PosDefMatrix::from_diagonal(&[E, E]).unwrap().matrix()).frobenius_norm();
        assert!(gap < 1e-14);
    }
}

#[test]
fn section_geodesic_is_affine() {
    let mut s = Sampler::new(35);
    for _ in 0..30 {
        let m = random_mesh(&mut s, 2, 5, &[0.0, 0.7]);
        let a = random_metric(&mut s, &m, 1.5);
        let b = random_metric(&mut s, &m, 1.5);
        let g = SectionGeodesic::connecting(&a, &b).unwrap();
        let d = section_distance(&a, &b).unwrap();
        let (t0, t1) = (s.uniform(-0.5, 1.5), s.uniform(-0.5, 1.5));
        let seg = section_distance(&g.eval(t0).unwrap(), &g.eval(t1).unwrap()).unwrap();
        assert!(rel(seg, (t1 - t0).abs() * d) < 1e-9);
    }
}

#[test]
fn geodesic_errors_carry_point_id() {
    let m = mesh(2, &[1.0, 1.0], 0.0);
    let a = MetricSection::identity(m.clone());
    let b = MetricSection::new(
        m,
        vec![
            PosDefMatrix::identity(2),
            PosDefMatrix::from_diagonal(&[1.0, 1e-16]).unwrap(),
        ],
    )
    .unwrap();
    let err = SectionGeodesic::connecting(&a, &b).unwrap_err();
    assert!(matches!(err, Error::AtPoint { id: 1, .. }), "{err}");
}

#[test]
fn conformal_distance_examples() {
    let m = mesh(2, &[1.0], 0.0);
    let h = MetricSection::identity(m.clone());
    let f = ScalarField::new(m.clone(), vec![2.0]).unwrap();
    let z = ScalarField::new(m.clone(), vec![0.0]).unwrap();
    assert_eq!(conformal_distance(&h, &f, &f).unwrap(), 0.0);
    let d = conformal_distance(&h, &f, &z).unwrap();
    assert!((d - 2.0 * SQRT_2).abs() < 1e-15);
    let direct = section_distance(&h.conformal(&f).unwrap(), &h.conformal(&z).unwrap()).unwrap();
    assert!((direct - 2.0 * SQRT_2).abs() < 1e-14);

    let mut s = Sampler::new(36);
    let m = random_mesh(&mut s, 1, 9, &[0.0]);
    let h = random_metric(&mut s, &m, 1.0);
    let f = ScalarField::from_fn(m.clone(), |_| s.uniform(-3.0, 3.0)).unwrap();
    let g = ScalarField::from_fn(m.clone(), |p| p.weight.sin()).unwrap();
    let d = conformal_distance(&h, &f, &g).unwrap();
    assert!(rel(d, f.sub(&g).unwrap().l2_norm()) < 1e-15);
}

#[test]
fn conformal_distance_matches_section_distance() {
    let mut s = Sampler::new(37);
    for _ in 0..50 {
        let r = 1 + s.index(3);
        let alpha = *s.pick(&[-0.9 / r as f64, 0.0, 0.5, 3.0]);
        let n = 1 + s.index(8);
        let m = random_mesh(&mut s, r, n, &[alpha]);
        let h = random_metric(&mut s, &m, 1.5);
        let f = ScalarField::from_fn(m.clone(), |_| s.uniform(-4.0, 4.0)).unwrap();
        let g = ScalarField::from_fn(m.clone(), |_| s.uniform(-4.0, 4.0)).unwrap();
        let formula = conformal_distance(&h, &f, &g).unwrap();
        let direct =
            section_distance(&h.conformal(&f).unwrap(), &h.conformal(&g).unwrap()).unwrap();
        assert!(rel(direct, formula) < 1e-10, "{direct} vs {formula}");
    }
}

#[test]
fn conformal_distance_requires_constant_alpha() {
    let mut s = Sampler::new(38);
    let m = random_mesh(&mut s, 2, 6, &[0.0, 1.0]);
    let h = random_metric(&mut s, &m, 1.0);
    let f = ScalarField::from_fn(m.clone(), |_| 1.0).unwrap();
    if m.constant_alpha().is_err() {
        assert!(matches!(
            conformal_distance(&h, &f, &f),
            Err(Error::NonConstantAlpha { .. })
        ));
    }
}

#[test]
fn gauge_examples() {
    let mut s = Sampler::new(39);
    let m = random_mesh(&mut s, 2, 4, &[0.0]);
    let h = random_metric(&mut s, &m, 1.0);

    let id = GaugeTransform::new(m.clone(), vec![CMatrix::identity(2); 4]).unwrap();
    let same = gauge_apply(&id, &h).unwrap();
    for i in 0..4 {
        assert!((same.value(i).matrix() - h.value(i).matrix()).frobenius_norm() < 1e-15);
    }

    let c = num_complex::Complex::new(1.0, -2.0);
    let scaled =
        GaugeTransform::new(m.clone(), vec![CMatrix::identity(2).scale_complex(c); 4]).unwrap();
    let out = gauge_apply(&scaled, &h).unwrap();
    for i in 0..4 {
        let want = h.value(i).matrix().scale(5.0);
        assert!((out.value(i).matrix() - &want).frobenius_norm() < 1e-13);
    }

    // A unitary built from a Hermitian generator.
    let gen = s.hermitian::<f64>(2, 3.0);
    let eig = crate::linalg::eig_hermitian(&gen).unwrap();
    let u = eig.eigenvectors().clone();
    let unitary = GaugeTransform::new(m.clone(), vec![u; 4]).unwrap();
    let out = gauge_apply(&unitary, &MetricSection::identity(m)).unwrap();
    for v in out.values() {
        assert!((v.matrix() - &CMatrix::identity(2)).frobenius_norm() < 1e-14);
    }
}

#[test]
fn gauge_invariance() {
    let mut s = Sampler::new(40);
    for _ in 0..100 {
        let r = 2 + s.index(2);
        let m = random_mesh(&mut s, r, 4, &[-0.3, 0.0, 1.0]);
        let h = random_metric(&mut s, &m, 1.0);
        let k = random_metric(&mut s, &m, 1.0);
        let v = random_tangent(&mut s, &m);
        let w = random_tangent(&mut s, &m);
        let phi = random_gauge(&mut s, &m);

        let before = l2_inner(&h, &v, &w).unwrap();
        let after = l2_inner(
            &gauge_apply(&phi, &h).unwrap(),
            &gauge_apply_tangent(&phi, &v).unwrap(),
            &gauge_apply_tangent(&phi, &w).unwrap(),
        )
        .unwrap();
        assert!((after - before).abs() <= 1e-10 * (1.0 + before.abs()));

        let d = section_distance(&h, &k).unwrap();
        let dg = section_distance(
            &gauge_apply(&phi, &h).unwrap(),
            &gauge_apply(&phi, &k).unwrap(),
        )
        .unwrap();
        assert!(rel(dg, d) < 1e-9);
    }
}

#[test]
fn theta_lower_bound() {
    let mut s = Sampler::new(41);
    for _ in 0..100 {
        let n = 1 + s.index(50);
        let m = random_mesh(&mut s, 2, n, &[0.0, 0.5]);
        let a = random_metric(&mut s, &m, 2.0);
        let b = random_metric(&mut s, &m, 2.0);
        let d = section_distance(&a, &b).unwrap();
        let theta = theta_metric(&a, &b).unwrap();
        assert!(d >= theta / m.volume().sqrt() - 1e-10);
    }
    let m = mesh(2, &[1.0], 0.3);
    let a = random_metric(&mut s, &m, 1.0);
    let b = random_metric(&mut s, &m, 1.0);
    let fiber = fiber_distance(a.value(0), b.value(0), &m.alpha_at(0)).unwrap();
    assert_eq!(theta_metric(&a, &b).unwrap(), fiber);
}

#[test]
fn flat_examples() {
    let m = mesh(2, &[1.0], 0.0);
    let h0 = MetricSection::identity(m.clone());
    let h1 = MetricSection::constant(
        m.clone(),
        &PosDefMatrix::from_diagonal(&[2.0, 2.0]).unwrap(),
    )
    .unwrap();
    assert_eq!(flat_distance(&h0, &h1, &h1).unwrap(), 0.0);
    let d = flat_distance(&h0, &h1, &h0).unwrap();
    assert!((d - SQRT_2).abs() < 1e-15);

    // Straight segment h0 + t(h1 − h0): summed flat lengths of pieces equal
    // the flat distance.
    let mut s = Sampler::new(42);
    let m = random_mesh(&mut s, 2, 3, &[0.0, 1.0]);
    let base = random_metric(&mut s, &m, 1.0);
    let a = random_metric(&mut s, &m, 1.0);
    let b = random_metric(&mut s, &m, 1.0);
    let total = flat_distance(&base, &a, &b).unwrap();
    let step = b.difference(&a).unwrap();
    let piece = l2_inner(&base, &step, &step).unwrap().sqrt() / 10.0;
    assert!(rel(10.0 * piece, total) < 1e-12);
}
