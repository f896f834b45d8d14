use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::*;
use crate::completion::integrability_report;

fn disk(n_r: usize, n_theta: usize) -> DiskMesh {
    DiskMesh::new(n_r, n_theta, 2, 0.0).unwrap()
}

#[test]
fn disk_mesh_volume_and_layout() {
    let d = disk(400, 64);
    assert!((d.mesh().volume() - PI).abs() < 1e-12);
    assert_eq!(d.mesh().len(), 400 * 64);
    let z = d.z(64 + 3);
    assert!((z.norm() - 1.5 / 400.0).abs() < 1e-15);
    assert!((z.arg() - 3.5 * TAU / 64.0).abs() < 1e-14);
    assert!(DiskMesh::new(0, 8, 1, 0.0).is_err());
    assert!(DiskMesh::new(4, 8, 2, -0.6).is_err());
}

#[test]
fn raufi_matrix_examples() {
    let z = Complex64::from_polar(0.5, 0.3);
    let h = raufi_matrix(z).unwrap();
    assert!((h.det() - 1.0 / 16.0).abs() < 1e-15);
    assert!((h.as_hermitian().trace() - 1.5).abs() < 1e-15);
    let (lo, hi) = raufi_eigenvalues(z);
    assert!((lo * hi - 1.0 / 16.0).abs() < 1e-15);
    let eig = h.eigen().eigenvalues();
    assert!((eig[0] - lo).abs() < 1e-14 && (eig[1] - hi).abs() < 1e-14);
}

#[test]
fn raufi_eigenvalue_product_everywhere() {
    let d = disk(40, 16);
    let sigma = raufi_section(&d).unwrap();
    for (k, v) in sigma.values().iter().enumerate() {
        let t = d.z(k).norm_sqr();
        let e = v.as_ref().unwrap().eigen().eigenvalues();
        assert!((e[0] * e[1] - t * t).abs() < 1e-12);
        let (lo, hi) = raufi_eigenvalues(d.z(k));
        assert!((lo * hi - t * t).abs() < 1e-12 * (1.0 + t * t));
    }
}

/// Midpoint rule in r for the exact angular integral of (2 log r²)² = (4 ln r)².
fn radial_oracle(n_r: usize) -> f64 {
    let dr = 1.0 / n_r as f64;
    (0..n_r)
        .map(|i| {
            let r = (i as f64 + 0.5) * dr;
            TAU * r * dr * (4.0 * r.ln()).powi(2)
        })
        .sum()
}

#[test]
fn raufi_log_det_integral() {
    let rep = raufi_integrability(&disk(400, 64), 0.0).unwrap();
    assert!(rep.log_det_relative_deviation < 0.02);
    assert!((rep.log_det_integral - radial_oracle(400)).abs() < 1e-9 * rep.log_det_integral);
    assert!(rep.integrability.is_l2);
    // log det of the relative spectrum is the same quantity.
    assert!((rep.integrability.l2_log_det.powi(2) - rep.log_det_integral).abs() < 1e-6);
    assert!(rep.double_eigenvalue_discrepancy > 0.5);
    let rel = (rep.distance_integral_numeric - rep.distance_integral).abs() / rep.distance_integral;
    assert!(rel < 1e-6, "{rel}");
}

#[test]
fn raufi_refinement_converges_monotonically() {
    let devs: Vec<f64> = [50, 100, 200, 400, 800]
        .iter()
        .map(|&n| {
            let v = radial_oracle(n);
            (v - RAUFI_LOG_DET_TARGET).abs()
        })
        .collect();
    for w in devs.windows(2) {
        assert!(w[1] < w[0]);
    }
    let a = raufi_integrability(&disk(200, 32), 0.0).unwrap();
    let b = raufi_integrability(&disk(400, 32), 0.0).unwrap();
    assert!(b.log_det_relative_deviation < a.log_det_relative_deviation);
    // The midpoint values approach 8π from above.
    assert!(b.log_det_integral > RAUFI_LOG_DET_TARGET);
    assert!(b.log_det_integral < a.log_det_integral);
}

#[test]
fn raufi_distance_integral_depends_on_alpha() {
    let d = disk(100, 16);
    let a0 = raufi_integrability(&d, 0.0).unwrap();
    let a1 = raufi_integrability(&d, 1.0).unwrap();
    // The α term is α ∫(log det)².
    let gap = a1.distance_integral - a0.distance_integral;
    assert!((gap - a0.log_det_integral).abs() < 1e-9 * gap);
}

#[test]
fn line_bundle_norm() {
    let rep = line_bundle_example(&DiskMesh::new(400, 64, 1, 0.0).unwrap(), 0.0).unwrap();
    assert!(rep.relative_deviation < 0.02);
    assert!((rep.distance_sq - rep.phi_l2_sq).abs() < 1e-9 * rep.phi_l2_sq);
    let rep = line_bundle_example(&DiskMesh::new(100, 16, 1, 0.0).unwrap(), 0.5).unwrap();
    assert!((rep.distance_sq - 1.5 * rep.phi_l2_sq).abs() < 1e-9 * rep.phi_l2_sq);
}

#[test]
fn interpolation_reproduces_grid_and_bilinear_data() {
    let d = disk(20, 16);
    let u = GridFunction::from_fn(d.clone(), |z| z.norm() + 2.0).unwrap();
    for k in [0, 17, 100, 319] {
        let got = u.interpolate(d.z(k)).unwrap();
        assert!((got - u.values()[k]).abs() < 1e-12);
    }
    // Linear in r: exact anywhere in the band.
    let w = Complex64::from_polar(0.4321, 1.0);
    assert!((u.interpolate(w).unwrap() - 2.4321).abs() < 1e-12);
    assert!(u.interpolate(Complex64::new(0.999, 0.0)).is_none());
    assert!(u.interpolate(Complex64::new(0.001, 0.0)).is_none());
}

#[test]
fn psh_examples() {
    let d = disk(400, 64);
    let radii = [0.05, 0.1, 0.2];
    let centers = default_psh_centers();

    let sub = GridFunction::from_fn(d.clone(), |z| z.norm_sqr()).unwrap();
    let rep = psh_check(&sub, &radii, &centers).unwrap();
    assert!(rep.pass);
    assert_eq!(rep.circles_tested, 72);
    // mean over a circle of |w|² is |z₀|² + ρ²
    assert!((rep.max_violation + 0.05f64.powi(2)).abs() < 1e-4);

    let sup = GridFunction::from_fn(d.clone(), |z| -z.norm_sqr()).unwrap();
    let rep = psh_check(&sup, &radii, &centers).unwrap();
    assert!(!rep.pass);
    assert!(rep.max_violation > 0.0);

    let log_det = GridFunction::from_fn(d.clone(), |z| 2.0 * z.norm_sqr().ln()).unwrap();
    let rep = psh_check(&log_det, &radii, &centers).unwrap();
    assert!(rep.pass, "{}", rep.max_violation);
}

#[test]
fn psh_skips_circles_leaving_the_mesh() {
    let d = disk(100, 32);
    let u = GridFunction::from_fn(d, |z| z.norm_sqr()).unwrap();
    // One circle crosses the rim, the other passes within 0.001 of the origin.
    let rep = psh_check(
        &u,
        &[0.499],
        &[Complex64::new(0.7, 0.0), Complex64::new(0.5, 0.0)],
    )
    .unwrap();
    assert_eq!(rep.circles_skipped, 2);
    assert_eq!(rep.circles_tested, 0);
    assert!(!rep.pass);
    assert!(psh_check(&u, &[-1.0], &[]).is_err());
}

#[test]
fn dual_examples() {
    let h = PosDefMatrix::from_diagonal(&[2.0, 5.0]).unwrap();
    let dual = dual_matrix(&h).unwrap();
    let want = PosDefMatrix::from_diagonal(&[0.5, 0.2]).unwrap();
    assert!((dual.matrix() - want.matrix()).frobenius_norm() < 1e-15);
    let id = dual_matrix(&PosDefMatrix::identity(3)).unwrap();
    assert!((id.matrix() - PosDefMatrix::identity(3).matrix()).frobenius_norm() < 1e-15);
}

#[test]
fn dual_spectrum_is_reciprocal_and_involutive() {
    let d = disk(20, 8);
    let sigma = raufi_section(&d).unwrap();
    let mut s = crate::sampling::Sampler::new(60);
    let h0v: Vec<_> = (0..d.mesh().len())
        .map(|_| s.posdef::<f64>(2, 1.0))
        .collect();
    let h0 = MetricSection::new(d.mesh().clone(), h0v).unwrap();
    let h0_dual_vals: Vec<_> = h0
        .values()
        .iter()
        .map(|h| dual_matrix(h).unwrap())
        .collect();
    let h0_dual = MetricSection::new(d.mesh().clone(), h0_dual_vals).unwrap();
    let dual = dual_section(&sigma).unwrap();
    let back = dual_section(&dual).unwrap();
    for i in 0..d.mesh().len() {
        let orig = relative_spectrum(h0.value(i), sigma.values()[i].as_ref().unwrap()).unwrap();
        let du = relative_spectrum(h0_dual.value(i), dual.values()[i].as_ref().unwrap()).unwrap();
        for (a, b) in orig.iter().rev().zip(&du) {
            assert!((1.0 / a - b).abs() < 1e-10 * b.max(1.0), "{a} {b}");
        }
        let (x, y) = (
            back.values()[i].as_ref().unwrap(),
            sigma.values()[i].as_ref().unwrap(),
        );
        assert!(
            (x.matrix() - y.matrix()).frobenius_norm()
                < 1e-12 * y.matrix().frobenius_norm().max(1.0) / y.eigen().min()
        );
    }
    let rep = integrability_report(&dual, &MetricSection::identity(d.mesh().clone())).unwrap();
    assert!(rep.is_l2);

    let degenerate = SingularSection::new(
        d.mesh().clone(),
        vec![None; d.mesh().len()],
        d.mesh().ids().collect::<Vec<_>>(),
    )
    .unwrap();
    assert!(dual_section(&degenerate).is_err());
}

#[test]
fn boundedness_examples() {
    let d = disk(50, 16);
    let h0 = MetricSection::identity(d.mesh().clone());
    let same = SingularSection::from_metric(&h0);
    assert!((boundedness_bound(&same, &h0).unwrap() - 1.0).abs() < 1e-15);
    let twice = h0
        .values()
        .iter()
        .map(|h| Some(h.scale(2.0).unwrap()))
        .collect();
    let twice = SingularSection::new(d.mesh().clone(), twice, []).unwrap();
    assert!((boundedness_bound(&twice, &h0).unwrap() - 2.0).abs() < 1e-15);

    let golden = (3.0 + 5f64.sqrt()) / 2.0;
    let rep = raufi_integrability(&disk(400, 64), 0.0).unwrap();
    assert!(rep.boundedness <= golden);
    assert!((rep.boundedness - golden).abs() < 0.01);
    assert!((rep.boundedness_at_unit_circle - golden).abs() < 1e-15);
}

#[test]
fn extreme_eigenvalue_norms_follow_from_log_det_and_bound() {
    // log λ_max ∈ [0, log C] and log λ_min = log det − log λ_max.
    let rep = raufi_integrability(&disk(200, 32), 0.0).unwrap();
    let c = rep.boundedness.ln();
    let vol = PI;
    let i = &rep.integrability;
    assert!(i.l2_log_lambda_max <= c * vol.sqrt() + 1e-12);
    assert!(i.l2_log_lambda_min <= i.l2_log_det + i.l2_log_lambda_max + 1e-12);
}
