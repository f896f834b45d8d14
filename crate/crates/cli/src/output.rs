use hermetric::holomorphic::DiskMesh;
use hermetric::section::MetricSection;
use num_complex::Complex64;

/// `x` rounded to 12 significant digits, printed in shortest form.
pub fn significant(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    rounded.to_string()
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String, csv::Error> {
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Columns `t, point_id`, then `re_ij, im_ij` for every entry in row-major
/// order.
pub fn geodesic_csv(samples: &[(f64, MetricSection<f64>)]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let Some((_, first)) = samples.first() else {
        return into_string(w);
    };
    let r = first.mesh().rank();
    let mut header = vec!["t".to_string(), "point_id".to_string()];
    for i in 0..r {
        for j in 0..r {
            header.push(format!("re_{i}{j}"));
            header.push(format!("im_{i}{j}"));
        }
    }
    w.write_record(&header)?;
    for (t, section) in samples {
        for (p, h) in section.mesh().points().iter().zip(section.values()) {
            let mut row = vec![t.to_string(), p.id.to_string()];
            let m = h.matrix();
            for i in 0..r {
                for j in 0..r {
                    row.push(m[(i, j)].re.to_string());
                    row.push(m[(i, j)].im.to_string());
                }
            }
            w.write_record(&row)?;
        }
    }
    into_string(w)
}

/// One row per radial cell: `r, lambda_min, lambda_max, log_det`, evaluated
/// on the positive real axis.
pub fn radial_profile_csv(
    disk: &DiskMesh,
    eigenvalues: impl Fn(Complex64) -> (f64, f64),
) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["r", "lambda_min", "lambda_max", "log_det"])?;
    for i in 0..disk.n_r() {
        let r = disk.radius(i);
        let (lo, hi) = eigenvalues(Complex64::new(r, 0.0));
        let log_det = if disk.mesh().rank() == 1 {
            lo.ln()
        } else {
            lo.ln() + hi.ln()
        };
        w.write_record([r, lo, hi, log_det].map(|x| x.to_string()))?;
    }
    into_string(w)
}
