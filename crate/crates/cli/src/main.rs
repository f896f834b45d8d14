use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use hermetric::checks::{run_suite, Suite};
use hermetric::completion::{
    cauchy_experiment, integrability_refinement, integrability_report, truncate_below,
    RefinementLevel,
};
use hermetric::fiber::sectional_curvature;
use hermetric::holomorphic::{
    default_psh_centers, line_bundle_example, line_bundle_weight, psh_check, raufi_eigenvalues,
    raufi_integrability, DiskMesh, GridFunction, LineBundleReport, PshReport, RaufiReport,
};
use hermetric::io::{parse_manifest, SectionJson};
use hermetric::section::{section_distance, MetricSection, ScalarField, SectionGeodesic};

mod output;

use output::{geodesic_csv, significant};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] hermetric::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: hermetric::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "hermetric",
    version,
    about = "Geometry of Hermitian metrics over quadrature meshes"
)]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Example {
    Raufi,
    LineBundle,
}

#[derive(Subcommand)]
enum Command {
    /// L² distance between two metric sections on the same mesh.
    Distance {
        h1: PathBuf,
        h2: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Sample the section geodesic from H1 to H2 at `steps` equally spaced times.
    Geodesic {
        h1: PathBuf,
        h2: PathBuf,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Pointwise sectional curvature of the plane spanned by two tangent sections.
    Curvature { h: PathBuf, u: PathBuf, v: PathBuf },
    /// Run a seeded property suite: invariants, cat0, oracle or appendix.
    Check {
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Tolerance override, `name=value`; may be repeated.
        #[arg(long = "tol", value_parser = parse_tol)]
        tol: Vec<(String, f64)>,
    },
    /// Build a disk example and report its integrability.
    Example {
        #[arg(value_enum)]
        name: Example,
        #[arg(long, default_value_t = 400)]
        nr: usize,
        #[arg(long, default_value_t = 64)]
        ntheta: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Integrability of a singular section against a reference, or of a
    /// refinement family given by a manifest.
    Integrability {
        sigma: Option<PathBuf>,
        reference: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Cauchy sequences of conformal metrics on the disk converging to the
    /// unbounded weight log|z|².
    CompletionDemo {
        #[arg(long, default_value_t = 200)]
        nr: usize,
        #[arg(long, default_value_t = 32)]
        ntheta: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        /// Number of sequence members.
        #[arg(long, default_value_t = 12)]
        steps: usize,
    },
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v: f64 = v.parse().map_err(|e| format!("{v:?}: {e}"))?;
    Ok((k.to_string(), v))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load<T>(path: &Path, f: impl FnOnce(&SectionJson) -> hermetric::Result<T>) -> Result<T> {
    let text = read(path)?;
    SectionJson::parse(&text)
        .and_then(|s| f(&s))
        .map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })
}

fn metric(path: &Path) -> Result<MetricSection<f64>> {
    load(path, SectionJson::metric_section)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct DistanceReport {
    distance: f64,
    points: usize,
    volume: f64,
}

#[derive(Serialize)]
struct CurvaturePoint {
    id: u64,
    sectional: f64,
    orthonormalized: bool,
    gram_defect: f64,
}

#[derive(Serialize)]
struct ExampleReport<R> {
    example: &'static str,
    report: R,
    psh: PshReport,
}

#[derive(Serialize)]
struct CompletionDemo {
    truncation_levels: Vec<f64>,
    truncation: hermetric::completion::CauchyReport,
    geometric: hermetric::completion::CauchyReport,
    geometric_expected_total: f64,
}

/// Returns `(output, success)`.
fn run(cli: &Cli) -> Result<(String, bool)> {
    match &cli.command {
        Command::Distance { h1, h2, format } => {
            let (a, b) = (metric(h1)?, metric(h2)?);
            let d = section_distance(&a, &b)?;
            Ok(match format {
                Format::Json => (
                    json(&DistanceReport {
                        distance: d,
                        points: a.mesh().len(),
                        volume: a.mesh().volume(),
                    }),
                    true,
                ),
                _ => (format!("{}\n", significant(d)), true),
            })
        }
        Command::Geodesic {
            h1,
            h2,
            steps,
            format,
        } => {
            if *steps < 2 {
                return Err(CliError::Usage("--steps must be at least 2".into()));
            }
            let (a, b) = (metric(h1)?, metric(h2)?);
            let g = SectionGeodesic::connecting(&a, &b)?;
            let times: Vec<f64> = (0..*steps)
                .map(|k| k as f64 / (*steps - 1) as f64)
                .collect();
            let samples = times
                .iter()
                .map(|&t| g.eval(t).map(|s| (t, s)))
                .collect::<hermetric::Result<Vec<_>>>()?;
            match format {
                Format::Csv => Ok((geodesic_csv(&samples)?, true)),
                Format::Json => {
                    let sections: Vec<_> = samples
                        .iter()
                        .map(|(t, s)| serde_json::json!({"t": t, "section": SectionJson::from_metric(s)}))
                        .collect();
                    Ok((json(&sections), true))
                }
                Format::Text => Err(CliError::Usage("geodesic supports csv or json".into())),
            }
        }
        Command::Curvature { h, u, v } => {
            let h = metric(h)?;
            let u = load(u, SectionJson::tangent_section)?;
            let v = load(v, SectionJson::tangent_section)?;
            let mesh = h.mesh();
            for other in [u.mesh(), v.mesh()] {
                if other.content_hash() != mesh.content_hash() {
                    return Err(hermetric::Error::MeshMismatch {
                        left: mesh.content_hash(),
                        right: other.content_hash(),
                    }
                    .into());
                }
            }
            let mut out = Vec::with_capacity(mesh.len());
            for i in 0..mesh.len() {
                let id = mesh.point(i).id;
                let k = sectional_curvature(h.value(i), u.value(i), v.value(i), &mesh.alpha_at(i))
                    .map_err(|e| hermetric::Error::AtPoint {
                        id,
                        source: Box::new(e),
                    })?;
                out.push(CurvaturePoint {
                    id,
                    sectional: k.value,
                    orthonormalized: k.orthonormalized,
                    gram_defect: k.gram_defect,
                });
            }
            Ok((json(&out), true))
        }
        Command::Check {
            suite,
            seed,
            samples,
            tol,
        } => {
            let suite: Suite = suite.parse().map_err(|_| {
                CliError::Usage(format!(
                    "unknown suite {suite:?}; expected one of invariants, cat0, oracle, appendix"
                ))
            })?;
            let overrides: BTreeMap<String, f64> = tol.iter().cloned().collect();
            let rep = run_suite(suite, *seed, *samples, &overrides)?;
            Ok((json(&rep), rep.pass))
        }
        Command::Example {
            name,
            nr,
            ntheta,
            alpha,
            format,
        } => example(*name, *nr, *ntheta, *alpha, *format),
        Command::Integrability {
            sigma,
            reference,
            manifest,
        } => {
            if let Some(m) = manifest {
                let entries = parse_manifest(&read(m)?).map_err(|source| CliError::Input {
                    path: m.clone(),
                    source,
                })?;
                let base = m.parent().unwrap_or(Path::new("."));
                let family = entries
                    .iter()
                    .map(|e| {
                        Ok(RefinementLevel {
                            level: e.level,
                            sigma: load(&base.join(&e.sigma), SectionJson::singular_section)?,
                            reference: metric(&base.join(&e.reference))?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let rep = integrability_refinement(&family)?;
                return Ok((json(&rep), rep.finest.is_l2));
            }
            let (Some(sigma), Some(reference)) = (sigma, reference) else {
                return Err(CliError::Usage(
                    "integrability needs SIGMA and REFERENCE files, or --manifest".into(),
                ));
            };
            let s = load(sigma, SectionJson::singular_section)?;
            let h0 = metric(reference)?;
            let rep = integrability_report(&s, &h0)?;
            Ok((json(&rep), rep.is_l2))
        }
        Command::CompletionDemo {
            nr,
            ntheta,
            alpha,
            steps,
        } => completion_demo(*nr, *ntheta, *alpha, *steps),
    }
}

fn example(
    name: Example,
    nr: usize,
    ntheta: usize,
    alpha: f64,
    format: Format,
) -> Result<(String, bool)> {
    let radii = [0.05, 0.1, 0.2];
    let centers = default_psh_centers();
    match name {
        Example::Raufi => {
            let disk = DiskMesh::new(nr, ntheta, 2, alpha)?;
            if format == Format::Csv {
                return Ok((output::radial_profile_csv(&disk, raufi_eigenvalues)?, true));
            }
            let report: RaufiReport = raufi_integrability(&disk, alpha)?;
            let log_det =
                GridFunction::from_fn(disk.with_rank(1, 0.0)?, |z| 2.0 * z.norm_sqr().ln())?;
            let psh = psh_check(&log_det, &radii, &centers)?;
            let ok = report.integrability.is_l2;
            Ok((
                json(&ExampleReport {
                    example: "raufi",
                    report,
                    psh,
                }),
                ok,
            ))
        }
        Example::LineBundle => {
            let disk = DiskMesh::new(nr, ntheta, 1, alpha)?;
            if format == Format::Csv {
                return Ok((
                    output::radial_profile_csv(&disk, |z| {
                        let t = z.norm_sqr();
                        (t, t)
                    })?,
                    true,
                ));
            }
            let report: LineBundleReport = line_bundle_example(&disk, alpha)?;
            let psh = psh_check(&line_bundle_weight(&disk)?, &radii, &centers)?;
            let ok = report.integrability.is_l2;
            Ok((
                json(&ExampleReport {
                    example: "line-bundle",
                    report,
                    psh,
                }),
                ok,
            ))
        }
    }
}

fn completion_demo(nr: usize, ntheta: usize, alpha: f64, steps: usize) -> Result<(String, bool)> {
    if steps < 2 {
        return Err(CliError::Usage("--steps must be at least 2".into()));
    }
    let disk = DiskMesh::new(nr, ntheta, 1, alpha)?;
    let mesh = disk.mesh().clone();
    let h0 = MetricSection::identity(mesh.clone());
    let weight = line_bundle_weight(&disk)?;
    let f = ScalarField::new(mesh.clone(), weight.values().to_vec())?;

    let levels: Vec<f64> = (0..steps).map(|k| k as f64).collect();
    let seq = levels
        .iter()
        .map(|&l| truncate_below(&f, l))
        .collect::<hermetric::Result<Vec<_>>>()?;
    let truncation = cauchy_experiment(&h0, &seq, &f)?;

    let unit = 1.0 / mesh.volume().sqrt();
    let geo_seq = (0..steps)
        .map(|k| f.map(|x| x + 0.5f64.powi(k as i32) * unit))
        .collect::<hermetric::Result<Vec<_>>>()?;
    let geometric = cauchy_experiment(&h0, &geo_seq, &f)?;
    let expected = (1.0 + alpha).sqrt() * (1.0 - 0.5f64.powi(steps as i32 - 1));
    let ok = truncation.max_formula_gap < 1e-10;
    Ok((
        json(&CompletionDemo {
            truncation_levels: levels,
            truncation,
            geometric,
            geometric_expected_total: expected,
        }),
        ok,
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, ok)) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, &text).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                }),
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    }),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
