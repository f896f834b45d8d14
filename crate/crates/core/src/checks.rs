//! Seeded property sweeps with self-describing reports.
//!
//! Each suite records, per property, the worst value seen over all samples
//! and the tolerance it was judged against. Tolerances can be overridden by
//! name; unknown names are rejected so a typo cannot silently loosen nothing.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::completion::cat0_check;
use crate::error::{Error, Result};
use crate::fiber::{
    alpha_inner, curvature_tensor, distance_oracle, exp_differential_min_singular, exp_map,
    fiber_distance, geodesic_residual, log_map, sectional_curvature, FiberGeodesic,
};
use crate::linalg::HermitianMatrix;
use crate::sampling::Sampler;
use crate::section::{
    conformal_distance, gauge_apply, gauge_apply_tangent, l2_inner, section_distance, theta_metric,
    SectionGeodesic,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Invariants,
    Cat0,
    Oracle,
    Appendix,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Invariants,
        Suite::Cat0,
        Suite::Oracle,
        Suite::Appendix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Invariants => "invariants",
            Suite::Cat0 => "cat0",
            Suite::Oracle => "oracle",
            Suite::Appendix => "appendix",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Every sample must be `≥ tolerance`.
    AtLeast,
    /// Every sample must be `≤ tolerance`.
    AtMost,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub bound: Bound,
    pub tolerance: f64,
    pub worst: f64,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub pass: bool,
    pub properties: Vec<PropertyReport>,
}

struct Tracker {
    props: Vec<PropertyReport>,
}

impl Tracker {
    fn new(defaults: &[(&str, Bound, f64)], overrides: &BTreeMap<String, f64>) -> Result<Self> {
        for key in overrides.keys() {
            if !defaults.iter().any(|d| d.0 == key) {
                return Err(Error::InvalidArgument(format!("unknown tolerance {key:?}")));
            }
        }
        let props = defaults
            .iter()
            .map(|&(name, bound, tol)| PropertyReport {
                name: name.to_string(),
                bound,
                tolerance: overrides.get(name).copied().unwrap_or(tol),
                worst: match bound {
                    Bound::AtLeast => f64::INFINITY,
                    Bound::AtMost => f64::NEG_INFINITY,
                },
                samples: 0,
                pass: true,
            })
            .collect();
        Ok(Self { props })
    }

    fn record(&mut self, name: &str, value: f64) {
        let p = self
            .props
            .iter_mut()
            .find(|p| p.name == name)
            .expect("property declared in the defaults table");
        p.samples += 1;
        p.worst = match p.bound {
            Bound::AtLeast if !(value >= p.worst) => value,
            Bound::AtMost if !(value <= p.worst) => value,
            _ => p.worst,
        };
    }

    fn finish(mut self, suite: Suite, seed: u64, samples: usize) -> SuiteReport {
        for p in &mut self.props {
            p.pass = p.samples > 0
                && match p.bound {
                    Bound::AtLeast => p.worst >= p.tolerance,
                    Bound::AtMost => p.worst <= p.tolerance,
                };
        }
        SuiteReport {
            suite: suite.name().to_string(),
            seed,
            samples,
            pass: self.props.iter().all(|p| p.pass),
            properties: self.props,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

pub fn default_tolerances(suite: Suite) -> Vec<(&'static str, Bound, f64)> {
    use Bound::*;
    match suite {
        Suite::Invariants => vec![
            ("positivity_bound", AtLeast, -1e-10),
            ("sectional_curvature", AtMost, 1e-12),
            ("commuting_curvature", AtMost, 1e-12),
            ("curvature_antisymmetry", AtMost, 1e-12),
            ("first_bianchi", AtMost, 1e-12),
            ("geodesic_residual", AtMost, 1e-6),
            ("exp_log_roundtrip", AtMost, 1e-8),
            ("gauge_inner", AtMost, 1e-9),
            ("gauge_distance", AtMost, 1e-9),
            ("geodesic_affinity", AtMost, 1e-9),
            ("conformal_identity", AtMost, 1e-10),
            ("theta_bound", AtLeast, -1e-10),
            ("triangle_inequality", AtLeast, -1e-10),
        ],
        Suite::Cat0 => vec![
            ("cn_slack", AtLeast, -1e-10),
            ("comparison_slack", AtLeast, -1e-10),
            ("flat_cn_slack", AtMost, 1e-9),
        ],
        Suite::Oracle => vec![
            ("relative_gap", AtMost, 1e-2),
            ("oracle_minus_closed", AtLeast, -1e-6),
        ],
        Suite::Appendix => vec![
            ("min_singular_value", AtLeast, 1e-3),
            ("identity_deviation", AtMost, 1e-6),
        ],
    }
}

pub fn run_suite(
    suite: Suite,
    seed: u64,
    samples: usize,
    overrides: &BTreeMap<String, f64>,
) -> Result<SuiteReport> {
    let mut t = Tracker::new(&default_tolerances(suite), overrides)?;
    let mut s = Sampler::new(seed);
    match suite {
        Suite::Invariants => invariants(&mut s, &mut t, samples)?,
        Suite::Cat0 => cat0(&mut s, &mut t, samples)?,
        Suite::Oracle => oracle(&mut s, &mut t, samples)?,
        Suite::Appendix => appendix(&mut s, &mut t, samples)?,
    }
    Ok(t.finish(suite, seed, samples))
}

fn invariants(s: &mut Sampler, t: &mut Tracker, samples: usize) -> Result<()> {
    for _ in 0..samples {
        let r = 1 + s.index(4);
        let h = s.posdef::<f64>(r, 2.0);
        let a = s.alpha::<f64>(r, &[-1.0, 0.0, 0.5, 2.0]);
        let v = s.hermitian::<f64>(r, 3.0);
        let tr = h.whiten(&v)?.trace();
        let bound = (1.0 / r as f64 + a.value()) * tr * tr;
        t.record("positivity_bound", alpha_inner(&h, &v, &v, &a)? - bound);

        let r = 2 + s.index(3);
        let h = s.posdef::<f64>(r, 1.5);
        let a = s.alpha::<f64>(r, &[0.0, 0.5]);
        let (u, w) = s.orthonormal_pair(&h, &a)?;
        t.record(
            "sectional_curvature",
            sectional_curvature(&h, &u, &w, &a)?.value,
        );
        let (u, w) = s.commuting_pair(&h)?;
        t.record(
            "commuting_curvature",
            sectional_curvature(&h, &u, &w, &a)?.value.abs(),
        );

        let (x, y, z) = (
            s.hermitian(r, 1.0),
            s.hermitian(r, 1.0),
            s.hermitian(r, 1.0),
        );
        let xyz = curvature_tensor(&h, &x, &y, &z)?;
        let yxz = curvature_tensor(&h, &y, &x, &z)?;
        t.record("curvature_antisymmetry", xyz.add(&yxz)?.frobenius_norm());
        let yzx = curvature_tensor(&h, &y, &z, &x)?;
        let zxy = curvature_tensor(&h, &z, &x, &y)?;
        t.record("first_bianchi", xyz.add(&yzx)?.add(&zxy)?.frobenius_norm());

        // Whitened speed near one keeps stencil truncation above roundoff.
        let speed = s.uniform(0.5, 1.0);
        let dir = s.hermitian_with_norm::<f64>(r, speed);
        let g = FiberGeodesic::new(h.clone(), h.unwhiten(&dir)?)?;
        t.record(
            "geodesic_residual",
            geodesic_residual(&g, s.uniform(-1.0, 1.0), 1e-3)?,
        );

        let vv = s.hermitian::<f64>(r, 10.0);
        let back = log_map(&h, &exp_map(&h, &vv)?)?;
        let err = back.sub(&vv)?.frobenius_norm() / vv.frobenius_norm().max(1.0);
        t.record("exp_log_roundtrip", err);

        let n = 1 + s.index(6);
        let m = s.mesh::<f64>(r, n, &[-0.3, 0.0, 1.0]);
        let (p, q) = (s.metric_section(&m, 1.5), s.metric_section(&m, 1.5));
        let (v1, v2) = (s.tangent_section(&m, 2.0), s.tangent_section(&m, 2.0));
        let phi = s.gauge_transform(&m);
        let before = l2_inner(&p, &v1, &v2)?;
        let after = l2_inner(
            &gauge_apply(&phi, &p)?,
            &gauge_apply_tangent(&phi, &v1)?,
            &gauge_apply_tangent(&phi, &v2)?,
        )?;
        t.record("gauge_inner", (after - before).abs() / (1.0 + before.abs()));
        let d = section_distance(&p, &q)?;
        let dg = section_distance(&gauge_apply(&phi, &p)?, &gauge_apply(&phi, &q)?)?;
        t.record("gauge_distance", rel(dg, d));

        let geo = SectionGeodesic::connecting(&p, &q)?;
        let (t0, t1) = (s.uniform(-0.5, 1.5), s.uniform(-0.5, 1.5));
        let seg = section_distance(&geo.eval(t0)?, &geo.eval(t1)?)?;
        t.record("geodesic_affinity", rel(seg, (t1 - t0).abs() * d));

        let theta = theta_metric(&p, &q)?;
        t.record("theta_bound", d - theta / m.volume().sqrt());
        let o = s.metric_section(&m, 1.5);
        let tri = section_distance(&p, &o)? + section_distance(&o, &q)? - d;
        t.record("triangle_inequality", tri);

        let alpha = *s.pick(&[0.0, 0.5, 2.0]);
        let cm = s.mesh::<f64>(r, n, &[alpha]);
        let h = s.metric_section(&cm, 1.5);
        let (f, g) = (s.scalar_field(&cm, 3.0), s.scalar_field(&cm, 3.0));
        let formula = conformal_distance(&h, &f, &g)?;
        let direct = section_distance(&h.conformal(&f)?, &h.conformal(&g)?)?;
        t.record("conformal_identity", rel(direct, formula));
    }
    Ok(())
}

fn cat0(s: &mut Sampler, t: &mut Tracker, samples: usize) -> Result<()> {
    for k in 0..samples {
        let r = 2 + k % 2;
        let alpha = if (k / 2) % 2 == 0 { 0.0 } else { 1.0 };
        let n = 1 + s.index(3);
        let m = s.mesh::<f64>(r, n, &[alpha]);
        let (p, q, c) = (
            s.metric_section(&m, 2.0),
            s.metric_section(&m, 2.0),
            s.metric_section(&m, 2.0),
        );
        let rep = cat0_check(&p, &q, &c, s.uniform(0.0, 1.0), s.uniform(0.0, 1.0))?;
        t.record("cn_slack", rep.cn_slack);
        t.record("comparison_slack", rep.comparison_slack);

        let (p, q, c) = (
            s.diagonal_section(&m, 2.0),
            s.diagonal_section(&m, 2.0),
            s.diagonal_section(&m, 2.0),
        );
        let rep = cat0_check(&p, &q, &c, s.uniform(0.0, 1.0), s.uniform(0.0, 1.0))?;
        t.record("flat_cn_slack", rep.cn_slack.abs());
    }
    Ok(())
}

fn oracle(s: &mut Sampler, t: &mut Tracker, samples: usize) -> Result<()> {
    for k in 0..samples {
        let alpha = [0.0, 1.0, -0.4][k % 3];
        let a = crate::fiber::AlphaParam::new(alpha, 2)?;
        let (p, q) = (s.posdef::<f64>(2, 1.5), s.posdef::<f64>(2, 1.5));
        let closed = fiber_distance(&p, &q, &a)?;
        let found = distance_oracle(&p, &q, &a, 64, 500, s.seed())?;
        t.record("relative_gap", rel(found, closed));
        t.record("oracle_minus_closed", found - closed);
    }
    Ok(())
}

fn appendix(s: &mut Sampler, t: &mut Tracker, samples: usize) -> Result<()> {
    for _ in 0..samples {
        let r = 2 + s.index(2);
        let h = s.posdef::<f64>(r, 1.0);
        let v = s.hermitian::<f64>(r, 3.0);
        t.record(
            "min_singular_value",
            exp_differential_min_singular(&h, &v, 1e-5)?,
        );
        let zero = exp_differential_min_singular(&h, &HermitianMatrix::zeros(r), 1e-5)?;
        t.record("identity_deviation", (zero - 1.0).abs());
    }
    Ok(())
}
