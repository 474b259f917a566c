//! Claim suites for the gallery examples: each samples chart points and
//! checks the stated curvature values, minimality and equality slacks.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::delta::{oracle_delta_dim3, DeltaOptions, DeltaTuple};
use crate::error::{Error, Result};
use crate::frame::scalar_tau;
use crate::gallery::{
    clifford_legendrian, exotic_s3_field, exotic_s3_lift, graph_immersion, horizontality, induced_data_flat,
    induced_data_horizontal, intrinsic_curvature_fd, ode93_integrate, ode93_order_check, omega_pullback,
    re_dot, theorem82_potential, theorem92_chart, theorem92_interval, theorem93_chart, ImmersionChart, OdeState93,
};
use crate::inequality::{evaluate, evaluate_detailed, EvalOptions, Variant};
use crate::lagrangian::{
    compatibility_report, gauss_curvature, intrinsic_curvature_at, mean_curvature, LagrangianPointData,
};
use crate::random::rng_for;
use crate::report::{fmt17, json_number};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `observed <= bound`.
    AtMost,
    /// `observed > bound`.
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    pub name: String,
    /// Worst value over the samples.
    pub observed: f64,
    pub bound: f64,
    pub kind: Bound,
    pub pass: bool,
}

impl Claim {
    fn at_most(name: &str, observed: f64, bound: f64) -> Self {
        Claim {
            name: name.into(),
            observed,
            bound,
            kind: Bound::AtMost,
            pass: observed <= bound,
        }
    }

    fn above(name: &str, observed: f64, bound: f64) -> Self {
        Claim {
            name: name.into(),
            observed,
            bound,
            kind: Bound::Above,
            pass: observed > bound,
        }
    }
}

/// Per-sample values for export.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub point: Vec<f64>,
    /// Real and imaginary parts interleaved; empty for intrinsic samples.
    pub ambient: Vec<f64>,
    pub tau: f64,
    pub h2: f64,
    pub slacks: Vec<(Variant, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub example: String,
    pub samples: usize,
    pub seed: u64,
    pub claims: Vec<Claim>,
    pub rows: Vec<SampleRow>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Claim> {
        self.claims.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct ClaimJson<'a> {
            name: &'a str,
            observed: Box<RawValue>,
            bound: Box<RawValue>,
            kind: Bound,
            pass: bool,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            example: &'a str,
            samples: usize,
            seed: u64,
            pass: bool,
            claims: Vec<ClaimJson<'a>>,
        }
        let out = Out {
            example: &self.example,
            samples: self.samples,
            seed: self.seed,
            pass: self.pass(),
            claims: self
                .claims
                .iter()
                .map(|c| ClaimJson {
                    name: &c.name,
                    observed: json_number(c.observed),
                    bound: json_number(c.bound),
                    kind: c.kind,
                    pass: c.pass,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&out).expect("verify report serializes")
    }

    /// Sample export: chart point, ambient point, τ, H² and one slack
    /// column per variant.
    pub fn rows_to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if let Some(first) = self.rows.first() {
            let mut head: Vec<String> = (1..=first.point.len()).map(|i| format!("x{i}")).collect();
            for i in 0..first.ambient.len() / 2 {
                head.push(format!("re{}", i + 1));
                head.push(format!("im{}", i + 1));
            }
            head.push("tau".into());
            head.push("h2".into());
            head.extend(first.slacks.iter().map(|(v, _)| format!("slack_{}", v.tag())));
            w.write_record(&head).expect("in-memory write");
            for r in &self.rows {
                let mut rec: Vec<String> = r.point.iter().map(|x| fmt17(*x)).collect();
                rec.extend(r.ambient.iter().map(|x| fmt17(*x)));
                rec.push(fmt17(r.tau));
                rec.push(fmt17(r.h2));
                rec.extend(r.slacks.iter().map(|(_, s)| fmt17(*s)));
                w.write_record(&rec).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub delta: DeltaOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 100,
            seed: 0,
            delta: DeltaOptions {
                restarts: 8,
                ..Default::default()
            },
        }
    }
}

fn eval_opts(o: &VerifyOptions) -> EvalOptions {
    EvalOptions {
        delta: o.delta.clone(),
        ..Default::default()
    }
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn min_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::INFINITY, f64::min)
}

fn flatten(v: &[num_complex::Complex64]) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Runs the suite for a gallery name.
pub fn verify_example(name: &str, opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let claims_rows = match name {
        "exotic-s3" => verify_exotic(opts)?,
        "graph-8.2" => verify_graph(opts)?,
        "thm-9.2" => verify_thm92(opts)?,
        "thm-9.3" => verify_thm93(opts)?,
        _ => return Err(Error::UnknownExample(name.into())),
    };
    Ok(VerifyReport {
        example: name.into(),
        samples: opts.samples,
        seed: opts.seed,
        claims: claims_rows.0,
        rows: claims_rows.1,
    })
}

type Suite = (Vec<Claim>, Vec<SampleRow>);

struct ExoticSample {
    tau_intrinsic: f64,
    tau_lift: f64,
    h2: f64,
    delta_vs_oracle: f64,
    delta_vs_two: f64,
    first_slack: f64,
    lift_horizontal: f64,
    row: SampleRow,
}

fn verify_exotic(opts: &VerifyOptions) -> Result<Suite> {
    let field = exotic_s3_field();
    let tuple = DeltaTuple::new(3, vec![2])?;
    let eo = eval_opts(opts);
    let points: Vec<Vec<f64>> = (0..opts.samples)
        .map(|i| {
            let mut rng = rng_for(opts.seed, i as u64);
            let v: Vec<f64> = (0..4).map(|_| crate::random::normal(&mut rng)).collect();
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / r).collect()
        })
        .collect();
    let per: Vec<ExoticSample> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| -> Result<ExoticSample> {
            let (geo, r) = intrinsic_curvature_at(&field, p)?;
            let data = LagrangianPointData::new(1.0, geo.cubic_form())?;
            let (rep, _) = evaluate_detailed(&data, Variant::First, &tuple, &eo)?;
            let oracle = oracle_delta_dim3(&gauss_curvature(&data))?;
            // the lift is charted by SU(2) around a random base point
            let mut rng = rng_for(opts.seed ^ 0x5eed, i as u64);
            let base = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
            let lift = exotic_s3_lift(base);
            let e = induced_data_horizontal(&lift, &[0.0; 3])?;
            let tau_lift = scalar_tau(&gauss_curvature(&e.data));
            let tau = scalar_tau(&r);
            Ok(ExoticSample {
                tau_intrinsic: (tau - 1.0 / 3.0).abs(),
                tau_lift: (tau_lift - 1.0 / 3.0).abs(),
                h2: rep.h2,
                delta_vs_oracle: (rep.delta - oracle).abs(),
                delta_vs_two: (rep.delta - 2.0).abs(),
                first_slack: rep.slack.abs(),
                lift_horizontal: horizontality(&lift, &[0.0; 3])?,
                row: SampleRow {
                    point: p.clone(),
                    ambient: Vec::new(),
                    tau,
                    h2: rep.h2,
                    slacks: vec![(Variant::First, rep.slack)],
                },
            })
        })
        .collect::<Result<_>>()?;
    let compat = compatibility_report(&field, 1.0, &points[..points.len().min(10)])?;
    let claims = vec![
        Claim::at_most("tau = 1/3 (intrinsic)", max_of(per.iter().map(|s| s.tau_intrinsic)), 1e-8),
        Claim::at_most("tau = 1/3 (horizontal lift)", max_of(per.iter().map(|s| s.tau_lift)), 1e-4),
        Claim::at_most("lift horizontality", max_of(per.iter().map(|s| s.lift_horizontal)), 1e-6),
        Claim::at_most("H^2 = 0", max_of(per.iter().map(|s| s.h2)), 1e-10),
        Claim::at_most("delta(2) vs dim-3 oracle", max_of(per.iter().map(|s| s.delta_vs_oracle)), 1e-6),
        Claim::at_most("delta(2) = 2", max_of(per.iter().map(|s| s.delta_vs_two)), 1e-6),
        Claim::at_most("FIRST equality slack", max_of(per.iter().map(|s| s.first_slack)), 1e-6),
        Claim::at_most("compatibility (symmetry, Codazzi, Gauss)", compat.max(), 1e-6),
    ];
    Ok((claims, per.into_iter().map(|s| s.row).collect()))
}

fn verify_graph(opts: &VerifyOptions) -> Result<Suite> {
    let tuple = DeltaTuple::new(5, vec![2])?;
    let potential = theorem82_potential(&tuple, 1.0).expect("N < n");
    let oracle = potential.third_derivatives();
    let chart = graph_immersion(potential);
    let eo = eval_opts(opts);
    let origin = [0.0; 5];
    let e0 = induced_data_flat(&chart, &origin)?;
    let r0 = evaluate(&e0.data, Variant::Improved, &tuple, &eo)?;
    let mut claims = vec![
        Claim::at_most("cubic coefficients vs third derivatives at 0", e0.data.h.max_abs_diff(&oracle), 1e-6),
        Claim::at_most("H^2(0) = 1.69", (r0.h2 - 1.69).abs(), 1e-6),
        Claim::above("H^2(0) > 0", r0.h2, 0.0),
        Claim::at_most("delta(2)(0) = 11.375", (r0.delta - 11.375).abs(), 1e-5),
        Claim::at_most("IMPROVED equality slack at 0", r0.slack.abs(), 1e-6),
    ];
    let mut rows = vec![SampleRow {
        point: origin.to_vec(),
        ambient: flatten(&chart.eval(&origin)?),
        tau: scalar_tau(&gauss_curvature(&e0.data)),
        h2: r0.h2,
        slacks: vec![(Variant::Improved, r0.slack)],
    }];
    // further samples: Lagrangian condition, Gauss-path consistency, soundness
    let extra: Vec<(f64, f64, f64, SampleRow)> = (1..opts.samples)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = rng_for(opts.seed, i as u64);
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let e = induced_data_flat(&chart, &x)?;
            let om = omega_pullback(&chart, &x)?;
            let fd = intrinsic_curvature_fd(&chart, &x, &e.frame, 1e-3)?;
            let r = gauss_curvature(&e.data);
            let rep = evaluate(&e.data, Variant::Improved, &tuple, &eo)?;
            let row = SampleRow {
                point: x.clone(),
                ambient: flatten(&chart.eval(&x)?),
                tau: scalar_tau(&r),
                h2: rep.h2,
                slacks: vec![(Variant::Improved, rep.slack)],
            };
            Ok((om, fd.max_abs_diff(&r), rep.slack / (1.0 + rep.rhs.abs()), row))
        })
        .collect::<Result<_>>()?;
    claims.push(Claim::at_most(
        "omega pullback",
        max_of(extra.iter().map(|s| s.0).chain([omega_pullback(&chart, &origin)?])),
        1e-8,
    ));
    if !extra.is_empty() {
        claims.push(Claim::at_most("Gauss-path consistency", max_of(extra.iter().map(|s| s.1)), 1e-4));
        claims.push(Claim::above("IMPROVED soundness (relative slack)", min_of(extra.iter().map(|s| s.2)), -1e-9));
    }
    rows.extend(extra.into_iter().map(|s| s.3));
    Ok((claims, rows))
}

fn verify_thm92(opts: &VerifyOptions) -> Result<Suite> {
    let n = 3;
    let b = 1.0;
    let chart = theorem92_chart(n, b, Arc::new(clifford_legendrian(n)?))?;
    let tuple = DeltaTuple::new(n, vec![n - 1])?;
    let (_, hi) = theorem92_interval(n, b);
    let eo = eval_opts(opts);
    let per: Vec<(f64, f64, f64, f64, SampleRow)> = (0..opts.samples)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = rng_for(opts.seed, i as u64);
            let x = vec![rng.gen_range(0.1 * hi..0.9 * hi), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
            let om = omega_pullback(&chart, &x)?;
            let e = induced_data_flat(&chart, &x)?;
            let rep = evaluate(&e.data, Variant::HyperplaneFlat, &tuple, &eo)?;
            let row = SampleRow {
                point: x.clone(),
                ambient: flatten(&chart.eval(&x)?),
                tau: scalar_tau(&gauss_curvature(&e.data)),
                h2: rep.h2,
                slacks: vec![(Variant::HyperplaneFlat, rep.slack)],
            };
            Ok((om, rep.h2, rep.slack.abs(), e.symmetry_defect, row))
        })
        .collect::<Result<_>>()?;
    let claims = vec![
        Claim::at_most("omega pullback", max_of(per.iter().map(|s| s.0)), 1e-8),
        Claim::above("H^2 > 0 (non-minimal)", min_of(per.iter().map(|s| s.1)), 0.0),
        Claim::at_most("HYPERPLANE_FLAT equality slack", max_of(per.iter().map(|s| s.2)), 1e-4),
        Claim::at_most("cubic symmetry defect", max_of(per.iter().map(|s| s.3)), 1e-5),
    ];
    Ok((claims, per.into_iter().map(|s| s.4).collect()))
}

fn verify_thm93(opts: &VerifyOptions) -> Result<Suite> {
    let n = 3;
    let step = 1e-3;
    let t_end = 0.5;
    let init = OdeState93::default_init();
    let tr = ode93_integrate(n, init, t_end, step)?;
    let order = ode93_order_check(n, init, t_end, step)?;
    let chart: ImmersionChart = theorem93_chart(&tr, (0.0, t_end), Arc::new(clifford_legendrian(n)?))?;
    let tuple = DeltaTuple::new(n, vec![n - 1])?;
    let eo = eval_opts(opts);
    let per: Vec<(f64, f64, f64, SampleRow)> = (0..opts.samples)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = rng_for(opts.seed, i as u64);
            let x = vec![rng.gen_range(0.05..t_end - 0.05), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
            let v = chart.eval(&x)?;
            let unit = (re_dot(&v, &v).sqrt() - 1.0).abs();
            let hz = horizontality(&chart, &x)?;
            let e = induced_data_horizontal(&chart, &x)?;
            let rep = evaluate(&e.data, Variant::HyperplaneCp, &tuple, &eo)?;
            let row = SampleRow {
                point: x.clone(),
                ambient: flatten(&v),
                tau: scalar_tau(&gauss_curvature(&e.data)),
                h2: mean_curvature(&e.data.h).1,
                slacks: vec![(Variant::HyperplaneCp, rep.slack)],
            };
            Ok((unit, hz, rep.slack.abs(), row))
        })
        .collect::<Result<_>>()?;
    let claims = vec![
        Claim::at_most("integrator residual", tr.residual(), 1e-9),
        Claim::at_most("step-halving order - 4", (order.leading_order() - 4.0).abs(), 0.5),
        Claim::at_most("|L| = 1", max_of(per.iter().map(|s| s.0)), 1e-10),
        Claim::at_most("horizontality", max_of(per.iter().map(|s| s.1)), 1e-6),
        Claim::at_most("HYPERPLANE_CP equality slack", max_of(per.iter().map(|s| s.2)), 1e-3),
    ];
    Ok((claims, per.into_iter().map(|s| s.3).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(samples: usize) -> VerifyOptions {
        VerifyOptions {
            samples,
            delta: DeltaOptions { restarts: 4, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn every_example_passes_on_few_samples() {
        for name in crate::gallery::EXAMPLES {
            let r = verify_example(name, &quick(3)).unwrap();
            assert!(r.pass(), "{name}: {:?}", r.failures());
            assert_eq!(r.rows.len(), 3);
        }
    }

    #[test]
    fn unknown_example() {
        assert!(matches!(verify_example("no-such", &quick(1)), Err(Error::UnknownExample(_))));
        assert!(verify_example("exotic-s3", &quick(0)).is_err());
    }

    #[test]
    fn sample_csv_has_slack_column() {
        let r = verify_example("thm-9.2", &quick(2)).unwrap();
        let csv = r.rows_to_csv();
        let head = csv.lines().next().unwrap();
        assert!(head.starts_with("x1,x2,x3,re1,im1"));
        assert!(head.ends_with("tau,h2,slack_HYPERPLANE_FLAT"));
        assert_eq!(csv.lines().count(), 3);
    }
}
