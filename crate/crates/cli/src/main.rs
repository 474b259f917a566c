//! `lagdelta`: verification runs, δ computation, inequality evaluation and
//! soundness audits from the command line.
//!
//! Exit codes: 0 success, 1 claim or soundness failure, 2 usage or input
//! error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use lagdelta::audit::{audit, AuditOptions, AuditSummary};
use lagdelta::delta::{delta_invariant, DeltaOptions, DeltaTuple};
use lagdelta::gallery::example_point;
use lagdelta::inequality::{evaluate, select_improved, EvalOptions, Variant};
use lagdelta::lagrangian::{gauss_curvature, LagrangianPointData};
use lagdelta::report::{delta_to_csv, delta_to_json, fmt17, report_to_json, reports_to_csv};
use lagdelta::verify::{verify_example, VerifyOptions};
use lagdelta::Error;

#[derive(Parser)]
#[command(name = "lagdelta", version, about = "Chen δ-invariants and Lagrangian curvature inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the claim suite of a gallery example.
    Verify {
        /// exotic-s3, graph-8.2, thm-9.2 or thm-9.3
        example: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compute δ(n_1, .., n_k) of point data.
    Delta {
        #[command(flatten)]
        source: Source,
        /// Comma-separated parts, e.g. 2,3
        #[arg(long)]
        tuple: String,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate one inequality on point data.
    Evaluate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        tuple: String,
        /// old, first, oprea, improved, high-a, k1, hyperplane-flat,
        /// hyperplane-cp or auto
        #[arg(long, default_value = "auto")]
        variant: String,
        /// Absolute slack tolerance for the equality flag.
        #[arg(long, default_value_t = 1e-6)]
        eq_tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Soundness sweep over random cubic forms.
    Audit {
        /// Dimension or inclusive range, e.g. 4 or 3..6
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Comma-separated variants; defaults to the six general ones.
        #[arg(long)]
        variants: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Source {
    /// Point data file: {"n", "c", "h": [[A, B, C, value], ..]} with 1-based indices.
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    input: Option<PathBuf>,
    /// Gallery example whose representative point is used.
    #[arg(long)]
    example: Option<String>,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optimizer restarts; the command's default when omitted.
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Error carrying the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, error: e.into() }
}

/// Input-shaped library errors exit with 2, everything else with 1.
fn classify(e: Error) -> Failure {
    let code = match e {
        Error::InvalidInput(_)
        | Error::InvalidTuple { .. }
        | Error::UnknownExample(_)
        | Error::Inadmissible { .. }
        | Error::NoImprovedVariant
        | Error::DimensionMismatch { .. }
        | Error::IndexOutOfRange { .. }
        | Error::SymmetryViolation { .. }
        | Error::CostGuard(_) => 2,
        _ => 1,
    };
    Failure { code, error: e.into() }
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &common.out {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(usage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(source: &Source) -> Result<LagrangianPointData<f64>, Failure> {
    match (&source.input, &source.example) {
        (Some(p), None) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))
                .map_err(usage)?;
            LagrangianPointData::from_json(&text).map_err(|e| usage(anyhow::Error::from(e).context(format!("parsing {}", p.display()))))
        }
        (None, Some(name)) => example_point(name).map_err(classify),
        _ => Err(usage(anyhow::anyhow!("give exactly one of --input and --example"))),
    }
}

fn delta_options(common: &Common, default_restarts: usize) -> DeltaOptions {
    DeltaOptions {
        restarts: common.restarts.unwrap_or(default_restarts),
        seed: common.seed,
        ..Default::default()
    }
}

fn parse_range(spec: &str) -> Result<Vec<usize>, Failure> {
    let bad = || usage(anyhow::anyhow!("invalid --n '{spec}': expected N or A..B"));
    let (a, b) = match spec.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let v: usize = spec.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn audit_csv(sums: &[AuditSummary]) -> String {
    let mut s = String::from("n,variant,tuple,min_relative_slack,worst_sample,unconverged\n");
    for a in sums {
        for p in &a.pairs {
            let t = p.tuple.parts().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                a.n,
                p.variant.tag(),
                t,
                fmt17(p.min_relative_slack),
                p.worst_sample,
                p.unconverged
            ));
        }
    }
    s
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Verify { example, samples, common } => {
            let opts = VerifyOptions {
                samples,
                seed: common.seed,
                delta: delta_options(&common, VerifyOptions::default().delta.restarts),
            };
            let rep = verify_example(&example, &opts).map_err(classify)?;
            match common.format {
                Format::Json => emit(&common, &rep.to_json())?,
                Format::Csv => emit(&common, &rep.rows_to_csv())?,
            }
            for c in rep.failures() {
                eprintln!("FAIL {}: observed {:e}, bound {:e}", c.name, c.observed, c.bound);
            }
            Ok(if rep.pass() { 0 } else { 1 })
        }
        Command::Delta { source, tuple, common } => {
            let data = load(&source)?;
            let tuple = DeltaTuple::parse(data.n, &tuple).map_err(classify)?;
            let d = delta_invariant(&gauss_curvature(&data), &tuple, &delta_options(&common, 32)).map_err(classify)?;
            if !d.diagnostics.converged {
                eprintln!("warning: best restart did not converge");
            }
            match common.format {
                Format::Json => emit(&common, &delta_to_json(&tuple, &d))?,
                Format::Csv => emit(&common, &delta_to_csv(&tuple, &d))?,
            }
            Ok(0)
        }
        Command::Evaluate { source, tuple, variant, eq_tol, common } => {
            let data = load(&source)?;
            let tuple = DeltaTuple::parse(data.n, &tuple).map_err(classify)?;
            let variant = if variant.trim().eq_ignore_ascii_case("auto") {
                if tuple.total() < tuple.n() {
                    select_improved(&tuple).map_err(classify)?
                } else {
                    Variant::Old
                }
            } else {
                variant.parse::<Variant>().map_err(classify)?
            };
            let opts = EvalOptions { delta: delta_options(&common, 32), eq_tol };
            let rep = evaluate(&data, variant, &tuple, &opts).map_err(classify)?;
            match common.format {
                Format::Json => emit(&common, &report_to_json(&rep))?,
                Format::Csv => emit(&common, &reports_to_csv(&[rep]))?,
            }
            Ok(0)
        }
        Command::Audit { n, count, variants, common } => {
            let dims = parse_range(&n)?;
            let variants = match variants {
                Some(v) => v
                    .split(',')
                    .map(|s| s.parse::<Variant>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(classify)?,
                None => Variant::AUDITED.to_vec(),
            };
            let mut sums = Vec::new();
            for n in dims {
                let mut opts = AuditOptions::new(n, count, common.seed);
                opts.variants = variants.clone();
                if let Some(r) = common.restarts {
                    opts.delta.restarts = r;
                }
                let s = audit(&opts).map_err(classify)?;
                for p in &s.pairs {
                    eprintln!(
                        "n={} {} {}: min relative slack {:e}",
                        n, p.variant, p.tuple, p.min_relative_slack
                    );
                }
                sums.push(s);
            }
            let text = match common.format {
                Format::Json => format!(
                    "[\n{}\n]",
                    sums.iter().map(|s| s.to_json()).collect::<Vec<_>>().join(",\n")
                ),
                Format::Csv => audit_csv(&sums),
            };
            emit(&common, &text)?;
            Ok(if sums.iter().all(|s| s.pass()) { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
