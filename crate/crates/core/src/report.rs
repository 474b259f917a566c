//! JSON and CSV serialization of inequality reports. Floating-point numbers
//! are written with 17 significant digits so that output is byte-stable and
//! round-trips exactly.

use serde::Serialize;
use serde_json::value::RawValue;

use crate::delta::{DeltaDiagnostics, DeltaResult, DeltaTuple};
use crate::inequality::InequalityReport;

/// `x` with 17 significant digits in exponent form; non-finite values
/// become `null`.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn json_number(x: f64) -> Box<RawValue> {
    RawValue::from_string(fmt17(x)).expect("formatted float is valid JSON")
}

#[derive(Serialize)]
struct DiagnosticsJson {
    restarts: usize,
    best_restart: usize,
    gap: Box<RawValue>,
    converged: bool,
    iterations: usize,
    unconverged_restarts: usize,
}

impl From<&DeltaDiagnostics> for DiagnosticsJson {
    fn from(d: &DeltaDiagnostics) -> Self {
        DiagnosticsJson {
            restarts: d.restarts,
            best_restart: d.best_restart,
            gap: json_number(d.gap),
            converged: d.converged,
            iterations: d.iterations,
            unconverged_restarts: d.unconverged_restarts,
        }
    }
}

#[derive(Serialize)]
struct ReportJson {
    variant: &'static str,
    tuple: Vec<usize>,
    n: usize,
    c: Box<RawValue>,
    delta: Box<RawValue>,
    h2: Box<RawValue>,
    rhs: Box<RawValue>,
    slack: Box<RawValue>,
    equality: bool,
    diagnostics: DiagnosticsJson,
}

impl From<&InequalityReport> for ReportJson {
    fn from(r: &InequalityReport) -> Self {
        ReportJson {
            variant: r.variant.tag(),
            tuple: r.tuple.parts().to_vec(),
            n: r.n,
            c: json_number(r.c),
            delta: json_number(r.delta),
            h2: json_number(r.h2),
            rhs: json_number(r.rhs),
            slack: json_number(r.slack),
            equality: r.equality,
            diagnostics: (&r.diagnostics).into(),
        }
    }
}

/// One report as a JSON object.
pub fn report_to_json(r: &InequalityReport) -> String {
    serde_json::to_string_pretty(&ReportJson::from(r)).expect("report serializes")
}

/// Reports as a JSON array.
pub fn reports_to_json(rs: &[InequalityReport]) -> String {
    let v: Vec<ReportJson> = rs.iter().map(ReportJson::from).collect();
    serde_json::to_string_pretty(&v).expect("reports serialize")
}

pub const CSV_HEADER: [&str; 9] = ["variant", "tuple", "n", "c", "delta", "h2", "rhs", "slack", "equality"];

/// Reports as CSV rows under [`CSV_HEADER`]; the tuple column reads `2;3`.
pub fn reports_to_csv(rs: &[InequalityReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rs {
        let tuple = r.tuple.parts().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";");
        w.write_record([
            r.variant.tag().to_string(),
            tuple,
            r.n.to_string(),
            fmt17(r.c),
            fmt17(r.delta),
            fmt17(r.h2),
            fmt17(r.rhs),
            fmt17(r.slack),
            r.equality.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[derive(Serialize)]
struct DeltaJson {
    n: usize,
    tuple: Vec<usize>,
    delta: Box<RawValue>,
    tau: Box<RawValue>,
    inf: Box<RawValue>,
    /// Orthonormal basis of each block subspace.
    blocks: Vec<Vec<Vec<Box<RawValue>>>>,
    diagnostics: DiagnosticsJson,
}

/// δ value, minimizing configuration and diagnostics as a JSON object.
pub fn delta_to_json(tuple: &DeltaTuple, d: &DeltaResult<f64>) -> String {
    let blocks = (0..tuple.k())
        .map(|j| {
            d.config
                .block_basis(j)
                .iter()
                .map(|v| v.iter().map(|x| json_number(*x)).collect())
                .collect()
        })
        .collect();
    let out = DeltaJson {
        n: tuple.n(),
        tuple: tuple.parts().to_vec(),
        delta: json_number(d.value),
        tau: json_number(d.tau),
        inf: json_number(d.inf),
        blocks,
        diagnostics: (&d.diagnostics).into(),
    };
    serde_json::to_string_pretty(&out).expect("delta serializes")
}

/// One CSV row `tuple,n,delta,tau,inf,converged,gap` under its header.
pub fn delta_to_csv(tuple: &DeltaTuple, d: &DeltaResult<f64>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tuple", "n", "delta", "tau", "inf", "converged", "gap"]).expect("in-memory write");
    let parts = tuple.parts().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";");
    w.write_record([
        parts,
        tuple.n().to_string(),
        fmt17(d.value),
        fmt17(d.tau),
        fmt17(d.inf),
        d.diagnostics.converged.to_string(),
        fmt17(d.diagnostics.gap),
    ])
    .expect("in-memory write");
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
