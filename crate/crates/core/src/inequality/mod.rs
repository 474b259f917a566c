//! Upper bounds `δ(n_1..n_k) <= a H² + b c` and their equality structures.

mod structure;
mod synth;

pub use structure::{detect_equality_structure, search_equality_frame, StructureReport};
pub use synth::{synthesize_equality_data, traceless_projection};

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::delta::{delta_invariant, DeltaDiagnostics, DeltaOptions, DeltaResult, DeltaTuple};
use crate::error::{Error, Result};
use crate::frame::CurvatureTensor;
use crate::lagrangian::{gauss_curvature, mean_curvature, LagrangianPointData};
use crate::scalar::Real;

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// General bound, any tuple.
    Old,
    /// `δ(2)` bound.
    First,
    /// Sharpened `δ(2)` bound.
    Oprea,
    /// `A <= 1/3`, `N < n`.
    Improved,
    /// `A > 1/3`, `N < n`.
    HighA,
    /// Single part `(n_1)`.
    K1,
    /// `δ(n-1) <= n(n-1)H²/4` in flat space.
    HyperplaneFlat,
    /// `δ(n-1) <= (n-1)(nH² + 4)/4` in `CP^n(4)`.
    HyperplaneCp,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Old,
        Variant::First,
        Variant::Oprea,
        Variant::Improved,
        Variant::HighA,
        Variant::K1,
        Variant::HyperplaneFlat,
        Variant::HyperplaneCp,
    ];

    /// Variants covered by batch soundness sweeps.
    pub const AUDITED: [Variant; 6] = [
        Variant::Old,
        Variant::First,
        Variant::Oprea,
        Variant::Improved,
        Variant::HighA,
        Variant::K1,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::Old => "OLD",
            Variant::First => "FIRST",
            Variant::Oprea => "OPREA",
            Variant::Improved => "IMPROVED",
            Variant::HighA => "HIGH_A",
            Variant::K1 => "K1",
            Variant::HyperplaneFlat => "HYPERPLANE_FLAT",
            Variant::HyperplaneCp => "HYPERPLANE_CP",
        }
    }

    /// Ambient constant required by the variant, if any.
    pub fn required_c(self) -> Option<f64> {
        match self {
            Variant::HyperplaneFlat => Some(0.0),
            Variant::HyperplaneCp => Some(1.0),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match norm.as_str() {
            "old" => Variant::Old,
            "first" => Variant::First,
            "oprea" => Variant::Oprea,
            "improved" => Variant::Improved,
            "high-a" => Variant::HighA,
            "k1" => Variant::K1,
            "hyperplane-flat" => Variant::HyperplaneFlat,
            "hyperplane-cp" => Variant::HyperplaneCp,
            _ => return Err(Error::InvalidInput(format!("unknown variant '{s}'"))),
        })
    }
}

fn r(x: i64) -> Rational {
    Ratio::from_integer(x)
}

fn inadmissible(v: Variant, reason: impl Into<String>) -> Error {
    Error::Inadmissible {
        variant: v.tag().into(),
        reason: reason.into(),
    }
}

/// Checks the tuple restrictions of the variant.
pub fn check_admissible(variant: Variant, tuple: &DeltaTuple) -> Result<()> {
    let n = tuple.n();
    let third = Ratio::new(1, 3);
    let a = tuple.a_exact();
    let single = |p: usize| tuple.parts() == [p];
    match variant {
        Variant::Old => Ok(()),
        Variant::First | Variant::Oprea if !single(2) => Err(inadmissible(variant, "tuple must be (2)")),
        Variant::First | Variant::Oprea => Ok(()),
        Variant::Improved | Variant::HighA if tuple.total() >= n => {
            Err(inadmissible(variant, "requires N < n"))
        }
        Variant::Improved if a > third => Err(inadmissible(variant, format!("A = {a} > 1/3"))),
        Variant::HighA if a <= third => Err(inadmissible(variant, format!("A = {a} <= 1/3"))),
        Variant::Improved | Variant::HighA => Ok(()),
        Variant::K1 if tuple.k() != 1 => Err(inadmissible(variant, "requires k = 1")),
        Variant::K1 => Ok(()),
        Variant::HyperplaneFlat | Variant::HyperplaneCp if !single(n - 1) => {
            Err(inadmissible(variant, "tuple must be (n-1)"))
        }
        Variant::HyperplaneFlat | Variant::HyperplaneCp => Ok(()),
    }
}

/// `b = (n(n-1) - Σ n_j(n_j - 1)) / 2`.
fn b_general(tuple: &DeltaTuple) -> Rational {
    let n = tuple.n() as i64;
    let s: i64 = tuple.parts().iter().map(|&p| (p * (p - 1)) as i64).sum();
    Ratio::new(n * (n - 1) - s, 2)
}

/// Exact `(a, b)` such that the bound reads `δ <= a H² + b c`.
pub fn coefficients(variant: Variant, tuple: &DeltaTuple) -> Result<(Rational, Rational)> {
    check_admissible(variant, tuple)?;
    let n = tuple.n() as i64;
    let big_n = tuple.total() as i64;
    let k = tuple.k() as i64;
    let n2 = r(n * n);
    let b = b_general(tuple);
    Ok(match variant {
        Variant::Old => (n2 * r(n + k - 1 - big_n) / r(2 * (n + k - big_n)), b),
        Variant::First => (n2 * r(n - 2) / r(2 * (n - 1)), Ratio::new((n + 1) * (n - 2), 2)),
        Variant::Oprea => (n2 * r(2 * n - 3) / r(2 * (2 * n + 3)), Ratio::new((n + 1) * (n - 2), 2)),
        Variant::Improved => {
            let six_a = r(6) * tuple.a_exact();
            let num = r(n - big_n + 3 * k - 1) - six_a;
            let den = r(n - big_n + 3 * k + 2) - six_a;
            (n2 * num / (r(2) * den), b)
        }
        Variant::HighA => (n2 * r(n - big_n + 3 * k - 3) / r(2 * (n - big_n + 3 * k)), b),
        Variant::K1 => {
            let n1 = big_n;
            let num = n1 * (n - n1) + 2 * n - 2;
            let den = n1 * (n - n1) + 2 * n + 3 * n1 + 4;
            (n2 * r(num) / r(2 * den), b)
        }
        Variant::HyperplaneFlat | Variant::HyperplaneCp => (Ratio::new(n * (n - 1), 4), r(n - 1)),
    })
}

pub fn coefficients_f64(variant: Variant, tuple: &DeltaTuple) -> Result<(f64, f64)> {
    let (a, b) = coefficients(variant, tuple)?;
    Ok((a.to_f64().unwrap_or(f64::NAN), b.to_f64().unwrap_or(f64::NAN)))
}

/// The improved variant for the tuple; `A = 1/3` counts as `IMPROVED`.
pub fn select_improved(tuple: &DeltaTuple) -> Result<Variant> {
    if tuple.total() >= tuple.n() {
        return Err(Error::NoImprovedVariant);
    }
    Ok(if tuple.a_exact() <= Ratio::new(1, 3) {
        Variant::Improved
    } else {
        Variant::HighA
    })
}

/// Every admissible `(variant, tuple)` pair among `variants` for dimension `n`.
pub fn admissible_pairs(n: usize, variants: &[Variant]) -> Result<Vec<(Variant, DeltaTuple)>> {
    let tuples = crate::delta::enumerate_tuples(n)?;
    let mut out = Vec::new();
    for t in &tuples {
        for &v in variants {
            if check_admissible(v, t).is_ok() {
                out.push((v, t.clone()));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub delta: DeltaOptions,
    /// Absolute tolerance on the slack for the equality flag.
    pub eq_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            delta: DeltaOptions::default(),
            eq_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub variant: Variant,
    pub tuple: DeltaTuple,
    pub n: usize,
    pub c: f64,
    pub delta: f64,
    pub h2: f64,
    pub rhs: f64,
    /// `rhs - delta`; non-negative whenever the bound holds.
    pub slack: f64,
    pub equality: bool,
    pub diagnostics: DeltaDiagnostics,
}

impl InequalityReport {
    /// Soundness check `slack >= -tol (1 + |rhs|)`.
    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol * (1.0 + self.rhs.abs())
    }
}

/// Builds a report from an already computed δ.
pub fn report_from_delta<T: Real>(
    data: &LagrangianPointData<T>,
    variant: Variant,
    tuple: &DeltaTuple,
    delta: &DeltaResult<T>,
    eq_tol: f64,
) -> Result<InequalityReport> {
    let (a, b) = coefficients_f64(variant, tuple)?;
    let c = data.c.as_f64();
    if let Some(req) = variant.required_c() {
        if c != req {
            return Err(inadmissible(variant, format!("requires c = {req}, got {c}")));
        }
    }
    let (_, h2) = mean_curvature(&data.h);
    let h2 = h2.as_f64();
    let rhs = a * h2 + b * c;
    let d = delta.value.as_f64();
    let slack = rhs - d;
    Ok(InequalityReport {
        variant,
        tuple: tuple.clone(),
        n: tuple.n(),
        c,
        delta: d,
        h2,
        rhs,
        slack,
        equality: slack.abs() <= eq_tol,
        diagnostics: delta.diagnostics.clone(),
    })
}

/// Evaluates one bound, returning the report and the δ computation.
pub fn evaluate_detailed<T: Real>(
    data: &LagrangianPointData<T>,
    variant: Variant,
    tuple: &DeltaTuple,
    opts: &EvalOptions,
) -> Result<(InequalityReport, DeltaResult<T>)> {
    check_admissible(variant, tuple)?;
    if data.n != tuple.n() {
        return Err(Error::DimensionMismatch {
            expected: tuple.n(),
            got: data.n,
        });
    }
    let r: CurvatureTensor<T> = gauss_curvature(data);
    let d = delta_invariant(&r, tuple, &opts.delta)?;
    let rep = report_from_delta(data, variant, tuple, &d, opts.eq_tol)?;
    Ok((rep, d))
}

pub fn evaluate<T: Real>(
    data: &LagrangianPointData<T>,
    variant: Variant,
    tuple: &DeltaTuple,
    opts: &EvalOptions,
) -> Result<InequalityReport> {
    evaluate_detailed(data, variant, tuple, opts).map(|(r, _)| r)
}
