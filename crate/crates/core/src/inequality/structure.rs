//! Detection of the equality-case patterns of `h` in an adapted frame.

use nalgebra::{DMatrix, DVector};

use super::{check_admissible, Variant};
use crate::delta::{delta_restarts, DeltaOptions, DeltaTuple};
use crate::error::{Error, Result};
use crate::lagrangian::{gauss_curvature, CubicForm, LagrangianPointData};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub variant: Variant,
    /// Largest deviation from the pattern.
    pub deviation: f64,
    /// Fitted `λ` where the pattern has one.
    pub lambda: Option<f64>,
    /// Fitted `μ_r` for the general pattern.
    pub mu: Option<Vec<f64>>,
    pub pass: bool,
    /// Frame in which the pattern was tested.
    pub frame: DMatrix<f64>,
}

/// Block label of each column: `0..k` for the blocks, `k` for the rest.
pub(super) fn labels(tuple: &DeltaTuple) -> Vec<usize> {
    let mut l = vec![tuple.k(); tuple.n()];
    for (j, r) in tuple.block_ranges().into_iter().enumerate() {
        for c in r {
            l[c] = j;
        }
    }
    l
}

/// Rotates the complement columns so that the first one follows the
/// complement part of the mean curvature.
fn align_complement<T: Real>(h: &CubicForm<T>, tuple: &DeltaTuple, frame: &DMatrix<T>) -> DMatrix<T> {
    let n = tuple.n();
    let start = tuple.total();
    let hr = h.rotate(frame);
    let m = n - start;
    if m < 2 {
        return frame.clone();
    }
    let v = DVector::from_fn(m, |i, _| (0..n).fold(T::zero(), |s, b| s + hr.get(start + i, b, b)));
    let norm = v.norm();
    if norm <= T::eps() * T::lit(1e3) * (T::one() + hr.squared_norm().sqrt()) {
        return frame.clone();
    }
    // Gram–Schmidt on [v, e_0, e_1, ...] inside the complement.
    let mut basis: Vec<DVector<T>> = vec![v / norm];
    for i in 0..m {
        if basis.len() == m {
            break;
        }
        let mut w = DVector::from_fn(m, |j, _| if i == j { T::one() } else { T::zero() });
        for _ in 0..2 {
            for b in &basis {
                let p = b.dot(&w);
                w -= b * p;
            }
        }
        let wn = w.norm();
        if wn > T::lit(1e-6) {
            basis.push(w / wn);
        }
    }
    let mut rot = DMatrix::<T>::identity(n, n);
    for (j, b) in basis.iter().enumerate() {
        for i in 0..m {
            rot[(start + i, start + j)] = b[i];
        }
    }
    frame * rot
}

fn intra_block_traces<T: Real>(h: &CubicForm<T>, tuple: &DeltaTuple) -> T {
    let mut worst = T::zero();
    for r in tuple.block_ranges() {
        for g in r.clone() {
            let tr = r.clone().fold(T::zero(), |s, a| s + h.get(g, a, a));
            worst = worst.max(tr.abs());
        }
    }
    worst
}

/// Expected form for the improved pattern: intra-block entries copied from
/// `h`, plus the `λ` terms.
pub(super) fn improved_pattern<T: Real>(h: &CubicForm<T>, tuple: &DeltaTuple, lambda: T) -> CubicForm<T> {
    let n = tuple.n();
    let big = tuple.total();
    let lab = labels(tuple);
    let mut e = CubicForm::zeros(n);
    for ([a, b, c], v) in h.entries() {
        if lab[a] < tuple.k() && lab[a] == lab[b] && lab[b] == lab[c] {
            e.set(a, b, c, v);
        }
    }
    if big < n {
        let three = T::lit(3.0);
        for (j, r) in tuple.block_ranges().into_iter().enumerate() {
            let w = three * lambda / T::count(2 + tuple.parts()[j]);
            for a in r {
                e.set(a, a, big, w);
            }
        }
        e.set(big, big, big, three * lambda);
        for u in (big + 1)..n {
            e.set(big, u, u, lambda);
        }
    }
    e
}

/// General pattern: block-diagonal shape operators `A_r` with the
/// complement block `μ_r I` and every block trace equal to `μ_r`.
fn old_pattern<T: Real>(h: &CubicForm<T>, tuple: &DeltaTuple) -> (T, Vec<T>) {
    let n = tuple.n();
    let k = tuple.k();
    let lab = labels(tuple);
    let rest: Vec<usize> = (tuple.total()..n).collect();
    let ranges = tuple.block_ranges();
    let mut worst = T::zero();
    let mut mus = Vec::with_capacity(n);
    for r in 0..n {
        let traces: Vec<T> = ranges
            .iter()
            .map(|b| b.clone().fold(T::zero(), |s, a| s + h.get(r, a, a)))
            .collect();
        let mu = if rest.is_empty() {
            traces.iter().fold(T::zero(), |s, x| s + *x) / T::count(k)
        } else {
            rest.iter().fold(T::zero(), |s, &a| s + h.get(r, a, a)) / T::count(rest.len())
        };
        for b in 0..n {
            for c in b..n {
                let v = h.get(r, b, c);
                let dev = if lab[b] != lab[c] {
                    v.abs()
                } else if lab[b] == k {
                    if b == c { (v - mu).abs() } else { v.abs() }
                } else {
                    T::zero()
                };
                worst = worst.max(dev);
            }
        }
        for t in traces {
            worst = worst.max((t - mu).abs());
        }
        mus.push(mu);
    }
    (worst, mus)
}

/// Tests whether `h`, expressed in `frame` (blocks first, then the
/// remaining columns), has the equality pattern of `variant`.
pub fn detect_equality_structure<T: Real>(
    h: &CubicForm<T>,
    tuple: &DeltaTuple,
    variant: Variant,
    frame: &DMatrix<T>,
    tol: f64,
) -> Result<StructureReport> {
    check_admissible(variant, tuple)?;
    let n = tuple.n();
    if h.n() != n || frame.nrows() != n || frame.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if h.n() != n { h.n() } else { frame.nrows() },
        });
    }
    let to64 = |m: &DMatrix<T>| m.map(|x| x.as_f64());
    let (deviation, lambda, mu, used) = match variant {
        Variant::Improved | Variant::K1 | Variant::HyperplaneFlat | Variant::HyperplaneCp => {
            let f = align_complement(h, tuple, frame);
            let hr = h.rotate(&f);
            let big = tuple.total();
            let lambda = hr.get(big, big, big) / T::lit(3.0);
            let e = improved_pattern(&hr, tuple, lambda);
            let dev = hr.max_abs_diff(&e).max(intra_block_traces(&hr, tuple));
            (dev, Some(lambda.as_f64()), None, f)
        }
        Variant::HighA => {
            let hr = h.rotate(frame);
            let e = improved_pattern(&hr, tuple, T::zero());
            let dev = hr.max_abs_diff(&e).max(intra_block_traces(&hr, tuple));
            (dev, None, None, frame.clone())
        }
        Variant::Old | Variant::First => {
            let hr = h.rotate(frame);
            let (dev, mus) = old_pattern(&hr, tuple);
            let lambda = (variant == Variant::First).then(|| {
                let (a, b) = (hr.get(0, 0, 0), hr.get(1, 1, 1));
                (a * a + b * b).sqrt().as_f64()
            });
            (dev, lambda, Some(mus.iter().map(|m| m.as_f64()).collect()), frame.clone())
        }
        Variant::Oprea => return Err(Error::NoEqualityPattern(variant.tag().into())),
    };
    let deviation = deviation.as_f64();
    Ok(StructureReport {
        variant,
        deviation,
        lambda,
        mu,
        pass: deviation <= tol,
        frame: to64(&used),
    })
}

/// Runs the δ restarts and tests the pattern in every local minimizer's
/// frame, returning the report with the smallest deviation.
pub fn search_equality_frame<T: Real>(
    data: &LagrangianPointData<T>,
    tuple: &DeltaTuple,
    variant: Variant,
    opts: &DeltaOptions,
    tol: f64,
) -> Result<StructureReport> {
    check_admissible(variant, tuple)?;
    let r = gauss_curvature(data);
    let outs = delta_restarts(&r, tuple, opts)?;
    let mut best: Option<StructureReport> = None;
    for o in outs {
        let rep = detect_equality_structure(&data.h, tuple, variant, &o.frame, tol)?;
        if best.as_ref().is_none_or(|b| rep.deviation < b.deviation) {
            best = Some(rep);
        }
    }
    Ok(best.expect("at least one restart"))
}
