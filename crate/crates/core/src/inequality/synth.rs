//! Construction of cubic forms that realize the equality patterns exactly.

use nalgebra::DMatrix;

use super::structure::{improved_pattern, labels};
use super::{check_admissible, Variant};
use crate::delta::DeltaTuple;
use crate::error::{Error, Result};
use crate::lagrangian::{CubicForm, LagrangianPointData};
use crate::random::{normal, random_cubic, rng_for};
use crate::scalar::Real;

/// Removes the trace `t_c = Σ_a g_caa` of a cubic form on `m` indices:
/// `g - 3/(m+2) sym(δ ⊗ t)`.
pub fn traceless_projection<T: Real>(g: &CubicForm<T>) -> CubicForm<T> {
    let m = g.n();
    let t: Vec<T> = (0..m)
        .map(|c| (0..m).fold(T::zero(), |s, a| s + g.get(c, a, a)))
        .collect();
    let w = T::lit(3.0) / T::count(m + 2);
    let third = T::one() / T::lit(3.0);
    let kd = |i: usize, j: usize| if i == j { T::one() } else { T::zero() };
    let mut out = CubicForm::zeros(m);
    for a in 0..m {
        for b in a..m {
            for c in b..m {
                let sym = (kd(a, b) * t[c] + kd(a, c) * t[b] + kd(b, c) * t[a]) * third;
                out.set(a, b, c, g.get(a, b, c) - w * sym);
            }
        }
    }
    out
}

/// Sets `g_{c,m-1,m-1}` so that each trace, summed in index order, is
/// exactly zero in floating point.
fn exact_traces<T: Real>(g: &mut CubicForm<T>) {
    let m = g.n();
    let last = m - 1;
    for c in 0..m {
        let partial = (0..last).fold(T::zero(), |s, a| s + g.get(c, a, a));
        g.set(c, last, last, -partial);
    }
}

/// Random traceless cubic forms placed on the diagonal blocks.
fn block_forms<T: Real>(tuple: &DeltaTuple, seed: Option<u64>) -> CubicForm<T> {
    let mut h = CubicForm::zeros(tuple.n());
    let Some(seed) = seed else {
        return h;
    };
    for (j, r) in tuple.block_ranges().into_iter().enumerate() {
        let mut g = traceless_projection(&random_cubic::<T, _>(r.len(), &mut rng_for(seed, j as u64)));
        exact_traces(&mut g);
        for ([a, b, c], v) in g.entries() {
            h.set(r.start + a, r.start + b, r.start + c, v);
        }
    }
    h
}

/// Random element of the linear space of forms with the general pattern,
/// found as a null space of the pattern constraints.
fn old_form<T: Real>(tuple: &DeltaTuple, seed: u64) -> CubicForm<T> {
    let n = tuple.n();
    let k = tuple.k();
    let lab = labels(tuple);
    let mut triples = Vec::new();
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                triples.push([a, b, c]);
            }
        }
    }
    let index = |a: usize, b: usize, c: usize| {
        let mut t = [a, b, c];
        t.sort_unstable();
        triples.binary_search(&t).expect("triple present")
    };
    let rest: Vec<usize> = (tuple.total()..n).collect();
    let ranges = tuple.block_ranges();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for r in 0..n {
        // μ_r as a linear functional
        let mu: Vec<(usize, f64)> = match rest.first() {
            Some(&s) => vec![(index(r, s, s), 1.0)],
            None => ranges[0].clone().map(|a| (index(r, a, a), 1.0)).collect(),
        };
        for b in 0..n {
            for c in b..n {
                if lab[b] != lab[c] || (lab[b] == k && b != c) {
                    rows.push(vec![(index(r, b, c), 1.0)]);
                } else if lab[b] == k && b == c && Some(&b) != rest.first() {
                    let mut row = vec![(index(r, b, b), 1.0)];
                    row.extend(mu.iter().map(|&(i, v)| (i, -v)));
                    rows.push(row);
                }
            }
        }
        for range in &ranges {
            let mut row: Vec<(usize, f64)> = range.clone().map(|a| (index(r, a, a), 1.0)).collect();
            row.extend(mu.iter().map(|&(i, v)| (i, -v)));
            rows.push(row);
        }
    }
    let cols = triples.len();
    let mut m = DMatrix::<f64>::zeros(rows.len().max(cols), cols);
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            m[(i, j)] += v;
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let mut rng = rng_for(seed, 0);
    let mut x = vec![0.0; cols];
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= 1e-10 * smax.max(1.0) {
            let z = normal(&mut rng);
            for j in 0..cols {
                x[j] += z * vt[(i, j)];
            }
        }
    }
    let mut h = CubicForm::zeros(n);
    for (j, &[a, b, c]) in triples.iter().enumerate() {
        // entries below round-off are structural zeros
        if x[j].abs() > 1e-13 {
            h.set(a, b, c, T::lit(x[j]));
        }
    }
    h
}

/// Builds point data whose cubic form has the equality pattern of `variant`
/// in the standard frame (blocks first, then the remaining columns).
///
/// `seed = None` leaves the free block entries at zero. `λ` is ignored for
/// the patterns that force minimality.
pub fn synthesize_equality_data<T: Real>(
    tuple: &DeltaTuple,
    variant: Variant,
    lambda: T,
    c: T,
    seed: Option<u64>,
) -> Result<LagrangianPointData<T>> {
    check_admissible(variant, tuple)?;
    let h = match variant {
        Variant::Improved | Variant::K1 | Variant::HyperplaneFlat | Variant::HyperplaneCp => {
            improved_pattern(&block_forms(tuple, seed), tuple, lambda)
        }
        Variant::HighA => block_forms(tuple, seed),
        Variant::Old | Variant::First => old_form(tuple, seed.unwrap_or(0)),
        Variant::Oprea => return Err(Error::NoEqualityPattern(variant.tag().into())),
    };
    Ok(LagrangianPointData::new(c, h)?.with_provenance(format!("synthetic {variant} {tuple}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::{detect_equality_structure, evaluate, EvalOptions};
    use crate::lagrangian::mean_curvature;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_is_traceless() {
        let g = random_cubic::<f64, _>(4, &mut rng_for(1, 0));
        let p = traceless_projection(&g);
        for cc in 0..4 {
            let tr: f64 = (0..4).map(|a| p.get(cc, a, a)).sum();
            assert_abs_diff_eq!(tr, 0.0, epsilon = 1e-14);
        }
        assert!(traceless_projection(&p).max_abs_diff(&p) < 1e-14);
    }

    #[test]
    fn improved_zero_blocks_is_graph_form() {
        let t = DeltaTuple::new(5, vec![2]).unwrap();
        let d = synthesize_equality_data(&t, Variant::Improved, 1.0, 0.0, None).unwrap();
        let mut e = CubicForm::zeros(5);
        e.set(0, 0, 2, 0.75);
        e.set(1, 1, 2, 0.75);
        e.set(2, 2, 2, 3.0);
        e.set(2, 3, 3, 1.0);
        e.set(2, 4, 4, 1.0);
        assert_eq!(d.h, e);
        let (_, h2) = mean_curvature(&d.h);
        assert_abs_diff_eq!(h2, 1.69, epsilon = 1e-14);
    }

    #[test]
    fn old_pattern_round_trip_is_minimal() {
        let t = DeltaTuple::new(5, vec![2, 2]).unwrap();
        let d = synthesize_equality_data::<f64>(&t, Variant::Old, 0.0, 0.0, Some(3)).unwrap();
        assert!(d.h.squared_norm() > 0.1);
        let rep = detect_equality_structure(&d.h, &t, Variant::Old, &DMatrix::identity(5, 5), 1e-12).unwrap();
        assert!(rep.pass, "{rep:?}");
        let (_, h2) = mean_curvature(&d.h);
        assert!(h2 < 1e-24);
        let ev = evaluate(&d, Variant::Old, &t, &EvalOptions::default()).unwrap();
        assert!(ev.slack.abs() < 1e-9, "{}", ev.slack);
    }

    #[test]
    fn high_a_round_trip() {
        let t = DeltaTuple::new(7, vec![2, 2, 2]).unwrap();
        let d = synthesize_equality_data::<f64>(&t, Variant::HighA, 5.0, 0.0, Some(11)).unwrap();
        let (_, h2) = mean_curvature(&d.h);
        assert_eq!(h2, 0.0);
        let rep = detect_equality_structure(&d.h, &t, Variant::HighA, &DMatrix::identity(7, 7), 1e-12).unwrap();
        assert!(rep.pass);
    }
}
