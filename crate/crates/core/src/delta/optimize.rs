//! Multi-start L-BFGS on `O(n)` for `inf Σ_j τ(L_j)`.
//!
//! Frames move by `Q ← Q exp(Ω)` with `Ω` skew. Gradients and L-BFGS pairs
//! are kept in left-trivialized Lie-algebra coordinates. The objective is a
//! sum of `R(q_a, q_b, q_b, q_a)` over pairs inside blocks, whose column
//! gradient is `2 R(·, q_b, q_b, q_a)`.

use std::collections::VecDeque;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::assign::{best_assignment, layout};
use super::{DeltaTuple, SubspaceConfig};
use crate::error::{Error, Result};
use crate::frame::{scalar_tau, CurvatureTensor};
use crate::random::{haar_orthogonal, rng_for};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaOptions {
    pub restarts: usize,
    /// Iteration budget per restart.
    pub max_iter: usize,
    pub seed: u64,
    /// L-BFGS history length.
    pub memory: usize,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            restarts: 32,
            max_iter: 500,
            seed: 0,
            memory: 6,
        }
    }
}

/// Result of one restart. `frame` has the blocks laid out contiguously.
#[derive(Debug, Clone)]
pub struct RestartOutcome<T: Real> {
    pub restart: usize,
    pub value: T,
    pub frame: DMatrix<T>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDiagnostics {
    pub restarts: usize,
    pub best_restart: usize,
    /// Second-smallest restart value minus the smallest. Near zero means
    /// the best value was reached from more than one start.
    pub gap: f64,
    /// Whether the winning restart met a stopping criterion.
    pub converged: bool,
    pub iterations: usize,
    pub unconverged_restarts: usize,
}

#[derive(Debug, Clone)]
pub struct DeltaResult<T: Real> {
    pub value: T,
    pub tau: T,
    /// Best found `Σ_j τ(L_j)`.
    pub inf: T,
    pub config: SubspaceConfig<T>,
    pub diagnostics: DeltaDiagnostics,
}

struct Problem<'a, T: Real> {
    r: &'a CurvatureTensor<T>,
    n: usize,
    ranges: Vec<Range<usize>>,
    parts: Vec<usize>,
    scale: T,
}

impl<T: Real> Problem<'_, T> {
    fn col<'q>(&self, q: &'q DMatrix<T>, c: usize) -> &'q [T] {
        &q.as_slice()[c * self.n..(c + 1) * self.n]
    }

    /// Objective, and optionally the Euclidean gradient with respect to `q`.
    fn eval(&self, q: &DMatrix<T>, grad: Option<&mut DMatrix<T>>) -> T {
        let n = self.n;
        let mut mats: Vec<Vec<T>> = Vec::new();
        let mut f = T::zero();
        let mut g = grad;
        if let Some(g) = g.as_deref_mut() {
            g.fill(T::zero());
        }
        let mut tmp = vec![T::zero(); n];
        for range in &self.ranges {
            mats.clear();
            for c in range.clone() {
                let mut m = vec![T::zero(); n * n];
                self.r.contract_middle(self.col(q, c), &mut m);
                mats.push(m);
            }
            for a in range.clone() {
                let qa = self.col(q, a);
                for (ib, b) in range.clone().enumerate() {
                    if a == b {
                        continue;
                    }
                    // tmp = M_b q_a
                    let m = &mats[ib];
                    for (x, t) in tmp.iter_mut().enumerate() {
                        *t = (0..n).fold(T::zero(), |s, y| s + m[x * n + y] * qa[y]);
                    }
                    if a < b {
                        f += tmp.iter().zip(qa).fold(T::zero(), |s, (t, x)| s + *t * *x);
                    }
                    if let Some(g) = g.as_deref_mut() {
                        let two = T::lit(2.0);
                        for x in 0..n {
                            g[(x, a)] += two * tmp[x];
                        }
                    }
                }
            }
        }
        f
    }

    /// Pair weights `K(q_a, q_b)` for all columns.
    fn pair_weights(&self, q: &DMatrix<T>) -> Vec<T> {
        let n = self.n;
        let mut w = vec![T::zero(); n * n];
        let mut m = vec![T::zero(); n * n];
        for b in 0..n {
            self.r.contract_middle(self.col(q, b), &mut m);
            for a in 0..n {
                if a == b {
                    continue;
                }
                let qa = self.col(q, a);
                let mut s = T::zero();
                for x in 0..n {
                    for y in 0..n {
                        s += qa[x] * m[x * n + y] * qa[y];
                    }
                }
                w[a * n + b] = s;
            }
        }
        w
    }

    /// Reorders columns so the best blocks for this frame are contiguous.
    fn reassign(&self, q: &DMatrix<T>) -> (T, DMatrix<T>) {
        let w = self.pair_weights(q);
        let (v, blocks) = best_assignment(&w, self.n, &self.parts);
        let order = layout(self.n, &blocks);
        let p = DMatrix::from_fn(self.n, self.n, |i, j| q[(i, order[j])]);
        (v, p)
    }

    fn lie_gradient(&self, q: &DMatrix<T>, g: &DMatrix<T>) -> DVector<T> {
        let a = q.transpose() * g;
        let n = self.n;
        let mut v = DVector::zeros(n * (n - 1) / 2);
        let mut i = 0;
        for x in 0..n {
            for y in (x + 1)..n {
                v[i] = a[(x, y)] - a[(y, x)];
                i += 1;
            }
        }
        v
    }

    fn step(&self, q: &DMatrix<T>, omega: &DVector<T>) -> DMatrix<T> {
        let n = self.n;
        let mut w = DMatrix::zeros(n, n);
        let mut i = 0;
        for x in 0..n {
            for y in (x + 1)..n {
                w[(x, y)] = omega[i];
                w[(y, x)] = -omega[i];
                i += 1;
            }
        }
        q * w.exp()
    }
}

fn reorthonormalize<T: Real>(q: &DMatrix<T>) -> DMatrix<T> {
    let qr = q.clone().qr();
    let r = qr.r();
    let mut out = qr.q();
    for j in 0..out.ncols() {
        if r[(j, j)] < T::zero() {
            out.column_mut(j).neg_mut();
        }
    }
    out
}

struct Local<T: Real> {
    value: T,
    frame: DMatrix<T>,
    iterations: usize,
    converged: bool,
}

fn lbfgs<T: Real>(pb: &Problem<'_, T>, q0: DMatrix<T>, opts: &DeltaOptions, budget: usize) -> Local<T> {
    let n = pb.n;
    let mut q = q0;
    let mut gm = DMatrix::zeros(n, n);
    let mut f = pb.eval(&q, Some(&mut gm));
    let mut g = pb.lie_gradient(&q, &gm);
    let gtol = (T::lit(1e-10)).max(T::eps() * T::lit(100.0)) * pb.scale;
    let ftol = T::lit(1e-12).max(T::eps() * T::lit(10.0));
    let mut hist: VecDeque<(DVector<T>, DVector<T>, T)> = VecDeque::new();
    let mut recent: VecDeque<T> = VecDeque::new();
    let c1 = T::lit(1e-4);
    for it in 0..budget {
        if g.norm() <= gtol {
            return Local { value: f, frame: q, iterations: it, converged: true };
        }
        recent.push_back(f);
        if recent.len() > 21 {
            recent.pop_front();
            if recent[0] - f <= ftol * (T::one() + f.abs()) {
                return Local { value: f, frame: q, iterations: it, converged: true };
            }
        }
        // two-loop recursion
        let mut d = -g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = *rho * s.dot(&d);
            d -= y * a;
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            d *= s.dot(y) / y.dot(y);
        } else {
            d *= T::one().min(T::one() / g.norm());
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
            let b = *rho * y.dot(&d);
            d += s * (a - b);
        }
        let mut slope = g.dot(&d);
        if slope >= T::zero() {
            hist.clear();
            d = -g.clone() * T::one().min(T::one() / g.norm());
            slope = g.dot(&d);
        }
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let step = &d * t;
            let qn = pb.step(&q, &step);
            let fnew = pb.eval(&qn, Some(&mut gm));
            if fnew <= f + c1 * t * slope {
                accepted = Some((step, qn, fnew));
                break;
            }
            t *= T::lit(0.5);
        }
        let Some((s, mut qn, mut fnew)) = accepted else {
            if hist.is_empty() {
                let ok = g.norm() <= T::lit(1e-6) * pb.scale;
                return Local { value: f, frame: q, iterations: it, converged: ok };
            }
            hist.clear();
            continue;
        };
        if (it + 1) % 25 == 0 {
            qn = reorthonormalize(&qn);
            fnew = pb.eval(&qn, Some(&mut gm));
        }
        let gn = pb.lie_gradient(&qn, &gm);
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > T::eps() * s.norm() * y.norm() {
            hist.push_back((s, y, T::one() / sy));
            if hist.len() > opts.memory.max(1) {
                hist.pop_front();
            }
        }
        q = qn;
        f = fnew;
        g = gn;
    }
    let ok = g.norm() <= gtol;
    Local { value: f, frame: q, iterations: budget, converged: ok }
}

fn run_restart<T: Real>(pb: &Problem<'_, T>, opts: &DeltaOptions, restart: usize) -> RestartOutcome<T> {
    let n = pb.n;
    let q0 = if restart == 0 {
        DMatrix::identity(n, n)
    } else {
        haar_orthogonal(n, &mut rng_for(opts.seed, restart as u64))
    };
    let (_, mut q) = pb.reassign(&q0);
    let mut used = 0;
    let mut converged = false;
    let mut value = pb.eval(&q, None);
    for _round in 0..4 {
        let local = lbfgs(pb, q, opts, opts.max_iter.saturating_sub(used).max(1));
        used += local.iterations;
        converged = local.converged;
        value = local.value;
        q = local.frame;
        let (v, qa) = pb.reassign(&q);
        if v < value - T::lit(1e-12).max(T::eps() * T::lit(10.0)) * (T::one() + value.abs()) {
            q = qa;
            value = v;
            continue;
        }
        break;
    }
    RestartOutcome {
        restart,
        value,
        frame: q,
        iterations: used,
        converged,
    }
}

fn check_inputs<T: Real>(r: &CurvatureTensor<T>, tuple: &DeltaTuple, opts: &DeltaOptions) -> Result<()> {
    if r.n() != tuple.n() {
        return Err(Error::DimensionMismatch {
            expected: tuple.n(),
            got: r.n(),
        });
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidInput("restarts must be at least 1".into()));
    }
    Ok(())
}

/// Every restart's local minimum, in restart order.
pub fn delta_restarts<T: Real>(
    r: &CurvatureTensor<T>,
    tuple: &DeltaTuple,
    opts: &DeltaOptions,
) -> Result<Vec<RestartOutcome<T>>> {
    check_inputs(r, tuple, opts)?;
    let pb = Problem {
        r,
        n: tuple.n(),
        ranges: tuple.block_ranges(),
        parts: tuple.parts().to_vec(),
        scale: T::one() + r.frobenius_norm(),
    };
    Ok((0..opts.restarts)
        .into_par_iter()
        .map(|i| run_restart(&pb, opts, i))
        .collect())
}

/// `δ = τ - inf Σ_j τ(L_j)` with the minimizing configuration.
///
/// Ties between restarts go to the lowest restart index.
pub fn delta_invariant<T: Real>(
    r: &CurvatureTensor<T>,
    tuple: &DeltaTuple,
    opts: &DeltaOptions,
) -> Result<DeltaResult<T>> {
    let outs = delta_restarts(r, tuple, opts)?;
    let mut best = 0;
    for (i, o) in outs.iter().enumerate() {
        if o.value < outs[best].value {
            best = i;
        }
    }
    let second = outs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, o)| o.value.as_f64())
        .fold(f64::INFINITY, f64::min);
    let b = &outs[best];
    let tau = scalar_tau(r);
    let diagnostics = DeltaDiagnostics {
        restarts: outs.len(),
        best_restart: best,
        gap: if second.is_finite() { second - b.value.as_f64() } else { 0.0 },
        converged: b.converged,
        iterations: b.iterations,
        unconverged_restarts: outs.iter().filter(|o| !o.converged).count(),
    };
    Ok(DeltaResult {
        value: tau - b.value,
        tau,
        inf: b.value,
        config: SubspaceConfig::contiguous(b.frame.clone(), tuple)?,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delta::{config_objective, delta_constant_curvature};
    use crate::lagrangian::{exotic_s3_point, gauss_curvature};
    use crate::random::random_curvature;
    use approx::assert_abs_diff_eq;

    fn fast() -> DeltaOptions {
        DeltaOptions {
            restarts: 8,
            ..DeltaOptions::default()
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let r: CurvatureTensor<f64> = random_curvature(5, 3, &mut rng_for(9, 0));
        let t = DeltaTuple::new(5, vec![2, 3]).unwrap();
        let pb = Problem {
            r: &r,
            n: 5,
            ranges: t.block_ranges(),
            parts: t.parts().to_vec(),
            scale: 1.0,
        };
        let q = haar_orthogonal(5, &mut rng_for(9, 1));
        let mut gm = DMatrix::zeros(5, 5);
        pb.eval(&q, Some(&mut gm));
        let g = pb.lie_gradient(&q, &gm);
        let h = 1e-6;
        for i in 0..g.len() {
            let mut e = DVector::zeros(g.len());
            e[i] = h;
            let fp = pb.eval(&pb.step(&q, &e), None);
            let fm = pb.eval(&pb.step(&q, &(-e)), None);
            assert_abs_diff_eq!((fp - fm) / (2.0 * h), g[i], epsilon = 1e-6);
        }
    }

    #[test]
    fn constant_curvature_closed_form() {
        let r = CurvatureTensor::constant(5, 1.5);
        let t = DeltaTuple::new(5, vec![2, 2]).unwrap();
        let d = delta_invariant(&r, &t, &fast()).unwrap();
        assert_abs_diff_eq!(d.value, delta_constant_curvature(&t, 1.5), epsilon = 1e-12);
    }

    #[test]
    fn exotic_delta_two() {
        let r = gauss_curvature(&exotic_s3_point::<f64>());
        let t = DeltaTuple::new(3, vec![2]).unwrap();
        let d = delta_invariant(&r, &t, &fast()).unwrap();
        assert_abs_diff_eq!(d.value, 2.0, epsilon = 1e-10);
        assert!(d.diagnostics.converged);
        let obj = config_objective(&r, &t, &d.config).unwrap();
        assert_abs_diff_eq!(obj, d.inf, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let r: CurvatureTensor<f64> = random_curvature(4, 3, &mut rng_for(5, 0));
        let t = DeltaTuple::new(4, vec![2]).unwrap();
        let a = delta_invariant(&r, &t, &fast()).unwrap();
        let b = delta_invariant(&r, &t, &fast()).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.config, b.config);
    }

    #[test]
    fn f32_runs() {
        let r = gauss_curvature(&exotic_s3_point::<f32>());
        let t = DeltaTuple::new(3, vec![2]).unwrap();
        let d = delta_invariant(&r, &t, &fast()).unwrap();
        assert!((d.value - 2.0).abs() < 1e-4);
    }
}
