//! Gradient graphs `x ↦ x + i ∇F(x)`.

use std::sync::Arc;

use num_complex::Complex64;

use super::{Ambient, ImmersionChart};
use crate::delta::DeltaTuple;
use crate::lagrangian::CubicForm;

/// A potential `F` on `ℝⁿ` together with its gradient.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Whether `gradient` is exact; otherwise the chart differentiates with
    /// the coarser step `1e-3`.
    fn analytic_gradient(&self) -> bool {
        true
    }
}

/// Cubic polynomial `Σ c_t x_a x_b x_c`, differentiated exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicPotential {
    n: usize,
    terms: Vec<(f64, [usize; 3])>,
}

impl CubicPotential {
    pub fn new(n: usize) -> Self {
        CubicPotential { n, terms: Vec::new() }
    }

    /// Adds `coeff · x_a x_b x_c` (zero-based indices).
    pub fn add(&mut self, coeff: f64, a: usize, b: usize, c: usize) {
        assert!(a < self.n && b < self.n && c < self.n, "monomial index out of range");
        self.terms.push((coeff, [a, b, c]));
    }

    /// Third partial derivatives, constant in `x`.
    pub fn third_derivatives(&self) -> CubicForm<f64> {
        let n = self.n;
        let mut d = vec![0.0; n * n * n];
        for &(w, t) in &self.terms {
            for p in crate::lagrangian::permutations(t[0], t[1], t[2]) {
                d[(p[0] * n + p[1]) * n + p[2]] += w;
            }
        }
        CubicForm::from_dense(n, &d)
    }
}

impl Potential for CubicPotential {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(w, [a, b, c])| w * x[a] * x[b] * x[c]).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for &(w, [a, b, c]) in &self.terms {
            g[a] += w * x[b] * x[c];
            g[b] += w * x[a] * x[c];
            g[c] += w * x[a] * x[b];
        }
        g
    }
}

/// Potential known only through its values; the gradient uses central
/// differences with step `1e-3`.
pub struct NumericPotential<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> NumericPotential<F> {
    pub fn new(n: usize, f: F) -> Self {
        NumericPotential { n, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Potential for NumericPotential<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let h = 1e-3;
        let mut y = x.to_vec();
        (0..self.n)
            .map(|i| {
                y[i] = x[i] + h;
                let p = (self.f)(&y);
                y[i] = x[i] - h;
                let m = (self.f)(&y);
                y[i] = x[i];
                (p - m) / (2.0 * h)
            })
            .collect()
    }

    fn analytic_gradient(&self) -> bool {
        false
    }
}

/// `L(x) = (x_1, .., x_n, F_{x_1}, .., F_{x_n})` as the complex vector
/// `x + i ∇F(x)`.
pub fn graph_immersion<P: Potential + 'static>(potential: P) -> ImmersionChart {
    let n = potential.dim();
    let step = if potential.analytic_gradient() { super::DEFAULT_STEP } else { 1e-3 };
    let p = Arc::new(potential);
    ImmersionChart::new(n, Ambient::Flat, move |x: &[f64]| {
        let g = p.gradient(x);
        Ok(x.iter().zip(g).map(|(&a, b)| Complex64::new(a, b)).collect())
    })
    .with_steps(vec![step; n])
    .expect("one positive step per axis")
}

/// The cubic potential whose graph attains the improved inequality at the
/// origin with `H(0) ≠ 0`:
/// `F = Σ_i 3λ/(2(2+n_i)) Σ_{α∈Δ_i} x_α² x_{N+1} + λ/2 Σ_{r>N} x_{N+1} x_r²`.
pub fn theorem82_potential(tuple: &DeltaTuple, lambda: f64) -> Option<CubicPotential> {
    let n = tuple.n();
    let big = tuple.total();
    if big >= n {
        return None;
    }
    let mut f = CubicPotential::new(n);
    for (j, r) in tuple.block_ranges().into_iter().enumerate() {
        let w = 3.0 * lambda / (2.0 * (2 + tuple.parts()[j]) as f64);
        for a in r {
            f.add(w, a, a, big);
        }
    }
    for r in big..n {
        f.add(lambda / 2.0, big, r, r);
    }
    Some(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{induced_data_flat, omega_pullback};

    #[test]
    fn quadratic_graph_is_flat() {
        let q = NumericPotential::new(3, |x: &[f64]| x[0] * x[0] - 2.0 * x[1] * x[2] + 0.5 * x[2] * x[2]);
        let c = graph_immersion(q);
        for x in [[0.0; 3], [0.3, -0.2, 0.7]] {
            let e = induced_data_flat(&c, &x).unwrap();
            assert!(e.data.h.squared_norm() < 1e-12, "{}", e.data.h.squared_norm());
        }
    }

    #[test]
    fn theorem82_third_derivatives() {
        let t = DeltaTuple::new(5, vec![2]).unwrap();
        let f = theorem82_potential(&t, 1.0).unwrap();
        let d = f.third_derivatives();
        let mut e = CubicForm::zeros(5);
        e.set(0, 0, 2, 0.75);
        e.set(1, 1, 2, 0.75);
        e.set(2, 2, 2, 3.0);
        e.set(2, 3, 3, 1.0);
        e.set(2, 4, 4, 1.0);
        assert!(d.max_abs_diff(&e) < 1e-15);
        assert!(theorem82_potential(&DeltaTuple::new(4, vec![2, 2]).unwrap(), 1.0).is_none());
        let c = graph_immersion(f);
        assert!(omega_pullback(&c, &[0.2, -0.1, 0.4, 0.3, -0.5]).unwrap() < 1e-8);
    }
}
