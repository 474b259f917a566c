//! Minimal Legendrian immersions into odd-dimensional unit spheres.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{omega, re_dot};
use crate::error::{Error, Result};
use crate::random::rng_for;
use rand::Rng;

/// A Legendrian immersion `ℝ^{m-1} ⊃ U → S^{2m-1} ⊂ ℂ^m` with analytic first
/// derivatives.
pub trait LegendrianMap: Send + Sync {
    /// Complex dimension `m` of the target.
    fn target_dim(&self) -> usize;

    fn eval(&self, u: &[f64]) -> Vec<Complex64>;

    /// `∂φ/∂u_k` for every `k`.
    fn derivatives(&self, u: &[f64]) -> Vec<Vec<Complex64>>;
}

/// `u ↦ (1/√m)(e^{i a_1·u}, .., e^{i a_m·u})` with `a_j = e_j` for `j < m`
/// and `a_m = -Σ e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordLegendrian {
    m: usize,
    phases: Vec<Vec<i64>>,
}

impl CliffordLegendrian {
    pub fn phases(&self) -> &[Vec<i64>] {
        &self.phases
    }

    /// `max_k |Re <∂_k φ, i φ>|`.
    pub fn horizontality_residual(&self, u: &[f64]) -> f64 {
        let v = self.eval(u);
        self.derivatives(u).iter().fold(0.0f64, |w, d| w.max(omega(d, &v).abs()))
    }

    /// Norm of the mean curvature vector of `φ` in the sphere, with second
    /// derivatives from central differences of the analytic first ones.
    pub fn mean_curvature_residual(&self, u: &[f64]) -> f64 {
        let d = self.m - 1;
        let h = 1e-4;
        let v = self.eval(u);
        let d1 = self.derivatives(u);
        let g = DMatrix::from_fn(d, d, |a, b| re_dot(&d1[a], &d1[b]));
        let gi = g.clone().try_inverse().expect("immersion");
        let mut lap = vec![Complex64::new(0.0, 0.0); self.m];
        for k in 0..d {
            let mut p = u.to_vec();
            p[k] += h;
            let mut q = u.to_vec();
            q[k] -= h;
            let (dp, dq) = (self.derivatives(&p), self.derivatives(&q));
            for l in 0..d {
                for j in 0..self.m {
                    lap[j] += (dp[l][j] - dq[l][j]) / (2.0 * h) * gi[(k, l)];
                }
            }
        }
        // sphere normal: the position vector
        let r = re_dot(&lap, &v);
        for j in 0..self.m {
            lap[j] -= v[j] * r;
        }
        // tangent part
        let t = DVector::from_fn(d, |a, _| re_dot(&lap, &d1[a]));
        let coef = &gi * t;
        for a in 0..d {
            for j in 0..self.m {
                lap[j] -= d1[a][j] * coef[a];
            }
        }
        re_dot(&lap, &lap).sqrt() / d as f64
    }
}

impl LegendrianMap for CliffordLegendrian {
    fn target_dim(&self) -> usize {
        self.m
    }

    fn eval(&self, u: &[f64]) -> Vec<Complex64> {
        let s = 1.0 / (self.m as f64).sqrt();
        self.phases
            .iter()
            .map(|a| {
                let t: f64 = a.iter().zip(u).map(|(&k, x)| k as f64 * x).sum();
                Complex64::from_polar(s, t)
            })
            .collect()
    }

    fn derivatives(&self, u: &[f64]) -> Vec<Vec<Complex64>> {
        let v = self.eval(u);
        (0..self.m - 1)
            .map(|k| {
                self.phases
                    .iter()
                    .zip(&v)
                    .map(|(a, z)| z * Complex64::new(0.0, a[k] as f64))
                    .collect()
            })
            .collect()
    }
}

/// The flat Clifford torus in `S^{2m-1}`, checked for horizontality and
/// minimality at a few sample points on construction.
pub fn clifford_legendrian(m: usize) -> Result<CliffordLegendrian> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("Clifford Legendrian needs m >= 2, got {m}")));
    }
    let mut phases: Vec<Vec<i64>> = (0..m - 1)
        .map(|j| (0..m - 1).map(|k| i64::from(j == k)).collect())
        .collect();
    phases.push(vec![-1; m - 1]);
    let phi = CliffordLegendrian { m, phases };
    let mut rng = rng_for(0x1e9e, m as u64);
    for _ in 0..8 {
        let u: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let hz = phi.horizontality_residual(&u);
        if !(hz < 1e-10) {
            return Err(Error::NotHorizontal(hz));
        }
        let mc = phi.mean_curvature_residual(&u);
        if !(mc < 1e-6) {
            return Err(Error::InvalidInput(format!("Legendrian torus is not minimal: |H| = {mc:e}")));
        }
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_case() {
        let p = clifford_legendrian(2).unwrap();
        assert_eq!(p.phases(), &[vec![1], vec![-1]]);
        let v = p.eval(&[0.7]);
        let s = 0.5f64.sqrt();
        assert!((v[0] - Complex64::from_polar(s, 0.7)).norm() < 1e-15);
        assert!((v[1] - Complex64::from_polar(s, -0.7)).norm() < 1e-15);
        assert_eq!(p.horizontality_residual(&[0.7]), 0.0);
    }

    #[test]
    fn tori_are_horizontal_and_minimal() {
        let mut rng = rng_for(4, 0);
        for m in 2..=5 {
            let p = clifford_legendrian(m).unwrap();
            for _ in 0..20 {
                let u: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(-3.0..3.0)).collect();
                assert!(p.horizontality_residual(&u) < 1e-10);
                assert!(p.mean_curvature_residual(&u) < 1e-6);
                let v = p.eval(&u);
                assert!((re_dot(&v, &v) - 1.0).abs() < 1e-14);
            }
        }
        assert!(clifford_legendrian(1).is_err());
    }
}
