//! The Berger-sphere example: intrinsic data on `S³ ⊂ ℝ⁴` and a horizontal
//! realization in `S⁷` as an `SU(2)`-orbit of binary cubics.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Ambient, ImmersionChart};
use crate::error::{Error, Result};
use crate::lagrangian::CubicField;

/// `X_i(y) = M_i y` with `M_i² = -I`.
const M: [[[f64; 4]; 4]; 3] = [
    // (y2, -y1, y4, -y3)
    [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]],
    // (y3, -y4, -y1, y2)
    [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, -1.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]],
    // (y4, y3, -y2, -y1)
    [[0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0], [0.0, -1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]],
];

fn apply(m: &[[f64; 4]; 4], y: &[f64]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (i, row) in m.iter().enumerate() {
        out[i] = row.iter().zip(y).map(|(a, b)| a * b).sum();
    }
    out
}

/// Metric `diag(3, 3, 9)` and `α(X_1,X_1) = 2X_1`, `α(X_1,X_2) = -2X_2`,
/// `α(X_2,X_2) = -2X_1` on the frame `X_1, X_2, X_3`; `c = 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExoticS3Field;

pub fn exotic_s3_field() -> ExoticS3Field {
    ExoticS3Field
}

impl CubicField for ExoticS3Field {
    fn dim(&self) -> usize {
        3
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: p.len() });
        }
        let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (r - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("point is off the unit sphere: |y| = {r}")));
        }
        Ok(())
    }

    fn gram(&self, _p: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 3.0, 9.0]))
    }

    fn alpha(&self, _p: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; 27];
        let at = |i: usize, j: usize, k: usize| (i * 3 + j) * 3 + k;
        a[at(0, 0, 0)] = 2.0;
        a[at(0, 1, 1)] = -2.0;
        a[at(1, 0, 1)] = -2.0;
        a[at(1, 1, 0)] = -2.0;
        a
    }

    fn bracket(&self, p: &[f64]) -> Vec<f64> {
        // [X_i, X_j] = (M_j M_i - M_i M_j) y; the X_k are orthonormal in ℝ⁴
        // along the unit sphere
        let x: Vec<[f64; 4]> = M.iter().map(|m| apply(m, p)).collect();
        let mut b = vec![0.0; 27];
        for i in 0..3 {
            for j in 0..3 {
                let a = apply(&M[j], &x[i]);
                let c = apply(&M[i], &x[j]);
                for k in 0..3 {
                    b[(i * 3 + j) * 3 + k] = (0..4).map(|l| (a[l] - c[l]) * x[k][l]).sum();
                }
            }
        }
        b
    }

    fn flow(&self, p: &[f64], i: usize, t: f64) -> Vec<f64> {
        let m = apply(&M[i], p);
        p.iter().zip(m).map(|(y, z)| t.cos() * y + t.sin() * z).collect()
    }
}

/// `exp(Σ u_i ξ_i)` for the quaternion basis `ξ` of `su(2)`.
fn su2_exp(u: &[f64]) -> [[Complex64; 2]; 2] {
    let r = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let (c, s) = if r < 1e-300 { (1.0, 1.0) } else { (r.cos(), r.sin() / r) };
    let z = Complex64::new;
    [
        [z(c, s * u[0]), z(s * u[1], s * u[2])],
        [z(-s * u[1], s * u[2]), z(c, -s * u[0])],
    ]
}

fn mul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Horizontal immersion of `S³ ≅ SU(2)` into `S⁷`: the orbit of the cubic
/// `(x³ + y³)/√2` in the unitary basis `x³, √3x²y, √3xy², y³`, charted as
/// `g = g₀ exp(Σ u_i ξ_i)` with `g₀ = exp(Σ base_i ξ_i)`.
pub fn exotic_s3_lift(base: [f64; 3]) -> ImmersionChart {
    let g0 = su2_exp(&base);
    ImmersionChart::new(3, Ambient::Sphere, move |u: &[f64]| {
        let g = mul(&g0, &su2_exp(u));
        let (a, b, c, d) = (g[0][0], g[0][1], g[1][0], g[1][1]);
        let s3 = 3f64.sqrt();
        let k = 0.5f64.sqrt();
        Ok(vec![
            (a * a * a + b * b * b) * k,
            (a * a * c + b * b * d) * (s3 * k),
            (a * c * c + b * d * d) * (s3 * k),
            (c * c * c + d * d * d) * k,
        ])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::scalar_tau;
    use crate::gallery::{horizontality, induced_data_horizontal, omega_pullback};
    use crate::lagrangian::{compatibility_report, gauss_curvature, mean_curvature, IntrinsicGeometry};

    #[test]
    fn brackets_match_table() {
        let f = exotic_s3_field();
        let y = [0.5, -0.5, 0.5, 0.5];
        let b = f.bracket(&y);
        let at = |i: usize, j: usize, k: usize| b[(i * 3 + j) * 3 + k];
        assert!((at(0, 1, 2) - 2.0).abs() < 1e-15);
        assert!((at(0, 2, 1) + 2.0).abs() < 1e-15);
        assert!((at(1, 2, 0) - 2.0).abs() < 1e-15);
        assert!(f.check_point(&[1.0, 0.0, 0.0, 0.1]).is_err());
    }

    #[test]
    fn intrinsic_data_is_constant_form() {
        let f = exotic_s3_field();
        let p = [0.1f64, 0.7, -0.5, 0.3];
        let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        let p: Vec<f64> = p.iter().map(|x| x / r).collect();
        let geo = IntrinsicGeometry::at(&f, &p).unwrap();
        let h = geo.cubic_form();
        assert!(h.max_abs_diff(&crate::lagrangian::exotic_s3_form()) < 1e-14);
        let rep = compatibility_report(&f, 1.0, &[p]).unwrap();
        assert!(rep.max() < 1e-6, "{rep:?}");
    }

    #[test]
    fn lift_reproduces_intrinsic_data() {
        let chart = exotic_s3_lift([0.3, 0.5, -0.2]);
        for u in [[0.0; 3], [0.1, -0.2, 0.05]] {
            assert!(horizontality(&chart, &u).unwrap() < 1e-6);
            assert!(omega_pullback(&chart, &u).unwrap() < 1e-6);
            let e = induced_data_horizontal(&chart, &u).unwrap();
            let tau = scalar_tau(&gauss_curvature(&e.data));
            assert!((tau - 1.0 / 3.0).abs() < 1e-4, "{tau}");
            assert!(mean_curvature(&e.data.h).1 < 1e-8);
        }
    }
}
