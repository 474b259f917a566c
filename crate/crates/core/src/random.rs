//! Seeded sampling of frames, curvature tensors and cubic forms.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, stream)`, so results
//! do not depend on scheduling.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::frame::CurvatureTensor;
use crate::lagrangian::CubicForm;
use crate::scalar::Real;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// diagonal of `R` made positive).
pub fn haar_orthogonal<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<T> {
    let g = DMatrix::from_fn(n, n, |_, _| T::lit(normal(rng)));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random symmetric matrix with standard normal entries on and above the diagonal.
pub fn symmetric_normal<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<T> {
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = T::lit(normal(rng));
            s[(i, j)] = x;
            s[(j, i)] = x;
        }
    }
    s
}

/// Algebraic curvature tensor `Σ_m ε_m (S_BC S_AD - S_AC S_BD)` from `terms`
/// random symmetric matrices with random signs.
pub fn random_curvature<T: Real, R: Rng + ?Sized>(
    n: usize,
    terms: usize,
    rng: &mut R,
) -> CurvatureTensor<T> {
    let mats: Vec<(T, DMatrix<T>)> = (0..terms)
        .map(|_| {
            let sign = if rng.gen_bool(0.5) { T::one() } else { -T::one() };
            (sign, symmetric_normal(n, rng))
        })
        .collect();
    CurvatureTensor::from_fn(n, |a, b, c, d| {
        mats.iter().fold(T::zero(), |acc, (e, s)| {
            acc + *e * (s[(b, c)] * s[(a, d)] - s[(a, c)] * s[(b, d)])
        })
    })
}

/// Cubic form with one independent standard normal per sorted triple.
pub fn random_cubic<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CubicForm<T> {
    let mut h = CubicForm::zeros(n);
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                h.set(a, b, c, T::lit(normal(rng)));
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::max_identity_deviation;

    #[test]
    fn haar_is_orthogonal_and_reproducible() {
        let q: DMatrix<f64> = haar_orthogonal(5, &mut rng_for(3, 1));
        assert!(max_identity_deviation(&(q.transpose() * &q)) < 1e-13);
        let q2: DMatrix<f64> = haar_orthogonal(5, &mut rng_for(3, 1));
        assert_eq!(q, q2);
        let q3: DMatrix<f64> = haar_orthogonal(5, &mut rng_for(3, 2));
        assert_ne!(q, q3);
    }

    #[test]
    fn random_tensor_has_symmetries() {
        let r: CurvatureTensor<f64> = random_curvature(5, 3, &mut rng_for(1, 0));
        assert!(r.symmetry_defect() < 1e-12);
        assert!(r.frobenius_norm() > 0.1);
    }
}
