//! Dense curvature tensors in orthonormal frames.
//!
//! Sign conventions are fixed in [`crate::conventions`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest dimension the dense rank-4 storage is meant for.
pub const MAX_DIM: usize = 12;

/// Riemann tensor components `R_ABCD` in an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> CurvatureTensor<T> {
    pub fn zeros(n: usize) -> Self {
        CurvatureTensor {
            n,
            data: vec![T::zero(); n * n * n * n],
        }
    }

    /// Space form of constant sectional curvature `c`.
    pub fn constant(n: usize, c: T) -> Self {
        Self::from_fn(n, |a, b, cc, d| {
            let kd = |i: usize, j: usize| if i == j { T::one() } else { T::zero() };
            c * (kd(a, d) * kd(b, cc) - kd(a, cc) * kd(b, d))
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n * n * n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        data.push(f(a, b, c, d));
                    }
                }
            }
        }
        CurvatureTensor { n, data }
    }

    /// Wraps raw row-major components. The caller is responsible for the
    /// Riemann symmetries; see [`CurvatureTensor::symmetry_defect`].
    pub fn from_components(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n * n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n * n * n,
                got: data.len(),
            });
        }
        Ok(CurvatureTensor { n, data })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> T {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d]
    }

    #[inline]
    pub fn components(&self) -> &[T] {
        &self.data
    }

    /// Largest violation of the pair antisymmetries, pair symmetry and the
    /// first Bianchi identity.
    pub fn symmetry_defect(&self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let r = self.get(a, b, c, d);
                        let devs = [
                            r + self.get(b, a, c, d),
                            r + self.get(a, b, d, c),
                            r - self.get(c, d, a, b),
                            r + self.get(b, c, a, d) + self.get(c, a, b, d),
                        ];
                        for x in devs {
                            worst = worst.max(x.abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// `R(u, v, v, u)` without normalization.
    pub fn quad(&self, u: &[T], v: &[T]) -> T {
        let n = self.n;
        let mut acc = T::zero();
        for a in 0..n {
            if u[a] == T::zero() {
                continue;
            }
            for b in 0..n {
                if v[b] == T::zero() {
                    continue;
                }
                let uv = u[a] * v[b];
                for c in 0..n {
                    if v[c] == T::zero() {
                        continue;
                    }
                    let uvv = uv * v[c];
                    let base = ((a * n + b) * n + c) * n;
                    for d in 0..n {
                        acc += uvv * u[d] * self.data[base + d];
                    }
                }
            }
        }
        acc
    }

    /// The symmetric matrix `M_AD = Σ_BC R_ABCD v_B v_C`, so that
    /// `R(u,v,v,u) = uᵀ M u`.
    pub fn contract_middle(&self, v: &[T], out: &mut [T]) {
        let n = self.n;
        out.iter_mut().for_each(|x| *x = T::zero());
        for a in 0..n {
            for b in 0..n {
                let vb = v[b];
                if vb == T::zero() {
                    continue;
                }
                for c in 0..n {
                    let w = vb * v[c];
                    if w == T::zero() {
                        continue;
                    }
                    let base = ((a * n + b) * n + c) * n;
                    let row = &mut out[a * n..(a + 1) * n];
                    for d in 0..n {
                        row[d] += w * self.data[base + d];
                    }
                }
            }
        }
    }

    /// Frame change by the plane rotation `e_i ↦ c e_i + s e_j`,
    /// `e_j ↦ -s e_i + c e_j`, applied to all four slots.
    pub(crate) fn givens(&self, i: usize, j: usize, c: T, s: T) -> Self {
        assert!(i < j && j < self.n, "givens plane must satisfy i < j < n");
        let n = self.n;
        let mut data = self.data.clone();
        let strides = [n * n * n, n * n, n, 1];
        for stride in strides {
            for base in 0..data.len() {
                if (base / stride) % n != i {
                    continue;
                }
                let (pi, pj) = (base, base + (j - i) * stride);
                let (x, y) = (data[pi], data[pj]);
                data[pi] = c * x + s * y;
                data[pj] = -s * x + c * y;
            }
        }
        CurvatureTensor { n, data }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt()
    }
}

/// A metric on a coordinate basis together with an orthonormal frame for it.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFrame<T: Real> {
    /// Inner products of the coordinate basis vectors.
    pub gram: DMatrix<T>,
    /// Columns express orthonormal frame vectors in the coordinate basis.
    pub frame: DMatrix<T>,
}

impl<T: Real> MetricFrame<T> {
    pub fn n(&self) -> usize {
        self.gram.nrows()
    }

    /// `max |frameᵀ · gram · frame - I|`.
    pub fn residual(&self) -> T {
        let m = self.frame.transpose() * &self.gram * &self.frame;
        max_identity_deviation(&m)
    }
}

pub(crate) fn max_identity_deviation<T: Real>(m: &DMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((m[(i, j)] - target).abs());
        }
    }
    worst
}

fn symmetry_tolerance<T: Real>(m: &DMatrix<T>) -> T {
    let scale = m.iter().fold(T::one(), |s, x| s.max(x.abs()));
    T::eps().sqrt() * scale
}

/// Orthonormalizes the standard basis with respect to `gram`, processing
/// basis vectors in index order with one re-orthogonalization pass.
pub fn gram_schmidt<T: Real>(gram: &DMatrix<T>) -> Result<MetricFrame<T>> {
    let n = gram.nrows();
    if gram.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: gram.ncols(),
        });
    }
    let asym = (gram - gram.transpose()).amax();
    if asym > symmetry_tolerance(gram) {
        return Err(Error::NotSymmetric(asym.as_f64()));
    }
    let scale = (0..n).fold(T::zero(), |s, i| s.max(gram[(i, i)].abs()));
    let floor = T::eps() * T::lit(64.0) * scale.max(T::tiny());
    let ip = |x: &DVector<T>, y: &DVector<T>| (gram * y).dot(x);

    let mut cols: Vec<DVector<T>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = DVector::from_fn(n, |i, _| if i == j { T::one() } else { T::zero() });
        for _pass in 0..2 {
            for f in &cols {
                let p = ip(&v, f);
                v.axpy(-p, f, T::one());
            }
        }
        let norm2 = ip(&v, &v);
        if !(norm2 > floor) {
            return Err(Error::NotPositiveDefinite { minor: j + 1 });
        }
        v /= norm2.sqrt();
        cols.push(v);
    }
    Ok(MetricFrame {
        gram: gram.clone(),
        frame: DMatrix::from_columns(&cols),
    })
}

/// Sectional curvature of the plane spanned by `u` and `v`.
pub fn sectional_curvature<T: Real>(r: &CurvatureTensor<T>, u: &[T], v: &[T]) -> Result<T> {
    let n = r.n();
    if u.len() != n || v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.len().min(v.len()),
        });
    }
    let uu: T = u.iter().fold(T::zero(), |s, x| s + *x * *x);
    let vv: T = v.iter().fold(T::zero(), |s, x| s + *x * *x);
    let uv: T = u.iter().zip(v).fold(T::zero(), |s, (x, y)| s + *x * *y);
    let area2 = uu * vv - uv * uv;
    if area2 < T::lit(1e-14).max(T::eps() * T::lit(16.0)) * (uu * vv).max(T::one()) {
        return Err(Error::DegeneratePlane(area2.as_f64()));
    }
    Ok(r.quad(u, v) / area2)
}

/// `τ = Σ_{i<j} R_ijji` in the frame of the tensor.
pub fn scalar_tau<T: Real>(r: &CurvatureTensor<T>) -> T {
    let n = r.n();
    let mut tau = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            tau += r.get(i, j, j, i);
        }
    }
    tau
}

pub(crate) fn check_orthonormal<T: Real>(vectors: &[&[T]], tol: T) -> Result<()> {
    let mut worst = T::zero();
    for (i, x) in vectors.iter().enumerate() {
        for (j, y) in vectors.iter().enumerate().skip(i) {
            let d: T = x.iter().zip(y.iter()).fold(T::zero(), |s, (a, b)| s + *a * *b);
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((d - target).abs());
        }
    }
    if worst > tol {
        return Err(Error::NotOrthonormal(worst.as_f64()));
    }
    Ok(())
}

fn frame_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::eps() * T::lit(1e3))
}

/// Scalar curvature of the subspace spanned by an orthonormal basis.
pub fn tau_subspace<T: Real>(r: &CurvatureTensor<T>, basis: &[DVector<T>]) -> Result<T> {
    let n = r.n();
    let k = basis.len();
    if k < 2 || k > n {
        return Err(Error::DimensionMismatch { expected: n, got: k });
    }
    if let Some(bad) = basis.iter().find(|b| b.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    let slices: Vec<&[T]> = basis.iter().map(|b| b.as_slice()).collect();
    check_orthonormal(&slices, frame_tolerance())?;
    let mut tau = T::zero();
    for a in 0..k {
        for b in (a + 1)..k {
            tau += r.quad(slices[a], slices[b]);
        }
    }
    Ok(tau)
}

/// Expresses `r` in the frame given by the columns of the orthogonal matrix `q`:
/// `R'_abcd = Σ R_ABCD q_Aa q_Bb q_Cc q_Dd`.
pub fn rotate_tensor<T: Real>(r: &CurvatureTensor<T>, q: &DMatrix<T>) -> Result<CurvatureTensor<T>> {
    let n = r.n();
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q.nrows().max(q.ncols()),
        });
    }
    let dev = max_identity_deviation(&(q.transpose() * q));
    if dev > frame_tolerance() {
        return Err(Error::NotOrthogonal(dev.as_f64()));
    }
    Ok(rotate_unchecked(r, q))
}

/// Contracts one index slot at a time (four passes of `n^5`).
pub(crate) fn rotate_unchecked<T: Real>(r: &CurvatureTensor<T>, q: &DMatrix<T>) -> CurvatureTensor<T> {
    let n = r.n();
    let mut cur = r.data.clone();
    let mut next = vec![T::zero(); cur.len()];
    let n3 = n * n * n;
    // Each pass transforms the leading index and rotates it to the back, so
    // after four passes the original index order is restored.
    for _ in 0..4 {
        for a in 0..n {
            for rest in 0..n3 {
                let mut acc = T::zero();
                for big_a in 0..n {
                    acc += q[(big_a, a)] * cur[big_a * n3 + rest];
                }
                next[rest * n + a] = acc;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    CurvatureTensor { n, data: cur }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn exotic() -> CurvatureTensor<f64> {
        crate::lagrangian::gauss_curvature(&crate::lagrangian::exotic_s3_point::<f64>())
    }

    #[test]
    fn gram_schmidt_identity_and_berger() {
        let id = DMatrix::<f64>::identity(3, 3);
        let f = gram_schmidt(&id).unwrap();
        assert_eq!(f.frame, id);

        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 3.0, 9.0]));
        let f = gram_schmidt(&g).unwrap();
        let expect = [1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt(), 1.0 / 3.0];
        for i in 0..3 {
            for j in 0..3 {
                let t = if i == j { expect[i] } else { 0.0 };
                assert_abs_diff_eq!(f.frame[(i, j)], t, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn gram_schmidt_rejects_bad_input() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(gram_schmidt(&g), Err(Error::NotPositiveDefinite { minor: 2 }));
        let g = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        assert_eq!(gram_schmidt(&g), Err(Error::NotPositiveDefinite { minor: 1 }));
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(gram_schmidt(&g), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn constant_curvature_values() {
        let r = CurvatureTensor::constant(4, 1.0);
        assert_abs_diff_eq!(r.symmetry_defect(), 0.0);
        let k = sectional_curvature(&r, &[1.0, 2.0, 0.0, 0.5], &[0.0, 1.0, 3.0, -1.0]).unwrap();
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-14);
        let r = CurvatureTensor::constant(5, -0.5);
        assert_abs_diff_eq!(scalar_tau(&r), 5.0 * 4.0 * -0.5 / 2.0, epsilon = 1e-14);
        let basis: Vec<DVector<f64>> = (0..3)
            .map(|i| DVector::from_fn(5, |j, _| if i == j { 1.0 } else { 0.0 }))
            .collect();
        assert_abs_diff_eq!(tau_subspace(&r, &basis).unwrap(), 3.0 * -0.5, epsilon = 1e-14);
    }

    #[test]
    fn exotic_plane_curvatures() {
        let r = exotic();
        let e = |i: usize| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        assert_abs_diff_eq!(sectional_curvature(&r, &e(0), &e(1)).unwrap(), -5.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sectional_curvature(&r, &e(0), &e(2)).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(scalar_tau(&r), 1.0 / 3.0, epsilon = 1e-14);
        // K(2u, v) = K(u, v)
        let u = [0.3, -1.2, 0.7];
        let v = [1.1, 0.4, -0.2];
        let u2 = [0.6, -2.4, 1.4];
        assert_abs_diff_eq!(
            sectional_curvature(&r, &u, &v).unwrap(),
            sectional_curvature(&r, &u2, &v).unwrap(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn degenerate_plane_and_bad_basis() {
        let r = CurvatureTensor::constant(3, 1.0);
        assert!(matches!(
            sectional_curvature(&r, &[1.0, 0.0, 0.0], &[2.0, 0.0, 0.0]),
            Err(Error::DegeneratePlane(_))
        ));
        let basis = vec![
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![1.0, 1.0, 0.0]),
        ];
        assert!(matches!(tau_subspace(&r, &basis), Err(Error::NotOrthonormal(_))));
    }

    #[test]
    fn rotation_identity_and_rejection() {
        let r = exotic();
        let id = DMatrix::identity(3, 3);
        assert_eq!(rotate_tensor(&r, &id).unwrap().max_abs_diff(&r), 0.0);
        let bad = DMatrix::from_element(3, 3, 0.5);
        assert!(matches!(rotate_tensor(&r, &bad), Err(Error::NotOrthogonal(_))));
    }

    #[test]
    fn f32_instantiation() {
        let r = CurvatureTensor::<f32>::constant(3, 2.0);
        assert!((scalar_tau(&r) - 6.0).abs() < 1e-6);
        let f = gram_schmidt(&DMatrix::<f32>::from_diagonal_element(3, 3, 4.0)).unwrap();
        assert!(f.residual() < 1e-6);
    }
}
