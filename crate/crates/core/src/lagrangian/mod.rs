//! Pointwise Lagrangian data: the totally symmetric cubic form `h^A_BC`, the
//! curvature it induces through the Gauss equation, and mean curvature.

mod compat;

pub use compat::{
    compatibility_report, intrinsic_curvature_at, CompatibilityReport, CubicField, FlatConstantField,
    IntrinsicGeometry,
    PerturbedField,
};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::CurvatureTensor;
use crate::scalar::Real;

/// Totally symmetric cubic form, one stored value per sorted index triple.
///
/// Indices are 0-based; reads of any permutation return the same value.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicForm<T> {
    n: usize,
    coeffs: BTreeMap<[usize; 3], T>,
}

#[inline]
fn sorted(a: usize, b: usize, c: usize) -> [usize; 3] {
    let mut t = [a, b, c];
    t.sort_unstable();
    t
}

impl<T: Real> CubicForm<T> {
    pub fn zeros(n: usize) -> Self {
        CubicForm {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> T {
        self.coeffs.get(&sorted(a, b, c)).copied().unwrap_or_else(T::zero)
    }

    /// Sets the value of the triple and all of its permutations.
    pub fn set(&mut self, a: usize, b: usize, c: usize, value: T) {
        assert!(a < self.n && b < self.n && c < self.n, "cubic index out of range");
        let key = sorted(a, b, c);
        if value == T::zero() {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, value);
        }
    }

    /// Non-zero stored entries as `(sorted 0-based triple, value)`.
    pub fn entries(&self) -> impl Iterator<Item = ([usize; 3], T)> + '_ {
        self.coeffs.iter().map(|(k, v)| (*k, *v))
    }

    /// Dense mirror `d[(a*n + b)*n + c]`.
    pub fn dense(&self) -> Vec<T> {
        let n = self.n;
        let mut d = vec![T::zero(); n * n * n];
        for (&[a, b, c], &v) in &self.coeffs {
            for [i, j, k] in permutations(a, b, c) {
                d[(i * n + j) * n + k] = v;
            }
        }
        d
    }

    /// Builds a form from a dense array that is assumed symmetric; the value
    /// at the sorted position is kept.
    pub fn from_dense(n: usize, d: &[T]) -> Self {
        let mut f = CubicForm::zeros(n);
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    f.set(a, b, c, d[(a * n + b) * n + c]);
                }
            }
        }
        f
    }

    /// Averages a raw (possibly asymmetric) dense array over permutations and
    /// returns the form together with the largest permutation disagreement.
    pub fn symmetrize_dense(n: usize, d: &[T]) -> (Self, T) {
        let mut f = CubicForm::zeros(n);
        let mut worst = T::zero();
        let six = T::lit(6.0);
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    let vals = permutations(a, b, c).map(|[i, j, k]| d[(i * n + j) * n + k]);
                    let mean = vals.iter().fold(T::zero(), |s, x| s + *x) / six;
                    for x in vals {
                        worst = worst.max((x - mean).abs());
                    }
                    f.set(a, b, c, mean);
                }
            }
        }
        (f, worst * T::lit(2.0))
    }

    /// Same form expressed in the frame given by the columns of `q`:
    /// `h'_abc = Σ h_ABC q_Aa q_Bb q_Cc`.
    pub fn rotate(&self, q: &DMatrix<T>) -> Self {
        let n = self.n;
        let mut cur = self.dense();
        let mut next = vec![T::zero(); cur.len()];
        let n2 = n * n;
        for _ in 0..3 {
            for a in 0..n {
                for rest in 0..n2 {
                    let mut acc = T::zero();
                    for big in 0..n {
                        acc += q[(big, a)] * cur[big * n2 + rest];
                    }
                    next[rest * n + a] = acc;
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        CubicForm::from_dense(n, &cur)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for (k, v) in &self.coeffs {
            worst = worst.max((*v - other.get(k[0], k[1], k[2])).abs());
        }
        for (k, v) in &other.coeffs {
            worst = worst.max((*v - self.get(k[0], k[1], k[2])).abs());
        }
        worst
    }

    /// `Σ_{ABC} (h^A_BC)²` over all index orderings.
    pub fn squared_norm(&self) -> T {
        self.dense()
            .iter().fold(T::zero(), |s, x| s + *x * *x)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut f = self.clone();
        for v in f.coeffs.values_mut() {
            *v *= s;
        }
        f
    }

    pub fn cast<U: Real>(&self) -> CubicForm<U> {
        CubicForm {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (*k, U::lit(v.as_f64())))
                .collect(),
        }
    }
}

pub(crate) fn permutations(a: usize, b: usize, c: usize) -> [[usize; 3]; 6] {
    [
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ]
}

/// Checks raw 1-based `(A, B, C, value)` entries for consistency across
/// permutations and stores each triple once. Missing triples are zero.
pub fn validate_cubic<T: Real>(n: usize, raw: &[([usize; 3], T)]) -> Result<CubicForm<T>> {
    let tol = T::lit(1e-12);
    let mut seen: BTreeMap<[usize; 3], T> = BTreeMap::new();
    for &(idx, value) in raw {
        for &i in &idx {
            if i == 0 || i > n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
        }
        let key = sorted(idx[0] - 1, idx[1] - 1, idx[2] - 1);
        if let Some(prev) = seen.get(&key) {
            if (*prev - value).abs() > tol {
                return Err(Error::SymmetryViolation {
                    a: key[0] + 1,
                    b: key[1] + 1,
                    c: key[2] + 1,
                    first: prev.as_f64(),
                    second: value.as_f64(),
                });
            }
        } else {
            seen.insert(key, value);
        }
    }
    let mut form = CubicForm::zeros(n);
    for (k, v) in seen {
        form.set(k[0], k[1], k[2], v);
    }
    Ok(form)
}

/// Cubic form, ambient constant `c` and provenance of a Lagrangian point,
/// with the metric equal to the identity in the adapted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianPointData<T> {
    pub n: usize,
    /// The ambient space has constant holomorphic sectional curvature `4c`.
    pub c: T,
    pub h: CubicForm<T>,
    pub provenance: Option<String>,
}

impl<T: Real> LagrangianPointData<T> {
    pub fn new(c: T, h: CubicForm<T>) -> Result<Self> {
        if h.n() < 2 {
            return Err(Error::InvalidInput(format!("dimension {} < 2", h.n())));
        }
        if !c.is_finite() {
            return Err(Error::InvalidInput("c is not finite".into()));
        }
        Ok(LagrangianPointData {
            n: h.n(),
            c,
            h,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, tag: impl Into<String>) -> Self {
        self.provenance = Some(tag.into());
        self
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPointData {
    n: usize,
    c: f64,
    h: Vec<(usize, usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

impl LagrangianPointData<f64> {
    /// Parses `{"n": int, "c": real, "h": [[A,B,C,value], ...]}` with 1-based
    /// indices. serde_json errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawPointData =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let entries: Vec<([usize; 3], f64)> =
            raw.h.iter().map(|&(a, b, c, v)| ([a, b, c], v)).collect();
        let h = validate_cubic(raw.n, &entries)?;
        if raw.n < 2 {
            return Err(Error::InvalidInput(format!("field `n`: {} < 2", raw.n)));
        }
        let mut d = LagrangianPointData::new(raw.c, h)?;
        d.provenance = raw.provenance;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        let raw = RawPointData {
            n: self.n,
            c: self.c,
            h: self
                .h
                .entries()
                .map(|([a, b, c], v)| (a + 1, b + 1, c + 1, v))
                .collect(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("point data serializes")
    }
}

/// Curvature tensor of the point via the Gauss equation.
pub fn gauss_curvature<T: Real>(data: &LagrangianPointData<T>) -> CurvatureTensor<T> {
    let n = data.n;
    let h = data.h.dense();
    let at = |e: usize, a: usize, b: usize| h[(e * n + a) * n + b];
    let c = data.c;
    CurvatureTensor::from_fn(n, |x, y, z, w| {
        let mut s = T::zero();
        for e in 0..n {
            s += at(e, y, z) * at(e, x, w) - at(e, x, z) * at(e, y, w);
        }
        let kd = |i: usize, j: usize| if i == j { T::one() } else { T::zero() };
        s + c * (kd(x, w) * kd(y, z) - kd(x, z) * kd(y, w))
    })
}

/// Mean curvature components `H^A = (1/n) Σ_B h^A_BB` and `H²`.
pub fn mean_curvature<T: Real>(h: &CubicForm<T>) -> (DVector<T>, T) {
    let n = h.n();
    let inv = T::one() / T::count(n);
    let v = DVector::from_fn(n, |a, _| (0..n).fold(T::zero(), |s, b| s + h.get(a, b, b)) * inv);
    let h2 = v.dot(&v);
    (v, h2)
}

/// `τ = Σ_A Σ_{B<C} (h^A_BB h^A_CC - (h^A_BC)²) + c n(n-1)/2`.
pub fn tau_from_cubic<T: Real>(data: &LagrangianPointData<T>) -> T {
    let n = data.n;
    let h = &data.h;
    let mut tau = T::zero();
    for a in 0..n {
        for b in 0..n {
            for c in (b + 1)..n {
                let hbc = h.get(a, b, c);
                tau += h.get(a, b, b) * h.get(a, c, c) - hbc * hbc;
            }
        }
    }
    tau + data.c * T::count(n * (n - 1)) / T::lit(2.0)
}

/// Cubic form of the exotic Berger sphere in the orthonormal frame
/// `X_1/√3, X_2/√3, X_3/3`.
pub fn exotic_s3_form<T: Real>() -> CubicForm<T> {
    let l = T::lit(2.0) / T::lit(3.0).sqrt();
    let mut h = CubicForm::zeros(3);
    h.set(0, 0, 0, l);
    h.set(0, 1, 1, -l);
    h
}

/// Exotic Berger sphere point data, `c = 1`.
pub fn exotic_s3_point<T: Real>() -> LagrangianPointData<T> {
    LagrangianPointData::new(T::one(), exotic_s3_form())
        .expect("valid data")
        .with_provenance("exotic-s3")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validate_empty_and_exotic() {
        let f = validate_cubic::<f64>(3, &[]).unwrap();
        assert_eq!(f, CubicForm::zeros(3));
        let l = 2.0 / 3f64.sqrt();
        let f = validate_cubic(3, &[([1, 1, 1], l), ([1, 2, 2], -l), ([2, 1, 2], -l)]).unwrap();
        for p in permutations(0, 1, 1) {
            assert_eq!(f.get(p[0], p[1], p[2]), -l);
        }
        assert_eq!(f, exotic_s3_form());
    }

    #[test]
    fn validate_rejects_conflicts_and_range() {
        let e = validate_cubic(3, &[([1, 1, 2], 1.0), ([1, 2, 1], 2.0)]).unwrap_err();
        assert!(matches!(e, Error::SymmetryViolation { a: 1, b: 1, c: 2, .. }));
        let e = validate_cubic(3, &[([1, 4, 2], 1.0)]).unwrap_err();
        assert_eq!(e, Error::IndexOutOfRange { index: 4, n: 3 });
    }

    #[test]
    fn gauss_totally_geodesic() {
        let d = LagrangianPointData::new(1.0, CubicForm::zeros(4)).unwrap();
        let r = gauss_curvature(&d);
        assert_abs_diff_eq!(r.max_abs_diff(&CurvatureTensor::constant(4, 1.0)), 0.0);
        assert_abs_diff_eq!(tau_from_cubic(&LagrangianPointData::new(1.0, CubicForm::zeros(3)).unwrap()), 3.0);
    }

    #[test]
    fn exotic_values() {
        let d = exotic_s3_point::<f64>();
        let (hv, h2) = mean_curvature(&d.h);
        assert_eq!(h2, 0.0);
        assert!(hv.iter().all(|x| *x == 0.0));
        assert_abs_diff_eq!(tau_from_cubic(&d), 1.0 / 3.0, epsilon = 1e-15);
        let r = gauss_curvature(&d);
        assert!(r.symmetry_defect() < 1e-15);
        assert_abs_diff_eq!(r.get(0, 1, 1, 0), -5.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.get(0, 2, 2, 0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.get(1, 2, 2, 1), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let d = exotic_s3_point::<f64>();
        let back = LagrangianPointData::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
        let e = LagrangianPointData::from_json("{\"n\": 3, \"c\": 1.0, \"h\": [[1,1]]}").unwrap_err();
        match e {
            Error::InvalidInput(msg) => assert!(msg.contains("line"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let e = LagrangianPointData::from_json("{\"n\": 3, \"h\": []}").unwrap_err();
        assert!(matches!(e, Error::InvalidInput(ref m) if m.contains("`c`")));
    }

    #[test]
    fn symmetrize_reports_defect() {
        let n = 2;
        let mut d = vec![0.0; 8];
        d[1] = 1.0;
        d[n] = 1.0;
        d[n * n] = 1.3;
        let (f, defect) = CubicForm::symmetrize_dense(n, &d);
        assert_abs_diff_eq!(f.get(0, 0, 1), 1.1, epsilon = 1e-15);
        assert!(defect > 0.2);
    }
}
