//! Numerical check of the three existence conditions for Lagrangian data
//! given by a metric and a `TM`-valued symmetric form `α` on a manifold
//! described through a global frame of vector fields `X_1..X_n`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{permutations, CubicForm, LagrangianPointData};
use crate::error::{Error, Result};
use crate::frame::{gram_schmidt, CurvatureTensor};

/// Metric and cubic data expressed in a global frame `X_1..X_n`.
///
/// Coefficient arrays are flattened as `[(i*n + j)*n + k]`.
pub trait CubicField: Sync {
    fn dim(&self) -> usize;

    /// Rejects points outside the field's domain.
    fn check_point(&self, p: &[f64]) -> Result<()>;

    /// `g(X_i, X_j)`.
    fn gram(&self, p: &[f64]) -> DMatrix<f64>;

    /// `α(X_i, X_j) = Σ_k a_ijk X_k`.
    fn alpha(&self, p: &[f64]) -> Vec<f64>;

    /// `[X_i, X_j] = Σ_k b_ijk X_k`, evaluated analytically.
    fn bracket(&self, p: &[f64]) -> Vec<f64>;

    /// Point reached by following `X_i` from `p` for time `t`.
    fn flow(&self, p: &[f64], i: usize, t: f64) -> Vec<f64>;

    /// Central-difference step along the flows.
    fn step(&self) -> f64 {
        1e-4
    }
}

/// Connection data in the Gram–Schmidt orthonormal frame `E_a = Σ_i P_ia X_i`.
#[derive(Debug, Clone)]
pub struct IntrinsicGeometry {
    pub n: usize,
    /// Columns are the orthonormal frame in `X` coordinates.
    pub frame: DMatrix<f64>,
    /// `c_ab^d = <[E_a, E_b], E_d>`.
    pub structure: Vec<f64>,
    /// `Γ_ab^d = <∇_{E_a} E_b, E_d>`.
    pub gamma: Vec<f64>,
    /// `T_bcd = g(α(E_b, E_c), E_d)`.
    pub cubic: Vec<f64>,
}

fn frame_at<F: CubicField + ?Sized>(field: &F, p: &[f64]) -> Result<DMatrix<f64>> {
    Ok(gram_schmidt(&field.gram(p))?.frame)
}

/// `X_l(f)` by central differences along the flow of `X_l`.
fn flow_derivative<F, G>(field: &F, p: &[f64], l: usize, h: f64, f: G) -> Result<Vec<f64>>
where
    F: CubicField + ?Sized,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let plus = f(&field.flow(p, l, h))?;
    let minus = f(&field.flow(p, l, -h))?;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect())
}

/// `E_a(f) = Σ_l P_la X_l(f)` for every `a`, returned as `out[a][..]`.
fn frame_derivatives<F, G>(
    field: &F,
    p: &[f64],
    frame: &DMatrix<f64>,
    h: f64,
    f: G,
) -> Result<Vec<Vec<f64>>>
where
    F: CubicField + ?Sized,
    G: Fn(&[f64]) -> Result<Vec<f64>> + Copy,
{
    let n = field.dim();
    let xl: Vec<Vec<f64>> = (0..n)
        .map(|l| flow_derivative(field, p, l, h, f))
        .collect::<Result<_>>()?;
    let len = xl[0].len();
    Ok((0..n)
        .map(|a| {
            (0..len)
                .map(|m| (0..n).map(|l| frame[(l, a)] * xl[l][m]).sum())
                .collect()
        })
        .collect())
}

impl IntrinsicGeometry {
    pub fn at<F: CubicField + ?Sized>(field: &F, p: &[f64]) -> Result<Self> {
        let h = field.step();
        if !(h > 1e-10) {
            return Err(Error::StepUnderflow(h));
        }
        field.check_point(p)?;
        let n = field.dim();
        let frame = frame_at(field, p)?;
        let inv = frame
            .clone()
            .try_inverse()
            .ok_or(Error::DegenerateMetric(0.0))?;
        let flat = |q: &[f64]| -> Result<Vec<f64>> { Ok(frame_at(field, q)?.as_slice().to_vec()) };
        // dp[l][(i, b)] = X_l(P_ib), column-major like nalgebra storage.
        let dp: Vec<Vec<f64>> = (0..n)
            .map(|l| flow_derivative(field, p, l, h, flat))
            .collect::<Result<_>>()?;
        let br = field.bracket(p);
        let mut structure = vec![0.0; n * n * n];
        let mut v = vec![0.0; n];
        for a in 0..n {
            for b in 0..n {
                v.iter_mut().for_each(|x| *x = 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let w = frame[(i, a)] * frame[(j, b)];
                        for k in 0..n {
                            v[k] += w * br[(i * n + j) * n + k];
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        v[j] += frame[(i, a)] * dp[i][j + b * n];
                        v[i] -= frame[(j, b)] * dp[j][i + a * n];
                    }
                }
                for d in 0..n {
                    structure[(a * n + b) * n + d] = (0..n).map(|k| inv[(d, k)] * v[k]).sum();
                }
            }
        }
        let s = |a: usize, b: usize, d: usize| structure[(a * n + b) * n + d];
        let mut gamma = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    gamma[(a * n + b) * n + d] = 0.5 * (s(a, b, d) - s(a, d, b) - s(b, d, a));
                }
            }
        }
        let al = field.alpha(p);
        let mut cubic = vec![0.0; n * n * n];
        for b in 0..n {
            for c in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let w = frame[(i, b)] * frame[(j, c)];
                        if w == 0.0 {
                            continue;
                        }
                        for k in 0..n {
                            let ak = al[(i * n + j) * n + k];
                            for d in 0..n {
                                cubic[(b * n + c) * n + d] += w * ak * inv[(d, k)];
                            }
                        }
                    }
                }
            }
        }
        Ok(IntrinsicGeometry {
            n,
            frame,
            structure,
            gamma,
            cubic,
        })
    }

    /// Symmetrized cubic form of `α` in the orthonormal frame.
    pub fn cubic_form(&self) -> CubicForm<f64> {
        let n = self.n;
        // h^d_bc = T_bcd; reorder to [d][b][c].
        let mut d3 = vec![0.0; n * n * n];
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    d3[(d * n + b) * n + c] = self.cubic[(b * n + c) * n + d];
                }
            }
        }
        CubicForm::symmetrize_dense(n, &d3).0
    }
}

/// Curvature of the metric from finite differences of the connection.
pub(crate) fn intrinsic_curvature<F: CubicField + ?Sized>(
    field: &F,
    p: &[f64],
    geo: &IntrinsicGeometry,
) -> Result<CurvatureTensor<f64>> {
    let n = geo.n;
    let h = field.step();
    let dg = frame_derivatives(field, p, &geo.frame, h, |q| {
        Ok(IntrinsicGeometry::at(field, q)?.gamma)
    })?;
    let g = |a: usize, b: usize, d: usize| geo.gamma[(a * n + b) * n + d];
    let s = |a: usize, b: usize, d: usize| geo.structure[(a * n + b) * n + d];
    Ok(CurvatureTensor::from_fn(n, |i, j, k, m| {
        let mut r = dg[i][(j * n + k) * n + m] - dg[j][(i * n + k) * n + m];
        for l in 0..n {
            r += g(j, k, l) * g(i, l, m) - g(i, k, l) * g(j, l, m) - s(i, j, l) * g(l, k, m);
        }
        r
    }))
}

/// Connection data at `p` and the curvature of the metric computed from it.
pub fn intrinsic_curvature_at<F: CubicField + ?Sized>(
    field: &F,
    p: &[f64],
) -> Result<(IntrinsicGeometry, CurvatureTensor<f64>)> {
    let geo = IntrinsicGeometry::at(field, p)?;
    let r = intrinsic_curvature(field, p, &geo)?;
    Ok((geo, r))
}

/// Maximum deviations of the three existence conditions over sample points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityReport {
    /// Total symmetry of `g(α(X,Y),Z)`.
    pub cubic_symmetry: f64,
    /// Total symmetry of `(∇α)(X,Y,Z)`.
    pub codazzi: f64,
    /// Intrinsic curvature against the Gauss reconstruction.
    pub gauss: f64,
    pub points: usize,
}

impl CompatibilityReport {
    pub fn max(&self) -> f64 {
        self.cubic_symmetry.max(self.codazzi).max(self.gauss)
    }
}

fn point_report<F: CubicField + ?Sized>(field: &F, c: f64, p: &[f64]) -> Result<[f64; 3]> {
    let n = field.dim();
    let geo = IntrinsicGeometry::at(field, p)?;
    let t = |b: usize, cc: usize, d: usize| geo.cubic[(b * n + cc) * n + d];

    let mut sym = 0.0f64;
    for b in 0..n {
        for cc in 0..n {
            for d in 0..n {
                let base = t(b, cc, d);
                for [x, y, z] in permutations(b, cc, d) {
                    sym = sym.max((t(x, y, z) - base).abs());
                }
            }
        }
    }

    let h = field.step();
    let dt = frame_derivatives(field, p, &geo.frame, h, |q| {
        Ok(IntrinsicGeometry::at(field, q)?.cubic)
    })?;
    let g = |a: usize, b: usize, d: usize| geo.gamma[(a * n + b) * n + d];
    let nabla = |a: usize, b: usize, cc: usize, d: usize| {
        let mut v = dt[a][(b * n + cc) * n + d];
        for l in 0..n {
            v += t(b, cc, l) * g(a, l, d) - g(a, b, l) * t(l, cc, d) - g(a, cc, l) * t(b, l, d);
        }
        v
    };
    let mut cod = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    let base = nabla(a, b, cc, d);
                    for [x, y, z] in permutations(a, b, cc) {
                        cod = cod.max((nabla(x, y, z, d) - base).abs());
                    }
                }
            }
        }
    }

    let r = intrinsic_curvature(field, p, &geo)?;
    let data = LagrangianPointData::new(c, geo.cubic_form())?;
    let gauss = r.max_abs_diff(&super::gauss_curvature(&data));
    Ok([sym, cod, gauss])
}

/// Evaluates the symmetry, Codazzi and Gauss conditions at every point and
/// reports the worst deviation of each.
pub fn compatibility_report<F: CubicField + ?Sized>(
    field: &F,
    c: f64,
    points: &[Vec<f64>],
) -> Result<CompatibilityReport> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no sample points".into()));
    }
    let per: Vec<[f64; 3]> = points
        .par_iter()
        .map(|p| point_report(field, c, p))
        .collect::<Result<_>>()?;
    let mut out = CompatibilityReport {
        cubic_symmetry: 0.0,
        codazzi: 0.0,
        gauss: 0.0,
        points: points.len(),
    };
    for [a, b, g] in per {
        out.cubic_symmetry = out.cubic_symmetry.max(a);
        out.codazzi = out.codazzi.max(b);
        out.gauss = out.gauss.max(g);
    }
    Ok(out)
}

/// Constant cubic form on the box `[-1, 1]^n` with coordinate fields.
#[derive(Debug, Clone)]
pub struct FlatConstantField {
    pub h: CubicForm<f64>,
}

impl CubicField for FlatConstantField {
    fn dim(&self) -> usize {
        self.h.n()
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        if p.iter().any(|x| x.abs() > 1.0) {
            return Err(Error::Domain("point outside [-1, 1]^n".into()));
        }
        Ok(())
    }

    fn gram(&self, _p: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim())
    }

    fn alpha(&self, _p: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let d = self.h.dense();
        // a_ijk = h^k_ij
        let mut a = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    a[(i * n + j) * n + k] = d[(k * n + i) * n + j];
                }
            }
        }
        a
    }

    fn bracket(&self, _p: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim().pow(3)]
    }

    fn flow(&self, p: &[f64], i: usize, t: f64) -> Vec<f64> {
        let mut q = p.to_vec();
        q[i] += t;
        q
    }
}

/// Adds `ε E_2` to `α(E_1, E_1)` only, breaking the cubic symmetry by `ε`.
#[derive(Debug, Clone)]
pub struct PerturbedField<F> {
    pub inner: F,
    pub epsilon: f64,
}

impl<F: CubicField> CubicField for PerturbedField<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        self.inner.check_point(p)
    }

    fn gram(&self, p: &[f64]) -> DMatrix<f64> {
        self.inner.gram(p)
    }

    fn alpha(&self, p: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut a = self.inner.alpha(p);
        let Ok(frame) = frame_at(&self.inner, p) else {
            return a;
        };
        let Some(inv) = frame.clone().try_inverse() else {
            return a;
        };
        for i in 0..n {
            for j in 0..n {
                let w = self.epsilon * inv[(0, i)] * inv[(0, j)];
                for k in 0..n {
                    a[(i * n + j) * n + k] += w * frame[(k, 1)];
                }
            }
        }
        a
    }

    fn bracket(&self, p: &[f64]) -> Vec<f64> {
        self.inner.bracket(p)
    }

    fn flow(&self, p: &[f64], i: usize, t: f64) -> Vec<f64> {
        self.inner.flow(p, i, t)
    }

    fn step(&self) -> f64 {
        self.inner.step()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_direction(n: usize, l: f64) -> CubicForm<f64> {
        let mut h = CubicForm::zeros(n);
        h.set(0, 0, 0, l);
        h
    }

    #[test]
    fn flat_parallel_form_passes() {
        let f = FlatConstantField {
            h: one_direction(3, 0.7),
        };
        let pts = vec![vec![0.1, -0.2, 0.3], vec![0.0, 0.0, 0.0]];
        let r = compatibility_report(&f, 0.0, &pts).unwrap();
        assert!(r.max() < 1e-8, "{r:?}");
    }

    #[test]
    fn perturbation_is_detected() {
        let f = PerturbedField {
            inner: FlatConstantField {
                h: one_direction(3, 0.7),
            },
            epsilon: 1e-3,
        };
        let r = compatibility_report(&f, 0.0, &[vec![0.2, 0.1, 0.0]]).unwrap();
        assert!(r.cubic_symmetry >= 5e-4, "{r:?}");
    }

    #[test]
    fn dense_flat_form_fails_gauss() {
        let mut h = CubicForm::zeros(2);
        h.set(0, 0, 0, 1.0);
        h.set(0, 1, 1, -1.0);
        let f = FlatConstantField { h };
        let r = compatibility_report(&f, 0.0, &[vec![0.0, 0.0]]).unwrap();
        assert!(r.gauss > 0.5);
    }

    #[test]
    fn rejects_out_of_domain() {
        let f = FlatConstantField {
            h: CubicForm::zeros(2),
        };
        assert!(compatibility_report(&f, 0.0, &[vec![2.0, 0.0]]).is_err());
        assert!(compatibility_report(&f, 0.0, &[]).is_err());
    }
}
