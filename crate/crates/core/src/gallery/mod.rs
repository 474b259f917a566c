//! Explicit Lagrangian immersions and numeric extraction of their pointwise
//! data.
//!
//! Ambient points are complex vectors; the complex structure is
//! multiplication by `i` and the real inner product is `Re <u, v>`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::{gram_schmidt, CurvatureTensor};
use crate::lagrangian::{CubicForm, LagrangianPointData};

mod exotic;
mod graph;
mod hyperplane;
mod legendrian;

pub use exotic::{exotic_s3_field, exotic_s3_lift, ExoticS3Field};
pub use graph::{graph_immersion, theorem82_potential, CubicPotential, NumericPotential, Potential};
pub use hyperplane::{
    mu_of_lambda, ode93_integrate, ode93_order_check, phase_of_lambda, theorem92_chart, theorem92_interval,
    theorem93_chart, OdeState93, OrderCheck, Trajectory93,
};
pub use legendrian::{clifford_legendrian, CliffordLegendrian, LegendrianMap};

/// Names accepted by the command line.
pub const EXAMPLES: [&str; 4] = ["exotic-s3", "graph-8.2", "thm-9.2", "thm-9.3"];

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    /// `ℂⁿ`, Lagrangian data with `c = 0`.
    Flat,
    /// Unit sphere in `ℂ^{n+1}` over `CPⁿ(4)`, data with `c = 1`.
    Sphere,
}

type Evaluator = dyn Fn(&[f64]) -> Result<Vec<Complex64>> + Send + Sync;

/// An immersion given by an evaluator on a chart of `ℝⁿ`.
#[derive(Clone)]
pub struct ImmersionChart {
    n: usize,
    ambient: Ambient,
    eval: Arc<Evaluator>,
    steps: Vec<f64>,
    bounds: Option<Vec<(f64, f64)>>,
}

impl fmt::Debug for ImmersionChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImmersionChart")
            .field("n", &self.n)
            .field("ambient", &self.ambient)
            .field("steps", &self.steps)
            .field("bounds", &self.bounds)
            .finish_non_exhaustive()
    }
}

/// Value and first two derivatives of a chart at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: Vec<Complex64>,
    pub d1: Vec<Vec<Complex64>>,
    /// `d2[a][b]`, symmetric.
    pub d2: Vec<Vec<Vec<Complex64>>>,
}

/// Point data extracted from a chart.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub data: LagrangianPointData<f64>,
    /// Largest disagreement between permuted raw coefficients.
    pub symmetry_defect: f64,
    /// Columns: the orthonormal frame in chart coordinates.
    pub frame: DMatrix<f64>,
}

pub(crate) fn re_dot(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

/// `Re <u, i v>`.
pub(crate) fn omega(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a.im * b.re - a.re * b.im).sum()
}

fn combine(terms: &[(f64, &[Complex64])]) -> Vec<Complex64> {
    let len = terms[0].1.len();
    (0..len)
        .map(|i| terms.iter().fold(Complex64::new(0.0, 0.0), |s, (w, v)| s + v[i] * *w))
        .collect()
}

impl ImmersionChart {
    pub fn new<F>(n: usize, ambient: Ambient, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<Complex64>> + Send + Sync + 'static,
    {
        ImmersionChart {
            n,
            ambient,
            eval: Arc::new(eval),
            steps: vec![DEFAULT_STEP; n],
            bounds: None,
        }
    }

    pub fn with_steps(mut self, steps: Vec<f64>) -> Result<Self> {
        if steps.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: steps.len(),
            });
        }
        if let Some(&h) = steps.iter().find(|h| !(**h > 1e-12)) {
            return Err(Error::StepUnderflow(h));
        }
        self.steps = steps;
        Ok(self)
    }

    /// Box outside which the evaluator is not trusted.
    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let v = (self.eval)(x)?;
        if self.ambient == Ambient::Sphere {
            let r = re_dot(&v, &v).sqrt();
            if (r - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!("sphere chart returned |L| = {r}")));
            }
        }
        Ok(v)
    }

    fn check_interior(&self, x: &[f64], scale: f64) -> Result<()> {
        if let Some(b) = &self.bounds {
            for (i, (&xi, &(lo, hi))) in x.iter().zip(b).enumerate() {
                let m = 2.0 * scale * self.steps[i];
                if !(xi - m >= lo && xi + m <= hi) {
                    return Err(Error::Domain(format!(
                        "coordinate {i} = {xi} is not interior to [{lo}, {hi}] with margin {m:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn shifted(&self, x: &[f64], moves: &[(usize, f64)]) -> Result<Vec<Complex64>> {
        let mut y = x.to_vec();
        for &(i, t) in moves {
            y[i] += t;
        }
        self.eval(&y)
    }

    /// Central differences with the chart's per-axis steps.
    pub fn jet(&self, x: &[f64]) -> Result<Jet> {
        self.jet_scaled(x, 1.0)
    }

    /// Same as [`jet`](Self::jet) with every step multiplied by `scale`.
    pub fn jet_scaled(&self, x: &[f64], scale: f64) -> Result<Jet> {
        self.check_interior(x, scale)?;
        let n = self.n;
        let value = self.eval(x)?;
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = vec![vec![Vec::new(); n]; n];
        for a in 0..n {
            let ha = self.steps[a] * scale;
            let p = self.shifted(x, &[(a, ha)])?;
            let m = self.shifted(x, &[(a, -ha)])?;
            d1.push(combine(&[(0.5 / ha, &p), (-0.5 / ha, &m)]));
            let w = 1.0 / (ha * ha);
            d2[a][a] = combine(&[(w, &p), (-2.0 * w, &value), (w, &m)]);
        }
        for a in 0..n {
            for b in (a + 1)..n {
                let (ha, hb) = (self.steps[a] * scale, self.steps[b] * scale);
                let pp = self.shifted(x, &[(a, ha), (b, hb)])?;
                let pm = self.shifted(x, &[(a, ha), (b, -hb)])?;
                let mp = self.shifted(x, &[(a, -ha), (b, hb)])?;
                let mm = self.shifted(x, &[(a, -ha), (b, -hb)])?;
                let w = 0.25 / (ha * hb);
                let v = combine(&[(w, &pp), (-w, &pm), (-w, &mp), (w, &mm)]);
                d2[b][a] = v.clone();
                d2[a][b] = v;
            }
        }
        Ok(Jet { value, d1, d2 })
    }

    /// Induced metric `Re <∂_a L, ∂_b L>`.
    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let d1 = self.first_derivatives(x)?;
        Ok(gram_of(&d1))
    }

    fn first_derivatives(&self, x: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        self.check_interior(x, 1.0)?;
        (0..self.n)
            .map(|a| {
                let h = self.steps[a];
                let p = self.shifted(x, &[(a, h)])?;
                let m = self.shifted(x, &[(a, -h)])?;
                Ok(combine(&[(0.5 / h, &p), (-0.5 / h, &m)]))
            })
            .collect()
    }
}

fn gram_of(d1: &[Vec<Complex64>]) -> DMatrix<f64> {
    let n = d1.len();
    DMatrix::from_fn(n, n, |a, b| re_dot(&d1[a], &d1[b]))
}

/// `max |ω(∂_a L, ∂_b L)|`, zero for a Lagrangian (or Legendrian) chart.
pub fn omega_pullback(chart: &ImmersionChart, x: &[f64]) -> Result<f64> {
    let d1 = chart.first_derivatives(x)?;
    let mut worst = 0.0f64;
    for a in 0..d1.len() {
        for b in (a + 1)..d1.len() {
            worst = worst.max(omega(&d1[a], &d1[b]).abs());
        }
    }
    Ok(worst)
}

/// `max |Re <∂_a L, i L>|`, zero for a horizontal sphere chart.
pub fn horizontality(chart: &ImmersionChart, x: &[f64]) -> Result<f64> {
    let v = chart.eval(x)?;
    let d1 = chart.first_derivatives(x)?;
    Ok(d1.iter().fold(0.0f64, |w, d| w.max(omega(d, &v).abs())))
}

fn extract(jet: &Jet, c: f64, tol: f64, tag: String) -> Result<Extraction> {
    let n = jet.d1.len();
    let g = gram_of(&jet.d1);
    let min_eig = g.clone().symmetric_eigenvalues().min();
    if !(min_eig >= 1e-10) {
        return Err(Error::DegenerateMetric(min_eig));
    }
    let p = gram_schmidt(&g)?.frame;
    // raw[(a, b, c)] = Re <∂_b ∂_c L, i ∂_a L> in chart coordinates
    let mut raw = vec![0.0; n * n * n];
    for a in 0..n {
        let ja: Vec<Complex64> = jet.d1[a].iter().map(|z| z * Complex64::i()).collect();
        for b in 0..n {
            for cc in 0..n {
                raw[(a * n + b) * n + cc] = re_dot(&jet.d2[b][cc], &ja);
            }
        }
    }
    let mut framed = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        for cc in 0..n {
                            s += raw[(a * n + b) * n + cc] * p[(a, i)] * p[(b, j)] * p[(cc, k)];
                        }
                    }
                }
                framed[(i * n + j) * n + k] = s;
            }
        }
    }
    let (h, defect) = CubicForm::symmetrize_dense(n, &framed);
    if !(defect < tol) {
        return Err(Error::InvalidInput(format!(
            "extracted cubic coefficients are not totally symmetric (defect {defect:e} >= {tol:e})"
        )));
    }
    Ok(Extraction {
        data: LagrangianPointData::new(c, h)?.with_provenance(tag),
        symmetry_defect: defect,
        frame: p,
    })
}

/// Lagrangian data (`c = 0`) of a flat chart at `x`, in the Gram–Schmidt
/// frame of the induced metric.
pub fn induced_data_flat(chart: &ImmersionChart, x: &[f64]) -> Result<Extraction> {
    if chart.ambient() != Ambient::Flat {
        return Err(Error::InvalidInput("induced_data_flat needs a flat chart".into()));
    }
    let jet = chart.jet(x)?;
    extract(&jet, 0.0, 1e-5, format!("flat chart at {x:?}"))
}

/// Lagrangian data (`c = 1`) of the Hopf projection of a horizontal sphere
/// chart.
pub fn induced_data_horizontal(chart: &ImmersionChart, x: &[f64]) -> Result<Extraction> {
    if chart.ambient() != Ambient::Sphere {
        return Err(Error::InvalidInput("induced_data_horizontal needs a sphere chart".into()));
    }
    let jet = chart.jet(x)?;
    let res = jet.d1.iter().fold(0.0f64, |w, d| w.max(omega(d, &jet.value).abs()));
    if !(res < 1e-6) {
        return Err(Error::NotHorizontal(res));
    }
    extract(&jet, 1.0, 1e-4, format!("horizontal chart at {x:?}"))
}

/// Christoffel symbols `Γ^m_jk` (flattened `[(m*n + j)*n + k]`) from
/// central differences of the metric.
fn christoffel(chart: &ImmersionChart, x: &[f64], h: f64) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = chart.n();
    let g = chart.metric(x)?;
    let mut dg = Vec::with_capacity(n);
    for l in 0..n {
        let mut p = x.to_vec();
        p[l] += h;
        let mut m = x.to_vec();
        m[l] -= h;
        dg.push((chart.metric(&p)? - chart.metric(&m)?) / (2.0 * h));
    }
    let inv = g.clone().try_inverse().ok_or(Error::DegenerateMetric(0.0))?;
    let mut gamma = vec![0.0; n * n * n];
    for mm in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += inv[(mm, l)] * (dg[j][(k, l)] + dg[k][(j, l)] - dg[l][(j, k)]);
                }
                gamma[(mm * n + j) * n + k] = 0.5 * s;
            }
        }
    }
    Ok((g, gamma))
}

/// Intrinsic curvature of the induced metric by nested central differences
/// (outer step `h`), expressed in the orthonormal frame `frame`.
pub fn intrinsic_curvature_fd(
    chart: &ImmersionChart,
    x: &[f64],
    frame: &DMatrix<f64>,
    h: f64,
) -> Result<CurvatureTensor<f64>> {
    let n = chart.n();
    let (g, gamma) = christoffel(chart, x, h)?;
    let mut dgamma = Vec::with_capacity(n);
    for i in 0..n {
        let mut p = x.to_vec();
        p[i] += h;
        let mut m = x.to_vec();
        m[i] -= h;
        let (_, gp) = christoffel(chart, &p, h)?;
        let (_, gm) = christoffel(chart, &m, h)?;
        dgamma.push(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>());
    }
    let gi = |m: usize, j: usize, k: usize| gamma[(m * n + j) * n + k];
    // R(∂_i, ∂_j)∂_k = R^m_ijk ∂_m
    let mut r_up = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for m in 0..n {
                    let mut s = dgamma[i][(m * n + j) * n + k] - dgamma[j][(m * n + i) * n + k];
                    for p in 0..n {
                        s += gi(p, j, k) * gi(m, i, p) - gi(p, i, k) * gi(m, j, p);
                    }
                    r_up[((i * n + j) * n + k) * n + m] = s;
                }
            }
        }
    }
    let coord = |i: usize, j: usize, k: usize, l: usize| -> f64 {
        (0..n).map(|m| r_up[((i * n + j) * n + k) * n + m] * g[(m, l)]).sum()
    };
    let mut c4 = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    c4[((i * n + j) * n + k) * n + l] = coord(i, j, k, l);
                }
            }
        }
    }
    // successive single-index contractions with the frame
    for slot in 0..4 {
        let mut next = vec![0.0; c4.len()];
        for idx in 0..c4.len() {
            let mut digits = [idx / (n * n * n), (idx / (n * n)) % n, (idx / n) % n, idx % n];
            let target = digits[slot];
            let mut s = 0.0;
            for src in 0..n {
                digits[slot] = src;
                let from = ((digits[0] * n + digits[1]) * n + digits[2]) * n + digits[3];
                s += c4[from] * frame[(src, target)];
            }
            next[idx] = s;
        }
        c4 = next;
    }
    Ok(CurvatureTensor::from_fn(n, |a, b, c, d| c4[((a * n + b) * n + c) * n + d]))
}

/// Representative point data of a gallery example: the exotic sphere's
/// constant form, the graph at the origin, and one fixed chart point of each
/// family with `n = 3`.
pub fn example_point(name: &str) -> Result<LagrangianPointData<f64>> {
    let data = match name {
        "exotic-s3" => crate::lagrangian::exotic_s3_point(),
        "graph-8.2" => {
            let tuple = crate::delta::DeltaTuple::new(5, vec![2])?;
            let f = theorem82_potential(&tuple, 1.0).expect("N < n");
            induced_data_flat(&graph_immersion(f), &[0.0; 5])?.data
        }
        "thm-9.2" => {
            let chart = theorem92_chart(3, 1.0, Arc::new(clifford_legendrian(3)?))?;
            induced_data_flat(&chart, &[1.2, 0.4, -0.9])?.data
        }
        "thm-9.3" => {
            let tr = ode93_integrate(3, OdeState93::default_init(), 0.5, 1e-3)?;
            let chart = theorem93_chart(&tr, (0.0, 0.5), Arc::new(clifford_legendrian(3)?))?;
            induced_data_horizontal(&chart, &[0.25, 0.3, 1.1])?.data
        }
        _ => return Err(Error::UnknownExample(name.into())),
    };
    Ok(data.with_provenance(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::gauss_curvature;

    #[test]
    fn example_points_exist() {
        for name in EXAMPLES {
            let d = example_point(name).unwrap();
            assert_eq!(d.provenance.as_deref(), Some(name));
        }
        assert!(matches!(example_point("nope"), Err(Error::UnknownExample(_))));
    }

    fn plane(n: usize) -> ImmersionChart {
        ImmersionChart::new(n, Ambient::Flat, |x: &[f64]| {
            Ok(x.iter().map(|&t| Complex64::new(t, 0.0)).collect())
        })
    }

    #[test]
    fn real_plane_has_zero_form() {
        let c = plane(3);
        let e = induced_data_flat(&c, &[0.1, 0.2, 0.3]).unwrap();
        assert!(e.data.h.squared_norm() < 1e-20);
        assert!(omega_pullback(&c, &[0.0; 3]).unwrap() < 1e-14);
        assert!(induced_data_horizontal(&c, &[0.0; 3]).is_err());
    }

    #[test]
    fn bounds_require_margin() {
        let c = plane(2).with_bounds(vec![(-1.0, 1.0); 2]);
        assert!(c.jet(&[0.0, 0.0]).is_ok());
        assert!(matches!(c.jet(&[1.0 - 1e-4, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn great_legendrian_sphere_is_totally_geodesic() {
        // real unit sphere in span(e_0, .., e_3), spherical coordinates
        let c = ImmersionChart::new(3, Ambient::Sphere, |x: &[f64]| {
            let (a, b, t) = (x[0], x[1], x[2]);
            let v = [
                a.cos(),
                a.sin() * b.cos(),
                a.sin() * b.sin() * t.cos(),
                a.sin() * b.sin() * t.sin(),
            ];
            Ok(v.iter().map(|&r| Complex64::new(r, 0.0)).collect())
        });
        let x = [1.1, 0.9, 0.4];
        let e = induced_data_horizontal(&c, &x).unwrap();
        assert!(e.data.h.squared_norm() < 1e-14);
        let r = gauss_curvature(&e.data);
        assert!((crate::frame::scalar_tau(&r) - 3.0).abs() < 1e-12);
        let fd = intrinsic_curvature_fd(&c, &x, &e.frame, 1e-3).unwrap();
        assert!(fd.max_abs_diff(&r) < 1e-4, "{}", fd.max_abs_diff(&r));
    }

    #[test]
    fn sphere_chart_rejects_non_unit() {
        let c = ImmersionChart::new(1, Ambient::Sphere, |x: &[f64]| Ok(vec![Complex64::new(2.0 + x[0], 0.0)]));
        assert!(matches!(c.eval(&[0.0]), Err(Error::InvalidInput(_))));
    }
}
