//! Brute-force references for the optimizer in dimensions 3 and 4.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};

use super::DeltaTuple;
use crate::error::{Error, Result};
use crate::frame::{scalar_tau, CurvatureTensor};
use crate::scalar::Real;

/// In dimension 3 every unit 2-vector is a plane, so the infimum of
/// `K` is the smallest eigenvalue of the curvature operator
/// `M_{(ij),(kl)} = R_ijlk` on `Λ²`.
pub fn oracle_delta_dim3<T: Real>(r: &CurvatureTensor<T>) -> Result<T> {
    if r.n() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: r.n(),
        });
    }
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let m = Matrix3::from_fn(|p, q| {
        let (i, j) = pairs[p];
        let (k, l) = pairs[q];
        r.get(i, j, l, k)
    });
    let eig = SymmetricEigen::new(m);
    let lmin = eig.eigenvalues.iter().fold(eig.eigenvalues[0], |a, &b| a.min(b));
    Ok(scalar_tau(r) - lmin)
}

/// Givens planes and angle offsets; each angle sweeps an interval of length π.
fn grid_planes(n: usize) -> Result<Vec<(usize, usize, f64)>> {
    match n {
        3 => Ok(vec![(0, 1, 0.0), (1, 2, -PI / 2.0)]),
        4 => Ok(vec![(0, 1, 0.0), (2, 3, 0.0), (0, 2, -PI / 2.0), (1, 3, -PI / 2.0)]),
        _ => Err(Error::CostGuard(format!("grid oracle supports n = 3 or 4, got {n}"))),
    }
}

/// Every way of placing the blocks, as lists of column pairs.
fn assignments(n: usize, parts: &[usize]) -> Vec<Vec<(usize, usize)>> {
    fn rec(n: usize, parts: &[usize], used: &mut Vec<bool>, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        let j = cur.len();
        if j == parts.len() {
            out.push(cur.clone());
            return;
        }
        let min_first = if j > 0 && parts[j] == parts[j - 1] { cur[j - 1][0] + 1 } else { 0 };
        let mut pick = Vec::new();
        choose(n, parts, used, cur, out, min_first, &mut pick);
    }
    fn choose(
        n: usize,
        parts: &[usize],
        used: &mut Vec<bool>,
        cur: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
        from: usize,
        pick: &mut Vec<usize>,
    ) {
        if pick.len() == parts[cur.len()] {
            for &c in pick.iter() {
                used[c] = true;
            }
            cur.push(pick.clone());
            rec(n, parts, used, cur, out);
            cur.pop();
            for &c in pick.iter() {
                used[c] = false;
            }
            return;
        }
        for c in from..n {
            if !used[c] {
                pick.push(c);
                choose(n, parts, used, cur, out, c + 1, pick);
                pick.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, parts, &mut vec![false; n], &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|blocks| {
            let mut pairs = Vec::new();
            for b in blocks {
                for (x, &a) in b.iter().enumerate() {
                    for &c in &b[x + 1..] {
                        pairs.push((a, c));
                    }
                }
            }
            pairs
        })
        .collect()
}

#[derive(Clone)]
struct Leaf {
    value: f64,
    angles: Vec<f64>,
    assignment: usize,
}

struct Grid<'a> {
    planes: Vec<(usize, usize, f64)>,
    assigns: Vec<Vec<(usize, usize)>>,
    res: usize,
    n: usize,
    keep: usize,
    best: Vec<Leaf>,
    r: &'a CurvatureTensor<f64>,
}

impl Grid<'_> {
    fn angle(&self, level: usize, idx: usize) -> f64 {
        self.planes[level].2 + PI * idx as f64 / self.res as f64
    }

    fn offer(&mut self, value: f64, angles: &[f64], assignment: usize) {
        if self.best.len() == self.keep && value >= self.best[self.keep - 1].value {
            return;
        }
        let pos = self.best.partition_point(|l| l.value <= value);
        self.best.insert(
            pos,
            Leaf {
                value,
                angles: angles.to_vec(),
                assignment,
            },
        );
        self.best.truncate(self.keep);
    }

    fn descend(&mut self, r: &CurvatureTensor<f64>, angles: &mut Vec<f64>) {
        let level = angles.len();
        if level + 1 == self.planes.len() {
            self.leaves(r, angles);
            return;
        }
        let (i, j, _) = self.planes[level];
        for idx in 0..self.res {
            let t = self.angle(level, idx);
            let rt = r.givens(i, j, t.cos(), t.sin());
            angles.push(t);
            self.descend(&rt, angles);
            angles.pop();
        }
    }

    /// Sweeps the last angle using the closed form of `K` under one plane rotation.
    fn leaves(&mut self, r: &CurvatureTensor<f64>, angles: &mut Vec<f64>) {
        let n = self.n;
        let level = angles.len();
        let (i, j, _) = self.planes[level];
        let k = |a: usize, b: usize| r.get(a, b, b, a);
        let mut kmat = vec![0.0; n * n];
        for idx in 0..self.res {
            let t = self.angle(level, idx);
            let (c, s) = (t.cos(), t.sin());
            for a in 0..n {
                for b in (a + 1)..n {
                    let v = if (a == i || a == j) && (b == i || b == j) {
                        k(i, j)
                    } else if a == i || b == i {
                        let o = if a == i { b } else { a };
                        c * c * k(o, i) + 2.0 * c * s * r.get(o, i, j, o) + s * s * k(o, j)
                    } else if a == j || b == j {
                        let o = if a == j { b } else { a };
                        s * s * k(o, i) - 2.0 * c * s * r.get(o, i, j, o) + c * c * k(o, j)
                    } else {
                        k(a, b)
                    };
                    kmat[a * n + b] = v;
                }
            }
            for x in 0..self.assigns.len() {
                let v: f64 = self.assigns[x].iter().map(|&(a, b)| kmat[a * n + b]).sum();
                if self.best.len() < self.keep || v < self.best[self.keep - 1].value {
                    angles.push(t);
                    let snapshot = angles.clone();
                    angles.pop();
                    self.offer(v, &snapshot, x);
                }
            }
        }
    }

    fn frame(&self, angles: &[f64]) -> DMatrix<f64> {
        let mut q = DMatrix::identity(self.n, self.n);
        for (&(i, j, _), &t) in self.planes.iter().zip(angles) {
            let mut g = DMatrix::identity(self.n, self.n);
            let (c, s) = (t.cos(), t.sin());
            g[(i, i)] = c;
            g[(j, j)] = c;
            g[(i, j)] = -s;
            g[(j, i)] = s;
            q *= g;
        }
        q
    }

    fn value_at(&self, angles: &[f64], assignment: usize) -> f64 {
        let q = self.frame(angles);
        let col = |c: usize| q.column(c).iter().copied().collect::<Vec<f64>>();
        self.assigns[assignment]
            .iter()
            .map(|&(a, b)| self.r.quad(&col(a), &col(b)))
            .sum()
    }

    /// Derivative-free compass search in the angle coordinates.
    fn refine(&self, leaf: &Leaf) -> f64 {
        let mut x = leaf.angles.clone();
        let mut f = self.value_at(&x, leaf.assignment);
        let mut step = PI / self.res as f64 / 2.0;
        while step > 1e-10 {
            let mut improved = false;
            for d in 0..x.len() {
                for sign in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[d] += sign * step;
                    let fy = self.value_at(&y, leaf.assignment);
                    if fy < f {
                        x = y;
                        f = fy;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        f
    }
}

fn run_grid<'a>(r: &'a CurvatureTensor<f64>, tuple: &DeltaTuple, resolution: usize, keep: usize) -> Result<Grid<'a>> {
    if r.n() != tuple.n() {
        return Err(Error::DimensionMismatch {
            expected: tuple.n(),
            got: r.n(),
        });
    }
    if resolution == 0 {
        return Err(Error::InvalidInput("grid resolution must be positive".into()));
    }
    let planes = grid_planes(r.n())?;
    let mut g = Grid {
        assigns: assignments(r.n(), tuple.parts()),
        planes,
        res: resolution,
        n: r.n(),
        keep,
        best: Vec::new(),
        r,
    };
    g.descend(r, &mut Vec::new());
    Ok(g)
}

/// δ from the minimum of `Σ τ(L_j)` over a product-of-plane-rotations grid
/// with `resolution` angles per axis and every block placement. The
/// infimum is over-estimated, so the returned δ is a lower bound up to
/// [`grid_error_bound`].
pub fn oracle_delta_grid(r: &CurvatureTensor<f64>, tuple: &DeltaTuple, resolution: usize) -> Result<f64> {
    let g = run_grid(r, tuple, resolution, 1)?;
    Ok(scalar_tau(r) - g.best[0].value)
}

/// Grid oracle followed by compass search from the best few grid points.
pub fn oracle_delta_grid_refined(r: &CurvatureTensor<f64>, tuple: &DeltaTuple, resolution: usize) -> Result<f64> {
    let g = run_grid(r, tuple, resolution, 8)?;
    let best = g
        .best
        .iter()
        .map(|l| g.refine(l))
        .fold(f64::INFINITY, f64::min);
    Ok(scalar_tau(r) - best.min(g.best[0].value))
}

/// A priori bound on how far the grid minimum can sit above the true
/// infimum: `½ · pairs · 16 d ‖R‖_F · d (h/2)²` for `d` angles at spacing `h`.
pub fn grid_error_bound(r: &CurvatureTensor<f64>, tuple: &DeltaTuple, resolution: usize) -> Result<f64> {
    let d = grid_planes(r.n())?.len() as f64;
    let h = PI / resolution as f64;
    Ok(0.5 * tuple.pair_count() as f64 * 16.0 * d * r.frobenius_norm() * d * (h / 2.0).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{exotic_s3_point, gauss_curvature};
    use crate::random::{random_curvature, rng_for};
    use approx::assert_abs_diff_eq;

    #[test]
    fn dim3_examples() {
        assert_abs_diff_eq!(oracle_delta_dim3(&CurvatureTensor::constant(3, 1.0)).unwrap(), 2.0, epsilon = 1e-14);
        let r = gauss_curvature(&exotic_s3_point::<f64>());
        assert_abs_diff_eq!(oracle_delta_dim3(&r).unwrap(), 2.0, epsilon = 1e-14);
        assert!(oracle_delta_dim3(&CurvatureTensor::<f64>::constant(4, 1.0)).is_err());
    }

    #[test]
    fn grid_constant_and_exotic() {
        let t4 = DeltaTuple::new(4, vec![2, 2]).unwrap();
        let v = oracle_delta_grid(&CurvatureTensor::constant(4, 2.0), &t4, 5).unwrap();
        assert_abs_diff_eq!(v, 8.0, epsilon = 1e-12);
        let r = gauss_curvature(&exotic_s3_point::<f64>());
        let t3 = DeltaTuple::new(3, vec![2]).unwrap();
        assert!((oracle_delta_grid(&r, &t3, 60).unwrap() - 2.0).abs() < 1e-3);
        assert!(oracle_delta_grid(&CurvatureTensor::constant(5, 1.0), &DeltaTuple::new(5, vec![2]).unwrap(), 4).is_err());
    }

    #[test]
    fn grid_matches_dim3_oracle() {
        let r: CurvatureTensor<f64> = random_curvature(3, 3, &mut rng_for(2, 0));
        let t3 = DeltaTuple::new(3, vec![2]).unwrap();
        let exact = oracle_delta_dim3(&r).unwrap();
        let coarse = oracle_delta_grid(&r, &t3, 40).unwrap();
        let fine = oracle_delta_grid_refined(&r, &t3, 40).unwrap();
        assert!(coarse <= exact + 1e-12);
        assert!(exact - coarse <= grid_error_bound(&r, &t3, 40).unwrap());
        assert_abs_diff_eq!(fine, exact, epsilon = 1e-8);
    }

    #[test]
    fn givens_matches_full_rotation() {
        let r: CurvatureTensor<f64> = random_curvature(4, 2, &mut rng_for(4, 0));
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let mut q = DMatrix::identity(4, 4);
        q[(1, 1)] = c;
        q[(3, 3)] = c;
        q[(1, 3)] = -s;
        q[(3, 1)] = s;
        let a = r.givens(1, 3, c, s);
        let b = crate::frame::rotate_tensor(&r, &q).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }
}
