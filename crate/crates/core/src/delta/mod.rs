//! δ-invariants `δ(n_1,...,n_k) = τ - inf Σ_j τ(L_j)` over mutually
//! orthogonal subspaces `L_j` of dimensions `n_j`.

mod assign;
mod optimize;
mod oracle;

pub use optimize::{delta_invariant, delta_restarts, DeltaDiagnostics, DeltaOptions, DeltaResult, RestartOutcome};
pub use oracle::{grid_error_bound, oracle_delta_dim3, oracle_delta_grid, oracle_delta_grid_refined};

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::frame::{max_identity_deviation, CurvatureTensor};
use crate::scalar::Real;

/// A tuple `(n_1, ..., n_k)` with `2 <= n_j < n` and `Σ n_j <= n`, parts
/// kept in non-decreasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeltaTuple {
    n: usize,
    parts: Vec<usize>,
}

impl DeltaTuple {
    pub fn new(n: usize, mut parts: Vec<usize>) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidTuple {
            n,
            parts: parts.clone(),
            reason: reason.into(),
        };
        if parts.is_empty() {
            return Err(bad("empty tuple"));
        }
        if let Some(&p) = parts.iter().find(|&&p| p < 2 || p >= n) {
            return Err(bad(&format!("part {p} outside 2..{n}")));
        }
        if parts.iter().sum::<usize>() > n {
            return Err(bad("parts sum exceeds n"));
        }
        parts.sort_unstable();
        Ok(DeltaTuple { n, parts })
    }

    /// Parses `"2,3"` (spaces and parentheses tolerated).
    pub fn parse(n: usize, spec: &str) -> Result<Self> {
        let cleaned: String = spec.chars().filter(|c| !"() ".contains(*c)).collect();
        let parts = cleaned
            .split(',')
            .filter(|s| !s.is_empty())
            .map(usize::from_str)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidInput(format!("tuple '{spec}': {e}")))?;
        DeltaTuple::new(n, parts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    /// `N = Σ n_j`.
    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    /// `A = Σ 1/(2 + n_j)`, exactly.
    pub fn a_exact(&self) -> Ratio<i64> {
        self.parts
            .iter()
            .map(|&p| Ratio::new(1, 2 + p as i64))
            .sum()
    }

    /// `Σ n_j (n_j - 1) / 2`, the constant-curvature value of `Σ τ(L_j)` per unit `c`.
    pub fn pair_count(&self) -> usize {
        self.parts.iter().map(|p| p * (p - 1) / 2).sum()
    }

    /// Column ranges of the contiguous blocks.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.parts
            .iter()
            .map(|&p| {
                let r = start..start + p;
                start += p;
                r
            })
            .collect()
    }
}

impl fmt::Display for DeltaTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// All admissible tuples for `n`, ordered by length then lexicographically.
pub fn enumerate_tuples(n: usize) -> Result<Vec<DeltaTuple>> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("n = {n} < 3 has no admissible tuples")));
    }
    fn rec(n: usize, min: usize, remaining: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for p in min..n {
            if p > remaining {
                break;
            }
            cur.push(p);
            rec(n, p, remaining - p, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in 1..=n / 2 {
        let mut level = Vec::new();
        rec(n, 2, n, k, &mut Vec::new(), &mut level);
        out.extend(level.into_iter().map(|parts| DeltaTuple { n, parts }));
    }
    Ok(out)
}

/// An orthonormal frame with the columns grouped into blocks `Δ_1..Δ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceConfig<T: Real> {
    pub frame: DMatrix<T>,
    /// Column indices of each block, in tuple order.
    pub blocks: Vec<Vec<usize>>,
}

impl<T: Real> SubspaceConfig<T> {
    pub fn new(frame: DMatrix<T>, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = frame.nrows();
        if frame.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: frame.ncols(),
            });
        }
        let dev = max_identity_deviation(&(frame.transpose() * &frame));
        if dev > T::lit(1e-10).max(T::eps() * T::lit(1e3)) {
            return Err(Error::NotOrthogonal(dev.as_f64()));
        }
        let mut used = vec![false; n];
        for &c in blocks.iter().flatten() {
            if c >= n || used[c] {
                return Err(Error::InvalidInput(format!("block column {c} repeated or out of range")));
            }
            used[c] = true;
        }
        Ok(SubspaceConfig { frame, blocks })
    }

    /// Blocks laid out contiguously in tuple order.
    pub fn contiguous(frame: DMatrix<T>, tuple: &DeltaTuple) -> Result<Self> {
        let blocks = tuple.block_ranges().into_iter().map(|r| r.collect()).collect();
        SubspaceConfig::new(frame, blocks)
    }

    pub fn block_basis(&self, j: usize) -> Vec<DVector<T>> {
        self.blocks[j]
            .iter()
            .map(|&c| self.frame.column(c).into_owned())
            .collect()
    }

    fn check_tuple(&self, tuple: &DeltaTuple) -> Result<()> {
        if self.frame.nrows() != tuple.n() {
            return Err(Error::DimensionMismatch {
                expected: tuple.n(),
                got: self.frame.nrows(),
            });
        }
        let sizes: Vec<usize> = self.blocks.iter().map(|b| b.len()).collect();
        if sizes != tuple.parts() {
            return Err(Error::InvalidInput(format!(
                "block sizes {sizes:?} do not match tuple {tuple}"
            )));
        }
        Ok(())
    }
}

/// `Σ_j τ(L_j)` for the blocks of `config`.
pub fn config_objective<T: Real>(
    r: &CurvatureTensor<T>,
    tuple: &DeltaTuple,
    config: &SubspaceConfig<T>,
) -> Result<T> {
    if r.n() != tuple.n() {
        return Err(Error::DimensionMismatch {
            expected: tuple.n(),
            got: r.n(),
        });
    }
    config.check_tuple(tuple)?;
    let mut total = T::zero();
    for j in 0..config.blocks.len() {
        total += crate::frame::tau_subspace(r, &config.block_basis(j))?;
    }
    Ok(total)
}

/// Closed form `[n(n-1) - Σ n_j(n_j-1)] c / 2` for constant curvature `c`.
pub fn delta_constant_curvature<T: Real>(tuple: &DeltaTuple, c: T) -> T {
    let n = tuple.n();
    T::count(n * (n - 1) / 2 - tuple.pair_count()) * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{exotic_s3_point, gauss_curvature};
    use approx::assert_abs_diff_eq;

    fn parts(ts: &[DeltaTuple]) -> Vec<Vec<usize>> {
        ts.iter().map(|t| t.parts().to_vec()).collect()
    }

    #[test]
    fn enumeration_small_n() {
        assert_eq!(parts(&enumerate_tuples(3).unwrap()), vec![vec![2]]);
        assert_eq!(parts(&enumerate_tuples(4).unwrap()), vec![vec![2], vec![3], vec![2, 2]]);
        assert_eq!(
            parts(&enumerate_tuples(5).unwrap()),
            vec![vec![2], vec![3], vec![4], vec![2, 2], vec![2, 3]]
        );
        assert_eq!(enumerate_tuples(6).unwrap().len(), 9);
        assert!(enumerate_tuples(2).is_err());
    }

    #[test]
    fn tuple_validation_and_parse() {
        assert!(DeltaTuple::new(4, vec![5]).is_err());
        assert!(DeltaTuple::new(4, vec![4]).is_err());
        assert!(DeltaTuple::new(5, vec![3, 3]).is_err());
        let t = DeltaTuple::parse(7, "(3, 2)").unwrap();
        assert_eq!(t.parts(), &[2, 3]);
        assert_eq!(t.to_string(), "(2,3)");
        assert_eq!(t.a_exact(), Ratio::new(9, 20));
        assert_eq!(t.total(), 5);
        assert!(DeltaTuple::parse(4, "2,x").is_err());
    }

    #[test]
    fn objective_examples() {
        let r = gauss_curvature(&exotic_s3_point::<f64>());
        let t = DeltaTuple::new(3, vec![2]).unwrap();
        let id = DMatrix::identity(3, 3);
        let c12 = SubspaceConfig::new(id.clone(), vec![vec![0, 1]]).unwrap();
        assert_abs_diff_eq!(config_objective(&r, &t, &c12).unwrap(), -5.0 / 3.0, epsilon = 1e-14);
        let c13 = SubspaceConfig::new(id, vec![vec![0, 2]]).unwrap();
        assert_abs_diff_eq!(config_objective(&r, &t, &c13).unwrap(), 1.0, epsilon = 1e-14);

        let rc = CurvatureTensor::constant(5, 0.5);
        let t = DeltaTuple::new(5, vec![2, 3]).unwrap();
        let q = crate::random::haar_orthogonal(5, &mut crate::random::rng_for(1, 1));
        let cfg = SubspaceConfig::contiguous(q, &t).unwrap();
        assert_abs_diff_eq!(config_objective(&rc, &t, &cfg).unwrap(), 4.0 * 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(delta_constant_curvature(&t, 0.5), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn objective_rejects_mismatch() {
        let r = CurvatureTensor::<f64>::constant(4, 1.0);
        let t = DeltaTuple::new(4, vec![2, 2]).unwrap();
        let cfg = SubspaceConfig::new(DMatrix::identity(4, 4), vec![vec![0, 1, 2]]).unwrap();
        assert!(config_objective(&r, &t, &cfg).is_err());
        assert!(SubspaceConfig::<f64>::new(DMatrix::identity(3, 3), vec![vec![0, 0]]).is_err());
    }
}
