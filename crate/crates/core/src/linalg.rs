//! Dense LU with pivoting and a 1-norm condition estimate.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Smallest accepted ratio of extreme pivot magnitudes.
const PIVOT_RATIO_FLOOR: f64 = 1e-14;

/// Factorised square matrix `A`, usable for `A x = b` and `A^T x = b`.
pub struct DenseLu {
    lu: PartialPivLu<f64>,
    norm1: f64,
    norm_inf: f64,
    system: &'static str,
}

impl std::fmt::Debug for DenseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseLu")
            .field("n", &self.dim())
            .field("system", &self.system)
            .finish()
    }
}

impl DenseLu {
    /// Factors `a`; `system` names the matrix in error messages.
    pub fn factor(a: MatRef<'_, f64>, system: &'static str) -> Result<Self> {
        let n = a.nrows();
        let mut norm1 = 0.0f64;
        let mut rows = vec![0.0f64; n];
        for c in 0..n {
            let mut s = 0.0;
            for (r, acc) in rows.iter_mut().enumerate() {
                let v = a[(r, c)].abs();
                s += v;
                *acc += v;
            }
            norm1 = norm1.max(s);
        }
        let norm_inf = rows.into_iter().fold(0.0, f64::max);
        if !(norm1.is_finite() && norm_inf.is_finite()) {
            return Err(Error::SingularSystem {
                system,
                pivot_ratio: f64::NAN,
            });
        }
        let lu = a.partial_piv_lu();
        let u = lu.U();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = u[(i, i)].abs();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        if !(ratio > PIVOT_RATIO_FLOOR) {
            return Err(Error::SingularSystem {
                system,
                pivot_ratio: ratio,
            });
        }
        Ok(Self {
            lu,
            norm1,
            norm_inf,
            system,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.U().nrows()
    }

    /// Solves `A x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.solve_impl(rhs, false)
    }

    /// Solves `A^T x = rhs`.
    pub fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        self.solve_impl(rhs, true)
    }

    fn solve_impl(&self, rhs: &[f64], transpose: bool) -> Vec<f64> {
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = if transpose {
            self.lu.solve_transpose(&b)
        } else {
            self.lu.solve(&b)
        };
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Hager's estimate of the 1-norm condition number of `A`.
    pub fn condition_estimate(&self) -> f64 {
        self.norm1 * self.inverse_norm1(false)
    }

    /// Hager's estimate of the 1-norm condition number of `A^T`.
    pub fn condition_estimate_transpose(&self) -> f64 {
        self.norm_inf * self.inverse_norm1(true)
    }

    /// Lower bound on `||B^-1||_1` with `B = A` or `A^T`.
    fn inverse_norm1(&self, transpose: bool) -> f64 {
        let n = self.dim();
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve_impl(&x, transpose);
            est = y.iter().map(|v| v.abs()).sum::<f64>();
            let xi: Vec<f64> = y
                .iter()
                .map(|v| if *v >= 0.0 { 1.0 } else { -1.0 })
                .collect();
            let z = self.solve_impl(&xi, !transpose);
            let (jmax, zmax) = z.iter().enumerate().fold((0, 0.0f64), |acc, (i, v)| {
                if v.abs() > acc.1 {
                    (i, v.abs())
                } else {
                    acc
                }
            });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![0.0; n];
            x[jmax] = 1.0;
        }
        est
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::linalg::solvers::DenseSolveCore;

    #[test]
    fn solves_and_estimates_diagonal_condition() {
        let a = Mat::from_fn(4, 4, |i, j| {
            if i == j {
                [1.0, 2.0, 4.0, 100.0][i]
            } else {
                0.0
            }
        });
        let lu = DenseLu::factor(a.as_ref(), "test").unwrap();
        let x = lu.solve(&[1.0, 2.0, 4.0, 100.0]);
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
        assert!((lu.condition_estimate() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn estimate_matches_exact_for_small_dense_matrix() {
        let a = Mat::from_fn(3, 3, |i, j| {
            [[4.0, 1.0, 0.5], [2.0, 5.0, 1.0], [0.0, 1.0, 3.0]][i][j]
        });
        let lu = DenseLu::factor(a.as_ref(), "test").unwrap();
        let inv = lu.lu.inverse();
        let mut inv_norm = 0.0f64;
        for c in 0..3 {
            inv_norm = inv_norm.max((0..3).map(|r| inv[(r, c)].abs()).sum());
        }
        let exact = 7.0 * inv_norm;
        let est = lu.condition_estimate();
        assert!(est <= exact * (1.0 + 1e-12) && est >= 0.3 * exact);
    }

    #[test]
    fn transpose_solve_matches_factoring_the_transpose() {
        let m = [[4.0, 1.0, 0.5], [2.0, 5.0, 1.0], [0.0, 1.0, 3.0]];
        let a = Mat::from_fn(3, 3, |i, j| m[i][j]);
        let at = Mat::from_fn(3, 3, |i, j| m[j][i]);
        let lu_a = DenseLu::factor(a.as_ref(), "a").unwrap();
        let lu_at = DenseLu::factor(at.as_ref(), "at").unwrap();
        let b = [1.0, -2.0, 0.5];
        for (x, y) in lu_a.solve_transpose(&b).iter().zip(lu_at.solve(&b)) {
            assert!((x - y).abs() < 1e-14);
        }
        let (c1, c2) = (
            lu_a.condition_estimate_transpose(),
            lu_at.condition_estimate(),
        );
        assert!((c1 - c2).abs() < 1e-10 * c1);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = Mat::from_fn(3, 3, |i, j| (i + 1) as f64 * (j + 1) as f64);
        assert!(matches!(
            DenseLu::factor(a.as_ref(), "rank-one"),
            Err(Error::SingularSystem { .. })
        ));
    }
}
