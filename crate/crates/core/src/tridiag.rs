//! Tridiagonal systems: storage, products and a pivoting direct solver.

use crate::error::{HardyError, Result};

/// `A` with sub-diagonal `lower`, diagonal `diag` and super-diagonal `upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagSolution {
    pub x: Vec<f64>,
    /// Row interchanges performed by partial pivoting.
    pub row_swaps: usize,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .all(|(l, u)| (l - u).abs() <= tol * l.abs().max(u.abs()))
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Max row sum of `|A|`.
    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.lower[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.upper[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// `‖Ax - b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)`, or 0 for a zero problem.
    pub fn scaled_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.mul(x);
        let r = ax.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let denom = self.norm_inf() * xn + bn;
        if denom == 0.0 {
            0.0
        } else {
            r / denom
        }
    }

    /// Gaussian elimination with scaled partial pivoting (the `gtsv` scheme:
    /// a row swap creates fill in a second super-diagonal).
    pub fn solve(&self, b: &[f64]) -> Result<TridiagSolution> {
        let n = self.len();
        if b.len() != n {
            return Err(HardyError::invalid(format!(
                "right-hand side has {} entries for {n} unknowns",
                b.len()
            )));
        }
        if n == 0 {
            return Ok(TridiagSolution {
                x: Vec::new(),
                row_swaps: 0,
            });
        }
        let mut d = self.diag.clone();
        let mut du = self.upper.clone();
        let mut dl = self.lower.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut x = b.to_vec();
        let scale: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s = s.max(self.lower[i - 1].abs());
                }
                if i + 1 < n {
                    s = s.max(self.upper[i].abs());
                }
                if s == 0.0 {
                    1.0
                } else {
                    s
                }
            })
            .collect();
        let tiny = f64::EPSILON * n as f64;
        let mut swaps = 0;

        for i in 0..n - 1 {
            if d[i].abs() / scale[i] >= dl[i].abs() / scale[i + 1] {
                if d[i].abs() <= tiny * scale[i] {
                    return Err(HardyError::SingularSystem { row: i });
                }
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                x[i + 1] -= fact * x[i];
                dl[i] = 0.0;
            } else {
                swaps += 1;
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                du[i] = temp;
                let t = x[i];
                x[i] = x[i + 1];
                x[i + 1] = t - fact * x[i + 1];
            }
        }
        if d[n - 1].abs() <= tiny * scale[n - 1] {
            return Err(HardyError::SingularSystem { row: n - 1 });
        }

        x[n - 1] /= d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        Ok(TridiagSolution { x, row_swaps: swaps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solves_laplacian() {
        let n = 50;
        let mut a = Tridiagonal::zeros(n);
        a.diag.iter_mut().for_each(|d| *d = 2.0);
        a.lower.iter_mut().for_each(|d| *d = -1.0);
        a.upper.iter_mut().for_each(|d| *d = -1.0);
        let b = vec![1.0; n];
        let s = a.solve(&b).unwrap();
        assert!(a.scaled_residual(&s.x, &b) < 1e-14);
        assert_eq!(s.row_swaps, 0);
    }

    #[test]
    fn pivots_on_zero_diagonal() {
        let a = Tridiagonal {
            lower: vec![1.0, 1.0],
            diag: vec![0.0, 0.0, 1.0],
            upper: vec![1.0, 1.0],
        };
        let b = [1.0, 2.0, 3.0];
        let s = a.solve(&b).unwrap();
        assert!(s.row_swaps > 0);
        assert!(a.scaled_residual(&s.x, &b) < 1e-15);
    }

    #[test]
    fn reports_singular() {
        let a = Tridiagonal {
            lower: vec![1.0],
            diag: vec![1.0, 1.0],
            upper: vec![1.0],
        };
        assert!(matches!(a.solve(&[1.0, 1.0]), Err(HardyError::SingularSystem { .. })));
    }

    proptest! {
        #[test]
        fn random_diagonally_dominant_systems(
            n in 2usize..40,
            seed in proptest::collection::vec(-1.0f64..1.0, 200),
        ) {
            let mut a = Tridiagonal::zeros(n);
            a.lower.copy_from_slice(&seed[..n - 1]);
            a.upper.copy_from_slice(&seed[50..49 + n]);
            for i in 0..n {
                a.diag[i] = 2.5 + seed[100 + i];
            }
            let b: Vec<f64> = (0..n).map(|i| seed[150 + i % 50]).collect();
            let s = a.solve(&b).unwrap();
            prop_assert!(a.scaled_residual(&s.x, &b) < 1e-13);
        }

        #[test]
        fn random_general_systems(
            n in 2usize..30,
            seed in proptest::collection::vec(-1.0f64..1.0, 120),
        ) {
            let mut a = Tridiagonal::zeros(n);
            a.lower.copy_from_slice(&seed[..n - 1]);
            a.upper.copy_from_slice(&seed[30..29 + n]);
            a.diag.copy_from_slice(&seed[60..60 + n]);
            let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
            if let Ok(s) = a.solve(&b) {
                prop_assert!(a.scaled_residual(&s.x, &b) < 1e-8);
            }
        }
    }
}
