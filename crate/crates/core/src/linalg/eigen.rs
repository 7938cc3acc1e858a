use super::{jacobi_rotation, rotate_columns, rotate_rows_adjoint, CMatrix, C64, MAX_SWEEPS};
use crate::error::{Error, Result};

/// Relative tolerance on `‖m - m*‖_max` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Off-diagonal entries below this fraction of `‖m‖_F` are not rotated away.
const SKIP_TOL: f64 = 1e-18;

#[derive(Clone, Debug)]
pub struct HermEig {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: CMatrix,
}

impl HermEig {
    /// `U diag(λ) U*`.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_spectral(|l| l)
    }

    /// `U diag(f(λ)) U*`.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        CMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| u[(i, k)] * f(self.values[k]) * u[(j, k)].conj())
                .sum()
        })
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn herm_eig(m: &CMatrix) -> Result<HermEig> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "herm_eig needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("herm_eig input"));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL * (1.0 + m.max_abs()) {
        return Err(Error::NonHermitian { deviation });
    }

    let n = m.rows();
    let mut a = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    });
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius();

    if scale > 0.0 {
        let skip = SKIP_TOL * scale;
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq.norm() <= skip {
                        continue;
                    }
                    rotated = true;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let (g, t) = jacobi_rotation(app, aqq, apq);
                    rotate_columns(&mut a, p, q, &g);
                    rotate_rows_adjoint(&mut a, p, q, &g);
                    rotate_columns(&mut v, p, q, &g);
                    let r = apq.norm();
                    a[(p, p)] = C64::new(app - t * r, 0.0);
                    a[(q, q)] = C64::new(aqq + t * r, 0.0);
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                routine: "herm_eig",
                sweeps: MAX_SWEEPS,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermEig { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_input_sorts_ascending() {
        let e = herm_eig(&CMatrix::from_real_diag(&[2.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0]);
        // permutation of identity columns
        assert_eq!(e.vectors[(1, 0)].norm(), 1.0);
        assert_eq!(e.vectors[(0, 1)].norm(), 1.0);
    }

    #[test]
    fn swap_matrix_by_characteristic_polynomial() {
        // λ² - 1 = 0 → λ = ±1, eigenvectors (1, ∓1)/√2.
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = herm_eig(&m).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v0 = e.vectors.column(0);
        let ratio = v0[1] / v0[0];
        assert!((ratio - c(-1.0, 0.0)).norm() < 1e-12);
        let v1 = e.vectors.column(1);
        assert!((v1[1] / v1[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((v0[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let e = herm_eig(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
        assert_eq!(e.vectors, CMatrix::identity(3));
    }

    #[test]
    fn complex_hermitian_2x2() {
        // [[2, i], [-i, 2]] has λ = 1, 3.
        let m = CMatrix::new(2, 2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)])
            .unwrap();
        let e = herm_eig(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        assert!((&e.reconstruct() - &m).max_abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_rectangular() {
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(herm_eig(&m), Err(Error::NonHermitian { .. })));
        assert!(matches!(
            herm_eig(&CMatrix::zeros(2, 3)),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
