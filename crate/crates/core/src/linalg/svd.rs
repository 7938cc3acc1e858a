use super::{jacobi_rotation, rotate_columns, vdot, vnorm, CMatrix, C64, MAX_SWEEPS, ZERO};
use crate::error::{Error, Result};

/// Thin singular value decomposition `m = u diag(sigma) v*`.
#[derive(Clone, Debug)]
pub struct Svd {
    /// `rows x k` with orthonormal columns, `k = min(rows, cols)`.
    pub u: CMatrix,
    /// Descending, non-negative.
    pub sigma: Vec<f64>,
    /// `cols x k` with orthonormal columns.
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let (r, c) = (self.u.rows(), self.v.rows());
        CMatrix::from_fn(r, c, |i, j| {
            self.sigma
                .iter()
                .enumerate()
                .map(|(k, &s)| self.u[(i, k)] * s * self.v[(j, k)].conj())
                .sum()
        })
    }

    /// Number of singular values above `RANK_THRESHOLD * sigma_max`.
    pub fn rank(&self) -> usize {
        let cut = super::RANK_THRESHOLD * self.sigma.first().copied().unwrap_or(0.0);
        self.sigma.iter().take_while(|&&s| s > cut && s > 0.0).count()
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(m: &CMatrix) -> Result<Svd> {
    if !m.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    if m.rows() < m.cols() {
        let t = tall_svd(&m.adjoint())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    tall_svd(m)
}

fn tall_svd(m: &CMatrix) -> Result<Svd> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut v = CMatrix::identity(cols);
    let scale = m.frobenius();
    // Columns below this norm are rounding noise and get completed later.
    let negligible = 1e-2 * f64::EPSILON * scale;

    if scale > 0.0 {
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..cols {
                for q in p + 1..cols {
                    let cp = a.column(p);
                    let cq = a.column(q);
                    let alpha = vdot(&cp, &cp).re;
                    let beta = vdot(&cq, &cq).re;
                    if alpha.sqrt() <= negligible || beta.sqrt() <= negligible {
                        continue;
                    }
                    let gamma = vdot(&cp, &cq);
                    if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let (g, _) = jacobi_rotation(alpha, beta, gamma);
                    rotate_columns(&mut a, p, q, &g);
                    rotate_columns(&mut v, p, q, &g);
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                routine: "svd",
                sweeps: MAX_SWEEPS,
            });
        }
    }

    let norms: Vec<f64> = (0..cols).map(|j| vnorm(&a.column(j))).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u_cols: Vec<Vec<C64>> = Vec::with_capacity(cols);
    let mut missing = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > negligible && norms[j] > 0.0 {
            let inv = 1.0 / norms[j];
            u_cols.push(a.column(j).iter().map(|z| z * inv).collect());
        } else {
            u_cols.push(vec![ZERO; rows]);
            missing.push(k);
        }
    }
    for k in missing {
        let filled: Vec<&Vec<C64>> = u_cols
            .iter()
            .enumerate()
            .filter(|(i, c)| *i != k && vnorm(c) > 0.0)
            .map(|(_, c)| c)
            .collect();
        let w = complement_vector(rows, &filled);
        u_cols[k] = w;
    }

    let sigma = order.iter().map(|&j| norms[j]).collect();
    let u = CMatrix::from_columns(rows, &u_cols);
    let v = CMatrix::from_fn(cols, cols, |i, k| v[(i, order[k])]);
    Ok(Svd { u, sigma, v })
}

/// Unit vector orthogonal to every vector in `basis` (assumed orthonormal, fewer than `n`).
fn complement_vector(n: usize, basis: &[&Vec<C64>]) -> Vec<C64> {
    let mut best: Option<(f64, Vec<C64>)> = None;
    for e in 0..n {
        let mut w = vec![ZERO; n];
        w[e] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in basis {
                let proj = vdot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b.iter()) {
                    *wi -= proj * bi;
                }
            }
        }
        let nw = vnorm(&w);
        if best.as_ref().is_none_or(|(bn, _)| nw > *bn) {
            best = Some((nw, w));
        }
    }
    let (nw, w) = best.expect("n > 0");
    w.into_iter().map(|z| z / nw).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormal_columns(m: &CMatrix) -> f64 {
        let g = &m.adjoint() * m;
        (&g - &CMatrix::identity(m.cols())).max_abs()
    }

    #[test]
    fn nilpotent_2x2() {
        // m*m = diag(0, 4) → σ = (2, 0).
        let m = CMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let s = svd(&m).unwrap();
        assert!((s.sigma[0] - 2.0).abs() < 1e-15);
        assert_eq!(s.sigma[1], 0.0);
        assert!(orthonormal_columns(&s.u) < 1e-15);
        assert!(orthonormal_columns(&s.v) < 1e-15);
        assert!((&s.reconstruct() - &m).max_abs() < 1e-15);
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let s = svd(&CMatrix::identity(4)).unwrap();
        assert_eq!(s.sigma, vec![1.0; 4]);
    }

    #[test]
    fn rank_one_product_of_norms() {
        // |a><b| with ‖a‖ = 3, ‖b‖ = 2 → σ = (6, 0, 0).
        let a = [C64::new(3.0, 0.0), ZERO, ZERO];
        let b = [ZERO, C64::new(0.0, 2.0), ZERO];
        let m = CMatrix::outer(&a, &b);
        let s = svd(&m).unwrap();
        assert!((s.sigma[0] - 6.0).abs() < 1e-14);
        assert!(s.sigma[1].abs() < 1e-14 && s.sigma[2].abs() < 1e-14);
        assert_eq!(s.rank(), 1);
        assert!(orthonormal_columns(&s.u) < 1e-14);
    }

    #[test]
    fn wide_and_tall_shapes() {
        let m = CMatrix::from_fn(2, 4, |i, j| C64::new((i + j) as f64, (i * j) as f64 - 1.0));
        let s = svd(&m).unwrap();
        assert_eq!((s.u.rows(), s.u.cols(), s.v.rows(), s.v.cols()), (2, 2, 4, 2));
        assert!((&s.reconstruct() - &m).max_abs() < 1e-13);
        let t = svd(&m.adjoint()).unwrap();
        assert_eq!(t.u.rows(), 4);
        for (x, y) in s.sigma.iter().zip(&t.sigma) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_matrix_gets_orthonormal_factors() {
        let s = svd(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(s.sigma, vec![0.0; 3]);
        assert!(orthonormal_columns(&s.u) < 1e-15);
    }
}
