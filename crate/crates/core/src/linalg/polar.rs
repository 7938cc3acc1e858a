use super::{herm_eig, svd, CMatrix};
use crate::error::{Error, Result};

/// Eigenvalues above `-PSD_CLAMP * ‖m‖` are clamped to zero by [`sqrt_psd`].
pub const PSD_CLAMP: f64 = 1e-10;

/// `m = isometry * modulus` with `modulus = (m* m)^{1/2}`.
#[derive(Clone, Debug)]
pub struct Polar {
    /// Partial isometry supported on the range of `modulus`.
    pub isometry: CMatrix,
    pub modulus: CMatrix,
}

/// Polar decomposition of a square matrix, assembled from its SVD.
///
/// Singular directions with `σ ≤ RANK_THRESHOLD · σ_max` are dropped from the
/// isometry so that it is an exact partial isometry.
pub fn polar(m: &CMatrix) -> Result<Polar> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "polar needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let s = svd(m)?;
    let rank = s.rank();
    let modulus = CMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| s.v[(i, k)] * s.sigma[k] * s.v[(j, k)].conj())
            .sum()
    });
    let isometry = CMatrix::from_fn(n, n, |i, j| {
        (0..rank).map(|k| s.u[(i, k)] * s.v[(j, k)].conj()).sum()
    });
    Ok(Polar { isometry, modulus })
}

/// Positive square root of a positive semidefinite matrix.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let e = herm_eig(m)?;
    let norm = e.values.iter().map(|l| l.abs()).fold(0.0, f64::max);
    if let Some(&lowest) = e.values.first() {
        if lowest < -PSD_CLAMP * norm {
            return Err(Error::NotPositive {
                point: "matrix".into(),
                eigenvalue: lowest,
            });
        }
    }
    Ok(e.apply_spectral(|l| l.max(0.0).sqrt()))
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0.0);
    }
    Ok(svd(m)?.sigma[0])
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(svd(m)?.sigma.iter().sum())
}
