//! Seeded random instances: spectra, projection-field modules, elements,
//! operators, frames and tensors.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::frames::FrameOfMultipliers;
use crate::haagerup::{MatrixTensor, TensorElement};
use crate::linalg::{polar, CMatrix, C64, ZERO};
use crate::module::{AdjointableOperator, HilbertModule, ModuleElement, ModuleRef};
use crate::spectrum::{Field, Point, Spectrum};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    (0..len).map(|_| complex_normal(rng)).collect()
}

/// `rows x cols` matrix with orthonormal columns, `cols ≤ rows`.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Result<CMatrix> {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let g = gaussian_matrix(rng, rows, rows);
    let u = polar(&g)?.isometry;
    Ok(u.block(0, 0, rows, cols))
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<CMatrix> {
    random_isometry(rng, n, n)
}

/// Orthogonal projection of rank `rank` in dimension `d`.
pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> Result<CMatrix> {
    let q = random_isometry(rng, d, rank)?;
    Ok(&q * &q.adjoint())
}

/// `1..=max_points` finite points, with infinity when asked.
pub fn random_spectrum<R: Rng + ?Sized>(rng: &mut R, max_points: usize, infinity: bool) -> Arc<Spectrum> {
    let n = rng.random_range(1..=max_points.max(1));
    Spectrum::numbered(n, infinity).expect("numbered spectrum is valid")
}

/// Module with a random projection of random rank in `1..=d` at each point.
pub fn random_projection_module<R: Rng + ?Sized>(
    rng: &mut R,
    spectrum: &Arc<Spectrum>,
    d: usize,
) -> Result<ModuleRef> {
    let projections = Field::try_from_fn(spectrum, |_| {
        let rank = rng.random_range(1..=d);
        random_projection(rng, d, rank)
    })?;
    Ok(HilbertModule::new(spectrum.clone(), d, projections)?.into_ref())
}

/// Random element of the module, vanishing at infinity.
pub fn random_element<R: Rng + ?Sized>(rng: &mut R, module: &ModuleRef) -> Result<ModuleElement> {
    let d = module.dim();
    ModuleElement::projected(module, |p| match p {
        Point::Infinity => vec![ZERO; d],
        Point::Finite(_) => gaussian_vector(rng, d),
    })
}

/// Random compact operator `t_x = p_x g_x p_x`, zero at infinity.
pub fn random_operator<R: Rng + ?Sized>(rng: &mut R, module: &ModuleRef) -> Result<AdjointableOperator> {
    let d = module.dim();
    AdjointableOperator::compressed(module, module, |p| match p {
        Point::Infinity => CMatrix::zeros(d, d),
        Point::Finite(_) => gaussian_matrix(rng, d, d),
    })?
    .with_compact(true)
}

/// Random compact positive operator `p g g* p`, zero at infinity.
pub fn random_positive<R: Rng + ?Sized>(rng: &mut R, module: &ModuleRef) -> Result<AdjointableOperator> {
    let d = module.dim();
    AdjointableOperator::compressed(module, module, |p| match p {
        Point::Infinity => CMatrix::zeros(d, d),
        Point::Finite(_) => {
            let g = gaussian_matrix(rng, d, d);
            &g * &g.adjoint()
        }
    })?
    .with_compact(true)
}

/// Parseval frame with `count ≥ d` members, `β_{i,x} = p_x W_x* e_i` for a
/// random `count x d` isometry `W_x`.
pub fn random_frame<R: Rng + ?Sized>(
    rng: &mut R,
    module: &ModuleRef,
    count: usize,
) -> Result<FrameOfMultipliers> {
    let d = module.dim();
    let count = count.max(d);
    let ws = Field::try_from_fn(module.spectrum(), |_| random_isometry(rng, count, d))?;
    let members = (0..count)
        .map(|i| {
            ModuleElement::projected(module, |p| {
                let w = ws.get(p).expect("point");
                (0..d).map(|a| w[(i, a)].conj()).collect()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FrameOfMultipliers::new(module, members)
}

/// `Σ_{i < terms} ⟨ξ_i| ⊗ |η_i⟩` with random elements.
pub fn random_tensor<R: Rng + ?Sized>(rng: &mut R, module: &ModuleRef, terms: usize) -> Result<TensorElement> {
    let terms = (0..terms)
        .map(|_| Ok((random_element(rng, module)?, random_element(rng, module)?)))
        .collect::<Result<Vec<_>>>()?;
    TensorElement::new(module, terms)
}

pub fn random_matrix_tensor<R: Rng + ?Sized>(
    rng: &mut R,
    module: &ModuleRef,
    n: usize,
    terms: usize,
) -> Result<MatrixTensor> {
    let entries = (0..n * n)
        .map(|_| random_tensor(rng, module, terms))
        .collect::<Result<Vec<_>>>()?;
    MatrixTensor::new(module, n, entries)
}

/// Random real-valued function on the spectrum, zero at infinity.
pub fn random_algebra_element<R: Rng + ?Sized>(
    rng: &mut R,
    spectrum: &Arc<Spectrum>,
) -> crate::algebra::AlgebraElement {
    crate::algebra::AlgebraElement::from_fn(spectrum.clone(), |p| match p {
        Point::Infinity => ZERO,
        Point::Finite(_) => complex_normal(rng),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::is_frame;

    #[test]
    fn generated_objects_are_valid() {
        let mut r = rng(7);
        for _ in 0..20 {
            let s = random_spectrum(&mut r, 4, true);
            let m = random_projection_module(&mut r, &s, 3).unwrap();
            let f = random_frame(&mut r, &m, 5).unwrap();
            assert!(is_frame(&m, f.members()).unwrap().is_frame);
            assert!(random_element(&mut r, &m).unwrap().is_in_module());
            assert!(random_positive(&mut r, &m).unwrap().is_compact());
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let a = random_unitary(&mut rng(3), 4).unwrap();
        let b = random_unitary(&mut rng(3), 4).unwrap();
        assert_eq!(a, b);
        let id = &a * &a.adjoint();
        assert!((&id - &CMatrix::identity(4)).max_abs() < 1e-12);
    }
}
