//! Elements of `F* ⊗_A F`, the map `φ` onto trace-class operators, and
//! Haagerup norm bounds.
//!
//! A [`TensorElement`] is stored as a representation `Σ ⟨ξ_i| ⊗ |η_i⟩`; its
//! Haagerup norm is the infimum of `‖Σ⟨ξ_i|ξ_i⟩‖^{1/2} ‖Σ⟨η_i|η_i⟩‖^{1/2}`
//! over all representations. At level one that infimum equals the trace norm
//! of `φ(u)`, and [`factorize_trace_class`] builds a representation attaining it.

mod matrix;

pub use matrix::{
    matrix_dual_lower, matrix_haagerup_upper, verify_complete_isometry, IsometryReport,
    MatrixFactorization, MatrixTensor, SearchOptions,
};

use serde::Serialize;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::frames::FrameOfMultipliers;
use crate::linalg::{svd, CMatrix, C64};
use crate::module::{ket_bra, same_module, AdjointableOperator, ModuleElement, ModuleRef};
use crate::spectrum::{Field, Point};
use crate::traceclass::{abs_trace, trace_norm_module, TraceVerdict};

/// `Σ_i ⟨ξ_i| ⊗ |η_i⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorElement {
    module: ModuleRef,
    terms: Vec<(ModuleElement, ModuleElement)>,
}

impl TensorElement {
    pub fn new(module: &ModuleRef, terms: Vec<(ModuleElement, ModuleElement)>) -> Result<Self> {
        for (xi, eta) in &terms {
            if !same_module(xi.module(), module) || !same_module(eta.module(), module) {
                return Err(Error::ModuleMismatch("tensor term over a different module".into()));
            }
        }
        Ok(Self {
            module: module.clone(),
            terms,
        })
    }

    /// The tensor with no terms.
    pub fn zero(module: &ModuleRef) -> Self {
        Self {
            module: module.clone(),
            terms: Vec::new(),
        }
    }

    /// `⟨ξ| ⊗ |η⟩`.
    pub fn elementary(xi: &ModuleElement, eta: &ModuleElement) -> Result<Self> {
        Self::new(xi.module(), vec![(xi.clone(), eta.clone())])
    }

    pub fn module(&self) -> &ModuleRef {
        &self.module
    }

    pub fn terms(&self) -> &[(ModuleElement, ModuleElement)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Concatenates the representations.
    pub fn add(&self, other: &TensorElement) -> Result<Self> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(&self.module, terms)
    }

    /// Scales every `η_i`.
    pub fn scale(&self, s: C64) -> Self {
        Self {
            module: self.module.clone(),
            terms: self
                .terms
                .iter()
                .map(|(xi, eta)| (xi.clone(), eta.scale(s)))
                .collect(),
        }
    }

    /// Appends a `⟨0| ⊗ |0⟩` term.
    pub fn with_zero_term(&self) -> Self {
        let mut out = self.clone();
        let z = ModuleElement::zero(&self.module);
        out.terms.push((z.clone(), z));
        out
    }
}

/// The two representatives `Σ ⟨ξ_i a_i*| ⊗ |η_i⟩` and `Σ ⟨ξ_i| ⊗ |η_i a_i⟩`,
/// which are the same element of the balanced tensor product.
pub fn balanced_pair(
    u: &TensorElement,
    coefficients: &[AlgebraElement],
) -> Result<(TensorElement, TensorElement)> {
    if coefficients.len() != u.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} coefficients for {} terms",
            coefficients.len(),
            u.len()
        )));
    }
    let mut left = Vec::with_capacity(u.len());
    let mut right = Vec::with_capacity(u.len());
    for ((xi, eta), a) in u.terms.iter().zip(coefficients) {
        left.push((xi.mul_algebra(&a.conj())?, eta.clone()));
        right.push((xi.clone(), eta.mul_algebra(a)?));
    }
    Ok((
        TensorElement::new(&u.module, left)?,
        TensorElement::new(&u.module, right)?,
    ))
}

/// `φ(u) = Σ |η_i⟩⟨ξ_i|`.
pub fn phi(u: &TensorElement) -> Result<AdjointableOperator> {
    let mut acc = AdjointableOperator::zero(&u.module, &u.module);
    for (xi, eta) in &u.terms {
        acc = acc.add(&ket_bra(eta, xi)?)?;
    }
    Ok(acc)
}

/// `‖Σ⟨ξ_i|ξ_i⟩‖^{1/2} · ‖Σ⟨η_i|η_i⟩‖^{1/2}` for this representation.
pub fn haagerup_upper(u: &TensorElement) -> f64 {
    let spectrum = u.module.spectrum();
    let mut left = AlgebraElement::zero(spectrum.clone());
    let mut right = AlgebraElement::zero(spectrum.clone());
    for (xi, eta) in &u.terms {
        left = left.add(&xi.inner(xi).expect("same module")).expect("same spectrum");
        right = right.add(&eta.inner(eta).expect("same module")).expect("same spectrum");
    }
    left.norm().sqrt() * right.norm().sqrt()
}

/// The Haagerup norm at level one: the trace norm of `φ(u)`.
pub fn haagerup_norm(u: &TensorElement) -> Result<f64> {
    trace_norm_module(&phi(u)?)
}

/// Builds `u` with `φ(u) = t` whose representation bound equals the trace norm.
///
/// With `t = v|t|`, `s = |t|^{1/2}` and `r = v s`, the terms are
/// `ξ_i = s β_i`, `η_i = r β_i`. Terms with a zero side are dropped.
pub fn factorize_trace_class(
    t: &AdjointableOperator,
    frame: &FrameOfMultipliers,
) -> Result<TensorElement> {
    if !same_module(t.domain(), frame.module()) {
        return Err(Error::ModuleMismatch("frame is not a frame of the operator's module".into()));
    }
    if let TraceVerdict::Undefined(f) = abs_trace(t)? {
        return Err(Error::NotTraceClass(format!("{f:?}")));
    }
    let module = t.domain();
    let d = module.dim();
    let halves = t.field().try_map(|_, m| -> Result<(CMatrix, CMatrix)> {
        let s = svd(m)?;
        let rank = s.rank();
        let root = |basis: &CMatrix| {
            CMatrix::from_fn(d, d, |i, j| {
                (0..rank)
                    .map(|k| basis[(i, k)] * s.sigma[k].sqrt() * s.v[(j, k)].conj())
                    .sum()
            })
        };
        Ok((root(&s.v), root(&s.u)))
    })?;

    let mut terms = Vec::new();
    for b in frame.members() {
        let xi = ModuleElement::projected(module, |p| halves.get(p).expect("point").0.mul_vec(b.vector(p).expect("point")))?;
        let eta = ModuleElement::projected(module, |p| halves.get(p).expect("point").1.mul_vec(b.vector(p).expect("point")))?;
        if xi.is_zero() || eta.is_zero() {
            continue;
        }
        terms.push((xi, eta));
    }
    TensorElement::new(module, terms)
}

/// Norm of `u` alongside the bound of its stored representation and of the
/// optimal factorization.
#[derive(Clone, Debug, Serialize)]
pub struct HaagerupReport {
    pub norm: f64,
    pub representation_upper: f64,
    pub factorization_upper: f64,
    pub terms: usize,
}

pub fn haagerup_report(u: &TensorElement) -> Result<HaagerupReport> {
    let t = phi(u)?;
    let norm = trace_norm_module(&t)?;
    let frame = FrameOfMultipliers::canonical(&u.module)?;
    let f = factorize_trace_class(&t, &frame)?;
    Ok(HaagerupReport {
        norm,
        representation_upper: haagerup_upper(u),
        factorization_upper: haagerup_upper(&f),
        terms: u.len(),
    })
}

/// `Σ ⟨ξ_i| ⊗ |η_i⟩` for vectors in one Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTensor {
    pub dim: usize,
    pub terms: Vec<(Vec<C64>, Vec<C64>)>,
}

impl LocalTensor {
    /// `φ_H: ⟨ξ| ⊗ |η⟩ ↦ |η⟩⟨ξ|`.
    pub fn phi_h(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (xi, eta) in &self.terms {
            acc = &acc + &CMatrix::outer(eta, xi);
        }
        acc
    }
}

/// Localises every term: `ψ(u)(x) = Σ ⟨ξ_i(x)| ⊗ |η_i(x)⟩`.
pub fn psi(u: &TensorElement) -> Field<LocalTensor> {
    Field::from_fn(u.module.spectrum(), |p| LocalTensor {
        dim: u.module.dim(),
        terms: u
            .terms
            .iter()
            .map(|(xi, eta)| {
                (
                    xi.vector(p).expect("point").to_vec(),
                    eta.vector(p).expect("point").to_vec(),
                )
            })
            .collect(),
    })
}

/// `max_x ‖φ_H(ψ(u)(x)) - φ(u)_x‖`, entrywise.
pub fn psi_diagram_deviation(u: &TensorElement) -> Result<f64> {
    let t = phi(u)?;
    let local = psi(u);
    let mut worst: f64 = 0.0;
    for (p, lt) in local.iter() {
        worst = worst.max((&lt.phi_h() - t.matrix(p)?).max_abs());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Entries are bras; block `(i, k)` of the localised matrix is `ξ_{ik}(x)*`.
    Row,
    /// Entries are kets; block `(k, j)` of the localised matrix is `ξ_{kj}(x)`.
    Column,
}

/// `sup_x` of the largest singular value of the localised block matrix.
pub fn block_norm(grid: &[Vec<ModuleElement>], orientation: Orientation) -> Result<f64> {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    if grid.iter().any(|r| r.len() != cols) {
        return Err(Error::ShapeMismatch("ragged grid".into()));
    }
    if rows == 0 || cols == 0 {
        return Ok(0.0);
    }
    let module = grid[0][0].module().clone();
    if grid.iter().flatten().any(|e| !same_module(e.module(), &module)) {
        return Err(Error::ShapeMismatch("grid entries over different modules".into()));
    }
    let d = module.dim();
    let mut best: f64 = 0.0;
    for p in module.spectrum().points() {
        let m = localized_block(grid, p, d, orientation)?;
        best = best.max(crate::linalg::op_norm(&m)?);
    }
    Ok(best)
}

fn localized_block(
    grid: &[Vec<ModuleElement>],
    p: Point,
    d: usize,
    orientation: Orientation,
) -> Result<CMatrix> {
    let (rows, cols) = (grid.len(), grid[0].len());
    let mut m = match orientation {
        Orientation::Row => CMatrix::zeros(rows, cols * d),
        Orientation::Column => CMatrix::zeros(rows * d, cols),
    };
    for (i, row) in grid.iter().enumerate() {
        for (k, e) in row.iter().enumerate() {
            for (a, z) in e.vector(p)?.iter().enumerate() {
                match orientation {
                    Orientation::Row => m[(i, k * d + a)] = z.conj(),
                    Orientation::Column => m[(i * d + a, k)] = *z,
                }
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::HilbertModule;
    use crate::spectrum::Spectrum;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn free(points: usize, d: usize) -> ModuleRef {
        HilbertModule::free(Spectrum::numbered(points, false).unwrap(), d).into_ref()
    }

    fn e(m: &ModuleRef, i: usize) -> ModuleElement {
        ModuleElement::coordinate(m, i).unwrap()
    }

    #[test]
    fn phi_examples() {
        let m = free(1, 2);
        let u = TensorElement::elementary(&e(&m, 0), &e(&m, 1)).unwrap();
        let t = phi(&u).unwrap();
        let expected = CMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(t.matrix(Point::Finite(0)).unwrap(), &expected);

        let id = TensorElement::new(&m, vec![(e(&m, 0), e(&m, 0)), (e(&m, 1), e(&m, 1))]).unwrap();
        assert!(phi(&id).unwrap().distance(&AdjointableOperator::identity(&m)) == 0.0);
        assert!(phi(&id).unwrap().is_compact());
    }

    #[test]
    fn upper_examples() {
        let m = free(1, 2);
        let id = TensorElement::new(&m, vec![(e(&m, 0), e(&m, 0)), (e(&m, 1), e(&m, 1))]).unwrap();
        assert!((haagerup_upper(&id) - 2.0).abs() < 1e-15);
        let unit = TensorElement::elementary(&e(&m, 0), &e(&m, 1)).unwrap();
        assert_eq!(haagerup_upper(&unit), 1.0);
        assert_eq!(haagerup_upper(&unit.with_zero_term()), 1.0);
        assert_eq!(haagerup_upper(&TensorElement::zero(&m)), 0.0);
    }

    #[test]
    fn norm_examples() {
        let m = free(1, 2);
        let id = TensorElement::new(&m, vec![(e(&m, 0), e(&m, 0)), (e(&m, 1), e(&m, 1))]).unwrap();
        assert!((haagerup_norm(&id).unwrap() - 2.0).abs() < 1e-14);
        let unit = TensorElement::elementary(&e(&m, 0), &e(&m, 1)).unwrap();
        assert!((haagerup_norm(&unit).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(haagerup_norm(&TensorElement::zero(&m)).unwrap(), 0.0);
    }

    #[test]
    fn factorize_rank_one() {
        let m = free(2, 2);
        let s = 0.5f64.sqrt();
        let xi = ModuleElement::constant(&m, &[c(s), C64::new(0.0, s)]).unwrap();
        let eta = ModuleElement::constant(&m, &[c(0.6), c(0.8)]).unwrap();
        let t = ket_bra(&eta, &xi).unwrap();
        let f = FrameOfMultipliers::standard(&m).unwrap();
        let u = factorize_trace_class(&t, &f).unwrap();
        assert!(phi(&u).unwrap().distance(&t) < 1e-12);
        assert!((haagerup_upper(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factorize_identity_and_zero() {
        let m = free(1, 2);
        let f = FrameOfMultipliers::standard(&m).unwrap();
        let u = factorize_trace_class(&AdjointableOperator::identity(&m), &f).unwrap();
        assert!((haagerup_upper(&u) - 2.0).abs() < 1e-12);
        let z = factorize_trace_class(&AdjointableOperator::zero(&m, &m), &f).unwrap();
        assert!(z.is_empty());
        assert_eq!(haagerup_upper(&z), 0.0);
    }

    #[test]
    fn factorize_rejects_non_trace_class() {
        let m = HilbertModule::free(Spectrum::numbered(1, true).unwrap(), 1).into_ref();
        let f = FrameOfMultipliers::standard(&m).unwrap();
        let r = factorize_trace_class(&AdjointableOperator::identity(&m), &f);
        assert!(matches!(r, Err(Error::NotTraceClass(_))));
    }

    #[test]
    fn balanced_rewrites_share_phi() {
        let m = free(2, 2);
        let u = TensorElement::elementary(&e(&m, 0), &e(&m, 1)).unwrap();
        let a = AlgebraElement::new(m.spectrum().clone(), vec![C64::new(1.0, 2.0), c(-3.0)], None).unwrap();
        let (l, r) = balanced_pair(&u, &[a]).unwrap();
        assert_eq!(phi(&l).unwrap().distance(&phi(&r).unwrap()), 0.0);
        assert!((haagerup_norm(&l).unwrap() - haagerup_norm(&r).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn psi_examples() {
        let m = free(3, 2);
        let u = TensorElement::elementary(&e(&m, 0), &e(&m, 1)).unwrap();
        let local = psi(&u);
        assert!(local.values().all(|l| l == local.finite().first().unwrap()));
        assert_eq!(psi_diagram_deviation(&u).unwrap(), 0.0);
        let z = psi(&TensorElement::zero(&m));
        assert!(z.values().all(|l| l.phi_h().max_abs() == 0.0));
    }

    #[test]
    fn block_norm_examples() {
        let m = free(1, 2);
        assert_eq!(block_norm(&[vec![e(&m, 0)]], Orientation::Column).unwrap(), 1.0);
        let two = vec![vec![e(&m, 0), e(&m, 1)]];
        assert!((block_norm(&two, Orientation::Column).unwrap() - 1.0).abs() < 1e-15);
        let v = ModuleElement::constant(&m, &[c(3.0), c(4.0)]).unwrap();
        let col = block_norm(&[vec![v.clone()]], Orientation::Column).unwrap();
        let row = block_norm(&[vec![v]], Orientation::Row).unwrap();
        assert!((col - row).abs() < 1e-15 && (col - 5.0).abs() < 1e-14);
        let ragged = vec![vec![e(&m, 0)], vec![]];
        assert!(matches!(block_norm(&ragged, Orientation::Row), Err(Error::ShapeMismatch(_))));
    }
}
