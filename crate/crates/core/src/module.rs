//! Hilbert modules presented as projection fields inside free modules.
//!
//! A module of ambient dimension `d` over a spectrum assigns an orthogonal
//! projection `p_x` on `C^d` to every point. Its elements are vector fields with
//! `p_x ξ_x = ξ_x`, and adjointable operators between two such modules are
//! matrix fields compatible with both projections. Localisation at a point is
//! simply reading off the stored value.

use std::sync::Arc;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::linalg::{op_norm, vdot, vnorm, CMatrix, C64, ONE, ZERO};
use crate::spectrum::{same_spectrum, Field, Point, Spectrum};

/// Tolerance for projection identities and compatibility checks.
pub const STRUCTURE_TOL: f64 = 1e-9;

pub type ModuleRef = Arc<HilbertModule>;

#[derive(Clone, Debug, PartialEq)]
pub struct HilbertModule {
    spectrum: Arc<Spectrum>,
    dim: usize,
    projections: Field<CMatrix>,
    truncated: bool,
}

impl HilbertModule {
    /// A module given by one projection per point (and at infinity when present).
    pub fn new(spectrum: Arc<Spectrum>, dim: usize, projections: Field<CMatrix>) -> Result<Self> {
        if projections.finite().len() != spectrum.len()
            || projections.infinity().is_some() != spectrum.has_infinity()
        {
            return Err(Error::ShapeMismatch(
                "projection field does not match the spectrum".into(),
            ));
        }
        for (p, proj) in projections.iter() {
            let label = spectrum.label(p).to_string();
            if proj.rows() != dim || proj.cols() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "projection at {label} is {}x{}, expected {dim}x{dim}",
                    proj.rows(),
                    proj.cols()
                )));
            }
            let deviation = proj
                .hermitian_deviation()
                .max((&(proj * proj) - proj).max_abs());
            if deviation > STRUCTURE_TOL {
                return Err(Error::InvalidProjection {
                    point: label,
                    deviation,
                });
            }
        }
        Ok(Self {
            spectrum,
            dim,
            projections,
            truncated: false,
        })
    }

    /// The free module `C0(X, C^dim)`.
    pub fn free(spectrum: Arc<Spectrum>, dim: usize) -> Self {
        let projections = Field::from_fn(&spectrum, |_| CMatrix::identity(dim));
        Self {
            spectrum,
            dim,
            projections,
            truncated: false,
        }
    }

    /// Marks the ambient space as a finite truncation of an infinite-dimensional
    /// Hilbert space: every frame of such a module is a prefix of an infinite
    /// frame, and operators may declare the limit of their fibre traces at
    /// infinity.
    pub fn truncated(mut self, truncated: bool) -> Self {
        self.truncated = truncated;
        self
    }

    pub fn into_ref(self) -> ModuleRef {
        Arc::new(self)
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn projections(&self) -> &Field<CMatrix> {
        &self.projections
    }

    pub fn projection(&self, p: Point) -> Result<&CMatrix> {
        self.projections
            .get(p)
            .ok_or_else(|| Error::UnknownPoint(p.to_string()))
    }

    /// Rank of the fibre at `p`.
    pub fn rank_at(&self, p: Point) -> Result<usize> {
        Ok(self.projection(p)?.trace().re.round() as usize)
    }

    pub fn is_free(&self) -> bool {
        let id = CMatrix::identity(self.dim);
        self.projections
            .values()
            .all(|p| (p - &id).max_abs() <= 1e-12)
    }

    /// The ambient free module of the same dimension and truncation.
    pub fn ambient(&self) -> Self {
        Self::free(self.spectrum.clone(), self.dim).truncated(self.truncated)
    }
}

pub(crate) fn same_module(a: &ModuleRef, b: &ModuleRef) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

fn require_same(a: &ModuleRef, b: &ModuleRef, what: &str) -> Result<()> {
    if same_module(a, b) {
        Ok(())
    } else {
        Err(Error::ModuleMismatch(what.to_string()))
    }
}

/// A multiplier of the module: a vector field `x ↦ ξ_x ∈ range(p_x)`.
///
/// When the spectrum has a point at infinity the value there is stored too;
/// the field is an element of the module itself exactly when it vanishes there.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleElement {
    module: ModuleRef,
    vectors: Field<Vec<C64>>,
}

impl ModuleElement {
    pub fn new(module: &ModuleRef, vectors: Field<Vec<C64>>) -> Result<Self> {
        let spectrum = module.spectrum();
        if vectors.finite().len() != spectrum.len()
            || vectors.infinity().is_some() != spectrum.has_infinity()
        {
            return Err(Error::ShapeMismatch(
                "vector field does not match the spectrum".into(),
            ));
        }
        for (p, v) in vectors.iter() {
            let label = spectrum.label(p).to_string();
            if v.len() != module.dim() {
                return Err(Error::ShapeMismatch(format!(
                    "vector at {label} has length {}, expected {}",
                    v.len(),
                    module.dim()
                )));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite("module element"));
            }
            let pv = module.projection(p)?.mul_vec(v);
            let deviation = pv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if deviation > STRUCTURE_TOL * (1.0 + vnorm(v)) {
                return Err(Error::OutsideModule {
                    point: label,
                    deviation,
                });
            }
        }
        Ok(Self {
            module: module.clone(),
            vectors,
        })
    }

    pub fn from_fn(module: &ModuleRef, f: impl FnMut(Point) -> Vec<C64>) -> Result<Self> {
        Self::new(module, Field::from_fn(module.spectrum(), f))
    }

    /// Projects arbitrary ambient vectors into the module.
    pub fn projected(module: &ModuleRef, mut f: impl FnMut(Point) -> Vec<C64>) -> Result<Self> {
        let vectors = module.projections().try_map(|p, proj| {
            let v = f(p);
            if v.len() != module.dim() {
                return Err(Error::ShapeMismatch(format!(
                    "vector of length {}, expected {}",
                    v.len(),
                    module.dim()
                )));
            }
            Ok(proj.mul_vec(&v))
        })?;
        Ok(Self {
            module: module.clone(),
            vectors,
        })
    }

    /// Constant field equal to `v` everywhere, infinity included.
    pub fn constant(module: &ModuleRef, v: &[C64]) -> Result<Self> {
        Self::from_fn(module, |_| v.to_vec())
    }

    /// Constant coordinate field `e_i`.
    pub fn coordinate(module: &ModuleRef, i: usize) -> Result<Self> {
        let mut e = vec![ZERO; module.dim()];
        e[i] = ONE;
        Self::constant(module, &e)
    }

    pub fn zero(module: &ModuleRef) -> Self {
        Self {
            module: module.clone(),
            vectors: Field::from_fn(module.spectrum(), |_| vec![ZERO; module.dim()]),
        }
    }

    pub fn module(&self) -> &ModuleRef {
        &self.module
    }

    pub fn field(&self) -> &Field<Vec<C64>> {
        &self.vectors
    }

    /// Localisation `ξ_x`.
    pub fn vector(&self, p: Point) -> Result<&[C64]> {
        self.vectors
            .get(p)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownPoint(p.to_string()))
    }

    /// `sup_x ‖ξ_x‖`, infinity included.
    pub fn norm(&self) -> f64 {
        self.vectors.values().map(|v| vnorm(v)).fold(0.0, f64::max)
    }

    /// Whether this multiplier is an element of the module (vanishes at infinity).
    pub fn is_in_module(&self) -> bool {
        match self.vectors.infinity() {
            None => true,
            Some(v) => vnorm(v) <= STRUCTURE_TOL * (1.0 + self.norm()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vectors.values().all(|v| v.iter().all(|z| *z == ZERO))
    }

    /// The algebra-valued inner product `x ↦ ⟨ξ_x | η_x⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ModuleElement) -> Result<AlgebraElement> {
        require_same(&self.module, &other.module, "inner product across modules")?;
        Ok(AlgebraElement::from_field(
            self.module.spectrum().clone(),
            self.vectors.zip_map(&other.vectors, |a, b| vdot(a, b)),
        ))
    }

    pub fn add(&self, other: &ModuleElement) -> Result<Self> {
        require_same(&self.module, &other.module, "sum across modules")?;
        Ok(Self {
            module: self.module.clone(),
            vectors: self
                .vectors
                .zip_map(&other.vectors, |a, b| a.iter().zip(b).map(|(x, y)| x + y).collect()),
        })
    }

    pub fn sub(&self, other: &ModuleElement) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            module: self.module.clone(),
            vectors: self.vectors.map(|v| v.iter().map(|z| z * s).collect()),
        }
    }

    /// Right action of the algebra: `(ξ a)_x = ξ_x a(x)`.
    pub fn mul_algebra(&self, a: &AlgebraElement) -> Result<Self> {
        if !same_spectrum(self.module.spectrum(), a.spectrum()) {
            return Err(Error::SpectrumMismatch);
        }
        Ok(Self {
            module: self.module.clone(),
            vectors: self
                .vectors
                .zip_map(a.field(), |v, s| v.iter().map(|z| z * s).collect()),
        })
    }

    /// `max_x ‖ξ_x - η_x‖`.
    pub fn distance(&self, other: &ModuleElement) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }
}

/// An adjointable operator `F → E`, stored as its field of localisations.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointableOperator {
    domain: ModuleRef,
    codomain: ModuleRef,
    matrices: Field<CMatrix>,
    compact: bool,
    trace_at_infinity: Option<C64>,
}

impl AdjointableOperator {
    pub fn new(domain: &ModuleRef, codomain: &ModuleRef, matrices: Field<CMatrix>) -> Result<Self> {
        if !same_spectrum(domain.spectrum(), codomain.spectrum()) {
            return Err(Error::SpectrumMismatch);
        }
        let spectrum = domain.spectrum();
        if matrices.finite().len() != spectrum.len()
            || matrices.infinity().is_some() != spectrum.has_infinity()
        {
            return Err(Error::ShapeMismatch(
                "matrix field does not match the spectrum".into(),
            ));
        }
        for (p, t) in matrices.iter() {
            let label = spectrum.label(p).to_string();
            if t.rows() != codomain.dim() || t.cols() != domain.dim() {
                return Err(Error::ShapeMismatch(format!(
                    "operator at {label} is {}x{}, expected {}x{}",
                    t.rows(),
                    t.cols(),
                    codomain.dim(),
                    domain.dim()
                )));
            }
            if !t.is_finite() {
                return Err(Error::NonFinite("operator"));
            }
            let q = codomain.projection(p)?;
            let pr = domain.projection(p)?;
            let deviation = (&(&(q * t) * pr) - t).max_abs();
            if deviation > STRUCTURE_TOL * (1.0 + t.max_abs()) {
                return Err(Error::OutsideModule {
                    point: label,
                    deviation,
                });
            }
        }
        Ok(Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrices,
            compact: false,
            trace_at_infinity: None,
        })
    }

    pub fn from_fn(
        domain: &ModuleRef,
        codomain: &ModuleRef,
        f: impl FnMut(Point) -> CMatrix,
    ) -> Result<Self> {
        Self::new(domain, codomain, Field::from_fn(domain.spectrum(), f))
    }

    /// Compresses arbitrary ambient matrices to `q_x m_x p_x`.
    pub fn compressed(
        domain: &ModuleRef,
        codomain: &ModuleRef,
        mut f: impl FnMut(Point) -> CMatrix,
    ) -> Result<Self> {
        let matrices = Field::try_from_fn(domain.spectrum(), |p| -> Result<CMatrix> {
            let m = f(p);
            Ok(&(codomain.projection(p)? * &m) * domain.projection(p)?)
        })?;
        Self::new(domain, codomain, matrices)
    }

    pub fn identity(module: &ModuleRef) -> Self {
        Self {
            domain: module.clone(),
            codomain: module.clone(),
            matrices: module.projections().clone(),
            compact: false,
            trace_at_infinity: None,
        }
    }

    pub fn zero(domain: &ModuleRef, codomain: &ModuleRef) -> Self {
        Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrices: Field::from_fn(domain.spectrum(), |_| {
                CMatrix::zeros(codomain.dim(), domain.dim())
            }),
            compact: true,
            trace_at_infinity: None,
        }
    }

    /// Flags the operator as compact; compact operators vanish at infinity.
    pub fn with_compact(mut self, compact: bool) -> Result<Self> {
        if compact {
            if let Some(t) = self.matrices.infinity() {
                let n = t.max_abs();
                if n > STRUCTURE_TOL * (1.0 + self.sup_abs()) {
                    return Err(Error::Workspace(format!(
                        "compact operator must vanish at infinity (max entry {n:e})"
                    )));
                }
            }
        }
        self.compact = compact;
        Ok(self)
    }

    /// Declares `lim_{x→∞} trace(t_x)` for an operator on a truncated module.
    ///
    /// With finite-dimensional fibres the trace is norm-continuous, so this limit
    /// can only differ from `trace(t_∞)` when the fibres truncate an
    /// infinite-dimensional space.
    pub fn with_trace_at_infinity(mut self, value: Option<C64>) -> Result<Self> {
        if value.is_some() {
            if !self.domain.spectrum().has_infinity() {
                return Err(Error::Workspace(
                    "trace at infinity declared on a spectrum without infinity".into(),
                ));
            }
            if !self.is_endomorphism() || !self.domain.is_truncated() {
                return Err(Error::Workspace(
                    "trace at infinity may only be declared for endomorphisms of truncated modules"
                        .into(),
                ));
            }
        }
        self.trace_at_infinity = value;
        Ok(self)
    }

    fn sup_abs(&self) -> f64 {
        self.matrices.values().map(CMatrix::max_abs).fold(0.0, f64::max)
    }

    pub fn domain(&self) -> &ModuleRef {
        &self.domain
    }

    pub fn codomain(&self) -> &ModuleRef {
        &self.codomain
    }

    pub fn field(&self) -> &Field<CMatrix> {
        &self.matrices
    }

    pub fn is_compact(&self) -> bool {
        self.compact
    }

    pub fn trace_at_infinity(&self) -> Option<C64> {
        self.trace_at_infinity
    }

    pub fn is_endomorphism(&self) -> bool {
        same_module(&self.domain, &self.codomain)
    }

    /// Localisation `t_x`.
    pub fn matrix(&self, p: Point) -> Result<&CMatrix> {
        self.matrices
            .get(p)
            .ok_or_else(|| Error::UnknownPoint(p.to_string()))
    }

    /// `self ∘ r`.
    pub fn compose(&self, r: &AdjointableOperator) -> Result<Self> {
        require_same(&r.codomain, &self.domain, "composition of incompatible operators")?;
        Ok(Self {
            domain: r.domain.clone(),
            codomain: self.codomain.clone(),
            matrices: self.matrices.zip_map(&r.matrices, |a, b| a * b),
            compact: self.compact || r.compact,
            trace_at_infinity: None,
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            matrices: self.matrices.map(CMatrix::adjoint),
            compact: self.compact,
            trace_at_infinity: self.trace_at_infinity.map(|z| z.conj()),
        }
    }

    /// Applies the operator to a multiplier; the image of a compact operator lies
    /// in the module.
    pub fn apply(&self, xi: &ModuleElement) -> Result<ModuleElement> {
        require_same(&self.domain, xi.module(), "operator applied to a foreign element")?;
        Ok(ModuleElement {
            module: self.codomain.clone(),
            vectors: self.matrices.zip_map(xi.field(), |t, v| t.mul_vec(v)),
        })
    }

    pub fn add(&self, other: &AdjointableOperator) -> Result<Self> {
        require_same(&self.domain, &other.domain, "sum of operators with different domains")?;
        require_same(&self.codomain, &other.codomain, "sum of operators with different codomains")?;
        Ok(Self {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrices: self.matrices.zip_map(&other.matrices, |a, b| a + b),
            compact: self.compact && other.compact,
            trace_at_infinity: None,
        })
    }

    pub fn sub(&self, other: &AdjointableOperator) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrices: self.matrices.map(|m| m.scale(s)),
            compact: self.compact,
            trace_at_infinity: self.trace_at_infinity.map(|z| z * s),
        }
    }

    /// `‖t‖ = sup_x ‖t_x‖`, infinity included.
    pub fn op_norm(&self) -> Result<f64> {
        let mut best: f64 = 0.0;
        for m in self.matrices.values() {
            best = best.max(op_norm(m)?);
        }
        Ok(best)
    }

    /// `max_x max |t_x - r_x|` entrywise.
    pub fn distance(&self, other: &AdjointableOperator) -> f64 {
        self.matrices
            .values()
            .zip(other.matrices.values())
            .map(|(a, b)| (a - b).max_abs())
            .fold(0.0, f64::max)
    }
}

/// The rank-one operator `|η⟩⟨ξ|: ζ ↦ η ⟨ξ | ζ⟩`.
pub fn ket_bra(eta: &ModuleElement, xi: &ModuleElement) -> Result<AdjointableOperator> {
    if !same_spectrum(eta.module().spectrum(), xi.module().spectrum()) {
        return Err(Error::SpectrumMismatch);
    }
    Ok(AdjointableOperator {
        domain: xi.module().clone(),
        codomain: eta.module().clone(),
        matrices: eta.field().zip_map(xi.field(), |a, b| CMatrix::outer(a, b)),
        compact: eta.is_in_module() || xi.is_in_module(),
        trace_at_infinity: None,
    })
}

/// The inclusion `θ: F → C0(X, C^d)` of a projection-field module into its
/// ambient free module, together with that free module.
pub fn inclusion(module: &ModuleRef) -> (ModuleRef, AdjointableOperator) {
    let ambient = module.ambient().into_ref();
    let theta = AdjointableOperator {
        domain: module.clone(),
        codomain: ambient.clone(),
        matrices: module.projections().clone(),
        compact: false,
        trace_at_infinity: None,
    };
    (ambient, theta)
}
