//! Frames of multipliers.
//!
//! A finite list `(β_i)` of multipliers is a frame when
//! `⟨ξ|η⟩ = Σ ⟨ξ|β_i⟩⟨β_i|η⟩` for all `ξ, η`; on a projection-field module this
//! is equivalent to `Σ β_{i,x} β_{i,x}* = p_x` at every point, which is what
//! [`is_frame`] checks.

use serde::Serialize;

use crate::algebra::{AlgebraElement, SeriesTail};
use crate::error::{Error, Result};
use crate::linalg::{op_norm, CMatrix, C64};
use crate::module::{same_module, AdjointableOperator, ModuleElement, ModuleRef, STRUCTURE_TOL};
use crate::spectrum::Point;

/// Largest accepted `‖Σ β β* - p‖` for a frame.
pub const FRAME_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct FrameCheck {
    pub is_frame: bool,
    /// `max_x ‖Σ_i β_{i,x} β_{i,x}* - p_x‖`.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameOfMultipliers {
    module: ModuleRef,
    members: Vec<ModuleElement>,
}

impl FrameOfMultipliers {
    /// Checks the frame identity before accepting the members.
    pub fn new(module: &ModuleRef, members: Vec<ModuleElement>) -> Result<Self> {
        let check = is_frame(module, &members)?;
        if !check.is_frame {
            return Err(Error::NotAFrame {
                deviation: check.deviation,
            });
        }
        Ok(Self {
            module: module.clone(),
            members,
        })
    }

    /// The constant coordinate multipliers `ε̃_i` of a free module.
    pub fn standard(module: &ModuleRef) -> Result<Self> {
        if !module.is_free() {
            return Err(Error::NotFree);
        }
        let members = (0..module.dim())
            .map(|i| ModuleElement::coordinate(module, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            module: module.clone(),
            members,
        })
    }

    /// Pullback of the ambient standard frame along the inclusion, `x ↦ p_x e_i`.
    pub fn canonical(module: &ModuleRef) -> Result<Self> {
        let (ambient, theta) = crate::module::inclusion(module);
        pullback_frame(&theta, &Self::standard(&ambient)?)
    }

    pub fn module(&self) -> &ModuleRef {
        &self.module
    }

    pub fn members(&self) -> &[ModuleElement] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Frames of a truncated module are prefixes of infinite frames.
    pub fn tail(&self) -> SeriesTail {
        if self.module.is_truncated() {
            SeriesTail::Truncated
        } else {
            SeriesTail::Complete
        }
    }

    /// Appends `count` zero members.
    pub fn padded(mut self, count: usize) -> Self {
        let zero = ModuleElement::zero(&self.module);
        self.members.extend(std::iter::repeat_n(zero, count));
        self
    }

    /// `Σ_i β_i ⟨β_i | η⟩`.
    pub fn reconstruct(&self, eta: &ModuleElement) -> Result<ModuleElement> {
        if !same_module(&self.module, eta.module()) {
            return Err(Error::ModuleMismatch("reconstructing a foreign element".into()));
        }
        let mut acc = ModuleElement::zero(&self.module);
        for b in &self.members {
            acc = acc.add(&b.mul_algebra(&b.inner(eta)?)?)?;
        }
        Ok(acc)
    }

    /// The localised Parseval frame `(β_{i,x})` of `range(p_x)`.
    pub fn localize(&self, p: Point) -> Result<Vec<Vec<C64>>> {
        self.members
            .iter()
            .map(|b| b.vector(p).map(<[C64]>::to_vec))
            .collect()
    }
}

/// Checks `Σ_i β_{i,x} β_{i,x}* = p_x` at every point, infinity included.
pub fn is_frame(module: &ModuleRef, members: &[ModuleElement]) -> Result<FrameCheck> {
    if let Some(b) = members.iter().find(|b| !same_module(b.module(), module)) {
        return Err(Error::ModuleMismatch(format!(
            "frame member over a different module (dim {})",
            b.module().dim()
        )));
    }
    let mut deviation: f64 = 0.0;
    for (p, proj) in module.projections().iter() {
        let mut sum = CMatrix::zeros(module.dim(), module.dim());
        for b in members {
            let v = b.vector(p)?;
            sum = &sum + &CMatrix::outer(v, v);
        }
        deviation = deviation.max(op_norm(&(&sum - proj))?);
    }
    Ok(FrameCheck {
        is_frame: deviation <= FRAME_TOL,
        deviation,
    })
}

/// `max ‖⟨ξ|η⟩ - Σ_i ⟨ξ|β_i⟩⟨β_i|η⟩‖` over all pairs drawn from `probes`.
///
/// This is the defining identity of a frame evaluated on a finite set; when
/// the probes span every fibre it agrees with [`is_frame`].
pub fn frame_identity_deviation(members: &[ModuleElement], probes: &[ModuleElement]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for xi in probes {
        let left: Vec<AlgebraElement> = members
            .iter()
            .map(|b| xi.inner(b))
            .collect::<Result<_>>()?;
        for eta in probes {
            let mut expansion = AlgebraElement::zero(xi.module().spectrum().clone());
            for (b, l) in members.iter().zip(&left) {
                expansion = expansion.add(&l.mul(&b.inner(eta)?)?)?;
            }
            worst = worst.max(expansion.distance(&xi.inner(eta)?)?);
        }
    }
    Ok(worst)
}

/// Pulls a frame of `E` back along an isometry `θ: F → E`, giving `(θ* β_i)`.
pub fn pullback_frame(
    theta: &AdjointableOperator,
    frame: &FrameOfMultipliers,
) -> Result<FrameOfMultipliers> {
    check_isometry(theta)?;
    if !same_module(theta.codomain(), frame.module()) {
        return Err(Error::ModuleMismatch(
            "frame does not live on the codomain of θ".into(),
        ));
    }
    let adj = theta.adjoint();
    let members = frame
        .members()
        .iter()
        .map(|b| adj.apply(b))
        .collect::<Result<Vec<_>>>()?;
    FrameOfMultipliers::new(theta.domain(), members)
}

/// Fails with `NotIsometry` unless `θ*θ = id` within [`STRUCTURE_TOL`].
pub fn check_isometry(theta: &AdjointableOperator) -> Result<()> {
    let gram = theta.adjoint().compose(theta)?;
    let deviation = gram.distance(&AdjointableOperator::identity(theta.domain()));
    if deviation > STRUCTURE_TOL {
        return Err(Error::NotIsometry { deviation });
    }
    Ok(())
}
