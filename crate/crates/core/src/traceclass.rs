//! The frame trace of positive operators and trace-class detection.
//!
//! For a positive operator `t` and a frame `β`, the trace is the algebra-valued
//! series `Σ ⟨β_i | t β_i⟩`, defined only when it converges in norm to an
//! element of `A`. On finite spectra it always agrees with the pointwise
//! function `x ↦ trace(t_x)`; frame independence and this pointwise identity
//! can be checked with [`check_frame_independence`].

use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{series_in_a, AlgebraElement, SeriesOutcome};
use crate::error::{Error, Result};
use crate::frames::{check_isometry, FrameOfMultipliers};
use crate::linalg::{herm_eig, polar, svd, C64};
use crate::module::{same_module, AdjointableOperator};
use crate::spectrum::Point;

/// Smallest fibre eigenvalue (relative to `1 + ‖t_x‖`) tolerated for positive operators.
pub const POSITIVE_TOL: f64 = 1e-9;

/// Defined traces from different frames must agree to this sup-norm distance.
pub const FRAME_AGREEMENT_TOL: f64 = 1e-8;

/// Defined traces must match `trace(t_x)` to this at every point.
pub const POINTWISE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum TraceFailure {
    /// The truncated series shows no Cauchy tail; `gap` is the witnessed oscillation.
    NotCauchy { gap: f64 },
    /// The series converges to a multiplier that does not vanish at infinity.
    LimitOutsideA { value: AlgebraElement },
}

#[derive(Clone, Debug)]
pub enum TraceVerdict {
    Defined(AlgebraElement),
    Undefined(TraceFailure),
}

impl TraceVerdict {
    pub fn is_defined(&self) -> bool {
        matches!(self, TraceVerdict::Defined(_))
    }

    pub fn value(&self) -> Option<&AlgebraElement> {
        match self {
            TraceVerdict::Defined(v) => Some(v),
            TraceVerdict::Undefined(_) => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            TraceVerdict::Defined(v) => json!({
                "defined": true,
                "value": labeled(v),
            }),
            TraceVerdict::Undefined(TraceFailure::NotCauchy { gap }) => json!({
                "defined": false,
                "failure": { "kind": "NotCauchy", "gap": gap },
            }),
            TraceVerdict::Undefined(TraceFailure::LimitOutsideA { value }) => json!({
                "defined": false,
                "failure": {
                    "kind": "LimitOutsideA",
                    "infinity_value": value.infinity_value().map(|z| [z.re, z.im]),
                    "value": labeled(value),
                },
            }),
        }
    }
}

fn labeled(a: &AlgebraElement) -> Value {
    let mut map = serde_json::Map::new();
    for (label, z) in a.to_labeled().points {
        map.insert(label, json!(z));
    }
    Value::Object(map)
}

fn require_endomorphism(t: &AdjointableOperator) -> Result<()> {
    if t.is_endomorphism() {
        Ok(())
    } else {
        Err(Error::ModuleMismatch("operator is not an endomorphism".into()))
    }
}

/// Fails with `NotPositive` at the first fibre with a negative eigenvalue.
pub fn check_positive(t: &AdjointableOperator) -> Result<()> {
    require_endomorphism(t)?;
    let spectrum = t.domain().spectrum();
    for (p, m) in t.field().iter() {
        let e = herm_eig(m)?;
        let lowest = e.values.first().copied().unwrap_or(0.0);
        let top = e.values.last().copied().unwrap_or(0.0).abs().max(lowest.abs());
        if lowest < -POSITIVE_TOL * (1.0 + top) {
            return Err(Error::NotPositive {
                point: spectrum.label(p).to_string(),
                eigenvalue: lowest,
            });
        }
    }
    Ok(())
}

/// `|t| = (t* t)^{1/2}`, computed fibrewise.
pub fn abs_op(t: &AdjointableOperator) -> Result<AdjointableOperator> {
    require_endomorphism(t)?;
    let moduli = t.field().try_map(|_, m| polar(m).map(|p| p.modulus))?;
    let out = AdjointableOperator::new(t.domain(), t.codomain(), moduli)?.with_compact(t.is_compact())?;
    // |t| = t for positive t, so a declared trace limit carries over.
    match t.trace_at_infinity() {
        Some(limit) if check_positive(t).is_ok() => out.with_trace_at_infinity(Some(limit)),
        _ => Ok(out),
    }
}

/// The summands `⟨β_i | t β_i⟩` of the frame trace.
pub fn trace_summands(
    t: &AdjointableOperator,
    frame: &FrameOfMultipliers,
) -> Result<Vec<AlgebraElement>> {
    if !same_module(t.domain(), frame.module()) {
        return Err(Error::ModuleMismatch("frame is not a frame of the operator's module".into()));
    }
    frame
        .members()
        .iter()
        .map(|b| b.inner(&t.apply(b)?))
        .collect()
}

/// `trace_β(t) = Σ ⟨β_i | t β_i⟩` for positive `t`, summed in frame order.
pub fn trace_beta(t: &AdjointableOperator, frame: &FrameOfMultipliers) -> Result<TraceVerdict> {
    check_positive(t)?;
    let summands = trace_summands(t, frame)?;
    let outcome = series_in_a(t.domain().spectrum(), &summands, frame.tail())?;
    Ok(match outcome {
        SeriesOutcome::Converged(v) => TraceVerdict::Defined(v),
        SeriesOutcome::NotCauchy { gap, .. } => TraceVerdict::Undefined(TraceFailure::NotCauchy { gap }),
        SeriesOutcome::LimitOutsideA(value) => {
            TraceVerdict::Undefined(TraceFailure::LimitOutsideA { value })
        }
    })
}

#[derive(Clone, Debug)]
pub struct PointwiseTrace {
    /// `x ↦ trace(t_x)`, with the declared limit at infinity when one is given.
    pub function: AlgebraElement,
    pub in_a: bool,
}

/// The function `x ↦ trace(t_x)` and whether it lies in `A`.
pub fn pointwise_trace(t: &AdjointableOperator) -> Result<PointwiseTrace> {
    require_endomorphism(t)?;
    let spectrum = t.domain().spectrum().clone();
    let function = AlgebraElement::from_fn(spectrum, |p| match (p, t.trace_at_infinity()) {
        (Point::Infinity, Some(limit)) => limit,
        _ => t.matrix(p).map(|m| m.trace()).unwrap_or(C64::new(0.0, 0.0)),
    });
    let in_a = function.is_in_a();
    Ok(PointwiseTrace { function, in_a })
}

#[derive(Clone, Debug)]
pub struct FrameIndependenceReport {
    pub verdicts: Vec<TraceVerdict>,
    pub pointwise: PointwiseTrace,
    /// Largest sup-distance between two defined traces.
    pub max_pairwise_deviation: f64,
    /// Largest `|trace_β(t)(x) - trace(t_x)|` over defined traces and points.
    pub max_pointwise_deviation: f64,
    /// All frames agree on whether the trace is defined.
    pub definedness_agrees: bool,
    pub consistent: bool,
}

impl FrameIndependenceReport {
    pub fn to_json(&self) -> Value {
        json!({
            "verdicts": self.verdicts.iter().map(TraceVerdict::to_json).collect::<Vec<_>>(),
            "pointwise": labeled(&self.pointwise.function),
            "pointwise_in_a": self.pointwise.in_a,
            "max_pairwise_deviation": self.max_pairwise_deviation,
            "max_pointwise_deviation": self.max_pointwise_deviation,
            "definedness_agrees": self.definedness_agrees,
            "consistent": self.consistent,
        })
    }
}

/// Computes the trace of a positive operator in every frame and compares the
/// results with each other and with the pointwise trace.
pub fn check_frame_independence(
    t: &AdjointableOperator,
    frames: &[FrameOfMultipliers],
) -> Result<FrameIndependenceReport> {
    if frames.len() < 2 {
        return Err(Error::Workspace("frame independence needs at least two frames".into()));
    }
    let verdicts = frames
        .iter()
        .map(|f| trace_beta(t, f))
        .collect::<Result<Vec<_>>>()?;
    let pointwise = pointwise_trace(t)?;

    let defined: Vec<&AlgebraElement> = verdicts.iter().filter_map(TraceVerdict::value).collect();
    let mut max_pairwise: f64 = 0.0;
    for (i, a) in defined.iter().enumerate() {
        for b in &defined[i + 1..] {
            max_pairwise = max_pairwise.max(a.distance(b)?);
        }
    }
    let mut max_pointwise: f64 = 0.0;
    for v in &defined {
        max_pointwise = max_pointwise.max(v.distance(&pointwise.function)?);
    }
    let definedness_agrees = defined.is_empty() || defined.len() == verdicts.len();
    let consistent = definedness_agrees
        && max_pairwise <= FRAME_AGREEMENT_TOL
        && max_pointwise <= POINTWISE_TOL
        && (defined.is_empty() || pointwise.in_a);
    Ok(FrameIndependenceReport {
        verdicts,
        pointwise,
        max_pairwise_deviation: max_pairwise,
        max_pointwise_deviation: max_pointwise,
        definedness_agrees,
        consistent,
    })
}

/// `trace(|t|)` in the canonical frame of the operator's module.
pub fn abs_trace(t: &AdjointableOperator) -> Result<TraceVerdict> {
    let frame = FrameOfMultipliers::canonical(t.domain())?;
    trace_beta(&abs_op(t)?, &frame)
}

/// Whether `trace(|t|)` is defined in `A`.
pub fn is_trace_class(t: &AdjointableOperator) -> Result<bool> {
    Ok(abs_trace(t)?.is_defined())
}

/// `‖trace(|t|)‖_A = sup_x Σ σ(t_x)`; fails for operators that are not trace class.
pub fn trace_norm_module(t: &AdjointableOperator) -> Result<f64> {
    match abs_trace(t)? {
        TraceVerdict::Defined(v) => Ok(v.norm()),
        TraceVerdict::Undefined(f) => Err(Error::NotTraceClass(format!("{f:?}"))),
    }
}

/// `sup_x Σ σ(t_x)` computed straight from fibre singular values.
pub fn fibre_trace_norm(t: &AdjointableOperator) -> Result<f64> {
    let mut best: f64 = 0.0;
    for m in t.field().values() {
        best = best.max(svd(m)?.sigma.iter().sum());
    }
    Ok(best)
}

/// `θ t θ*` on the codomain of an isometry `θ`.
pub fn conjugate_by_isometry(
    t: &AdjointableOperator,
    theta: &AdjointableOperator,
) -> Result<AdjointableOperator> {
    check_isometry(theta)?;
    require_endomorphism(t)?;
    if !same_module(t.domain(), theta.domain()) {
        return Err(Error::ModuleMismatch("θ does not start at the operator's module".into()));
    }
    let out = theta.compose(t)?.compose(&theta.adjoint())?;
    let out = out.with_compact(t.is_compact())?;
    out.with_trace_at_infinity(t.trace_at_infinity())
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceClassSummary {
    pub trace_class: bool,
    pub trace_norm: Option<f64>,
}

pub fn trace_class_summary(t: &AdjointableOperator) -> Result<TraceClassSummary> {
    let verdict = abs_trace(t)?;
    Ok(TraceClassSummary {
        trace_class: verdict.is_defined(),
        trace_norm: verdict.value().map(AlgebraElement::norm),
    })
}
