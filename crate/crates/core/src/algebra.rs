//! Elements of `C0(X)` and of its multiplier algebra over a finite spectrum.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::spectrum::{same_spectrum, Field, Point, Spectrum};

/// `|value at infinity| ≤ MEMBERSHIP_TOL · (1 + ‖a‖)` counts as vanishing.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Imaginary parts and negative real parts below this are numerical dust.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Tail Cauchy gap accepted as convergence of a truncated series.
pub const CAUCHY_TOL: f64 = 1e-9;

/// A complex function on the spectrum, including its value at infinity when
/// the spectrum has one.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    spectrum: Arc<Spectrum>,
    values: Field<C64>,
}

impl AlgebraElement {
    pub fn new(spectrum: Arc<Spectrum>, finite: Vec<C64>, infinity: Option<C64>) -> Result<Self> {
        if finite.len() != spectrum.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} points",
                finite.len(),
                spectrum.len()
            )));
        }
        if infinity.is_some() != spectrum.has_infinity() {
            return Err(Error::ShapeMismatch(
                "value at infinity must be given iff the spectrum has infinity".into(),
            ));
        }
        let values = Field::new(finite, infinity);
        if values.values().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("algebra element"));
        }
        Ok(Self { spectrum, values })
    }

    pub fn from_field(spectrum: Arc<Spectrum>, values: Field<C64>) -> Self {
        debug_assert_eq!(values.finite().len(), spectrum.len());
        Self { spectrum, values }
    }

    pub fn from_fn(spectrum: Arc<Spectrum>, f: impl FnMut(Point) -> C64) -> Self {
        let values = Field::from_fn(&spectrum, f);
        Self { spectrum, values }
    }

    pub fn from_real(spectrum: Arc<Spectrum>, finite: &[f64], infinity: Option<f64>) -> Result<Self> {
        Self::new(
            spectrum,
            finite.iter().map(|&x| C64::new(x, 0.0)).collect(),
            infinity.map(|x| C64::new(x, 0.0)),
        )
    }

    /// The constant function `c`, including at infinity (a multiplier unless `c = 0`).
    pub fn constant(spectrum: Arc<Spectrum>, c: C64) -> Self {
        Self::from_fn(spectrum, |_| c)
    }

    pub fn zero(spectrum: Arc<Spectrum>) -> Self {
        Self::constant(spectrum, C64::new(0.0, 0.0))
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn field(&self) -> &Field<C64> {
        &self.values
    }

    pub fn value(&self, p: Point) -> Result<C64> {
        self.values
            .get(p)
            .copied()
            .ok_or_else(|| Error::UnknownPoint(p.to_string()))
    }

    pub fn infinity_value(&self) -> Option<C64> {
        self.values.infinity().copied()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_spectrum(&self.spectrum, &other.spectrum) {
            Ok(())
        } else {
            Err(Error::SpectrumMismatch)
        }
    }

    fn combine(&self, other: &Self, f: impl FnMut(&C64, &C64) -> C64) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            spectrum: self.spectrum.clone(),
            values: self.values.zip_map(&other.values, f),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a * b)
    }

    pub fn conj(&self) -> Self {
        Self {
            spectrum: self.spectrum.clone(),
            values: self.values.map(|z| z.conj()),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            spectrum: self.spectrum.clone(),
            values: self.values.map(|z| z * s),
        }
    }

    /// Supremum norm, taken over every point including infinity.
    pub fn norm(&self) -> f64 {
        self.values.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Whether the function vanishes at infinity, i.e. lies in `A` rather than
    /// only in the multiplier algebra.
    pub fn is_in_a(&self) -> bool {
        match self.values.infinity() {
            None => true,
            Some(z) => z.norm() <= MEMBERSHIP_TOL * (1.0 + self.norm()),
        }
    }

    pub fn is_positive(&self) -> bool {
        let floor = -POSITIVITY_TOL * (1.0 + self.norm());
        self.values
            .values()
            .all(|z| z.im.abs() <= POSITIVITY_TOL && z.re >= floor)
    }

    /// `max_x |self(x) - other(x)|`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    pub fn to_labeled(&self) -> LabeledValues {
        LabeledValues {
            points: self
                .values
                .iter()
                .map(|(p, z)| (self.spectrum.label(p).to_string(), [z.re, z.im]))
                .collect(),
        }
    }
}

/// Serialisable `label → [re, im]` listing of an algebra element.
#[derive(Clone, Debug, Serialize)]
pub struct LabeledValues {
    pub points: Vec<(String, [f64; 2])>,
}

/// Whether a list of summands is the whole series or only its beginning.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesTail {
    /// The list is the entire series.
    Complete,
    /// The list is a prefix of an infinite series.
    Truncated,
}

#[derive(Clone, Debug)]
pub enum SeriesOutcome {
    Converged(AlgebraElement),
    /// No tail of the partial sums is Cauchy within [`CAUCHY_TOL`]; `gap` is
    /// `max ‖S_N - S_J‖` over `N/2 ≤ J < N`.
    NotCauchy { gap: f64, partial_sum: AlgebraElement },
    /// The sum converges in norm but does not vanish at infinity.
    LimitOutsideA(AlgebraElement),
}

/// Decides whether `Σ summands` converges in norm to an element of `A`.
///
/// A complete list always converges to its finite sum. A truncated list is
/// declared convergent only when some tail `max_{J' > J} ‖S_J' - S_J‖` with
/// `J < N` falls below [`CAUCHY_TOL`].
pub fn series_in_a(
    spectrum: &Arc<Spectrum>,
    summands: &[AlgebraElement],
    tail: SeriesTail,
) -> Result<SeriesOutcome> {
    let mut partial = vec![AlgebraElement::zero(spectrum.clone())];
    for s in summands {
        if !same_spectrum(s.spectrum(), spectrum) {
            return Err(Error::SpectrumMismatch);
        }
        let next = partial.last().expect("non-empty").add(s)?;
        partial.push(next);
    }
    let n = summands.len();
    let total = partial[n].clone();

    let cauchy = match tail {
        SeriesTail::Complete => true,
        SeriesTail::Truncated if n == 0 => true,
        SeriesTail::Truncated => {
            // gap(J) = max_{J' > J} ‖S_J' - S_J‖; look for any J < N below tolerance.
            let mut found = false;
            for j in (0..n).rev() {
                let mut gap: f64 = 0.0;
                for k in j + 1..=n {
                    gap = gap.max(partial[k].distance(&partial[j])?);
                    if gap > CAUCHY_TOL {
                        break;
                    }
                }
                if gap <= CAUCHY_TOL {
                    found = true;
                    break;
                }
            }
            found
        }
    };

    if !cauchy {
        let mut gap: f64 = 0.0;
        for p in &partial[n / 2..n] {
            gap = gap.max(total.distance(p)?);
        }
        return Ok(SeriesOutcome::NotCauchy {
            gap,
            partial_sum: total,
        });
    }
    if total.is_in_a() {
        Ok(SeriesOutcome::Converged(total))
    } else {
        Ok(SeriesOutcome::LimitOutsideA(total))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pointwise_arithmetic() {
        let s = Spectrum::numbered(2, false).unwrap();
        let a = AlgebraElement::from_real(s.clone(), &[1.0, 2.0], None).unwrap();
        let b = AlgebraElement::from_real(s.clone(), &[0.0, 1.0], None).unwrap();
        assert_eq!(a.add(&b).unwrap(), AlgebraElement::from_real(s.clone(), &[1.0, 3.0], None).unwrap());

        let z = AlgebraElement::new(s.clone(), vec![c(0.0, 1.0), c(1.0, -1.0)], None).unwrap();
        assert_eq!(
            z.conj(),
            AlgebraElement::new(s.clone(), vec![c(0.0, -1.0), c(1.0, 1.0)], None).unwrap()
        );

        let e1 = AlgebraElement::from_real(s.clone(), &[1.0, 0.0], None).unwrap();
        let e2 = AlgebraElement::from_real(s.clone(), &[0.0, 1.0], None).unwrap();
        assert_eq!(e1.mul(&e2).unwrap().norm(), 0.0);
    }

    #[test]
    fn spectrum_mismatch() {
        let a = AlgebraElement::zero(Spectrum::numbered(2, false).unwrap());
        let b = AlgebraElement::zero(Spectrum::numbered(3, false).unwrap());
        assert!(matches!(a.add(&b), Err(Error::SpectrumMismatch)));
    }

    #[test]
    fn sup_norm() {
        let s = Spectrum::numbered(2, false).unwrap();
        let a = AlgebraElement::new(s.clone(), vec![c(3.0, 0.0), c(0.0, -4.0)], None).unwrap();
        assert_eq!(a.norm(), 4.0);
        assert_eq!(AlgebraElement::zero(s).norm(), 0.0);

        let s = Spectrum::numbered(4, true).unwrap();
        let a = AlgebraElement::from_real(s, &[1.0, 0.5, 1.0 / 3.0, 0.25], Some(0.0)).unwrap();
        assert_eq!(a.norm(), 1.0);
    }

    #[test]
    fn membership() {
        let s = Spectrum::numbered(3, true).unwrap();
        assert!(!AlgebraElement::constant(s.clone(), c(1.0, 0.0)).is_in_a());
        let a = AlgebraElement::from_real(s, &[1.0, 0.5, 0.25], Some(0.0)).unwrap();
        assert!(a.is_in_a());
        let u = Spectrum::numbered(2, false).unwrap();
        assert!(AlgebraElement::constant(u, c(5.0, 1.0)).is_in_a());
    }

    #[test]
    fn positivity() {
        let s = Spectrum::numbered(2, false).unwrap();
        assert!(AlgebraElement::from_real(s.clone(), &[0.0, 2.0], None).unwrap().is_positive());
        assert!(!AlgebraElement::from_real(s.clone(), &[-1.0, 2.0], None).unwrap().is_positive());
        let dust = AlgebraElement::new(s, vec![c(0.0, 1e-15), c(1.0, 0.0)], None).unwrap();
        assert!(dust.is_positive());
    }

    #[test]
    fn complete_series_is_plain_sum() {
        let s = Spectrum::numbered(2, false).unwrap();
        let terms = vec![
            AlgebraElement::from_real(s.clone(), &[1.0, 2.0], None).unwrap(),
            AlgebraElement::from_real(s.clone(), &[3.0, -1.0], None).unwrap(),
        ];
        match series_in_a(&s, &terms, SeriesTail::Complete).unwrap() {
            SeriesOutcome::Converged(v) => {
                assert_eq!(v, AlgebraElement::from_real(s, &[4.0, 1.0], None).unwrap())
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn geometric_series_converges() {
        let s = Spectrum::numbered(3, true).unwrap();
        let terms: Vec<_> = (1..=60)
            .map(|j| {
                let v = 0.5f64.powi(j);
                AlgebraElement::from_real(s.clone(), &[v, v, v], Some(0.0)).unwrap()
            })
            .collect();
        match series_in_a(&s, &terms, SeriesTail::Truncated).unwrap() {
            SeriesOutcome::Converged(v) => {
                for p in 0..3 {
                    assert!((v.value(Point::Finite(p)).unwrap().re - 1.0).abs() < 1e-15);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_multiplier_limit_outside_a() {
        let s = Spectrum::numbered(2, true).unwrap();
        let terms = vec![AlgebraElement::constant(s.clone(), c(1.0, 0.0))];
        assert!(matches!(
            series_in_a(&s, &terms, SeriesTail::Complete).unwrap(),
            SeriesOutcome::LimitOutsideA(_)
        ));
    }

    #[test]
    fn harmonic_staircase_is_not_cauchy() {
        // Summand j at point n is 1/n for j ≤ n; the gap S_2J - S_J peaks at n = 2J with 1/2.
        let half = 8;
        let points = 2 * half;
        let s = Spectrum::numbered(points, true).unwrap();
        let terms: Vec<_> = (1..=points)
            .map(|j| {
                let vals: Vec<f64> = (1..=points)
                    .map(|n| if j <= n { 1.0 / n as f64 } else { 0.0 })
                    .collect();
                AlgebraElement::from_real(s.clone(), &vals, Some(0.0)).unwrap()
            })
            .collect();
        match series_in_a(&s, &terms, SeriesTail::Truncated).unwrap() {
            SeriesOutcome::NotCauchy { gap, .. } => assert!((gap - 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
