//! Finite spectra and point-indexed fields.
//!
//! A [`Spectrum`] is a finite list of labelled points, optionally followed by a
//! point at infinity. Functions on the spectrum with a value at infinity model
//! multipliers; those vanishing there model elements of the algebra itself.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label used for the point at infinity in reports and JSON.
pub const INFINITY_LABEL: &str = "inf";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spectrum {
    points: Vec<String>,
    has_infinity: bool,
}

impl Spectrum {
    pub fn new(points: Vec<String>, has_infinity: bool) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpectrum("at least one finite point required".into()));
        }
        let mut seen = HashSet::new();
        for p in &points {
            if p == INFINITY_LABEL {
                return Err(Error::InvalidSpectrum(format!(
                    "`{INFINITY_LABEL}` is reserved for the point at infinity"
                )));
            }
            if !seen.insert(p.as_str()) {
                return Err(Error::InvalidSpectrum(format!("duplicate label `{p}`")));
            }
        }
        Ok(Self {
            points,
            has_infinity,
        })
    }

    /// Points labelled `x1, …, xn`.
    pub fn numbered(n: usize, has_infinity: bool) -> Result<Arc<Self>> {
        Self::new((1..=n).map(|i| format!("x{i}")).collect(), has_infinity).map(Arc::new)
    }

    pub fn labels(&self) -> &[String] {
        &self.points
    }

    /// Number of finite points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_infinity(&self) -> bool {
        self.has_infinity
    }

    /// All points, finite ones first, then infinity if present.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.points.len())
            .map(Point::Finite)
            .chain(self.has_infinity.then_some(Point::Infinity))
    }

    pub fn point(&self, label: &str) -> Result<Point> {
        if label == INFINITY_LABEL && self.has_infinity {
            return Ok(Point::Infinity);
        }
        self.points
            .iter()
            .position(|p| p == label)
            .map(Point::Finite)
            .ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }

    pub fn label(&self, p: Point) -> &str {
        match p {
            Point::Finite(i) => &self.points[i],
            Point::Infinity => INFINITY_LABEL,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match p {
            Point::Finite(i) => i < self.points.len(),
            Point::Infinity => self.has_infinity,
        }
    }
}

pub(crate) fn same_spectrum(a: &Arc<Spectrum>, b: &Arc<Spectrum>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Finite(usize),
    Infinity,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(i) => write!(f, "#{i}"),
            Point::Infinity => f.write_str(INFINITY_LABEL),
        }
    }
}

/// A value for every point of a spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    finite: Vec<T>,
    infinity: Option<T>,
}

impl<T> Field<T> {
    pub fn new(finite: Vec<T>, infinity: Option<T>) -> Self {
        Self { finite, infinity }
    }

    /// Evaluates `f` at every point of `spectrum`.
    pub fn from_fn(spectrum: &Spectrum, mut f: impl FnMut(Point) -> T) -> Self {
        Self {
            finite: (0..spectrum.len()).map(|i| f(Point::Finite(i))).collect(),
            infinity: spectrum.has_infinity().then(|| f(Point::Infinity)),
        }
    }

    pub fn try_from_fn<E>(
        spectrum: &Spectrum,
        mut f: impl FnMut(Point) -> Result<T, E>,
    ) -> Result<Self, E> {
        let finite = (0..spectrum.len())
            .map(|i| f(Point::Finite(i)))
            .collect::<Result<Vec<_>, E>>()?;
        let infinity = if spectrum.has_infinity() {
            Some(f(Point::Infinity)?)
        } else {
            None
        };
        Ok(Self { finite, infinity })
    }

    pub fn get(&self, p: Point) -> Option<&T> {
        match p {
            Point::Finite(i) => self.finite.get(i),
            Point::Infinity => self.infinity.as_ref(),
        }
    }

    pub fn finite(&self) -> &[T] {
        &self.finite
    }

    pub fn infinity(&self) -> Option<&T> {
        self.infinity.as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, &T)> {
        self.finite
            .iter()
            .enumerate()
            .map(|(i, v)| (Point::Finite(i), v))
            .chain(self.infinity.iter().map(|v| (Point::Infinity, v)))
    }

    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.finite.iter().chain(self.infinity.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Field<U> {
        Field {
            finite: self.finite.iter().map(&mut f).collect(),
            infinity: self.infinity.as_ref().map(f),
        }
    }

    pub fn try_map<U, E>(&self, mut f: impl FnMut(Point, &T) -> Result<U, E>) -> Result<Field<U>, E> {
        let finite = self
            .finite
            .iter()
            .enumerate()
            .map(|(i, v)| f(Point::Finite(i), v))
            .collect::<Result<Vec<_>, E>>()?;
        let infinity = match &self.infinity {
            Some(v) => Some(f(Point::Infinity, v)?),
            None => None,
        };
        Ok(Field { finite, infinity })
    }

    /// Pointwise combination; both fields must come from the same spectrum.
    pub fn zip_map<U, V>(&self, other: &Field<U>, mut f: impl FnMut(&T, &U) -> V) -> Field<V> {
        debug_assert_eq!(self.finite.len(), other.finite.len());
        Field {
            finite: self
                .finite
                .iter()
                .zip(&other.finite)
                .map(|(a, b)| f(a, b))
                .collect(),
            infinity: match (&self.infinity, &other.infinity) {
                (Some(a), Some(b)) => Some(f(a, b)),
                _ => None,
            },
        }
    }
}
