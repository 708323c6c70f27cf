use std::fmt;

use crate::error::{Error, Result};
use crate::mmsre::Family;

/// How a filter was built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Design {
    Symmetric,
    /// Direct asymmetric filter: the local fit refitted to the truncated window.
    Direct,
    /// Member of the revision-error minimizing class.
    Mmsre(Family),
    /// Closed-form Musgrave end weights.
    Musgrave,
    Custom,
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Design::Symmetric => f.write_str("symmetric"),
            Design::Direct => f.write_str("daf"),
            Design::Mmsre(family) => write!(f, "{family}"),
            Design::Musgrave => f.write_str("musgrave"),
            Design::Custom => f.write_str("custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterMeta {
    pub design: Design,
    /// Half-width of the symmetric filter this one belongs to.
    pub half_width: usize,
    /// Degree of the local polynomial, or the constraint degree for the
    /// revision-error minimizing class.
    pub degree: Option<usize>,
    pub delta_ratio: Option<f64>,
}

impl FilterMeta {
    pub fn custom() -> Self {
        Self {
            design: Design::Custom,
            half_width: 0,
            degree: None,
            delta_ratio: None,
        }
    }
}

/// A linear filter `m̂_t = Σ_k values[k] · y_{t+k}` over offsets
/// `k = -past_span..=future_span`. Positive offsets are future observations.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterWeights {
    past_span: usize,
    future_span: usize,
    values: Vec<f64>,
    meta: FilterMeta,
}

impl FilterWeights {
    pub fn new(
        past_span: usize,
        future_span: usize,
        values: Vec<f64>,
        meta: FilterMeta,
    ) -> Result<Self> {
        let expected = past_span + future_span + 1;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            past_span,
            future_span,
            values,
            meta,
        })
    }

    pub fn past_span(&self) -> usize {
        self.past_span
    }

    pub fn future_span(&self) -> usize {
        self.future_span
    }

    pub fn meta(&self) -> &FilterMeta {
        &self.meta
    }

    pub(crate) fn with_meta(mut self, meta: FilterMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Weights ordered from offset `-past_span` to `future_span`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Weight at offset `k`; zero outside the support.
    pub fn weight(&self, k: isize) -> f64 {
        let idx = k + self.past_span as isize;
        if idx < 0 || idx as usize >= self.values.len() {
            0.0
        } else {
            self.values[idx as usize]
        }
    }

    /// `(offset, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let start = -(self.past_span as isize);
        self.values
            .iter()
            .enumerate()
            .map(move |(i, w)| (start + i as isize, *w))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `Σ_k k^r · values[k]`.
    pub fn moment(&self, r: u32) -> f64 {
        self.iter()
            .map(|(k, w)| (k as f64).powi(r as i32) * w)
            .sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.past_span == self.future_span
            && (1..=self.past_span as isize)
                .all(|k| (self.weight(k) - self.weight(-k)).abs() <= tol)
    }

    /// Mirror image, mapping offset `k` to `-k`.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            past_span: self.future_span,
            future_span: self.past_span,
            values,
            meta: self.meta,
        }
    }

    /// Dot product with a window ordered from offset `-past_span` to `future_span`.
    pub fn apply(&self, window: &[f64]) -> Result<f64> {
        if window.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                expected: self.values.len(),
                got: window.len(),
            });
        }
        Ok(self.values.iter().zip(window).map(|(w, y)| w * y).sum())
    }

    /// Largest elementwise gap over the union of both supports.
    pub fn max_abs_diff(&self, other: &FilterWeights) -> f64 {
        let lo = -(self.past_span.max(other.past_span) as isize);
        let hi = self.future_span.max(other.future_span) as isize;
        (lo..=hi)
            .map(|k| (self.weight(k) - other.weight(k)).abs())
            .fold(0.0, f64::max)
    }
}
