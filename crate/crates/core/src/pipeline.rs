//! Applying filters to a series: two-sided smoothing with boundary
//! adaptation on both tails, cross-validated bandwidth choice, real-time and
//! vintage estimates, and fitting of the `δ²/σ²` ratio by revision error.
//!
//! Time indices in this module are 1-based, matching `t = 1..n`.

use std::fmt;
use std::ops::RangeInclusive;

use crate::direct::daf_weights;
use crate::error::{Error, Result};
use crate::filter::FilterWeights;
use crate::kernels::{KernelKind, KernelWeights};
use crate::mmsre::{family_filter, Family};
use crate::polyfit::symmetric_weights;

/// Equally spaced observations with optional time labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::SeriesTooShort { n: 0, needed: 1 });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i + 1));
        }
        Ok(Self {
            values,
            labels: None,
        })
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::LabelMismatch {
                labels: labels.len(),
                values: values.len(),
            });
        }
        let mut s = Self::new(values)?;
        s.labels = Some(labels);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of time `t`, or `t` itself when the series is unlabeled.
    pub fn label(&self, t: usize) -> String {
        match &self.labels {
            Some(l) => l[t - 1].clone(),
            None => t.to_string(),
        }
    }

    /// The series in reverse time order.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        let labels = self.labels.clone().map(|mut l| {
            l.reverse();
            l
        });
        Self { values, labels }
    }
}

/// Dot product of `filter` with the observations around time `t`.
pub fn apply_filter(series: &Series, filter: &FilterWeights, t: usize) -> Result<f64> {
    let n = series.len();
    let start = t as isize - filter.past_span() as isize;
    let end = (t + filter.future_span()) as isize;
    if start < 1 || end > n as isize {
        return Err(Error::WindowOutOfBounds { start, end, n });
    }
    filter.apply(&series.values[(start - 1) as usize..end as usize])
}

/// How the end of the sample is handled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Refit the local polynomial to the available observations.
    Direct,
    /// A member of the revision-error minimizing class.
    Mmsre { family: Family, delta_ratio: f64 },
}

impl Boundary {
    pub fn mmsre(family: Family, delta_ratio: f64) -> Self {
        Boundary::Mmsre {
            family,
            delta_ratio,
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Direct => f.write_str("daf"),
            Boundary::Mmsre {
                family,
                delta_ratio,
            } => write!(f, "{family}({delta_ratio})"),
        }
    }
}

/// The symmetric filter and the end filters for `q = 0..=h`.
#[derive(Debug, Clone)]
pub struct FilterBank {
    symmetric: FilterWeights,
    ends: Vec<FilterWeights>,
}

impl FilterBank {
    pub fn new(kernel: &KernelWeights, d: usize, boundary: Boundary) -> Result<Self> {
        let h = kernel.half_width();
        let symmetric = symmetric_weights(kernel, d)?;
        let ends = (0..=h)
            .map(|q| {
                if q == h {
                    Ok(symmetric.clone())
                } else {
                    end_filter(kernel, d, &symmetric, boundary, q)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { symmetric, ends })
    }

    pub fn half_width(&self) -> usize {
        self.symmetric.past_span()
    }

    pub fn symmetric(&self) -> &FilterWeights {
        &self.symmetric
    }

    /// End filter using `q` future observations; `q = h` is the symmetric filter.
    pub fn end(&self, q: usize) -> &FilterWeights {
        &self.ends[q]
    }
}

fn end_filter(
    kernel: &KernelWeights,
    d: usize,
    symmetric: &FilterWeights,
    boundary: Boundary,
    q: usize,
) -> Result<FilterWeights> {
    match boundary {
        Boundary::Direct => daf_weights(kernel, d, q),
        Boundary::Mmsre {
            family,
            delta_ratio,
        } => family_filter(family, symmetric, q, delta_ratio),
    }
}

/// Which filter produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointMethod {
    Symmetric,
    /// End filter with `q` observations on the short side; `left` marks
    /// the start of the sample.
    Asymmetric {
        q: usize,
        left: bool,
    },
    Unavailable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendEstimate {
    pub values: Vec<f64>,
    pub methods: Vec<PointMethod>,
}

fn check_length(series: &Series, needed: usize) -> Result<()> {
    if series.len() < needed {
        Err(Error::SeriesTooShort {
            n: series.len(),
            needed,
        })
    } else {
        Ok(())
    }
}

/// Full-sample trend: the symmetric filter on `t ∈ [h+1, n−h]`, end filters
/// on both tails (the left tail uses the mirrored filters).
pub fn smooth_with_bank(series: &Series, bank: &FilterBank) -> Result<TrendEstimate> {
    let h = bank.half_width();
    let n = series.len();
    check_length(series, 2 * h + 1)?;
    let mut values = Vec::with_capacity(n);
    let mut methods = Vec::with_capacity(n);
    for t in 1..=n {
        let (filter, method) = if t <= h {
            let q = t - 1;
            (
                bank.end(q).reversed(),
                PointMethod::Asymmetric { q, left: true },
            )
        } else if t + h > n {
            let q = n - t;
            (
                bank.end(q).clone(),
                PointMethod::Asymmetric { q, left: false },
            )
        } else {
            (bank.symmetric().clone(), PointMethod::Symmetric)
        };
        values.push(apply_filter(series, &filter, t)?);
        methods.push(method);
    }
    Ok(TrendEstimate { values, methods })
}

pub fn smooth(
    series: &Series,
    kernel: &KernelWeights,
    d: usize,
    boundary: Boundary,
) -> Result<TrendEstimate> {
    smooth_with_bank(series, &FilterBank::new(kernel, d, boundary)?)
}

/// Symmetric-filter estimates on the interior; `None` on the tails.
fn two_sided(series: &Series, symmetric: &FilterWeights) -> Result<Vec<Option<f64>>> {
    let h = symmetric.past_span();
    let n = series.len();
    (1..=n)
        .map(|t| {
            if t > h && t + h <= n {
                apply_filter(series, symmetric, t).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect()
}

/// Sum of squared deletion residuals over the interior,
/// `Σ_{t=h+1}^{n−h} (y_t − m̂_t)² / (1 − w_0)²`.
pub fn cv_score(series: &Series, kernel: &KernelWeights, d: usize) -> Result<f64> {
    let h = kernel.half_width();
    check_length(series, 2 * h + 2)?;
    let w = symmetric_weights(kernel, d)?;
    let leave_out = 1.0 - w.weight(0);
    if leave_out.abs() < 1e-14 {
        return Err(Error::DegenerateLeverage);
    }
    let y = series.values();
    Ok(two_sided(series, &w)?
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|m| ((y[i] - m) / leave_out).powi(2)))
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSelection {
    pub h: usize,
    /// `(h, cv)` for every candidate.
    pub curve: Vec<(usize, f64)>,
}

/// Relative tolerance below which two scores count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

fn argmin_with_ties<T: Copy>(curve: &[(T, f64)], scale: f64) -> (T, f64) {
    let best = curve.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let tol = TIE_TOLERANCE * scale.max(f64::MIN_POSITIVE);
    *curve
        .iter()
        .find(|c| c.1 <= best + tol)
        .expect("nonempty curve")
}

/// Cross-validated half-width. Scores tied to within `1e-12 · Σ y²` resolve
/// to the smaller `h`.
pub fn select_bandwidth(
    series: &Series,
    kernel: KernelKind,
    d: usize,
    h_range: RangeInclusive<usize>,
) -> Result<BandwidthSelection> {
    if h_range.is_empty() {
        return Err(Error::EmptyRange);
    }
    let curve = h_range
        .map(|h| Ok((h, cv_score(series, &kernel.weights(h)?, d)?)))
        .collect::<Result<Vec<_>>>()?;
    let scale: f64 = series.values().iter().map(|y| y * y).sum();
    let (h, _) = argmin_with_ties(&curve, scale);
    Ok(BandwidthSelection { h, curve })
}

/// Estimates `m̂_{t|t+q}` for every `t` whose window fits; `None` elsewhere.
fn vintage(series: &Series, filter: &FilterWeights) -> Result<Vec<Option<f64>>> {
    let n = series.len();
    let p = filter.past_span();
    let f = filter.future_span();
    (1..=n)
        .map(|t| {
            if t > p && t + f <= n {
                apply_filter(series, filter, t).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect()
}

/// Real-time estimates `m̂_{t|t}` for `t = h+1..=n` (element `i` is time `h+1+i`).
pub fn realtime_estimates(
    series: &Series,
    kernel: &KernelWeights,
    d: usize,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    let h = kernel.half_width();
    check_length(series, 2 * h + 1)?;
    let symmetric = symmetric_weights(kernel, d)?;
    let filter = end_filter(kernel, d, &symmetric, boundary, 0)?;
    Ok(vintage(series, &filter)?.into_iter().flatten().collect())
}

/// Mean squared gap between two aligned estimate sequences over the times
/// where both exist, normalized by `n − 2h − 1`.
fn msre_from(final_: &[Option<f64>], other: &[Option<f64>], h: usize) -> f64 {
    let n = final_.len();
    let total: f64 = final_
        .iter()
        .zip(other)
        .filter_map(|(a, b)| Some((a.as_ref()? - b.as_ref()?).powi(2)))
        .sum();
    total / (n - 2 * h - 1) as f64
}

/// `Σ_{t=h+1}^{n−h} (m̂_t − m̂_{t|t})² / (n − 2h − 1)`.
pub fn msre(series: &Series, kernel: &KernelWeights, d: usize, boundary: Boundary) -> Result<f64> {
    vintage_msre(series, kernel, d, boundary, 0)
}

/// Revision error of the `q`-th vintage against the final estimates, with
/// the same normalization as [`msre`].
pub fn vintage_msre(
    series: &Series,
    kernel: &KernelWeights,
    d: usize,
    boundary: Boundary,
    q: usize,
) -> Result<f64> {
    let h = kernel.half_width();
    check_length(series, 2 * h + 2)?;
    let symmetric = symmetric_weights(kernel, d)?;
    let filter = if q == h {
        symmetric.clone()
    } else {
        end_filter(kernel, d, &symmetric, boundary, q)?
    };
    let final_ = two_sided(series, &symmetric)?;
    let est = vintage(series, &filter)?;
    Ok(msre_from(&final_, &est, h))
}

/// Candidate ratios: `points` log-spaced values on `[min, max]`, optionally
/// with the exact end points `0` and `∞`, refined by golden-section search
/// around the best candidate to relative width `refine_tolerance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaGrid {
    pub points: usize,
    pub min: f64,
    pub max: f64,
    pub include_zero: bool,
    pub include_infinity: bool,
    pub refine_tolerance: f64,
}

impl Default for DeltaGrid {
    fn default() -> Self {
        Self {
            points: 200,
            min: 1e-6,
            max: 1e3,
            include_zero: true,
            include_infinity: true,
            refine_tolerance: 1e-4,
        }
    }
}

impl DeltaGrid {
    pub fn candidates(&self) -> Result<Vec<f64>> {
        if self.min.is_nan() || self.max.is_nan() || self.min <= 0.0 || self.max < self.min {
            return Err(Error::InvalidDeltaRatio(self.min));
        }
        let mut out = Vec::new();
        if self.include_zero {
            out.push(0.0);
        }
        match self.points {
            0 => {}
            1 => out.push(self.min),
            n => {
                let (lo, hi) = (self.min.ln(), self.max.ln());
                out.extend((0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()));
            }
        }
        if self.include_infinity {
            out.push(f64::INFINITY);
        }
        if out.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaFit {
    pub delta_ratio: f64,
    pub msre: f64,
    /// `(δ²/σ², MSRE)` at every grid candidate.
    pub curve: Vec<(f64, f64)>,
}

/// Evaluates the revision error of one vintage as a function of the ratio.
struct RevisionCriterion<'a> {
    series: &'a Series,
    symmetric: FilterWeights,
    final_: Vec<Option<f64>>,
    family: Family,
    q: usize,
}

impl<'a> RevisionCriterion<'a> {
    fn new(
        series: &'a Series,
        kernel: &KernelWeights,
        d: usize,
        family: Family,
        q: usize,
    ) -> Result<Self> {
        let h = kernel.half_width();
        check_length(series, 2 * h + 2)?;
        let symmetric = symmetric_weights(kernel, d)?;
        let final_ = two_sided(series, &symmetric)?;
        Ok(Self {
            series,
            symmetric,
            final_,
            family,
            q,
        })
    }

    fn eval(&self, delta: f64) -> Result<f64> {
        let filter = family_filter(self.family, &self.symmetric, self.q, delta)?;
        let est = vintage(self.series, &filter)?;
        Ok(msre_from(&self.final_, &est, self.symmetric.past_span()))
    }

    fn fit(&self, grid: &DeltaGrid) -> Result<DeltaFit> {
        let candidates = grid.candidates()?;
        let curve = candidates
            .iter()
            .map(|&d| Ok((d, self.eval(d)?)))
            .collect::<Result<Vec<_>>>()?;
        let scale = curve.iter().map(|c| c.1.abs()).fold(0.0, f64::max);
        let (best_delta, best_msre) = argmin_with_ties(&curve, scale);
        let idx = candidates
            .iter()
            .position(|&c| c == best_delta)
            .expect("argmin is a candidate");
        if best_delta.is_infinite() {
            return Ok(DeltaFit {
                delta_ratio: best_delta,
                msre: best_msre,
                curve,
            });
        }
        let lo = if idx > 0 {
            candidates[idx - 1]
        } else {
            best_delta
        };
        let hi = match candidates.get(idx + 1) {
            Some(c) if c.is_finite() => *c,
            _ => best_delta,
        };
        let (mut delta, mut value) = (best_delta, best_msre);
        if hi > lo {
            let (d, v) = self.golden_section(lo, hi, grid.refine_tolerance)?;
            // keep the grid point unless the refinement is strictly better
            if v < value - TIE_TOLERANCE * scale {
                delta = d;
                value = v;
            }
        }
        Ok(DeltaFit {
            delta_ratio: delta,
            msre: value,
            curve,
        })
    }

    /// Golden-section search on `[lo, hi]`, in log space when `lo > 0`.
    fn golden_section(&self, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let log = lo > 0.0;
        type Map = fn(f64) -> f64;
        let (to, from): (Map, Map) = if log {
            (f64::ln, f64::exp)
        } else {
            (|x| x, |x| x)
        };
        let (mut a, mut b) = (to(lo), to(hi));
        let width0 = b - a;
        let stop = if log { tol } else { tol * width0 };
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = self.eval(from(c))?;
        let mut fd = self.eval(from(d))?;
        while (b - a).abs() > stop {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = self.eval(from(c))?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = self.eval(from(d))?;
            }
        }
        Ok(if fc <= fd {
            (from(c), fc)
        } else {
            (from(d), fd)
        })
    }
}

/// Ratio minimizing the real-time revision error for `family`.
pub fn fit_delta_ratio(
    series: &Series,
    kernel: &KernelWeights,
    d: usize,
    family: Family,
    grid: &DeltaGrid,
) -> Result<DeltaFit> {
    RevisionCriterion::new(series, kernel, d, family, 0)?.fit(grid)
}

/// Ratio minimizing the revision error of the `q`-th vintage.
pub fn fit_delta_ratio_vintage(
    series: &Series,
    kernel: &KernelWeights,
    d: usize,
    family: Family,
    q: usize,
    grid: &DeltaGrid,
) -> Result<DeltaFit> {
    if q > kernel.half_width() {
        return Err(Error::FutureSpanOutOfRange {
            q,
            h: kernel.half_width(),
        });
    }
    RevisionCriterion::new(series, kernel, d, family, q)?.fit(grid)
}

/// Final, vintage and real-time estimates with their revisions. All
/// per-time vectors have length `n`; `None` marks times where the estimate
/// does not exist.
#[derive(Debug, Clone, PartialEq)]
pub struct RevisionReport {
    pub h: usize,
    pub degree: usize,
    pub boundary: Boundary,
    /// Ratio used for each vintage `q = 0..=h` (`None` for the direct filter
    /// and for the symmetric column).
    pub vintage_deltas: Vec<Option<f64>>,
    pub final_: Vec<Option<f64>>,
    pub realtime: Vec<Option<f64>>,
    /// `vintages[q][t-1] = m̂_{t|t+q}`.
    pub vintages: Vec<Vec<Option<f64>>>,
    /// `m̂_{t|t} − m̂_t` where both exist.
    pub revisions: Vec<Option<f64>>,
    pub msre: f64,
}

/// Builds the revision report. With `refit_per_vintage`, the ratio of an
/// MMSRE boundary is refitted for each vintage `q < h` on `grid` instead of
/// using the configured value.
pub fn revision_report(
    series: &Series,
    kernel: &KernelWeights,
    d: usize,
    boundary: Boundary,
    refit_per_vintage: Option<&DeltaGrid>,
) -> Result<RevisionReport> {
    let h = kernel.half_width();
    check_length(series, 2 * h + 2)?;
    let symmetric = symmetric_weights(kernel, d)?;
    let final_ = two_sided(series, &symmetric)?;
    let mut vintages = Vec::with_capacity(h + 1);
    let mut vintage_deltas = Vec::with_capacity(h + 1);
    for q in 0..=h {
        let (filter, delta) = if q == h {
            (symmetric.clone(), None)
        } else {
            match (boundary, refit_per_vintage) {
                (Boundary::Direct, _) => (daf_weights(kernel, d, q)?, None),
                (
                    Boundary::Mmsre {
                        family,
                        delta_ratio,
                    },
                    None,
                ) => (
                    family_filter(family, &symmetric, q, delta_ratio)?,
                    Some(delta_ratio),
                ),
                (Boundary::Mmsre { family, .. }, Some(grid)) => {
                    let fit = fit_delta_ratio_vintage(series, kernel, d, family, q, grid)?;
                    (
                        family_filter(family, &symmetric, q, fit.delta_ratio)?,
                        Some(fit.delta_ratio),
                    )
                }
            }
        };
        vintages.push(vintage(series, &filter)?);
        vintage_deltas.push(delta);
    }
    let realtime = vintages[0].clone();
    let revisions = realtime
        .iter()
        .zip(&final_)
        .map(|(r, f)| Some(r.as_ref()? - f.as_ref()?))
        .collect();
    let msre = msre_from(&final_, &realtime, h);
    Ok(RevisionReport {
        h,
        degree: d,
        boundary,
        vintage_deltas,
        final_,
        realtime,
        vintages,
        revisions,
        msre,
    })
}
