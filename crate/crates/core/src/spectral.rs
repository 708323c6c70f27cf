//! Transfer function, gain and phase of a filter, and the frequency-domain
//! form of the revision objective.
//!
//! With `m̂_t = Σ_j w_j y_{t−j}` the transfer function is
//! `w(e^{−iω}) = Σ_j w_j e^{−iωj}`. In offset form (`k = −j`) this is
//! `Σ_k values[k] e^{iωk}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filter::FilterWeights;

/// Default number of frequencies on `[0, π]`.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// `n` equally spaced frequencies on `[0, π]`, both ends included.
pub fn frequency_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect(),
    }
}

fn check_omegas(omegas: &[f64]) -> Result<()> {
    match omegas
        .iter()
        .find(|w| !(w.is_finite() && **w >= 0.0 && **w <= PI + 1e-12))
    {
        Some(w) => Err(Error::FrequencyOutOfRange(*w)),
        None => Ok(()),
    }
}

pub(crate) fn eval(filter: &FilterWeights, omega: f64) -> Complex64 {
    filter
        .iter()
        .map(|(k, w)| Complex64::from_polar(w, omega * k as f64))
        .sum()
}

pub fn transfer_function(filter: &FilterWeights, omegas: &[f64]) -> Result<Vec<Complex64>> {
    check_omegas(omegas)?;
    Ok(omegas.iter().map(|&w| eval(filter, w)).collect())
}

pub fn gain(filter: &FilterWeights, omegas: &[f64]) -> Result<Vec<f64>> {
    Ok(transfer_function(filter, omegas)?
        .iter()
        .map(|z| z.norm())
        .collect())
}

/// Phase, unwrapped by nearest-branch continuation from the first
/// frequency. Where the gain vanishes the phase is reported as zero. Even
/// filters have zero phase: a negative real response is a sign change of the
/// amplitude, not a time shift.
pub fn phase(filter: &FilterWeights, omegas: &[f64]) -> Result<Vec<f64>> {
    let tf = transfer_function(filter, omegas)?;
    if filter.is_symmetric(0.0) {
        return Ok(vec![0.0; tf.len()]);
    }
    let scale: f64 = filter.values().iter().map(|w| w.abs()).sum();
    let mut out = Vec::with_capacity(tf.len());
    let mut reference: Option<f64> = None;
    for z in tf {
        if z.norm() <= 1e-14 * scale {
            out.push(0.0);
            continue;
        }
        let raw = z.arg();
        let value = match reference {
            None => raw,
            Some(prev) => raw + 2.0 * PI * ((prev - raw) / (2.0 * PI)).round(),
        };
        reference = Some(value);
        out.push(value);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResponse {
    pub omegas: Vec<f64>,
    pub gain: Vec<f64>,
    pub phase: Vec<f64>,
}

pub fn spectral_response(filter: &FilterWeights, omegas: &[f64]) -> Result<SpectralResponse> {
    Ok(SpectralResponse {
        omegas: omegas.to_vec(),
        gain: gain(filter, omegas)?,
        phase: phase(filter, omegas)?,
    })
}

fn check_spans(symmetric: &FilterWeights, asymmetric: &FilterWeights) -> Result<()> {
    if !symmetric.is_symmetric(1e-12) {
        return Err(Error::NotSymmetric);
    }
    let h = symmetric.past_span();
    if asymmetric.past_span() > h || asymmetric.future_span() > h {
        return Err(Error::SpanMismatch);
    }
    Ok(())
}

/// `(1/2π) ∫_{−π}^{π} |w(e^{−iω}) − v(e^{−iω})|² dω`, evaluated by Parseval
/// as `Σ_k (v_k − w_k)²` over the symmetric support (unavailable `v_k` are 0).
pub fn revision_objective_frequency(
    symmetric: &FilterWeights,
    asymmetric: &FilterWeights,
) -> Result<f64> {
    check_spans(symmetric, asymmetric)?;
    let h = symmetric.past_span() as isize;
    Ok((-h..=h)
        .map(|k| (asymmetric.weight(k) - symmetric.weight(k)).powi(2))
        .sum())
}

/// The same integral by the trapezoid rule on `points` equally spaced
/// nodes over one period.
pub fn revision_objective_quadrature(
    symmetric: &FilterWeights,
    asymmetric: &FilterWeights,
    points: usize,
) -> Result<f64> {
    check_spans(symmetric, asymmetric)?;
    if points == 0 {
        return Err(Error::EmptyGrid);
    }
    let step = 2.0 * PI / points as f64;
    // periodic integrand: the trapezoid rule reduces to an equal-weight sum
    let total: f64 = (0..points)
        .map(|i| {
            let omega = -PI + step * i as f64;
            (eval(symmetric, omega) - eval(asymmetric, omega)).norm_sqr()
        })
        .sum();
    Ok(total * step / (2.0 * PI))
}
