//! Weighted least-squares local polynomial fits on the window `-h..=q`.
//!
//! The `(d+1)×(d+1)` moment system `X'KX` is solved by Cholesky after
//! rescaling the offsets to `j / h` and the kernel to unit maximum. Filter
//! weights are invariant to both rescalings.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::filter::{Design, FilterMeta, FilterWeights};
use crate::kernels::KernelWeights;
use crate::MAX_DEGREE;

/// Kernel moments `S_qr = Σ_{j=-h}^{q} j^r κ_j` for `r = 0..=r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSums {
    pub h: usize,
    pub q: usize,
    sums: Vec<f64>,
}

impl MomentSums {
    pub fn get(&self, r: usize) -> f64 {
        self.sums[r]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sums
    }
}

pub fn moment_sums(kernel: &KernelWeights, q: usize, r_max: usize) -> Result<MomentSums> {
    let h = kernel.half_width();
    if q > h {
        return Err(Error::FutureSpanOutOfRange { q, h });
    }
    let sums = (0..=r_max)
        .map(|r| {
            window(h, q)
                .map(|j| (j as f64).powi(r as i32) * kernel.get(j))
                .sum()
        })
        .collect();
    Ok(MomentSums { h, q, sums })
}

/// Coefficients `β_0..β_d` of a local polynomial fit; `β_0` is the trend
/// estimate at the window's reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit {
    pub coefficients: Vec<f64>,
}

impl LocalFit {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    /// Fitted polynomial evaluated at offset `j`.
    pub fn evaluate(&self, j: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * j + c)
    }
}

pub(crate) fn window(h: usize, q: usize) -> impl Iterator<Item = isize> + Clone {
    -(h as isize)..=q as isize
}

pub(crate) fn check_fit(kernel: &KernelWeights, d: usize, q: usize) -> Result<()> {
    let h = kernel.half_width();
    if q > h {
        return Err(Error::FutureSpanOutOfRange { q, h });
    }
    if d > MAX_DEGREE {
        return Err(Error::DegreeTooLarge { d, max: MAX_DEGREE });
    }
    if h + q < d {
        return Err(Error::Underdetermined {
            points: h + q + 1,
            d,
        });
    }
    Ok(())
}

/// Rescaled offsets and rescaled kernel values on the window `-h..=q`.
pub(crate) struct ScaledDesign {
    pub u: Vec<f64>,
    pub kappa: Vec<f64>,
    pub scale: f64,
}

impl ScaledDesign {
    pub fn new(kernel: &KernelWeights, q: usize) -> Self {
        let h = kernel.half_width();
        let scale = h as f64;
        let kmax = kernel.as_slice().iter().cloned().fold(0.0, f64::max);
        let u = window(h, q).map(|j| j as f64 / scale).collect();
        let kappa = window(h, q).map(|j| kernel.get(j) / kmax).collect();
        Self { u, kappa, scale }
    }

    /// `X'KX` in the rescaled basis.
    pub fn moment_matrix(&self, d: usize) -> DMatrix<f64> {
        let mut pw = vec![0.0; 2 * d + 1];
        for (u, k) in self.u.iter().zip(&self.kappa) {
            let mut p = *k;
            for slot in pw.iter_mut() {
                *slot += p;
                p *= u;
            }
        }
        DMatrix::from_fn(d + 1, d + 1, |r, s| pw[r + s])
    }
}

/// Solves the rescaled normal equations for `e_1` and returns the filter
/// weights `K X (X'KX)^{-1} e_1` on the window `-h..=q`.
pub(crate) fn fit_weights(kernel: &KernelWeights, d: usize, q: usize) -> Result<Vec<f64>> {
    check_fit(kernel, d, q)?;
    let design = ScaledDesign::new(kernel, q);
    let chol = design.moment_matrix(d).cholesky().ok_or(Error::Singular)?;
    let mut e1 = DVector::zeros(d + 1);
    e1[0] = 1.0;
    let c = chol.solve(&e1);
    Ok(design
        .u
        .iter()
        .zip(&design.kappa)
        .map(|(u, k)| {
            let poly = c.iter().rev().fold(0.0, |acc, ci| acc * u + ci);
            k * poly
        })
        .collect())
}

/// Two-sided filter `w = KX(X'KX)^{-1}e_1` of a local degree-`d` fit.
pub fn symmetric_weights(kernel: &KernelWeights, d: usize) -> Result<FilterWeights> {
    let h = kernel.half_width();
    if 2 * h < d {
        return Err(Error::Underdetermined {
            points: 2 * h + 1,
            d,
        });
    }
    let mut values = fit_weights(kernel, d, h)?;
    // exact symmetry
    for j in 0..h {
        let avg = 0.5 * (values[j] + values[2 * h - j]);
        values[j] = avg;
        values[2 * h - j] = avg;
    }
    FilterWeights::new(
        h,
        h,
        values,
        FilterMeta {
            design: Design::Symmetric,
            half_width: h,
            degree: Some(d),
            delta_ratio: None,
        },
    )
}

/// Weighted least-squares polynomial fit of `window` (offsets `-h..=q`).
pub fn wls_fit(window: &[f64], kernel: &KernelWeights, q: usize, d: usize) -> Result<LocalFit> {
    check_fit(kernel, d, q)?;
    let h = kernel.half_width();
    if window.len() != h + q + 1 {
        return Err(Error::LengthMismatch {
            expected: h + q + 1,
            got: window.len(),
        });
    }
    let design = ScaledDesign::new(kernel, q);
    let chol = design.moment_matrix(d).cholesky().ok_or(Error::Singular)?;
    let mut rhs = DVector::zeros(d + 1);
    for ((u, k), y) in design.u.iter().zip(&design.kappa).zip(window) {
        let mut p = k * y;
        for r in 0..=d {
            rhs[r] += p;
            p *= u;
        }
    }
    let beta = chol.solve(&rhs);
    let coefficients = beta
        .iter()
        .enumerate()
        .map(|(r, b)| b / design.scale.powi(r as i32))
        .collect();
    Ok(LocalFit { coefficients })
}
