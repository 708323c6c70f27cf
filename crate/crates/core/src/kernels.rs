//! Kernel weight sequences on the offsets `-h..=h`.
//!
//! Kernels are kept unnormalized. Every filter built from them is invariant to
//! a positive rescaling of the kernel, so normalization is only needed for
//! display.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::MAX_HALF_WIDTH;

/// Symmetric, nonnegative weights `κ_j` for `j = -h..=h`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    half_width: usize,
    values: Vec<f64>,
}

impl KernelWeights {
    /// Builds a kernel from `2h + 1` values ordered from offset `-h` to `h`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 || values.len().is_multiple_of(2) {
            return Err(Error::InvalidKernel);
        }
        let half_width = values.len() / 2;
        if half_width > MAX_HALF_WIDTH {
            return Err(Error::HalfWidthTooLarge {
                h: half_width,
                max: MAX_HALF_WIDTH,
            });
        }
        let symmetric = (1..=half_width).all(|j| values[half_width + j] == values[half_width - j]);
        let nonnegative = values.iter().all(|v| v.is_finite() && *v >= 0.0);
        if !symmetric || !nonnegative || values.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidKernel);
        }
        Ok(Self { half_width, values })
    }

    fn from_fn(h: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_half_width(h)?;
        let values = (-(h as isize)..=h as isize).map(|j| f(j as f64)).collect();
        Self::new(values)
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Weight at offset `j`; zero outside the support.
    pub fn get(&self, j: isize) -> f64 {
        let h = self.half_width as isize;
        if j < -h || j > h {
            0.0
        } else {
            self.values[(j + h) as usize]
        }
    }

    /// Values ordered from offset `-h` to `h`.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidKernel);
        }
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }

    /// Values rescaled to sum to one.
    pub fn normalized(&self) -> Vec<f64> {
        let total: f64 = self.values.iter().sum();
        self.values.iter().map(|v| v / total).collect()
    }
}

fn check_half_width(h: usize) -> Result<()> {
    if h == 0 {
        Err(Error::ZeroHalfWidth)
    } else if h > MAX_HALF_WIDTH {
        Err(Error::HalfWidthTooLarge {
            h,
            max: MAX_HALF_WIDTH,
        })
    } else {
        Ok(())
    }
}

/// Henderson's smoothness-maximizing kernel,
/// `κ_j = [(h+1)² − j²][(h+2)² − j²][(h+3)² − j²]`.
pub fn henderson_kernel(h: usize) -> Result<KernelWeights> {
    let hf = h as f64;
    KernelWeights::from_fn(h, |j| henderson_value(hf, j))
}

pub(crate) fn henderson_value(h: f64, j: f64) -> f64 {
    let j2 = j * j;
    ((h + 1.0).powi(2) - j2) * ((h + 2.0).powi(2) - j2) * ((h + 3.0).powi(2) - j2)
}

pub fn uniform_kernel(h: usize) -> Result<KernelWeights> {
    KernelWeights::from_fn(h, |_| 1.0)
}

/// Discrete parabolic window `1 − (j / (h + 1))²`, positive on the whole support.
pub fn epanechnikov_kernel(h: usize) -> Result<KernelWeights> {
    let denom = (h as f64 + 1.0).powi(2);
    KernelWeights::from_fn(h, |j| 1.0 - j * j / denom)
}

/// The kernels known by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Henderson,
    Uniform,
    Epanechnikov,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [
        KernelKind::Henderson,
        KernelKind::Uniform,
        KernelKind::Epanechnikov,
    ];

    pub fn weights(self, h: usize) -> Result<KernelWeights> {
        match self {
            KernelKind::Henderson => henderson_kernel(h),
            KernelKind::Uniform => uniform_kernel(h),
            KernelKind::Epanechnikov => epanechnikov_kernel(h),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Henderson => "henderson",
            KernelKind::Uniform => "uniform",
            KernelKind::Epanechnikov => "epanechnikov",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "henderson" => Ok(KernelKind::Henderson),
            "uniform" => Ok(KernelKind::Uniform),
            "epanechnikov" => Ok(KernelKind::Epanechnikov),
            other => Err(format!("unknown kernel '{other}'")),
        }
    }
}
