//! Asymmetric end filters minimizing the mean square revision error subject
//! to polynomial reproduction constraints.
//!
//! The observations are modeled as `y = Uγ + Zδ + ε` with `ε ~ N(0, D)`.
//! `U` holds the power columns `j^0..j^{d*}` the filter must preserve and `Z`
//! the single column `j^{d*+1}` whose coefficient `δ` drives the bias. Only
//! the ratio `δ²/σ²` enters the weights.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::filter::{Design, FilterMeta, FilterWeights};

/// The named members of the class: Linear-Constant, Quadratic-Linear and
/// Cubic-Quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Lc,
    Ql,
    Cq,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Lc, Family::Ql, Family::Cq];

    /// Highest preserved degree `d*`.
    pub fn constraint_degree(self) -> usize {
        match self {
            Family::Lc => 0,
            Family::Ql => 1,
            Family::Cq => 2,
        }
    }

    pub fn bias_degree(self) -> usize {
        self.constraint_degree() + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Lc => "lc",
            Family::Ql => "ql",
            Family::Cq => "cq",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lc" => Ok(Family::Lc),
            "ql" => Ok(Family::Ql),
            "cq" => Ok(Family::Cq),
            other => Err(format!("unknown family '{other}'")),
        }
    }
}

/// Noise covariance `D`. Public filters always use the scalar identity; the
/// diagonal form exists to check the nesting of the direct filter
/// (`D = K^{-1}`).
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseCovariance {
    ScalarIdentity,
    #[doc(hidden)]
    Diagonal(Vec<f64>),
}

/// One member of the class: constraint degree `d*`, bias column `j^{d*+1}`
/// and the ratio `δ²/σ²` (`f64::INFINITY` requests the limit filter).
#[derive(Debug, Clone, PartialEq)]
pub struct MmsreSpec {
    pub constraint_degree: usize,
    pub delta_ratio: f64,
    pub noise: NoiseCovariance,
}

impl MmsreSpec {
    pub fn new(constraint_degree: usize, delta_ratio: f64) -> Result<Self> {
        check_delta(delta_ratio)?;
        Ok(Self {
            constraint_degree,
            delta_ratio,
            noise: NoiseCovariance::ScalarIdentity,
        })
    }

    pub fn family(family: Family, delta_ratio: f64) -> Result<Self> {
        Self::new(family.constraint_degree(), delta_ratio)
    }

    pub fn bias_degree(&self) -> usize {
        self.constraint_degree + 1
    }

    /// Replaces the noise covariance with `diag(values)` over offsets `-h..=h`.
    #[doc(hidden)]
    pub fn with_diagonal_noise(mut self, values: Vec<f64>) -> Self {
        self.noise = NoiseCovariance::Diagonal(values);
        self
    }
}

fn check_delta(delta_ratio: f64) -> Result<()> {
    if delta_ratio.is_nan() || delta_ratio < 0.0 {
        Err(Error::InvalidDeltaRatio(delta_ratio))
    } else {
        Ok(())
    }
}

/// Musgrave's parameterization: either `R = Ī/C̄` or the ratio itself,
/// related by `δ²/σ² = 4 / (π R²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MusgraveSpec {
    R(f64),
    DeltaRatio(f64),
}

impl MusgraveSpec {
    pub fn delta_ratio(self) -> Result<f64> {
        match self {
            MusgraveSpec::R(r) => {
                if r.is_finite() && r > 0.0 {
                    Ok(4.0 / (PI * r * r))
                } else {
                    Err(Error::InvalidRatioR(r))
                }
            }
            MusgraveSpec::DeltaRatio(d) => {
                check_delta(d)?;
                Ok(d)
            }
        }
    }
}

/// The pieces of the minimization problem for a given symmetric filter and `q`.
struct Problem {
    h: usize,
    q: usize,
    /// rescaled constraint columns on the available window (p × c)
    u_p: DMatrix<f64>,
    /// `U_f' w_f` in the same rescaled basis
    uf_wf: DVector<f64>,
    z_p: DVector<f64>,
    zf_wf: f64,
    w_p: DVector<f64>,
    /// diagonal of `D_p`
    noise_p: DVector<f64>,
    delta: f64,
}

impl Problem {
    fn new(symmetric: &FilterWeights, spec: &MmsreSpec, q: usize, columns: usize) -> Result<Self> {
        let h = check_symmetric(symmetric, q)?;
        let p = h + q + 1;
        if p < columns {
            return Err(Error::Underdetermined {
                points: p,
                d: columns - 1,
            });
        }
        let scale = h as f64;
        let b = spec.bias_degree() as i32;
        let pow = |j: isize, r: usize| (j as f64 / scale).powi(r as i32);
        let past: Vec<isize> = (-(h as isize)..=q as isize).collect();
        let u_p = DMatrix::from_fn(p, columns, |i, r| pow(past[i], r));
        let uf_wf = DVector::from_fn(columns, |r, _| {
            ((q + 1) as isize..=h as isize)
                .map(|j| pow(j, r) * symmetric.weight(j))
                .sum()
        });
        let z_p = DVector::from_iterator(p, past.iter().map(|&j| (j as f64).powi(b)));
        let zf_wf = ((q + 1) as isize..=h as isize)
            .map(|j| (j as f64).powi(b) * symmetric.weight(j))
            .sum();
        let w_p = DVector::from_iterator(p, past.iter().map(|&j| symmetric.weight(j)));
        let noise_p = match &spec.noise {
            NoiseCovariance::ScalarIdentity => DVector::from_element(p, 1.0),
            NoiseCovariance::Diagonal(values) => {
                if values.len() != 2 * h + 1 {
                    return Err(Error::LengthMismatch {
                        expected: 2 * h + 1,
                        got: values.len(),
                    });
                }
                DVector::from_column_slice(&values[..p])
            }
        };
        Ok(Self {
            h,
            q,
            u_p,
            uf_wf,
            z_p,
            zf_wf,
            w_p,
            noise_p,
            delta: spec.delta_ratio,
        })
    }

    fn into_filter(
        self,
        values: DVector<f64>,
        design: Design,
        spec: &MmsreSpec,
    ) -> Result<FilterWeights> {
        FilterWeights::new(
            self.h,
            self.q,
            values.iter().cloned().collect(),
            FilterMeta {
                design,
                half_width: self.h,
                degree: Some(spec.constraint_degree),
                delta_ratio: Some(spec.delta_ratio),
            },
        )
    }
}

fn check_symmetric(symmetric: &FilterWeights, q: usize) -> Result<usize> {
    if !symmetric.is_symmetric(1e-12) {
        return Err(Error::NotSymmetric);
    }
    let h = symmetric.past_span();
    if q > h {
        return Err(Error::FutureSpanOutOfRange { q, h });
    }
    Ok(h)
}

fn design_for(spec: &MmsreSpec) -> Design {
    match spec.constraint_degree {
        0 => Design::Mmsre(Family::Lc),
        1 => Design::Mmsre(Family::Ql),
        2 => Design::Mmsre(Family::Cq),
        _ => Design::Custom,
    }
}

/// `(U' A U)^{-1} g` for symmetric positive-definite `U' A U`.
fn gram_solve(u: &DMatrix<f64>, au: &DMatrix<f64>, g: &DVector<f64>) -> Result<DVector<f64>> {
    let gram = u.transpose() * au;
    let chol = gram.cholesky().ok_or(Error::RankDeficient)?;
    Ok(chol.solve(g))
}

/// Revision-error minimizing weights
/// `v = w_p + L U_f' w_f + M Z_p δδ' Z_f' w_f` with
/// `Q = D_p + Z_p δδ' Z_p'`, `L = Q^{-1}U_p(U_p'Q^{-1}U_p)^{-1}` and
/// `M = Q^{-1} − Q^{-1}U_p(U_p'Q^{-1}U_p)^{-1}U_p'Q^{-1}`.
/// `Q^{-1}` is applied through the Sherman-Morrison identity, which stays
/// accurate for very large ratios.
pub fn mmsre_weights(
    symmetric: &FilterWeights,
    spec: &MmsreSpec,
    q: usize,
) -> Result<FilterWeights> {
    check_delta(spec.delta_ratio)?;
    if spec.delta_ratio.is_infinite() {
        return Err(Error::InfiniteDeltaRatio);
    }
    let pb = Problem::new(symmetric, spec, q, spec.constraint_degree + 1)?;
    let d_inv = pb.noise_p.map(|d| 1.0 / d);
    let dinv_z = pb.z_p.component_mul(&d_inv);
    // Q^{-1} = D^{-1} − c D^{-1} z z' D^{-1} with c = δ / (1 + δ z'D^{-1}z)
    let c = 1.0 / (1.0 / pb.delta + pb.z_p.dot(&dinv_z));
    let dinv_u = DMatrix::from_diagonal(&d_inv) * &pb.u_p;
    let q_u = &dinv_u - &dinv_z * (dinv_z.transpose() * &pb.u_p) * c;
    // δ Q^{-1} z = c D^{-1} z, avoiding the cancelling difference
    let delta_q_z = &dinv_z * c;

    let l_g = &q_u * gram_solve(&pb.u_p, &q_u, &pb.uf_wf)?;
    let ut_qz = pb.u_p.transpose() * &delta_q_z;
    let m_z = &delta_q_z - &q_u * gram_solve(&pb.u_p, &q_u, &ut_qz)?;
    let v = &pb.w_p + l_g + m_z * pb.zf_wf;
    let design = design_for(spec);
    pb.into_filter(v, design, spec)
}

/// The same filter written through `L* = D_p^{-1}U_p(U_p'D_p^{-1}U_p)^{-1}`
/// and `R = D_p^{-1} − D_p^{-1}U_p(U_p'D_p^{-1}U_p)^{-1}U_p'D_p^{-1}`:
/// `v = w_p + L* U_f' w_f + R Z_p δδ' [1 + Z_p' R Z_p δδ']^{-1}
///      [Z_f' − Z_p' D_p^{-1} U_p (U_p'D_p^{-1}U_p)^{-1} U_f'] w_f`.
pub fn mmsre_weights_alt(
    symmetric: &FilterWeights,
    spec: &MmsreSpec,
    q: usize,
) -> Result<FilterWeights> {
    check_delta(spec.delta_ratio)?;
    if spec.delta_ratio.is_infinite() {
        return Err(Error::InfiniteDeltaRatio);
    }
    let pb = Problem::new(symmetric, spec, q, spec.constraint_degree + 1)?;
    let d_inv = pb.noise_p.map(|d| 1.0 / d);
    let dinv_u = DMatrix::from_diagonal(&d_inv) * &pb.u_p;
    let dinv_z = pb.z_p.component_mul(&d_inv);

    let coef_g = gram_solve(&pb.u_p, &dinv_u, &pb.uf_wf)?;
    let l_star_g = &dinv_u * &coef_g;
    let ut_dinv_z = pb.u_p.transpose() * &dinv_z;
    let r_z = &dinv_z - &dinv_u * gram_solve(&pb.u_p, &dinv_u, &ut_dinv_z)?;
    let denom = 1.0 + pb.delta * pb.z_p.dot(&r_z);
    let tail = pb.zf_wf - dinv_z.dot(&(&pb.u_p * &coef_g));
    let v = &pb.w_p + l_star_g + r_z * (pb.delta / denom * tail);
    let design = design_for(spec);
    pb.into_filter(v, design, spec)
}

/// The `δ²/σ² → ∞` member, obtained exactly by adding the bias column to
/// the constraints and solving the `δ = 0` problem.
pub fn mmsre_weights_limit(
    symmetric: &FilterWeights,
    spec: &MmsreSpec,
    q: usize,
) -> Result<FilterWeights> {
    check_delta(spec.delta_ratio)?;
    if spec.delta_ratio.is_finite() {
        return Err(Error::FiniteDeltaRatio(spec.delta_ratio));
    }
    let pb = Problem::new(symmetric, spec, q, spec.constraint_degree + 2)?;
    let d_inv = pb.noise_p.map(|d| 1.0 / d);
    let dinv_u = DMatrix::from_diagonal(&d_inv) * &pb.u_p;
    let v = &pb.w_p + &dinv_u * gram_solve(&pb.u_p, &dinv_u, &pb.uf_wf)?;
    let design = design_for(spec);
    pb.into_filter(v, design, spec)
}

/// Dispatches on the ratio: finite values go through [`mmsre_weights`],
/// `∞` through [`mmsre_weights_limit`].
pub fn family_filter(
    family: Family,
    symmetric: &FilterWeights,
    q: usize,
    delta_ratio: f64,
) -> Result<FilterWeights> {
    let spec = MmsreSpec::family(family, delta_ratio)?;
    if delta_ratio.is_infinite() {
        mmsre_weights_limit(symmetric, &spec, q)
    } else {
        mmsre_weights(symmetric, &spec, q)
    }
}

/// Musgrave's closed form for `v_[i]`, `i = 1..M`, with `M = h + q + 1`
/// available points of the `H = 2h + 1` term symmetric filter. Position
/// `i` maps to offset `i − h − 1`. An infinite ratio gives the
/// linear-extrapolation limit.
pub fn musgrave_weights(
    symmetric: &FilterWeights,
    q: usize,
    spec: MusgraveSpec,
) -> Result<FilterWeights> {
    if !symmetric.is_symmetric(1e-12) {
        return Err(Error::NotSymmetric);
    }
    let h = symmetric.past_span();
    let big_h = 2 * h + 1;
    let m = h + q + 1;
    if q > h {
        return Err(Error::MusgraveSpan {
            m,
            min: h + 1,
            max: big_h,
        });
    }
    let ratio = spec.delta_ratio()?;
    let w = symmetric.values();
    let mf = m as f64;
    let center = (mf + 1.0) / 2.0;
    let tail = &w[m..];
    let tail_sum: f64 = tail.iter().sum();
    let tail_moment: f64 = tail
        .iter()
        .enumerate()
        .map(|(i, wj)| ((m + 1 + i) as f64 - center) * wj)
        .sum();
    let spread = mf * (mf + 1.0) * (mf - 1.0) / 12.0;
    let slope_term = if ratio.is_infinite() {
        tail_moment / spread
    } else {
        ratio * tail_moment / (1.0 + ratio * spread)
    };
    let values = (1..=m)
        .map(|i| w[i - 1] + tail_sum / mf + (i as f64 - center) * slope_term)
        .collect();
    FilterWeights::new(
        h,
        q,
        values,
        FilterMeta {
            design: Design::Musgrave,
            half_width: h,
            degree: Some(0),
            delta_ratio: Some(ratio),
        },
    )
}

/// The two parts of the revision objective, in units of `σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParts {
    /// `(v − w_p)' D_p (v − w_p) + w_f' D_f w_f`
    pub variance: f64,
    /// `(δ²/σ²) (Z_p' v − Z' w)²`
    pub squared_bias: f64,
}

impl ObjectiveParts {
    pub fn total(&self) -> f64 {
        self.variance + self.squared_bias
    }
}

/// Evaluates the mean square revision error of `v` against `symmetric`
/// under `spec` (the constraint term is not included).
pub fn revision_objective(
    symmetric: &FilterWeights,
    v: &FilterWeights,
    spec: &MmsreSpec,
) -> Result<ObjectiveParts> {
    check_delta(spec.delta_ratio)?;
    if !symmetric.is_symmetric(1e-12) {
        return Err(Error::NotSymmetric);
    }
    let h = symmetric.past_span();
    if v.past_span() > h || v.future_span() > h {
        return Err(Error::SpanMismatch);
    }
    let noise = |k: isize| match &spec.noise {
        NoiseCovariance::ScalarIdentity => 1.0,
        NoiseCovariance::Diagonal(d) => d[(k + h as isize) as usize],
    };
    let b = spec.bias_degree() as i32;
    let mut variance = 0.0;
    let mut bias = 0.0;
    for k in -(h as isize)..=h as isize {
        let diff = v.weight(k) - symmetric.weight(k);
        variance += noise(k) * diff * diff;
        bias += (k as f64).powi(b) * diff;
    }
    let squared_bias = if spec.delta_ratio == 0.0 {
        0.0
    } else {
        spec.delta_ratio * bias * bias
    };
    Ok(ObjectiveParts {
        variance,
        squared_bias,
    })
}
