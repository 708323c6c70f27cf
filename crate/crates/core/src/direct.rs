//! Direct asymmetric filters (DAF): the local polynomial refitted to the
//! observations available at the end of the sample.
//!
//! Four constructions are provided. [`daf_weights`] solves the normal
//! equations and is the one used downstream; the closed form, the
//! determinant-ratio form and the forecast-extension form exist to
//! cross-check it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::filter::{Design, FilterMeta, FilterWeights};
use crate::kernels::KernelWeights;
use crate::polyfit::{check_fit, fit_weights, symmetric_weights, ScaledDesign};

fn direct_meta(h: usize, d: usize) -> FilterMeta {
    FilterMeta {
        design: Design::Direct,
        half_width: h,
        degree: Some(d),
        delta_ratio: None,
    }
}

fn direct_filter(h: usize, q: usize, d: usize, values: Vec<f64>) -> Result<FilterWeights> {
    FilterWeights::new(h, q, values, direct_meta(h, d))
}

/// `w_a = K_p X_p (X_p' K_p X_p)^{-1} e_1` on offsets `-h..=q`; `q = h`
/// gives the symmetric filter.
pub fn daf_weights(kernel: &KernelWeights, d: usize, q: usize) -> Result<FilterWeights> {
    if q == kernel.half_width() {
        return Ok(symmetric_weights(kernel, d)?.with_meta(direct_meta(q, d)));
    }
    let values = fit_weights(kernel, d, q)?;
    direct_filter(kernel.half_width(), q, d, values)
}

/// Explicit weight formulas for `d ≤ 3`, written in terms of the kernel
/// moments `S_qr` and the cofactors `ζ_{m,n} = S_m S_n − S_{m−1} S_{n+1}`.
/// Moments are taken on the offsets `j / h`, which leaves the weights unchanged.
pub fn daf_weights_closed_form(
    kernel: &KernelWeights,
    d: usize,
    q: usize,
) -> Result<FilterWeights> {
    if d > 3 {
        return Err(Error::ClosedFormDegree(d));
    }
    check_fit(kernel, d, q)?;
    let design = ScaledDesign::new(kernel, q);
    let s: Vec<f64> = (0..=6)
        .map(|r| {
            design
                .u
                .iter()
                .zip(&design.kappa)
                .map(|(u, k)| k * u.powi(r))
                .sum()
        })
        .collect();
    let zeta = |m: usize, n: usize| s[m] * s[n] - s[m - 1] * s[n + 1];

    // numerator polynomial coefficients (in powers of j) and denominator
    let (coef, denom): (Vec<f64>, f64) = match d {
        0 => (vec![1.0], s[0]),
        1 => (vec![s[2], -s[1]], s[0] * s[2] - s[1] * s[1]),
        2 => {
            let (z42, z41, z31) = (zeta(4, 2), zeta(4, 1), zeta(3, 1));
            (vec![z42, -z41, z31], s[0] * z42 - s[1] * z41 + s[2] * z31)
        }
        _ => {
            let (z64, z63, z53) = (zeta(6, 4), zeta(6, 3), zeta(5, 3));
            let (z62, z52, z42) = (zeta(6, 2), zeta(5, 2), zeta(4, 2));
            let z0 = s[2] * z64 - s[3] * z63 + s[4] * z53;
            let z1 = s[1] * z64 - s[2] * z63 + s[3] * z53;
            let z2 = s[1] * z63 - s[2] * z62 + s[4] * z42;
            let z3 = s[1] * z53 - s[2] * z52 + s[3] * z42;
            (
                vec![z0, -z1, z2, -z3],
                s[0] * z0 - s[1] * z1 + s[2] * z2 - s[3] * z3,
            )
        }
    };
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Singular);
    }
    let values = design
        .u
        .iter()
        .zip(&design.kappa)
        .map(|(u, k)| k * coef.iter().rev().fold(0.0, |acc, c| acc * u + c) / denom)
        .collect();
    direct_filter(kernel.half_width(), q, d, values)
}

/// Determinant-ratio weights
/// `w_{a,j} = det(A[1, x_j]) / det(A) · κ_j` with `A = X_p' K_p X_p`,
/// where `A[1, x_j]` has its first column replaced by `x_j = (1, j, …, j^d)`.
pub fn daf_weights_cramer(kernel: &KernelWeights, d: usize, q: usize) -> Result<FilterWeights> {
    if d > 6 {
        return Err(Error::CramerDegree(d));
    }
    check_fit(kernel, d, q)?;
    let design = ScaledDesign::new(kernel, q);
    let a = design.moment_matrix(d);
    let det = a.clone().lu().determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Singular);
    }
    let values = design
        .u
        .iter()
        .zip(&design.kappa)
        .map(|(u, k)| {
            let mut replaced = a.clone();
            for r in 0..=d {
                replaced[(r, 0)] = u.powi(r as i32);
            }
            replaced.lu().determinant() / det * k
        })
        .collect();
    direct_filter(kernel.half_width(), q, d, values)
}

/// Two-sided filter applied to the window extended by polynomial forecasts
/// `ŷ_f = X_f (X_p' K_p X_p)^{-1} X_p' K_p y_p`, folded back onto `-h..=q`.
/// The forecast projection is computed by a QR factorization of the
/// kernel-weighted design.
pub fn forecast_extension_weights(
    kernel: &KernelWeights,
    d: usize,
    q: usize,
) -> Result<FilterWeights> {
    check_fit(kernel, d, q)?;
    let h = kernel.half_width();
    let symmetric = symmetric_weights(kernel, d)?;
    if q == h {
        return Ok(symmetric.with_meta(direct_meta(h, d)));
    }
    let design = ScaledDesign::new(kernel, q);
    let p = design.u.len();
    let sqrt_k: Vec<f64> = design.kappa.iter().map(|k| k.sqrt()).collect();
    let weighted = DMatrix::from_fn(p, d + 1, |i, r| sqrt_k[i] * design.u[i].powi(r as i32));
    let qr = weighted.qr();
    let r = qr.r();
    let qt_w = qr.q().transpose() * DMatrix::from_diagonal(&DVector::from_vec(sqrt_k));
    // B = R^{-1} Q' K_p^{1/2}: maps y_p to the fitted coefficients
    let coef_map = r.solve_upper_triangular(&qt_w).ok_or(Error::Singular)?;

    let mut values: Vec<f64> = symmetric.values()[..p].to_vec();
    for j in (q + 1)..=h {
        let u = j as f64 / design.scale;
        let w_future = symmetric.weight(j as isize);
        for (i, v) in values.iter_mut().enumerate() {
            let forecast: f64 = (0..=d).map(|r| u.powi(r as i32) * coef_map[(r, i)]).sum();
            *v += w_future * forecast;
        }
    }
    direct_filter(h, q, d, values)
}

/// Solves `min (v − w_p)' K_p^{-1} (v − w_p)` subject to `X_p' v = X' w`
/// through its KKT system and returns the largest elementwise gap to
/// [`daf_weights`].
pub fn constrained_projection_check(kernel: &KernelWeights, d: usize, q: usize) -> Result<f64> {
    check_fit(kernel, d, q)?;
    let symmetric = symmetric_weights(kernel, d)?;
    let daf = daf_weights(kernel, d, q)?;
    let design = ScaledDesign::new(kernel, q);
    if design.kappa.iter().any(|k| *k <= 0.0) {
        return Err(Error::Singular);
    }
    let p = design.u.len();
    let n = p + d + 1;
    let mut kkt = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for i in 0..p {
        let inv_k = 1.0 / design.kappa[i];
        kkt[(i, i)] = inv_k;
        rhs[i] = inv_k * symmetric.values()[i];
        for r in 0..=d {
            let x = design.u[i].powi(r as i32);
            kkt[(i, p + r)] = x;
            kkt[(p + r, i)] = x;
        }
    }
    // X'w over the full symmetric support, same rescaled basis
    for (k, w) in symmetric.iter() {
        let u = k as f64 / design.scale;
        for r in 0..=d {
            rhs[p + r] += u.powi(r as i32) * w;
        }
    }
    let sol = kkt.lu().solve(&rhs).ok_or(Error::Singular)?;
    Ok((0..p)
        .map(|i| (sol[i] - daf.values()[i]).abs())
        .fold(0.0, f64::max))
}

/// Weight on the current observation, `κ_0 e_1' (X_p' K_p X_p)^{-1} e_1`.
pub fn leverage(kernel: &KernelWeights, d: usize, q: usize) -> Result<f64> {
    check_fit(kernel, d, q)?;
    let design = ScaledDesign::new(kernel, q);
    let h = kernel.half_width();
    // diagonal of the hat matrix of K^{1/2} X at offset 0: squared row norm of Q
    let root = DMatrix::from_fn(design.u.len(), d + 1, |i, r| {
        design.kappa[i].sqrt() * design.u[i].powi(r as i32)
    });
    let qr = root.qr();
    if qr.r().diagonal().iter().any(|v| v.abs() < 1e-13) {
        return Err(Error::Singular);
    }
    Ok(qr.q().row(h).norm_squared())
}

/// Leverage `w_{a,0}` for every `q = 0..=h` and `d = 0..=d_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeverageTable {
    pub h: usize,
    pub d_max: usize,
    entries: Vec<Vec<f64>>,
}

impl LeverageTable {
    pub fn get(&self, q: usize, d: usize) -> f64 {
        self.entries[q][d]
    }

    /// Rows indexed by `q`, columns by `d`.
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.entries
    }
}

pub fn leverage_table(kernel: &KernelWeights, d_max: usize) -> Result<LeverageTable> {
    let h = kernel.half_width();
    let entries = (0..=h)
        .map(|q| (0..=d_max).map(|d| leverage(kernel, d, q)).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(LeverageTable { h, d_max, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{epanechnikov_kernel, henderson_kernel, uniform_kernel, KernelKind};
    use approx::assert_abs_diff_eq;

    fn round4(x: f64) -> f64 {
        (x * 1e4).round() / 1e4
    }

    #[test]
    fn table_one_spot_values() {
        let hk = henderson_kernel(6).unwrap();
        assert_eq!(round4(daf_weights(&hk, 3, 0).unwrap().weight(0)), 0.9552);
        assert_eq!(round4(leverage(&hk, 0, 0).unwrap()), 0.2457);
        assert_eq!(round4(leverage(&hk, 4, 4).unwrap()), 0.3577);
        assert_eq!(round4(leverage(&hk, 5, 6).unwrap()), 0.3379);
        assert_eq!(
            round4(daf_weights_closed_form(&hk, 1, 0).unwrap().weight(0)),
            0.5856
        );
        assert_eq!(
            round4(daf_weights_closed_form(&hk, 2, 1).unwrap().weight(0)),
            0.3060
        );
    }

    #[test]
    fn interpolating_fit_puts_all_weight_on_current_point() {
        let hk = henderson_kernel(6).unwrap();
        let w = daf_weights(&hk, 6, 0).unwrap();
        assert_abs_diff_eq!(w.weight(0), 1.0, epsilon = 1e-9);
        for k in -6..0 {
            assert!(w.weight(k).abs() < 1e-9);
        }
        let c = daf_weights_cramer(&hk, 6, 0).unwrap();
        assert_abs_diff_eq!(c.weight(0), 1.0, epsilon = 1e-9);
        for kind in KernelKind::ALL {
            for h in 1..=8 {
                let k = kind.weights(h).unwrap();
                assert_abs_diff_eq!(leverage(&k, h, 0).unwrap(), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn trailing_mean() {
        let u = uniform_kernel(2).unwrap();
        for w in [
            daf_weights(&u, 0, 0).unwrap(),
            daf_weights_cramer(&u, 0, 0).unwrap(),
            daf_weights_closed_form(&u, 0, 0).unwrap(),
        ] {
            assert_eq!(w.len(), 3);
            for v in w.values() {
                assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-15);
            }
        }
        let u3 = uniform_kernel(3).unwrap();
        let table = leverage_table(&u3, 0).unwrap();
        for q in 0..=3 {
            assert_abs_diff_eq!(table.get(q, 0), 1.0 / (4.0 + q as f64), epsilon = 1e-14);
        }
    }

    #[test]
    fn closed_form_d0_is_normalized_kernel() {
        let hk = henderson_kernel(5).unwrap();
        for q in 0..=5 {
            let w = daf_weights_closed_form(&hk, 0, q).unwrap();
            let s0: f64 = (-5..=q as isize).map(|j| hk.get(j)).sum();
            for (k, v) in w.iter() {
                assert_abs_diff_eq!(v, hk.get(k) / s0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn routes_agree_on_examples() {
        let hk = henderson_kernel(6).unwrap();
        let daf = daf_weights(&hk, 3, 0).unwrap();
        assert!(daf_weights_cramer(&hk, 3, 0).unwrap().max_abs_diff(&daf) < 1e-8);
        assert!(
            forecast_extension_weights(&hk, 3, 0)
                .unwrap()
                .max_abs_diff(&daf)
                < 1e-10
        );
        let ep = epanechnikov_kernel(4).unwrap();
        let daf = daf_weights(&ep, 2, 2).unwrap();
        assert!(
            forecast_extension_weights(&ep, 2, 2)
                .unwrap()
                .max_abs_diff(&daf)
                < 1e-10
        );
        let sym = symmetric_weights(&hk, 3).unwrap();
        assert!(
            forecast_extension_weights(&hk, 3, 6)
                .unwrap()
                .max_abs_diff(&sym)
                < 1e-15
        );
        assert!(daf_weights(&hk, 3, 6).unwrap().max_abs_diff(&sym) < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let hk = henderson_kernel(6).unwrap();
        assert!(constrained_projection_check(&hk, 3, 0).unwrap() <= 1e-8);
        let u = uniform_kernel(3).unwrap();
        assert!(constrained_projection_check(&u, 1, 1).unwrap() <= 1e-10);
        assert!(constrained_projection_check(&hk, 3, 6).unwrap() <= 1e-12);
    }

    #[test]
    fn fundamental_relationship() {
        // w_a − w_p = K_p X_p (X_p' K_p X_p)^{-1} X_f' w_f, evaluated on raw offsets
        for kind in KernelKind::ALL {
            for h in 2..=8usize {
                let k = kind.weights(h).unwrap();
                for d in 0..=3.min(2 * h) {
                    let w = symmetric_weights(&k, d).unwrap();
                    for q in 0..h {
                        if h + q < d {
                            continue;
                        }
                        let wa = daf_weights(&k, d, q).unwrap();
                        let offs: Vec<isize> = (-(h as isize)..=q as isize).collect();
                        let xp = DMatrix::from_fn(offs.len(), d + 1, |i, r| {
                            (offs[i] as f64).powi(r as i32)
                        });
                        let kp = DMatrix::from_diagonal(&DVector::from_iterator(
                            offs.len(),
                            offs.iter().map(|&j| k.get(j)),
                        ));
                        let xf_wf = DVector::from_fn(d + 1, |r, _| {
                            ((q + 1)..=h)
                                .map(|j| (j as f64).powi(r as i32) * w.weight(j as isize))
                                .sum()
                        });
                        let a = xp.transpose() * &kp * &xp;
                        let l = a.lu().solve(&xf_wf).unwrap();
                        let rhs = &kp * &xp * l;
                        for (i, &j) in offs.iter().enumerate() {
                            let lhs = wa.weight(j) - w.weight(j);
                            assert!((lhs - rhs[i]).abs() < 1e-10, "{kind} h={h} d={d} q={q}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn error_paths() {
        let hk = henderson_kernel(3).unwrap();
        assert!(matches!(
            daf_weights(&hk, 2, 4),
            Err(Error::FutureSpanOutOfRange { .. })
        ));
        assert!(matches!(
            daf_weights(&hk, 4, 0),
            Err(Error::Underdetermined { .. })
        ));
        assert_eq!(
            daf_weights_closed_form(&hk, 4, 1),
            Err(Error::ClosedFormDegree(4))
        );
        let big = henderson_kernel(8).unwrap();
        assert_eq!(daf_weights_cramer(&big, 7, 0), Err(Error::CramerDegree(7)));
        assert!(leverage_table(&hk, 4).is_err());
    }
}
