//! Local polynomial trend filters and their adaptation at the end of the
//! sample.
//!
//! * [`kernels`]: Henderson, uniform and Epanechnikov kernel weights.
//! * [`polyfit`]: weighted least-squares local polynomial fits and the
//!   symmetric two-sided filter.
//! * [`direct`]: direct asymmetric filters obtained by refitting the local
//!   polynomial to the available observations, and their leverage.
//! * [`mmsre`]: end filters minimizing the mean square revision error under
//!   polynomial reproduction constraints (LC / QL / CQ and Musgrave).
//! * [`spectral`]: gain, phase and the frequency-domain revision objective.
//! * [`pipeline`]: smoothing, cross-validation, real-time estimation and
//!   fitting of the `δ²/σ²` ratio.

pub mod direct;
pub mod error;
pub mod filter;
pub mod kernels;
pub mod mmsre;
pub mod pipeline;
pub mod polyfit;
pub mod spectral;

/// Largest supported half-width.
pub const MAX_HALF_WIDTH: usize = 50;
/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 10;

pub use direct::{
    constrained_projection_check, daf_weights, daf_weights_closed_form, daf_weights_cramer,
    forecast_extension_weights, leverage, leverage_table, LeverageTable,
};
pub use error::{Error, Result};
pub use filter::{Design, FilterMeta, FilterWeights};
pub use kernels::{
    epanechnikov_kernel, henderson_kernel, uniform_kernel, KernelKind, KernelWeights,
};
pub use mmsre::{
    family_filter, mmsre_weights, mmsre_weights_alt, mmsre_weights_limit, musgrave_weights,
    revision_objective, Family, MmsreSpec, MusgraveSpec, NoiseCovariance, ObjectiveParts,
};
pub use pipeline::{
    apply_filter, cv_score, fit_delta_ratio, fit_delta_ratio_vintage, msre, realtime_estimates,
    revision_report, select_bandwidth, smooth, smooth_with_bank, vintage_msre, BandwidthSelection,
    Boundary, DeltaFit, DeltaGrid, FilterBank, PointMethod, RevisionReport, Series, TrendEstimate,
};
pub use polyfit::{moment_sums, symmetric_weights, wls_fit, LocalFit, MomentSums};
pub use spectral::{
    frequency_grid, gain, phase, revision_objective_frequency, revision_objective_quadrature,
    spectral_response, transfer_function, SpectralResponse,
};
