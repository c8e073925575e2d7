//! Rates, UAV SINRs, error metrics and empirical CDFs.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use statrs::function::erf::{erfc, erfc_inv};

use crate::channel::Scenario;
use crate::linalg::{inner, ComplexMatrix};
use crate::problem::jamming_rhs;
use crate::units::{linear_to_db, mw_to_dbm};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("bit error rate must lie in (0, 1), got {0}")]
    BerOutOfRange(f64),
    #[error("modulation order must be a power of four, got {0}")]
    BadModulationOrder(u32),
    #[error("probability must lie in [0, 1], got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("empty input")]
    Empty,
    #[error("non-finite value in input")]
    NonFinite,
}

/// `(|hᴴf_n|², ‖hᴴF‖²)`.
fn received(h: &[Complex64], f: &ComplexMatrix, n: Option<usize>) -> (f64, f64) {
    let mut own = 0.0;
    let mut total = 0.0;
    for j in 0..f.cols() {
        let p = inner(h, &f.column(j)).norm_sqr();
        total += p;
        if Some(j) == n {
            own = p;
        }
    }
    (own, total)
}

/// Rate of the UE with channel `h` served by column `n` of `f`, bit/(s·Hz).
pub fn achievable_rate(h: &[Complex64], f: &ComplexMatrix, n: usize, noise_mw: f64) -> f64 {
    let (own, total) = received(h, f, Some(n));
    let interference = (total - own).max(0.0);
    (1.0 + own / (noise_mw + interference)).log2()
}

/// SINR of an eavesdropping UAV with channel `h`, dB.
pub fn uav_sinr_db(h: &[Complex64], f: &ComplexMatrix, eaves_mw: f64, noise_mw: f64) -> f64 {
    let (_, total) = received(h, f, None);
    linear_to_db(eaves_mw / (total + noise_mw))
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

pub fn q_inverse(p: f64) -> f64 {
    SQRT_2 * erfc_inv(2.0 * p)
}

fn check_order(k: u32) -> Result<(), MetricsError> {
    let square = k >= 4 && k.is_power_of_two() && k.trailing_zeros() % 2 == 0;
    if square {
        Ok(())
    } else {
        Err(MetricsError::BadModulationOrder(k))
    }
}

/// Minimum SINR in dB for square `K`-QAM to reach bit error rate `ber`,
/// using `BER ≈ 4·Q(√(3·SINR/(K-1)))`.
pub fn sinr_threshold_db(ber: f64, k: u32) -> Result<f64, MetricsError> {
    if !(ber > 0.0 && ber < 1.0) {
        return Err(MetricsError::BerOutOfRange(ber));
    }
    check_order(k)?;
    let x = q_inverse(ber / 4.0);
    Ok(linear_to_db(x * x * f64::from(k - 1) / 3.0))
}

/// Inverse of [`sinr_threshold_db`].
pub fn ber_at_sinr_db(sinr_db: f64, k: u32) -> Result<f64, MetricsError> {
    check_order(k)?;
    let s = 10f64.powf(sinr_db / 10.0);
    Ok(4.0 * q_function((3.0 * s / f64::from(k - 1)).sqrt()))
}

/// Rate and SINR errors of a beamformer against the scenario thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdErrors {
    /// `max_n |R_n - R_th|`, 0 without UEs.
    pub rate_error: f64,
    /// `max_m |Γ_m - Γ_th|` over UAVs that need jamming, 0 if none do.
    pub sinr_error_db: f64,
    /// Smallest `R_n - R_th`.
    pub worst_rate_margin: f64,
    /// Largest `Γ_m - Γ_th` over UAVs that need jamming.
    pub worst_sinr_excess_db: f64,
}

pub fn threshold_errors(scenario: &Scenario, f: &ComplexMatrix) -> ThresholdErrors {
    let mut out = ThresholdErrors {
        rate_error: 0.0,
        sinr_error_db: 0.0,
        worst_rate_margin: f64::INFINITY,
        worst_sinr_excess_db: f64::NEG_INFINITY,
    };
    for (n, ue) in scenario.ues.iter().enumerate() {
        let d =
            achievable_rate(&scenario.ue_channel(n), f, n, ue.noise_power_mw) - scenario.r_th[n];
        out.rate_error = out.rate_error.max(d.abs());
        out.worst_rate_margin = out.worst_rate_margin.min(d);
    }
    for (m, uav) in scenario.uavs.iter().enumerate() {
        let eaves = uav.eaves_power_mw.unwrap_or(0.0);
        // UAVs whose noise floor already suffices were never constrained.
        if jamming_rhs(eaves, scenario.gamma_th_db[m], uav.noise_power_mw) <= 0.0 {
            continue;
        }
        let d = uav_sinr_db(&scenario.uav_channel(m), f, eaves, uav.noise_power_mw)
            - scenario.gamma_th_db[m];
        out.sinr_error_db = out.sinr_error_db.max(d.abs());
        out.worst_sinr_excess_db = out.worst_sinr_excess_db.max(d);
    }
    out
}

/// Outcome of one scheme on one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemeStatus {
    #[default]
    NotRun,
    Ok,
    /// CI only: more streams than antennas.
    DimensionExceeded,
    /// CI only.
    RankDeficient,
    /// JCJ: no η gave a usable solve; SDR: infeasible relaxation.
    Infeasible,
    Failed,
}

impl SchemeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeStatus::NotRun => "not_run",
            SchemeStatus::Ok => "ok",
            SchemeStatus::DimensionExceeded => "dimension_exceeded",
            SchemeStatus::RankDeficient => "rank_deficient",
            SchemeStatus::Infeasible => "infeasible",
            SchemeStatus::Failed => "failed",
        }
    }
}

impl std::fmt::Display for SchemeStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-realization metrics. Powers in mW; dB conversions happen on output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RealizationResult {
    pub jcj_status: SchemeStatus,
    pub ci_status: SchemeStatus,
    pub sdr_status: SchemeStatus,
    pub jcj_power_mw: Option<f64>,
    pub ci_power_mw: Option<f64>,
    pub sdr_power_mw: Option<f64>,
    pub rate_error: Option<f64>,
    pub sinr_error_db: Option<f64>,
    /// `|tr(F̆F̆ᴴ) - tr(F̄F̄ᴴ)|`.
    pub power_error_mw: Option<f64>,
    /// Power error divided by the JCJ power.
    pub normalized_power_error: Option<f64>,
    pub ci_rate_error: Option<f64>,
    pub ci_sinr_error_db: Option<f64>,
}

impl RealizationResult {
    /// `ci_power_dBm - jcj_power_dBm`.
    pub fn power_difference_db(&self) -> Option<f64> {
        Some(mw_to_dbm(self.ci_power_mw?) - mw_to_dbm(self.jcj_power_mw?))
    }
}

/// Metrics of one realization. `jcj` and `ci` are the beamformers that were
/// produced, `sdr_power_mw` the relaxation bound. Statuses are left to the
/// caller.
pub fn realization_metrics(
    scenario: &Scenario,
    jcj: Option<&ComplexMatrix>,
    ci: Option<&ComplexMatrix>,
    sdr_power_mw: Option<f64>,
) -> RealizationResult {
    let power = |f: &ComplexMatrix| f.frobenius_norm_sqr();
    let mut r = RealizationResult {
        sdr_power_mw,
        ..Default::default()
    };
    if let Some(f) = jcj {
        let e = threshold_errors(scenario, f);
        let p = power(f);
        r.jcj_power_mw = Some(p);
        r.rate_error = Some(e.rate_error);
        r.sinr_error_db = Some(e.sinr_error_db);
        if let Some(lb) = sdr_power_mw {
            let err = (lb - p).abs();
            r.power_error_mw = Some(err);
            r.normalized_power_error = Some(err / p);
        }
    }
    if let Some(f) = ci {
        let e = threshold_errors(scenario, f);
        r.ci_power_mw = Some(power(f));
        r.ci_rate_error = Some(e.rate_error);
        r.ci_sinr_error_db = Some(e.sinr_error_db);
    }
    r
}

/// Empirical CDF: sorted values with probabilities `i/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfSeries {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl CdfSeries {
    /// Nearest-rank percentile, `p` in [0, 1].
    pub fn percentile(&self, p: f64) -> Result<f64, MetricsError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(MetricsError::ProbabilityOutOfRange(p));
        }
        let n = self.values.len();
        let rank = (p * n as f64).ceil() as usize;
        Ok(self.values[rank.clamp(1, n) - 1])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn empirical_cdf(values: &[f64]) -> Result<CdfSeries, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let probs = (1..=sorted.len()).map(|i| i as f64 / n).collect();
    Ok(CdfSeries {
        values: sorted,
        probs,
    })
}

/// Nearest-rank percentile of unsorted data.
pub fn percentile(values: &[f64], p: f64) -> Result<f64, MetricsError> {
    empirical_cdf(values)?.percentile(p)
}
