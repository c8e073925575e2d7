//! Line-of-sight channel model for a uniform linear array and random
//! placement of users (UEs) and unauthorized UAVs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::ComplexMatrix;
use crate::units::dbm_to_mw;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Rejection-sampling budget for angular separation constraints.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("angle of departure {0} deg outside [-90, 90]")]
    AodOutOfRange(f64),
    #[error("range must be positive, got {0} m")]
    NonPositiveRange(f64),
    #[error(
        "could not place terminals with the requested angular separation after {attempts} attempts"
    )]
    SeparationUnattainable { attempts: usize },
    #[error("invalid channel configuration: {0}")]
    InvalidConfig(String),
}

/// Uniform linear array with half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub n_tx: usize,
    pub carrier_freq_hz: f64,
    pub spacing_m: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
}

impl ArrayGeometry {
    pub fn new(n_tx: usize, carrier_freq_hz: f64) -> Result<Self, ChannelError> {
        Self::with_gains(n_tx, carrier_freq_hz, 1.0, 1.0)
    }

    pub fn with_gains(
        n_tx: usize,
        carrier_freq_hz: f64,
        tx_gain: f64,
        rx_gain: f64,
    ) -> Result<Self, ChannelError> {
        if n_tx == 0 {
            return Err(ChannelError::InvalidConfig(
                "n_tx must be at least 1".into(),
            ));
        }
        if !(carrier_freq_hz > 0.0) {
            return Err(ChannelError::InvalidConfig(
                "carrier frequency must be positive".into(),
            ));
        }
        if !(tx_gain > 0.0 && rx_gain > 0.0) {
            return Err(ChannelError::InvalidConfig(
                "antenna gains must be positive".into(),
            ));
        }
        Ok(Self {
            n_tx,
            carrier_freq_hz,
            spacing_m: SPEED_OF_LIGHT / (2.0 * carrier_freq_hz),
            tx_gain,
            rx_gain,
        })
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalKind {
    Ue,
    Uav,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Terminal {
    pub kind: TerminalKind,
    pub range_m: f64,
    pub aod_deg: f64,
    pub phase_rad: f64,
    pub noise_power_mw: f64,
    /// Power the UAV receives from its own controller (UAVs only).
    pub eaves_power_mw: Option<f64>,
}

/// One realization: geometry, terminals, channels and thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: ArrayGeometry,
    pub ues: Vec<Terminal>,
    pub uavs: Vec<Terminal>,
    /// `n_tx x n_ue`, column `n` is the channel of UE `n`.
    pub h_ue: ComplexMatrix,
    /// `n_tx x n_uav`.
    pub h_uav: ComplexMatrix,
    /// Rate threshold per UE, bit/(s·Hz).
    pub r_th: Vec<f64>,
    /// SINR threshold per UAV, dB.
    pub gamma_th_db: Vec<f64>,
}

impl Scenario {
    /// Assembles channels from terminal geometry.
    pub fn new(
        geometry: ArrayGeometry,
        ues: Vec<Terminal>,
        uavs: Vec<Terminal>,
        r_th: Vec<f64>,
        gamma_th_db: Vec<f64>,
    ) -> Result<Self, ChannelError> {
        if r_th.len() != ues.len() || gamma_th_db.len() != uavs.len() {
            return Err(ChannelError::InvalidConfig(
                "one threshold per terminal is required".into(),
            ));
        }
        if uavs
            .iter()
            .any(|u| !u.eaves_power_mw.is_some_and(|p| p > 0.0))
        {
            return Err(ChannelError::InvalidConfig(
                "every UAV needs a positive eavesdropped power".into(),
            ));
        }
        let columns = |ts: &[Terminal]| -> Result<Vec<Vec<Complex64>>, ChannelError> {
            ts.iter().map(|t| terminal_channel(&geometry, t)).collect()
        };
        let ue_cols = columns(&ues)?;
        let uav_cols = columns(&uavs)?;
        let build = |cols: &[Vec<Complex64>]| {
            let mut m = ComplexMatrix::zeros(geometry.n_tx, cols.len());
            for (j, c) in cols.iter().enumerate() {
                m.set_column(j, c);
            }
            m
        };
        Ok(Self {
            h_ue: build(&ue_cols),
            h_uav: build(&uav_cols),
            geometry,
            ues,
            uavs,
            r_th,
            gamma_th_db,
        })
    }

    pub fn n_tx(&self) -> usize {
        self.geometry.n_tx
    }

    pub fn n_ue(&self) -> usize {
        self.ues.len()
    }

    pub fn n_uav(&self) -> usize {
        self.uavs.len()
    }

    /// Total number of streams, one per terminal.
    pub fn n_s(&self) -> usize {
        self.n_ue() + self.n_uav()
    }

    pub fn ue_channel(&self, n: usize) -> Vec<Complex64> {
        self.h_ue.column(n)
    }

    pub fn uav_channel(&self, m: usize) -> Vec<Complex64> {
        self.h_uav.column(m)
    }

    /// Stacked channel `H = [H_ue H_uav]ᴴ`, `n_s x n_tx`.
    pub fn channel_matrix(&self) -> ComplexMatrix {
        let n_tx = self.n_tx();
        ComplexMatrix::from_fn(self.n_s(), n_tx, |i, k| {
            if i < self.n_ue() {
                self.h_ue[(k, i)].conj()
            } else {
                self.h_uav[(k, i - self.n_ue())].conj()
            }
        })
    }
}

/// `b(θ)[k] = exp(-i 2π k (d/λ) sin θ)`.
pub fn steering(geometry: &ArrayGeometry, aod_deg: f64) -> Result<Vec<Complex64>, ChannelError> {
    if !(-90.0..=90.0).contains(&aod_deg) {
        return Err(ChannelError::AodOutOfRange(aod_deg));
    }
    let ratio = geometry.spacing_m / geometry.wavelength();
    let s = aod_deg.to_radians().sin();
    Ok((0..geometry.n_tx)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 * ratio * s))
        .collect())
}

/// Free-space large-scale coefficient `e^{iξ} √(G_tx G_rx λ²) / (4π r)`.
pub fn path_gain(
    geometry: &ArrayGeometry,
    range_m: f64,
    phase_rad: f64,
) -> Result<Complex64, ChannelError> {
    if !(range_m > 0.0) {
        return Err(ChannelError::NonPositiveRange(range_m));
    }
    let lambda = geometry.wavelength();
    let mag = (geometry.tx_gain * geometry.rx_gain * lambda * lambda).sqrt() / (4.0 * PI * range_m);
    Ok(Complex64::from_polar(mag, phase_rad))
}

pub fn terminal_channel(
    geometry: &ArrayGeometry,
    t: &Terminal,
) -> Result<Vec<Complex64>, ChannelError> {
    let alpha = path_gain(geometry, t.range_m, t.phase_rad)?;
    Ok(steering(geometry, t.aod_deg)?
        .into_iter()
        .map(|b| alpha * b)
        .collect())
}

/// Physical parameters of a random realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub n_ue: usize,
    pub n_uav: usize,
    pub n_tx: usize,
    pub r_th: f64,
    pub gamma_th_db: f64,
    pub eaves_power_dbm: f64,
    pub range_min_m: f64,
    pub range_max_m: f64,
    pub aod_min_deg: f64,
    pub aod_max_deg: f64,
    pub min_ue_separation_deg: f64,
    pub min_ue_uav_separation_deg: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            carrier_freq_hz: 6e9,
            bandwidth_hz: 20e6,
            noise_psd_dbm_hz: -174.0,
            n_ue: 2,
            n_uav: 2,
            n_tx: 16,
            r_th: 7.0,
            gamma_th_db: 13.0,
            eaves_power_dbm: -81.0,
            range_min_m: 50.0,
            range_max_m: 100.0,
            aod_min_deg: -60.0,
            aod_max_deg: 60.0,
            min_ue_separation_deg: 5.0,
            min_ue_uav_separation_deg: 0.0,
            tx_gain: 1.0,
            rx_gain: 1.0,
        }
    }
}

impl ScenarioConfig {
    /// Receiver noise power `B·N₀` in mW.
    pub fn noise_power_mw(&self) -> f64 {
        dbm_to_mw(self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10())
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |msg: &str| Err(ChannelError::InvalidConfig(msg.to_string()));
        if self.n_tx == 0 {
            return bad("n_tx must be at least 1");
        }
        if !(self.bandwidth_hz > 0.0) {
            return bad("bandwidth_hz must be positive");
        }
        if !(self.range_min_m > 0.0 && self.range_max_m >= self.range_min_m) {
            return bad("range bounds must satisfy 0 < range_min_m <= range_max_m");
        }
        if !(-90.0 <= self.aod_min_deg
            && self.aod_min_deg <= self.aod_max_deg
            && self.aod_max_deg <= 90.0)
        {
            return bad("aod bounds must satisfy -90 <= aod_min_deg <= aod_max_deg <= 90");
        }
        if !(self.r_th >= 0.0) {
            return bad("r_th must be nonnegative");
        }
        if !self.gamma_th_db.is_finite() || !self.eaves_power_dbm.is_finite() {
            return bad("gamma_th_db and eaves_power_dbm must be finite");
        }
        if self.min_ue_separation_deg < 0.0 || self.min_ue_uav_separation_deg < 0.0 {
            return bad("angular separations must be nonnegative");
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<ArrayGeometry, ChannelError> {
        ArrayGeometry::with_gains(self.n_tx, self.carrier_freq_hz, self.tx_gain, self.rx_gain)
    }
}

/// Generator for realization `index` of a run seeded with `master_seed`.
///
/// ChaCha streams are independent, so realizations can be sampled in any
/// order or in parallel and still reproduce a serial run.
pub fn realization_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Samples a scenario with generator state keyed by `(master_seed, index)`.
pub fn sample_scenario_seeded(
    config: &ScenarioConfig,
    master_seed: u64,
    index: u64,
) -> Result<Scenario, ChannelError> {
    sample_scenario(config, &mut realization_rng(master_seed, index))
}

pub fn sample_scenario<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<Scenario, ChannelError> {
    config.validate()?;
    let geometry = config.geometry()?;
    let noise = config.noise_power_mw();
    let eaves = dbm_to_mw(config.eaves_power_dbm);

    let draw_aods = |rng: &mut R, count: usize| -> Vec<f64> {
        (0..count)
            .map(|_| uniform(rng, config.aod_min_deg, config.aod_max_deg))
            .collect()
    };
    let ue_aods = place(
        rng,
        config.n_ue,
        |rng, n| draw_aods(rng, n),
        |aods| min_pairwise_gap(aods) >= config.min_ue_separation_deg,
    )?;
    let uav_aods = place(
        rng,
        config.n_uav,
        |rng, n| draw_aods(rng, n),
        |aods| {
            aods.iter().all(|a| {
                ue_aods
                    .iter()
                    .all(|u| (a - u).abs() >= config.min_ue_uav_separation_deg)
            })
        },
    )?;

    let terminal = |rng: &mut R, kind, aod_deg| Terminal {
        kind,
        range_m: uniform(rng, config.range_min_m, config.range_max_m),
        aod_deg,
        phase_rad: rng.gen_range(0.0..2.0 * PI),
        noise_power_mw: noise,
        eaves_power_mw: (kind == TerminalKind::Uav).then_some(eaves),
    };
    let ues: Vec<Terminal> = ue_aods
        .iter()
        .map(|&a| terminal(rng, TerminalKind::Ue, a))
        .collect();
    let uavs: Vec<Terminal> = uav_aods
        .iter()
        .map(|&a| terminal(rng, TerminalKind::Uav, a))
        .collect();
    Scenario::new(
        geometry,
        ues,
        uavs,
        vec![config.r_th; config.n_ue],
        vec![config.gamma_th_db; config.n_uav],
    )
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Rejection sampling: redraws the whole group until `accept` holds.
fn place<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    mut draw: impl FnMut(&mut R, usize) -> Vec<f64>,
    accept: impl Fn(&[f64]) -> bool,
) -> Result<Vec<f64>, ChannelError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let candidate = draw(rng, count);
        if accept(&candidate) {
            return Ok(candidate);
        }
    }
    Err(ChannelError::SeparationUnattainable {
        attempts: MAX_PLACEMENT_ATTEMPTS,
    })
}

fn min_pairwise_gap(aods: &[f64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..aods.len() {
        for j in 0..i {
            gap = gap.min((aods[i] - aods[j]).abs());
        }
    }
    gap
}
