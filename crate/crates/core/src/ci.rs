//! Channel-inversion baseline: `F = H†Λ`.

use num_complex::Complex64;

use crate::channel::Scenario;
use crate::linalg::{eig_hermitian, ComplexMatrix, HermitianMatrix, LinalgError};

/// Singular values at or below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CiError {
    #[error("{streams} streams exceed {antennas} transmit antennas")]
    DimensionExceeded { streams: usize, antennas: usize },
    #[error("channel matrix is rank deficient")]
    RankDeficient,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiBeamformer {
    /// `N_tx x N_s`.
    pub f: ComplexMatrix,
    pub lambda: Vec<f64>,
    pub power_mw: f64,
}

/// Minimum-norm right inverse `Hᴴ(HHᴴ)⁻¹` of a wide, full-row-rank `H`,
/// computed from the eigendecomposition of `HHᴴ`.
pub fn pseudo_inverse(h: &ComplexMatrix) -> Result<ComplexMatrix, CiError> {
    let (rows, cols) = h.shape();
    if rows > cols {
        return Err(CiError::DimensionExceeded {
            streams: rows,
            antennas: cols,
        });
    }
    if rows == 0 {
        return Ok(ComplexMatrix::zeros(cols, 0));
    }
    let gram = HermitianMatrix::symmetrized(&h.matmul(&h.adjoint())?);
    let eig = eig_hermitian(&gram)?;
    // Eigenvalues of HHᴴ are squared singular values.
    let smax = eig.values[0].max(0.0).sqrt();
    let smin = eig.values[rows - 1].max(0.0).sqrt();
    if !(smax > 0.0) || smin <= RANK_TOL * smax {
        return Err(CiError::RankDeficient);
    }
    let u = &eig.vectors;
    let inv = ComplexMatrix::from_fn(rows, rows, |i, j| {
        (0..rows)
            .map(|k| u[(i, k)] * u[(j, k)].conj() / eig.values[k])
            .sum::<Complex64>()
    });
    Ok(h.adjoint().matmul(&inv)?)
}

/// Diagonal of `Λ`: `√(σ²(2^R - 1))` per UE, then `√(P_e·10^(-Γ/10) - σ²)`
/// per UAV. A UAV already below its threshold gets zero loading.
pub fn ci_loading(scenario: &Scenario) -> Vec<f64> {
    let ue = scenario
        .ues
        .iter()
        .zip(&scenario.r_th)
        .map(|(t, r)| (t.noise_power_mw * (2f64.powf(*r) - 1.0)).sqrt());
    let uav = scenario
        .uavs
        .iter()
        .zip(&scenario.gamma_th_db)
        .enumerate()
        .map(|(m, (t, g))| {
            let rad = t.eaves_power_mw.unwrap_or(0.0) * 10f64.powf(-g / 10.0) - t.noise_power_mw;
            if rad < 0.0 {
                log::warn!("UAV {m} needs no jamming, loading set to zero");
                0.0
            } else {
                rad.sqrt()
            }
        });
    ue.chain(uav).collect()
}

pub fn run_ci(scenario: &Scenario) -> Result<CiBeamformer, CiError> {
    let pinv = pseudo_inverse(&scenario.channel_matrix())?;
    let lambda = ci_loading(scenario);
    let f = ComplexMatrix::from_fn(pinv.rows(), pinv.cols(), |i, j| pinv[(i, j)] * lambda[j]);
    let power_mw = f.frobenius_norm_sqr();
    Ok(CiBeamformer {
        f,
        lambda,
        power_mw,
    })
}
