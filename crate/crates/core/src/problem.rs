//! SDP data for the joint communication and jamming problem.
//!
//! The beamformer `F = [f_1 … f_Ns]` is vectorised column by column into
//! `f`, and the optimisation runs over `F̃ = f fᴴ`. In the reduced build
//! only the leading `N_ue·N_tx` block is kept: the jamming-stream columns of
//! an optimal beamformer are zero whenever at least one UE is served.

use num_complex::Complex64;

use crate::channel::Scenario;
use crate::linalg::{ComplexMatrix, HermitianMatrix, LinalgError};
use crate::sdp::{SdpSpec, Sense};
use crate::units::db_to_linear;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("the reduced build needs at least one UE")]
    NoUes,
    #[error("eta must lie in (0, 1), got {0}")]
    EtaOutOfRange(f64),
    #[error("shift {k} out of range for size {size}")]
    ShiftOutOfRange { k: usize, size: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// How the problem is assembled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemOptions {
    /// Restrict to the UE block.
    pub reduced: bool,
    /// Rate and jamming constraints as equalities instead of `>=`.
    pub equality: bool,
    /// Cyclic-diagonal constraint level; `None` gives the plain relaxation.
    pub eta: Option<f64>,
}

impl ProblemOptions {
    /// The per-η problem solved inside the sweep.
    pub fn sweep(eta: f64) -> Self {
        Self {
            reduced: true,
            equality: true,
            eta: Some(eta),
        }
    }

    /// The plain relaxation with inequality constraints, whose optimum lower
    /// bounds the power of any rank-one beamformer.
    pub fn relaxation(reduced: bool) -> Self {
        Self {
            reduced,
            equality: false,
            eta: None,
        }
    }
}

/// Constraint data for one scenario.
#[derive(Debug, Clone)]
pub struct JcjProblem {
    pub dim: usize,
    pub n_tx: usize,
    pub n_ue: usize,
    pub n_uav: usize,
    /// Rate constraint per UE: `(A_1n, γ_1n)`.
    pub a1: Vec<(HermitianMatrix, f64)>,
    /// Jamming constraint per kept UAV: `(A_2m, γ_2m)`.
    pub a2: Vec<(HermitianMatrix, f64)>,
    /// UAV index of each entry of `a2`.
    pub a2_uav: Vec<usize>,
    /// UAVs whose jamming constraint is vacuous (`γ_2m <= 0`).
    pub dropped_uavs: Vec<usize>,
    /// Cyclic-diagonal constraints `(A_3k, 0)`, `k = 1..K-1`.
    pub a3: Vec<(HermitianMatrix, f64)>,
    pub eta: Option<f64>,
    pub reduced: bool,
    pub equality: bool,
}

impl JcjProblem {
    /// Number of streams represented in the solved matrix.
    pub fn streams(&self) -> usize {
        self.dim / self.n_tx
    }

    pub fn to_sdp(&self) -> SdpSpec {
        let mut spec = SdpSpec::min_trace(self.dim);
        let rows = self.a1.iter().chain(self.a2.iter()).cloned();
        if self.equality {
            spec.eq_constraints.extend(rows);
        } else {
            spec.ineq_constraints
                .extend(rows.map(|(a, g)| (a, g, Sense::Ge)));
        }
        spec.ineq_constraints
            .extend(self.a3.iter().cloned().map(|(a, g)| (a, g, Sense::Ge)));
        spec
    }
}

/// Permutation matrix with `P[i, (i+k) mod size] = 1`.
pub fn circshift_identity(size: usize, k: usize) -> Result<ComplexMatrix, ProblemError> {
    if k >= size {
        return Err(ProblemError::ShiftOutOfRange { k, size });
    }
    Ok(ComplexMatrix::from_real(size, size, |i, j| {
        if (i + k) % size == j {
            1.0
        } else {
            0.0
        }
    }))
}

/// Right-hand side of a UE rate constraint, `(2^R - 1)/2^R · σ²`.
pub fn rate_rhs(r_th: f64, noise_mw: f64) -> f64 {
    rate_factor(r_th) * noise_mw
}

/// Right-hand side of a UAV jamming constraint, `P_e·10^(-Γ/10) - σ²`.
pub fn jamming_rhs(eaves_mw: f64, gamma_th_db: f64, noise_mw: f64) -> f64 {
    eaves_mw / db_to_linear(gamma_th_db) - noise_mw
}

fn rate_factor(r_th: f64) -> f64 {
    let p = 2f64.powf(r_th);
    (p - 1.0) / p
}

/// Rate and jamming constraint matrices and their right-hand sides.
#[derive(Debug, Clone)]
pub struct ConstraintMatrices {
    pub a1: Vec<HermitianMatrix>,
    pub gamma1: Vec<f64>,
    pub a2: Vec<HermitianMatrix>,
    pub gamma2: Vec<f64>,
    pub a2_uav: Vec<usize>,
    pub dropped_uavs: Vec<usize>,
}

pub fn build_constraint_matrices(
    scenario: &Scenario,
    reduced: bool,
) -> Result<ConstraintMatrices, ProblemError> {
    let n_tx = scenario.n_tx();
    let n_ue = scenario.n_ue();
    if reduced && n_ue == 0 {
        return Err(ProblemError::NoUes);
    }
    let blocks = if reduced { n_ue } else { scenario.n_s() };
    let dim = blocks * n_tx;

    let mut a1 = Vec::with_capacity(n_ue);
    let mut gamma1 = Vec::with_capacity(n_ue);
    for (n, ue) in scenario.ues.iter().enumerate() {
        let h = scenario.ue_channel(n);
        let c = rate_factor(scenario.r_th[n]);
        let mut a = HermitianMatrix::zeros(dim);
        for b in 0..blocks {
            a.add_outer_at(b * n_tx, -c, &h);
        }
        a.add_outer_at(n * n_tx, 1.0, &h);
        a1.push(a);
        gamma1.push(rate_rhs(scenario.r_th[n], ue.noise_power_mw));
    }

    let mut a2 = Vec::new();
    let mut gamma2 = Vec::new();
    let mut a2_uav = Vec::new();
    let mut dropped_uavs = Vec::new();
    for (m, uav) in scenario.uavs.iter().enumerate() {
        let eaves = uav.eaves_power_mw.unwrap_or(0.0);
        let g = jamming_rhs(eaves, scenario.gamma_th_db[m], uav.noise_power_mw);
        if g <= 0.0 {
            log::warn!(
                "UAV {m}: noise alone keeps SINR below threshold, jamming constraint dropped"
            );
            dropped_uavs.push(m);
            continue;
        }
        let h = scenario.uav_channel(m);
        let mut a = HermitianMatrix::zeros(dim);
        for b in 0..blocks {
            a.add_outer_at(b * n_tx, 1.0, &h);
        }
        a2.push(a);
        gamma2.push(g);
        a2_uav.push(m);
    }
    Ok(ConstraintMatrices {
        a1,
        gamma1,
        a2,
        gamma2,
        a2_uav,
        dropped_uavs,
    })
}

/// `A_3k = sym(P̄_k) - η I` for `k = 1..N_ue·N_tx - 1`, where `P̄_k` holds the
/// cyclic shift of the UE block and zeros elsewhere. The real part of
/// `tr(P̄_k F̃)` equals `tr(sym(P̄_k) F̃)` for Hermitian `F̃`.
pub fn build_eta_constraints(
    n_ue: usize,
    n_tx: usize,
    n_uav: usize,
    eta: f64,
    reduced: bool,
) -> Result<Vec<HermitianMatrix>, ProblemError> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(ProblemError::EtaOutOfRange(eta));
    }
    if n_ue == 0 {
        return Err(ProblemError::NoUes);
    }
    let k_size = n_ue * n_tx;
    let dim = if reduced {
        k_size
    } else {
        (n_ue + n_uav) * n_tx
    };
    (1..k_size)
        .map(|k| {
            let mut m = ComplexMatrix::zeros(dim, dim);
            for i in 0..k_size {
                let j = (i + k) % k_size;
                m[(i, j)] += Complex64::new(0.5, 0.0);
                m[(j, i)] += Complex64::new(0.5, 0.0);
            }
            for i in 0..dim {
                m[(i, i)] -= Complex64::new(eta, 0.0);
            }
            Ok(HermitianMatrix::new(m)?)
        })
        .collect()
}

pub fn build_problem(
    scenario: &Scenario,
    opts: &ProblemOptions,
) -> Result<JcjProblem, ProblemError> {
    let cm = build_constraint_matrices(scenario, opts.reduced)?;
    let n_tx = scenario.n_tx();
    let dim = if opts.reduced {
        scenario.n_ue() * n_tx
    } else {
        scenario.n_s() * n_tx
    };
    let a3 = match opts.eta {
        Some(eta) => {
            build_eta_constraints(scenario.n_ue(), n_tx, scenario.n_uav(), eta, opts.reduced)?
                .into_iter()
                .map(|a| (a, 0.0))
                .collect()
        }
        None => Vec::new(),
    };
    Ok(JcjProblem {
        dim,
        n_tx,
        n_ue: scenario.n_ue(),
        n_uav: scenario.n_uav(),
        a1: cm.a1.into_iter().zip(cm.gamma1).collect(),
        a2: cm.a2.into_iter().zip(cm.gamma2).collect(),
        a2_uav: cm.a2_uav,
        dropped_uavs: cm.dropped_uavs,
        a3,
        eta: opts.eta,
        reduced: opts.reduced,
        equality: opts.equality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ArrayGeometry, Terminal, TerminalKind};
    use crate::linalg::{eig_hermitian, trace_inner};

    fn terminal(kind: TerminalKind, aod: f64) -> Terminal {
        Terminal {
            kind,
            range_m: 60.0,
            aod_deg: aod,
            phase_rad: 0.3,
            noise_power_mw: 10f64.powf(-10.1),
            eaves_power_mw: (kind == TerminalKind::Uav).then_some(10f64.powf(-8.1)),
        }
    }

    fn scenario(n_tx: usize, ue_aods: &[f64], uav_aods: &[f64]) -> Scenario {
        Scenario::new(
            ArrayGeometry::new(n_tx, 6e9).unwrap(),
            ue_aods
                .iter()
                .map(|&a| terminal(TerminalKind::Ue, a))
                .collect(),
            uav_aods
                .iter()
                .map(|&a| terminal(TerminalKind::Uav, a))
                .collect(),
            vec![7.0; ue_aods.len()],
            vec![13.0; uav_aods.len()],
        )
        .unwrap()
    }

    #[test]
    fn circshift_examples() {
        assert_eq!(
            circshift_identity(3, 0).unwrap(),
            ComplexMatrix::identity(3)
        );
        let swap = circshift_identity(2, 1).unwrap();
        assert_eq!(
            swap,
            ComplexMatrix::from_real(2, 2, |i, j| if i != j { 1.0 } else { 0.0 })
        );
        assert!(matches!(
            circshift_identity(3, 3),
            Err(ProblemError::ShiftOutOfRange { .. })
        ));
    }

    #[test]
    fn circshift_trace_picks_cyclic_diagonal() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| {
            Complex64::new((3 * i + j) as f64, (i as f64) - (j as f64))
        });
        let p1 = circshift_identity(3, 1).unwrap();
        let tr = a.matmul(&p1).unwrap().trace();
        // tr(A P) = Σ_i A[i, σ⁻¹(i)] with P[i,(i+1) mod 3] = 1.
        let expected = a[(1, 0)] + a[(2, 1)] + a[(0, 2)];
        assert!((tr - expected).norm() < 1e-12);
    }

    #[test]
    fn rhs_values() {
        let sigma = 10f64.powf(-10.1);
        let g1 = rate_rhs(7.0, sigma);
        assert!((g1 - 127.0 / 128.0 * sigma).abs() < 1e-24);
        assert!((g1 - 7.881e-11).abs() < 1e-14);
        let g2 = jamming_rhs(10f64.powf(-8.1), 13.0, sigma);
        assert!((g2 - (10f64.powf(-9.4) - sigma)).abs() < 1e-24);
        assert!((g2 - 3.187e-10).abs() < 1e-13);
    }

    #[test]
    fn reduced_shapes() {
        let s = scenario(16, &[-20.0, 30.0], &[0.0, 45.0]);
        let p = build_problem(&s, &ProblemOptions::sweep(0.5)).unwrap();
        assert_eq!(p.dim, 32);
        assert!(p.a1.iter().chain(&p.a2).all(|(a, _)| a.dim() == 32));
        assert_eq!(p.a3.len(), 31);
        let full = build_problem(
            &s,
            &ProblemOptions {
                reduced: false,
                ..ProblemOptions::sweep(0.5)
            },
        )
        .unwrap();
        assert_eq!(full.dim, 64);
        assert_eq!(full.a3.len(), 31);
    }

    #[test]
    fn eta_constraint_examples() {
        let a3 = build_eta_constraints(1, 2, 0, 0.5, true).unwrap();
        assert_eq!(a3.len(), 1);
        let expected = HermitianMatrix::new(ComplexMatrix::from_real(2, 2, |i, j| {
            if i == j {
                -0.5
            } else {
                1.0
            }
        }))
        .unwrap();
        assert_eq!(a3[0], expected);
        let a3 = build_eta_constraints(2, 3, 1, 0.2, true).unwrap();
        assert_eq!(a3.len(), 5);
        for a in &a3 {
            assert!((a.trace() + 0.2 * 6.0).abs() < 1e-12);
        }
        let full = build_eta_constraints(2, 3, 1, 0.2, false).unwrap();
        assert!((full[0].trace() + 0.2 * 9.0).abs() < 1e-12);
        assert!(matches!(
            build_eta_constraints(1, 2, 0, 1.0, true),
            Err(ProblemError::EtaOutOfRange(_))
        ));
        assert!(matches!(
            build_eta_constraints(1, 2, 0, 0.0, true),
            Err(ProblemError::EtaOutOfRange(_))
        ));
    }

    #[test]
    fn vacuous_jamming_is_dropped() {
        let mut s = scenario(4, &[10.0], &[-30.0, 40.0]);
        // Noise above P_e·10^(-Γ/10): the UAV is already below threshold.
        s.uavs[1].noise_power_mw = 1e-8;
        let p = build_problem(&s, &ProblemOptions::sweep(0.3)).unwrap();
        assert_eq!(p.a2.len(), 1);
        assert_eq!(p.a2_uav, vec![0]);
        assert_eq!(p.dropped_uavs, vec![1]);
    }

    #[test]
    fn jamming_matrix_psd_and_rate_matrix_inertia() {
        // Each foreign block of A_1n is -c·h hᴴ, which is rank one, so the
        // full build has exactly N_s - 1 negative eigenvalues.
        let s = scenario(3, &[-10.0, 25.0], &[50.0]);
        let cm = build_constraint_matrices(&s, false).unwrap();
        for a in &cm.a2 {
            assert!(a.is_psd().unwrap());
        }
        for a in &cm.a1 {
            let e = eig_hermitian(a).unwrap();
            let tol = 1e-9 * a.frobenius_norm();
            let negative = e.values.iter().filter(|&&l| l < -tol).count();
            assert_eq!(negative, s.n_s() - 1);
        }
    }

    #[test]
    fn rank_one_trace_matches_sinr_form() {
        // tr(A_1n f fᴴ) = |h_nᴴ f_n|² - c Σ_j |h_nᴴ f_j|².
        let s = scenario(4, &[-10.0, 25.0], &[50.0]);
        let cm = build_constraint_matrices(&s, false).unwrap();
        let f: Vec<Complex64> = (0..12)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.7).cos()))
            .collect();
        let x = HermitianMatrix::outer(&f);
        let h = s.ue_channel(1);
        let col = |j: usize| -> Vec<Complex64> { f[j * 4..(j + 1) * 4].to_vec() };
        let gain = |j: usize| crate::linalg::inner(&h, &col(j)).norm_sqr();
        let c = 127.0 / 128.0;
        let expected = gain(1) - c * (gain(0) + gain(1) + gain(2));
        let got = trace_inner(&cm.a1[1], &x).unwrap();
        assert!(
            (got - expected).abs() <= 1e-12 * expected.abs().max(1e-20),
            "{got} vs {expected}"
        );
    }
}
