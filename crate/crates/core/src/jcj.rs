//! Joint communication and jamming beamforming by an η sweep.
//!
//! For each η the cyclic-diagonal constrained SDP is solved, the dominant
//! eigenpair of its solution is taken as a rank-one candidate, and the
//! candidate whose constraint values best match the targets is kept.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::Scenario;
use crate::linalg::{eig_hermitian, ComplexMatrix, LinalgError};
use crate::problem::{build_problem, JcjProblem, ProblemError, ProblemOptions};
use crate::sdp::{solve, SdpError, SdpSolution, SolveStatus, SolverOptions};

pub const DEFAULT_PHI: [f64; 14] = [
    0.01, 0.02, 0.03, 0.04, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JcjError {
    #[error("eta sweep must be a nonempty, strictly increasing list in (0, 1)")]
    InvalidSweep,
    #[error("no eta value produced a usable solve ({})", summarize(.0))]
    AllEtaInfeasible(Vec<EtaOutcome>),
    #[error("relaxation not solved: {0}")]
    Unsolved(SolveStatus),
    #[error("solution has no positive eigenvalue")]
    DegenerateSolution,
    #[error("jamming-only path needs N_ue = 0")]
    HasUes,
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn summarize(outcomes: &[EtaOutcome]) -> String {
    outcomes
        .iter()
        .map(|o| format!("{}: {}", o.eta, o.status))
        .collect::<Vec<_>>()
        .join(", ")
}

/// The η values tried, strictly increasing in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct EtaSweep {
    phi: Vec<f64>,
}

impl EtaSweep {
    pub fn new(phi: Vec<f64>) -> Result<Self, JcjError> {
        let in_range = phi.iter().all(|&e| e > 0.0 && e < 1.0);
        let increasing = phi.windows(2).all(|w| w[0] < w[1]);
        if phi.is_empty() || !in_range || !increasing {
            return Err(JcjError::InvalidSweep);
        }
        Ok(Self { phi })
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }
}

impl Default for EtaSweep {
    fn default() -> Self {
        Self {
            phi: DEFAULT_PHI.to_vec(),
        }
    }
}

/// How the mismatch between targets and candidate constraint values is
/// measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorScale {
    /// `|γ - γ̂| / |γ|` per terminal, then the maximum.
    #[default]
    Relative,
    /// `|γ - γ̂|` in mW, then the maximum.
    Absolute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JcjOptions {
    pub solver: SolverOptions,
    pub error_scale: ErrorScale,
    /// Solve over the UE block only.
    pub reduced: bool,
    /// Run the η values on the rayon pool.
    pub parallel: bool,
    /// Errors at or below this level (relative to the largest threshold
    /// under [`ErrorScale::Absolute`]) count as ties, so the smallest such η
    /// wins instead of whichever one the solver noise favours.
    pub tie_tol: f64,
}

impl Default for JcjOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            error_scale: ErrorScale::Relative,
            reduced: true,
            parallel: true,
            tie_tol: 1e-6,
        }
    }
}

/// Result of one η value.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaOutcome {
    pub eta: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Present when the solve was usable.
    pub error: Option<f64>,
    pub power_mw: Option<f64>,
    pub rank_one_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSolution {
    pub eta: f64,
    /// Vectorised beamformer, one `N_tx` block per solved stream.
    pub f_hat: Vec<Complex64>,
    /// `N_tx x N_s`, zero-padded when fewer streams were solved.
    pub f_mat: ComplexMatrix,
    pub error: f64,
    /// `λ_max / Σλ` of the SDP solution.
    pub rank_one_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    /// `N_tx x N_s`.
    pub f: ComplexMatrix,
    pub power_mw: f64,
    pub chosen_eta: Option<f64>,
    pub per_eta: Vec<EtaOutcome>,
    pub rank_one_ratio: Option<f64>,
}

impl Beamformer {
    pub fn zero(n_tx: usize, n_s: usize) -> Self {
        Self {
            f: ComplexMatrix::zeros(n_tx, n_s),
            power_mw: 0.0,
            chosen_eta: None,
            per_eta: Vec::new(),
            rank_one_ratio: None,
        }
    }

    fn from_matrix(f: ComplexMatrix) -> Self {
        let power_mw = f.frobenius_norm_sqr();
        Self {
            f,
            power_mw,
            chosen_eta: None,
            per_eta: Vec::new(),
            rank_one_ratio: None,
        }
    }
}

/// Scaled dominant eigenvector of `sol.x`, reshaped column by column into
/// `n_tx x n_s`.
pub fn extract_candidate(
    sol: &SdpSolution,
    n_tx: usize,
    n_s: usize,
    eta: f64,
) -> Result<CandidateSolution, JcjError> {
    let eig = eig_hermitian(&sol.x)?;
    let lmax = eig.values.first().copied().unwrap_or(0.0);
    if !(lmax > 0.0) {
        return Err(JcjError::DegenerateSolution);
    }
    let total: f64 = eig.values.iter().map(|v| v.max(0.0)).sum();
    let scale = lmax.sqrt();
    let f_hat: Vec<Complex64> = eig.vector(0).iter().map(|z| z * scale).collect();
    Ok(CandidateSolution {
        eta,
        f_mat: reshape(&f_hat, n_tx, n_s),
        f_hat,
        error: f64::NAN,
        rank_one_ratio: lmax / total,
    })
}

fn reshape(f_hat: &[Complex64], n_tx: usize, n_s: usize) -> ComplexMatrix {
    let mut f = ComplexMatrix::zeros(n_tx, n_s);
    for (j, col) in f_hat.chunks(n_tx).take(n_s).enumerate() {
        f.set_column(j, col);
    }
    f
}

/// Worst mismatch between the rate/jamming targets and the values
/// `Re tr(A·f̂f̂ᴴ)` reached by the candidate.
pub fn score_candidate(f_hat: &[Complex64], problem: &JcjProblem, scale: ErrorScale) -> f64 {
    problem
        .a1
        .iter()
        .chain(problem.a2.iter())
        .map(|(a, gamma)| {
            let diff = (gamma - a.quadratic_form(f_hat)).abs();
            match scale {
                ErrorScale::Relative => diff / gamma.abs(),
                ErrorScale::Absolute => diff,
            }
        })
        .fold(0.0, f64::max)
}

/// Error level below which candidates are treated as equally good.
pub fn tie_threshold(problem: &JcjProblem, opts: &JcjOptions) -> f64 {
    match opts.error_scale {
        ErrorScale::Relative => opts.tie_tol,
        ErrorScale::Absolute => {
            let g = problem
                .a1
                .iter()
                .chain(problem.a2.iter())
                .map(|(_, g)| g.abs())
                .fold(0.0, f64::max);
            opts.tie_tol * g
        }
    }
}

type EtaResult = (EtaOutcome, Option<(CandidateSolution, f64)>);

fn solve_eta(scenario: &Scenario, eta: f64, opts: &JcjOptions) -> Result<EtaResult, JcjError> {
    let problem = build_problem(
        scenario,
        &ProblemOptions {
            reduced: opts.reduced,
            equality: true,
            eta: Some(eta),
        },
    )?;
    let sol = solve(&problem.to_sdp(), &opts.solver)?;
    let mut outcome = EtaOutcome {
        eta,
        status: sol.status,
        iterations: sol.iterations,
        error: None,
        power_mw: None,
        rank_one_ratio: None,
    };
    if !sol.status.is_solved() {
        return Ok((outcome, None));
    }
    let mut cand = match extract_candidate(&sol, scenario.n_tx(), scenario.n_s(), eta) {
        Ok(c) => c,
        Err(JcjError::DegenerateSolution) => return Ok((outcome, None)),
        Err(e) => return Err(e),
    };
    cand.error = score_candidate(&cand.f_hat, &problem, opts.error_scale);
    outcome.error = Some(cand.error);
    outcome.power_mw = Some(cand.f_hat.iter().map(|z| z.norm_sqr()).sum());
    outcome.rank_one_ratio = Some(cand.rank_one_ratio);
    let key = if cand.error <= tie_threshold(&problem, opts) {
        0.0
    } else {
        cand.error
    };
    Ok((outcome, Some((cand, key))))
}

/// Runs the sweep and returns the best candidate. Scenarios without UEs are
/// handed to [`run_jamming_only`].
pub fn run_jcj(
    scenario: &Scenario,
    sweep: &EtaSweep,
    opts: &JcjOptions,
) -> Result<Beamformer, JcjError> {
    if scenario.n_ue() == 0 {
        return run_jamming_only(scenario, &opts.solver);
    }
    let results: Vec<_> = if opts.parallel {
        sweep
            .phi
            .par_iter()
            .map(|&eta| solve_eta(scenario, eta, opts))
            .collect()
    } else {
        sweep
            .phi
            .iter()
            .map(|&eta| solve_eta(scenario, eta, opts))
            .collect()
    };

    let mut per_eta = Vec::with_capacity(results.len());
    let mut best: Option<(CandidateSolution, f64)> = None;
    for r in results {
        let (outcome, cand) = r?;
        per_eta.push(outcome);
        if let Some((c, key)) = cand {
            // Ascending η and a strict comparison: ties keep the smaller η.
            if key.is_finite() && best.as_ref().map_or(true, |(_, b)| key < *b) {
                best = Some((c, key));
            }
        }
    }
    let Some((best, _)) = best else {
        return Err(JcjError::AllEtaInfeasible(per_eta));
    };
    log::debug!(
        "chosen eta {} error {:.3e} rank-one ratio {:.6}",
        best.eta,
        best.error,
        best.rank_one_ratio
    );
    let mut out = Beamformer::from_matrix(best.f_mat);
    out.chosen_eta = Some(best.eta);
    out.rank_one_ratio = Some(best.rank_one_ratio);
    out.per_eta = per_eta;
    Ok(out)
}

/// Jamming-only beamformer for scenarios without UEs: the plain relaxation
/// over all UAV blocks, one column per block from that block's dominant
/// eigenpair.
pub fn run_jamming_only(
    scenario: &Scenario,
    solver: &SolverOptions,
) -> Result<Beamformer, JcjError> {
    if scenario.n_ue() != 0 {
        return Err(JcjError::HasUes);
    }
    let n_tx = scenario.n_tx();
    let n_s = scenario.n_s();
    let problem = build_problem(scenario, &ProblemOptions::relaxation(false))?;
    if problem.a2.is_empty() {
        return Ok(Beamformer::zero(n_tx, n_s));
    }
    let sol = solve(&problem.to_sdp(), solver)?;
    if !sol.status.is_solved() {
        return Err(JcjError::Unsolved(sol.status));
    }
    let mut f = ComplexMatrix::zeros(n_tx, n_s);
    for b in 0..n_s {
        let block = sol.x.principal_submatrix(b * n_tx, (b + 1) * n_tx)?;
        let eig = eig_hermitian(&block)?;
        let lmax = eig.values[0];
        if lmax > 0.0 {
            let col: Vec<Complex64> = eig.vector(0).iter().map(|z| z * lmax.sqrt()).collect();
            f.set_column(b, &col);
        }
    }
    Ok(Beamformer::from_matrix(f))
}

/// Optimal value of the relaxation without the η constraints, a lower bound
/// on the power of any feasible beamformer.
pub fn lower_bound_power(
    scenario: &Scenario,
    reduced: bool,
    solver: &SolverOptions,
) -> Result<f64, JcjError> {
    let reduced = reduced && scenario.n_ue() > 0;
    let problem = build_problem(scenario, &ProblemOptions::relaxation(reduced))?;
    if problem.a1.is_empty() && problem.a2.is_empty() {
        return Ok(0.0);
    }
    let sol = solve(&problem.to_sdp(), solver)?;
    if !sol.status.is_solved() {
        return Err(JcjError::Unsolved(sol.status));
    }
    Ok(sol.primal_obj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ArrayGeometry, Terminal, TerminalKind};
    use crate::linalg::{vec_norm, HermitianMatrix};

    const NOISE: f64 = 7.943282347242822e-11;
    const EAVES: f64 = 7.943282347242822e-9;

    fn terminal(kind: TerminalKind, aod: f64, range: f64) -> Terminal {
        Terminal {
            kind,
            range_m: range,
            aod_deg: aod,
            phase_rad: 0.7,
            noise_power_mw: NOISE,
            eaves_power_mw: (kind == TerminalKind::Uav).then_some(EAVES),
        }
    }

    fn scenario(n_tx: usize, ues: &[(f64, f64)], uavs: &[(f64, f64)]) -> Scenario {
        Scenario::new(
            ArrayGeometry::new(n_tx, 6e9).unwrap(),
            ues.iter()
                .map(|&(a, r)| terminal(TerminalKind::Ue, a, r))
                .collect(),
            uavs.iter()
                .map(|&(a, r)| terminal(TerminalKind::Uav, a, r))
                .collect(),
            vec![7.0; ues.len()],
            vec![13.0; uavs.len()],
        )
        .unwrap()
    }

    fn solution(x: HermitianMatrix) -> SdpSolution {
        SdpSolution {
            x,
            y: Vec::new(),
            status: SolveStatus::Optimal,
            primal_obj: 0.0,
            dual_obj: 0.0,
            residuals: Default::default(),
            iterations: 0,
            certificate: None,
            certificate_residual: None,
            log: Vec::new(),
        }
    }

    #[test]
    fn sweep_validation() {
        assert!(EtaSweep::new(vec![0.1, 0.2]).is_ok());
        assert!(EtaSweep::new(vec![]).is_err());
        assert!(EtaSweep::new(vec![0.2, 0.1]).is_err());
        assert!(EtaSweep::new(vec![0.0, 0.5]).is_err());
        assert!(EtaSweep::new(vec![0.5, 1.0]).is_err());
        assert_eq!(EtaSweep::default().phi().len(), 14);
    }

    #[test]
    fn extract_diagonal() {
        let c = extract_candidate(
            &solution(HermitianMatrix::from_diagonal(&[2.0, 1.0])),
            1,
            2,
            0.1,
        )
        .unwrap();
        assert!((c.f_hat[0].norm() - 2f64.sqrt()).abs() < 1e-12);
        assert!(c.f_hat[1].norm() < 1e-12);
        assert!((c.rank_one_ratio - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn extract_rank_one_recovers_vector_and_pads() {
        let f = vec![
            Complex64::new(0.3, -1.0),
            Complex64::new(2.0, 0.5),
            Complex64::new(-0.4, 0.1),
        ];
        let c = extract_candidate(&solution(HermitianMatrix::outer(&f)), 3, 2, 0.1).unwrap();
        let phase = c.f_hat[0] / f[0];
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        for (a, b) in c.f_hat.iter().zip(&f) {
            assert!((a - b * phase).norm() < 1e-10);
        }
        assert_eq!(c.f_mat.shape(), (3, 2));
        assert!(c.f_mat.column(1).iter().all(|z| z.norm() == 0.0));
        assert!((c.rank_one_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extract_zero_is_degenerate() {
        let r = extract_candidate(&solution(HermitianMatrix::zeros(2)), 1, 2, 0.1);
        assert_eq!(r.unwrap_err(), JcjError::DegenerateSolution);
    }

    #[test]
    fn zero_candidate_scores_full_target() {
        let sc = scenario(4, &[(10.0, 60.0)], &[(-30.0, 80.0)]);
        let p = build_problem(&sc, &ProblemOptions::sweep(0.1)).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); p.dim];
        assert_eq!(score_candidate(&zero, &p, ErrorScale::Relative), 1.0);
        let want =
            p.a1.iter()
                .chain(&p.a2)
                .map(|(_, g)| g.abs())
                .fold(0.0, f64::max);
        assert_eq!(score_candidate(&zero, &p, ErrorScale::Absolute), want);
    }

    #[test]
    fn single_user_broadside_matches_matched_filter() {
        // At broadside every cyclic-diagonal sum of h hᴴ equals ‖h‖², so the
        // matched filter meets all η constraints.
        let sc = scenario(8, &[(0.0, 71.0)], &[]);
        let bf = run_jcj(&sc, &EtaSweep::default(), &JcjOptions::default()).unwrap();
        let h = sc.ue_channel(0);
        let want = NOISE * 127.0 / vec_norm(&h).powi(2);
        assert!(
            (bf.power_mw / want - 1.0).abs() < 1e-2,
            "{} vs {want}",
            bf.power_mw
        );
        let total: f64 = bf.f.as_slice().iter().map(|z| z.norm_sqr()).sum();
        assert!((total / bf.power_mw - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_user_never_beats_matched_filter() {
        let sc = scenario(8, &[(23.0, 71.0)], &[]);
        let bf = run_jcj(&sc, &EtaSweep::default(), &JcjOptions::default()).unwrap();
        let h = sc.ue_channel(0);
        let want = NOISE * 127.0 / vec_norm(&h).powi(2);
        let chosen = bf
            .per_eta
            .iter()
            .find(|o| Some(o.eta) == bf.chosen_eta)
            .unwrap();
        assert!(chosen.error.unwrap() < 1e-4);
        assert!(bf.power_mw >= want * (1.0 - 1e-4));
    }

    #[test]
    fn jamming_columns_are_zero_under_reduction() {
        let sc = scenario(4, &[(10.0, 60.0), (40.0, 90.0)], &[(-30.0, 80.0)]);
        let bf = run_jcj(&sc, &EtaSweep::default(), &JcjOptions::default()).unwrap();
        assert_eq!(bf.f.shape(), (4, 3));
        assert!(bf.f.column(2).iter().all(|z| z.norm() == 0.0));
        assert_eq!(bf.per_eta.len(), 14);
        let best = bf
            .per_eta
            .iter()
            .filter_map(|o| o.error)
            .fold(f64::INFINITY, f64::min);
        let chosen = bf
            .per_eta
            .iter()
            .find(|o| Some(o.eta) == bf.chosen_eta)
            .unwrap();
        assert_eq!(chosen.error, Some(best));
    }

    #[test]
    fn near_zero_errors_tie_toward_small_eta() {
        let sc = scenario(8, &[(10.0, 70.0), (-30.0, 80.0)], &[(45.0, 90.0)]);
        let opts = JcjOptions::default();
        let bf = run_jcj(&sc, &EtaSweep::default(), &opts).unwrap();
        let tied: Vec<_> = bf
            .per_eta
            .iter()
            .filter(|o| o.error.is_some_and(|e| e <= opts.tie_tol))
            .collect();
        assert!(tied.len() > 1);
        assert_eq!(bf.chosen_eta, Some(tied[0].eta));
        for o in &tied {
            assert!(bf.power_mw <= o.power_mw.unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn serial_and_parallel_sweeps_agree() {
        let sc = scenario(4, &[(10.0, 60.0), (40.0, 90.0)], &[(-30.0, 80.0)]);
        let par = run_jcj(&sc, &EtaSweep::default(), &JcjOptions::default()).unwrap();
        let ser = run_jcj(
            &sc,
            &EtaSweep::default(),
            &JcjOptions {
                parallel: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(par, ser);
    }

    #[test]
    fn single_jammer_closed_form() {
        let sc = scenario(8, &[], &[(-12.0, 55.0)]);
        let bf = run_jamming_only(&sc, &SolverOptions::default()).unwrap();
        let h = sc.uav_channel(0);
        let gamma = EAVES / 10f64.powf(1.3) - NOISE;
        let want = gamma / vec_norm(&h).powi(2);
        assert!((bf.power_mw / want - 1.0).abs() < 1e-6);
    }

    #[test]
    fn jamming_only_streams_per_uav() {
        let sc = scenario(
            8,
            &[],
            &[(-40.0, 55.0), (-10.0, 70.0), (20.0, 60.0), (50.0, 90.0)],
        );
        let bf = run_jcj(&sc, &EtaSweep::default(), &JcjOptions::default()).unwrap();
        assert_eq!(bf.f.shape(), (8, 4));
        for j in 0..4 {
            assert!(vec_norm(&bf.f.column(j)) > 0.0);
        }
    }

    #[test]
    fn empty_scenario_gives_zero_beamformer() {
        let sc = scenario(4, &[], &[]);
        let bf = run_jamming_only(&sc, &SolverOptions::default()).unwrap();
        assert_eq!(bf.power_mw, 0.0);
        assert_eq!(bf.f.shape(), (4, 0));
    }

    #[test]
    fn lower_bound_single_user() {
        let sc = scenario(8, &[(-5.0, 66.0)], &[]);
        let lb = lower_bound_power(&sc, true, &SolverOptions::default()).unwrap();
        let h = sc.ue_channel(0);
        let want = NOISE * 127.0 / vec_norm(&h).powi(2);
        assert!((lb / want - 1.0).abs() < 1e-6);
    }
}
