//! Brute-force reference for tiny instances.
//!
//! Minimises `‖f‖²` directly over the stacked beamformer subject to the rate
//! and jamming equalities, from many random starts. Each start runs
//! augmented-Lagrangian rounds of gradient descent with a doubling penalty,
//! then Newton steps on the KKT system. Feasibility is checked on the final
//! point, never assumed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{realization_rng, Scenario};
use crate::linalg::{eig_hermitian, real_embed, LinalgError};
use crate::problem::{build_constraint_matrices, ProblemError};

/// Largest `N_ue·N_tx` accepted.
pub const MAX_UE_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("instance too large for the oracle: N_ue·N_tx = {0} > {MAX_UE_DIM}")]
    TooLarge(usize),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    pub n_starts: usize,
    /// Gradient iterations per penalty round.
    pub budget: usize,
    pub rounds: usize,
    pub initial_penalty: f64,
    /// Largest relative constraint violation accepted as feasible.
    pub feas_tol: f64,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            n_starts: 64,
            budget: 300,
            rounds: 8,
            initial_penalty: 10.0,
            feas_tol: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Stacked beamformer of length `N_s·N_tx`; zero if nothing was feasible.
    pub best_f: Vec<Complex64>,
    pub best_power_mw: f64,
    pub starts_tried: usize,
    pub feasible_found: bool,
    pub feasible_starts: usize,
    /// Largest relative constraint violation of `best_f`.
    pub max_violation: f64,
}

/// Constraints `xᵀQ_i x = 1` on the real vector `x = [Re u; Im u]`, where
/// `f = √scale · u`.
struct Scaled {
    q: Vec<DMatrix<f64>>,
    scale: f64,
    n: usize,
}

impl Scaled {
    fn residuals(&self, x: &DVector<f64>) -> Vec<f64> {
        self.q.iter().map(|q| x.dot(&(q * x)) - 1.0).collect()
    }

    fn max_violation(&self, x: &DVector<f64>) -> f64 {
        self.residuals(x).iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Augmented Lagrangian value and gradient.
    fn lagrangian(&self, x: &DVector<f64>, lambda: &[f64], rho: f64) -> (f64, DVector<f64>) {
        let mut value = x.norm_squared();
        let mut grad = 2.0 * x;
        for (q, l) in self.q.iter().zip(lambda) {
            let qx = q * x;
            let r = x.dot(&qx) - 1.0;
            value += l * r + 0.5 * rho * r * r;
            grad.axpy(2.0 * (l + rho * r), &qx, 1.0);
        }
        (value, grad)
    }

    fn descend(&self, x: &mut DVector<f64>, lambda: &[f64], rho: f64, budget: usize) {
        let mut step = 1.0;
        for _ in 0..budget {
            let (value, grad) = self.lagrangian(x, lambda, rho);
            let g2 = grad.norm_squared();
            if g2 < 1e-24 {
                break;
            }
            loop {
                let trial = &*x - step * &grad;
                let (tv, _) = self.lagrangian(&trial, lambda, rho);
                if tv <= value - 1e-4 * step * g2 {
                    *x = trial;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
                if step < 1e-18 {
                    return;
                }
            }
        }
    }

    /// KKT residual `(∇_x L, r)` with `L = ‖x‖² + Σ λ_i r_i`.
    fn kkt_residual(
        &self,
        x: &DVector<f64>,
        l: &DVector<f64>,
    ) -> (DVector<f64>, Vec<DVector<f64>>) {
        let n = self.n;
        let m = self.q.len();
        let qx: Vec<DVector<f64>> = self.q.iter().map(|q| q * x).collect();
        let mut res = DVector::<f64>::zeros(n + m);
        let mut grad = 2.0 * x;
        for i in 0..m {
            grad.axpy(2.0 * l[i], &qx[i], 1.0);
            res[n + i] = x.dot(&qx[i]) - 1.0;
        }
        res.rows_mut(0, n).copy_from(&grad);
        (res, qx)
    }

    /// Damped Newton iterations on the KKT system. Returns `None` if the
    /// iteration broke down.
    fn polish(&self, x: &DVector<f64>, lambda: &[f64]) -> Option<DVector<f64>> {
        let n = self.n;
        let m = self.q.len();
        let mut x = x.clone();
        let mut l = DVector::from_column_slice(lambda);
        let (mut res, mut qx) = self.kkt_residual(&x, &l);
        for _ in 0..100 {
            if res.norm() < 1e-14 * (1.0 + x.norm_squared()) {
                break;
            }
            let mut kkt = DMatrix::<f64>::zeros(n + m, n + m);
            for k in 0..n {
                kkt[(k, k)] = 2.0;
            }
            for i in 0..m {
                let mut block = kkt.view_mut((0, 0), (n, n));
                block += 2.0 * l[i] * &self.q[i];
                for k in 0..n {
                    kkt[(k, n + i)] = 2.0 * qx[i][k];
                    kkt[(n + i, k)] = 2.0 * qx[i][k];
                }
            }
            let d = kkt.lu().solve(&(-&res))?;
            let mut t = 1.0;
            loop {
                let xt = &x + t * d.rows(0, n);
                let lt = &l + t * d.rows(n, m);
                let (rt, qt) = self.kkt_residual(&xt, &lt);
                if rt.norm() < (1.0 - 1e-4 * t) * res.norm() {
                    x = xt;
                    l = lt;
                    res = rt;
                    qx = qt;
                    break;
                }
                t *= 0.5;
                if t < 1e-10 {
                    return Some(x);
                }
            }
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

struct StartResult {
    x: DVector<f64>,
    power: f64,
    violation: f64,
}

fn run_start(sc: &Scaled, opts: &OracleOptions, index: usize) -> StartResult {
    let mut rng = realization_rng(opts.seed, index as u64);
    let spread = 1.0 / (sc.n as f64).sqrt();
    let mut x = DVector::from_fn(sc.n, |_, _| spread * rng.sample::<f64, _>(StandardNormal));
    let mut lambda = vec![0.0; sc.q.len()];
    let mut rho = opts.initial_penalty;
    for _ in 0..opts.rounds {
        sc.descend(&mut x, &lambda, rho, opts.budget);
        for (l, r) in lambda.iter_mut().zip(sc.residuals(&x)) {
            *l += rho * r;
        }
        rho *= 2.0;
    }
    if let Some(p) = sc.polish(&x, &lambda) {
        if sc.max_violation(&p) <= sc.max_violation(&x) {
            x = p;
        }
    }
    StartResult {
        power: sc.scale * x.norm_squared(),
        violation: sc.max_violation(&x),
        x,
    }
}

pub fn oracle_solve(
    scenario: &Scenario,
    opts: &OracleOptions,
) -> Result<OracleResult, OracleError> {
    let ue_dim = scenario.n_ue() * scenario.n_tx();
    if ue_dim > MAX_UE_DIM {
        return Err(OracleError::TooLarge(ue_dim));
    }
    let cm = build_constraint_matrices(scenario, false)?;
    let dim = scenario.n_s() * scenario.n_tx();
    let rows: Vec<_> = cm
        .a1
        .iter()
        .zip(&cm.gamma1)
        .chain(cm.a2.iter().zip(&cm.gamma2))
        .collect();
    if rows.is_empty() {
        return Ok(OracleResult {
            best_f: vec![Complex64::new(0.0, 0.0); dim],
            best_power_mw: 0.0,
            starts_tried: 0,
            feasible_found: true,
            feasible_starts: 0,
            max_violation: 0.0,
        });
    }
    // Power unit: the largest single-constraint minimum, so that x is O(1).
    let mut scale: f64 = 0.0;
    for (a, g) in &rows {
        let top = eig_hermitian(a)?.values[0];
        if top > 0.0 {
            scale = scale.max(**g / top);
        }
    }
    if !(scale > 0.0) {
        scale = 1.0;
    }
    let sc = Scaled {
        q: rows
            .iter()
            .map(|(a, g)| real_embed(a) * (scale / **g))
            .collect(),
        scale,
        n: 2 * dim,
    };

    let results: Vec<StartResult> = (0..opts.n_starts)
        .into_par_iter()
        .map(|i| run_start(&sc, opts, i))
        .collect();

    let feasible_starts = results
        .iter()
        .filter(|r| r.violation <= opts.feas_tol)
        .count();
    let mut best: Option<&StartResult> = None;
    for r in results.iter().filter(|r| r.violation <= opts.feas_tol) {
        if best.map_or(true, |b| r.power < b.power) {
            best = Some(r);
        }
    }
    let (best_f, best_power_mw, max_violation) = match best {
        Some(r) => {
            let s = scale.sqrt();
            let f = (0..dim)
                .map(|k| Complex64::new(r.x[k], r.x[dim + k]) * s)
                .collect();
            (f, r.power, r.violation)
        }
        None => (
            vec![Complex64::new(0.0, 0.0); dim],
            f64::INFINITY,
            f64::INFINITY,
        ),
    };
    Ok(OracleResult {
        best_f,
        best_power_mw,
        starts_tried: opts.n_starts,
        feasible_found: best.is_some(),
        feasible_starts,
        max_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ArrayGeometry, Terminal, TerminalKind};
    use crate::linalg::vec_norm;

    const NOISE: f64 = 7.943282347242822e-11;
    const EAVES: f64 = 7.943282347242822e-9;

    fn terminal(kind: TerminalKind, aod: f64, range: f64) -> Terminal {
        Terminal {
            kind,
            range_m: range,
            aod_deg: aod,
            phase_rad: 0.4,
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

    #[test]
    fn single_user_closed_form() {
        let sc = scenario(4, &[(25.0, 64.0)], &[]);
        let r = oracle_solve(&sc, &OracleOptions::default()).unwrap();
        assert!(r.feasible_found);
        let want = NOISE * 127.0 / vec_norm(&sc.ue_channel(0)).powi(2);
        assert!((r.best_power_mw / want - 1.0).abs() < 5e-3);
    }

    #[test]
    fn colocated_ue_and_uav_is_infeasible() {
        // The UAV sees exactly what the UE sees, and the jamming target caps
        // the UE's received power far below what its rate needs.
        let sc = scenario(4, &[(10.0, 70.0)], &[(10.0, 70.0)]);
        let r = oracle_solve(&sc, &OracleOptions::default()).unwrap();
        assert!(!r.feasible_found);
        assert_eq!(r.feasible_starts, 0);
    }

    #[test]
    fn deterministic() {
        let sc = scenario(4, &[(25.0, 64.0)], &[(-30.0, 80.0)]);
        let opts = OracleOptions {
            n_starts: 8,
            ..Default::default()
        };
        assert_eq!(
            oracle_solve(&sc, &opts).unwrap(),
            oracle_solve(&sc, &opts).unwrap()
        );
    }

    #[test]
    fn rejects_large_instances() {
        let sc = scenario(16, &[(25.0, 64.0)], &[]);
        assert_eq!(
            oracle_solve(&sc, &OracleOptions::default()).unwrap_err(),
            OracleError::TooLarge(16)
        );
    }
}
