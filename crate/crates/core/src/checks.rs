//! Randomised structural checks of the relaxation, run by `jcj check`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{realization_rng, sample_scenario_seeded, ScenarioConfig};
use crate::linalg::{eig_hermitian, HermitianMatrix};
use crate::problem::{build_problem, ProblemOptions};
use crate::sdp::{solve, SolveStatus, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    /// Fraction of cases that must pass.
    pub required: f64,
    pub detail: String,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.total > 0 && self.passed as f64 >= self.required * self.total as f64
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {}/{} (need {:.0}%) {}",
            if self.ok() { "PASS" } else { "FAIL" },
            self.name,
            self.passed,
            self.total,
            100.0 * self.required,
            self.detail
        )
    }
}

fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// `Re Σ_i a_i conj(a_{(i+k) mod K})`, i.e. `Re tr(aaᴴP_k)`.
pub fn cyclic_correlation(a: &[Complex64], k: usize) -> f64 {
    let n = a.len();
    (0..n).map(|i| (a[i] * a[(i + k) % n].conj()).re).sum()
}

/// `Re tr(aaᴴ) >= Re tr(aaᴴP_k)` for random `a` and every shift.
pub fn cyclic_correlation_bound(samples: usize, seed: u64) -> CheckReport {
    let mut rng = realization_rng(seed, 0);
    let mut passed = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let n = rng.gen_range(2..=64);
        let a = random_vector(&mut rng, n);
        let norm2 = cyclic_correlation(&a, 0);
        let slack = (1..n)
            .map(|k| (norm2 - cyclic_correlation(&a, k)) / norm2)
            .fold(f64::INFINITY, f64::min);
        worst = worst.min(slack);
        if slack >= -1e-9 {
            passed += 1;
        }
    }
    CheckReport {
        name: "cyclic correlation bound",
        passed,
        total: samples,
        required: 1.0,
        detail: format!("worst relative slack {worst:.3e}"),
    }
}

/// Shifts `k` and `K-k` give the same real trace against a Hermitian matrix.
pub fn conjugate_shift_symmetry(samples: usize, seed: u64) -> CheckReport {
    let mut rng = realization_rng(seed, 1);
    let mut passed = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.gen_range(2..=16);
        let mut h = HermitianMatrix::zeros(n);
        for _ in 0..3 {
            h.add_outer(rng.gen_range(-1.0..1.0), &random_vector(&mut rng, n));
        }
        let m = h.matrix();
        let shift = |k: usize| -> f64 { (0..n).map(|i| m[((i + k) % n, i)].re).sum() };
        let scale = 1.0 + h.frobenius_norm();
        let dev = (1..n)
            .map(|k| (shift(k) - shift(n - k)).abs() / scale)
            .fold(0.0, f64::max);
        worst = worst.max(dev);
        if dev <= 1e-12 {
            passed += 1;
        }
    }
    CheckReport {
        name: "conjugate shift symmetry",
        passed,
        total: samples,
        required: 1.0,
        detail: format!("worst relative deviation {worst:.3e}"),
    }
}

/// Block structure of a full-size solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMass {
    /// Frobenius norm of the off-block-diagonal part over the trace.
    pub off_diagonal: f64,
    /// Frobenius norm of the UAV diagonal blocks over the trace.
    pub uav_blocks: f64,
    /// `λ_2 / λ_1`.
    pub second_eigenvalue_ratio: f64,
}

pub fn block_mass(x: &HermitianMatrix, n_tx: usize, n_ue: usize) -> BlockMass {
    let m = x.matrix();
    let n = x.dim();
    let mut off = 0.0;
    let mut uav = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)].norm_sqr();
            let (bi, bj) = (i / n_tx, j / n_tx);
            if bi != bj {
                off += v;
            } else if bi >= n_ue {
                uav += v;
            }
        }
    }
    let tr = x.trace();
    let ratio = eig_hermitian(x)
        .map(|e| e.values.get(1).copied().unwrap_or(0.0) / e.values[0])
        .unwrap_or(f64::NAN);
    BlockMass {
        off_diagonal: off.sqrt() / tr,
        uav_blocks: uav.sqrt() / tr,
        second_eigenvalue_ratio: ratio,
    }
}

/// Tiny configuration used by the structure checks.
pub fn tiny_config() -> ScenarioConfig {
    ScenarioConfig {
        n_tx: 4,
        n_ue: 2,
        n_uav: 1,
        ..Default::default()
    }
}

/// Full-size relaxation solves on tiny instances: block-diagonal solutions
/// with empty UAV blocks, and rank above one when two UEs are served.
pub fn relaxation_structure(instances: usize, seed: u64) -> (CheckReport, CheckReport) {
    let cfg = tiny_config();
    let mut block_ok = 0;
    let mut rank_ok = 0;
    let mut solved = 0;
    for i in 0..instances as u64 {
        let Ok(sc) = sample_scenario_seeded(&cfg, seed, i) else {
            continue;
        };
        let Ok(p) = build_problem(&sc, &ProblemOptions::relaxation(false)) else {
            continue;
        };
        let Ok(sol) = solve(&p.to_sdp(), &SolverOptions::default()) else {
            continue;
        };
        if sol.status != SolveStatus::Optimal {
            continue;
        }
        solved += 1;
        let bm = block_mass(&sol.x, cfg.n_tx, cfg.n_ue);
        if bm.off_diagonal <= 1e-5 && bm.uav_blocks <= 1e-5 {
            block_ok += 1;
        }
        if bm.second_eigenvalue_ratio >= 0.01 {
            rank_ok += 1;
        }
    }
    (
        CheckReport {
            name: "relaxation is block diagonal",
            passed: block_ok,
            total: instances,
            required: 0.95,
            detail: format!("{solved} solved"),
        },
        CheckReport {
            name: "relaxation rank exceeds one",
            passed: rank_ok,
            total: instances,
            required: 0.9,
            detail: format!("{solved} solved"),
        },
    )
}

/// Full-size η-constrained solves leave the jamming blocks empty.
pub fn jamming_blocks_vanish(instances: usize, seed: u64) -> CheckReport {
    let cfg = tiny_config();
    let mut ok = 0;
    let mut solved = 0;
    let mut worst: f64 = 0.0;
    for i in 0..instances as u64 {
        let Ok(sc) = sample_scenario_seeded(&cfg, seed, i) else {
            continue;
        };
        let opts = ProblemOptions {
            reduced: false,
            equality: true,
            eta: Some(0.05),
        };
        let Ok(p) = build_problem(&sc, &opts) else {
            continue;
        };
        let Ok(sol) = solve(&p.to_sdp(), &SolverOptions::default()) else {
            continue;
        };
        if !sol.status.is_solved() {
            continue;
        }
        solved += 1;
        let ue_dim = cfg.n_ue * cfg.n_tx;
        let m = sol.x.matrix();
        let trailing: f64 = (ue_dim..sol.x.dim())
            .flat_map(|i| (0..sol.x.dim()).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt()
            / sol.x.trace();
        worst = worst.max(trailing);
        if trailing <= 1e-6 {
            ok += 1;
        }
    }
    CheckReport {
        name: "jamming streams vanish",
        passed: ok,
        total: solved,
        required: 1.0,
        detail: format!("worst trailing mass {worst:.3e}"),
    }
}

pub fn run_all(seed: u64) -> Vec<CheckReport> {
    let (blocks, rank) = relaxation_structure(50, seed);
    vec![
        cyclic_correlation_bound(10_000, seed),
        conjugate_shift_symmetry(1_000, seed),
        blocks,
        rank,
        jamming_blocks_vanish(20, seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlation_matches_trace_form() {
        let a = vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.3),
            Complex64::new(0.2, -1.0),
        ];
        let x = HermitianMatrix::outer(&a);
        for k in 0..3 {
            let p = crate::problem::circshift_identity(3, k).unwrap();
            let tr = x.matrix().matmul(&p).unwrap().trace().re;
            assert!((tr - cyclic_correlation(&a, k)).abs() < 1e-12);
        }
    }

    #[test]
    fn block_mass_of_block_diagonal() {
        let x = HermitianMatrix::from_diagonal(&[2.0, 1.0, 0.0, 0.0]);
        let bm = block_mass(&x, 2, 1);
        assert_eq!(bm.off_diagonal, 0.0);
        assert_eq!(bm.uav_blocks, 0.0);
        assert!((bm.second_eigenvalue_ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quick_suites_pass() {
        assert!(cyclic_correlation_bound(200, 3).ok());
        assert!(conjugate_shift_symmetry(50, 3).ok());
        let r = jamming_blocks_vanish(3, 3);
        assert!(r.ok(), "{r}");
    }
}
