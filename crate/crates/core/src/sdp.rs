//! Primal-dual interior-point solver for complex semidefinite programs.
//!
//! Solves
//!
//! ```text
//!   minimize    Re tr(C X)
//!   subject to  Re tr(A_i X) = b_i          (equalities)
//!               Re tr(A_j X) >= or <= b_j    (inequalities)
//!               X Hermitian, X ⪰ 0
//! ```
//!
//! The complex problem is mapped to a real one through the embedding
//! `[[Re, -Im], [Im, Re]]`; inequalities get nonnegative slack variables,
//! giving a real SDP over `S^{2n}_+ × R^p_+`. Iterations follow the
//! infeasible Mehrotra predictor-corrector scheme with the HKM search
//! direction and a dense Schur complement factored by Cholesky.
//!
//! All objective, constraint and residual values visible to callers are in
//! complex-domain units: the factor two picked up by the embedding is removed
//! at the boundary.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{real_embed, real_unembed, HermitianMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Ge,
    Le,
}

/// A complex SDP in the form accepted by [`solve`].
#[derive(Debug, Clone)]
pub struct SdpSpec {
    pub dim: usize,
    pub objective: HermitianMatrix,
    pub eq_constraints: Vec<(HermitianMatrix, f64)>,
    pub ineq_constraints: Vec<(HermitianMatrix, f64, Sense)>,
}

impl SdpSpec {
    /// `min tr(X)` over `dim x dim` matrices with no constraints yet.
    pub fn min_trace(dim: usize) -> Self {
        Self {
            dim,
            objective: HermitianMatrix::identity(dim),
            eq_constraints: Vec::new(),
            ineq_constraints: Vec::new(),
        }
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_constraints.len() + self.ineq_constraints.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Relative primal/dual infeasibility accepted as optimal.
    pub feas_tol: f64,
    /// Relative duality gap accepted as optimal.
    pub gap_tol: f64,
    /// When the strict tolerances cannot be met (typically because the
    /// feasible set has no interior), the best iterate is still returned as
    /// [`SolveStatus::NearOptimal`] if all its relative measures are below
    /// this value.
    pub near_tol: f64,
    pub max_iter: usize,
    /// Log one line per iteration through the `log` crate at info level.
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            near_tol: 1e-5,
            max_iter: 200,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    /// Best iterate meets `near_tol` but not the strict tolerances.
    NearOptimal,
    /// A Farkas certificate for primal infeasibility was found.
    Infeasible,
    MaxIter,
    NumericalFailure,
}

impl SolveStatus {
    /// Whether `x` can be used as a solution.
    pub fn is_solved(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near_optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative residuals measured on the internally normalised problem.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl Residuals {
    fn worst(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationLog {
    pub iter: usize,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub residuals: Residuals,
    pub mu: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

impl fmt::Display for IterationLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:3} pobj {:+.8e} dobj {:+.8e} gap {:.2e} pinf {:.2e} dinf {:.2e} mu {:.2e} step {:.3}/{:.3}",
            self.iter,
            self.primal_obj,
            self.dual_obj,
            self.residuals.gap,
            self.residuals.primal,
            self.residuals.dual,
            self.mu,
            self.step_primal,
            self.step_dual
        )
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: HermitianMatrix,
    /// Dual multipliers, equalities first then inequalities, in input order.
    pub y: Vec<f64>,
    pub status: SolveStatus,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    /// Normalised Farkas ray (`bᵀy = 1`) when `status == Infeasible`.
    pub certificate: Option<Vec<f64>>,
    /// Residual of the certificate: how far `-A*y` is from the dual cone.
    pub certificate_residual: Option<f64>,
    pub log: Vec<IterationLog>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error("problem dimension must be at least 1")]
    EmptyDimension,
    #[error("problem has no constraints")]
    NoConstraints,
    #[error("constraint {index} has side {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("non-finite value in constraint {index}")]
    NonFinite { index: usize },
}

/// Real, normalised form of an [`SdpSpec`].
struct RealProblem {
    n: usize,
    c: DMatrix<f64>,
    a: Vec<DMatrix<f64>>,
    b: DVector<f64>,
    /// `(constraint row, sign)` for every slack variable.
    slacks: Vec<(usize, f64)>,
    row_scale: Vec<f64>,
    obj_scale: f64,
    rhs_scale: f64,
}

impl RealProblem {
    fn new(spec: &SdpSpec) -> Self {
        let c_raw = real_embed(&spec.objective);
        let c_norm = c_raw.norm();
        let obj_scale = if c_norm > 0.0 { 1.0 / c_norm } else { 1.0 };
        let c = c_raw * obj_scale;

        let mut a = Vec::with_capacity(spec.num_constraints());
        let mut b_raw = Vec::with_capacity(spec.num_constraints());
        let mut row_scale = Vec::with_capacity(spec.num_constraints());
        let mut slacks = Vec::new();
        let mut push = |m: &HermitianMatrix, rhs: f64| {
            let t = real_embed(m);
            let nrm = t.norm();
            let s = if nrm > 0.0 { 1.0 / nrm } else { 1.0 };
            a.push(t * s);
            b_raw.push(2.0 * rhs * s);
            row_scale.push(s);
        };
        for (m, rhs) in &spec.eq_constraints {
            push(m, *rhs);
        }
        let n_eq = spec.eq_constraints.len();
        for (k, (m, rhs, sense)) in spec.ineq_constraints.iter().enumerate() {
            push(m, *rhs);
            let sign = match sense {
                Sense::Ge => -1.0,
                Sense::Le => 1.0,
            };
            slacks.push((n_eq + k, sign));
        }
        let bmax = b_raw.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let rhs_scale = if bmax > 0.0 { bmax } else { 1.0 };
        let b = DVector::from_iterator(b_raw.len(), b_raw.iter().map(|v| v / rhs_scale));
        Self {
            n: 2 * spec.dim,
            c,
            a,
            b,
            slacks,
            row_scale,
            obj_scale,
            rhs_scale,
        }
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    /// `A(X) + A_l s`.
    fn apply(&self, x: &DMatrix<f64>, s: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::from_iterator(self.m(), self.a.iter().map(|ai| ai.dot(x)));
        for (l, &(row, sign)) in self.slacks.iter().enumerate() {
            out[row] += sign * s[l];
        }
        out
    }

    /// `Σ y_i A_i`.
    fn adjoint_psd(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (ai, &yi) in self.a.iter().zip(y.iter()) {
            if yi != 0.0 {
                out.zip_apply(ai, |o, a| *o += yi * a);
            }
        }
        out
    }

    /// `A_lᵀ y`.
    fn adjoint_lp(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.slacks.len(),
            self.slacks.iter().map(|&(row, sign)| sign * y[row]),
        )
    }

    /// Converts a real objective value back to complex-domain units.
    fn unscale_obj(&self, v: f64) -> f64 {
        v * self.rhs_scale / (2.0 * self.obj_scale)
    }
}

#[derive(Clone)]
struct Iterate {
    x: DMatrix<f64>,
    s: DVector<f64>,
    y: DVector<f64>,
    z: DMatrix<f64>,
    zs: DVector<f64>,
}

struct Direction {
    dx: DMatrix<f64>,
    ds: DVector<f64>,
    dy: DVector<f64>,
    dz: DMatrix<f64>,
    dzs: DVector<f64>,
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest step in `[0, ∞)` keeping `x + α dx` positive definite, given the
/// Cholesky factor of `x`. Returns `f64::INFINITY` when unbounded.
fn max_step_psd(chol_l: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let l_inv = chol_l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(chol_l.nrows(), chol_l.nrows()))?;
    let m = &l_inv * dx * l_inv.transpose();
    let m = symmetrize(&m);
    let lmin = m
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Some(if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    })
}

fn max_step_lp(s: &DVector<f64>, ds: &DVector<f64>) -> f64 {
    s.iter()
        .zip(ds.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

fn cholesky_lower(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    nalgebra::Cholesky::new(m.clone()).map(|c| c.l())
}

struct Workspace<'a> {
    prob: &'a RealProblem,
    /// Inverse of the dual slack matrix.
    z_inv: DMatrix<f64>,
    schur: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl<'a> Workspace<'a> {
    fn new(prob: &'a RealProblem, it: &Iterate) -> Option<Self> {
        let n = prob.n;
        let m = prob.m();
        let lz = cholesky_lower(&it.z)?;
        let lz_inv = lz.solve_lower_triangular(&DMatrix::identity(n, n))?;
        let z_inv = lz_inv.transpose() * &lz_inv;
        let lx = cholesky_lower(&it.x)?;
        // M_ij = tr(A_i X A_j Z⁻¹) = <L_z⁻¹ A_i L_x, L_z⁻¹ A_j L_x>.
        let b: Vec<DMatrix<f64>> = prob.a.iter().map(|ai| &lz_inv * ai * &lx).collect();
        let mut schur = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = b[i].dot(&b[j]);
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        for (l, &(row, _)) in prob.slacks.iter().enumerate() {
            schur[(row, row)] += it.s[l] / it.zs[l];
        }
        let schur = Self::factor(schur)?;
        Some(Self { prob, z_inv, schur })
    }

    fn factor(mut schur: DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
        if let Some(c) = nalgebra::Cholesky::new(schur.clone()) {
            return Some(c);
        }
        let dmax = schur
            .diagonal()
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max)
            .max(1e-300);
        let mut reg = 1e-14 * dmax;
        for _ in 0..8 {
            for i in 0..schur.nrows() {
                schur[(i, i)] += reg;
            }
            if let Some(c) = nalgebra::Cholesky::new(schur.clone()) {
                return Some(c);
            }
            reg *= 100.0;
        }
        None
    }

    /// Solves the Newton system for complementarity targets `h` (PSD block)
    /// and `h_lp` (slack block), where `ΔX = h - X ΔZ Z⁻¹`.
    fn direction(
        &self,
        it: &Iterate,
        r_p: &DVector<f64>,
        r_d: &DMatrix<f64>,
        r_dl: &DVector<f64>,
        h: &DMatrix<f64>,
        h_lp: &DVector<f64>,
    ) -> Direction {
        let prob = self.prob;
        let xrw = &it.x * r_d * &self.z_inv;
        let mut rhs = r_p.clone();
        for (i, ai) in prob.a.iter().enumerate() {
            rhs[i] += ai.dot(&xrw) - ai.dot(h);
        }
        for (l, &(row, sign)) in prob.slacks.iter().enumerate() {
            rhs[row] += sign * (it.s[l] * r_dl[l] / it.zs[l] - h_lp[l]);
        }
        let dy = self.schur.solve(&rhs);
        let dz = r_d - prob.adjoint_psd(&dy);
        let dx = symmetrize(&(h - &it.x * &dz * &self.z_inv));
        let dzs = r_dl - prob.adjoint_lp(&dy);
        let ds = DVector::from_iterator(
            dzs.len(),
            (0..dzs.len()).map(|l| h_lp[l] - it.s[l] * dzs[l] / it.zs[l]),
        );
        Direction {
            dx,
            ds,
            dy,
            dz,
            dzs,
        }
    }
}

struct Measures {
    residuals: Residuals,
    pobj: f64,
    dobj: f64,
    r_p: DVector<f64>,
    r_d: DMatrix<f64>,
    r_dl: DVector<f64>,
}

fn measure(prob: &RealProblem, it: &Iterate) -> Measures {
    let r_p = &prob.b - prob.apply(&it.x, &it.s);
    let r_d = &prob.c - prob.adjoint_psd(&it.y) - &it.z;
    let r_dl = -prob.adjoint_lp(&it.y) - &it.zs;
    let pobj = prob.c.dot(&it.x);
    let dobj = prob.b.dot(&it.y);
    let residuals = Residuals {
        primal: r_p.norm() / (1.0 + prob.b.norm()),
        dual: (r_d.norm_squared() + r_dl.norm_squared()).sqrt() / (1.0 + prob.c.norm()),
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
    };
    Measures {
        residuals,
        pobj,
        dobj,
        r_p,
        r_d,
        r_dl,
    }
}

/// Checks whether the current dual iterate is a Farkas ray proving primal
/// infeasibility. Returns the normalised ray and its residual.
fn infeasibility_certificate(
    prob: &RealProblem,
    y: &DVector<f64>,
    tol: f64,
) -> Option<(DVector<f64>, f64)> {
    let by = prob.b.dot(y);
    if !(by > 0.0) {
        return None;
    }
    let yhat = y / by;
    let aty = prob.adjoint_psd(&yhat);
    let lmax = aty
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let lp_violation: f64 = prob.adjoint_lp(&yhat).iter().map(|v| v.max(0.0)).sum();
    let residual = lmax.max(0.0) + lp_violation;
    if residual <= tol * (1.0 + aty.norm()) {
        Some((yhat, residual))
    } else {
        None
    }
}

/// Solves the SDP. Solver-level outcomes (infeasible, iteration cap,
/// numerical breakdown) are reported through [`SdpSolution::status`];
/// malformed input is an error.
pub fn solve(spec: &SdpSpec, opts: &SolverOptions) -> Result<SdpSolution, SdpError> {
    validate(spec)?;
    let prob = RealProblem::new(spec);
    let n = prob.n;
    let m = prob.m();
    let p = prob.slacks.len();
    let nu = (n + p) as f64;

    // Starting point after SDPT3's infeasible-start heuristic.
    let bmax = prob
        .b
        .iter()
        .fold(0.0_f64, |acc, v| acc.max((1.0 + v.abs()) / 2.0));
    let xi = 10.0_f64.max((n as f64).sqrt()).max(n as f64 * bmax);
    let zeta = 10.0_f64.max((n as f64).sqrt()).max(prob.c.norm());
    let mut it = Iterate {
        x: DMatrix::identity(n, n) * xi,
        s: DVector::from_element(p, xi),
        y: DVector::zeros(m),
        z: DMatrix::identity(n, n) * zeta,
        zs: DVector::from_element(p, zeta),
    };

    let mut log = Vec::new();
    let mut best: Option<(f64, Iterate, Measures)> = None;
    let mut status;
    let mut certificate = None;
    let mut iterations = 0;
    let mut last_steps = (1.0_f64, 1.0_f64);
    let mut stall = 0usize;

    loop {
        let meas = measure(&prob, &it);
        let mu = (prob_dot_psd(&it.x, &it.z) + it.s.dot(&it.zs)) / nu;
        let entry = IterationLog {
            iter: iterations,
            primal_obj: prob.unscale_obj(meas.pobj),
            dual_obj: prob.unscale_obj(meas.dobj),
            residuals: meas.residuals,
            mu,
            step_primal: last_steps.0,
            step_dual: last_steps.1,
        };
        if opts.verbose {
            log::info!("{entry}");
        }
        log.push(entry);

        if !meas.pobj.is_finite() || !meas.dobj.is_finite() || !mu.is_finite() {
            status = SolveStatus::NumericalFailure;
            break;
        }

        let worst = meas.residuals.worst();
        let improved = best.as_ref().map_or(true, |(w, _, _)| worst < *w);
        if improved {
            if best.as_ref().map_or(false, |(w, _, _)| worst > 0.9 * *w) {
                stall += 1;
            } else {
                stall = 0;
            }
            best = Some((worst, it.clone(), meas_clone(&meas)));
        } else {
            stall += 1;
        }

        if meas.residuals.primal <= opts.feas_tol
            && meas.residuals.dual <= opts.feas_tol
            && meas.residuals.gap <= opts.gap_tol
        {
            status = SolveStatus::Optimal;
            break;
        }
        if let Some((ray, res)) = infeasibility_certificate(&prob, &it.y, opts.feas_tol) {
            status = SolveStatus::Infeasible;
            certificate = Some((ray, res));
            break;
        }
        if iterations >= opts.max_iter {
            status = SolveStatus::MaxIter;
            break;
        }
        if stall >= 30 {
            status = SolveStatus::MaxIter;
            break;
        }

        let ws = match Workspace::new(&prob, &it) {
            Some(ws) => ws,
            None => {
                status = SolveStatus::NumericalFailure;
                break;
            }
        };
        let Some(lx) = cholesky_lower(&it.x) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let Some(lz) = cholesky_lower(&it.z) else {
            status = SolveStatus::NumericalFailure;
            break;
        };

        // Predictor.
        let h_aff = -&it.x;
        let hl_aff = -&it.s;
        let aff = ws.direction(&it, &meas.r_p, &meas.r_d, &meas.r_dl, &h_aff, &hl_aff);
        let (Some(ap_psd), Some(ad_psd)) = (max_step_psd(&lx, &aff.dx), max_step_psd(&lz, &aff.dz))
        else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let ap = 1.0_f64.min(ap_psd).min(max_step_lp(&it.s, &aff.ds));
        let ad = 1.0_f64.min(ad_psd).min(max_step_lp(&it.zs, &aff.dzs));
        let x_aff = &it.x + &aff.dx * ap;
        let z_aff = &it.z + &aff.dz * ad;
        let s_aff = &it.s + &aff.ds * ap;
        let zs_aff = &it.zs + &aff.dzs * ad;
        let mu_aff = (prob_dot_psd(&x_aff, &z_aff) + s_aff.dot(&zs_aff)) / nu;
        let expon = 1.0_f64.max(3.0 * ap.min(ad).powi(2));
        let sigma = (mu_aff / mu).max(0.0).powf(expon).min(1.0);

        // Corrector.
        let target = sigma * mu;
        let h = &ws.z_inv * target - &it.x - &aff.dx * &aff.dz * &ws.z_inv;
        let h_lp = DVector::from_iterator(
            p,
            (0..p).map(|l| target / it.zs[l] - it.s[l] - aff.ds[l] * aff.dzs[l] / it.zs[l]),
        );
        let dir = ws.direction(&it, &meas.r_p, &meas.r_d, &meas.r_dl, &h, &h_lp);
        let (Some(ap_psd), Some(ad_psd)) = (max_step_psd(&lx, &dir.dx), max_step_psd(&lz, &dir.dz))
        else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let gamma = 0.9 + 0.09 * last_steps.0.min(last_steps.1);
        let ap = 1.0_f64.min(gamma * ap_psd.min(max_step_lp(&it.s, &dir.ds)));
        let ad = 1.0_f64.min(gamma * ad_psd.min(max_step_lp(&it.zs, &dir.dzs)));

        it.x = symmetrize(&(&it.x + &dir.dx * ap));
        it.s += &dir.ds * ap;
        it.y += &dir.dy * ad;
        it.z = symmetrize(&(&it.z + &dir.dz * ad));
        it.zs += &dir.dzs * ad;
        last_steps = (ap, ad);
        iterations += 1;

        if ap < 1e-10 && ad < 1e-10 {
            status = SolveStatus::MaxIter;
            break;
        }
    }

    // Fall back to the best iterate seen when the last one is not acceptable.
    let (final_it, final_meas) = match status {
        SolveStatus::Optimal | SolveStatus::Infeasible => {
            let meas = measure(&prob, &it);
            (it, meas)
        }
        _ => {
            let (worst, bit, bmeas) = best.expect("at least one iterate measured");
            if worst <= opts.near_tol {
                status = SolveStatus::NearOptimal;
            }
            (bit, bmeas)
        }
    };

    let x_real = &final_it.x * prob.rhs_scale;
    let x = real_unembed(&x_real);
    let y = final_it
        .y
        .iter()
        .zip(&prob.row_scale)
        .map(|(yi, ri)| yi * ri / prob.obj_scale)
        .collect();
    let (certificate, certificate_residual) = match certificate {
        Some((ray, res)) => {
            // Rescale the ray to complex units, keeping bᵀy = 1.
            let raw: Vec<f64> = ray
                .iter()
                .zip(&prob.row_scale)
                .map(|(v, r)| v * r)
                .collect();
            let by: f64 = raw
                .iter()
                .zip(
                    spec.eq_constraints
                        .iter()
                        .map(|c| c.1)
                        .chain(spec.ineq_constraints.iter().map(|c| c.1)),
                )
                .map(|(v, b)| v * b)
                .sum();
            let raw = if by > 0.0 {
                raw.iter().map(|v| v / by).collect()
            } else {
                raw
            };
            (Some(raw), Some(res))
        }
        None => (None, None),
    };
    Ok(SdpSolution {
        x,
        y,
        status,
        primal_obj: prob.unscale_obj(final_meas.pobj),
        dual_obj: prob.unscale_obj(final_meas.dobj),
        residuals: final_meas.residuals,
        iterations,
        certificate,
        certificate_residual,
        log,
    })
}

fn prob_dot_psd(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

fn meas_clone(m: &Measures) -> Measures {
    Measures {
        residuals: m.residuals,
        pobj: m.pobj,
        dobj: m.dobj,
        r_p: m.r_p.clone(),
        r_d: m.r_d.clone(),
        r_dl: m.r_dl.clone(),
    }
}

fn validate(spec: &SdpSpec) -> Result<(), SdpError> {
    if spec.dim == 0 {
        return Err(SdpError::EmptyDimension);
    }
    if spec.num_constraints() == 0 {
        return Err(SdpError::NoConstraints);
    }
    if spec.objective.dim() != spec.dim {
        return Err(SdpError::DimensionMismatch {
            index: usize::MAX,
            found: spec.objective.dim(),
            expected: spec.dim,
        });
    }
    let mats = spec
        .eq_constraints
        .iter()
        .map(|(a, b)| (a, *b))
        .chain(spec.ineq_constraints.iter().map(|(a, b, _)| (a, *b)));
    for (index, (a, b)) in mats.enumerate() {
        if a.dim() != spec.dim {
            return Err(SdpError::DimensionMismatch {
                index,
                found: a.dim(),
                expected: spec.dim,
            });
        }
        if !b.is_finite() {
            return Err(SdpError::NonFinite { index });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn trace_equals_one() {
        let mut spec = SdpSpec::min_trace(2);
        spec.eq_constraints
            .push((HermitianMatrix::identity(2), 1.0));
        let sol = solve(&spec, &opts()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_obj - 1.0).abs() < 1e-7, "{}", sol.primal_obj);
        assert!((sol.dual_obj - 1.0).abs() < 1e-7);
    }

    #[test]
    fn mass_goes_to_largest_eigenvalue() {
        let mut spec = SdpSpec::min_trace(2);
        spec.ineq_constraints
            .push((HermitianMatrix::from_diagonal(&[2.0, 1.0]), 2.0, Sense::Ge));
        let sol = solve(&spec, &opts()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_obj - 1.0).abs() < 1e-7);
        assert!((sol.x[(0, 0)].re - 1.0).abs() < 1e-6);
        assert!(sol.x[(1, 1)].re.abs() < 1e-6);
    }

    #[test]
    fn negative_definite_constraint_is_infeasible() {
        let mut spec = SdpSpec::min_trace(2);
        spec.ineq_constraints.push((
            HermitianMatrix::from_diagonal(&[-1.0, -1.0]),
            1.0,
            Sense::Ge,
        ));
        let sol = solve(&spec, &opts()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
        let ray = sol.certificate.unwrap();
        // b·y = 1 and -y·A ⪰ 0 with A = -I, so y must be positive.
        assert!((ray[0] - 1.0).abs() < 1e-9);
        assert!(sol.certificate_residual.unwrap() <= 1e-8);
    }

    #[test]
    fn rejects_malformed_specs() {
        let spec = SdpSpec::min_trace(2);
        assert_eq!(solve(&spec, &opts()).unwrap_err(), SdpError::NoConstraints);
        let mut spec = SdpSpec::min_trace(2);
        spec.eq_constraints
            .push((HermitianMatrix::identity(3), 1.0));
        assert!(matches!(
            solve(&spec, &opts()).unwrap_err(),
            SdpError::DimensionMismatch { .. }
        ));
        assert_eq!(
            solve(&SdpSpec::min_trace(0), &opts()).unwrap_err(),
            SdpError::EmptyDimension
        );
    }

    #[test]
    fn badly_scaled_data() {
        // Same as the eigenvalue fixture with data around 1e-9.
        let mut spec = SdpSpec::min_trace(2);
        spec.ineq_constraints.push((
            HermitianMatrix::from_diagonal(&[2e-9, 1e-9]),
            2e-11,
            Sense::Ge,
        ));
        let sol = solve(&spec, &opts()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_obj - 1e-2).abs() < 1e-9);
    }

    #[test]
    fn complex_constraint() {
        // min tr X s.t. Re tr([[0,-i],[i,0]] X) = 1: optimum 1 at the +1 eigenvector.
        use crate::linalg::ComplexMatrix;
        use num_complex::Complex64 as C;
        let a = HermitianMatrix::new(ComplexMatrix::from_rows(&[
            vec![C::new(0.0, 0.0), C::new(0.0, -1.0)],
            vec![C::new(0.0, 1.0), C::new(0.0, 0.0)],
        ]))
        .unwrap();
        let mut spec = SdpSpec::min_trace(2);
        spec.eq_constraints.push((a, 1.0));
        let sol = solve(&spec, &opts()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_obj - 1.0).abs() < 1e-7);
        assert!((sol.x[(1, 0)] - C::new(0.0, 0.5)).norm() < 1e-6);
    }
}
