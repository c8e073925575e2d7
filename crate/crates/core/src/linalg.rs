//! Dense complex linear algebra.
//!
//! Row-major complex matrices, a Hermitian newtype that keeps the
//! conjugate-symmetry invariant, a cyclic complex Jacobi eigensolver and the
//! real-symmetric embedding used by the conic solver.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative tolerance used when accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_TOL * ||A||_F` count as nonnegative.
pub const PSD_TOL: f64 = 1e-9;

const JACOBI_OFF_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("empty matrix")]
    Empty,
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("index window {start}..{end} out of range for dimension {dim}")]
    BadWindow {
        start: usize,
        end: usize,
        dim: usize,
    },
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols, |i, j| columns[j][i])
    }

    pub fn from_real(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self::from_fn(rows, cols, |i, j| Complex64::new(f(i, j), 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[Complex64]) {
        assert_eq!(values.len(), self.rows);
        for (i, v) in values.iter().enumerate() {
            self[(i, j)] = *v;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `selfᴴ * v`.
    pub fn adjoint_mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self, LinalgError> {
        if self.shape() != rhs.shape() {
            return Err(LinalgError::DimensionMismatch {
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    /// `Σ|a_ij|²`; for a beamformer this is the transmit power.
    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest `|A[i,j] - conj(A[j,i])|`, or infinity for non-square input.
    pub fn hermitian_asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Square complex matrix with `A[i,j] == conj(A[j,i])`.
///
/// Construction checks the asymmetry against [`HERMITIAN_TOL`] (relative to
/// the largest entry, floored at 1) and then stores the exact Hermitian part,
/// so the invariant holds bit-for-bit afterwards.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian{:?}", self.inner)
    }
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, LinalgError> {
        if m.rows != m.cols {
            return Err(LinalgError::NotSquare {
                rows: m.rows,
                cols: m.cols,
            });
        }
        if !m.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let asymmetry = m.hermitian_asymmetry();
        if asymmetry > HERMITIAN_TOL * m.max_abs().max(1.0) {
            return Err(LinalgError::NotHermitian { asymmetry });
        }
        Ok(Self::symmetrized(&m))
    }

    /// Hermitian part `(M + Mᴴ)/2` of an arbitrary square matrix.
    pub fn symmetrized(m: &ComplexMatrix) -> Self {
        assert_eq!(m.rows, m.cols, "symmetrized needs a square matrix");
        let inner = ComplexMatrix::from_fn(m.rows, m.cols, |i, j| {
            if i == j {
                Complex64::new(m[(i, i)].re, 0.0)
            } else {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            }
        });
        Self { inner }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            inner: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: ComplexMatrix::identity(n),
        }
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            inner: ComplexMatrix::from_real(n, n, |i, j| if i == j { values[i] } else { 0.0 }),
        }
    }

    /// `v vᴴ`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::symmetrized(&ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            inner: self.inner.scale(s),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        Ok(Self {
            inner: self.inner.add(&rhs.inner)?,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        Ok(Self {
            inner: self.inner.sub(&rhs.inner)?,
        })
    }

    /// Adds `s * v vᴴ` in place.
    pub fn add_outer(&mut self, s: f64, v: &[Complex64]) {
        assert_eq!(v.len(), self.dim());
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                self.inner[(i, j)] += v[i] * v[j].conj() * s;
            }
        }
        for i in 0..n {
            self.inner[(i, i)].im = 0.0;
        }
    }

    /// Adds `s * v vᴴ` into the diagonal block starting at `offset`.
    pub fn add_outer_at(&mut self, offset: usize, s: f64, v: &[Complex64]) {
        assert!(offset + v.len() <= self.dim());
        for (a, va) in v.iter().enumerate() {
            for (b, vb) in v.iter().enumerate() {
                self.inner[(offset + a, offset + b)] += va * vb.conj() * s;
            }
        }
        for a in 0..v.len() {
            self.inner[(offset + a, offset + a)].im = 0.0;
        }
    }

    /// Principal submatrix on rows and columns `start..end`.
    pub fn principal_submatrix(&self, start: usize, end: usize) -> Result<Self, LinalgError> {
        if start >= end || end > self.dim() {
            return Err(LinalgError::BadWindow {
                start,
                end,
                dim: self.dim(),
            });
        }
        let k = end - start;
        Ok(Self {
            inner: ComplexMatrix::from_fn(k, k, |i, j| self.inner[(start + i, start + j)]),
        })
    }

    /// Quadratic form `vᴴ A v` (real for Hermitian `A`).
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        let av = self.inner.mul_vec(v);
        v.iter().zip(&av).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn is_psd(&self) -> Result<bool, LinalgError> {
        if self.dim() == 0 {
            return Ok(true);
        }
        let eig = eig_hermitian(self)?;
        let floor = -PSD_TOL * self.frobenius_norm();
        Ok(eig.values.iter().all(|&l| l >= floor))
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: ComplexMatrix,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        self.vectors.column(i)
    }

    /// `V diag(values) Vᴴ`.
    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.values.len();
        let mut out = HermitianMatrix::zeros(n);
        for (i, &l) in self.values.iter().enumerate() {
            out.add_outer(l, &self.vector(i));
        }
        out
    }
}

/// Cyclic complex Jacobi eigensolver.
///
/// Each eigenvector is phase-normalised so its largest-magnitude entry is
/// real and positive, which makes the output independent of rotation order
/// for simple eigenvalues.
pub fn eig_hermitian(a: &HermitianMatrix) -> Result<EigenDecomposition, LinalgError> {
    let n = a.dim();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    let mut m = a.inner.clone();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();
    let threshold = JACOBI_OFF_TOL * norm;

    let off_norm = |m: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&m);
        if off <= threshold || norm == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                // Skip rotations that would not change the diagonal in floating point.
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if sweeps > 4
                    && app.abs() + 100.0 * mag == app.abs()
                    && aqq.abs() + 100.0 * mag == aqq.abs()
                {
                    m[(p, q)] = Complex64::new(0.0, 0.0);
                    m[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U on the (p,q) plane: [[c, s], [-s e^{-iφ}, c e^{-iφ}]].
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c + mkq * u_qp;
                    m[(k, q)] = mkp * s + mkq * u_qq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c + mqk * u_qp.conj();
                    m[(q, k)] = mpk * s + mqk * u_qq.conj();
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)].im = 0.0;
                m[(q, q)].im = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * u_qp;
                    v[(k, q)] = vkp * s + vkq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut x = v.column(src);
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let pivot = x
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bi, bm), (i, z)| {
                if z.norm() > bm * (1.0 + 1e-12) {
                    (i, z.norm())
                } else {
                    (bi, bm)
                }
            })
            .0;
        let rot = if x[pivot].norm() > 0.0 {
            x[pivot].conj() / x[pivot].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for z in &mut x {
            *z = *z * rot / norm;
        }
        vectors.set_column(col, &x);
    }
    Ok(EigenDecomposition {
        values,
        vectors,
        sweeps,
    })
}

/// Real embedding `[[Re A, -Im A], [Im A, Re A]]` of side `2n`.
pub fn real_embed(a: &HermitianMatrix) -> DMatrix<f64> {
    let n = a.dim();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

/// Inverse of [`real_embed`] for matrices with the embedding structure.
/// Arbitrary symmetric input is projected onto that structure first.
pub fn real_unembed(t: &DMatrix<f64>) -> HermitianMatrix {
    assert!(
        t.nrows() == t.ncols() && t.nrows() % 2 == 0,
        "embedding must be 2n x 2n"
    );
    let n = t.nrows() / 2;
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (t[(i, j)] + t[(i + n, j + n)]);
        let im = 0.5 * (t[(i + n, j)] - t[(i, j + n)]);
        Complex64::new(re, im)
    });
    HermitianMatrix::symmetrized(&m)
}

/// `Re tr(A X)`.
pub fn trace_inner(a: &HermitianMatrix, x: &HermitianMatrix) -> Result<f64, LinalgError> {
    if a.dim() != x.dim() {
        return Err(LinalgError::DimensionMismatch {
            left: a.inner.shape(),
            right: x.inner.shape(),
        });
    }
    // tr(AX) = Σ_ij A[i,j] X[j,i]
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = a[(i, j)] * x[(j, i)];
            acc += p.re;
        }
    }
    Ok(acc)
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `aᴴ b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
