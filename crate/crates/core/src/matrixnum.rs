//! Dense complex matrices and the small-matrix numerics the rest of the
//! library leans on: Hermitian eigenvalues via cyclic Jacobi, unitary
//! Schur triangularization via Householder + shifted QR, operator norms.
//!
//! Everything here targets matrices of size at most 32x32; the geometry
//! code never needs more and the algorithms are chosen for robustness at
//! that scale rather than asymptotic speed.

use num_complex::Complex64;
use thiserror::Error;

/// Hard cap on matrix dimensions.
pub const MAX_DIM: usize = 32;

/// Convergence threshold scale for the Jacobi sweep, relative to the
/// Frobenius norm of the input.
const JACOBI_OFF_SCALE: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix dimensions {0}x{1} exceed the {MAX_DIM}x{MAX_DIM} cap or are zero")]
    BadShape(usize, usize),
    #[error("entry count {got} does not match {rows}x{cols}")]
    BadLength {
        rows: usize,
        cols: usize,
        got: usize,
    },
    #[error("non-finite entry at ({0},{1})")]
    NonFinite(usize, usize),
    #[error("dimension mismatch: {0}x{1} against {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is not Hermitian: deviation {0:.3e} exceeds tolerance")]
    NotHermitian(f64),
    #[error("iteration failed to converge: {0}")]
    NoConvergence(&'static str),
    #[error("matrix is numerically singular")]
    Singular,
}

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, MatrixError> {
        check_shape(rows, cols)?;
        if entries.len() != rows * cols {
            return Err(MatrixError::BadLength {
                rows,
                cols,
                got: entries.len(),
            });
        }
        for (k, e) in entries.iter().enumerate() {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(MatrixError::NonFinite(k / cols, k % cols));
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self, MatrixError> {
        check_shape(rows, cols)?;
        Ok(Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn diagonal(diag: &[Complex64]) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(diag.len(), diag.len())?;
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::DimensionMismatch(
                self.rows, self.cols, rhs.rows, rhs.cols,
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols)?;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == Complex64::default() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows).expect("shape already validated");
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, MatrixError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(MatrixError::DimensionMismatch(
                self.rows, self.cols, rhs.rows, rhs.cols,
            ));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, MatrixError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(MatrixError::DimensionMismatch(
                self.rows, self.cols, rhs.rows, rhs.cols,
            ));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let entries = self.entries.iter().map(|a| a * c).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "vector length must match columns");
        let mut out = vec![Complex64::default(); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::default();
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Maximum entrywise deviation from the adjoint.
    pub fn hermitian_deviation(&self) -> f64 {
        assert!(
            self.is_square(),
            "hermitian deviation of a non-square matrix"
        );
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n)?;
        for col in 0..n {
            let mut pivot = col;
            let mut best = a[(col, col)].norm();
            for r in col + 1..n {
                let cand = a[(r, col)].norm();
                if cand > best {
                    best = cand;
                    pivot = r;
                }
            }
            if best < 1e-300 {
                return Err(MatrixError::Singular);
            }
            if pivot != col {
                for j in 0..n {
                    a.entries.swap(col * n + j, pivot * n + j);
                    inv.entries.swap(col * n + j, pivot * n + j);
                }
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == Complex64::default() {
                    continue;
                }
                for j in 0..n {
                    let acj = a[(col, j)];
                    let icj = inv[(col, j)];
                    a[(r, j)] -= f * acj;
                    inv[(r, j)] -= f * icj;
                }
            }
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Wire format: {"rows": r, "cols": c, "entries": [[re, im], ...]} with
/// entries row-major. Complex numbers are always [re, im] pairs on the wire.
#[derive(serde::Serialize, serde::Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl serde::Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let entries = repr
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(repr.rows, repr.cols, entries).map_err(serde::de::Error::custom)
    }
}

fn check_shape(rows: usize, cols: usize) -> Result<(), MatrixError> {
    if rows == 0 || cols == 0 || rows > MAX_DIM || cols > MAX_DIM {
        return Err(MatrixError::BadShape(rows, cols));
    }
    Ok(())
}

/// Eigenvalues (ascending) and eigenvectors (matching columns) of a
/// Hermitian matrix, plus the largest residual |Av - lambda v| over the
/// computed pairs.
#[derive(Debug, Clone)]
pub struct HermitianEigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
    pub residual: f64,
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// The input must be Hermitian within `tol` of its adjoint (entrywise,
/// relative to the largest entry); it is symmetrized before iterating.
pub fn hermitian_eigenvalues(
    a: &ComplexMatrix,
    tol: f64,
) -> Result<HermitianEigenResult, MatrixError> {
    if !a.is_square() {
        return Err(MatrixError::NotSquare(a.rows, a.cols));
    }
    let n = a.rows;
    let scale = a.max_abs_entry().max(1.0);
    let dev = a.hermitian_deviation();
    if dev > tol * scale {
        return Err(MatrixError::NotHermitian(dev));
    }

    // Symmetrize so the iteration sees an exactly Hermitian matrix.
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    let sym = m.clone();
    let mut v = ComplexMatrix::identity(n)?;
    let fro = m.frobenius_norm();
    let threshold = JACOBI_OFF_SCALE * fro;

    if n > 1 && fro > 0.0 {
        let mut converged = false;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            let off = off_diagonal_norm(&m);
            if off <= threshold {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    jacobi_rotate(&mut m, &mut v, p, q);
                }
            }
        }
        if !converged && off_diagonal_norm(&m) > threshold {
            return Err(MatrixError::NoConvergence("Jacobi sweep limit reached"));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n)?;
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new_col)] = v[(r, old_col)];
        }
    }

    let mut residual: f64 = 0.0;
    for k in 0..n {
        let col: Vec<Complex64> = (0..n).map(|r| vectors[(r, k)]).collect();
        let av = sym.apply(&col);
        let r2 = av
            .iter()
            .zip(&col)
            .map(|(x, y)| (x - eigenvalues[k] * y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        residual = residual.max(r2);
    }
    if residual > 1e-8 * scale {
        return Err(MatrixError::NoConvergence("Jacobi residual too large"));
    }
    Ok(HermitianEigenResult {
        eigenvalues,
        eigenvectors: vectors,
        residual,
    })
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation annihilating the (p,q) entry of the
/// Hermitian matrix `m`, accumulated into `v`.
fn jacobi_rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let phase = apq / r;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Plane unitary: column p is (c, -s*conj(phase)), column q is
    // (s, c*conj(phase)) in the (p,q) coordinates.
    let n = m.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        let np = c * mkp - s * phase.conj() * mkq;
        let nq = s * mkp + c * phase.conj() * mkq;
        m[(k, p)] = np;
        m[(k, q)] = nq;
        m[(p, k)] = np.conj();
        m[(q, k)] = nq.conj();
    }
    m[(p, p)] = Complex64::new(app - t * r, 0.0);
    m[(q, q)] = Complex64::new(aqq + t * r, 0.0);
    m[(p, q)] = Complex64::default();
    m[(q, p)] = Complex64::default();
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * phase.conj() * vkq;
        v[(k, q)] = s * vkp + c * phase.conj() * vkq;
    }
}

/// Operator (spectral) norm as the square root of the top eigenvalue of
/// the Gram matrix A*A.
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64, MatrixError> {
    let gram = a.adjoint().matmul(a)?;
    let eig = hermitian_eigenvalues(&gram, 1e-10)?;
    let top = eig.eigenvalues.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Unitary Schur triangularization: returns (Q, R) with Q unitary and
/// Q* a Q = R upper triangular within `tol`.
pub fn schur_triangularize(
    a: &ComplexMatrix,
    tol: f64,
) -> Result<(ComplexMatrix, ComplexMatrix), MatrixError> {
    if !a.is_square() {
        return Err(MatrixError::NotSquare(a.rows, a.cols));
    }
    let n = a.rows;
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n)?;
    hessenberg_reduce(&mut h, &mut q);
    qr_iterate(&mut h, &mut q)?;

    // Deflation wrote exact zeros below the diagonal; clear the noise
    // left below the first subdiagonal by the Householder stage.
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = Complex64::default();
        }
    }

    // Contract check: unitarity and reconstruction.
    let qh = q.adjoint();
    let recon = q.matmul(&h)?.matmul(&qh)?;
    let scale = a.max_abs_entry().max(1.0);
    let err = recon.sub(a)?.max_abs_entry();
    let unit_err = q
        .matmul(&qh)?
        .sub(&ComplexMatrix::identity(n)?)?
        .max_abs_entry();
    if err > tol * scale || unit_err > tol {
        return Err(MatrixError::NoConvergence(
            "Schur reconstruction check failed",
        ));
    }
    Ok((q, h))
}

/// Householder reduction to upper Hessenberg form, accumulating the
/// transformations into `q`.
fn hessenberg_reduce(h: &mut ComplexMatrix, q: &mut ComplexMatrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let mut x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm_x = x.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        x[0] -= alpha;
        let vnorm2 = x.iter().map(|e| e.norm_sqr()).sum::<f64>();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // Left: rows k+1..n of all columns.
        for j in 0..n {
            let mut dot = Complex64::default();
            for (idx, i) in (k + 1..n).enumerate() {
                dot += x[idx].conj() * h[(i, j)];
            }
            dot *= beta;
            for (idx, i) in (k + 1..n).enumerate() {
                h[(i, j)] -= dot * x[idx];
            }
        }
        // Right: columns k+1..n of all rows.
        for i in 0..n {
            let mut dot = Complex64::default();
            for (idx, j) in (k + 1..n).enumerate() {
                dot += h[(i, j)] * x[idx];
            }
            dot *= beta;
            for (idx, j) in (k + 1..n).enumerate() {
                h[(i, j)] -= dot * x[idx].conj();
            }
        }
        // Accumulate into q (right multiplication).
        for i in 0..n {
            let mut dot = Complex64::default();
            for (idx, j) in (k + 1..n).enumerate() {
                dot += q[(i, j)] * x[idx];
            }
            dot *= beta;
            for (idx, j) in (k + 1..n).enumerate() {
                q[(i, j)] -= dot * x[idx].conj();
            }
        }
    }
}

/// Complex Givens pair (c real, s complex) with
/// [[c, s], [-conj(s), c]] * [f; g] = [r; 0].
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g.norm() == 0.0 {
        return (1.0, Complex64::default());
    }
    if f.norm() == 0.0 {
        return (0.0, g.conj() / g.norm());
    }
    let denom = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / denom;
    let s = (f / f.norm()) * g.conj() / denom;
    (c, s)
}

/// Shifted QR iteration with deflation on an upper Hessenberg matrix.
fn qr_iterate(h: &mut ComplexMatrix, q: &mut ComplexMatrix) -> Result<(), MatrixError> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let mut hi = n; // active block is lo..hi
    let mut stall = 0usize;
    let mut total_iters = 0usize;
    let budget = 60 * n * n;
    while hi > 1 {
        // Deflate tiny subdiagonals across the whole matrix.
        for k in 1..hi {
            let eps = f64::EPSILON * (h[(k - 1, k - 1)].norm() + h[(k, k)].norm());
            let eps = if eps == 0.0 { 1e-300 } else { eps };
            if h[(k, k - 1)].norm() <= eps {
                h[(k, k - 1)] = Complex64::default();
            }
        }
        if h[(hi - 1, hi - 2)] == Complex64::default() {
            hi -= 1;
            stall = 0;
            continue;
        }
        // Find the start of the active block.
        let mut lo = hi - 1;
        while lo > 0 && h[(lo, lo - 1)] != Complex64::default() {
            lo -= 1;
        }
        total_iters += 1;
        stall += 1;
        if total_iters > budget {
            return Err(MatrixError::NoConvergence("QR iteration budget exhausted"));
        }
        let mu = if stall.is_multiple_of(12) {
            // Exceptional shift to break rare cycling.
            h[(hi - 1, hi - 1)] + Complex64::new(0.75 * h[(hi - 1, hi - 2)].norm(), 0.0)
        } else {
            wilkinson_shift(h, hi)
        };
        qr_step(h, q, lo, hi, mu);
    }
    Ok(())
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 2, hi - 2)];
    let b = h[(hi - 2, hi - 1)];
    let c = h[(hi - 1, hi - 2)];
    let d = h[(hi - 1, hi - 1)];
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let r1 = 0.5 * (tr + disc);
    let r2 = 0.5 * (tr - disc);
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// One explicit single-shift QR step on the active block lo..hi.
fn qr_step(h: &mut ComplexMatrix, q: &mut ComplexMatrix, lo: usize, hi: usize, mu: Complex64) {
    let n = h.rows();
    for k in lo..hi {
        h[(k, k)] -= mu;
    }
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi - 1 {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        rotations.push((c, s));
        for j in k..n {
            let hk = h[(k, j)];
            let hk1 = h[(k + 1, j)];
            h[(k, j)] = c * hk + s * hk1;
            h[(k + 1, j)] = -s.conj() * hk + c * hk1;
        }
    }
    for (idx, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + idx;
        let rmax = (k + 2).min(hi - 1);
        for r in 0..=rmax {
            let hk = h[(r, k)];
            let hk1 = h[(r, k + 1)];
            h[(r, k)] = c * hk + s.conj() * hk1;
            h[(r, k + 1)] = -s * hk + c * hk1;
        }
        for r in 0..n {
            let qk = q[(r, k)];
            let qk1 = q[(r, k + 1)];
            q[(r, k)] = c * qk + s.conj() * qk1;
            q[(r, k + 1)] = -s * qk + c * qk1;
        }
    }
    for k in lo..hi {
        h[(k, k)] += mu;
    }
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product <a, b> = sum a_i conj(b_i).
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len(), "inner product length mismatch");
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}
