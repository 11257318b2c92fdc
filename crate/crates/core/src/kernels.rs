//! Positive semidefinite kernel testing and Gram factorization: psd checks,
//! numerical rank, pivoted-Cholesky factor recovery, the rank-1 quotient
//! test behind the extreme-ray characterization of magic functions, and the
//! Moebius sandwich identity.
//!
//! All psd verdicts here are sample-based necessary conditions: a kernel is
//! certified on the supplied finite point set only, never on all of its
//! domain.

use num_complex::Complex64;
use thiserror::Error;

use crate::disc_geometry::{CirclePoint, MoebiusMap};
use crate::matrixnum::{hermitian_eigenvalues, ComplexMatrix, MatrixError};
use crate::symm_bidisc::{phi, GPoint};

/// Hermitian-symmetry acceptance for raw kernel callables.
const KERNEL_SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues above this multiple of the largest one count toward rank.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("kernel is not Hermitian-symmetric: |k(a,b) - conj(k(b,a))| = {0:.3e}")]
    NotHermitianSymmetric(f64),
    #[error("matrix is not psd within tolerance: min eigenvalue {0:.3e}")]
    NotPsd(f64),
    #[error("empty point list")]
    NoPoints,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Gram matrix [k(lambda_i, lambda_j)] over a finite sample, stored with the
/// points that produced it. Entries are Hermitized on construction after the
/// symmetry check, so the stored matrix is Hermitian to machine precision.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    points: Vec<Vec<Complex64>>,
    entries: ComplexMatrix,
}

impl GramMatrix {
    /// Wrap an explicit entry matrix; rejects non-Hermitian input.
    pub fn new(points: Vec<Vec<Complex64>>, entries: ComplexMatrix) -> Result<Self, KernelError> {
        if points.is_empty() {
            return Err(KernelError::NoPoints);
        }
        if !entries.is_square() || entries.rows() != points.len() {
            return Err(MatrixError::DimensionMismatch(
                points.len(),
                points.len(),
                entries.rows(),
                entries.cols(),
            )
            .into());
        }
        let dev = entries.hermitian_deviation();
        let scale = 1.0 + entries.max_abs_entry();
        if dev > KERNEL_SYMMETRY_TOL * scale {
            return Err(KernelError::NotHermitianSymmetric(dev));
        }
        let herm = entries
            .add(&entries.adjoint())?
            .scale(Complex64::new(0.5, 0.0));
        Ok(Self {
            points,
            entries: herm,
        })
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }
}

/// Assemble the Gram matrix of a kernel callable over sample points. The
/// kernel must be Hermitian-symmetric on the samples within 1e-10.
pub fn gram<F>(kernel: F, points: &[Vec<Complex64>]) -> Result<GramMatrix, KernelError>
where
    F: Fn(&[Complex64], &[Complex64]) -> Complex64,
{
    if points.is_empty() {
        return Err(KernelError::NoPoints);
    }
    let n = points.len();
    let mut entries = ComplexMatrix::zeros(n, n)?;
    for i in 0..n {
        for j in 0..n {
            entries[(i, j)] = kernel(&points[i], &points[j]);
        }
    }
    GramMatrix::new(points.to_vec(), entries)
}

/// Minimum eigenvalue report: psd iff min_eig >= -tol on this sample.
pub fn is_psd(g: &GramMatrix, tol: f64) -> Result<(bool, f64), KernelError> {
    let eig = hermitian_eigenvalues(&g.entries, 1e-10)?;
    let min_eig = eig.eigenvalues[0];
    Ok((min_eig >= -tol, min_eig))
}

/// Count of eigenvalues above tol times the largest; errors when the matrix
/// is not psd within tol.
pub fn numeric_rank(g: &GramMatrix, tol: f64) -> Result<usize, KernelError> {
    let eig = hermitian_eigenvalues(&g.entries, 1e-10)?;
    let min_eig = eig.eigenvalues[0];
    if min_eig < -tol {
        return Err(KernelError::NotPsd(min_eig));
    }
    let max_eig = *eig.eigenvalues.last().expect("nonempty spectrum");
    if max_eig <= 0.0 {
        return Ok(0);
    }
    Ok(eig
        .eigenvalues
        .iter()
        .filter(|&&e| e > tol * max_eig)
        .count())
}

/// Pivoted Cholesky factorization of a psd Gram matrix: returns one vector
/// F(lambda_i) per point, in input order, with <F(lambda_i), F(lambda_j)>
/// equal to the kernel entry. Stops when the remaining diagonal mass falls
/// below tol times the initial mass, so rank-deficient matrices yield short
/// vectors.
pub fn gram_factor(g: &GramMatrix, tol: f64) -> Result<Vec<Vec<Complex64>>, KernelError> {
    let (psd, min_eig) = is_psd(g, tol)?;
    if !psd {
        return Err(KernelError::NotPsd(min_eig));
    }
    let n = g.size();
    let mut work = g.entries.clone();
    // perm[k] = original index of the point processed at step k.
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rows: Vec<Vec<Complex64>> = vec![Vec::new(); n];
    let initial_mass: f64 = (0..n).map(|i| work[(i, i)].re).sum::<f64>().max(0.0);
    let stop = tol * (1.0 + initial_mass);
    let mut rank = 0;
    for k in 0..n {
        let mass: f64 = (k..n).map(|i| work[(i, i)].re).sum();
        if mass <= stop {
            break;
        }
        let pivot = (k..n)
            .max_by(|&a, &b| {
                work[(a, a)]
                    .re
                    .partial_cmp(&work[(b, b)].re)
                    .expect("finite")
            })
            .expect("nonempty range");
        let d = work[(pivot, pivot)].re;
        if d <= stop {
            break;
        }
        if pivot != k {
            perm.swap(k, pivot);
            for j in 0..n {
                let tmp = work[(k, j)];
                work[(k, j)] = work[(pivot, j)];
                work[(pivot, j)] = tmp;
            }
            for i in 0..n {
                let tmp = work[(i, k)];
                work[(i, k)] = work[(i, pivot)];
                work[(i, pivot)] = tmp;
            }
            rows.swap(k, pivot);
        }
        let lkk = d.sqrt();
        rows[k].push(Complex64::new(lkk, 0.0));
        let mut column = vec![Complex64::default(); n];
        for i in k + 1..n {
            column[i] = work[(i, k)] / lkk;
            rows[i].push(column[i]);
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let update = column[i] * column[j].conj();
                work[(i, j)] -= update;
            }
        }
        rank += 1;
    }
    // Pad to a common length and undo the pivoting.
    let mut out = vec![Vec::new(); n];
    for (k, row) in rows.into_iter().enumerate() {
        let mut padded = row;
        padded.resize(rank, Complex64::default());
        out[perm[k]] = padded;
    }
    Ok(out)
}

/// The computable content of the extreme-ray test: for h built from f and
/// Phi_omega, the quotient kernel h(lambda, mubar) / (1 - conj(Phi(mu))
/// Phi(lambda)) must equal conj(f(mu)) f(lambda), hence be psd of rank at
/// most 1 on any sample. Returns (psd, rank) of the quotient.
pub fn extremal_quotient_check<F>(
    f: F,
    omega: CirclePoint,
    points: &[GPoint],
) -> Result<(bool, usize), KernelError>
where
    F: Fn(&GPoint) -> Complex64,
{
    if points.is_empty() {
        return Err(KernelError::NoPoints);
    }
    let n = points.len();
    let fvals: Vec<Complex64> = points.iter().map(&f).collect();
    let phivals: Vec<Complex64> = points.iter().map(|g| phi(omega, g).value()).collect();
    let one = Complex64::new(1.0, 0.0);
    let mut entries = ComplexMatrix::zeros(n, n)?;
    for i in 0..n {
        for j in 0..n {
            let denom = one - phivals[j].conj() * phivals[i];
            let h = fvals[j].conj() * denom * fvals[i];
            entries[(i, j)] = h / denom;
        }
    }
    let pts: Vec<Vec<Complex64>> = points.iter().map(|g| vec![g.s(), g.p()]).collect();
    let gm = GramMatrix::new(pts, entries)?;
    let (psd, _) = is_psd(&gm, 1e-10)?;
    let rank = numeric_rank(&gm, RANK_TOL)?;
    Ok((psd, rank))
}

/// Residual of the Moebius sandwich identity
///
///   1 - (m o f)^vee (m o f) = g^vee (1 - f^vee f) g,
///   g(x) = (1 - |alpha|^2)^{1/2} (1 - conj(alpha) f(x))^{-1},
///
/// with alpha the center of m, evaluated over all point pairs; the rotation
/// part of m drops out. Returns the max |LHS - RHS|.
pub fn magic_sandwich_identity<P, F>(m: &MoebiusMap, f: F, points: &[P]) -> f64
where
    F: Fn(&P) -> Complex64,
{
    let alpha = m.center.value();
    let scale = (1.0 - alpha.norm_sqr()).sqrt();
    let one = Complex64::new(1.0, 0.0);
    let fvals: Vec<Complex64> = points.iter().map(&f).collect();
    let mvals: Vec<Complex64> = fvals.iter().map(|&z| m.apply_raw(z)).collect();
    let gvals: Vec<Complex64> = fvals
        .iter()
        .map(|&z| scale / (one - alpha.conj() * z))
        .collect();
    let mut worst = 0.0f64;
    for i in 0..fvals.len() {
        for j in 0..fvals.len() {
            let lhs = one - mvals[j].conj() * mvals[i];
            let rhs = gvals[j].conj() * (one - fvals[j].conj() * fvals[i]) * gvals[i];
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// Szego kernel on the disc: k(z, w) = 1 / (1 - conj(w) z).
pub fn szego(z: Complex64, w: Complex64) -> Complex64 {
    Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - w.conj() * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc_geometry::{blaschke, DiscPoint};
    use crate::symm_bidisc::{royal, sym};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn d(re: f64, im: f64) -> DiscPoint {
        DiscPoint::new(c(re, im)).unwrap()
    }

    fn disc_samples() -> Vec<Vec<Complex64>> {
        [
            (0.1, 0.2),
            (-0.4, 0.3),
            (0.6, -0.1),
            (0.0, 0.0),
            (-0.2, -0.7),
            (0.35, 0.45),
            (-0.6, -0.2),
            (0.05, -0.5),
        ]
        .iter()
        .map(|&(re, im)| vec![c(re, im)])
        .collect()
    }

    fn g_samples() -> Vec<GPoint> {
        [
            ((0.3, 0.1), (-0.2, 0.4)),
            ((0.5, -0.3), (0.1, 0.2)),
            ((-0.6, 0.2), (0.0, 0.3)),
            ((0.2, 0.7), (-0.1, -0.4)),
            ((0.0, 0.0), (0.45, 0.0)),
            ((-0.15, -0.55), (0.6, 0.1)),
            ((0.7, 0.0), (-0.3, -0.3)),
            ((0.1, -0.1), (0.2, 0.6)),
        ]
        .iter()
        .map(|&((a, b), (e, f))| sym(d(a, b), d(e, f)))
        .collect()
    }

    #[test]
    fn constant_kernel_is_rank_one() {
        let points = disc_samples();
        let g = gram(|_, _| c(1.0, 0.0), &points[..4]).unwrap();
        assert!(g.entries().max_abs_entry() - 1.0 < 1e-15);
        let (psd, min_eig) = is_psd(&g, 1e-12).unwrap();
        assert!(psd && min_eig > -1e-12);
        assert_eq!(numeric_rank(&g, RANK_TOL).unwrap(), 1);
        let f = gram_factor(&g, 1e-10).unwrap();
        for v in &f {
            assert_eq!(v.len(), 1);
            assert!((v[0].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_rejects_asymmetric_kernels() {
        let points = disc_samples();
        let err = gram(|a, b| a[0] - b[0], &points[..3]);
        assert!(matches!(err, Err(KernelError::NotHermitianSymmetric(_))));
    }

    #[test]
    fn off_diagonal_deficit_is_indefinite() {
        // k(a, b) = delta_ab - 0.6 off the diagonal on 3 points: eigenvalues
        // 1.6, 1.6, and 1.0 - 1.2 = -0.2.
        let points = disc_samples();
        let g = gram(
            |a, b| {
                if (a[0] - b[0]).norm() < 1e-15 {
                    c(1.0, 0.0)
                } else {
                    c(-0.6, 0.0)
                }
            },
            &points[..3],
        )
        .unwrap();
        let (psd, min_eig) = is_psd(&g, 1e-12).unwrap();
        assert!(!psd);
        assert!((min_eig + 0.2).abs() < 1e-12);
        assert!(matches!(
            numeric_rank(&g, RANK_TOL),
            Err(KernelError::NotPsd(_))
        ));
    }

    #[test]
    fn diagonal_gram_reports_signature() {
        let entries = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let g = GramMatrix::new(vec![vec![c(0.0, 0.0)], vec![c(0.5, 0.0)]], entries).unwrap();
        let (psd, min_eig) = is_psd(&g, 1e-12).unwrap();
        assert!(!psd);
        assert!((min_eig + 1.0).abs() < 1e-13);
    }

    #[test]
    fn szego_gram_is_psd_and_factors() {
        let points = disc_samples();
        let g = gram(|a, b| szego(a[0], b[0]), &points).unwrap();
        let (psd, min_eig) = is_psd(&g, 1e-12).unwrap();
        assert!(psd, "min_eig = {min_eig}");
        assert_eq!(numeric_rank(&g, RANK_TOL).unwrap(), points.len());

        let five = &points[..5];
        let g5 = gram(|a, b| szego(a[0], b[0]), five).unwrap();
        let f = gram_factor(&g5, 1e-10).unwrap();
        let mut worst = 0.0f64;
        for i in 0..5 {
            for j in 0..5 {
                let ip: Complex64 = f[i].iter().zip(&f[j]).map(|(a, b)| a * b.conj()).sum();
                worst = worst.max((ip - g5.entries()[(i, j)]).norm());
            }
        }
        assert!(worst < 1e-9, "reconstruction residual {worst}");
    }

    #[test]
    fn factor_of_diagonal_is_orthogonal() {
        let entries = ComplexMatrix::diagonal(&[c(4.0, 0.0), c(9.0, 0.0)]).unwrap();
        let g = GramMatrix::new(vec![vec![c(0.0, 0.0)], vec![c(0.1, 0.0)]], entries).unwrap();
        let f = gram_factor(&g, 1e-10).unwrap();
        let n0: f64 = f[0].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let n1: f64 = f[1].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((n0 - 2.0).abs() < 1e-12 && (n1 - 3.0).abs() < 1e-12);
        let ip: Complex64 = f[0].iter().zip(&f[1]).map(|(a, b)| a * b.conj()).sum();
        assert!(ip.norm() < 1e-12);
    }

    #[test]
    fn outer_product_kernel_has_rank_one() {
        let points = disc_samples();
        let fval = |p: &[Complex64]| c(0.7, -0.2) + c(1.3, 0.4) * p[0];
        let g = gram(|a, b| fval(b).conj() * fval(a), &points[..6]).unwrap();
        assert_eq!(numeric_rank(&g, RANK_TOL).unwrap(), 1);
        let f = gram_factor(&g, 1e-10).unwrap();
        assert!(f.iter().all(|v| v.len() == 1));
    }

    #[test]
    fn extremal_quotient_constant_f() {
        let points = g_samples();
        let (psd, rank) =
            extremal_quotient_check(|_| c(1.0, 0.0), CirclePoint::from_angle(0.9), &points)
                .unwrap();
        assert!(psd);
        assert_eq!(rank, 1);
    }

    #[test]
    fn extremal_quotient_on_royal_points() {
        // On royal points Phi_omega collapses to -z, so the quotient
        // denominator is the Szego numerator 1 - conj(w) z and the quotient
        // itself is exactly conj(f(mu)) f(lambda) for f = s + 2p.
        let zs = [c(0.2, 0.3), c(-0.5, 0.1), c(0.0, -0.6), c(0.4, 0.0)];
        let points: Vec<GPoint> = zs
            .iter()
            .map(|&z| royal(DiscPoint::new(z).unwrap()))
            .collect();
        let f = |g: &GPoint| g.s() + 2.0 * g.p();
        let om = CirclePoint::from_angle(-1.2);
        let (psd, rank) = extremal_quotient_check(f, om, &points).unwrap();
        assert!(psd);
        assert_eq!(rank, 1);

        // Direct check of the quotient entries against conj(f) f.
        let n = points.len();
        let one = c(1.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let denom = one - (-zs[j]).conj() * (-zs[i]);
                let h = f(&points[j]).conj() * denom * f(&points[i]);
                let expected = f(&points[j]).conj() * f(&points[i]);
                assert!((h / denom - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn extremal_quotient_with_a_zero_of_f() {
        let points = g_samples();
        let s0 = points[0].s();
        let (psd, rank) =
            extremal_quotient_check(|g| g.s() - s0, CirclePoint::one(), &points).unwrap();
        assert!(psd);
        assert!(rank <= 1);
    }

    #[test]
    fn sandwich_identity_residuals() {
        let points = g_samples();
        let om = CirclePoint::from_angle(0.35);
        let f = |g: &GPoint| phi(om, g).value();
        assert_eq!(
            magic_sandwich_identity(&MoebiusMap::identity(), f, &points),
            0.0
        );
        let rot = MoebiusMap::new(CirclePoint::from_angle(2.2), d(0.0, 0.0));
        assert!(magic_sandwich_identity(&rot, f, &points) < 1e-15);
        let general = MoebiusMap::new(CirclePoint::from_angle(1.1), d(0.3, -0.2));
        assert!(magic_sandwich_identity(&general, f, &points) < 1e-12);
    }

    #[test]
    fn flat_restriction_quotient_is_rank_one_psd() {
        // (1 - conj(B_a(w)) B_a(z)) / (1 - conj(w) z) on disc samples equals
        // conj(g(w)) g(z) for g = sqrt(1-|a|^2)/(1 - conj(a) z).
        let alpha = d(0.45, -0.15);
        let points = disc_samples();
        let one = c(1.0, 0.0);
        let kernel = |a: &[Complex64], b: &[Complex64]| {
            (one - blaschke(alpha, b[0]).conj() * blaschke(alpha, a[0]))
                / (one - b[0].conj() * a[0])
        };
        let g = gram(kernel, &points).unwrap();
        let (psd, min_eig) = is_psd(&g, 1e-10).unwrap();
        assert!(psd, "min_eig = {min_eig}");
        assert_eq!(numeric_rank(&g, RANK_TOL).unwrap(), 1);
    }
}
