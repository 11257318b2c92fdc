//! Hereditary polynomials and the hereditary functional calculus on
//! commuting matrix tuples.
//!
//! A hereditary polynomial h(x, y) = sum c_{ab} y^b x^a in d variables is
//! evaluated at a commuting d-tuple T with every starred factor on the left:
//! h(T) = sum c_{ab} (T*)^b T^a. This module provides the point and tuple
//! evaluators, the conjugation product g^vee . h . g, joint spectra via
//! simultaneous Schur triangularization, positivity tests, pullbacks along
//! polynomial maps, and the cleared-denominator membership test for the
//! magic functions of G.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::disc_geometry::CirclePoint;
use crate::matrixnum::{
    hermitian_eigenvalues, operator_norm, schur_triangularize, ComplexMatrix, MatrixError,
};

/// Commutation residual bound for a valid tuple: the largest Frobenius norm
/// of a pairwise commutator must stay below this.
pub const COMMUTATION_TOL: f64 = 1e-10;

/// Acceptance threshold for simultaneous triangularity, relative to
/// 1 + the Frobenius norm of the matrix under test.
const TRIANGULAR_TOL: f64 = 1e-9;

/// Retry budget for the generic-combination Schur trick.
const SCHUR_ATTEMPTS: usize = 8;

/// Convergence tolerance handed to the Schur factorization.
const SCHUR_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum HeredError {
    #[error("multi-index length {got} does not match dimension {dim}")]
    BadIndexLength { dim: usize, got: usize },
    #[error("dimension mismatch: {0} against {1}")]
    DimensionMismatch(usize, usize),
    #[error("tuple must be a nonempty list of square matrices of equal size")]
    BadTuple,
    #[error("non-finite coefficient")]
    NonFiniteCoefficient,
    #[error("factor depends on y: term with beta {0:?}")]
    NotXOnly(Vec<usize>),
    #[error("coefficients lack Hermitian symmetry: max |c_ab - conj(c_ba)| = {0:.3e}")]
    NotHermitianSymmetric(f64),
    #[error("h(T) deviates from Hermitian by {0:.3e}")]
    EvaluationNotHermitian(f64),
    #[error("tuple does not commute: commutator norm {0:.3e}")]
    CommutationViolated(f64),
    #[error("simultaneous triangularization failed after {0} attempts")]
    TriangularizationFailed(usize),
    #[error("joint spectrum escapes the open unit polydisc: coordinate modulus {0:.6}")]
    SpectrumOutsideDomain(f64),
    #[error("matrix is not a contraction: operator norm {0:.6}")]
    NotContraction(f64),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Hereditary polynomial h(x, y) = sum over (alpha, beta) of
/// c_{alpha beta} y^beta x^alpha, with x and y each ranging over C^d.
///
/// Zero coefficients are never stored, and the term map is ordered, so
/// equality, iteration, and serialization are all deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct HereditaryPolynomial {
    dim: usize,
    terms: BTreeMap<(Vec<usize>, Vec<usize>), Complex64>,
}

impl HereditaryPolynomial {
    /// The zero polynomial in dimension `dim` (panics if `dim` is zero).
    pub fn new(dim: usize) -> Self {
        assert!(
            dim >= 1,
            "hereditary polynomial needs at least one variable"
        );
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut h = Self::new(dim);
        h.add_term(&vec![0; dim], &vec![0; dim], c)
            .expect("constant term is well formed");
        h
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Complex64::new(1.0, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &BTreeMap<(Vec<usize>, Vec<usize>), Complex64> {
        &self.terms
    }

    pub fn coefficient(&self, alpha: &[usize], beta: &[usize]) -> Complex64 {
        self.terms
            .get(&(alpha.to_vec(), beta.to_vec()))
            .copied()
            .unwrap_or_default()
    }

    /// Add `c * y^beta x^alpha`; merges with an existing term and drops the
    /// entry if the coefficient cancels to exactly zero.
    pub fn add_term(
        &mut self,
        alpha: &[usize],
        beta: &[usize],
        c: Complex64,
    ) -> Result<(), HeredError> {
        if alpha.len() != self.dim {
            return Err(HeredError::BadIndexLength {
                dim: self.dim,
                got: alpha.len(),
            });
        }
        if beta.len() != self.dim {
            return Err(HeredError::BadIndexLength {
                dim: self.dim,
                got: beta.len(),
            });
        }
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(HeredError::NonFiniteCoefficient);
        }
        let key = (alpha.to_vec(), beta.to_vec());
        let updated = self.terms.get(&key).copied().unwrap_or_default() + c;
        if updated.re == 0.0 && updated.im == 0.0 {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, updated);
        }
        Ok(())
    }

    /// True when every term has beta = 0, i.e. the polynomial depends on x
    /// alone and can act as a conjugating factor or coordinate of a map.
    pub fn is_x_only(&self) -> bool {
        self.terms
            .keys()
            .all(|(_, beta)| beta.iter().all(|&b| b == 0))
    }

    /// h^vee(x, y) = conj(h(ybar, xbar)): swap the index roles and conjugate
    /// the coefficients. h is Hermitian-symmetric iff h^vee == h.
    pub fn vee(&self) -> Self {
        let mut out = Self::new(self.dim);
        for ((alpha, beta), &c) in &self.terms {
            out.terms.insert((beta.clone(), alpha.clone()), c.conj());
        }
        out
    }

    /// Largest |c_{ab} - conj(c_{ba})| over all stored index pairs.
    pub fn hermitian_symmetry_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for ((alpha, beta), &c) in &self.terms {
            let mirror = self.coefficient(beta, alpha);
            worst = worst.max((c - mirror.conj()).norm());
        }
        worst
    }

    /// h0(x, y) = 1 - yx in one variable, so h0(T) = 1 - T*T: positive for
    /// every contraction.
    pub fn h0() -> Self {
        let mut h = Self::new(1);
        h.add_term(&[0], &[0], Complex64::new(1.0, 0.0))
            .expect("index length 1");
        h.add_term(&[1], &[1], Complex64::new(-1.0, 0.0))
            .expect("index length 1");
        h
    }

    /// h0^2 = 1 - 2yx + y^2 x^2. Unlike h0 itself this fails positivity on
    /// nilpotent contractions with norm above 1/sqrt(2): for T^2 = 0 it
    /// collapses to 1 - 2 T*T.
    pub fn h0_squared() -> Self {
        let mut h = Self::new(1);
        h.add_term(&[0], &[0], Complex64::new(1.0, 0.0))
            .expect("index length 1");
        h.add_term(&[1], &[1], Complex64::new(-2.0, 0.0))
            .expect("index length 1");
        h.add_term(&[2], &[2], Complex64::new(1.0, 0.0))
            .expect("index length 1");
        h
    }

    /// Cleared-denominator membership form for the magic function Phi_omega
    /// on G, in coordinates x = (s, p):
    ///
    ///   q(x, ybar) = (2 - conj(omega) ybar_1)(2 - omega x_1)
    ///              - (2 conj(omega) ybar_2 - ybar_1)(2 omega x_2 - x_1).
    ///
    /// q equals (2 - omega s)^vee (1 - Phi^vee Phi)(2 - omega s), so q(S) is
    /// psd exactly when 1 - Phi(S)*Phi(S) is, whenever 2 - omega S_1 is
    /// invertible; this keeps the rational function 1 - Phi^vee Phi inside
    /// the polynomial calculus.
    pub fn magic_form(omega: CirclePoint) -> Self {
        let w = omega.value();
        let two = Complex64::new(2.0, 0.0);
        let mut q = Self::new(2);
        let terms: [([usize; 2], [usize; 2], Complex64); 6] = [
            ([0, 0], [0, 0], Complex64::new(4.0, 0.0)),
            ([1, 0], [0, 0], -two * w),
            ([0, 0], [1, 0], -two * w.conj()),
            ([0, 1], [0, 1], Complex64::new(-4.0, 0.0)),
            ([1, 0], [0, 1], two * w.conj()),
            ([0, 1], [1, 0], two * w),
        ];
        for (alpha, beta, c) in terms {
            q.add_term(&alpha, &beta, c).expect("index length 2");
        }
        q
    }
}

/// Wire format: {"dim": d, "terms": [{"alpha": [..], "beta": [..],
/// "re": r, "im": i}, ...]} with terms in map order.
#[derive(serde::Serialize, serde::Deserialize)]
struct TermRepr {
    alpha: Vec<usize>,
    beta: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct HeredRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

impl serde::Serialize for HereditaryPolynomial {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|((alpha, beta), c)| TermRepr {
                alpha: alpha.clone(),
                beta: beta.clone(),
                re: c.re,
                im: c.im,
            })
            .collect();
        HeredRepr {
            dim: self.dim,
            terms,
        }
        .serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for HereditaryPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = HeredRepr::deserialize(deserializer)?;
        if repr.dim == 0 {
            return Err(serde::de::Error::custom("dimension must be at least 1"));
        }
        let mut h = HereditaryPolynomial::new(repr.dim);
        for t in &repr.terms {
            h.add_term(&t.alpha, &t.beta, Complex64::new(t.re, t.im))
                .map_err(serde::de::Error::custom)?;
        }
        Ok(h)
    }
}

/// Commuting d-tuple of n x n matrices with its certification data: the
/// worst pairwise commutator norm and the joint spectrum (n joint
/// eigenvalues, each a d-tuple, with multiplicity).
#[derive(Debug, Clone)]
pub struct CommutingTuple {
    matrices: Vec<ComplexMatrix>,
    commutation_residual: f64,
    joint_spectrum: Vec<Vec<Complex64>>,
}

impl CommutingTuple {
    pub fn new(matrices: Vec<ComplexMatrix>) -> Result<Self, HeredError> {
        Self::with_tol(matrices, COMMUTATION_TOL)
    }

    pub fn with_tol(matrices: Vec<ComplexMatrix>, tol: f64) -> Result<Self, HeredError> {
        let commutation_residual = commutation_residual(&matrices)?;
        if commutation_residual > tol {
            return Err(HeredError::CommutationViolated(commutation_residual));
        }
        let joint_spectrum = joint_spectrum(&matrices, tol)?;
        Ok(Self {
            matrices,
            commutation_residual,
            joint_spectrum,
        })
    }

    /// Number of matrices d.
    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    /// Common matrix size n.
    pub fn size(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn commutation_residual(&self) -> f64 {
        self.commutation_residual
    }

    pub fn joint_spectrum(&self) -> &[Vec<Complex64>] {
        &self.joint_spectrum
    }
}

/// Wire format: {"matrices": [matrix, ...]} with each matrix in the
/// ComplexMatrix format. Validation (commutation, spectra) runs on read.
#[derive(serde::Serialize, serde::Deserialize)]
struct TupleRepr {
    matrices: Vec<ComplexMatrix>,
}

impl serde::Serialize for CommutingTuple {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TupleRepr {
            matrices: self.matrices.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for CommutingTuple {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = TupleRepr::deserialize(deserializer)?;
        CommutingTuple::new(repr.matrices).map_err(serde::de::Error::custom)
    }
}

fn validate_tuple_shapes(matrices: &[ComplexMatrix]) -> Result<usize, HeredError> {
    let first = matrices.first().ok_or(HeredError::BadTuple)?;
    let n = first.rows();
    for t in matrices {
        if !t.is_square() || t.rows() != n {
            return Err(HeredError::BadTuple);
        }
    }
    Ok(n)
}

/// Largest Frobenius norm of a pairwise commutator T_i T_j - T_j T_i.
pub fn commutation_residual(matrices: &[ComplexMatrix]) -> Result<f64, HeredError> {
    validate_tuple_shapes(matrices)?;
    let mut worst = 0.0f64;
    for i in 0..matrices.len() {
        for j in i + 1..matrices.len() {
            let ab = matrices[i].matmul(&matrices[j])?;
            let ba = matrices[j].matmul(&matrices[i])?;
            worst = worst.max(ab.sub(&ba)?.frobenius_norm());
        }
    }
    Ok(worst)
}

/// Deterministic draw from the complex unit sphere for the generic linear
/// combination; each attempt reseeds from a fixed constant so that results
/// never depend on call order or global state.
fn unit_sphere_gamma(d: usize, attempt: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7A11_5EED ^ attempt.wrapping_mul(0x9E37_79B9));
    loop {
        let v: Vec<Complex64> = (0..d)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Joint spectrum of a commuting tuple: Schur-triangularize a generic
/// unit-sphere combination sum gamma_i T_i, check that the resulting unitary
/// triangularizes every T_i, and read off matched diagonal entries. Retries
/// with a fresh combination up to 8 times.
pub fn joint_spectrum(
    matrices: &[ComplexMatrix],
    tol: f64,
) -> Result<Vec<Vec<Complex64>>, HeredError> {
    let n = validate_tuple_shapes(matrices)?;
    let residual = commutation_residual(matrices)?;
    if residual > tol {
        return Err(HeredError::CommutationViolated(residual));
    }
    let d = matrices.len();
    if n == 1 {
        return Ok(vec![matrices.iter().map(|t| t[(0, 0)]).collect()]);
    }
    for attempt in 0..SCHUR_ATTEMPTS {
        let gamma = unit_sphere_gamma(d, attempt as u64);
        let mut combo = ComplexMatrix::zeros(n, n)?;
        for (g, t) in gamma.iter().zip(matrices) {
            combo = combo.add(&t.scale(*g))?;
        }
        let q = match schur_triangularize(&combo, SCHUR_TOL) {
            Ok((q, _)) => q,
            Err(_) => continue,
        };
        let qh = q.adjoint();
        let mut spectrum = vec![vec![Complex64::default(); d]; n];
        let mut triangular = true;
        'matrices: for (i, t) in matrices.iter().enumerate() {
            let r = qh.matmul(t)?.matmul(&q)?;
            let bound = TRIANGULAR_TOL * (1.0 + t.frobenius_norm());
            for row in 1..n {
                for col in 0..row {
                    if r[(row, col)].norm() > bound {
                        triangular = false;
                        break 'matrices;
                    }
                }
            }
            for (k, entry) in spectrum.iter_mut().enumerate() {
                entry[i] = r[(k, k)];
            }
        }
        if triangular {
            return Ok(spectrum);
        }
    }
    Err(HeredError::TriangularizationFailed(SCHUR_ATTEMPTS))
}

fn monomial(vals: &[Complex64], exps: &[usize]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (v, &e) in vals.iter().zip(exps) {
        for _ in 0..e {
            acc *= v;
        }
    }
    acc
}

/// Evaluate h at a point pair: x from the domain and ybar the coordinatewise
/// conjugate of the second point. Returns sum c_{ab} ybar^b x^a.
pub fn hered_eval_point(
    h: &HereditaryPolynomial,
    x: &[Complex64],
    ybar: &[Complex64],
) -> Complex64 {
    assert_eq!(x.len(), h.dim, "x has the wrong dimension");
    assert_eq!(ybar.len(), h.dim, "ybar has the wrong dimension");
    let mut acc = Complex64::default();
    for ((alpha, beta), &c) in &h.terms {
        acc += c * monomial(ybar, beta) * monomial(x, alpha);
    }
    acc
}

/// Evaluate h at a commuting tuple: h(T) = sum c_{ab} (T*)^b T^a, every
/// starred factor to the left of every unstarred one.
pub fn hered_eval_tuple(
    h: &HereditaryPolynomial,
    t: &CommutingTuple,
) -> Result<ComplexMatrix, HeredError> {
    if h.dim != t.dim() {
        return Err(HeredError::DimensionMismatch(h.dim, t.dim()));
    }
    let n = t.size();
    let mut max_exp = vec![0usize; h.dim];
    for (alpha, beta) in h.terms.keys() {
        for i in 0..h.dim {
            max_exp[i] = max_exp[i].max(alpha[i]).max(beta[i]);
        }
    }
    let id = ComplexMatrix::identity(n)?;
    let mut powers: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(h.dim);
    for (i, m) in t.matrices().iter().enumerate() {
        let mut ps = vec![id.clone()];
        for k in 1..=max_exp[i] {
            let next = ps[k - 1].matmul(m)?;
            ps.push(next);
        }
        powers.push(ps);
    }
    let tuple_power = |exps: &[usize]| -> Result<ComplexMatrix, HeredError> {
        let mut acc = id.clone();
        for (i, &e) in exps.iter().enumerate() {
            if e > 0 {
                acc = acc.matmul(&powers[i][e])?;
            }
        }
        Ok(acc)
    };
    let mut out = ComplexMatrix::zeros(n, n)?;
    for ((alpha, beta), &c) in &h.terms {
        let ta = tuple_power(alpha)?;
        let tb = tuple_power(beta)?;
        out = out.add(&tb.adjoint().matmul(&ta)?.scale(c))?;
    }
    Ok(out)
}

/// Conjugation product g^vee . h . g for an x-only factor g: pointwise
/// conj(g(y)) h(x, ybar) g(x), so that (g^vee h g)(T) = g(T)* h(T) g(T).
pub fn sandwich(
    h: &HereditaryPolynomial,
    g: &HereditaryPolynomial,
) -> Result<HereditaryPolynomial, HeredError> {
    if h.dim != g.dim {
        return Err(HeredError::DimensionMismatch(h.dim, g.dim));
    }
    if let Some((_, beta)) = g.terms.keys().find(|(_, b)| b.iter().any(|&e| e != 0)) {
        return Err(HeredError::NotXOnly(beta.clone()));
    }
    let mut out = HereditaryPolynomial::new(h.dim);
    for ((alpha, beta), &c) in &h.terms {
        for ((ga, _), &cg) in &g.terms {
            for ((gb, _), &cgb) in &g.terms {
                let a: Vec<usize> = alpha.iter().zip(ga).map(|(x, y)| x + y).collect();
                let b: Vec<usize> = beta.iter().zip(gb).map(|(x, y)| x + y).collect();
                out.add_term(&a, &b, c * cg * cgb.conj())?;
            }
        }
    }
    Ok(out)
}

/// Positivity of h(T): requires Hermitian-symmetric coefficients
/// (c_{ab} = conj(c_{ba}); asymmetric input is rejected, not repaired),
/// evaluates, checks the result is Hermitian within `tol`, and reports
/// (min_eig >= -tol, min_eig).
pub fn positivity(
    h: &HereditaryPolynomial,
    t: &CommutingTuple,
    tol: f64,
) -> Result<(bool, f64), HeredError> {
    let coeff_scale = 1.0 + h.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
    let sym_dev = h.hermitian_symmetry_deviation();
    if sym_dev > 1e-12 * coeff_scale {
        return Err(HeredError::NotHermitianSymmetric(sym_dev));
    }
    let m = hered_eval_tuple(h, t)?;
    let herm_dev = m.hermitian_deviation();
    if herm_dev > tol {
        return Err(HeredError::EvaluationNotHermitian(herm_dev));
    }
    let sym = m.add(&m.adjoint())?.scale(Complex64::new(0.5, 0.0));
    let eig = hermitian_eigenvalues(&sym, 1e-10)?;
    let min_eig = eig.eigenvalues[0];
    Ok((min_eig >= -tol, min_eig))
}

/// True iff the closed unit disc is a spectral domain for T: all eigenvalues
/// strictly inside the disc and operator norm at most 1 + 1e-12.
pub fn spectral_domain_check_disc(t: &ComplexMatrix) -> Result<bool, HeredError> {
    if !t.is_square() {
        return Err(MatrixError::NotSquare(t.rows(), t.cols()).into());
    }
    let (_, r) = schur_triangularize(t, SCHUR_TOL)?;
    let spectrum_ok = (0..t.rows()).all(|k| r[(k, k)].norm() < 1.0);
    Ok(spectrum_ok && operator_norm(t)? <= 1.0 + 1e-12)
}

/// Membership test for the magic function Phi_omega against a commuting pair
/// of contractions with joint spectrum in the open bidisc: forms
/// S = (T1 + T2, T1 T2) and checks positivity of the cleared-denominator
/// form q(S). Returns (psd, min_eig).
pub fn magic_membership_test_g(
    omega: CirclePoint,
    t1: &ComplexMatrix,
    t2: &ComplexMatrix,
    tol: f64,
) -> Result<(bool, f64), HeredError> {
    let spectrum = joint_spectrum(&[t1.clone(), t2.clone()], COMMUTATION_TOL)?;
    for t in [t1, t2] {
        let norm = operator_norm(t)?;
        if norm > 1.0 + 1e-12 {
            return Err(HeredError::NotContraction(norm));
        }
    }
    let worst = spectrum
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if worst >= 1.0 {
        return Err(HeredError::SpectrumOutsideDomain(worst));
    }
    let s1 = t1.add(t2)?;
    let s2 = t1.matmul(t2)?;
    let s = CommutingTuple::new(vec![s1, s2])?;
    positivity(&HereditaryPolynomial::magic_form(omega), &s, tol)
}

/// Quadratic form sum_{i,j} c_i conj(c_j) h(lambda_i, conj(lambda_j)): the
/// value <h(T)c, c> in the realization that encodes h as a kernel on the
/// sample points. Real part returned; the sum is real whenever h is
/// Hermitian-symmetric.
pub fn hered_cd_psd_bridge(
    h: &HereditaryPolynomial,
    points: &[Vec<Complex64>],
    coeffs: &[Complex64],
) -> Result<f64, HeredError> {
    if points.len() != coeffs.len() {
        return Err(HeredError::DimensionMismatch(points.len(), coeffs.len()));
    }
    for p in points {
        if p.len() != h.dim {
            return Err(HeredError::DimensionMismatch(h.dim, p.len()));
        }
    }
    let ybars: Vec<Vec<Complex64>> = points
        .iter()
        .map(|p| p.iter().map(|z| z.conj()).collect())
        .collect();
    let mut sum = Complex64::default();
    for (i, ci) in coeffs.iter().enumerate() {
        for (j, cj) in coeffs.iter().enumerate() {
            sum += ci * cj.conj() * hered_eval_point(h, &points[i], &ybars[j]);
        }
    }
    // Cross-check the tuple evaluator against pointwise evaluation on the
    // diagonal realization T_k = diag(lambda_1[k], ..., lambda_N[k]).
    #[cfg(debug_assertions)]
    if !points.is_empty() && points.len() <= crate::matrixnum::MAX_DIM {
        let mats: Result<Vec<ComplexMatrix>, MatrixError> = (0..h.dim)
            .map(|k| {
                let diag: Vec<Complex64> = points.iter().map(|p| p[k]).collect();
                ComplexMatrix::diagonal(&diag)
            })
            .collect();
        if let Ok(t) = mats.map_err(HeredError::from).and_then(CommutingTuple::new) {
            let ht = hered_eval_tuple(h, &t).expect("dimensions match by construction");
            for (m, p) in points.iter().enumerate() {
                let direct = hered_eval_point(h, p, &ybars[m]);
                debug_assert!(
                    (ht[(m, m)] - direct).norm() <= 1e-10 * (1.0 + direct.norm()),
                    "diagonal tuple evaluation disagrees with pointwise evaluation",
                );
            }
        }
    }
    Ok(sum.re)
}

fn check_poly_map(
    alpha: &[HereditaryPolynomial],
    expect_components: usize,
) -> Result<usize, HeredError> {
    if alpha.len() != expect_components {
        return Err(HeredError::DimensionMismatch(
            expect_components,
            alpha.len(),
        ));
    }
    let d1 = alpha
        .first()
        .map(|a| a.dim)
        .ok_or(HeredError::DimensionMismatch(1, 0))?;
    for a in alpha {
        if a.dim != d1 {
            return Err(HeredError::DimensionMismatch(d1, a.dim));
        }
        if let Some((_, beta)) = a.terms.keys().find(|(_, b)| b.iter().any(|&e| e != 0)) {
            return Err(HeredError::NotXOnly(beta.clone()));
        }
    }
    Ok(d1)
}

/// Pullback of h along a polynomial map alpha: evaluates
/// h(alpha(x), alpha^vee(ybar)) with alpha^vee(z) = conj(alpha(zbar)). The
/// map is given as h.dim x-only polynomials in a common number of variables.
pub fn pullback_point(
    h: &HereditaryPolynomial,
    alpha: &[HereditaryPolynomial],
    x: &[Complex64],
    ybar: &[Complex64],
) -> Result<Complex64, HeredError> {
    let d1 = check_poly_map(alpha, h.dim)?;
    if x.len() != d1 || ybar.len() != d1 {
        return Err(HeredError::DimensionMismatch(d1, x.len()));
    }
    let zeros = vec![Complex64::default(); d1];
    let ax: Vec<Complex64> = alpha
        .iter()
        .map(|a| hered_eval_point(a, x, &zeros))
        .collect();
    let y: Vec<Complex64> = ybar.iter().map(|z| z.conj()).collect();
    let aybar: Vec<Complex64> = alpha
        .iter()
        .map(|a| hered_eval_point(a, &y, &zeros).conj())
        .collect();
    Ok(hered_eval_point(h, &ax, &aybar))
}

/// Apply an x-only polynomial map componentwise to a commuting tuple:
/// alpha(T) = (alpha_1(T), ..., alpha_m(T)). The components are polynomials
/// in commuting matrices, so the image tuple commutes again; the joint
/// spectrum satisfies the spectral mapping sigma(alpha(T)) = alpha(sigma(T)).
pub fn apply_poly_map(
    alpha: &[HereditaryPolynomial],
    t: &CommutingTuple,
) -> Result<CommutingTuple, HeredError> {
    let d1 = check_poly_map(alpha, alpha.len())?;
    if d1 != t.dim() {
        return Err(HeredError::DimensionMismatch(d1, t.dim()));
    }
    let mats = alpha
        .iter()
        .map(|a| hered_eval_tuple(a, t))
        .collect::<Result<Vec<_>, _>>()?;
    CommutingTuple::new(mats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Non-normal commuting pair built as polynomials in one upper
    /// triangular seed matrix; commutes exactly up to roundoff.
    fn poly_pair() -> (ComplexMatrix, ComplexMatrix) {
        let seed = ComplexMatrix::new(
            3,
            3,
            vec![
                c(0.2, 0.1),
                c(0.8, -0.3),
                c(0.1, 0.4),
                c(0.0, 0.0),
                c(-0.1, 0.2),
                c(0.7, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.3, -0.2),
            ],
        )
        .unwrap();
        let id = ComplexMatrix::identity(3).unwrap();
        let sq = seed.matmul(&seed).unwrap();
        let t1 = id
            .scale(c(0.4, 0.0))
            .add(&seed.scale(c(0.3, 0.1)))
            .unwrap()
            .add(&sq.scale(c(-0.2, 0.0)))
            .unwrap();
        let t2 = id
            .scale(c(0.1, 0.0))
            .add(&seed.scale(c(-0.5, 0.0)))
            .unwrap()
            .add(&sq.scale(c(0.1, -0.2)))
            .unwrap();
        (t1, t2)
    }

    fn contraction_pair() -> (ComplexMatrix, ComplexMatrix) {
        let (t1, t2) = poly_pair();
        let s1 = operator_norm(&t1).unwrap() * 1.02;
        let s2 = operator_norm(&t2).unwrap() * 1.02;
        (t1.scale(c(1.0 / s1, 0.0)), t2.scale(c(1.0 / s2, 0.0)))
    }

    #[test]
    fn eval_point_basics() {
        let one = HereditaryPolynomial::one(1);
        assert_eq!(
            hered_eval_point(&one, &[c(0.3, 0.2)], &[c(-0.1, 0.5)]),
            c(1.0, 0.0)
        );
        let h0 = HereditaryPolynomial::h0();
        let x = c(0.3, -0.2);
        let y = c(0.1, 0.4);
        let got = hered_eval_point(&h0, &[x], &[y.conj()]);
        assert!((got - (c(1.0, 0.0) - y.conj() * x)).norm() < 1e-15);
        assert_eq!(
            hered_eval_point(&h0, &[c(0.0, 0.0)], &[c(0.0, 0.0)]),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn add_term_merges_and_prunes() {
        let mut h = HereditaryPolynomial::new(2);
        h.add_term(&[1, 0], &[0, 1], c(2.0, 1.0)).unwrap();
        h.add_term(&[1, 0], &[0, 1], c(-2.0, -1.0)).unwrap();
        assert_eq!(h.num_terms(), 0);
        assert!(h.add_term(&[1], &[0, 0], c(1.0, 0.0)).is_err());
        assert!(h.add_term(&[1, 0], &[0, 0], c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn vee_and_symmetry() {
        let q = HereditaryPolynomial::magic_form(CirclePoint::from_angle(0.7));
        assert_eq!(q.vee(), q);
        assert!(q.hermitian_symmetry_deviation() < 1e-15);
        let mut asym = HereditaryPolynomial::new(1);
        asym.add_term(&[1], &[0], c(1.0, 0.0)).unwrap();
        assert!(asym.hermitian_symmetry_deviation() > 0.9);
    }

    #[test]
    fn royal_pairs_reduce_magic_form_to_szego_numerator() {
        // q at ((2z, z^2), (2w, w^2)) factors as
        // 4 (1 - omega z) conj(1 - omega w) (1 - conj(w) z).
        let omegas = [
            CirclePoint::one(),
            CirclePoint::from_angle(0.7),
            CirclePoint::from_angle(-2.1),
        ];
        let samples = [
            (c(0.3, 0.4), c(-0.2, 0.5)),
            (c(-0.7, 0.1), c(0.0, 0.6)),
            (c(0.05, -0.85), c(0.3, 0.0)),
        ];
        for om in omegas {
            let q = HereditaryPolynomial::magic_form(om);
            let w_om = om.value();
            for (z, w) in samples {
                let x = [2.0 * z, z * z];
                let ybar = [(2.0 * w).conj(), (w * w).conj()];
                let val = hered_eval_point(&q, &x, &ybar);
                let denom = (c(2.0, 0.0) - w_om.conj() * ybar[0]) * (c(2.0, 0.0) - w_om * x[0]);
                let expected = c(1.0, 0.0) - w.conj() * z;
                assert!((val / denom - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eval_tuple_identity_and_h0() {
        let a = ComplexMatrix::new(
            2,
            2,
            vec![c(0.0, 0.0), c(0.9, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let t = CommutingTuple::new(vec![a.clone()]).unwrap();
        let one = HereditaryPolynomial::one(1);
        let id = ComplexMatrix::identity(2).unwrap();
        assert!(
            hered_eval_tuple(&one, &t)
                .unwrap()
                .sub(&id)
                .unwrap()
                .max_abs_entry()
                < 1e-15
        );
        // h0(T) = 1 - T*T = diag(1, 1 - 0.81).
        let h0t = hered_eval_tuple(&HereditaryPolynomial::h0(), &t).unwrap();
        assert!((h0t[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((h0t[(1, 1)] - c(0.19, 0.0)).norm() < 1e-15);
        let (psd, min_eig) = positivity(&HereditaryPolynomial::h0(), &t, 1e-12).unwrap();
        assert!(psd);
        assert!((min_eig - 0.19).abs() < 1e-13);
    }

    #[test]
    fn h0_squared_fails_past_the_norm_threshold() {
        // For T(a) = [[0, a], [0, 0]], h0^2(T) = 1 - 2 T*T with min
        // eigenvalue exactly 1 - 2a^2.
        for a in [0.1, 0.5, 1.0 / 2.0f64.sqrt(), 0.75, 0.9, 1.0] {
            let t = CommutingTuple::new(vec![ComplexMatrix::new(
                2,
                2,
                vec![c(0.0, 0.0), c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            )
            .unwrap()])
            .unwrap();
            let (psd, min_eig) =
                positivity(&HereditaryPolynomial::h0_squared(), &t, 1e-12).unwrap();
            assert!((min_eig - (1.0 - 2.0 * a * a)).abs() < 1e-12);
            assert_eq!(psd, 1.0 - 2.0 * a * a >= -1e-12);
        }
    }

    #[test]
    fn positivity_rejects_asymmetric_h() {
        let mut h = HereditaryPolynomial::new(1);
        h.add_term(&[1], &[0], c(1.0, 0.0)).unwrap();
        let t = CommutingTuple::new(vec![ComplexMatrix::identity(2).unwrap()]).unwrap();
        assert!(matches!(
            positivity(&h, &t, 1e-12),
            Err(HeredError::NotHermitianSymmetric(_))
        ));
    }

    #[test]
    fn sandwich_identity_and_monomial() {
        let h0 = HereditaryPolynomial::h0();
        assert_eq!(sandwich(&h0, &HereditaryPolynomial::one(1)).unwrap(), h0);
        let mut g = HereditaryPolynomial::new(1);
        g.add_term(&[1], &[0], c(1.0, 0.0)).unwrap();
        let hg = sandwich(&HereditaryPolynomial::one(1), &g).unwrap();
        assert_eq!(hg.num_terms(), 1);
        assert_eq!(hg.coefficient(&[1], &[1]), c(1.0, 0.0));
        assert!(matches!(
            sandwich(&h0, &HereditaryPolynomial::h0()),
            Err(HeredError::NotXOnly(_))
        ));
    }

    #[test]
    fn sandwich_matches_matrix_conjugation() {
        let (t1, t2) = poly_pair();
        let t = CommutingTuple::new(vec![t1, t2]).unwrap();
        let q = HereditaryPolynomial::magic_form(CirclePoint::from_angle(1.3));
        let mut g = HereditaryPolynomial::new(2);
        g.add_term(&[0, 0], &[0, 0], c(0.7, -0.2)).unwrap();
        g.add_term(&[1, 0], &[0, 0], c(-0.4, 0.1)).unwrap();
        g.add_term(&[0, 2], &[0, 0], c(0.3, 0.3)).unwrap();
        let lhs = hered_eval_tuple(&sandwich(&q, &g).unwrap(), &t).unwrap();
        let gt = hered_eval_tuple(&g, &t).unwrap();
        let rhs = gt
            .adjoint()
            .matmul(&hered_eval_tuple(&q, &t).unwrap())
            .unwrap()
            .matmul(&gt)
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs_entry() < 1e-10);
    }

    #[test]
    fn rank_one_squares_stay_psd() {
        // g^vee g evaluates as g(T)* g(T), psd for every commuting tuple.
        let (t1, t2) = poly_pair();
        let t = CommutingTuple::new(vec![t1, t2]).unwrap();
        let mut g = HereditaryPolynomial::new(2);
        g.add_term(&[0, 0], &[0, 0], c(-0.2, 0.9)).unwrap();
        g.add_term(&[1, 1], &[0, 0], c(1.1, 0.0)).unwrap();
        g.add_term(&[2, 0], &[0, 0], c(0.0, -0.6)).unwrap();
        let h = sandwich(&HereditaryPolynomial::one(2), &g).unwrap();
        let (psd, min_eig) = positivity(&h, &t, 1e-10).unwrap();
        assert!(psd, "min_eig = {min_eig}");
    }

    #[test]
    fn joint_spectrum_diagonal_and_nilpotent() {
        let d1 = ComplexMatrix::diagonal(&[c(0.1, 0.2), c(-0.4, 0.0), c(0.3, -0.3)]).unwrap();
        let d2 = ComplexMatrix::diagonal(&[c(0.5, 0.0), c(0.2, 0.1), c(0.0, -0.6)]).unwrap();
        let spec = joint_spectrum(&[d1.clone(), d2.clone()], 1e-10).unwrap();
        let mut found: Vec<(Complex64, Complex64)> = spec.iter().map(|p| (p[0], p[1])).collect();
        found.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap());
        let mut expected = vec![
            (c(0.1, 0.2), c(0.5, 0.0)),
            (c(-0.4, 0.0), c(0.2, 0.1)),
            (c(0.3, -0.3), c(0.0, -0.6)),
        ];
        expected.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap());
        for (f, e) in found.iter().zip(&expected) {
            assert!((f.0 - e.0).norm() < 1e-9 && (f.1 - e.1).norm() < 1e-9);
        }

        let n1 = ComplexMatrix::new(
            2,
            2,
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let n2 = n1.scale(c(2.0, 0.0));
        for point in joint_spectrum(&[n1, n2], 1e-10).unwrap() {
            assert!(point[0].norm() < 1e-9 && point[1].norm() < 1e-9);
        }
    }

    #[test]
    fn joint_spectrum_rejects_noncommuting() {
        let a = ComplexMatrix::new(
            2,
            2,
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let b = a.adjoint();
        assert!(matches!(
            joint_spectrum(&[a, b], 1e-10),
            Err(HeredError::CommutationViolated(_))
        ));
    }

    #[test]
    fn spectral_mapping_through_sym() {
        // alpha = (x1 + x2, x1 x2): the joint spectrum of alpha(T) is the
        // image of the joint spectrum of T.
        let (t1, t2) = contraction_pair();
        let t = CommutingTuple::new(vec![t1, t2]).unwrap();
        let mut a1 = HereditaryPolynomial::new(2);
        a1.add_term(&[1, 0], &[0, 0], c(1.0, 0.0)).unwrap();
        a1.add_term(&[0, 1], &[0, 0], c(1.0, 0.0)).unwrap();
        let mut a2 = HereditaryPolynomial::new(2);
        a2.add_term(&[1, 1], &[0, 0], c(1.0, 0.0)).unwrap();
        let image = apply_poly_map(&[a1, a2], &t).unwrap();
        let mut expected: Vec<(Complex64, Complex64)> = t
            .joint_spectrum()
            .iter()
            .map(|p| (p[0] + p[1], p[0] * p[1]))
            .collect();
        let mut got: Vec<(Complex64, Complex64)> = image
            .joint_spectrum()
            .iter()
            .map(|p| (p[0], p[1]))
            .collect();
        let key = |p: &(Complex64, Complex64)| (p.0.re, p.0.im, p.1.re, p.1.im);
        expected.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (g, e) in got.iter().zip(&expected) {
            assert!((g.0 - e.0).norm() < 1e-8 && (g.1 - e.1).norm() < 1e-8);
        }
    }

    #[test]
    fn joint_spectrum_unitary_invariance() {
        let (t1, t2) = poly_pair();
        // Unitary from a Schur factorization of a dense matrix.
        let dense = ComplexMatrix::new(
            3,
            3,
            vec![
                c(0.3, 0.4),
                c(-0.5, 0.2),
                c(0.1, 0.0),
                c(0.7, -0.1),
                c(0.0, 0.3),
                c(-0.2, 0.6),
                c(0.4, 0.4),
                c(0.2, -0.7),
                c(0.5, 0.1),
            ],
        )
        .unwrap();
        let (u, _) = schur_triangularize(&dense, 1e-8).unwrap();
        let uh = u.adjoint();
        let s1 = uh.matmul(&t1).unwrap().matmul(&u).unwrap();
        let s2 = uh.matmul(&t2).unwrap().matmul(&u).unwrap();
        let spec_a = joint_spectrum(&[t1, t2], 1e-9).unwrap();
        let spec_b = joint_spectrum(&[s1, s2], 1e-9).unwrap();
        let key = |p: &Vec<Complex64>| (p[0].re, p[0].im, p[1].re, p[1].im);
        let mut sa = spec_a;
        let mut sb = spec_b;
        sa.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        sb.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (a, b) in sa.iter().zip(&sb) {
            assert!((a[0] - b[0]).norm() < 1e-8 && (a[1] - b[1]).norm() < 1e-8);
        }
    }

    #[test]
    fn point_tuple_consistency_on_diagonal_tuples() {
        let points = [
            vec![c(0.2, 0.3), c(-0.1, 0.1)],
            vec![c(-0.5, 0.0), c(0.3, -0.2)],
            vec![c(0.0, 0.6), c(0.0, 0.0)],
        ];
        let mats: Vec<ComplexMatrix> = (0..2)
            .map(|k| {
                let diag: Vec<Complex64> = points.iter().map(|p| p[k]).collect();
                ComplexMatrix::diagonal(&diag).unwrap()
            })
            .collect();
        let t = CommutingTuple::new(mats).unwrap();
        let q = HereditaryPolynomial::magic_form(CirclePoint::from_angle(0.4));
        let qt = hered_eval_tuple(&q, &t).unwrap();
        for (m, p) in points.iter().enumerate() {
            let ybar: Vec<Complex64> = p.iter().map(|z| z.conj()).collect();
            let direct = hered_eval_point(&q, p, &ybar);
            assert!((qt[(m, m)] - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn spectral_domain_disc_cases() {
        let zero = ComplexMatrix::zeros(2, 2).unwrap();
        assert!(spectral_domain_check_disc(&zero).unwrap());
        let nil = ComplexMatrix::new(
            2,
            2,
            vec![c(0.0, 0.0), c(0.9, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert!(spectral_domain_check_disc(&nil).unwrap());
        let escape = ComplexMatrix::diagonal(&[c(0.5, 0.0), c(1.5, 0.0)]).unwrap();
        assert!(!spectral_domain_check_disc(&escape).unwrap());
        // Spectrum inside the disc but the norm escapes.
        let sheared = ComplexMatrix::new(
            2,
            2,
            vec![c(0.5, 0.0), c(1.2, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        )
        .unwrap();
        assert!(!spectral_domain_check_disc(&sheared).unwrap());
    }

    #[test]
    fn magic_membership_on_diagonal_and_nonnormal_pairs() {
        let d1 = ComplexMatrix::diagonal(&[c(0.3, 0.2), c(-0.4, 0.1)]).unwrap();
        let d2 = ComplexMatrix::diagonal(&[c(0.1, -0.5), c(0.2, 0.2)]).unwrap();
        for angle in [0.0, 0.9, -1.7, 2.8] {
            let (psd, min_eig) =
                magic_membership_test_g(CirclePoint::from_angle(angle), &d1, &d2, 1e-9).unwrap();
            assert!(psd, "angle {angle}: min_eig = {min_eig}");
        }
        let (t1, t2) = contraction_pair();
        for angle in [0.0, 0.9, -1.7, 2.8] {
            let (psd, min_eig) =
                magic_membership_test_g(CirclePoint::from_angle(angle), &t1, &t2, 1e-9).unwrap();
            assert!(psd, "angle {angle}: min_eig = {min_eig}");
        }
    }

    #[test]
    fn magic_membership_reports_precondition_violations() {
        let big = ComplexMatrix::diagonal(&[c(1.5, 0.0), c(0.2, 0.0)]).unwrap();
        let small = ComplexMatrix::diagonal(&[c(0.1, 0.0), c(0.2, 0.0)]).unwrap();
        assert!(magic_membership_test_g(CirclePoint::one(), &big, &small, 1e-9).is_err());
        let a = ComplexMatrix::new(
            2,
            2,
            vec![c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            magic_membership_test_g(CirclePoint::one(), &a, &a.adjoint(), 1e-9),
            Err(HeredError::CommutationViolated(_))
        ));
    }

    #[test]
    fn magic_form_agrees_with_phi_sandwich_on_g_points() {
        // q(x, ybar) = (2 - omega s_y)^bar (2 - omega s_x)(1 - Phi(y)^bar Phi(x)).
        use crate::disc_geometry::DiscPoint;
        use crate::symm_bidisc::{phi, sym};
        let d = |re, im| DiscPoint::new(c(re, im)).unwrap();
        let om = CirclePoint::from_angle(-0.6);
        let w_om = om.value();
        let q = HereditaryPolynomial::magic_form(om);
        let pairs = [
            (
                sym(d(0.3, 0.1), d(-0.2, 0.4)),
                sym(d(0.5, -0.3), d(0.1, 0.2)),
            ),
            (
                sym(d(-0.6, 0.2), d(0.0, 0.0)),
                sym(d(0.2, 0.7), d(-0.1, -0.4)),
            ),
        ];
        for (gx, gy) in pairs {
            let x = [gx.s(), gx.p()];
            let ybar = [gy.s().conj(), gy.p().conj()];
            let qval = hered_eval_point(&q, &x, &ybar);
            let phix = phi(om, &gx).value();
            let phiy = phi(om, &gy).value();
            let expected = (c(2.0, 0.0) - w_om * gy.s()).conj()
                * (c(2.0, 0.0) - w_om * gx.s())
                * (c(1.0, 0.0) - phiy.conj() * phix);
            assert!((qval - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn bridge_is_the_kernel_quadratic_form() {
        // h = 1: the form collapses to |sum c_i|^2.
        let one = HereditaryPolynomial::one(1);
        let points = vec![vec![c(0.3, 0.0)], vec![c(0.0, 0.4)]];
        let coeffs = [c(1.0, 0.0), c(0.0, 1.0)];
        let got = hered_cd_psd_bridge(&one, &points, &coeffs).unwrap();
        assert!((got - (c(1.0, 0.0) + c(0.0, 1.0)).norm_sqr()).abs() < 1e-14);

        // h0: sum c_i conj(c_j) (1 - conj(l_j) l_i) has a closed form.
        let h0 = HereditaryPolynomial::h0();
        let a = c(0.3, 0.0);
        let b = c(0.0, 0.4);
        let c1 = c(0.5, -0.2);
        let c2 = c(-0.1, 0.8);
        let expected = (c1 + c2).norm_sqr() - (c1 * a + c2 * b).norm_sqr();
        let got = hered_cd_psd_bridge(&h0, &points, &[c1, c2]).unwrap();
        assert!((got - expected).abs() < 1e-14);

        // Rank-1 squares give |sum c_i g(l_i)|^2 >= 0.
        let mut g = HereditaryPolynomial::new(1);
        g.add_term(&[0], &[0], c(0.3, 0.5)).unwrap();
        g.add_term(&[2], &[0], c(-1.2, 0.1)).unwrap();
        let square = sandwich(&HereditaryPolynomial::one(1), &g).unwrap();
        let zeros = vec![c(0.0, 0.0)];
        let gv = |z: Complex64| hered_eval_point(&g, &[z], &zeros);
        let expected = (c1 * gv(a) + c2 * gv(b)).norm_sqr();
        let got = hered_cd_psd_bridge(&square, &points, &[c1, c2]).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!(got >= 0.0);
    }

    #[test]
    fn pullback_identity_and_sym() {
        let q = HereditaryPolynomial::magic_form(CirclePoint::from_angle(0.25));
        let mut id1 = HereditaryPolynomial::new(2);
        id1.add_term(&[1, 0], &[0, 0], c(1.0, 0.0)).unwrap();
        let mut id2 = HereditaryPolynomial::new(2);
        id2.add_term(&[0, 1], &[0, 0], c(1.0, 0.0)).unwrap();
        let x = [c(0.3, 0.1), c(-0.2, 0.05)];
        let ybar = [c(0.1, -0.3), c(0.05, 0.2)];
        let direct = hered_eval_point(&q, &x, &ybar);
        let pulled = pullback_point(&q, &[id1.clone(), id2.clone()], &x, &ybar).unwrap();
        assert!((pulled - direct).norm() < 1e-15);

        // alpha = sym map (z + w, zw) in two disc variables.
        let mut s1 = HereditaryPolynomial::new(2);
        s1.add_term(&[1, 0], &[0, 0], c(1.0, 0.0)).unwrap();
        s1.add_term(&[0, 1], &[0, 0], c(1.0, 0.0)).unwrap();
        let mut s2 = HereditaryPolynomial::new(2);
        s2.add_term(&[1, 1], &[0, 0], c(1.0, 0.0)).unwrap();
        let zw = [c(0.4, 0.2), c(-0.3, 0.3)];
        let vw = [c(0.1, -0.5), c(0.2, 0.1)];
        let vwbar: Vec<Complex64> = vw.iter().map(|z| z.conj()).collect();
        let pulled = pullback_point(&q, &[s1, s2], &zw, &vwbar).unwrap();
        let xs = [zw[0] + zw[1], zw[0] * zw[1]];
        let ys = [vw[0] + vw[1], vw[0] * vw[1]];
        let ysbar: Vec<Complex64> = ys.iter().map(|z| z.conj()).collect();
        let direct = hered_eval_point(&q, &xs, &ysbar);
        assert!((pulled - direct).norm() < 1e-12);
    }

    #[test]
    fn json_round_trips() {
        let q = HereditaryPolynomial::magic_form(CirclePoint::from_angle(0.3));
        let text = serde_json::to_string(&q).unwrap();
        assert!(text.contains("\"alpha\"") && text.contains("\"beta\""));
        let back: HereditaryPolynomial = serde_json::from_str(&text).unwrap();
        assert_eq!(back, q);

        let (t1, t2) = contraction_pair();
        let t = CommutingTuple::new(vec![t1, t2]).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        let back: CommutingTuple = serde_json::from_str(&text).unwrap();
        for (a, b) in t.matrices().iter().zip(back.matrices()) {
            assert!(a.sub(b).unwrap().max_abs_entry() < 1e-15);
        }
        // Matrix wire format is {"rows", "cols", "entries": [[re, im], ...]}.
        let val = serde_json::to_value(&t.matrices()[0]).unwrap();
        assert!(val["entries"][0].is_array());

        let bad: Result<HereditaryPolynomial, _> = serde_json::from_str("{\"dim\":0,\"terms\":[]}");
        assert!(bad.is_err());
    }
}
