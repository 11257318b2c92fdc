//! Caratheodory distance on the symmetrised bidisc.
//!
//! The distance is realized by magic functions: C(x, y) is the supremum
//! over |omega| = 1 of the pseudohyperbolic distance between Phi_omega(x)
//! and Phi_omega(y), and that quantity has a closed form as the modulus
//! of a quotient of quadratics in omega. The extremal search scans a
//! uniform angle grid and refines every local maximum by golden-section
//! iteration.
//!
//! A second, independent route to the same number goes through operator
//! theory: 2x2 tuples T(u) with prescribed joint eigenvalues, the von
//! Neumann-type inequality for Phi_omega(T(u)), and the Gram threshold
//! sup |<u1, u2>|^2 = 1 - C^2.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::disc_geometry::{rho, CirclePoint, MoebiusMap};
use crate::matrixnum::{inner, ComplexMatrix, MatrixError};
use crate::symm_bidisc::{phi, GPoint};

/// Two refined maximizers agree in value when within this tolerance;
/// uniqueness requires the runner-up to be lower by more than it.
pub const VALUE_TOL: f64 = 1e-9;

/// Objective spread below which the objective is treated as constant in
/// omega (royal or flat pairs, or equal points).
const CONSTANT_SPREAD: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CaraError {
    #[error("the two points coincide; the extremal problem is degenerate")]
    DegenerateInput,
    #[error("basis vector is not unit: norm deviates by {0:.3e}")]
    NotUnit(f64),
    #[error("basis vectors are numerically dependent: |det| = {0:.3e}")]
    DependentBasis(f64),
    #[error("tuple construction lost accuracy: eigen-action residual {0:.3e}")]
    IllConditioned(f64),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Closed-form objective: C_G(x, y) = sup over |omega| = 1 of
/// |N(omega) / D(omega)| with
///   N = (s2 p1 - s1 p2) w^2 + 2 (p2 - p1) w + (s1 - s2)
///   D = (s1 - conj(s2) p1) w^2 - 2 (1 - p1 conj(p2)) w + (conj(s2) - s1 conj(p2))
/// for x = (s1, p1), y = (s2, p2). Coefficients are stored degree
/// descending. The quotient equals rho(Phi_omega(x), Phi_omega(y))
/// pointwise, and D does not vanish on the circle for x, y in G.
#[derive(Debug, Clone)]
pub struct CaraObjective {
    pub x: GPoint,
    pub y: GPoint,
    pub numerator: [Complex64; 3],
    pub denominator: [Complex64; 3],
}

impl CaraObjective {
    pub fn new(x: &GPoint, y: &GPoint) -> Self {
        let (s1, p1) = (x.s(), x.p());
        let (s2, p2) = (y.s(), y.p());
        let numerator = [s2 * p1 - s1 * p2, 2.0 * (p2 - p1), s1 - s2];
        let denominator = [
            s1 - s2.conj() * p1,
            -2.0 * (Complex64::new(1.0, 0.0) - p1 * p2.conj()),
            s2.conj() - s1 * p2.conj(),
        ];
        let obj = Self {
            x: *x,
            y: *y,
            numerator,
            denominator,
        };
        debug_assert!(
            (0..8).all(|k| {
                let w = Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / 4.0);
                horner(&obj.denominator, w).norm() > 0.0
            }),
            "denominator vanished on the circle"
        );
        obj
    }

    pub fn eval(&self, omega: CirclePoint) -> f64 {
        let w = omega.value();
        horner(&self.numerator, w).norm() / horner(&self.denominator, w).norm()
    }

    fn eval_angle(&self, theta: f64) -> f64 {
        self.eval(CirclePoint::from_angle(theta))
    }
}

fn horner(coeffs: &[Complex64; 3], w: Complex64) -> Complex64 {
    (coeffs[0] * w + coeffs[1]) * w + coeffs[2]
}

/// The closed-form objective at a single angle.
pub fn objective(x: &GPoint, y: &GPoint, omega: CirclePoint) -> f64 {
    CaraObjective::new(x, y).eval(omega)
}

/// Search parameters for the extremal scan.
#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    /// Uniform angle samples on the circle.
    pub samples: usize,
    /// Golden-section stopping width on the angle.
    pub refine_tolerance: f64,
    /// Arc distance below which two refined maximizers are one cluster.
    pub cluster_radius: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            samples: 1024,
            refine_tolerance: 1e-12,
            cluster_radius: 1e-6,
        }
    }
}

/// Result of the extremal search.
#[derive(Debug, Clone)]
pub struct ExtremalResult {
    pub distance: f64,
    /// One representative per maximizing cluster; for objectives that
    /// are constant in omega these are fixed sample angles.
    pub maximizers: Vec<CirclePoint>,
    /// True when exactly one cluster attains the maximum and the
    /// runner-up is lower by more than VALUE_TOL.
    pub unique: bool,
    pub samples_used: usize,
    /// Achieved agreement between `distance` and the objective at each
    /// reported maximizer.
    pub refined_tolerance: f64,
}

/// Caratheodory distance with the full extremal search: grid scan,
/// golden-section refinement of every local maximum, clustering of the
/// refined angles, and a uniqueness verdict.
pub fn cara_distance(x: &GPoint, y: &GPoint, config: &SearchConfig) -> ExtremalResult {
    let obj = CaraObjective::new(x, y);
    let n = config.samples.max(8);
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| obj.eval_angle(k as f64 * step))
        .collect();
    let vmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);

    if vmax - vmin <= CONSTANT_SPREAD {
        // Constant objective: every omega is extremal (equal points, or a
        // royal or flat pair). Report fixed representatives.
        let reps = [0.0, 0.5, 1.0, 1.5]
            .iter()
            .map(|t| CirclePoint::from_angle(t * std::f64::consts::PI))
            .collect();
        return ExtremalResult {
            distance: vmax,
            maximizers: reps,
            unique: false,
            samples_used: n,
            refined_tolerance: vmax - vmin,
        };
    }

    // Local maxima of the cyclic sample sequence, each refined on its
    // bracket.
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for k in 0..n {
        let prev = values[(k + n - 1) % n];
        let next = values[(k + 1) % n];
        if values[k] >= prev && values[k] >= next {
            let theta = k as f64 * step;
            let (t, v) = golden_max(
                |t| obj.eval_angle(t),
                theta - step,
                theta + step,
                config.refine_tolerance,
            );
            candidates.push((t, v));
        }
    }
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1));

    // Greedy clustering by arc distance and value agreement.
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    for (t, v) in candidates {
        let dup = clusters.iter().any(|&(ct, cv)| {
            arc_distance(ct, t) < config.cluster_radius && (cv - v).abs() <= VALUE_TOL
        });
        if !dup {
            clusters.push((t, v));
        }
    }

    let distance = clusters[0].1;
    let top: Vec<(f64, f64)> = clusters
        .iter()
        .copied()
        .take_while(|&(_, v)| distance - v <= VALUE_TOL)
        .collect();
    let unique = top.len() == 1
        && clusters
            .get(1)
            .is_none_or(|&(_, v)| distance - v > VALUE_TOL);
    let maximizers: Vec<CirclePoint> = top
        .iter()
        .map(|&(t, _)| CirclePoint::from_angle(t))
        .collect();
    let refined_tolerance = top
        .iter()
        .map(|&(_, v)| (distance - v).abs())
        .fold(0.0, f64::max)
        .max(f64::EPSILON);
    ExtremalResult {
        distance,
        maximizers,
        unique,
        samples_used: n,
        refined_tolerance,
    }
}

/// Circular distance between two angles, folded into [0, pi].
pub fn arc_distance(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let d = (a - b).rem_euclid(two_pi);
    d.min(two_pi - d)
}

/// Golden-section maximization on [a, b] down to width `tol`; returns
/// the best sampled point and its value.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    const INVPHI2: f64 = 1.0 - INVPHI;
    let mut h = b - a;
    let mut c = a + INVPHI2 * h;
    let mut d = a + INVPHI * h;
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    while h > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            h = b - a;
            c = a + INVPHI2 * h;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            h = b - a;
            d = a + INVPHI * h;
            fd = f(d);
        }
        let cand = if fc >= fd { (c, fc) } else { (d, fd) };
        if cand.1 > best.1 {
            best = cand;
        }
    }
    best
}

/// The extremal magic function composed with the disc automorphism that
/// normalizes it: omega* realizing the supremum, and the Moebius map m
/// with m(Phi_omega*(x)) = 0 and m(Phi_omega*(y)) = C(x, y) >= 0.
pub fn extremal_magic(x: &GPoint, y: &GPoint) -> Result<(CirclePoint, MoebiusMap), CaraError> {
    if x == y {
        return Err(CaraError::DegenerateInput);
    }
    let res = cara_distance(x, y, &SearchConfig::default());
    let omega = res
        .maximizers
        .first()
        .copied()
        .unwrap_or_else(CirclePoint::one);
    let zx = phi(omega, x);
    let zy = phi(omega, y);
    let c0 = crate::disc_geometry::blaschke(zx, zy.value());
    if c0.norm() == 0.0 {
        return Err(CaraError::DegenerateInput);
    }
    let rotation = CirclePoint::new(c0.conj()).expect("nonzero by the check above");
    Ok((omega, MoebiusMap::new(rotation, zx)))
}

/// Commuting 2x2 tuple with prescribed joint eigenvalues: T_j(u) has
/// matrix diag(x_j, y_j) with respect to the (unit, independent, not
/// necessarily orthogonal) basis u = (u1, u2).
#[derive(Debug, Clone)]
pub struct TupleTu {
    pub u1: [Complex64; 2],
    pub u2: [Complex64; 2],
    pub x: GPoint,
    pub y: GPoint,
    t1: ComplexMatrix,
    t2: ComplexMatrix,
}

impl TupleTu {
    pub fn t1(&self) -> &ComplexMatrix {
        &self.t1
    }

    pub fn t2(&self) -> &ComplexMatrix {
        &self.t2
    }
}

/// Builds T(u) for x, y in G: T_1(u) has eigenpairs (u1, s_x), (u2, s_y)
/// and T_2(u) has (u1, p_x), (u2, p_y).
pub fn build_tuple(
    u1: [Complex64; 2],
    u2: [Complex64; 2],
    x: &GPoint,
    y: &GPoint,
) -> Result<TupleTu, CaraError> {
    let t = build_tuple_unchecked(u1, u2, x, y)?;
    let mut residual: f64 = 0.0;
    for (m, vals) in [(&t.t1, (x.s(), y.s())), (&t.t2, (x.p(), y.p()))] {
        let a1 = m.apply(&t.u1);
        let a2 = m.apply(&t.u2);
        for i in 0..2 {
            residual = residual.max((a1[i] - vals.0 * t.u1[i]).norm());
            residual = residual.max((a2[i] - vals.1 * t.u2[i]).norm());
        }
    }
    if residual > 1e-11 {
        return Err(CaraError::IllConditioned(residual));
    }
    Ok(t)
}

fn build_tuple_unchecked(
    u1: [Complex64; 2],
    u2: [Complex64; 2],
    x: &GPoint,
    y: &GPoint,
) -> Result<TupleTu, CaraError> {
    for u in [&u1, &u2] {
        let norm = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(CaraError::NotUnit((norm - 1.0).abs()));
        }
    }
    let det = u1[0] * u2[1] - u1[1] * u2[0];
    if det.norm() < 1e-12 {
        return Err(CaraError::DependentBasis(det.norm()));
    }
    let basis = ComplexMatrix::new(2, 2, vec![u1[0], u2[0], u1[1], u2[1]])?;
    let basis_inv = basis.inverse()?;
    let make = |ex: Complex64, ey: Complex64| -> Result<ComplexMatrix, CaraError> {
        let d = ComplexMatrix::diagonal(&[ex, ey])?;
        Ok(basis.matmul(&d)?.matmul(&basis_inv)?)
    };
    let t1 = make(x.s(), y.s())?;
    let t2 = make(x.p(), y.p())?;
    Ok(TupleTu {
        u1,
        u2,
        x: *x,
        y: *y,
        t1,
        t2,
    })
}

/// Magic function applied to a commuting pair by functional calculus:
/// Phi_omega(T) = (2 omega T2 - T1) (2 - omega T1)^{-1}.
pub fn phi_of_pair(
    omega: CirclePoint,
    t1: &ComplexMatrix,
    t2: &ComplexMatrix,
) -> Result<ComplexMatrix, CaraError> {
    let w = omega.value();
    let n = t1.rows();
    let id = ComplexMatrix::identity(n)?;
    let num = t2.scale(2.0 * w).sub(t1)?;
    let den = id.scale(Complex64::new(2.0, 0.0)).sub(&t1.scale(w))?;
    Ok(num.matmul(&den.inverse()?)?)
}

/// Both sides of the spectral-calculus criterion at a single omega:
/// lhs: the operator inequality ||Phi_omega(T(u))|| <= 1,
/// rhs: the Gram inequality |<u1, u2>|^2 <= 1 - rho(Phi_omega(x), Phi_omega(y))^2.
/// The two agree except within numerical slack of the boundary.
pub fn stcal_check(t: &TupleTu, omega: CirclePoint) -> Result<(bool, bool), CaraError> {
    let slack = 1e-10;
    let m = phi_of_pair(omega, &t.t1, &t.t2)?;
    let lhs = op_norm_2x2(&m) <= 1.0 + slack;
    let gram = inner(&t.u1, &t.u2).norm_sqr();
    let r = rho(phi(omega, &t.x), phi(omega, &t.y));
    let rhs = gram <= 1.0 - r * r + slack;
    Ok((lhs, rhs))
}

/// Closed-form spectral norm of a 2x2 complex matrix via the Gram
/// matrix eigenvalues.
fn op_norm_2x2(m: &ComplexMatrix) -> f64 {
    debug_assert!(m.rows() == 2 && m.cols() == 2);
    let a = m[(0, 0)];
    let b = m[(0, 1)];
    let c = m[(1, 0)];
    let d = m[(1, 1)];
    // Gram matrix A*A = [[g11, g12], [conj(g12), g22]].
    let g11 = a.norm_sqr() + c.norm_sqr();
    let g22 = b.norm_sqr() + d.norm_sqr();
    let g12_sqr = (a.conj() * b + c.conj() * d).norm_sqr();
    let tr = g11 + g22;
    let det = g11 * g22 - g12_sqr;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    (0.5 * (tr + disc)).max(0.0).sqrt()
}

/// Independent estimate of the Caratheodory distance through the
/// operator-norm criterion: parametrize u1 = (1, 0), u2 = (g, sqrt(1 -
/// g^2)), scan g over `gram_steps` values for admissibility (the norm
/// inequality holding at every sampled omega, with golden refinement of
/// the worst angle), bisect the threshold g*, and report sqrt(1 - g*^2).
///
/// The estimate never falls more than a hair below the scan route and
/// converges to it as omega_samples grows.
pub fn caraform_estimate(
    x: &GPoint,
    y: &GPoint,
    omega_samples: usize,
    gram_steps: usize,
) -> Result<f64, CaraError> {
    if x == y {
        return Err(CaraError::DegenerateInput);
    }
    let omega_samples = omega_samples.max(16);
    let gram_steps = gram_steps.max(4);
    // Conditioning guard: nearly parallel bases make the similarity
    // transform lose more digits than the contract allows.
    let g_cap = 1.0 - 1e-6;

    let sup_norm = |g: f64| -> Result<f64, CaraError> {
        let u1 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let u2 = [
            Complex64::new(g, 0.0),
            Complex64::new((1.0 - g * g).sqrt(), 0.0),
        ];
        let t = build_tuple_unchecked(u1, u2, x, y)?;
        let norm_at = |theta: f64| -> f64 {
            match phi_of_pair(CirclePoint::from_angle(theta), &t.t1, &t.t2) {
                Ok(m) => op_norm_2x2(&m),
                Err(_) => f64::INFINITY,
            }
        };
        let step = 2.0 * std::f64::consts::PI / omega_samples as f64;
        let mut best = (0.0, f64::NEG_INFINITY);
        for k in 0..omega_samples {
            let theta = k as f64 * step;
            let v = norm_at(theta);
            if v > best.1 {
                best = (theta, v);
            }
        }
        let (_, refined) = golden_max(norm_at, best.0 - step, best.0 + step, 1e-10);
        Ok(refined.max(best.1))
    };

    let admissible = |g: f64| -> Result<bool, CaraError> { Ok(sup_norm(g)? <= 1.0) };

    // Grid scan for the admissibility bracket.
    let mut lo = 0.0;
    let mut hi = g_cap;
    let mut found = false;
    for k in 1..gram_steps {
        let g = (k as f64 / gram_steps as f64).min(g_cap);
        if admissible(g)? {
            lo = g;
        } else {
            hi = g;
            found = true;
            break;
        }
        if g >= g_cap {
            break;
        }
    }
    if !found && !admissible(g_cap)? {
        hi = g_cap;
        found = true;
    }
    if !found {
        // Every probed basis is admissible: the threshold sits above the
        // conditioning cap and the estimate bottoms out there.
        return Ok((1.0 - g_cap * g_cap).sqrt());
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if admissible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g_star = 0.5 * (lo + hi);
    Ok((1.0 - g_star * g_star).max(0.0).sqrt())
}
