//! The symmetrised bidisc G = { (z + w, zw) : |z| < 1, |w| < 1 }, its
//! magic functions Phi_omega, the royal and flat geodesics, and the
//! automorphisms obtained by symmetrising disc automorphisms.

use num_complex::Complex64;
use thiserror::Error;

use crate::disc_geometry::{CirclePoint, DiscPoint, MoebiusMap, DISC_MARGIN};

#[derive(Debug, Error)]
pub enum GError {
    #[error("point is not in G: root modulus {0:.17} is not strictly below one")]
    NotInG(f64),
    #[error("non-finite coordinate")]
    NonFinite,
}

/// A point (s, p) of the symmetrised bidisc, with s = z + w and p = zw
/// for a pair z, w in the open unit disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GPoint {
    s: Complex64,
    p: Complex64,
}

impl GPoint {
    /// Validates membership by factoring lambda^2 - s lambda + p; both
    /// roots must be strictly inside the disc with the construction
    /// margin.
    pub fn new(s: Complex64, p: Complex64) -> Result<Self, GError> {
        if !s.re.is_finite() || !s.im.is_finite() || !p.re.is_finite() || !p.im.is_finite() {
            return Err(GError::NonFinite);
        }
        let (r1, r2) = quadratic_roots(s, p);
        let worst = r1.norm().max(r2.norm());
        if worst >= 1.0 - DISC_MARGIN {
            return Err(GError::NotInG(worst));
        }
        Ok(Self { s, p })
    }

    /// Wraps coordinates that lie in G by construction (images of G
    /// points under maps that preserve G).
    pub(crate) fn from_interior(s: Complex64, p: Complex64) -> Self {
        debug_assert!(
            {
                let (r1, r2) = quadratic_roots(s, p);
                r1.norm() < 1.0 && r2.norm() < 1.0
            },
            "constructed point escaped G"
        );
        Self { s, p }
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    pub fn p(&self) -> Complex64 {
        self.p
    }
}

/// Both roots of lambda^2 - s lambda + p = 0, via the numerically stable
/// variant of the quadratic formula (the larger root is computed from
/// the non-cancelling branch, the other as p over it).
fn quadratic_roots(s: Complex64, p: Complex64) -> (Complex64, Complex64) {
    let disc = (s * s - 4.0 * p).sqrt();
    // Pick the branch of the square root that does not cancel against s.
    let d = if (s + disc).norm() >= (s - disc).norm() {
        disc
    } else {
        -disc
    };
    let r1 = 0.5 * (s + d);
    if r1.norm() == 0.0 {
        return (Complex64::default(), Complex64::default());
    }
    (r1, p / r1)
}

/// Symmetrisation map: pi(z, w) = (z + w, zw).
pub fn sym(z: DiscPoint, w: DiscPoint) -> GPoint {
    let (z, w) = (z.value(), w.value());
    GPoint::from_interior(z + w, z * w)
}

/// Splits a G point into its disc coordinates, canonically ordered so
/// that the first root dominates the second in the lexicographic order
/// on (re, im).
pub fn unsym(g: &GPoint) -> (Complex64, Complex64) {
    let (r1, r2) = quadratic_roots(g.s, g.p);
    let key = |z: Complex64| (z.re, z.im);
    if key(r1) >= key(r2) {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

/// Membership test for raw coordinates.
pub fn contains(s: Complex64, p: Complex64) -> bool {
    GPoint::new(s, p).is_ok()
}

/// Magic function Phi_omega(s, p) = (2 omega p - s) / (2 - omega s).
pub fn phi(omega: CirclePoint, g: &GPoint) -> DiscPoint {
    let w = omega.value();
    let v = (2.0 * w * g.p - g.s) / (Complex64::new(2.0, 0.0) - w * g.s);
    DiscPoint::from_interior(v)
}

/// Royal variety point (2 lambda, lambda^2).
pub fn royal(lambda: DiscPoint) -> GPoint {
    let l = lambda.value();
    GPoint::from_interior(2.0 * l, l * l)
}

/// Whether a point lies on the royal variety s^2 = 4p, within `tol` on
/// the defining equation.
pub fn on_royal(g: &GPoint, tol: f64) -> bool {
    (g.s * g.s - 4.0 * g.p).norm() <= tol
}

/// A flat geodesic F_beta = { (beta lambda + conj(beta), lambda) }.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatGeodesic {
    pub beta: DiscPoint,
}

/// Point of the flat geodesic F_beta at parameter lambda.
pub fn flat_point(beta: DiscPoint, lambda: DiscPoint) -> GPoint {
    let b = beta.value();
    let l = lambda.value();
    GPoint::from_interior(b * l + b.conj(), l)
}

/// The unique flat geodesic through a point of G, together with the
/// parameter at which the geodesic passes through it: lambda = p and
/// beta solves beta p + conj(beta) = s, a real-linear 2x2 system with
/// determinant |p|^2 - 1 < 0.
pub fn flat_through(g: &GPoint) -> (FlatGeodesic, DiscPoint) {
    let (p1, p2) = (g.p.re, g.p.im);
    let (s1, s2) = (g.s.re, g.s.im);
    let det = p1 * p1 + p2 * p2 - 1.0;
    // [ p1 + 1   -p2 ] [b1]   [s1]
    // [ p2     p1 - 1] [b2] = [s2]
    let b1 = (s1 * (p1 - 1.0) + s2 * p2) / det;
    let b2 = (s2 * (p1 + 1.0) - s1 * p2) / det;
    let beta = DiscPoint::from_interior(Complex64::new(b1, b2));
    (FlatGeodesic { beta }, DiscPoint::from_interior(g.p))
}

/// The parameter lambda at which F_beta meets the royal variety: the
/// in-disc root of beta mu^2 - 2 mu + conj(beta) = 0, written in the
/// cancellation-free form conj(beta) / (1 + sqrt(1 - |beta|^2)).
///
/// Returns (mu, lambda) where (2 mu, mu^2) is the intersection point and
/// lambda = mu^2 is the flat parameter at which it is reached.
pub fn royal_intersection(flat: &FlatGeodesic) -> (DiscPoint, DiscPoint) {
    let b = flat.beta.value();
    let mu = b.conj() / (1.0 + (1.0 - b.norm_sqr()).sqrt());
    (
        DiscPoint::from_interior(mu),
        DiscPoint::from_interior(mu * mu),
    )
}

/// Restriction data of a magic function to a flat geodesic:
/// Phi_omega(flat_point(beta, .)) = tau B_alpha with
/// alpha = conj(beta) / (2 omega - beta) and
/// tau = (2 omega - beta) / (2 - omega conj(beta)).
pub fn phi_on_flat_params(omega: CirclePoint, beta: DiscPoint) -> (CirclePoint, DiscPoint) {
    let w = omega.value();
    let b = beta.value();
    let denom = 2.0 * w - b;
    let alpha = b.conj() / denom;
    let tau = denom / (Complex64::new(2.0, 0.0) - w * b.conj());
    (
        CirclePoint::new(tau).expect("tau is unimodular"),
        DiscPoint::from_interior(alpha),
    )
}

/// Automorphism of G obtained by symmetrising a disc automorphism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GAutomorphism {
    pub generator: MoebiusMap,
}

impl GAutomorphism {
    pub fn new(generator: MoebiusMap) -> Self {
        Self { generator }
    }

    /// tau(m)(z + w, zw) = (m(z) + m(w), m(z) m(w)). The result does not
    /// depend on the ordering of the roots.
    pub fn apply(&self, g: &GPoint) -> GPoint {
        let (z, w) = unsym(g);
        let mz = self.generator.apply_raw(z);
        let mw = self.generator.apply_raw(w);
        GPoint::from_interior(mz + mw, mz * mw)
    }

    pub fn inverse(&self) -> Self {
        Self {
            generator: self.generator.inverse(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            generator: self.generator.compose(&other.generator),
        }
    }
}

/// The involutive disc automorphism m(lambda) = (a - lambda)/(1 - conj(a)
/// lambda) whose symmetrisation fixes (z + w, zw) and swaps z with w.
/// The coefficient solves a + conj(a) zw = z + w, a real-linear system
/// with determinant 1 - |zw|^2 > 0.
pub fn involution_fixing(z: DiscPoint, w: DiscPoint) -> MoebiusMap {
    let (z, w) = (z.value(), w.value());
    let q = z * w;
    let r = z + w;
    let det = 1.0 - q.norm_sqr();
    // [1 + q1    q2 ] [a1]   [r1]
    // [ q2    1 - q1] [a2] = [r2]
    let a1 = (r.re * (1.0 - q.re) - r.im * q.im) / det;
    let a2 = (r.im * (1.0 + q.re) - r.re * q.im) / det;
    let a = Complex64::new(a1, a2);
    // (a - z)/(1 - conj(a) z) = -1 * (z - a)/(1 - conj(a) z).
    MoebiusMap::new(
        CirclePoint::new(Complex64::new(-1.0, 0.0)).expect("minus one is unimodular"),
        DiscPoint::from_interior(a),
    )
}
