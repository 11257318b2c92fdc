//! Geometry of the open unit disc: pseudohyperbolic distance, Blaschke
//! factors and the Moebius automorphism group in the normal form
//! z -> omega (z - a) / (1 - conj(a) z) with |omega| = 1, |a| < 1.

use num_complex::Complex64;
use thiserror::Error;

/// Construction margin: points with |z| >= 1 - DISC_MARGIN are rejected.
pub const DISC_MARGIN: f64 = 1e-14;

/// Tolerated drift of a circle point from unit modulus.
pub const CIRCLE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DiscError {
    #[error("point with modulus {0:.17} is not strictly inside the unit disc")]
    OutsideDisc(f64),
    #[error("cannot normalize a zero or non-finite value onto the unit circle")]
    BadCirclePoint,
    #[error("non-finite coordinate")]
    NonFinite,
}

/// A point of the open unit disc D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscPoint(Complex64);

impl DiscPoint {
    pub fn new(z: Complex64) -> Result<Self, DiscError> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(DiscError::NonFinite);
        }
        let r = z.norm();
        if r >= 1.0 - DISC_MARGIN {
            return Err(DiscError::OutsideDisc(r));
        }
        Ok(Self(z))
    }

    /// Wraps a value that is inside D by construction (images of interior
    /// points under maps that preserve the disc). Only |z| < 1 is
    /// required here, not the construction margin.
    pub(crate) fn from_interior(z: Complex64) -> Self {
        debug_assert!(
            z.norm() < 1.0,
            "interior value escaped the disc: |z| = {}",
            z.norm()
        );
        Self(z)
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

/// A point of the unit circle T, renormalized on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirclePoint(Complex64);

impl CirclePoint {
    pub fn new(z: Complex64) -> Result<Self, DiscError> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(DiscError::NonFinite);
        }
        let r = z.norm();
        if r == 0.0 {
            return Err(DiscError::BadCirclePoint);
        }
        Ok(Self(z / r))
    }

    pub fn from_angle(theta: f64) -> Self {
        Self(Complex64::from_polar(1.0, theta))
    }

    pub fn one() -> Self {
        Self(Complex64::new(1.0, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn angle(self) -> f64 {
        self.0.arg()
    }

    pub fn conj(self) -> Self {
        Self(self.0.conj())
    }
}

/// Pseudohyperbolic distance rho(z, w) = |z - w| / |1 - conj(w) z|.
pub fn rho(z: DiscPoint, w: DiscPoint) -> f64 {
    let (z, w) = (z.value(), w.value());
    let den = Complex64::new(1.0, 0.0) - w.conj() * z;
    (z - w).norm() / den.norm()
}

/// Blaschke factor B_alpha(z) = (z - alpha) / (1 - conj(alpha) z).
pub fn blaschke(alpha: DiscPoint, z: Complex64) -> Complex64 {
    let a = alpha.value();
    (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

/// Disc automorphism z -> rotation * (z - center) / (1 - conj(center) z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub rotation: CirclePoint,
    pub center: DiscPoint,
}

impl MoebiusMap {
    pub fn new(rotation: CirclePoint, center: DiscPoint) -> Self {
        Self { rotation, center }
    }

    pub fn identity() -> Self {
        Self {
            rotation: CirclePoint::one(),
            center: DiscPoint(Complex64::new(0.0, 0.0)),
        }
    }

    /// Applies the map to a raw complex number (callers outside the
    /// closed disc get the analytic continuation).
    pub fn apply_raw(&self, z: Complex64) -> Complex64 {
        let a = self.center.value();
        self.rotation.value() * (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)
    }

    pub fn apply(&self, z: DiscPoint) -> DiscPoint {
        DiscPoint::from_interior(self.apply_raw(z.value()))
    }

    /// Normal form of the composition self . other.
    pub fn compose(&self, other: &Self) -> Self {
        let w1 = self.rotation.value();
        let a1 = self.center.value();
        let w2 = other.rotation.value();
        let a2 = other.center.value();
        let denom = w2 + a1 * a2.conj();
        let center = (a1 + w2 * a2) / denom;
        let rotation = w1 * denom / (Complex64::new(1.0, 0.0) + a1.conj() * w2 * a2);
        Self {
            rotation: CirclePoint::new(rotation).expect("composite rotation is unimodular"),
            center: DiscPoint::from_interior(center),
        }
    }

    /// Normal form of the inverse map.
    pub fn inverse(&self) -> Self {
        let w = self.rotation.value();
        let a = self.center.value();
        Self {
            rotation: self.rotation.conj(),
            center: DiscPoint::from_interior(-w * a),
        }
    }
}

/// Residual |rho(m(z), m(w)) - rho(z, w)| of the Moebius invariance of
/// the pseudohyperbolic distance.
pub fn moebius_invariance_check(m: &MoebiusMap, z: DiscPoint, w: DiscPoint) -> f64 {
    (rho(m.apply(z), m.apply(w)) - rho(z, w)).abs()
}
