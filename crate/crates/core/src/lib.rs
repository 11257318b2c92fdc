//! Numerical geometry of the symmetrised bidisc G: magic functions, the
//! closed-form Caratheodory distance with extremal search, the
//! automorphism group, flat and royal geodesics, a hereditary functional
//! calculus on commuting matrix tuples, and positive-kernel testing.

pub mod cara_metric;
pub mod disc_geometry;
pub mod hereditary;
pub mod kernels;
pub mod matrixnum;
pub mod sampling;
pub mod selftest;
pub mod symm_bidisc;

pub use num_complex::Complex64;

pub use cara_metric::{CaraObjective, ExtremalResult, SearchConfig, TupleTu};
pub use disc_geometry::{CirclePoint, DiscPoint, MoebiusMap};
pub use hereditary::{CommutingTuple, HereditaryPolynomial};
pub use kernels::GramMatrix;
pub use matrixnum::{ComplexMatrix, HermitianEigenResult};
pub use selftest::{CheckResult, SelftestConfig, SelftestLevel, SelftestReport};
pub use symm_bidisc::{FlatGeodesic, GAutomorphism, GPoint};
