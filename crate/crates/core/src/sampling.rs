//! Seeded sample generators for the property and selftest suites: disc,
//! circle, and G points, Moebius maps, unitaries, random hereditary
//! polynomials, and exactly commuting non-normal tuples. Everything is
//! driven by an explicit RNG so sweeps are reproducible from a single seed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::disc_geometry::{CirclePoint, DiscPoint, MoebiusMap};
use crate::hereditary::{CommutingTuple, HereditaryPolynomial};
use crate::matrixnum::{operator_norm, ComplexMatrix};
use crate::symm_bidisc::{sym, GPoint};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Uniform draw from the disc of radius `rmax`.
pub fn complex_in_disc<R: Rng>(rng: &mut R, rmax: f64) -> Complex64 {
    let r = rmax * rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(r, theta)
}

pub fn disc_point<R: Rng>(rng: &mut R, rmax: f64) -> DiscPoint {
    debug_assert!(rmax < 1.0, "rmax must stay inside the open disc");
    DiscPoint::new(complex_in_disc(rng, rmax)).expect("radius bounded away from 1")
}

pub fn circle_point<R: Rng>(rng: &mut R) -> CirclePoint {
    CirclePoint::from_angle(rng.gen::<f64>() * std::f64::consts::TAU)
}

/// Random G point as sym of two independent disc points of radius `rmax`.
pub fn g_point<R: Rng>(rng: &mut R, rmax: f64) -> GPoint {
    sym(disc_point(rng, rmax), disc_point(rng, rmax))
}

pub fn moebius<R: Rng>(rng: &mut R, center_rmax: f64) -> MoebiusMap {
    MoebiusMap::new(circle_point(rng), disc_point(rng, center_rmax))
}

/// Haar-ish random unitary via Gram-Schmidt on a Gaussian matrix.
pub fn unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    loop {
        let mut cols: Vec<Vec<Complex64>> = (0..n)
            .map(|_| (0..n).map(|_| gaussian_complex(rng)).collect())
            .collect();
        let mut ok = true;
        for j in 0..n {
            let (done, rest) = cols.split_at_mut(j);
            let col = &mut rest[0];
            for prev in done.iter() {
                let proj: Complex64 = col.iter().zip(prev).map(|(a, b)| a * b.conj()).sum();
                for (a, b) in col.iter_mut().zip(prev) {
                    *a -= proj * b;
                }
            }
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for z in col.iter_mut() {
                *z /= norm;
            }
        }
        if !ok {
            continue;
        }
        let mut m = ComplexMatrix::zeros(n, n).expect("size within cap");
        for (j, col) in cols.iter().enumerate() {
            for (i, &z) in col.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        return m;
    }
}

/// Unit vectors u1, u2 in C^2 with |<u1, u2>| equal to `gram`, embedded in a
/// random orthonormal frame with a random relative phase.
pub fn unit_pair_with_gram<R: Rng>(rng: &mut R, gram: f64) -> ([Complex64; 2], [Complex64; 2]) {
    debug_assert!((0.0..=1.0).contains(&gram));
    let frame = unitary(rng, 2);
    let phase = Complex64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU);
    let v = [
        gram * phase,
        Complex64::new((1.0 - gram * gram).sqrt(), 0.0),
    ];
    let u1 = [frame[(0, 0)], frame[(1, 0)]];
    let u2 = [
        frame[(0, 0)] * v[0] + frame[(0, 1)] * v[1],
        frame[(1, 0)] * v[0] + frame[(1, 1)] * v[1],
    ];
    (u1, u2)
}

/// Random hereditary polynomial: `nterms` index pairs with per-coordinate
/// exponents up to `max_deg` and Gaussian coefficients. With `hermitian`
/// set, each term is paired with its mirrored conjugate.
pub fn hereditary_poly<R: Rng>(
    rng: &mut R,
    dim: usize,
    max_deg: usize,
    nterms: usize,
    hermitian: bool,
) -> HereditaryPolynomial {
    let mut h = HereditaryPolynomial::new(dim);
    for _ in 0..nterms {
        let alpha: Vec<usize> = (0..dim).map(|_| rng.gen_range(0..=max_deg)).collect();
        let beta: Vec<usize> = (0..dim).map(|_| rng.gen_range(0..=max_deg)).collect();
        let coeff = gaussian_complex(rng);
        h.add_term(&alpha, &beta, coeff)
            .expect("index lengths match dim");
        if hermitian {
            h.add_term(&beta, &alpha, coeff.conj())
                .expect("index lengths match dim");
        }
    }
    h
}

/// Random polynomial in x alone (every beta zero).
pub fn x_only_poly<R: Rng>(
    rng: &mut R,
    dim: usize,
    max_deg: usize,
    nterms: usize,
) -> HereditaryPolynomial {
    let zero = vec![0usize; dim];
    let mut g = HereditaryPolynomial::new(dim);
    for _ in 0..nterms {
        let alpha: Vec<usize> = (0..dim).map(|_| rng.gen_range(0..=max_deg)).collect();
        g.add_term(&alpha, &zero, gaussian_complex(rng))
            .expect("index lengths match dim");
    }
    g
}

fn triangular_seed<R: Rng>(rng: &mut R, n: usize) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let mut seed = ComplexMatrix::zeros(n, n).expect("size within cap");
    for i in 0..n {
        seed[(i, i)] = complex_in_disc(rng, 0.6);
    }
    for i in 0..n.saturating_sub(1) {
        seed[(i, i + 1)] = gaussian_complex(rng);
    }
    let id = ComplexMatrix::identity(n).expect("size within cap");
    let sq = seed.matmul(&seed).expect("square matrix");
    (id, seed, sq)
}

/// Exactly commuting, generically non-normal contraction pair: both entries
/// are quadratic polynomials in one random triangular seed, rescaled to
/// operator norm 1/1.02, so the joint spectrum stays in the open bidisc.
pub fn commuting_contraction_pair<R: Rng>(rng: &mut R, n: usize) -> (ComplexMatrix, ComplexMatrix) {
    loop {
        let (id, seed, sq) = triangular_seed(rng, n);
        let make = |c0: Complex64, c1: Complex64, c2: Complex64| {
            id.scale(c0)
                .add(&seed.scale(c1))
                .expect("same shape")
                .add(&sq.scale(c2))
                .expect("same shape")
        };
        let t1 = make(
            gaussian_complex(rng),
            gaussian_complex(rng),
            gaussian_complex(rng),
        );
        let t2 = make(
            gaussian_complex(rng),
            gaussian_complex(rng),
            gaussian_complex(rng),
        );
        let n1 = operator_norm(&t1).expect("finite entries");
        let n2 = operator_norm(&t2).expect("finite entries");
        if n1 < 1e-8 || n2 < 1e-8 {
            continue;
        }
        return (
            t1.scale(Complex64::new(1.0 / (1.02 * n1), 0.0)),
            t2.scale(Complex64::new(1.0 / (1.02 * n2), 0.0)),
        );
    }
}

/// Commuting d-tuple of quadratic polynomials in one triangular seed,
/// rescaled to operator norm at most one.
pub fn commuting_tuple<R: Rng>(rng: &mut R, dim: usize, n: usize) -> CommutingTuple {
    loop {
        let (id, seed, sq) = triangular_seed(rng, n);
        let mut mats = Vec::with_capacity(dim);
        let mut degenerate = false;
        for _ in 0..dim {
            let m = id
                .scale(gaussian_complex(rng))
                .add(&seed.scale(gaussian_complex(rng)))
                .expect("same shape")
                .add(&sq.scale(gaussian_complex(rng)))
                .expect("same shape");
            let norm = operator_norm(&m).expect("finite entries");
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            mats.push(m.scale(Complex64::new(1.0 / (1.02 * norm), 0.0)));
        }
        if degenerate {
            continue;
        }
        match CommutingTuple::new(mats) {
            Ok(t) => return t,
            Err(_) => continue,
        }
    }
}
