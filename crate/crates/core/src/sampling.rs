//! Seeded random elements of PSL(2,R) and of prescribed cover components.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cover::{special_lift, CoverClass, LiftMode};
use crate::{Cover, Matrix, Psl};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Counter-based per-index seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random SL(2,R) matrix rot * diag(e^s, e^-s) * rot with s in [0, max_stretch].
pub fn random_sl<R: Rng>(rng: &mut R, max_stretch: f64) -> Matrix {
    let a = rng.gen_range(0.0..2.0 * PI);
    let b = rng.gen_range(0.0..2.0 * PI);
    let s = rng.gen_range(0.0..max_stretch);
    Matrix::rotation(a) * Matrix::stretch(s.exp()) * Matrix::rotation(b)
}

pub fn random_psl<R: Rng>(rng: &mut R) -> Psl {
    Psl::from_unit(random_sl(rng, 1.5))
}

pub fn random_hyperbolic<R: Rng>(rng: &mut R) -> Psl {
    let l = rng.gen_range(1.1..5.0);
    Psl::from_unit(Matrix::stretch(l).conj(&random_sl(rng, 1.2)))
}

/// Random parabolic conjugate of [[1, sign*a], [0, 1]].
pub fn random_parabolic<R: Rng>(rng: &mut R, sign: i8) -> Psl {
    let a = rng.gen_range(0.3..3.0) * sign as f64;
    Psl::from_unit(Matrix::upper(a).conj(&random_sl(rng, 1.2)))
}

pub fn random_elliptic<R: Rng>(rng: &mut R) -> Psl {
    let t = rng.gen_range(0.05..PI - 0.05);
    Psl::from_unit(Matrix::rotation(t).conj(&random_sl(rng, 1.2)))
}

/// Random element of the given cover component.
pub fn random_in_class<R: Rng>(rng: &mut R, class: CoverClass) -> Cover {
    let lift = |p: Psl| special_lift(&p, LiftMode::Eval).expect("lift");
    match class {
        CoverClass::Hyp(n) => lift(random_hyperbolic(rng)).times_z(n),
        CoverClass::ParPlus(n) => lift(random_parabolic(rng, 1)).times_z(n),
        CoverClass::ParMinus(n) => lift(random_parabolic(rng, -1)).times_z(n),
        CoverClass::Center(n) => Cover::z_pow(n),
        CoverClass::Ell(n) => {
            assert!(n != 0, "Ell(0) does not exist");
            lift(random_elliptic(rng)).times_z(if n > 0 { n - 1 } else { n })
        }
    }
}

/// Random cover element: random base, index in [-3, 3].
pub fn random_cover<R: Rng>(rng: &mut R) -> Cover {
    Cover::new(random_psl(rng), rng.gen_range(-3..=3))
}
