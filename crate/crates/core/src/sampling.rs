//! Seeded random matrices used by the randomized constructions and tests.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{orthonormalize_columns, CMat, C64};

/// The crate's deterministic generator.
pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| C64::new(s * normal(rng), s * normal(rng)))
}

/// Haar-distributed `n x n` unitary.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    orthonormalize_columns(&gaussian_matrix(rng, n, n))
}

/// `n` unit complex numbers with uniformly distributed angles.
pub fn random_phases<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..core::f64::consts::TAU)))
        .collect()
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    gaussian_matrix(rng, n, n).hermitian_part()
}

pub fn random_skew_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    random_hermitian(rng, n).scale_complex(C64::new(0.0, 1.0))
}

/// Hermitian positive definite matrix with eigenvalues drawn from `[lo, hi]`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> CMat {
    let u = haar_unitary(rng, n);
    let d: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(lo..hi), 0.0)).collect();
    (&u.scale_columns(&d) * &u.adjoint()).hermitian_part()
}
