#![allow(dead_code)]

use fiberframe_core::sampling::{gaussian_matrix, haar_unitary, SeededRng};
use fiberframe_core::{CMat, FrameMatrix, HermitianMatrix, C64};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_frame(rng: &mut SeededRng, k: usize, n: usize) -> FrameMatrix {
    FrameMatrix::new(gaussian_matrix(rng, k, n)).unwrap()
}

/// Rank `k - 1` frame-shaped matrix with a known unit vector in `ker F*`.
pub fn rank_deficient(rng: &mut SeededRng, k: usize, n: usize) -> (FrameMatrix, Vec<C64>) {
    let u = haar_unitary(rng, k);
    let g = gaussian_matrix(rng, k, n);
    let p = CMat::from_fn(k, k, |i, j| if i == j && i < k - 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let f = &(&(&u * &p) * &u.adjoint()) * &g;
    (FrameMatrix::new(f).unwrap(), u.column(k - 1))
}

pub fn random_vec(rng: &mut SeededRng, n: usize) -> Vec<C64> {
    gaussian_matrix(rng, n, 1).column(0)
}

/// Block-diagonal unitary; commutes with a diagonal `S` whose eigenspaces have these sizes.
pub fn block_unitary(rng: &mut SeededRng, blocks: &[usize]) -> CMat {
    let k: usize = blocks.iter().sum();
    let mut u = CMat::zeros(k, k);
    let mut off = 0;
    for &b in blocks {
        let v = haar_unitary(rng, b);
        for i in 0..b {
            for j in 0..b {
                u[(off + i, off + j)] = v[(i, j)];
            }
        }
        off += b;
    }
    u
}

pub fn diag(d: &[f64]) -> HermitianMatrix {
    HermitianMatrix::from_real_diagonal(d)
}

/// `lambda` (descending, length `k`) and a positive `r` of length `n`
/// majorized by it: zero-padded `lambda` pushed through random Robin Hood
/// transfers, mixed with the flat vector, then shuffled.
pub fn random_admissible(rng: &mut SeededRng, k: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lambda: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..3.0)).collect();
    lambda.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let r = admissible_norms(rng, &lambda, n);
    (lambda, r)
}

/// Positive `r` of length `n` majorized by the descending `lambda`.
pub fn admissible_norms(rng: &mut SeededRng, lambda: &[f64], n: usize) -> Vec<f64> {
    let mut r: Vec<f64> = lambda.iter().copied().chain(std::iter::repeat(0.0)).take(n).collect();
    for _ in 0..4 * n {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let (hi, lo) = if r[i] >= r[j] { (i, j) } else { (j, i) };
        let t = rng.random_range(0.0..=1.0) * (r[hi] - r[lo]);
        r[hi] -= t;
        r[lo] += t;
    }
    let mean = lambda.iter().sum::<f64>() / n as f64;
    let alpha = rng.random_range(0.05..1.0);
    for x in &mut r {
        *x = (1.0 - alpha) * *x + alpha * mean;
    }
    r.shuffle(rng);
    r
}

/// Independent majorization oracle in exact-order form.
pub fn majorized(lambda: &[f64], r: &[f64], tol: f64) -> Result<(), usize> {
    let mut l = lambda.to_vec();
    l.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut s = r.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let total: f64 = l.iter().sum();
    if (s.iter().sum::<f64>() - total).abs() > tol * total {
        return Err(0);
    }
    let (mut pl, mut pr) = (0.0, 0.0);
    for ell in 0..l.len() {
        pl += l[ell];
        pr += s[ell];
        if pr > pl + tol * total {
            return Err(ell + 1);
        }
    }
    Ok(())
}

pub fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
