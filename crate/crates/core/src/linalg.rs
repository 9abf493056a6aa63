//! Small dense complex matrices.
//!
//! Everything in this crate works with matrices of a few dozen rows at most,
//! so the kernels here favour accuracy over asymptotics: Hermitian
//! eigenproblems use cyclic Jacobi rotations and singular values come from
//! one-sided (Hestenes) Jacobi, both of which resolve tiny eigenvalues and
//! singular values to high relative accuracy.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
    }

    /// Builds a matrix from separate real and imaginary row-major parts.
    pub fn from_parts(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Self {
        assert_eq!(re.len(), rows * cols);
        assert_eq!(im.len(), rows * cols);
        let data = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self * diag(d)`: scales column `j` by `d[j]`.
    pub fn scale_columns(&self, d: &[C64]) -> Self {
        assert_eq!(d.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[j])
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn column_norm_sqr(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self[(i, j)].norm_sqr()).sum()
    }

    /// Copies the sub-block of rows `r` and columns `c`.
    pub fn select(&self, r: &[usize], c: &[usize]) -> Self {
        Self::from_fn(r.len(), c.len(), |i, j| self[(r[i], c[j])])
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Real Frobenius inner product `Re trace(self* other)`.
    pub fn real_inner(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// `trace(self* other)`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Largest entry of `A - A*`.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest entry of `A + A*`.
    pub fn skew_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] + self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Applies the 2x2 unitary `u = [[u00, u01], [u10, u11]]` to columns `p, q`:
    /// `self <- self * U` where `U` is the identity outside rows/cols `p, q`.
    pub(crate) fn rotate_columns(&mut self, p: usize, q: usize, u: [[C64; 2]; 2]) {
        for i in 0..self.rows {
            let a = self[(i, p)];
            let b = self[(i, q)];
            self[(i, p)] = a * u[0][0] + b * u[1][0];
            self[(i, q)] = a * u[0][1] + b * u[1][1];
        }
    }

    /// `self <- U* self` for the same embedded 2x2 unitary.
    pub(crate) fn rotate_rows_adjoint(&mut self, p: usize, q: usize, u: [[C64; 2]; 2]) {
        for j in 0..self.cols {
            let a = self[(p, j)];
            let b = self[(q, j)];
            self[(p, j)] = u[0][0].conj() * a + u[1][0].conj() * b;
            self[(q, j)] = u[0][1].conj() * a + u[1][1].conj() * b;
        }
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(l, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.shape(), rhs.shape());
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.shape(), rhs.shape());
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.scale(-1.0)
    }
}

/// Hermitian inner product on vectors, conjugate-linear in the first slot:
/// `<x, y> = sum conj(x_i) y_i`.
pub fn vdot(x: &[C64], y: &[C64]) -> C64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn vnorm(x: &[C64]) -> f64 {
    libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum())
}

/// 2x2 unitary that diagonalizes the Hermitian block `[[a, g], [conj g, b]]`
/// via `U* H U`. Returns `None` when `g` is already zero.
fn jacobi_rotation(a: f64, b: f64, g: C64) -> Option<[[C64; 2]; 2]> {
    let mag = g.norm();
    if mag == 0.0 {
        return None;
    }
    let phase = g / mag;
    let tau = (b - a) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + libm::sqrt(1.0 + tau * tau))
    } else {
        -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
    };
    let c = 1.0 / libm::sqrt(1.0 + t * t);
    let s = t * c;
    let e = phase.conj();
    Some([
        [C64::new(c, 0.0), C64::new(s, 0.0)],
        [e * (-s), e * c],
    ])
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unitary whose column `j` is the eigenvector for `values[j]`.
    pub vectors: CMat,
}

impl HermitianEigen {
    /// Rebuilds `V diag(f(lambda)) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        self.map_complex(|x| C64::new(f(x), 0.0))
    }

    pub fn map_complex(&self, f: impl Fn(f64) -> C64) -> CMat {
        let d: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        &self.vectors.scale_columns(&d) * &self.vectors.adjoint()
    }
}

/// Cyclic Jacobi eigensolver. Only the Hermitian part of `a` is used.
pub fn hermitian_eigen(a: &CMat) -> HermitianEigen {
    assert!(a.is_square(), "eigensolver needs a square matrix");
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = CMat::identity(n);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if libm::sqrt(off) <= f64::EPSILON * 1e-3 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = m[(p, q)];
                if g.norm() <= f64::MIN_POSITIVE {
                    continue;
                }
                if let Some(u) = jacobi_rotation(m[(p, p)].re, m[(q, q)].re, g) {
                    m.rotate_columns(p, q, u);
                    m.rotate_rows_adjoint(p, q, u);
                    m[(p, q)] = C64::new(0.0, 0.0);
                    m[(q, p)] = C64::new(0.0, 0.0);
                    m[(p, p)].im = 0.0;
                    m[(q, q)].im = 0.0;
                    v.rotate_columns(p, q, u);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let all: Vec<usize> = (0..n).collect();
    HermitianEigen {
        values,
        vectors: v.select(&all, &order),
    }
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    hermitian_eigen(a).values
}

/// Thin singular value decomposition `A = U diag(sigma) V*`.
#[derive(Clone, Debug)]
pub struct Svd {
    /// `rows x r` with orthonormal columns (completed where `sigma` vanishes).
    pub u: CMat,
    /// Singular values, descending; `r = min(rows, cols)` of them.
    pub sigma: Vec<f64>,
    /// `cols x r` with orthonormal columns.
    pub v: CMat,
}

/// One-sided Jacobi SVD.
pub fn svd(a: &CMat) -> Svd {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint());
        return Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = CMat::identity(n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column_norm_sqr(p);
                let beta = w.column_norm_sqr(q);
                let gamma: C64 = (0..m).map(|i| w[(i, p)].conj() * w[(i, q)]).sum();
                if gamma.norm() <= f64::EPSILON * libm::sqrt(alpha * beta) || gamma.norm() == 0.0 {
                    continue;
                }
                if let Some(u) = jacobi_rotation(alpha, beta, gamma) {
                    w.rotate_columns(p, q, u);
                    v.rotate_columns(p, q, u);
                    rotated = true;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<f64> = (0..n).map(|j| libm::sqrt(w.column_norm_sqr(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    sigma = order.iter().map(|&i| sigma[i]).collect();
    let all_rows: Vec<usize> = (0..m).collect();
    let all_cols: Vec<usize> = (0..n).collect();
    let w = w.select(&all_rows, &order);
    let v = v.select(&all_cols, &order);
    let top = sigma.first().copied().unwrap_or(0.0);
    let mut u = CMat::zeros(m, n);
    let mut filled = Vec::new();
    for (j, &s) in sigma.iter().enumerate() {
        if s > top * f64::EPSILON * (m.max(n) as f64) && s > 0.0 {
            let col: Vec<C64> = w.column(j).iter().map(|z| z / s).collect();
            u.set_column(j, &col);
            filled.push(j);
        }
    }
    complete_orthonormal(&mut u, &filled);
    Svd { u, sigma, v }
}

/// Fills the columns of `q` not listed in `filled` so that all columns are
/// orthonormal, using Gram-Schmidt against the standard basis.
fn complete_orthonormal(q: &mut CMat, filled: &[usize]) {
    let m = q.rows();
    let mut done: Vec<usize> = filled.to_vec();
    let mut candidate = 0usize;
    for j in 0..q.cols() {
        if filled.contains(&j) {
            continue;
        }
        while candidate < m {
            let mut e = vec![C64::new(0.0, 0.0); m];
            e[candidate] = C64::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for &d in &done {
                    let col = q.column(d);
                    let proj = vdot(&col, &e);
                    for (x, c) in e.iter_mut().zip(&col) {
                        *x -= proj * c;
                    }
                }
            }
            let nrm = vnorm(&e);
            if nrm > 1e-8 {
                let e: Vec<C64> = e.iter().map(|z| z / nrm).collect();
                q.set_column(j, &e);
                done.push(j);
                break;
            }
        }
    }
}

/// Unitary polar factor of a square matrix: the unitary `W` closest to `a`
/// in Frobenius norm, equal to `U V*` from the SVD.
pub fn polar_unitary(a: &CMat) -> CMat {
    assert!(a.is_square());
    let s = svd(a);
    &s.u * &s.v.adjoint()
}

/// Modified Gram-Schmidt on the columns of a square matrix. With a complex
/// Gaussian input this yields a Haar-distributed unitary.
pub fn orthonormalize_columns(a: &CMat) -> CMat {
    let mut q = a.clone();
    let n = q.cols();
    for j in 0..n {
        let mut col = q.column(j);
        for _ in 0..2 {
            for p in 0..j {
                let prev = q.column(p);
                let proj = vdot(&prev, &col);
                for (x, c) in col.iter_mut().zip(&prev) {
                    *x -= proj * c;
                }
            }
        }
        let nrm = vnorm(&col);
        let col: Vec<C64> = col.iter().map(|z| z / nrm).collect();
        q.set_column(j, &col);
    }
    q
}

/// Hermitian logarithm of a unitary: returns `H` with `exp(iH) = u`, with
/// eigen-angles in `(-pi, pi]`.
pub fn unitary_log(u: &CMat) -> CMat {
    assert!(u.is_square());
    let n = u.rows();
    let re = (u + &u.adjoint()).scale(0.5);
    let im = (u - &u.adjoint()).scale_complex(C64::new(0.0, -0.5));
    let mut best: Option<(f64, CMat)> = None;
    // a generic real combination of the commuting Hermitian parts has the
    // same eigenvectors as `u`
    for weight in [0.618_033_988_749_894_9, 1.324_717_957_244_746, 0.302_775_637_731_994_6] {
        let mix = &re + &im.scale(weight);
        let eig = hermitian_eigen(&mix);
        let angles: Vec<f64> = (0..n)
            .map(|j| {
                let q = eig.vectors.column(j);
                let z = vdot(&q, &u.mul_vec(&q));
                libm::atan2(z.im, z.re)
            })
            .collect();
        let d: Vec<C64> = angles.iter().map(|&a| C64::new(a, 0.0)).collect();
        let h = &eig.vectors.scale_columns(&d) * &eig.vectors.adjoint();
        let h = h.hermitian_part();
        let err = (&unitary_exp(&h, 1.0) - u).norm();
        if err < 1e-12 * (n as f64) {
            return h;
        }
        if best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((err, h));
        }
    }
    best.map(|(_, h)| h).unwrap_or_else(|| CMat::zeros(n, n))
}

/// `exp(i s H)` for Hermitian `H`.
pub fn unitary_exp(h: &CMat, s: f64) -> CMat {
    hermitian_eigen(h).map_complex(|x| C64::new(libm::cos(s * x), libm::sin(s * x)))
}
