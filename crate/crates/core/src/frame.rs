//! Frames and their elementary operators.
//!
//! A frame of `N` vectors in `C^k` is stored as the `k x N` matrix `F` whose
//! columns are the frame vectors. With the Hermitian product taken
//! conjugate-linear in its second slot, `<v, f> = f* v`, the analysis
//! operator is `v -> F* v`, the synthesis operator is `z -> F z`, and the
//! frame operator is `S_F = F F*`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, svd, CMat, HermitianEigen, C64};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// A matrix is a frame when `sigma_min > FRAME_RANK_TOL * sigma_max`.
pub const FRAME_RANK_TOL: f64 = 1e-10;

/// A `k x N` complex matrix whose columns are frame vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameMatrix(CMat);

impl FrameMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.rows() == 0 || m.cols() == 0 {
            return Err(Error::Invalid(format!(
                "frame must have k >= 1 and N >= 1, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("frame"));
        }
        Ok(Self(m))
    }

    /// Builds a frame from row-major real and imaginary parts.
    pub fn from_parts(k: usize, n: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != k * n || im.len() != k * n {
            return Err(Error::DimensionMismatch {
                context: "frame entries",
                expected: k * n,
                found: re.len().min(im.len()),
            });
        }
        Self::new(CMat::from_parts(k, n, re, im))
    }

    /// Builds a frame from real entries given row by row.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("ragged rows".into()));
        }
        Self::new(CMat::from_fn(k, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    /// Ambient dimension `k`.
    pub fn k(&self) -> usize {
        self.0.rows()
    }

    /// Number of frame vectors `N`.
    pub fn n(&self) -> usize {
        self.0.cols()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.0.column(j)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Frobenius distance to another frame of the same shape.
    pub fn distance(&self, other: &FrameMatrix) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// Singular values, descending; `min(k, N)` of them.
    pub fn singular_values(&self) -> Vec<f64> {
        svd(&self.0).sigma
    }

    /// Full-rank test with the relative threshold [`FRAME_RANK_TOL`].
    pub fn is_frame(&self) -> bool {
        self.rank_check(FRAME_RANK_TOL).is_ok()
    }

    /// Errors with [`Error::NotAFrame`] unless `sigma_min > rel_tol * sigma_max`
    /// and the matrix has at least `k` columns.
    pub fn rank_check(&self, rel_tol: f64) -> Result<()> {
        let sigma = self.singular_values();
        let top = sigma[0];
        let bottom = if self.n() < self.k() { 0.0 } else { sigma[sigma.len() - 1] };
        let threshold = rel_tol * top;
        if bottom > threshold && top > 0.0 {
            Ok(())
        } else {
            Err(Error::NotAFrame {
                sigma_min: bottom,
                threshold,
            })
        }
    }

    /// Left multiplication `U F`.
    pub fn left_mul(&self, u: &CMat) -> Result<FrameMatrix> {
        if u.cols() != self.k() || !u.is_square() {
            return Err(Error::DimensionMismatch {
                context: "left multiplication",
                expected: self.k(),
                found: u.cols(),
            });
        }
        FrameMatrix::new(u * &self.0)
    }

    /// Right multiplication by `diag(phases)`.
    pub fn scale_columns(&self, d: &[C64]) -> Result<FrameMatrix> {
        if d.len() != self.n() {
            return Err(Error::DimensionMismatch {
                context: "column scaling",
                expected: self.n(),
                found: d.len(),
            });
        }
        FrameMatrix::new(self.0.scale_columns(d))
    }
}

/// Self-adjoint matrix, stored in symmetrized form `(A + A*) / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    /// Accepts `m` when `|A - A*|_max <= HERMITIAN_TOL * (1 + |A|_max)`.
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                context: "hermitian matrix",
                expected: m.rows(),
                found: m.cols(),
            });
        }
        if m.rows() == 0 {
            return Err(Error::Invalid("empty matrix".into()));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("hermitian matrix"));
        }
        let defect = m.hermitian_defect();
        if defect > HERMITIAN_TOL * (1.0 + m.max_abs()) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self(m.hermitian_part()))
    }

    /// Symmetrizes without checking; for products that are Hermitian in exact
    /// arithmetic.
    pub fn symmetrize(m: &CMat) -> Self {
        Self(m.hermitian_part())
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        Self(CMat::from_real_diagonal(d))
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        Self(CMat::identity(n).scale(c))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eigen(&self.0)
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values
    }

    /// Frobenius distance.
    pub fn distance(&self, other: &HermitianMatrix) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// `U A U*`.
    pub fn conjugate_by(&self, u: &CMat) -> HermitianMatrix {
        Self::symmetrize(&(&(u * &self.0) * &u.adjoint()))
    }
}

/// Squared column norms `r_j = |f_j|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormSquaredVector(Vec<f64>);

impl NormSquaredVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("empty squared-norm vector".into()));
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite("squared norms"));
            }
            if value < 0.0 {
                return Err(Error::NonPositiveNorm { index, value });
            }
        }
        Ok(Self(values))
    }

    /// The all-ones vector of unit-norm frames.
    pub fn ones(n: usize) -> Self {
        Self(alloc::vec![1.0; n])
    }

    /// Errors unless every entry is strictly positive.
    pub fn require_positive(&self) -> Result<()> {
        match self.0.iter().position(|&v| v <= 0.0) {
            Some(index) => Err(Error::NonPositiveNorm {
                index,
                value: self.0[index],
            }),
            None => Ok(()),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Entries sorted in descending order.
    pub fn sorted_descending(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }
}

/// Optimal constants `0 < a <= b` with `a|v|^2 <= sum |<v, f_j>|^2 <= b|v|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    /// `a == b` up to `tol` relative to `b`.
    pub fn is_tight(&self, tol: f64) -> bool {
        self.upper - self.lower <= tol * self.upper
    }
}

fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

/// `T_F(v) = F* v`, i.e. component `j` is `<v, f_j> = f_j* v`.
pub fn analysis(f: &FrameMatrix, v: &[C64]) -> Result<Vec<C64>> {
    check_len("analysis input", f.k(), v.len())?;
    let m = f.as_mat();
    Ok((0..f.n())
        .map(|j| (0..f.k()).map(|i| m[(i, j)].conj() * v[i]).sum())
        .collect())
}

/// `T_F*(z) = F z = sum_j z_j f_j`.
pub fn synthesis(f: &FrameMatrix, z: &[C64]) -> Result<Vec<C64>> {
    check_len("synthesis input", f.n(), z.len())?;
    Ok(f.as_mat().mul_vec(z))
}

/// `S_F = F F*`.
pub fn frame_operator(f: &FrameMatrix) -> HermitianMatrix {
    let m = f.as_mat();
    HermitianMatrix::symmetrize(&(m * &m.adjoint()))
}

/// Gramian `F* F`.
pub fn gram(f: &FrameMatrix) -> HermitianMatrix {
    let m = f.as_mat();
    HermitianMatrix::symmetrize(&(&m.adjoint() * m))
}

/// Extreme eigenvalues of the frame operator. Signals
/// [`Error::NotAFrame`] when the smallest is `<= tol`.
pub fn frame_bounds(f: &FrameMatrix, tol: f64) -> Result<FrameBounds> {
    let ev = frame_operator(f).eigenvalues();
    let upper = ev[0];
    let lower = ev[ev.len() - 1];
    if lower <= tol || f.n() < f.k() {
        return Err(Error::NotAFrame {
            sigma_min: libm::sqrt(lower.max(0.0)),
            threshold: libm::sqrt(tol.max(0.0)),
        });
    }
    Ok(FrameBounds { lower, upper })
}

pub fn norms_squared(f: &FrameMatrix) -> NormSquaredVector {
    NormSquaredVector((0..f.n()).map(|j| f.as_mat().column_norm_sqr(j)).collect())
}

/// `|S_F - (tr S_F / k) Id|_F <= tol * (tr S_F / k)`.
pub fn is_tight(f: &FrameMatrix, tol: f64) -> bool {
    let s = frame_operator(f);
    let k = f.k();
    let level = s.trace() / k as f64;
    if level <= 0.0 {
        return false;
    }
    let gap = s.distance(&HermitianMatrix::scaled_identity(k, level));
    gap <= tol * level
}

/// Tight with all squared norms 1, hence `S_F = (N/k) Id`.
pub fn is_funtf(f: &FrameMatrix, tol: f64) -> bool {
    let (k, n) = (f.k(), f.n());
    if !is_tight(f, tol) {
        return false;
    }
    let norms_ok = norms_squared(f).values().iter().all(|&r| (r - 1.0).abs() <= tol);
    let s = frame_operator(f);
    norms_ok && s.distance(&HermitianMatrix::scaled_identity(k, n as f64 / k as f64)) <= tol
}

/// Parseval constant `a` of a tight frame, `S_F = a Id`, measured as `tr S_F / k`.
pub fn tight_constant(f: &FrameMatrix) -> f64 {
    frame_operator(f).trace() / f.k() as f64
}
