//! Symplectic structure on `C^{k x N}` and the momentum maps of the left
//! `U(k)` action and the right diagonal torus action.
//!
//! Conventions: `omega(X1, X2) = -Im trace(X1* X2)`; a Hermitian `A` pairs
//! with `B` in `u(k)` as `(i/2) trace(A B)`; the torus dual is identified
//! with `R^N` through the dot product. The momentum maps are
//! `F -> F F*` and `F -> (-|f_j|^2 / 2)_j`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::frame::{frame_operator, norms_squared, FrameMatrix, HermitianMatrix};
use crate::linalg::{CMat, C64};

/// A tangent vector at a frame, under `T_F C^{k x N} = C^{k x N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentMatrix(CMat);

impl TangentMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite("tangent matrix"));
        }
        Ok(Self(m))
    }

    pub fn zeros(k: usize, n: usize) -> Self {
        Self(CMat::zeros(k, n))
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }
}

/// Element `(B, t)` of `u(k) x u(1)^N`: `B` skew-Hermitian, `t_j` standing for `i t_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraElement {
    b: CMat,
    t: Vec<f64>,
}

impl LieAlgebraElement {
    pub fn new(b: CMat, t: Vec<f64>) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::DimensionMismatch {
                context: "u(k) element",
                expected: b.rows(),
                found: b.cols(),
            });
        }
        if !b.is_finite() || t.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Lie algebra element"));
        }
        let defect = b.skew_defect();
        if defect > 1e-10 * (1.0 + b.max_abs()) {
            return Err(Error::NotSkewHermitian(defect));
        }
        Ok(Self { b, t })
    }

    pub fn zero(k: usize, n: usize) -> Self {
        Self {
            b: CMat::zeros(k, k),
            t: alloc::vec![0.0; n],
        }
    }

    pub fn unitary_part(&self) -> &CMat {
        &self.b
    }

    pub fn torus_part(&self) -> &[f64] {
        &self.t
    }

    /// `sqrt(|B|_F^2 + |t|^2)`.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.b.norm_sqr() + self.t.iter().map(|x| x * x).sum::<f64>())
    }
}

/// Value of the combined momentum map.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumValue {
    pub unitary: HermitianMatrix,
    /// `-|f_j|^2 / 2` for every column.
    pub torus: Vec<f64>,
}

impl MomentumValue {
    /// Torus coordinates with the last one dropped (the `U(1)^{N-1}` view).
    pub fn reduced_torus(&self) -> &[f64] {
        &self.torus[..self.torus.len().saturating_sub(1)]
    }

    /// `sum_j torus_j + trace(unitary) / 2`; vanishes for values produced from a frame.
    pub fn redundancy_defect(&self) -> f64 {
        self.torus.iter().sum::<f64>() + 0.5 * self.unitary.trace()
    }

    /// The dropped torus coordinate, recovered from the others and the trace.
    pub fn recover_last_torus(&self) -> f64 {
        -0.5 * self.unitary.trace() - self.reduced_torus().iter().sum::<f64>()
    }
}

fn require_shape(context: &'static str, a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        let (expected, found) = if a.0 != b.0 { (a.0, b.0) } else { (a.1, b.1) };
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// `omega(X1, X2) = -Im trace(X1* X2)`.
pub fn symplectic_form(x1: &TangentMatrix, x2: &TangentMatrix) -> Result<f64> {
    require_shape("symplectic form", x1.shape(), x2.shape())?;
    Ok(-x1.as_mat().inner(x2.as_mat()).im)
}

/// `(-|f_1|^2 / 2, ..., -|f_N|^2 / 2)`.
pub fn momentum_torus(f: &FrameMatrix) -> Vec<f64> {
    norms_squared(f).values().iter().map(|r| -0.5 * r).collect()
}

/// `F F*`.
pub fn momentum_unitary(f: &FrameMatrix) -> HermitianMatrix {
    frame_operator(f)
}

pub fn momentum(f: &FrameMatrix) -> MomentumValue {
    MomentumValue {
        unitary: momentum_unitary(f),
        torus: momentum_torus(f),
    }
}

/// Generator of the combined action: `B F + F diag(i t)`.
pub fn infinitesimal_field(f: &FrameMatrix, xi: &LieAlgebraElement) -> Result<TangentMatrix> {
    require_shape("Lie algebra element", (f.k(), f.n()), (xi.b.rows(), xi.t.len()))?;
    let m = f.as_mat();
    let left = &xi.b * m;
    let phases: Vec<C64> = xi.t.iter().map(|&t| C64::new(0.0, t)).collect();
    let right = m.scale_columns(&phases);
    TangentMatrix::new(&left + &right)
}

/// `D_F mu_U(k)(X) = F X* + X F*`.
pub fn momentum_derivative_unitary(f: &FrameMatrix, x: &TangentMatrix) -> Result<HermitianMatrix> {
    require_shape("tangent vector", (f.k(), f.n()), x.shape())?;
    let m = f.as_mat();
    let xm = x.as_mat();
    Ok(HermitianMatrix::symmetrize(&(&(m * &xm.adjoint()) + &(xm * &m.adjoint()))))
}

/// `D_F mu_torus(X)_j = -Re <f_j, X_j>`.
pub fn momentum_derivative_torus(f: &FrameMatrix, x: &TangentMatrix) -> Result<Vec<f64>> {
    require_shape("tangent vector", (f.k(), f.n()), x.shape())?;
    let m = f.as_mat();
    let xm = x.as_mat();
    Ok((0..f.n())
        .map(|j| {
            -(0..f.k())
                .map(|i| (m[(i, j)].conj() * xm[(i, j)]).re)
                .sum::<f64>()
        })
        .collect())
}

/// Evaluates `A` in `u(k)*` on `B`: `(i/2) trace(A B)`. Real for Hermitian `A`
/// and skew-Hermitian `B`; the discarded imaginary part is rounding.
pub fn pair_unitary(a: &HermitianMatrix, b: &CMat) -> f64 {
    let tr = (a.as_mat() * b).trace();
    (C64::new(0.0, 0.5) * tr).re
}

/// `|omega_F(X, X_xi(F)) - D_F mu(X)(xi)|` for the combined momentum map.
pub fn defining_property_residual(
    f: &FrameMatrix,
    x: &TangentMatrix,
    xi: &LieAlgebraElement,
) -> Result<f64> {
    let field = infinitesimal_field(f, xi)?;
    let lhs = symplectic_form(x, &field)?;
    let du = momentum_derivative_unitary(f, x)?;
    let dt = momentum_derivative_torus(f, x)?;
    let rhs = pair_unitary(&du, &xi.b) + dt.iter().zip(&xi.t).map(|(d, t)| d * t).sum::<f64>();
    Ok((lhs - rhs).abs())
}

/// Explicit right inverse of `X -> F X* + X F*` at a full-rank `F`:
/// `X = W (F F*)^{-1} F / 2`, i.e. `W (F_R^{-1})* / 2` with the Moore-Penrose
/// right inverse `F_R^{-1} = F* (F F*)^{-1}`.
pub fn surjectivity_witness(f: &FrameMatrix, w: &HermitianMatrix) -> Result<TangentMatrix> {
    require_shape("hermitian target", (f.k(), f.k()), (w.dim(), w.dim()))?;
    f.rank_check(crate::frame::FRAME_RANK_TOL)?;
    let s_inv = frame_operator(f).eigen().map(|x| 1.0 / x);
    let x = &(w.as_mat() * &s_inv) * f.as_mat();
    TangentMatrix::new(x.scale(0.5))
}

/// Why a momentum value fails to be regular.
#[derive(Clone, Debug, PartialEq)]
pub enum RegularityDiagnosis {
    Regular,
    /// The frame-operator target is singular or indefinite.
    SingularFrameOperator { lambda_min: f64 },
    /// A torus coordinate is not strictly negative.
    NonNegativeTorus { index: usize, value: f64 },
    DimensionMismatch { expected: usize, found: usize },
}

impl RegularityDiagnosis {
    pub fn is_regular(&self) -> bool {
        matches!(self, RegularityDiagnosis::Regular)
    }

    pub fn describe(&self) -> String {
        alloc::format!("{self}")
    }
}

impl fmt::Display for RegularityDiagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularityDiagnosis::Regular => write!(f, "regular"),
            RegularityDiagnosis::SingularFrameOperator { lambda_min } => write!(
                f,
                "frame operator is not positive definite (smallest eigenvalue {lambda_min:e})"
            ),
            RegularityDiagnosis::NonNegativeTorus { index, value } => write!(
                f,
                "torus coordinate {index} is {value}, must be negative (zero is a critical value)"
            ),
            RegularityDiagnosis::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} torus coordinates, found {found}")
            }
        }
    }
}

/// Regular values of the combined map: `S` positive definite and every
/// torus coordinate strictly negative.
pub fn is_regular_value(s: &HermitianMatrix, xi: &[f64], tol: f64) -> RegularityDiagnosis {
    let ev = s.eigenvalues();
    let lambda_min = ev[ev.len() - 1];
    if lambda_min <= tol {
        return RegularityDiagnosis::SingularFrameOperator { lambda_min };
    }
    if let Some(index) = xi.iter().position(|&v| v >= -tol) {
        return RegularityDiagnosis::NonNegativeTorus {
            index,
            value: xi[index],
        };
    }
    RegularityDiagnosis::Regular
}
