//! Gramians, unitary equivalence and flag types.
//!
//! Two full-rank frames have the same Gramian `F* F` exactly when one is a
//! left unitary multiple of the other, so the Gram map identifies unitary
//! classes of frames with points of a `U(N)` coadjoint orbit. The
//! multiplicity pattern of the frame operator spectrum fixes which flag
//! manifold that orbit is.

use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::frame::{gram, FrameMatrix, HermitianMatrix, FRAME_RANK_TOL};
use crate::linalg::{polar_unitary, CMat, HermitianEigen};

/// Default relative clustering tolerance for eigenvalue multiplicities.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Multiplicity pattern `(k_1, ..., k_l)` of a positive-definite spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagType {
    multiplicities: Vec<usize>,
    distinct_eigenvalues: Vec<f64>,
}

impl FlagType {
    /// Flag type from multiplicities alone; eigenvalues are left empty.
    pub fn from_multiplicities(multiplicities: Vec<usize>) -> Result<Self> {
        if multiplicities.is_empty() || multiplicities.contains(&0) {
            return Err(Error::Invalid("multiplicities must be positive".into()));
        }
        Ok(Self {
            multiplicities,
            distinct_eigenvalues: Vec::new(),
        })
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Distinct eigenvalues, strictly decreasing (cluster means).
    pub fn distinct_eigenvalues(&self) -> &[f64] {
        &self.distinct_eigenvalues
    }

    /// `d_i = k_1 + ... + k_i`.
    pub fn partial_dims(&self) -> Vec<usize> {
        self.multiplicities
            .iter()
            .scan(0, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect()
    }

    /// Number of distinct eigenvalues `l`.
    pub fn len(&self) -> usize {
        self.multiplicities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplicities.is_empty()
    }

    pub fn k(&self) -> usize {
        self.multiplicities.iter().sum()
    }
}

/// Eigendecomposition of a positive-definite matrix together with the index
/// ranges (into the descending eigenvalue order) of its eigenspaces.
#[derive(Clone, Debug)]
pub struct Eigenspaces {
    pub eigen: HermitianEigen,
    pub blocks: Vec<Range<usize>>,
}

impl Eigenspaces {
    pub fn flag_type(&self) -> FlagType {
        let ev = &self.eigen.values;
        FlagType {
            multiplicities: self.blocks.iter().map(|b| b.len()).collect(),
            distinct_eigenvalues: self
                .blocks
                .iter()
                .map(|b| ev[b.clone()].iter().sum::<f64>() / b.len() as f64)
                .collect(),
        }
    }
}

/// Clusters the spectrum of `s`: adjacent eigenvalues join when their gap is
/// at most `cluster_tol * max(lambda_1, 1)`. A gap within a factor 2 of that
/// threshold is reported as ambiguous.
pub fn eigenspaces(s: &HermitianMatrix, cluster_tol: f64) -> Result<Eigenspaces> {
    let eigen = s.eigen();
    let ev = &eigen.values;
    let lambda_min = ev[ev.len() - 1];
    if lambda_min <= 0.0 {
        return Err(Error::NotPositiveDefinite(lambda_min));
    }
    let threshold = cluster_tol * ev[0].max(1.0);
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..ev.len() {
        let gap = ev[i - 1] - ev[i];
        if gap > 0.5 * threshold && gap <= 2.0 * threshold {
            return Err(Error::AmbiguousClustering { gap, threshold });
        }
        if gap > threshold {
            blocks.push(start..i);
            start = i;
        }
    }
    blocks.push(start..ev.len());
    Ok(Eigenspaces { eigen, blocks })
}

pub fn flag_type(s: &HermitianMatrix, cluster_tol: f64) -> Result<FlagType> {
    Ok(eigenspaces(s, cluster_tol)?.flag_type())
}

/// `dim O_S = k^2 - sum k_i^2`.
pub fn orbit_dimension(ft: &FlagType) -> usize {
    let k = ft.k();
    k * k - ft.multiplicities.iter().map(|m| m * m).sum::<usize>()
}

/// `2k(N - k) + dim O_S`, the dimension of the `U(k)` reduction over the orbit of `S`.
pub fn reduced_dimension(ft: &FlagType, k: usize, n: usize) -> usize {
    debug_assert_eq!(k, ft.k());
    2 * k * n.saturating_sub(k) + orbit_dimension(ft)
}

fn gram_gap(f1: &FrameMatrix, f2: &FrameMatrix) -> Result<f64> {
    if f1.k() != f2.k() || f1.n() != f2.n() {
        return Err(Error::DimensionMismatch {
            context: "frame pair",
            expected: f1.k() * f1.n(),
            found: f2.k() * f2.n(),
        });
    }
    Ok(gram(f1).distance(&gram(f2)))
}

/// `|F1* F1 - F2* F2|_F <= tol (1 + |F1|^2)`.
pub fn same_gram_class(f1: &FrameMatrix, f2: &FrameMatrix, tol: f64) -> bool {
    match gram_gap(f1, f2) {
        Ok(gap) => gap <= tol * (1.0 + f1.as_mat().norm_sqr()),
        Err(_) => false,
    }
}

/// Recovers a unitary `U` with `F2 = U F1` as the polar factor of `F2 F1*`,
/// provided the Gramians agree. Returns `None` when they do not, or when the
/// recovered `U` misses `|F2 - U F1| <= 10 tol |F1|`.
pub fn unitary_equivalent(f1: &FrameMatrix, f2: &FrameMatrix, tol: f64) -> Result<Option<CMat>> {
    let gap = gram_gap(f1, f2)?;
    f1.rank_check(FRAME_RANK_TOL)?;
    f2.rank_check(FRAME_RANK_TOL)?;
    if gap > tol * (1.0 + f1.as_mat().norm_sqr()) {
        return Ok(None);
    }
    let u = polar_unitary(&(f2.as_mat() * &f1.as_mat().adjoint()));
    let residual = (f2.as_mat() - &(&u * f1.as_mat())).norm();
    if residual <= 10.0 * tol * f1.norm().max(1.0) {
        Ok(Some(u))
    } else {
        Ok(None)
    }
}
