//! Admissible squared norms and frames with prescribed spectrum and norms.
//!
//! A squared-norm vector `r` is admissible for the spectrum `lambda` exactly
//! when `r` (sorted descending) is majorized by `lambda`. Construction runs a
//! Bendel-Mickey style chain of plane rotations, but on the columns of `F`
//! rather than on its Gramian: starting from `F = [diag(sqrt(lambda)) | 0]`,
//! each right rotation `F <- F R` leaves `F F*` untouched and moves squared
//! norm between two columns until one of them hits its target. The Gramian
//! `F* F` follows the classical two-sided rotation chain step for step.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::flows::{fiber_residual, flow_to_fiber, FlowOptions, FlowStatus};
use crate::frame::{FrameMatrix, HermitianMatrix, NormSquaredVector};
use crate::gram::{eigenspaces, DEFAULT_CLUSTER_TOL};
use crate::linalg::{CMat, C64};
use crate::momentum::is_regular_value;
use crate::sampling::{haar_unitary, random_phases, seeded};

/// Tolerance for admissibility sums, relative to `sum(lambda)`.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;
const FIBER_RETRY_CAP: usize = 8;
const HAAR_START_TRIES: usize = 4;

/// Positive eigenvalues `lambda_1 >= ... >= lambda_k > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSpec(Vec<f64>);

impl SpectrumSpec {
    /// Sorts into descending order; every entry must be positive and finite.
    pub fn new(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Invalid("empty spectrum".into()));
        }
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("spectrum"));
        }
        if let Some(&bad) = eigenvalues.iter().find(|&&x| x <= 0.0) {
            return Err(Error::NotPositiveDefinite(bad));
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(eigenvalues))
    }

    pub fn of(s: &HermitianMatrix) -> Result<Self> {
        Self::new(s.eigenvalues())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// A momentum level set: frame operator `S` and squared norms `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberTarget {
    s: HermitianMatrix,
    r: NormSquaredVector,
}

impl FiberTarget {
    /// Requires `(S, -r/2)` to be a regular value and `trace S = sum r`.
    pub fn new(s: HermitianMatrix, r: NormSquaredVector) -> Result<Self> {
        r.require_positive()?;
        let xi: Vec<f64> = r.values().iter().map(|v| -0.5 * v).collect();
        let diagnosis = is_regular_value(&s, &xi, 0.0);
        if !diagnosis.is_regular() {
            return Err(Error::NotRegular(diagnosis));
        }
        let total = r.sum();
        if (s.trace() - total).abs() > ADMISSIBILITY_TOL * total {
            return Err(Error::Inadmissible(AdmissibilityViolation::TotalSum {
                r_sum: total,
                lambda_sum: s.trace(),
            }));
        }
        Ok(Self { s, r })
    }

    /// Pairs `S` and `r` without any validation. Useful for evaluating the
    /// fiber residual against momentum values whose fiber is empty.
    pub fn unchecked(s: HermitianMatrix, r: NormSquaredVector) -> Self {
        Self { s, r }
    }

    /// The unit-norm tight frames: `S = (N/k) Id`, `r = 1`.
    pub fn funtf(k: usize, n: usize) -> Result<Self> {
        Self::new(
            HermitianMatrix::scaled_identity(k, n as f64 / k as f64),
            NormSquaredVector::ones(n),
        )
    }

    pub fn s(&self) -> &HermitianMatrix {
        &self.s
    }

    pub fn r(&self) -> &NormSquaredVector {
        &self.r
    }

    pub fn k(&self) -> usize {
        self.s.dim()
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn spectrum(&self) -> Result<SpectrumSpec> {
        SpectrumSpec::of(&self.s)
    }
}

/// The first violated majorization condition.
#[derive(Clone, Debug, PartialEq)]
pub enum AdmissibilityViolation {
    /// `sum r != sum lambda`.
    TotalSum { r_sum: f64, lambda_sum: f64 },
    /// `r_1 + ... + r_ell > lambda_1 + ... + lambda_ell` (r sorted descending).
    PartialSum {
        ell: usize,
        r_partial: f64,
        lambda_partial: f64,
    },
}

impl fmt::Display for AdmissibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdmissibilityViolation::TotalSum { r_sum, lambda_sum } => {
                write!(f, "total sum: sum r = {r_sum} differs from sum lambda = {lambda_sum}")
            }
            AdmissibilityViolation::PartialSum {
                ell,
                r_partial,
                lambda_partial,
            } => write!(
                f,
                "partial sum ℓ={ell}: {r_partial} exceeds {lambda_partial}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Admissibility {
    Admissible,
    Violated(AdmissibilityViolation),
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible)
    }
}

/// Majorization test for `r` (sorted descending) against `lambda`, with the
/// slack `tol * sum(lambda)` on every comparison.
pub fn is_admissible(lambda: &SpectrumSpec, r: &NormSquaredVector, tol: f64) -> Result<Admissibility> {
    let (k, n) = (lambda.k(), r.len());
    if n < k {
        return Err(Error::Invalid(alloc::format!(
            "{n} vectors cannot span C^{k}: need N >= k"
        )));
    }
    let slack = tol * lambda.sum();
    let r_sum = r.sum();
    if (r_sum - lambda.sum()).abs() > slack {
        return Ok(Admissibility::Violated(AdmissibilityViolation::TotalSum {
            r_sum,
            lambda_sum: lambda.sum(),
        }));
    }
    let sorted = r.sorted_descending();
    let (mut rp, mut lp) = (0.0, 0.0);
    for ell in 1..=k {
        rp += sorted[ell - 1];
        lp += lambda.values()[ell - 1];
        if rp > lp + slack {
            return Ok(Admissibility::Violated(AdmissibilityViolation::PartialSum {
                ell,
                r_partial: rp,
                lambda_partial: lp,
            }));
        }
    }
    Ok(Admissibility::Admissible)
}

fn require_admissible(lambda: &SpectrumSpec, r: &NormSquaredVector) -> Result<()> {
    r.require_positive()?;
    match is_admissible(lambda, r, ADMISSIBILITY_TOL)? {
        Admissibility::Admissible => Ok(()),
        Admissibility::Violated(v) => Err(Error::Inadmissible(v)),
    }
}

/// Sets `|f_i|^2 = tau` by a plane rotation of columns `i, j`, assuming
/// `|f_i|^2 < tau < |f_j|^2`.
fn rotate_to_target(f: &mut CMat, i: usize, j: usize, tau: f64) {
    let a = f.column_norm_sqr(i);
    let b = f.column_norm_sqr(j);
    let g: C64 = (0..f.rows()).map(|row| f[(row, i)].conj() * f[(row, j)]).sum();
    let mag = g.norm();
    let phase = if mag > 0.0 { g.conj() / mag } else { C64::new(1.0, 0.0) };
    // after rephasing column j the cross term is real: `f_i* f_j = mag`
    let disc = (mag * mag - (b - tau) * (a - tau)).max(0.0);
    let t = (a - tau) / (mag + libm::sqrt(disc));
    let c = 1.0 / libm::sqrt(1.0 + t * t);
    let s = t * c;
    for row in 0..f.rows() {
        let x = f[(row, i)];
        let y = f[(row, j)] * phase;
        f[(row, i)] = x * c - y * s;
        f[(row, j)] = x * s + y * c;
    }
}

/// Runs the rotation chain on `f` so that column `p` ends with squared norm
/// `r[p]`, given that `r` is majorized by the current squared column norms.
fn schur_horn_chain(mut f: CMat, r: &[f64]) -> Result<CMat> {
    let n = f.cols();
    let scale = r.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let eps = 1e-14 * scale;
    let mut unfixed: Vec<usize> = (0..n).collect();
    let mut targets: Vec<usize> = (0..n).collect();
    // smallest target last so it can be popped
    targets.sort_by(|&a, &b| r[b].total_cmp(&r[a]));
    let mut placement = alloc::vec![usize::MAX; n];

    while unfixed.len() > 1 {
        let target = targets.pop().expect("targets and columns stay in step");
        let tau = r[target];
        let norms: Vec<f64> = unfixed.iter().map(|&c| f.column_norm_sqr(c)).collect();
        let (lo_pos, _) = norms
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("at least two unfixed columns");
        let hi_pos = norms
            .iter()
            .enumerate()
            .filter(|&(p, &d)| p != lo_pos && d >= tau - eps)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .or_else(|| {
                norms
                    .iter()
                    .enumerate()
                    .filter(|&(p, _)| p != lo_pos)
                    .max_by(|a, b| a.1.total_cmp(b.1))
            })
            .map(|(p, _)| p)
            .expect("at least two unfixed columns");
        let (i, j) = (unfixed[lo_pos], unfixed[hi_pos]);
        let fixed_pos = if (norms[lo_pos] - tau).abs() <= eps {
            lo_pos
        } else if (norms[hi_pos] - tau).abs() <= eps {
            hi_pos
        } else {
            if norms[lo_pos] > tau || norms[hi_pos] < tau {
                return Err(Error::ConstructionFailed(alloc::format!(
                    "target {tau} is not bracketed by column norms {} and {}",
                    norms[lo_pos],
                    norms[hi_pos]
                )));
            }
            rotate_to_target(&mut f, i, j, tau);
            lo_pos
        };
        placement[target] = unfixed.remove(fixed_pos);
    }
    placement[targets[0]] = unfixed[0];
    let all_rows: Vec<usize> = (0..f.rows()).collect();
    Ok(f.select(&all_rows, &placement))
}

/// `r` strictly majorized by `d` (equal lengths): every proper partial sum
/// of `r` sits at least `margin` below that of `d`, totals agree within `margin`.
fn strictly_majorized_by(r: &[f64], d: &[f64], margin: f64) -> bool {
    let desc = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    let (r, d) = (desc(r), desc(d));
    let (mut rp, mut dp) = (0.0, 0.0);
    for (x, y) in r.iter().zip(&d).take(r.len().saturating_sub(1)) {
        rp += x;
        dp += y;
        if rp > dp - margin {
            return false;
        }
    }
    (r.iter().sum::<f64>() - d.iter().sum::<f64>()).abs() <= margin
}

fn seed_frame(lambda: &SpectrumSpec, n: usize) -> CMat {
    let k = lambda.k();
    CMat::from_fn(k, n, |i, j| {
        if i == j {
            C64::new(libm::sqrt(lambda.values()[i]), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn construct_with<R: Rng + ?Sized>(
    lambda: &SpectrumSpec,
    r: &NormSquaredVector,
    rng: Option<&mut R>,
) -> Result<FrameMatrix> {
    require_admissible(lambda, r)?;
    let mut f = seed_frame(lambda, r.len());
    if let Some(rng) = rng {
        // the chain needs r majorized by the starting column norms, which a
        // rotated seed only has for some draws; keep the plain seed otherwise
        for _ in 0..HAAR_START_TRIES {
            let g = &f * &haar_unitary(rng, r.len());
            let norms: Vec<f64> = (0..g.cols()).map(|j| g.column_norm_sqr(j)).collect();
            if strictly_majorized_by(r.values(), &norms, 1e-10 * lambda.sum()) {
                f = g;
                break;
            }
        }
    }
    FrameMatrix::new(schur_horn_chain(f, r.values())?)
}

/// Frame with `spec(F F*) = lambda` and `|f_j|^2 = r_j`; here `F F*` is
/// `diag(lambda)`. Deterministic.
pub fn construct_frame(lambda: &SpectrumSpec, r: &NormSquaredVector) -> Result<FrameMatrix> {
    construct_with::<crate::sampling::SeededRng>(lambda, r, None)
}

/// Like [`construct_frame`], starting the rotation chain from a Haar-random
/// rotation of the block seed.
pub fn construct_frame_randomized<R: Rng + ?Sized>(
    lambda: &SpectrumSpec,
    r: &NormSquaredVector,
    rng: &mut R,
) -> Result<FrameMatrix> {
    construct_with(lambda, r, Some(rng))
}

/// Rotates a frame with `F F* = diag(spec S)` into `F F* = S`.
fn rotate_into(target: &FiberTarget, f: FrameMatrix) -> Result<FrameMatrix> {
    let e = target.s().eigen();
    f.left_mul(&e.vectors)
}

/// A point of the fiber `F_S(r)`.
pub fn construct_on_fiber(target: &FiberTarget) -> Result<FrameMatrix> {
    let f = construct_frame(&target.spectrum()?, target.r())?;
    rotate_into(target, f)
}

/// Block-diagonal Haar unitary on the eigenspaces of `S`, in the standard basis.
pub fn random_commutant_unitary<R: Rng + ?Sized>(s: &HermitianMatrix, rng: &mut R) -> CMat {
    let k = s.dim();
    let (eig, blocks) = match eigenspaces(s, DEFAULT_CLUSTER_TOL) {
        Ok(es) => (es.eigen, es.blocks),
        Err(_) => {
            let eig = s.eigen();
            (eig, (0..k).map(|i| i..i + 1).collect())
        }
    };
    let mut block = CMat::zeros(k, k);
    for b in &blocks {
        let u = haar_unitary(rng, b.len());
        for (a, row) in b.clone().enumerate() {
            for (c, col) in b.clone().enumerate() {
                block[(row, col)] = u[(a, c)];
            }
        }
    }
    &(&eig.vectors * &block) * &eig.vectors.adjoint()
}

/// A seeded random point of `F_S(r)`: a randomized rotation-chain frame,
/// random column phases, and a random unitary commuting with `S`. All three
/// moves keep the frame on the fiber; a final repair flow removes rounding
/// drift. Deterministic given `seed`.
pub fn random_frame_on_fiber(target: &FiberTarget, seed: u64) -> Result<FrameMatrix> {
    let lambda = target.spectrum()?;
    require_admissible(&lambda, target.r())?;
    let scale = target.s().trace().max(1.0);
    let mut last_err = Error::ConstructionFailed("no attempt made".to_string());
    for attempt in 0..FIBER_RETRY_CAP {
        let mut rng = seeded(seed.wrapping_add((attempt as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        let f = construct_frame_randomized(&lambda, target.r(), &mut rng)?;
        let f = rotate_into(target, f)?;
        let f = f.scale_columns(&random_phases(&mut rng, target.n()))?;
        let f = f.left_mul(&random_commutant_unitary(target.s(), &mut rng))?;
        if fiber_residual(&f, target)? <= 1e-24 * scale * scale {
            return Ok(f);
        }
        let opts = FlowOptions {
            tol: 1e-24 * scale * scale,
            ..FlowOptions::default()
        };
        let (repaired, report) = flow_to_fiber(&f, target, &opts)?;
        if report.status == FlowStatus::Converged {
            return Ok(repaired);
        }
        last_err = Error::ConstructionFailed(alloc::format!(
            "fiber repair ended with {:?} at residual {:e}",
            report.status,
            report.final_residual
        ));
    }
    Err(last_err)
}
