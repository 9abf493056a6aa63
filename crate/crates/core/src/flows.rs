//! Repairing frames that sit near a fiber.
//!
//! The descent functional is the squared distance of the momentum value from
//! the target,
//!
//! ```text
//! Phi(F) = |F F* - S|_F^2 + w * sum_j (|f_j|^2 - r_j)^2,
//! ```
//!
//! whose gradient for the real inner product `Re trace(X* Y)` is
//! `4 (F F* - S) F + 4 w F diag(|f_j|^2 - r_j)`. [`flow_to_fiber`] follows
//! the negative gradient with Armijo backtracking; [`alternate_projections`]
//! alternates the two exact single-constraint projections.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frame::{frame_operator, norms_squared, FrameMatrix, HermitianMatrix, NormSquaredVector};
use crate::linalg::{svd, CMat, C64};
use crate::momentum::TangentMatrix;
use crate::synthesis::FiberTarget;

/// Flows abort when `sigma_min < LOST_RANK_TOL * sigma_max`.
pub const LOST_RANK_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct FlowOptions {
    pub max_iters: usize,
    /// Converged once `Phi <= tol`.
    pub tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    /// Window over which a relative decrease below `1e-12` counts as a stall.
    pub stall_iters: usize,
    /// Weight `w` of the squared-norm block in `Phi`.
    pub norm_weight: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tol: 1e-10,
            step_init: 1e-1,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            stall_iters: 50,
            norm_weight: 1.0,
        }
    }
}

impl FlowOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tol > 0.0
            && self.max_iters >= 1
            && self.step_init > 0.0
            && self.armijo_c > 0.0
            && self.armijo_c < 1.0
            && self.backtrack_factor > 0.0
            && self.backtrack_factor < 1.0
            && self.norm_weight > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(alloc::format!("invalid flow options: {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowStatus {
    Converged,
    StalledAtCriticalPoint,
    MaxIters,
    LostRank,
}

impl FlowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlowStatus::Converged => "converged",
            FlowStatus::StalledAtCriticalPoint => "stalled_at_critical_point",
            FlowStatus::MaxIters => "max_iters",
            FlowStatus::LostRank => "lost_rank",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowReport {
    pub final_residual: f64,
    pub iterations: usize,
    pub status: FlowStatus,
    /// `Phi` at the start and after every accepted step.
    pub residual_trace: Vec<f64>,
}

fn require_target_shape(f: &FrameMatrix, target: &FiberTarget) -> Result<()> {
    if f.k() != target.k() {
        return Err(Error::DimensionMismatch {
            context: "frame rows vs target",
            expected: target.k(),
            found: f.k(),
        });
    }
    if f.n() != target.n() {
        return Err(Error::DimensionMismatch {
            context: "frame columns vs target",
            expected: target.n(),
            found: f.n(),
        });
    }
    Ok(())
}

fn weighted_residual(m: &CMat, target: &FiberTarget, w: f64) -> f64 {
    let s = &(m * &m.adjoint()) - target.s().as_mat();
    let norms: f64 = target
        .r()
        .values()
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let d = m.column_norm_sqr(j) - r;
            d * d
        })
        .sum();
    s.norm_sqr() + w * norms
}

fn weighted_gradient(m: &CMat, target: &FiberTarget, w: f64) -> CMat {
    let defect = &(m * &m.adjoint()) - target.s().as_mat();
    let left = (&defect * m).scale(4.0);
    let d: Vec<C64> = target
        .r()
        .values()
        .iter()
        .enumerate()
        .map(|(j, r)| C64::new(4.0 * w * (m.column_norm_sqr(j) - r), 0.0))
        .collect();
    &left + &m.scale_columns(&d)
}

/// `Phi(F) = |F F* - S|_F^2 + sum_j (|f_j|^2 - r_j)^2`.
pub fn fiber_residual(f: &FrameMatrix, target: &FiberTarget) -> Result<f64> {
    require_target_shape(f, target)?;
    Ok(weighted_residual(f.as_mat(), target, 1.0))
}

/// `sqrt(Phi)`: the Euclidean distance of the momentum value from the target.
pub fn fiber_distance(f: &FrameMatrix, target: &FiberTarget) -> Result<f64> {
    fiber_residual(f, target).map(libm::sqrt)
}

/// `grad Phi = 4 (F F* - S) F + 4 F diag(|f_j|^2 - r_j)`.
pub fn fiber_residual_gradient(f: &FrameMatrix, target: &FiberTarget) -> Result<TangentMatrix> {
    require_target_shape(f, target)?;
    TangentMatrix::new(weighted_gradient(f.as_mat(), target, 1.0))
}

fn lost_rank(m: &CMat) -> bool {
    let sigma = svd(m).sigma;
    let top = sigma[0];
    let bottom = if m.cols() < m.rows() { 0.0 } else { sigma[sigma.len() - 1] };
    !(top > 0.0 && bottom >= LOST_RANK_TOL * top)
}

struct StallWindow {
    span: usize,
}

impl StallWindow {
    /// True when the last `span` accepted steps shrank `Phi` by a relative
    /// amount below `1e-12`.
    fn stalled(&self, trace: &[f64]) -> bool {
        if self.span == 0 || trace.len() <= self.span {
            return false;
        }
        let old = trace[trace.len() - 1 - self.span];
        let new = trace[trace.len() - 1];
        old - new <= 1e-12 * old
    }
}

fn finish(f: CMat, residual: f64, iterations: usize, status: FlowStatus, trace: Vec<f64>) -> Result<(FrameMatrix, FlowReport)> {
    Ok((
        FrameMatrix::new(f)?,
        FlowReport {
            final_residual: residual,
            iterations,
            status,
            residual_trace: trace,
        },
    ))
}

/// Negative gradient descent on `Phi` with Armijo backtracking.
///
/// The trial step is the Barzilai-Borwein length `|dF|^2 / <dF, d grad>`
/// from the last two iterates (twice the last accepted step when that is
/// not positive), so it adapts to the local curvature; backtracking keeps
/// every accepted step a strict decrease. Statuses: `Converged` once
/// `Phi <= tol`; `LostRank` when the iterate leaves frame space;
/// `StalledAtCriticalPoint` when the gradient vanishes (`|grad| <= 10 tol`),
/// the line search cannot decrease `Phi`, or progress stalls over
/// `stall_iters` steps; `MaxIters` otherwise.
pub fn flow_to_fiber(f0: &FrameMatrix, target: &FiberTarget, opts: &FlowOptions) -> Result<(FrameMatrix, FlowReport)> {
    opts.validate()?;
    require_target_shape(f0, target)?;
    let w = opts.norm_weight;
    let mut f = f0.as_mat().clone();
    let mut phi = weighted_residual(&f, target, w);
    let mut trace = alloc::vec![phi];
    let mut step = opts.step_init;
    let mut prev: Option<(CMat, CMat)> = None;
    let stall = StallWindow { span: opts.stall_iters };

    for it in 0..opts.max_iters {
        if phi <= opts.tol {
            return finish(f, phi, it, FlowStatus::Converged, trace);
        }
        if lost_rank(&f) {
            return finish(f, phi, it, FlowStatus::LostRank, trace);
        }
        let g = weighted_gradient(&f, target, w);
        let g2 = g.norm_sqr();
        if libm::sqrt(g2) <= 10.0 * opts.tol || stall.stalled(&trace) {
            return finish(f, phi, it, FlowStatus::StalledAtCriticalPoint, trace);
        }
        let mut alpha = match &prev {
            Some((pf, pg)) => {
                let ds = &f - pf;
                let dg = &g - pg;
                let sy = ds.real_inner(&dg);
                if sy > 0.0 {
                    ds.norm_sqr() / sy
                } else {
                    2.0 * step
                }
            }
            None => step,
        }
        .min(1e6 * opts.step_init);
        let accepted = loop {
            let cand = &f - &g.scale(alpha);
            let cand_phi = weighted_residual(&cand, target, w);
            if cand_phi <= phi - opts.armijo_c * alpha * g2 {
                break Some((cand, cand_phi));
            }
            alpha *= opts.backtrack_factor;
            if alpha * libm::sqrt(g2) <= 1e-18 * (1.0 + f.norm()) {
                break None;
            }
        };
        match accepted {
            Some((cand, cand_phi)) => {
                prev = Some((core::mem::replace(&mut f, cand), g));
                phi = cand_phi;
                step = alpha;
                trace.push(phi);
            }
            None => return finish(f, phi, it, FlowStatus::StalledAtCriticalPoint, trace),
        }
    }
    let status = if phi <= opts.tol {
        FlowStatus::Converged
    } else {
        FlowStatus::MaxIters
    };
    finish(f, phi, opts.max_iters, status, trace)
}

/// `S^{1/2} (F F*)^{-1/2} F`, the frame closest to a full-rank `F` with frame
/// operator `S` along the left `GL(k)` orbit.
pub fn project_frame_operator(f: &FrameMatrix, s: &HermitianMatrix) -> Result<FrameMatrix> {
    if s.dim() != f.k() {
        return Err(Error::DimensionMismatch {
            context: "frame operator target",
            expected: f.k(),
            found: s.dim(),
        });
    }
    f.rank_check(LOST_RANK_TOL)?;
    let s_eig = s.eigen();
    let lambda_min = s_eig.values[s_eig.values.len() - 1];
    if lambda_min <= 0.0 {
        return Err(Error::NotPositiveDefinite(lambda_min));
    }
    let root = s_eig.map(libm::sqrt);
    let inv_root = frame_operator(f).eigen().map(|x| 1.0 / libm::sqrt(x));
    FrameMatrix::new(&(&root * &inv_root) * f.as_mat())
}

/// Rescales column `j` by `sqrt(r_j) / |f_j|`.
pub fn project_norms(f: &FrameMatrix, r: &NormSquaredVector) -> Result<FrameMatrix> {
    if r.len() != f.n() {
        return Err(Error::DimensionMismatch {
            context: "squared norms",
            expected: f.n(),
            found: r.len(),
        });
    }
    let current = norms_squared(f);
    let mut d = Vec::with_capacity(f.n());
    for (j, (&have, &want)) in current.values().iter().zip(r.values()).enumerate() {
        if have == 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        d.push(C64::new(libm::sqrt(want / have), 0.0));
    }
    f.scale_columns(&d)
}

/// Alternates [`project_frame_operator`] and [`project_norms`]. A round that
/// would increase `Phi` is rejected and ends the run as stalled.
pub fn alternate_projections(
    f0: &FrameMatrix,
    target: &FiberTarget,
    opts: &FlowOptions,
) -> Result<(FrameMatrix, FlowReport)> {
    opts.validate()?;
    require_target_shape(f0, target)?;
    let w = opts.norm_weight;
    let mut f = f0.clone();
    let mut phi = weighted_residual(f.as_mat(), target, w);
    let mut trace = alloc::vec![phi];
    let stall = StallWindow { span: opts.stall_iters };

    for it in 0..opts.max_iters {
        if phi <= opts.tol {
            return finish(f.into_mat(), phi, it, FlowStatus::Converged, trace);
        }
        if lost_rank(f.as_mat()) {
            return finish(f.into_mat(), phi, it, FlowStatus::LostRank, trace);
        }
        if stall.stalled(&trace) {
            return finish(f.into_mat(), phi, it, FlowStatus::StalledAtCriticalPoint, trace);
        }
        let cand = match project_frame_operator(&f, target.s()).and_then(|g| project_norms(&g, target.r())) {
            Ok(c) => c,
            Err(Error::NotAFrame { .. }) | Err(Error::ZeroColumn(_)) => {
                return finish(f.into_mat(), phi, it, FlowStatus::LostRank, trace)
            }
            Err(e) => return Err(e),
        };
        let cand_phi = weighted_residual(cand.as_mat(), target, w);
        if cand_phi > phi {
            return finish(f.into_mat(), phi, it, FlowStatus::StalledAtCriticalPoint, trace);
        }
        f = cand;
        phi = cand_phi;
        trace.push(phi);
    }
    let status = if phi <= opts.tol {
        FlowStatus::Converged
    } else {
        FlowStatus::MaxIters
    };
    finish(f.into_mat(), phi, opts.max_iters, status, trace)
}
