//! Discrete paths inside a fiber `F_S(r)`.
//!
//! [`connect`] aligns the far endpoint to the near one with a unitary `V`
//! commuting with `S`, follows the chord from `F0` to `V F1` while pulling
//! every sample back onto the fiber (each pull starts from the chord point
//! shifted by the previous sample's offset from the chord, tapered to zero
//! at the segment end), bisects wherever consecutive
//! samples end up further apart than `delta`, and finally walks the
//! one-parameter subgroup `s -> exp(i (1 - s) H) F1`, `exp(iH) = V`, back to
//! the literal endpoint `F1`. Left multiplication by a unitary commuting
//! with `S` fixes both `F F*` and every column norm, so that last leg stays
//! on the fiber up to rounding; it is still checked and projected like the
//! chord.

use alloc::string::ToString;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::flows::{fiber_distance, flow_to_fiber, FlowOptions, FlowStatus};
use crate::frame::{FrameMatrix, HermitianMatrix};
use crate::gram::{eigenspaces, DEFAULT_CLUSTER_TOL};
use crate::linalg::{polar_unitary, unitary_exp, unitary_log, CMat};
use crate::sampling::{gaussian_matrix, seeded, SeededRng};
use crate::synthesis::FiberTarget;

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectOptions {
    /// Each sample must satisfy `sqrt(Phi) <= path_tol`.
    pub path_tol: f64,
    /// Largest allowed step between samples, relative to `|F0|_F`.
    pub delta: f64,
    pub max_refine_depth: usize,
    pub max_restarts: usize,
    pub seed: u64,
    /// Size of the random kick applied before a retried projection, relative to `|F|_F`.
    pub kick: f64,
    /// Iteration cap of each per-sample projection.
    pub projection_max_iters: usize,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        Self {
            path_tol: 1e-8,
            delta: 0.05,
            max_refine_depth: 12,
            max_restarts: 5,
            seed: 0,
            kick: 1e-4,
            projection_max_iters: 20_000,
        }
    }
}

impl ConnectOptions {
    fn validate(&self) -> Result<()> {
        if self.path_tol > 0.0 && self.delta > 0.0 && self.kick >= 0.0 && self.projection_max_iters > 0 {
            Ok(())
        } else {
            Err(Error::Invalid(alloc::format!("invalid connect options: {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub t: f64,
    pub frame: FrameMatrix,
}

/// Ordered samples `(t_i, F_i)` with `t_0 = 0` and `t_last = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FramePath {
    pub samples: Vec<PathSample>,
    pub target: FiberTarget,
}

impl FramePath {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Largest Frobenius distance between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].frame.distance(&w[1].frame))
            .fold(0.0, f64::max)
    }
}

/// Result of [`gauge_align`].
#[derive(Clone, Debug)]
pub struct GaugeAlignment {
    /// `V F1`.
    pub aligned: FrameMatrix,
    /// Unitary commuting with `S`.
    pub unitary: CMat,
    /// Hermitian `H` commuting with `S` with `exp(iH) = V`.
    pub log: CMat,
    /// Set when the eigenspaces of `S` could not be resolved and `V = Id` was used.
    pub fell_back: bool,
}

fn embed_block(full: &mut CMat, block: &CMat, range: &core::ops::Range<usize>) {
    for (a, row) in range.clone().enumerate() {
        for (b, col) in range.clone().enumerate() {
            full[(row, col)] = block[(a, b)];
        }
    }
}

/// Unitary `V` in the commutant of `S` minimizing `|F0 - V F1|_F`: on every
/// eigenspace of `S` it is the polar factor of the matching block of `F0 F1*`.
pub fn gauge_align(f0: &FrameMatrix, f1: &FrameMatrix, s: &HermitianMatrix) -> Result<GaugeAlignment> {
    if f0.k() != f1.k() || f0.n() != f1.n() || s.dim() != f0.k() {
        return Err(Error::DimensionMismatch {
            context: "gauge alignment",
            expected: f0.k(),
            found: f1.k().max(s.dim()),
        });
    }
    let k = f0.k();
    let identity = || GaugeAlignment {
        aligned: f1.clone(),
        unitary: CMat::identity(k),
        log: CMat::zeros(k, k),
        fell_back: true,
    };
    let spaces = match eigenspaces(s, DEFAULT_CLUSTER_TOL) {
        Ok(es) => es,
        Err(Error::AmbiguousClustering { .. }) => return Ok(identity()),
        Err(e) => return Err(e),
    };
    let e = &spaces.eigen.vectors;
    let cross = &(&e.adjoint() * &(f0.as_mat() * &f1.as_mat().adjoint())) * e;
    let mut v_blocks = CMat::zeros(k, k);
    let mut h_blocks = CMat::zeros(k, k);
    for range in &spaces.blocks {
        let idx: Vec<usize> = range.clone().collect();
        let vb = polar_unitary(&cross.select(&idx, &idx));
        embed_block(&mut h_blocks, &unitary_log(&vb), range);
        embed_block(&mut v_blocks, &vb, range);
    }
    let v = &(e * &v_blocks) * &e.adjoint();
    let h = (&(e * &h_blocks) * &e.adjoint()).hermitian_part();
    let aligned = f1.left_mul(&v)?;
    if f0.distance(&aligned) > f0.distance(f1) {
        return Ok(GaugeAlignment {
            fell_back: false,
            ..identity()
        });
    }
    Ok(GaugeAlignment {
        aligned,
        unitary: v,
        log: h,
        fell_back: false,
    })
}

/// Raw (unprojected) curve between two samples.
enum Chord<'a> {
    Line { from: &'a CMat, to: &'a CMat },
    /// `s -> exp(i (1 - s) H) F1`.
    Arc { log: &'a CMat, end: &'a CMat },
}

impl Chord<'_> {
    fn at(&self, s: f64) -> CMat {
        match self {
            Chord::Line { from, to } => &from.scale(1.0 - s) + &to.scale(s),
            Chord::Arc { log, end } => &unitary_exp(log, 1.0 - s) * *end,
        }
    }
}

struct Tracer<'a> {
    target: &'a FiberTarget,
    opts: &'a ConnectOptions,
    flow: FlowOptions,
    delta_abs: f64,
    rng: SeededRng,
}

impl Tracer<'_> {
    fn project(&self, guess: CMat) -> Option<FrameMatrix> {
        let guess = FrameMatrix::new(guess).ok()?;
        let (f, report) = flow_to_fiber(&guess, self.target, &self.flow).ok()?;
        (report.status == FlowStatus::Converged).then_some(f)
    }

    fn project_with_restarts(&mut self, guess: CMat) -> Option<FrameMatrix> {
        if let Some(f) = self.project(guess.clone()) {
            return Some(f);
        }
        for _ in 0..self.opts.max_restarts {
            let noise = gaussian_matrix(&mut self.rng, guess.rows(), guess.cols());
            let size = self.opts.kick * guess.norm() * (0.5 + self.rng.random::<f64>());
            let kicked = &guess + &noise.scale(size / noise.norm().max(f64::MIN_POSITIVE));
            if let Some(f) = self.project(kicked) {
                return Some(f);
            }
        }
        None
    }

    /// Samples the chord over parameters `t_start..t_end`, beginning at the
    /// already accepted `start` and ending at the literal frame `end`.
    fn trace(
        &mut self,
        chord: &Chord<'_>,
        t_start: f64,
        t_end: f64,
        start: &FrameMatrix,
        end: &FrameMatrix,
        out: &mut Vec<PathSample>,
    ) -> Result<()> {
        let length = start.distance(end);
        let coarse = libm::ceil(length / self.delta_abs).max(1.0) as usize;
        // stack of (chord parameter, refinement depth), next target on top
        let mut pending: Vec<(f64, usize)> = (1..=coarse).rev().map(|i| (i as f64 / coarse as f64, 0)).collect();
        let mut prev_s = 0.0;
        let mut prev_raw = chord.at(0.0);
        let mut prev = start.clone();
        let to_t = |s: f64| if s >= 1.0 { t_end } else { t_start + s * (t_end - t_start) };

        while let Some((s, depth)) = pending.pop() {
            let raw = chord.at(s);
            let candidate = if s >= 1.0 {
                Some(end.clone())
            } else {
                // offset from the chord, tapered so the predictor lands on the segment end
                let taper = (1.0 - s) / (1.0 - prev_s);
                let guess = &raw + &(prev.as_mat() - &prev_raw).scale(taper);
                self.project_with_restarts(guess)
            };
            let reason = match candidate {
                Some(f) if f.distance(&prev) <= self.delta_abs => {
                    out.push(PathSample { t: to_t(s), frame: f.clone() });
                    prev = f;
                    prev_raw = raw;
                    prev_s = s;
                    continue;
                }
                Some(f) => alloc::format!(
                    "step {:e} exceeds delta {:e} at refinement depth {depth}",
                    f.distance(&prev),
                    self.delta_abs
                ),
                None => "projection onto the fiber failed".to_string(),
            };
            if depth >= self.opts.max_refine_depth {
                return Err(Error::ConnectFailed {
                    t: to_t(s),
                    restarts: self.opts.max_restarts,
                    reason,
                });
            }
            pending.push((s, depth + 1));
            pending.push((0.5 * (prev_s + s), depth + 1));
        }
        Ok(())
    }
}

/// A discrete path from `F0` to `F1` inside the fiber of `target`.
///
/// Both endpoints must lie within `path_tol` of the fiber. The returned
/// path passes [`validate_path_between`] with `path_tol` and the absolute
/// step `delta * |F0|_F`; a path that would not is reported as
/// [`Error::ConnectFailed`] instead.
pub fn connect(f0: &FrameMatrix, f1: &FrameMatrix, target: &FiberTarget, opts: &ConnectOptions) -> Result<FramePath> {
    opts.validate()?;
    let d0 = fiber_distance(f0, target)?;
    if d0 > opts.path_tol {
        return Err(Error::EndpointOffFiber { which: "start", distance: d0 });
    }
    let d1 = fiber_distance(f1, target)?;
    if d1 > opts.path_tol {
        return Err(Error::EndpointOffFiber { which: "end", distance: d1 });
    }
    let mut samples = alloc::vec![PathSample { t: 0.0, frame: f0.clone() }];
    if f0 == f1 {
        samples.push(PathSample { t: 1.0, frame: f1.clone() });
        return Ok(FramePath {
            samples,
            target: target.clone(),
        });
    }

    let delta_abs = opts.delta * f0.norm();
    let mut tracer = Tracer {
        target,
        opts,
        flow: FlowOptions {
            tol: opts.path_tol * opts.path_tol,
            max_iters: opts.projection_max_iters,
            ..FlowOptions::default()
        },
        delta_abs,
        rng: seeded(opts.seed),
    };

    let gauge = gauge_align(f0, f1, target.s())?;
    let needs_arc = gauge.aligned.distance(f1) > 1e-12 * f1.norm().max(1.0);
    if needs_arc {
        let mid = gauge.aligned.clone();
        let line = Chord::Line {
            from: f0.as_mat(),
            to: mid.as_mat(),
        };
        tracer.trace(&line, 0.0, 0.5, f0, &mid, &mut samples)?;
        let arc = Chord::Arc {
            log: &gauge.log,
            end: f1.as_mat(),
        };
        tracer.trace(&arc, 0.5, 1.0, &mid, f1, &mut samples)?;
    } else {
        let line = Chord::Line {
            from: f0.as_mat(),
            to: f1.as_mat(),
        };
        tracer.trace(&line, 0.0, 1.0, f0, f1, &mut samples)?;
    }

    let path = FramePath {
        samples,
        target: target.clone(),
    };
    let check = validate_path_between(&path, f0, f1, opts.path_tol, delta_abs);
    match check.failure {
        None => Ok(path),
        Some(failure) => Err(Error::ConnectFailed {
            t: failure.t(&path),
            restarts: opts.max_restarts,
            reason: alloc::format!("{failure:?}"),
        }),
    }
}

/// First defect found by [`validate_path`].
#[derive(Clone, Debug, PartialEq)]
pub enum PathFailure {
    TooShort,
    BadParameterRange { first: f64, last: f64 },
    NonMonotone { index: usize },
    OffFiber { index: usize, distance: f64 },
    Discontinuous { index: usize, step: f64 },
    EndpointMismatch { which: &'static str, distance: f64 },
}

impl PathFailure {
    /// Parameter value of the offending sample.
    pub fn t(&self, path: &FramePath) -> f64 {
        let at = |i: usize| path.samples.get(i).map_or(f64::NAN, |s| s.t);
        match *self {
            PathFailure::TooShort => 0.0,
            PathFailure::BadParameterRange { first, .. } => first,
            PathFailure::NonMonotone { index }
            | PathFailure::OffFiber { index, .. }
            | PathFailure::Discontinuous { index, .. } => at(index),
            PathFailure::EndpointMismatch { which, .. } => {
                if which == "start" {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathValidation {
    pub failure: Option<PathFailure>,
    /// Sample index and `sqrt(Phi)` of the sample furthest from the fiber.
    pub worst_residual: (usize, f64),
    /// Index `i` and length of the longest step `F_{i-1} -> F_i`.
    pub max_step: (usize, f64),
}

impl PathValidation {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks `t_0 = 0`, `t_last = 1`, strictly increasing parameters, every
/// sample within `tol` of the fiber (`sqrt(Phi) <= tol`), and every step at
/// most `delta`. Reports the first failure in that order.
// negated comparisons so that NaN fails every check
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn validate_path(path: &FramePath, tol: f64, delta: f64) -> PathValidation {
    let mut worst_residual = (0, 0.0);
    let mut max_step = (0, 0.0);
    let mut failure = None;
    let fail = |f: PathFailure, slot: &mut Option<PathFailure>| {
        if slot.is_none() {
            *slot = Some(f);
        }
    };
    let n = path.samples.len();
    if n < 2 {
        fail(PathFailure::TooShort, &mut failure);
    } else {
        let (first, last) = (path.samples[0].t, path.samples[n - 1].t);
        if first != 0.0 || last != 1.0 {
            fail(PathFailure::BadParameterRange { first, last }, &mut failure);
        }
        if let Some(i) = (1..n).find(|&i| !(path.samples[i].t > path.samples[i - 1].t)) {
            fail(PathFailure::NonMonotone { index: i }, &mut failure);
        }
    }
    let mut off = None;
    for (i, sample) in path.samples.iter().enumerate() {
        let d = fiber_distance(&sample.frame, &path.target).unwrap_or(f64::INFINITY);
        if d > worst_residual.1 || (i == 0 && d.is_infinite()) {
            worst_residual = (i, d);
        }
        if !(d <= tol) && off.is_none() {
            off = Some(PathFailure::OffFiber { index: i, distance: d });
        }
    }
    if let Some(f) = off {
        fail(f, &mut failure);
    }
    let mut gap = None;
    for i in 1..n {
        let step = path.samples[i].frame.distance(&path.samples[i - 1].frame);
        if step > max_step.1 {
            max_step = (i, step);
        }
        if !(step <= delta) && gap.is_none() {
            gap = Some(PathFailure::Discontinuous { index: i, step });
        }
    }
    if let Some(f) = gap {
        fail(f, &mut failure);
    }
    PathValidation {
        failure,
        worst_residual,
        max_step,
    }
}

/// [`validate_path`] plus `|path start - F0| <= tol` and `|path end - F1| <= tol`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn validate_path_between(path: &FramePath, f0: &FrameMatrix, f1: &FrameMatrix, tol: f64, delta: f64) -> PathValidation {
    let mut report = validate_path(path, tol, delta);
    if report.failure.is_some() || path.samples.is_empty() {
        return report;
    }
    let ends = [
        ("start", &path.samples[0].frame, f0),
        ("end", &path.samples[path.samples.len() - 1].frame, f1),
    ];
    for (which, got, want) in ends {
        let distance = if got.k() == want.k() && got.n() == want.n() {
            got.distance(want)
        } else {
            f64::INFINITY
        };
        if !(distance <= tol) {
            report.failure = Some(PathFailure::EndpointMismatch { which, distance });
            break;
        }
    }
    report
}
