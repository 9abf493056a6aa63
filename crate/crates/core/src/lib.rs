//! Finite complex frames as points on momentum-map fibers.
//!
//! A frame of `N` vectors in `C^k` is a full-rank `k x N` matrix `F`. The
//! left `U(k)` action and the right action of diagonal unitaries are
//! Hamiltonian with momentum maps `F -> F F*` and `F -> (-|f_j|^2 / 2)_j`,
//! so the frames with prescribed frame operator `S` and squared norms `r`
//! form a momentum level set. This crate verifies the symplectic identities
//! behind that picture, decides and constructs nonempty level sets, repairs
//! frames that sit near one, and traces discrete paths inside a level set.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod flows;
pub mod frame;
pub mod gram;
pub mod homotopy;
pub mod linalg;
pub mod momentum;
pub mod sampling;
pub mod synthesis;

pub use error::{Error, Result};
pub use flows::{
    alternate_projections, fiber_distance, fiber_residual, fiber_residual_gradient, flow_to_fiber,
    project_frame_operator, project_norms, FlowOptions, FlowReport, FlowStatus,
};
pub use frame::{
    analysis, frame_bounds, frame_operator, gram, is_funtf, is_tight, norms_squared, synthesis,
    FrameBounds, FrameMatrix, HermitianMatrix, NormSquaredVector,
};
pub use gram::{flag_type, orbit_dimension, reduced_dimension, same_gram_class, unitary_equivalent, FlagType};
pub use homotopy::{connect, gauge_align, validate_path, validate_path_between, ConnectOptions, FramePath, PathSample};
pub use linalg::{CMat, C64};
pub use momentum::{
    defining_property_residual, infinitesimal_field, is_regular_value, momentum, momentum_derivative_unitary,
    momentum_torus, momentum_unitary, symplectic_form, LieAlgebraElement, MomentumValue, RegularityDiagnosis,
    TangentMatrix,
};
pub use synthesis::{
    construct_frame, construct_on_fiber, is_admissible, random_frame_on_fiber, Admissibility,
    AdmissibilityViolation, FiberTarget, SpectrumSpec,
};
