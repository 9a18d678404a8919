//! Active-learning-driven POD-KSNN surrogate models for parametric
//! nonlinear dynamical systems.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches files,
//! clocks or threads lives in the `actlearn` companion crate.
//!
//! Layout, bottom-up:
//! - [`linalg`]: pivoted LU with many right-hand sides, thin SVD.
//! - [`ksnn`]: radial kernel shallow networks (exact RBF interpolation).
//! - [`pod`]: snapshot matrices and energy-truncated POD bases.
//! - [`estimator`]: the interpolated relative POD error estimate.
//! - [`active`]: the greedy offline loop selecting snapshot parameters.
//! - [`surrogate`]: parameter/time two-step interpolation and online queries.
//! - [`fom`]: full-order models (closed-form Burgers, 1D shallow water).
#![no_std]

extern crate alloc;

pub mod active;
pub mod estimator;
pub mod fom;
pub mod grid;
pub mod ksnn;
pub mod linalg;
pub mod pod;
pub mod surrogate;

pub use active::{
    run_offline, run_offline_timed, ActiveLearningConfig, ActiveLearningReport, Clock,
    OfflineOutcome,
};
pub use estimator::{ErrorEstimator, ErrorSnapshot, NormKind};
pub use fom::{FomConfig, FomProvider};
pub use ksnn::{KernelChoice, KernelKind, KernelSpec, Ksnn};
pub use linalg::Matrix;
pub use pod::{PodBasis, SnapshotMatrix, Truncation};
pub use surrogate::{OnlineQueryResult, TrainedSurrogate};
