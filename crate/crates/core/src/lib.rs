//! Coupled exclusion processes, their height functions and the
//! Hopf-Cole/KPZ diagnostics built on them.
//!
//! Modules, bottom-up: [`lattice`] (configurations, heights, viable max/min),
//! [`dynamics`] (rate models and the basic coupling), [`initdata`] (coupled
//! initial data), [`scaling`] (weak-asymmetry rescaling and the Hopf-Cole
//! martingale), [`diagnostics`] (norms, quadratic variation, ordering) and
//! [`harness`] (configs, ensembles, manifests).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod harness;
pub mod initdata;
pub mod lattice;
pub mod scaling;
pub mod seeds;
pub mod stats;

pub use diagnostics::{
    DiagnosticsError, GridFunction, NormParams, NormValue, OrderingKind, Verdict,
};
pub use dynamics::{
    ClockScheme, CoupledState, Direction, DynamicsError, EvolveOptions, ModelLabel, RateModel,
    Snapshot, Trajectory,
};
pub use harness::{ExperimentConfig, HarnessError, RunManifest};
pub use initdata::{ApproxHeight, InitError, ProfileSpec, SmoothProfile};
pub use lattice::{
    BoundaryMode, Configuration, HeightFunction, HeightSnapshot, LatticeError, Window,
};
pub use scaling::{DriftSign, HopfColeConstants, ScalingError, ScalingParams};
pub use stats::{Estimate, Moments};

/// Any error raised by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Init(#[from] InitError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}
