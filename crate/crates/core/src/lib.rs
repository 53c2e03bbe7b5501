//! Metric modulars on sets: evaluation, sampled verification of the modular
//! axioms, the induced metrics `d_w` and `d_w*`, modular sets and modular
//! convergence, contraction checks and fixed-point iteration.
//!
//! A [`Modular`] is a rule `(λ, x, y) ↦ w_λ(x, y) ∈ [0, ∞]` over a
//! [`PointSpace`]. Property sweeps draw samples from a seeded
//! [`SamplingPlan`] and return a [`CheckReport`] listing every violated
//! inequality with a replayable witness.

pub mod check;
pub mod error;
pub mod extreal;
pub mod fixedpoint;
pub mod induced;
pub mod modular;
pub mod report;
pub mod sampling;
pub mod sets;
pub mod spaces;

pub use check::{check_property, Property};
pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use fixedpoint::{ContractionParams, MapSpec, SelfMap, SolveReport, StopReason};
pub use modular::{Modular, ModularFlags};
pub use report::{CheckReport, Slack, Status, Witness};
pub use sampling::SamplingPlan;
pub use spaces::{builtin_modular, BuiltinKind, Cell, LandmassGrid, Point, PointSpace, SpaceKind};
