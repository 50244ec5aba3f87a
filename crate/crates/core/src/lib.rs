//! Statistically certified codec selection.
//!
//! Given a tabulated [`CriterionMatrix`] of per-sample criterion values for a
//! finite family of codecs, this crate builds confidence rectangles around the
//! true criterion means and uses them to select codecs that are near-optimal
//! for a nonnegative linear [`Objective`] subject to linear constraints.
//!
//! Two selection procedures are provided:
//!
//! - [`gs::global_sampling`] evaluates every codec on the whole sample once.
//! - [`psp::psp`] consumes the sample in doubling batches, intersects the
//!   intervals across batches and prunes codecs that are provably infeasible
//!   or provably suboptimal.
//!
//! Four interval constructions are available through [`BoundMethod`]: a
//! finite-sample bound driven by the empirical maximum discrepancy (EMD), an
//! asymptotic, variance-sensitive EMD bound, a Hoeffding union bound and a
//! Gaussian-Chernoff union bound.
//!
//! The crate is `no_std` (with `alloc`); file formats, synthetic worlds and the
//! command line live in the `codecsel` companion crate.

#![no_std]
#![warn(missing_docs)]

extern crate alloc;

pub mod bounds;
mod error;
pub mod gs;
mod interval;
mod matrix;
mod objective;
pub mod psp;
mod rectangle;
mod report;

pub use bounds::BoundMethod;
pub use error::{Error, Result};
pub use interval::Interval;
pub use matrix::CriterionMatrix;
pub use objective::{ConstraintSpace, Feasibility, HalfSpace, Objective};
pub use rectangle::{objective_interval, rectangle_vs_constraints, ConfidenceRectangle};
pub use report::{
    Algorithm, BoundViolation, Certificate, PspTraceEntry, Sandwich, SelectionReport,
    TerminationReason,
};
