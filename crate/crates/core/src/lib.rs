//! Capacities, p-parabolicity and Stokes-type vanishing checks on
//! rotationally symmetric model manifolds `dt² + h(t)² dθ²`.
//!
//! All radial quantities reduce to one-dimensional integrals of the warping
//! function; tails are decided from the analytic form of the last segment of
//! `h`, never from a finite truncation alone.

// Negated comparisons reject NaN on purpose; quadrature nodes are tabulated in full.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod capacity;
pub mod conditions;
pub mod cutoffs;
pub mod geometry;
pub mod inequalities;
pub mod numerics;
pub mod profiles;
pub mod radial;
pub mod report;
pub mod sobolev;
pub mod stokes;

pub use capacity::{
    classify_parabolicity, CapacityBounds, Certificate, Parabolicity, ParabolicityVerdict, VolumeConstant,
};
pub use conditions::{Condition, ConditionReport, DensityMeaning, GapFunction, RadialDensity, Thresholds, Verdict};
pub use geometry::{Exponent, GeometryError, ModelManifold};
pub use numerics::{Convergence, ConvergenceResult, Envelope, QuadratureConfig, TailKind, TailModel};
pub use profiles::{ProfileError, RadialProfile, Segment, SegmentKind, WarpingProfile};
pub use radial::{FnRadial, RadialFunction};
pub use stokes::{Conclusion, RadialField, StokesReport};

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Profile(#[from] profiles::ProfileError),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Cutoff(#[from] cutoffs::CutoffError),
    #[error(transparent)]
    Condition(#[from] conditions::ConditionError),
    #[error(transparent)]
    Stokes(#[from] stokes::StokesError),
    #[error(transparent)]
    Inequality(#[from] inequalities::InequalityError),
    #[error(transparent)]
    Sobolev(#[from] sobolev::SobolevError),
    #[error(transparent)]
    Report(#[from] report::ReportError),
}
