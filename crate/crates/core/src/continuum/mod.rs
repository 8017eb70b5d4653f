//! The continuum side of the problem: restricted surface energy of polygons
//! in `[-1,1]^2` under a norm, Wulff constructions, the numerical solver for
//! the area-constrained conductance problem, polygonal approximation of
//! rectifiable curves and the ℓ∞ Hausdorff distance.
//!
//! The restricted functional only charges the part of a region's boundary
//! inside the open square; boundary resting on the square's sides is free.
//! That is what distinguishes this problem from the unrestricted Wulff
//! problem and makes corner and side shapes competitive.

mod approx;
mod norm;
mod polygon;
mod solve;
mod wulff;

pub use approx::{hausdorff_distance, polygon_samples, polygonal_approximation, Shape};
pub use norm::Norm;
pub use polygon::Polygon;
pub use solve::{solve_restricted, CandidateRegion, FamilyValue, SolverSettings, VariationalResult};
pub use wulff::{quarter_wulff_conductance, wulff_shape, QuarterWulff};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContinuumError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("polygon is degenerate: {0}")]
    Degenerate(String),
    #[error("polygon is not simple")]
    NotSimple,
    #[error("polygon leaves the closed square [-1,1]^2")]
    OutOfSquare,
    #[error("could not produce a simple approximation")]
    ApproximationFailed,
}
