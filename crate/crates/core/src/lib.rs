//! A laboratory for the intrinsic isoperimetry of the giant component of
//! supercritical bond percolation on the square lattice.
//!
//! The crate has two halves. The discrete half samples bond percolation on a
//! padded box ([`lattice`]), walks right-most paths and their medial-graph
//! interfaces ([`rightmost`]), estimates the boundary norm from right-boundary
//! distances ([`beta`]) and sandwiches the Cheeger constant of the giant
//! component between a rigorous lower bound and a stochastic upper bound
//! ([`cheeger`]). The continuum half ([`continuum`]) evaluates the restricted
//! surface energy of polygons in `[-1,1]^2` under a norm, builds Wulff shapes
//! and solves the area-constrained conductance problem numerically.
//!
//! [`harness`] ties both halves together into reproducible scaling and shape
//! experiments with CSV output.

pub mod beta;
pub mod cheeger;
pub mod continuum;
pub mod geom;
pub mod harness;
pub mod lattice;
pub mod ratio;
pub mod rightmost;

pub use geom::{Dir, Edge, OrientedEdge, Vertex};
pub use lattice::{ClusterLabeling, Config, Subgraph};
pub use ratio::Ratio;
