//! Numerical laboratory for large-time heat kernel behavior on rotationally
//! symmetric spaces with nonnegative Ricci curvature.
//!
//! The crate builds a doubly warped product metric on ℝ⁸ whose volume growth
//! exponent oscillates across doubly-exponentially spaced radial bands,
//! certifies its curvature, solves radial weighted heat equations, expands
//! Dirichlet kernels in Sturm–Liouville eigenpairs, and measures blow-down
//! limits of V(√t)·H(y,y,t) along different time sequences.

pub mod blowdown;
pub mod bounds;
pub mod config;
pub mod curvature;
pub mod error;
pub mod lognum;
pub mod params;
pub mod profile;
pub mod radial;
pub mod report;
pub mod solver;
pub mod spectral;
pub mod svg;

pub use error::Error;
pub use lognum::LogNum;
