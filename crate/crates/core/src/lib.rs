//! Numerical toolkit for planar John domains and Sobolev removability.
//!
//! Everything lives on a dyadic pixel grid over a fixed [`geometry::BoundingBox`]:
//!
//! * [`geometry`]: rasterized compact sets, exact distance transforms and
//!   Whitney decompositions of the complement.
//! * [`john`]: certified lower bounds for the John constant.
//! * [`simplify`]: spanning-tree slit surgery turning a John domain into a
//!   simply connected one with the same boundary.
//! * [`potential`]: logarithmic capacity, discrete harmonic functions,
//!   harmonic measure and Cauchy transforms.
//! * [`removability`]: collar smoothing experiments and the positive-area
//!   witness.

// Grids are indexed by flat pixel index throughout, and `!(x > 0.0)` is the
// NaN-rejecting form of parameter checks.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod john;
pub mod potential;
pub mod removability;
pub mod simplify;
pub mod svg;

pub use error::{Error, Result};
pub use geometry::{
    distance_transform, rasterize, whitney, BoundingBox, CompactSetMask, DistanceField,
    DyadicSquare, MaskFile, Point, ShapeSpec, WhitneyDecomposition, WhitneyFile,
};
pub use john::{estimate_john_constant, JohnArcCertificate, JohnCenter, JohnEstimate};
pub use potential::{
    capacity_estimate, cauchy_transform, dirichlet_energy, harmonic_measure_wos, harmonic_solve,
    oscillation_capacity, verify_beurling, CapacityEstimate, CapacityMethod, ComplexField,
    HarmonicField,
};
pub use removability::{
    build_test_function, energy_density, nonremovability_witness, offk_energy, removability_report,
    smooth_in_collar, Collar, RemovabilityReport, TraceSpec, WitnessReport,
};
pub use simplify::{build_graph, cut_slits, verify_simplified, JohnGraph, SimplifiedDomain};

/// Schema tag written into every JSON artifact.
pub const SCHEMA: &str = "johnforge/1";
