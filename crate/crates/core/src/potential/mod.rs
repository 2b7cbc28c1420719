//! Numerical potential theory on the dyadic grid: logarithmic capacity,
//! discrete harmonic functions, harmonic measure and Cauchy transforms.

mod beurling;
mod capacity;
mod cauchy;
mod harmonic;
mod oscillation;
mod solver;
mod wos;

pub use beurling::{
    arc_capacity, verify_beurling, BeurlingReport, ConformalMap, DistortionRow, RayLengthRow,
};
pub use capacity::{
    capacity_estimate, equilibrium_measure, point_set_capacity, CapacityEstimate, CapacityMethod,
    EquilibriumMeasure, UNIT_SQUARE_CAPACITY,
};
pub use cauchy::{cauchy_transform, ComplexField};
pub use harmonic::{
    dirichlet_energy, disk_dirichlet_problem, harmonic_solve, harmonic_solve_from, HarmonicField,
    SOLVER_TOLERANCE,
};
pub use oscillation::{oscillation_capacity, HarmonicPolynomial};
pub use wos::{harmonic_measure_wos, AngularArc, WalkDomain, WosEstimate, WALK_CAP};

pub(crate) use harmonic::neighbours;
