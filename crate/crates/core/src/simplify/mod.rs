//! Cutting a domain along slits on Whitney-square boundaries so that it
//! becomes simply connected while keeping its boundary and a John arc
//! structure: a layered spanning tree of squares, walls with gates along
//! the tree edges, and the checks that certify the result.

mod graph;
mod slits;
mod verify;

pub use graph::{
    build_graph, certify, GraphCertificate, GraphVertex, JohnGraph, LayerFamily, MAX_CHILDREN,
};
pub use slits::{cut_slits, SimplifiedDomain, SlitArc, SlitSet, SquareSlit, SUBDIVISION};
pub use verify::{complement_mask, verify_simplified, Check, JohnComparison, VerificationReport};

/// Default layer constant.
pub const DEFAULT_A: f64 = 8.0;
/// Default gate parameter.
pub const DEFAULT_DELTA: f64 = 0.1;
