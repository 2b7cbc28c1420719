//! Shared fixtures for the pipeline benchmarks.

use johnforge_core::geometry::{
    rasterize, whitney, CompactSetMask, ShapeSpec, WhitneyDecomposition,
};

/// Rasterizes `spec` in its default frame.
pub fn mask(spec: &str, level: u32) -> CompactSetMask {
    let s: ShapeSpec = spec.parse().expect("valid shape");
    rasterize(&s, s.default_box().expect("finite shape"), level).expect("rasterizes")
}

/// The set and the Whitney decomposition of its complement at full depth.
pub fn decomposed(spec: &str, level: u32) -> (CompactSetMask, WhitneyDecomposition) {
    let m = mask(spec, level);
    let w = whitney(&m, level).expect("decomposes");
    (m, w)
}
