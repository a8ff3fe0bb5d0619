//! Undirected targets. Each directed wiring arc `u → w` becomes the edge
//! from the out-end of `u` to the in-end of `w`; parity graphs use their
//! split undirected form and borders become three-vertex paths.

use super::{build, ReduceError, ReducedInstance, Regime};
use crate::hybrid::HybridInstance;

pub fn build_tsp12(h: &HybridInstance) -> Result<ReducedInstance, ReduceError> {
    build(h, Regime::Tsp12)
}

pub fn build_tsp14(h: &HybridInstance) -> Result<ReducedInstance, ReduceError> {
    build(h, Regime::Tsp14)
}
