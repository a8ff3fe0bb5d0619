//! Directed targets. Both share one graph; (1,2) charges every arc 1 and
//! (1,4) charges parity-graph arcs 1, wiring arcs 2, and closes the metric
//! under shortest paths capped at 4.

use super::{build, ReduceError, ReducedInstance, Regime};
use crate::hybrid::HybridInstance;
use crate::metric::{to_max01, Max01Instance};

pub fn build_atsp12(h: &HybridInstance) -> Result<ReducedInstance, ReduceError> {
    build(h, Regime::Atsp12)
}

pub fn build_atsp14(h: &HybridInstance) -> Result<ReducedInstance, ReduceError> {
    build(h, Regime::Atsp14)
}

/// MAX-(0,1)-ATSP view of a (1,2) instance: weight 1 on its unit arcs.
pub fn max01(inst: &ReducedInstance) -> Result<Max01Instance, ReduceError> {
    Ok(to_max01(inst.metric())?)
}
