//! Reductions from the Hybrid problem to bounded-metric TSP and ATSP, with
//! exact oracles for checking every gadget property and length formula at
//! desk scale.

pub mod bounds;
pub mod gadgets;
pub mod hybrid;
pub mod metric;
pub mod oracle;
pub mod reduce;

pub use gadgets::Regime;
