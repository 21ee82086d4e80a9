//! Adaptive constant-depth constructions compiled to [`AdaptiveCircuit`](crate::sim::AdaptiveCircuit).

pub mod ccu;
pub mod charge;
pub mod depth;
pub mod gadgets;
pub mod monotone;
pub mod prepare;
pub mod ribbon;
