//! Alternate classification losses with exact analytic derivatives, numeric
//! property probes, a minimal dense classifier with loss-parameterized
//! backpropagation, and a deterministic training benchmark harness.

pub mod data;
pub mod harness;
pub mod losses;
pub mod network;
pub mod optim;

pub use data::Dataset;
pub use harness::{RunRecord, TrainConfig};
pub use losses::{LossFamily, LossPoint, LossSpec, Variant};
pub use network::{Activation, GradientBundle, Network, OutputHead};
pub use optim::{OptimizerKind, OptimizerState};
