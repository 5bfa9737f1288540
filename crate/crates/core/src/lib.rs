//! Spatial birth-and-death chains on finite point configurations.
//!
//! The crate provides the configuration space with its bottleneck metric, the
//! Lebesgue-Poisson measure, birth/death rate models, the embedded jump chain,
//! constructive paths with certified probability bounds, and an experiment
//! harness checking that the chain hits exactly the sets of positive
//! Lebesgue-Poisson measure.

pub mod cli;
pub mod config_space;
pub mod embedded_chain;
pub mod geometry;
pub mod irreducibility_lab;
pub mod lebesgue_poisson;
pub mod path_machinery;
pub mod rate_models;
pub mod stats;

pub use config_space::{distance_rho, in_ball, Configuration, Point, RhoBall};
pub use embedded_chain::{NullPredicate, TargetPiece, TargetSet, Trajectory};
pub use rate_models::{ContactModel, ContactParams, RateModel};
