pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod rate_model;
pub mod ase_optimizer;
pub mod energy_planner;
pub mod mc_sim;
pub mod cli;
