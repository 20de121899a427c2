pub mod checkers;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod objective;
pub mod par;
pub mod problems;
pub mod rng;
pub mod smoothing;
pub mod solvers;
pub mod theory;
pub mod vector;

pub use error::{Error, Result};
pub use geometry::FeasibleSet;
pub use objective::{FnObjective, Objective};
pub use rng::RandomStream;
pub use vector::Vector;
