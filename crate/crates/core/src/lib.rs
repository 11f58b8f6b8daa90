pub mod bernstein;
pub mod branching;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod flow;
pub mod generator;
pub mod measure;
pub mod numerics;

pub use error::{Error, Result};
pub use numerics::Complex;
