pub mod data;
pub mod error;
pub mod estimators;
pub mod pipeline;
pub mod rules;
pub mod solver;
pub mod synth;
pub mod theory;

pub use error::{Error, ErrorKind, Result};
